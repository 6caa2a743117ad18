"""Acceptance suite: one criterion per test, one pass/fail line per criterion."""

from __future__ import annotations

import pytest

from netforms.acceptance import CRITERIA


@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=lambda c: f"criterion_{c}")
def test_criterion(cid, capsys):
    result = CRITERIA[cid](0)
    with capsys.disabled():
        print("\n" + result.line())
    failed = [c for c in result.checks if not c.passed]
    assert result.passed, "; ".join(f"{c.name}: {c.detail}" for c in failed) or "runtime limit exceeded"

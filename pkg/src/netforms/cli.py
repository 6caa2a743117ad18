"""Command line: analyze, admissible, simulate, irreducible, verify.

Exit codes: 0 success or verdict true, 1 verdict false, 2 input error,
3 internal failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .errors import InputError, NetformsError
from .graph import adjacency, classify, incidence, is_connected, layering
from .io import dumps, load_graph, load_projection, load_scenario, write_trajectory_csv
from .irreducibility import decomposition, irreducible
from .semigroup import (
    DynamicBC,
    NetworkHeat,
    check_domination,
    check_energy,
    check_even_symmetry,
    check_Linf,
    check_mass,
    check_positivity,
    check_subspace_invariance,
    decay_rate,
    find_linf_violation,
    run,
    ProbeResult,
)
from .symmetry import SubspaceSpec, admissible, oracle_admissible

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def worker_count() -> int:
    raw = os.environ.get("NETFORMS_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"NETFORMS_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"NETFORMS_THREADS must be a positive integer, got {raw!r}")
    return n


# -- analyze ------------------------------------------------------------------------
def cmd_analyze(args) -> int:
    g = load_graph(args.graph)
    inc = incidence(g)
    lay = layering(g)
    report = {
        "vertices": g.vertex_ids,
        "edges": g.edge_ids,
        "connected": is_connected(g),
        "classification": classify(g).to_dict(),
        "incidence": {"plus": inc.plus, "minus": inc.minus, "signed": inc.signed},
        "adjacency": adjacency(g),
        "degrees": {
            v.id: {
                "in": int(g.in_degree[k]),
                "out": int(g.out_degree[k]),
                "degree": int(g.degree[k]),
                "infinite": v.infinite,
            }
            for k, v in enumerate(g.vertices)
        },
        "layers": {
            "count": lay.count,
            "cyclic": lay.cyclic,
            "symmetric": lay.symmetric,
            "vertex_layer": dict(zip(g.vertex_ids, (int(x) for x in lay.vertex_layer))),
        },
        "spans": decomposition(g).to_dict(),
    }
    _emit(report)
    return EXIT_OK


# -- admissible -----------------------------------------------------------------------
def cmd_admissible(args) -> int:
    g = load_graph(args.graph)
    Y = load_projection(args.projection)
    v = admissible(g, Y, tol=args.tol)
    out = v.to_dict()
    if args.oracle_samples > 0:
        o = oracle_admissible(g, Y, samples=args.oracle_samples, seed=args.seed)
        out["oracle"] = {"admissible": o, "samples": args.oracle_samples, "seed": args.seed, "agrees": o == v.admissible}
    _emit(out)
    return EXIT_OK if v.admissible else EXIT_FALSE


# -- simulate -------------------------------------------------------------------------
def _probe(name: str, spec: dict, traj, scenario_file) -> ProbeResult:
    sc, stepper, seed = scenario_file.scenario, scenario_file.stepper, scenario_file.seed
    if name == "decay_rate":
        expected = spec.get("expected")
        return decay_rate(traj, float(expected) if expected is not None else None)
    if name == "invariance":
        Y = spec.get("subspace", "full")
        Y = SubspaceSpec.from_json(Y) if isinstance(Y, dict) else SubspaceSpec(str(Y))
        return check_subspace_invariance(traj, Y)
    if name == "positivity":
        return check_positivity(traj)
    if name == "mass":
        return check_mass(traj)
    if name == "linf":
        res = check_Linf(traj)
        if isinstance(sc, DynamicBC):
            found, ratio, _ = find_linf_violation(sc.n, stepper, seed)
            res = ProbeResult(res.name, res.status, res.value, {**res.detail, "search": {"found": found, "ratio": ratio}})
        return res
    if name == "domination":
        if isinstance(sc, NetworkHeat):
            a = NetworkHeat(sc.graph, sc.n, np.abs(sc.initial_state()), sc.C, sc.M, sc.lumped)
            return check_domination(run(a, stepper), traj)
        if isinstance(sc, DynamicBC):
            z0 = sc.initial_state()
            N = sc.system.n_dofs
            u = sc.system.dofs.edge_values(z0[:N])[0]
            a = DynamicBC(sc.n, np.abs(u), tuple(np.abs(z0[N:])), coupled=True, lumped=sc.lumped)
            b = DynamicBC(sc.n, u, tuple(z0[N:]), coupled=False, lumped=sc.lumped)
            return check_domination(run(a, stepper), run(b, stepper))
        return ProbeResult("domination", "not_applicable", None)
    if name == "even_symmetry":
        return check_even_symmetry(traj)
    if name == "energy":
        if sc.kind != "damped_wave":
            return ProbeResult("energy", "not_applicable", None)
        return check_energy(traj)
    raise InputError(f"unknown probe {name!r}")


def cmd_simulate(args) -> int:
    sf = load_scenario(args.scenario)
    if args.seed is not None:
        sf.seed = args.seed
    traj = run(sf.scenario, sf.stepper)
    if args.out:
        write_trajectory_csv(args.out, traj.times, traj.states)
    probes = {}
    for spec in sf.probes:
        name = spec["name"]
        key = spec.get("id", name)
        probes[key] = _probe(name, spec, traj, sf).to_dict()
    summary = {
        "scenario": sf.scenario.kind,
        "scheme": sf.stepper.scheme,
        "dt": sf.stepper.dt,
        "T": sf.stepper.T,
        "steps": sf.stepper.steps,
        "n": sf.scenario.n,
        "state_size": int(traj.states.shape[1]),
        "seed": sf.seed,
        "final_norm": traj.norm(traj.states[-1]),
        "probes": probes,
    }
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            fh.write(dumps(summary) + "\n")
    else:
        _emit(summary)
    failed = any(p["status"] == "fail" for p in probes.values())
    return EXIT_FALSE if failed else EXIT_OK


# -- irreducible ----------------------------------------------------------------------
def cmd_irreducible(args) -> int:
    g = load_graph(args.graph)
    res = irreducible(g)
    _emit(res.to_dict())
    return EXIT_OK if res.verdict else EXIT_FALSE


# -- verify ---------------------------------------------------------------------------
def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, SUITES

    ids = SUITES[args.suite]
    workers = min(worker_count(), len(ids))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda i: CRITERIA[i](args.seed), ids))
    results.sort(key=lambda r: r.id)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    passed = all(r.passed for r in results)
    _emit({"suite": args.suite, "seed": args.seed, "passed": passed, "criteria": [r.to_dict() for r in results]})
    return EXIT_OK if passed else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netforms", description="Forms, symmetries and semigroups on networks.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="classification, incidence matrices, degrees and spans of a graph")
    a.add_argument("graph")
    a.set_defaults(func=cmd_analyze)

    a = sub.add_parser("admissible", help="decide admissibility of a symmetry projection")
    a.add_argument("graph")
    a.add_argument("projection")
    a.add_argument("--tol", type=float, default=1e-10)
    a.add_argument("--oracle-samples", type=int, default=0)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_admissible)

    a = sub.add_parser("simulate", help="integrate a scenario and run its probes")
    a.add_argument("scenario")
    a.add_argument("--out", help="trajectory CSV path")
    a.add_argument("--summary", help="probe summary JSON path (default: stdout)")
    a.add_argument("--seed", type=int, default=None)
    a.set_defaults(func=cmd_simulate)

    a = sub.add_parser("irreducible", help="decide irreducibility and list invariant ideals")
    a.add_argument("graph")
    a.set_defaults(func=cmd_irreducible)

    a = sub.add_parser("verify", help="run the acceptance suite")
    a.add_argument("--suite", choices=("combinatorial", "numerical", "all"), default="all")
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"netforms: error: {exc}\n")
        return EXIT_INPUT
    except NetformsError as exc:
        sys.stderr.write(f"netforms: failure: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"netforms: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""JSON/CSV readers and writers for the command line."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import InputError
from .forms import FormMatrix
from .graph import Graph, build_graph
from .mesh import EdgeMesh, affine, interpolate
from .semigroup import DampedWave, DynamicBC, NetworkHeat, Scenario, Stepper
from .symmetry import SubspaceSpec

SCENARIOS = ("network_heat", "damped_wave", "dynamic_bc")
PROBES = ("decay_rate", "invariance", "positivity", "mass", "linf", "domination", "even_symmetry", "energy")


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def _plain(obj: Any) -> Any:
    """Numpy scalars/arrays to JSON types; complex numbers to [re, im]."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def load_graph(source: str | Path | Mapping) -> Graph:
    spec = source if isinstance(source, Mapping) else read_json(source)
    if not isinstance(spec, Mapping):
        raise InputError("graph file must contain a JSON object")
    return build_graph(spec)


def load_projection(path: str | Path) -> SubspaceSpec:
    spec = read_json(path)
    if not isinstance(spec, Mapping):
        raise InputError("projection file must contain a JSON object")
    return SubspaceSpec.from_json(spec)


def load_form_matrix(path: str | Path) -> FormMatrix:
    spec = read_json(path)
    if not isinstance(spec, Mapping):
        raise InputError("form-matrix file must contain a JSON object")
    try:
        return FormMatrix.from_json(spec)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed form-matrix file: {exc}") from None


# -- initial data -----------------------------------------------------------------
def _profile(spec: Mapping) -> Any:
    """Initial data kinds shared by every scenario, as a function of x in [0, 1]."""
    kind = spec.get("kind", "zero")
    value = float(spec.get("value", 1.0))
    mode = float(spec.get("mode", 1))
    if kind == "zero":
        return lambda x: np.zeros_like(x)
    if kind == "constant":
        return lambda x: np.full_like(x, value)
    if kind == "sine":
        return lambda x: value * np.sin(mode * np.pi * x)
    if kind == "cosine":
        return lambda x: value * np.cos(mode * np.pi * x)
    if kind == "samples":
        return np.asarray(spec.get("values", []), dtype=float)
    raise InputError(f"unknown initial-data kind {kind!r}")


def _network_initial(graph: Graph, mesh: EdgeMesh, spec: Mapping) -> np.ndarray:
    from .mesh import DofMap

    kind = spec.get("kind", "zero")
    if kind == "edge_indicator":
        dofs = DofMap(graph, mesh)
        u = np.zeros(dofs.n_dofs)
        u[dofs.interior(graph.edge_index(str(spec.get("edge"))))] = float(spec.get("value", 1.0))
        return u
    if kind == "vertex_hat":
        vid = str(spec.get("vertex"))
        d = np.zeros(graph.n_vertices)
        try:
            d[graph.vertex_index(vid)] = float(spec.get("value", 1.0))
        except KeyError:
            raise InputError(f"unknown vertex {vid!r}") from None
        return affine(graph, mesh, d)
    if kind == "samples" and isinstance(spec.get("values"), Mapping):
        data = {k: np.asarray(v, dtype=float) for k, v in spec["values"].items()}
        return interpolate(graph, mesh, data)
    f = _profile(spec)
    return interpolate(graph, mesh, [f] * graph.n_edges if callable(f) else f)


@dataclass
class ScenarioFile:
    scenario: Scenario
    stepper: Stepper
    probes: list[dict] = field(default_factory=list)
    seed: int = 0


def _probe_list(raw: Any) -> list[dict]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise InputError("probes must be a list")
    out = []
    for p in raw:
        item = {"name": p} if isinstance(p, str) else dict(p)
        if item.get("name") not in PROBES:
            raise InputError(f"unknown probe {item.get('name')!r}; expected one of {PROBES}")
        out.append(item)
    return out


def _alpha(raw: Any) -> complex:
    if raw is None:
        return 1.0
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise InputError("alpha must be a number or a [re, im] pair")
        return complex(float(raw[0]), float(raw[1]))
    return float(raw)


def load_scenario(path: str | Path) -> ScenarioFile:
    spec = read_json(path)
    if not isinstance(spec, Mapping):
        raise InputError("scenario file must contain a JSON object")
    kind = spec.get("scenario")
    if kind not in SCENARIOS:
        raise InputError(f"unknown scenario {kind!r}; expected one of {SCENARIOS}")
    try:
        n = int(spec.get("mesh", {}).get("n", 32))
        st = spec.get("stepper", {})
        stepper = Stepper(str(st.get("scheme", "backward_euler")), float(st.get("dt", 1e-3)), float(st.get("T", 0.1)))
    except (TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"invalid mesh or stepper: {exc}") from None
    mesh = EdgeMesh(n)
    init = spec.get("initial", {}) or {}
    lumped = spec.get("lumped")
    if kind == "network_heat":
        g = spec.get("graph")
        if g is None:
            raise InputError("network_heat scenario needs a graph")
        if isinstance(g, str):
            g = Path(path).parent / g
        graph = load_graph(g)
        u0 = _network_initial(graph, mesh, init)
        sc: Scenario = NetworkHeat(graph, n, u0, spec.get("C"), spec.get("M"), lumped)
        sc.system  # assemble now so bad C/M surface as input errors
    elif kind == "damped_wave":
        sc = DampedWave(n, _alpha(spec.get("alpha")), _profile(init.get("u", {})), _profile(init.get("v", {})),
                        bool(lumped) if lumped is not None else False)
        sc.initial_state()
    else:
        w = init.get("w", [0.0, 0.0])
        if len(w) != 2:
            raise InputError("dynamic_bc boundary state w needs two values")
        sc = DynamicBC(n, _profile(init.get("u", {})), tuple(float(x) for x in w),
                       bool(spec.get("coupled", True)), bool(lumped) if lumped is not None else True)
        sc.initial_state()
    return ScenarioFile(sc, stepper, _probe_list(spec.get("probes")), int(spec.get("seed", 0)))


def write_trajectory_csv(path: str | Path, times: np.ndarray, states: np.ndarray) -> None:
    """Header t, dof_0..dof_{N-1}; complex states get separate re/im columns."""
    N = states.shape[1]
    cplx = np.iscomplexobj(states)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if cplx:
            w.writerow(["t"] + [f"dof_{i}_{p}" for i in range(N) for p in ("re", "im")])
        else:
            w.writerow(["t"] + [f"dof_{i}" for i in range(N)])
        for t, z in zip(times, states):
            vals = np.column_stack([z.real, z.imag]).ravel() if cplx else z
            w.writerow([repr(float(t))] + [repr(float(v)) for v in vals])

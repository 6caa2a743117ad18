"""Named graphs and seeded random instances used by the test harness."""

from __future__ import annotations

import numpy as np

from .graph import Graph, classify, from_edges, is_connected

V4 = ["v1", "v2", "v3", "v4"]


def kite() -> Graph:
    """Four vertices, five edges: a 2-cycle v1 <-> v2 feeding v4 through v3 and directly."""
    return from_edges(
        [("v2", "v1"), ("v1", "v2"), ("v1", "v3"), ("v3", "v4"), ("v2", "v4")], vertices=V4
    )


def directed_cycle(k: int = 3) -> Graph:
    """v1 <- v2 <- ... <- vk <- v1, so e1 ends at v1."""
    vs = [f"v{i + 1}" for i in range(k)]
    return from_edges([(vs[(i + 1) % k], vs[i]) for i in range(k)], vertices=vs)


def directed_path(k: int = 3) -> Graph:
    vs = [f"v{i + 1}" for i in range(k + 1)]
    return from_edges([(vs[i], vs[i + 1]) for i in range(k)], vertices=vs)


def bipartite_line() -> Graph:
    """e1: v2 -> v1, e2: v2 -> v3, e3: v4 -> v3."""
    return from_edges([("v2", "v1"), ("v2", "v3"), ("v4", "v3")], vertices=V4)


def star(m: int, kind: str = "outbound", flagged_center: bool = False) -> Graph:
    """Outbound: every edge ends (x = 0) at the center; inbound: every edge starts there."""
    leaves = [f"l{i + 1}" for i in range(m)]
    if kind == "outbound":
        pairs = [(leaf, "c") for leaf in leaves]
    else:
        pairs = [("c", leaf) for leaf in leaves]
    return from_edges(pairs, infinite=["c"] if flagged_center else (), vertices=["c", *leaves])


def stacked_stars() -> Graph:
    """Two outbound stars of order two, the second hanging from a leaf of the first."""
    return from_edges([("a1", "a"), ("a2", "a"), ("b1", "a2"), ("b2", "a2")])


def two_triangles(flagged: bool = True) -> Graph:
    return from_edges(
        [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "c")],
        infinite=["c"] if flagged else (),
    )


def _layered(sizes: list[int], cyclic: bool = False) -> Graph:
    """Complete bipartite connections from layer p + 1 into layer p."""
    names = [[f"u{p}_{i}" for i in range(s)] for p, s in enumerate(sizes)]
    pairs = []
    L = len(sizes)
    for p in range(L if cyclic else L - 1):
        q = (p + 1) % L
        for a in names[q]:
            for b in names[p]:
                pairs.append((a, b))
    return from_edges(pairs, vertices=[v for layer in names for v in layer])


def tree(branching: int, depth: int) -> Graph:
    """Rooted tree with edges pointing from child to parent."""
    pairs = []
    level = ["r"]
    for d in range(depth):
        nxt = []
        for parent in level:
            for j in range(branching):
                child = f"{parent}{j}"
                pairs.append((child, parent))
                nxt.append(child)
        level = nxt
    return from_edges(pairs)


def symmetric_layer_graphs() -> list[Graph]:
    return [
        tree(2, 2),
        _layered([3, 2]),
        _layered([2, 2, 2], cyclic=True),
        _layered([2, 2, 2, 2]),
        tree(3, 2),
    ]


# -- random graphs ------------------------------------------------------------------
def _names(k: int) -> list[str]:
    return [f"v{i + 1}" for i in range(k)]


def random_graph(
    rng: np.random.Generator,
    max_vertices: int = 10,
    max_edges: int = 20,
    connected: bool = False,
    flag_prob: float = 0.0,
) -> Graph:
    """Loop-free random multigraph without isolated vertices."""
    while True:
        k = int(rng.integers(2, max_vertices + 1))
        vs = _names(k)
        pairs = []
        if connected:
            order = rng.permutation(k)
            for i in range(1, k):
                a, b = order[i], order[rng.integers(0, i)]
                pairs.append((vs[a], vs[b]) if rng.random() < 0.5 else (vs[b], vs[a]))
        m = int(rng.integers(len(pairs) if connected else 1, max_edges + 1))
        while len(pairs) < max(m, 1):
            a, b = rng.choice(k, 2, replace=False)
            pairs.append((vs[a], vs[b]))
        used = {v for p in pairs for v in p}
        vs = [v for v in vs if v in used]
        if len(pairs) > max_edges:
            continue
        flagged = [v for v in vs if rng.random() < flag_prob]
        return from_edges(pairs, infinite=flagged, vertices=vs)


def random_eulerian(rng: np.random.Generator, max_vertices: int = 7) -> Graph:
    """Union of a Hamiltonian directed cycle and further random cycles."""
    k = int(rng.integers(2, max_vertices + 1))
    vs = _names(k)
    pairs = []
    cycles = [list(rng.permutation(k))]
    for _ in range(int(rng.integers(0, 3))):
        length = int(rng.integers(2, k + 1))
        cycles.append(list(rng.choice(k, length, replace=False)))
    for cyc in cycles:
        for i in range(len(cyc)):
            pairs.append((vs[cyc[i]], vs[cyc[(i + 1) % len(cyc)]]))
    return from_edges(pairs, vertices=vs)


def random_bipartite(rng: np.random.Generator, max_side: int = 4) -> Graph:
    """Every vertex is a pure source or a pure target."""
    ns, nt = int(rng.integers(1, max_side + 1)), int(rng.integers(1, max_side + 1))
    S = [f"s{i + 1}" for i in range(ns)]
    T = [f"t{i + 1}" for i in range(nt)]
    pairs = [(S[0], T[0])]
    placed_s, placed_t = [S[0]], [T[0]]
    for v in S[1:] + T[1:]:
        if v.startswith("s"):
            pairs.append((v, placed_t[rng.integers(0, len(placed_t))]))
            placed_s.append(v)
        else:
            pairs.append((placed_s[rng.integers(0, len(placed_s))], v))
            placed_t.append(v)
    for _ in range(int(rng.integers(0, 4))):
        pairs.append((S[rng.integers(0, ns)], T[rng.integers(0, nt)]))
    return from_edges(pairs, vertices=S + T)


def random_neither(rng: np.random.Generator, max_vertices: int = 7) -> Graph:
    """Connected, neither bipartite nor Eulerian."""
    while True:
        g = random_graph(rng, max_vertices, 12, connected=True)
        c = classify(g)
        if not c.bipartite and not c.eulerian and is_connected(g):
            return g


def random_projection(rng: np.random.Generator, m: int, rank: int | None = None, complex_: bool = False) -> np.ndarray:
    if rank is None:
        rank = int(rng.integers(0, m + 1))
    if rank == 0:
        return np.zeros((m, m))
    X = rng.standard_normal((m, rank))
    if complex_:
        X = X + 1j * rng.standard_normal((m, rank))
    q, _ = np.linalg.qr(X)
    return q @ q.conj().T


def projection_with_constants(rng: np.random.Generator, m: int) -> np.ndarray:
    """span{1} plus a random subspace of its orthogonal complement."""
    one = np.ones((m, 1)) / np.sqrt(m)
    r = int(rng.integers(0, m))
    X = rng.standard_normal((m, r))
    X -= one @ (one.T @ X)
    q = np.linalg.qr(np.hstack([one, X]))[0] if r else one
    return q @ q.T


def irreducibility_suite() -> list[tuple[str, Graph]]:
    """Twenty small graphs, with and without flagged vertices."""
    f1 = kite()
    return [
        ("edge", from_edges([("a", "b")])),
        ("edge_dirichlet", from_edges([("a", "b")], infinite=["a", "b"])),
        ("cycle3", directed_cycle(3)),
        ("triangles_flagged", two_triangles(True)),
        ("triangles", two_triangles(False)),
        ("star3_flagged", star(3, flagged_center=True)),
        ("star3", star(3)),
        ("path3_cut", from_edges([("a", "b"), ("b", "c"), ("c", "d")], infinite=["b"])),
        ("path3_leaf", from_edges([("a", "b"), ("b", "c"), ("c", "d")], infinite=["a"])),
        ("kite", f1),
        ("kite_v1", f1.with_flags(["v1"])),
        ("kite_v1v4", f1.with_flags(["v1", "v4"])),
        ("square_cut", from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], infinite=["a", "c"])),
        ("k4", from_edges([("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("b", "d"), ("d", "c")])),
        ("bowtie_leafs", from_edges([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")], infinite=["d"])),
        ("star5_flagged", star(5, "inbound", flagged_center=True)),
        ("path4_cut", from_edges([("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")], infinite=["b", "c", "d"])),
        ("digon_half", from_edges([("a", "b"), ("b", "a")], infinite=["a"])),
        ("parallel_dirichlet", from_edges([("a", "b"), ("a", "b"), ("a", "b")], infinite=["a", "b"])),
        ("tree_cut", from_edges([("b", "a"), ("c", "a"), ("d", "b"), ("e", "b")], infinite=["b"])),
    ]

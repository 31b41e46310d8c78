import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ca.uqam.info.bprnn.errors import AlistFormatError, GraphMismatchError

logger = logging.getLogger(__name__)


class TannerGraph:
    """
    Bipartite graph of a binary parity-check matrix.

    Variable-nodes are 0..N-1 and check-nodes 0..M-1 internally; files use
    1-based indices. Edges are numbered in canonical order (variable index
    ascending, then check index ascending): every weight vector and message
    buffer of the package uses that order.
    """

    def __init__(self, n_vars: int, n_checks: int, edges):
        self.N = int(n_vars)
        self.M = int(n_checks)

        # 1. canonical edge order, duplicates are rejected
        ordered = sorted((int(n), int(m)) for n, m in edges)
        for (n0, m0), (n1, m1) in zip(ordered, ordered[1:]):
            if n0 == n1 and m0 == m1:
                raise GraphMismatchError(f"duplicate edge ({n0 + 1}, {m0 + 1})")
        for n, m in ordered:
            if not (0 <= n < self.N and 0 <= m < self.M):
                raise GraphMismatchError(f"edge ({n + 1}, {m + 1}) out of range")
        self.E = len(ordered)

        # 2. edge arrays
        self.edge_var = np.array([n for n, _ in ordered], dtype=np.int64)
        self.edge_check = np.array([m for _, m in ordered], dtype=np.int64)
        self.edge_var.flags.writeable = False
        self.edge_check.flags.writeable = False
        self.edge_index = {edge: e for e, edge in enumerate(ordered)}

        # 3. both adjacency views
        var_neighbors = [[] for _ in range(self.N)]
        check_neighbors = [[] for _ in range(self.M)]
        var_edges = [[] for _ in range(self.N)]
        check_edges = [[] for _ in range(self.M)]
        for e, (n, m) in enumerate(ordered):
            var_neighbors[n].append(m)
            check_neighbors[m].append(n)
            var_edges[n].append(e)
            check_edges[m].append(e)
        self.var_neighbors = tuple(tuple(c) for c in var_neighbors)
        self.check_neighbors = tuple(tuple(v) for v in check_neighbors)
        self.var_edges = tuple(tuple(e) for e in var_edges)
        self.check_edges = tuple(tuple(e) for e in check_edges)

    @classmethod
    def from_matrix(cls, H) -> "TannerGraph":
        H = np.asarray(H)
        if H.ndim != 2:
            raise GraphMismatchError("parity-check matrix must be 2-dimensional")
        rows, cols = np.nonzero(H & 1 if H.dtype.kind in "iub" else H != 0)
        return cls(H.shape[1], H.shape[0], zip(cols.tolist(), rows.tolist()))

    def var_degree(self, n: int) -> int:
        return len(self.var_neighbors[n])

    def check_degree(self, m: int) -> int:
        return len(self.check_neighbors[m])

    @cached_property
    def H(self) -> np.ndarray:
        matrix = np.zeros((self.M, self.N), dtype=np.uint8)
        matrix[self.edge_check, self.edge_var] = 1
        matrix.flags.writeable = False
        return matrix

    # Check-view of the edges: row m lists the edges of check m, padded
    # with E (one past the last edge) up to the maximum check degree.
    @cached_property
    def check_slots(self) -> np.ndarray:
        dc_max = max((len(e) for e in self.check_edges), default=0)
        slots = np.full((self.M, dc_max), self.E, dtype=np.int64)
        for m, edges in enumerate(self.check_edges):
            slots[m, :len(edges)] = edges
        slots.flags.writeable = False
        return slots

    def __eq__(self, other) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return (self.N, self.M) == (other.N, other.M) and self.edge_index.keys() == other.edge_index.keys()

    def __hash__(self):
        return hash((self.N, self.M, self.E))

    def __str__(self) -> str:
        return f"TannerGraph[N={self.N}, M={self.M}, E={self.E}]"


@dataclass(frozen=True)
class Syndrome:
    bits: np.ndarray

    def is_zero(self) -> bool:
        return not bool(np.any(self.bits))


@dataclass(frozen=True)
class GirthInfo:
    # girth is None for an acyclic graph
    girth: int
    count: int

    def has_cycle(self) -> bool:
        return self.girth is not None

    def __iter__(self):
        return iter((self.girth, self.count))


# Parses the alist interchange format. Blank lines are skipped, but line
# numbers in error messages always refer to the original text.
def parse_alist(text: str) -> TannerGraph:
    numbered = [(i + 1, line.split()) for i, line in enumerate(text.splitlines())]
    numbered = [(i, fields) for i, fields in numbered if fields]
    cursor = iter(numbered)

    def next_ints(what: str):
        try:
            line_number, fields = next(cursor)
        except StopIteration:
            raise AlistFormatError(f"unexpected end of file while reading {what}", len(text.splitlines()) + 1)
        try:
            return line_number, [int(f) for f in fields]
        except ValueError:
            raise AlistFormatError(f"non-integer entry in {what}", line_number)

    # 1. header
    line_number, header = next_ints("header")
    if len(header) != 2 or header[0] <= 0 or header[1] <= 0:
        raise AlistFormatError("header must be 'N M' with positive values", line_number)
    n_vars, n_checks = header
    line_number, max_degrees = next_ints("maximum degrees")
    if len(max_degrees) != 2:
        raise AlistFormatError("expected 'max_var_deg max_check_deg'", line_number)

    # 2. degree lists
    line_number, var_degrees = next_ints("variable degrees")
    if len(var_degrees) != n_vars:
        raise AlistFormatError(f"expected {n_vars} variable degrees, got {len(var_degrees)}", line_number)
    line_number, check_degrees = next_ints("check degrees")
    if len(check_degrees) != n_checks:
        raise AlistFormatError(f"expected {n_checks} check degrees, got {len(check_degrees)}", line_number)
    if max(var_degrees) != max_degrees[0] or max(check_degrees) != max_degrees[1]:
        raise AlistFormatError("maximum degrees do not match the degree lists", line_number)
    if sum(var_degrees) != sum(check_degrees):
        raise AlistFormatError("variable and check degrees do not sum to the same edge count", line_number)

    # 3. adjacency lists, zero padding ignored
    def read_block(count, degrees, bound, what):
        block = []
        for k in range(count):
            line_number, entries = next_ints(f"{what} {k + 1}")
            entries = [x for x in entries if x != 0]
            if len(entries) != degrees[k]:
                raise AlistFormatError(
                    f"{what} {k + 1} lists {len(entries)} neighbors but its degree is {degrees[k]}", line_number)
            if len(set(entries)) != len(entries):
                raise AlistFormatError(f"duplicate edge in {what} {k + 1}", line_number)
            for x in entries:
                if not 1 <= x <= bound:
                    raise AlistFormatError(f"index {x} out of range 1..{bound}", line_number)
            block.append((line_number, entries))
        return block

    var_block = read_block(n_vars, var_degrees, n_checks, "variable")
    check_block = read_block(n_checks, check_degrees, n_vars, "check")

    # 4. both views must describe the same edge set
    from_vars = {(n, m - 1) for n, (_, checks) in enumerate(var_block) for m in checks}
    for m, (line_number, variables) in enumerate(check_block):
        for n in variables:
            if (n - 1, m) not in from_vars:
                raise AlistFormatError(
                    f"check {m + 1} lists variable {n} which does not list check {m + 1}", line_number)

    graph = TannerGraph(n_vars, n_checks, from_vars)
    logger.debug("parsed alist: %s", graph)
    return graph


def read_alist(path: str) -> TannerGraph:
    with open(path, "r") as alist_file:
        return parse_alist(alist_file.read())


def write_alist(g: TannerGraph) -> str:
    dv_max = max((g.var_degree(n) for n in range(g.N)), default=0)
    dc_max = max((g.check_degree(m) for m in range(g.M)), default=0)
    lines = [f"{g.N} {g.M}", f"{dv_max} {dc_max}",
             " ".join(str(g.var_degree(n)) for n in range(g.N)),
             " ".join(str(g.check_degree(m)) for m in range(g.M))]
    for checks in g.var_neighbors:
        padded = [m + 1 for m in checks] + [0] * (dv_max - len(checks))
        lines.append(" ".join(map(str, padded)))
    for variables in g.check_neighbors:
        padded = [n + 1 for n in variables] + [0] * (dc_max - len(variables))
        lines.append(" ".join(map(str, padded)))
    return "\n".join(lines) + "\n"


def to_matrix(g: TannerGraph) -> np.ndarray:
    return np.array(g.H)


def syndrome(g: TannerGraph, bits) -> Syndrome:
    return Syndrome(syndrome_bits(g, bits))


# Works on one word (length N) or a batch of words (B x N).
def syndrome_bits(g: TannerGraph, bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape[-1] != g.N:
        raise GraphMismatchError(f"word length {bits.shape[-1]} does not match N={g.N}")
    return ((bits.astype(np.int64) @ g.H.T.astype(np.int64)) & 1).astype(np.uint8)


def is_codeword(g: TannerGraph, bits) -> np.ndarray:
    return ~np.any(syndrome_bits(g, bits), axis=-1)


# Breadth-first layering from a variable-node: layer l holds the variable
# nodes at distance 2l and the check nodes at distance 2l+1.
def bfs_layers(g: TannerGraph, root: int):
    var_layers, check_layers = [[root]], []
    seen_vars, seen_checks = {root}, set()
    frontier = [root]
    while frontier:
        checks = sorted({m for n in frontier for m in g.var_neighbors[n]} - seen_checks)
        if not checks:
            break
        seen_checks.update(checks)
        check_layers.append(checks)
        variables = sorted({n for m in checks for n in g.check_neighbors[m]} - seen_vars)
        if not variables:
            break
        seen_vars.update(variables)
        var_layers.append(variables)
        frontier = variables
    return var_layers, check_layers


def _node_neighbors(g: TannerGraph, node: int):
    # unified numbering: variables 0..N-1, checks N..N+M-1
    if node < g.N:
        return [g.N + m for m in g.var_neighbors[node]]
    return list(g.check_neighbors[node - g.N])


def _shortest_cycle_through(g: TannerGraph, source: int) -> int:
    dist = {source: 0}
    parent = {source: -1}
    queue = deque([source])
    best = None
    while queue:
        x = queue.popleft()
        if best is not None and 2 * dist[x] >= best:
            break
        for y in _node_neighbors(g, x):
            if y not in dist:
                dist[y] = dist[x] + 1
                parent[y] = x
                queue.append(y)
            elif parent[x] != y:
                length = dist[x] + dist[y] + 1
                if best is None or length < best:
                    best = length
    return best


def _antipodal_pairs(g: TannerGraph, source: int, half: int) -> int:
    # number of pairs of distinct shortest paths of length `half` from source
    dist = {source: 0}
    paths = {source: 1}
    frontier = [source]
    for depth in range(1, half + 1):
        next_frontier = []
        for x in frontier:
            for y in _node_neighbors(g, x):
                if y not in dist:
                    dist[y] = depth
                    paths[y] = 0
                    next_frontier.append(y)
                if dist[y] == depth:
                    paths[y] += paths[x]
        frontier = next_frontier
    return sum(paths[u] * (paths[u] - 1) // 2 for u in frontier)


def girth_and_multiplicity(g: TannerGraph) -> GirthInfo:
    """
    Girth of the Tanner graph and number of cycles of that length.

    Two distinct shortest paths of length g/2 between a variable-node and its
    antipode close a cycle of length g, and every such cycle is seen from
    each of its g/2 variable-nodes exactly once.
    """
    girth = None
    for n in range(g.N):
        length = _shortest_cycle_through(g, n)
        if length is not None and (girth is None or length < girth):
            girth = length
    if girth is None:
        return GirthInfo(None, 0)
    half = girth // 2
    pairs = sum(_antipodal_pairs(g, n, half) for n in range(g.N))
    return GirthInfo(girth, pairs // half)


def count_weights(g: TannerGraph) -> int:
    # one data-pass and one a-posteriori weight per edge
    return 2 * g.E


GRAPH_SUMMARY_HEADER = ["N", "M", "E", "girth", "multiplicity"]


def graph_summary(g: TannerGraph) -> list:
    info = girth_and_multiplicity(g)
    return [g.N, g.M, g.E, info.girth if info.has_cycle() else "none", info.count]

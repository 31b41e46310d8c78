import logging
import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ca.uqam.info.bprnn.graph.tanner import TannerGraph, bfs_layers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AbsorbingSet:
    members: tuple

    def __post_init__(self):
        members = tuple(sorted(int(n) for n in self.members))
        if len(set(members)) != len(members):
            raise ValueError(f"duplicate variable-node in {members}")
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True, order=True)
class ExtendedType:
    """
    Signature nu-(omega, epsilon, P_c) of an absorbing set: odd and even
    check-node counts, and pc[d - 1] = number of checks with d neighbors in
    the set (trailing zeros trimmed).
    """
    nu: int
    omega: int
    epsilon: int
    pc: tuple

    def __str__(self) -> str:
        return f"{self.nu}-({self.omega},{self.epsilon},({','.join(str(m) for m in self.pc)}))"

    @property
    def is_codeword_support(self) -> bool:
        return self.omega == 0


_ET_PATTERN = re.compile(r"^\s*(\d+)-\((\d+),(\d+),\(([\d,\s]*)\)\)\s*$")


def parse_extended_type(text: str) -> ExtendedType:
    match = _ET_PATTERN.match(text)
    if match is None:
        raise ValueError(f"not an extended type: {text!r}")
    nu, omega, epsilon, profile = match.groups()
    pc = tuple(int(x) for x in profile.split(",") if x.strip())
    return ExtendedType(int(nu), int(omega), int(epsilon), pc)


@dataclass(frozen=True)
class RootedExpansion:
    root: int
    # var_layers[l]: variable-nodes at distance 2l, check_layers[l]: checks at distance 2l+1
    var_layers: tuple
    check_layers: tuple

    def reachable(self) -> int:
        return sum(len(layer) for layer in self.var_layers)


@dataclass
class AbsorbingClass:
    et: ExtendedType
    count: int = 0
    # every set of the class, or a uniform sample of them
    sets: list = field(default_factory=list)

    @property
    def codeword_support(self) -> bool:
        return self.et.is_codeword_support


def _check_counts(g: TannerGraph, A) -> Counter:
    return Counter(m for n in A for m in g.var_neighbors[n])


def as_check(g: TannerGraph, A) -> bool:
    A = list(A)
    if not A:
        raise ValueError("absorbing-set check needs a nonempty set")
    counts = _check_counts(g, A)
    for n in A:
        odd = sum(1 for m in g.var_neighbors[n] if counts[m] % 2 == 1)
        if g.var_degree(n) - odd <= odd:
            return False
    return True


def extended_type(g: TannerGraph, A) -> ExtendedType:
    A = list(A)
    counts = _check_counts(g, A)
    profile = Counter(counts.values())
    top = max(profile, default=0)
    pc = tuple(profile.get(d, 0) for d in range(1, top + 1))
    omega = sum(m for d, m in profile.items() if d % 2 == 1)
    epsilon = sum(m for d, m in profile.items() if d % 2 == 0)
    return ExtendedType(len(A), omega, epsilon, pc)


def rooted_expansion(g: TannerGraph, root: int) -> RootedExpansion:
    var_layers, check_layers = bfs_layers(g, root)
    return RootedExpansion(root, tuple(tuple(v) for v in var_layers), tuple(tuple(c) for c in check_layers))


def _subsets(pool, budget: int, allow_empty: bool):
    # size ascending, then lexicographic
    if budget <= 0:
        return
    if allow_empty:
        yield ()
    for size in range(1, min(budget, len(pool)) + 1):
        yield from combinations(pool, size)


def completions(g: TannerGraph, expansion: RootedExpansion, layers, nu: int, allow_empty: bool = False):
    """
    Candidate next layers for A_0..A_l in the whole-graph layering: subsets
    of the variable-nodes of level l+1 adjacent to A_l, restricted to indices
    at least the root, of size at most the remaining budget.
    """
    budget = nu - sum(len(layer) for layer in layers)
    level = len(layers)
    if budget <= 0 or level >= len(expansion.var_layers):
        return []
    last = layers[-1]
    next_level = set(expansion.var_layers[level])
    pool = sorted({n for v in last for m in g.var_neighbors[v] for n in g.check_neighbors[m]
                   if n in next_level and n >= expansion.root})
    return list(_subsets(pool, budget, allow_empty))


class _Search:
    """
    Depth-first growth of absorbing sets whose smallest member is a given root.

    A component is grown level by level in its own induced layering: the
    next level is drawn from the variable-nodes that share a check with the
    current level, share no check with earlier levels and are larger than the
    component minimum. Pool members left out are forbidden for good, so every
    set is produced once. Once the next level is fixed, every check of the
    current level has its final degree and the current level is checked.
    An empty next level closes the component; the remaining budget then goes
    to a new component whose minimum is larger and which shares no check with
    the closed ones.
    """

    def __init__(self, g: TannerGraph, nu: int, connected_only: bool = False):
        self.g = g
        self.nu = nu
        self.connected_only = connected_only
        self.counts = np.zeros(g.M, dtype=np.int64)
        self.adjacent = [sorted({n for m in g.var_neighbors[v] for n in g.check_neighbors[m]} - {v})
                         for v in range(g.N)]

    def _add(self, nodes, delta: int):
        for n in nodes:
            for m in self.g.var_neighbors[n]:
                self.counts[m] += delta

    def _absorbing(self, n: int) -> bool:
        odd = sum(1 for m in self.g.var_neighbors[n] if self.counts[m] % 2 == 1)
        return self.g.var_degree(n) - odd > odd

    def from_root(self, root: int):
        self._add([root], 1)
        try:
            yield from self._extend([root], [root], {root}, root)
        finally:
            self._add([root], -1)

    def _extend(self, members, current, seen, component_min):
        budget = self.nu - len(members)
        pool = sorted({v for n in current for v in self.adjacent[n] if v > component_min and v not in seen})
        closed_seen = seen | set(pool)
        sizes = range(0, min(budget, len(pool)) + 1)
        for size in sizes:
            for chosen in combinations(pool, size):
                self._add(chosen, 1)
                try:
                    if not all(self._absorbing(n) for n in current):
                        continue
                    if size:
                        yield from self._extend(members + list(chosen), list(chosen), closed_seen, component_min)
                    elif budget == 0:
                        yield tuple(sorted(members))
                    elif not self.connected_only:
                        yield from self._next_component(members, closed_seen, component_min)
                finally:
                    self._add(chosen, -1)

    def _next_component(self, members, seen, previous_min):
        for seed in range(previous_min + 1, self.g.N):
            if seed in seen:
                continue
            self._add([seed], 1)
            try:
                yield from self._extend(members + [seed], [seed], seen | {seed}, seed)
            finally:
                self._add([seed], -1)


def as_dfs(g: TannerGraph, root: int, nu: int, connected_only: bool = False) -> list:
    """Absorbing sets of size nu whose smallest variable-node is root."""
    if not 1 <= nu <= g.N:
        raise ValueError(f"nu must be in [1, {g.N}], got {nu}")
    if connected_only and rooted_expansion(g, root).reachable() < nu:
        return []
    return [AbsorbingSet(members) for members in _Search(g, nu, connected_only).from_root(root)]


def brute_force(g: TannerGraph, nu: int) -> list:
    return [AbsorbingSet(A) for A in combinations(range(g.N), nu) if as_check(g, A)]


# Uniform sample of `size` items among `count` seen so far, merged from two
# uniform samples of disjoint parts.
def _merge_samples(left, left_count, right, right_count, size, rng):
    if size is None or left_count + right_count <= size:
        return left + right
    from_left = int(rng.hypergeometric(left_count, right_count, size))
    pick_left = rng.choice(len(left), size=from_left, replace=False) if from_left else []
    pick_right = rng.choice(len(right), size=size - from_left, replace=False) if size > from_left else []
    return [left[i] for i in sorted(pick_left)] + [right[i] for i in sorted(pick_right)]


def _classify_root(args):
    g, root, nu, connected_only, sample_size, seed = args
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(root,)))
    classes = {}
    for A in as_dfs(g, root, nu, connected_only):
        et = extended_type(g, A)
        entry = classes.setdefault(et, AbsorbingClass(et))
        entry.sets = _merge_samples(entry.sets, entry.count, [A], 1, sample_size, rng)
        entry.count += 1
    return root, classes


def enumerate_all(g: TannerGraph, nu: int, workers: int = 1, sample_size: int = None,
                  seed: int = 0, connected_only: bool = False) -> dict:
    """
    All absorbing sets of size nu grouped by extended type, ordered by type.

    With sample_size set, each class keeps its exact count and a uniform
    sample of at most sample_size sets. Classes with omega = 0 are supports
    of codewords: they are kept and flagged, never used for training.
    """
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    tasks = [(g, root, nu, connected_only, sample_size, seed) for root in range(g.N)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_root = list(pool.map(_classify_root, tasks, chunksize=max(1, g.N // (4 * workers))))
    else:
        per_root = [_classify_root(task) for task in tasks]

    # merge in root order so that the result does not depend on scheduling
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(g.N,)))
    merged = {}
    for root, classes in sorted(per_root, key=lambda item: item[0]):
        for et, part in classes.items():
            entry = merged.setdefault(et, AbsorbingClass(et))
            entry.sets = _merge_samples(entry.sets, entry.count, part.sets, part.count, sample_size, rng)
            entry.count += part.count
    result = {et: merged[et] for et in sorted(merged)}

    total = sum(entry.count for entry in result.values())
    logger.info("nu=%d: %d absorbing sets in %d extended types", nu, total, len(result))
    for entry in result.values():
        if entry.codeword_support:
            logger.warning("class %s (%d sets) is a codeword support, excluded from training", entry.et, entry.count)
    return result


# Dump lines "ET: n1 n2 ... nK" with 1-based variable-nodes.
def write_dump(classes: dict) -> str:
    lines = []
    for et, entry in classes.items():
        for A in entry.sets:
            lines.append(f"{et}: " + " ".join(str(n + 1) for n in A))
    return "\n".join(lines) + ("\n" if lines else "")


def read_dump(text: str) -> dict:
    classes = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        head, _, tail = line.rpartition(":")
        if not head:
            raise ValueError(f"line {line_number}: missing ':' separator")
        et = parse_extended_type(head)
        A = AbsorbingSet(int(n) - 1 for n in tail.split())
        if A.size != et.nu:
            raise ValueError(f"line {line_number}: {A.size} nodes for type {et}")
        entry = classes.setdefault(et, AbsorbingClass(et))
        entry.sets.append(A)
        entry.count += 1
    return classes


SUMMARY_HEADER = ["nu", "et_string", "count", "is_codeword_support"]


def summary_rows(classes: dict) -> list:
    return [[et.nu, str(et), entry.count, int(entry.codeword_support)] for et, entry in classes.items()]

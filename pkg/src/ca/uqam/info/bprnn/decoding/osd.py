import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from ca.uqam.info.bprnn.decoding.bp import hard_decision
from ca.uqam.info.bprnn.decoding.diversity import ml_select
from ca.uqam.info.bprnn.errors import GraphMismatchError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph

logger = logging.getLogger(__name__)

MAX_ORDER = 2


@dataclass(frozen=True)
class SystematizedMatrix:
    """
    Row-reduced parity-check matrix [A | I] over permuted columns: column k
    of h_sys is column perm[k] of H. The first K columns are the most
    reliable basis (MRB), the last `rank` ones the identity block.
    """
    h_sys: np.ndarray
    perm: np.ndarray
    rank: int

    @property
    def K(self) -> int:
        return self.h_sys.shape[1] - self.rank

    @property
    def A(self) -> np.ndarray:
        return self.h_sys[:, :self.K]


@dataclass(frozen=True)
class OsdCandidate:
    codeword: np.ndarray
    # MRB positions (0..K-1, most reliable first) flipped from the hard decision
    flips: tuple
    score: float


def sort_reliability(llr) -> np.ndarray:
    llr = np.asarray(llr, dtype=np.float64)
    # stable sort keeps lower indices first among equal magnitudes
    return np.argsort(-np.abs(llr), kind="stable")


def systematize(g, perm) -> SystematizedMatrix:
    """
    GF(2) Gauss-Jordan elimination of H with rows held as int bitsets.

    Pivots are taken from the least reliable column backwards. A column with
    no pivot left is dependent on the columns already placed in the identity
    block: it stays in the MRB and the elimination moves on to the next more
    reliable column. Rows reduced to zero are dropped, so K = N - rank.
    """
    H = g.H if isinstance(g, TannerGraph) else np.asarray(g, dtype=np.uint8)
    n_rows, n_cols = H.shape
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(n_cols)):
        raise ValueError("perm is not a permutation of the columns")
    if not np.any(H):
        raise GraphMismatchError("all-zero parity-check matrix")

    # 1. rows as bitsets over the permuted positions, bit j <-> column perm[j]
    permuted = H[:, perm]
    rows = [int("".join(str(int(b)) for b in row[::-1]), 2) for row in permuted]

    # 2. elimination from the last position down
    pivots = []
    row_idx = 0
    for col in range(n_cols - 1, -1, -1):
        if row_idx == n_rows:
            break
        pivot = None
        for r in range(row_idx, n_rows):
            if (rows[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        rows[row_idx], rows[pivot] = rows[pivot], rows[row_idx]
        for r in range(n_rows):
            if r != row_idx and (rows[r] >> col) & 1:
                rows[r] ^= rows[row_idx]
        pivots.append(col)
        row_idx += 1
    rank = row_idx

    # 3. final column order: MRB in reliability order, then the pivots in
    # position order, each row moved next to its pivot (row i <-> column K + i)
    pivot_rows = sorted(zip(pivots, rows[:rank]))
    pivot_set = set(pivots)
    order = [j for j in range(n_cols) if j not in pivot_set] + [p for p, _ in pivot_rows]
    bits = np.array([[(row >> j) & 1 for j in order] for _, row in pivot_rows], dtype=np.uint8)
    bits.flags.writeable = False
    final_perm = perm[order]
    final_perm.flags.writeable = False
    return SystematizedMatrix(bits, final_perm, rank)


def osd_reencode(sys: SystematizedMatrix, mrb) -> np.ndarray:
    """Codeword(s) whose MRB bits are `mrb`; accepts one vector or a K-column batch."""
    mrb = np.asarray(mrb, dtype=np.int64) & 1
    parity = (mrb @ sys.A.T.astype(np.int64)) & 1
    permuted = np.concatenate([mrb, parity], axis=-1).astype(np.uint8)
    codeword = np.empty_like(permuted)
    codeword[..., sys.perm] = permuted
    return codeword


def flip_patterns(K: int, w: int):
    # 0 flips, then single flips, then pairs, each in lexicographic order
    for order in range(w + 1):
        yield from combinations(range(K), order)


def candidate_count(K: int, w: int) -> int:
    return sum(comb(K, i) for i in range(w + 1))


def osd_candidates(g, llr, y, w: int, sys: SystematizedMatrix = None):
    """All OSD-w candidates for one soft input, in generation order."""
    if not 0 <= w <= MAX_ORDER:
        raise ValueError(f"OSD order must be in [0, {MAX_ORDER}], got {w}")
    llr = np.asarray(llr, dtype=np.float64)
    y = np.asarray(getattr(y, "y", y), dtype=np.float64)
    if sys is None:
        sys = systematize(g, sort_reliability(llr))
    base = hard_decision(llr[sys.perm[:sys.K]]).astype(np.int64)
    patterns = list(flip_patterns(sys.K, w))
    mrb = np.repeat(base[None, :], len(patterns), axis=0)
    for k, flips in enumerate(patterns):
        if flips:
            mrb[k, list(flips)] ^= 1
    codewords = osd_reencode(sys, mrb)
    scores = codewords.astype(np.float64) @ y
    return [OsdCandidate(codewords[k], patterns[k], float(scores[k])) for k in range(len(patterns))]


def osd_w(g, llr, y, w: int) -> OsdCandidate:
    candidates = osd_candidates(g, llr, y, w)
    # first minimum: fewer flips, then lexicographic flips
    best = int(np.argmin([c.score for c in candidates]))
    return candidates[best]


def postprocess(g, soft_outputs, y, w: int) -> np.ndarray:
    """
    OSD-w on the final a-posteriori LLRs of every decoder of a failed
    diversity run, then ML choice among the winners against the channel y.
    """
    winners = [osd_w(g, llr, y, w).codeword for llr in np.atleast_2d(soft_outputs)]
    return ml_select(winners, y)


def periodic_postprocess(g, snapshots, llr_final, y, w: int) -> np.ndarray:
    # snapshots taken during one BP run; NaN rows were never reached
    soft = [s for s in np.atleast_2d(snapshots) if not np.any(np.isnan(s))] if snapshots is not None else []
    soft.append(np.asarray(llr_final, dtype=np.float64))
    return postprocess(g, np.array(soft), y, w)

import logging
from dataclasses import dataclass, field

import numpy as np

from ca.uqam.info.bprnn.errors import GraphMismatchError, WeightFileError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph, is_codeword

logger = logging.getLogger(__name__)

# Numerical guards shared by decoding and training
MESSAGE_CLAMP = 30.0
PRODUCT_CLAMP = 1.0 - 1e-12


@dataclass(frozen=True)
class WeightSet:
    """
    Trained BP-RNN weights, one data-pass weight w(n->m) and one a-posteriori
    weight w~(m->n) per edge, both in canonical edge order.
    """
    w_data: np.ndarray
    w_apost: np.ndarray

    def __post_init__(self):
        w_data = np.array(self.w_data, dtype=np.float64)
        w_apost = np.array(self.w_apost, dtype=np.float64)
        if w_data.shape != w_apost.shape or w_data.ndim != 1:
            raise GraphMismatchError("w_data and w_apost must be vectors of the same length")
        if not (np.all(np.isfinite(w_data)) and np.all(np.isfinite(w_apost))):
            raise WeightFileError("weights must be finite")
        w_data.flags.writeable = False
        w_apost.flags.writeable = False
        object.__setattr__(self, "w_data", w_data)
        object.__setattr__(self, "w_apost", w_apost)

    @classmethod
    def ones(cls, g: TannerGraph) -> "WeightSet":
        return cls(np.ones(g.E), np.ones(g.E))

    def bind(self, g: TannerGraph) -> "WeightSet":
        if self.w_data.shape[0] != g.E:
            raise GraphMismatchError(f"weight set has {self.w_data.shape[0]} edges, graph has E={g.E}")
        return self


@dataclass
class DecodeResult:
    hard: np.ndarray
    llr_final: np.ndarray
    iterations: int
    converged: bool
    cn_updates: int


@dataclass
class BatchDecodeResult:
    """Per-word results of decode_batch, one row (or entry) per word."""
    hard: np.ndarray
    llr_final: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    cn_updates: np.ndarray
    # a-posteriori LLRs every `snapshot_every` iterations, NaN after early stop
    snapshots: np.ndarray = field(default=None)

    def __len__(self):
        return self.hard.shape[0]

    def result(self, k: int) -> DecodeResult:
        return DecodeResult(self.hard[k], self.llr_final[k], int(self.iterations[k]),
                            bool(self.converged[k]), int(self.cn_updates[k]))


# ---------------------------------------------------------------------------
# Layer kernels. They work on batches (B x E messages, B x N channel LLRs)
# and return the intermediate values that training needs for its backward
# pass, so decoding and training run the very same arithmetic.
# ---------------------------------------------------------------------------

def leave_one_out_product(t: np.ndarray) -> np.ndarray:
    # product over the last axis of every entry but one, without division
    ones = np.ones(t.shape[:-1] + (1,))
    prefix = np.concatenate([ones, np.cumprod(t[..., :-1], axis=-1)], axis=-1)
    suffix = np.concatenate([np.cumprod(t[..., :0:-1], axis=-1)[..., ::-1], ones], axis=-1)
    return prefix * suffix


def to_check_view(g: TannerGraph, edge_values: np.ndarray, padding: float) -> np.ndarray:
    padded = np.concatenate([edge_values, np.full(edge_values.shape[:-1] + (1,), padding)], axis=-1)
    return padded[..., g.check_slots]


def from_check_view(g: TannerGraph, view: np.ndarray) -> np.ndarray:
    slots = g.check_slots
    valid = slots < g.E
    out = np.empty(view.shape[:-2] + (g.E,))
    out[..., slots[valid]] = view[..., valid]
    return out


def check_kernel(g: TannerGraph, alpha: np.ndarray):
    t = np.tanh(alpha / 2.0)
    product = from_check_view(g, leave_one_out_product(to_check_view(g, t, 1.0)))
    clipped = np.clip(product, -PRODUCT_CLAMP, PRODUCT_CLAMP)
    beta_raw = 2.0 * np.arctanh(clipped)
    beta = np.clip(beta_raw, -MESSAGE_CLAMP, MESSAGE_CLAMP)
    return t, product, clipped, beta_raw, beta


def sum_per_variable(g: TannerGraph, edge_values: np.ndarray) -> np.ndarray:
    # edges of one variable are contiguous in canonical order
    out = np.zeros(edge_values.shape[:-1] + (g.N,))
    degrees = np.bincount(g.edge_var, minlength=g.N)
    present = np.flatnonzero(degrees)
    if present.size:
        starts = np.concatenate([[0], np.cumsum(degrees)[:-1]])[present]
        out[..., present] = np.add.reduceat(edge_values, starts, axis=-1)
    return out


def data_kernel(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray, beta: np.ndarray):
    extrinsic = sum_per_variable(g, beta)[..., g.edge_var] - beta
    scaled = extrinsic if weights is None else weights.w_data * extrinsic
    alpha_raw = llr_ch[..., g.edge_var] + scaled
    return extrinsic, alpha_raw, np.clip(alpha_raw, -MESSAGE_CLAMP, MESSAGE_CLAMP)


def apost_kernel(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray, beta: np.ndarray) -> np.ndarray:
    scaled = beta if weights is None else weights.w_apost * beta
    return llr_ch + sum_per_variable(g, scaled)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def check_pass(alpha_in) -> np.ndarray:
    """Extrinsic tanh rule for the messages entering a single check-node."""
    t = np.tanh(np.asarray(alpha_in, dtype=np.float64) / 2.0)
    product = np.clip(leave_one_out_product(t), -PRODUCT_CLAMP, PRODUCT_CLAMP)
    return np.clip(2.0 * np.arctanh(product), -MESSAGE_CLAMP, MESSAGE_CLAMP)


def check_pass_edges(g: TannerGraph, alpha: np.ndarray) -> np.ndarray:
    return check_kernel(g, np.asarray(alpha, dtype=np.float64))[-1]


def data_pass(g: TannerGraph, weights: WeightSet, llr_ch, beta) -> np.ndarray:
    llr_ch = _as_llr(g, llr_ch)
    return data_kernel(g, weights, llr_ch, np.asarray(beta, dtype=np.float64))[-1]


def aposteriori(g: TannerGraph, weights: WeightSet, llr_ch, beta) -> np.ndarray:
    llr_ch = _as_llr(g, llr_ch)
    return apost_kernel(g, weights, llr_ch, np.asarray(beta, dtype=np.float64))


# bit 1 for L <= 0, the same convention as the channel error set
def hard_decision(llr: np.ndarray) -> np.ndarray:
    return (np.asarray(llr) <= 0).astype(np.uint8)


def _as_llr(g: TannerGraph, llr_ch) -> np.ndarray:
    llr_ch = np.asarray(llr_ch, dtype=np.float64)
    if llr_ch.shape[-1] != g.N:
        raise GraphMismatchError(f"LLR vector length {llr_ch.shape[-1]} does not match N={g.N}")
    return llr_ch


def decode_batch(g: TannerGraph, weights: WeightSet, llr_ch, i_max: int,
                 early_stop: bool = True, snapshot_every: int = None) -> BatchDecodeResult:
    """
    Flooding BP (weights=None) or BP-RNN decoding of a batch of words.

    Each word stops at the first iteration whose hard decision has a zero
    syndrome, unless early_stop is False. Iterations always run at least once.
    """
    if i_max < 1:
        raise ValueError(f"i_max must be >= 1, got {i_max}")
    if weights is not None:
        weights.bind(g)
    llr_ch = np.atleast_2d(_as_llr(g, llr_ch))
    batch = llr_ch.shape[0]

    # 1. outputs
    hard = np.zeros((batch, g.N), dtype=np.uint8)
    llr_final = np.zeros((batch, g.N))
    iterations = np.zeros(batch, dtype=np.int64)
    converged = np.zeros(batch, dtype=bool)
    snapshots = None
    if snapshot_every:
        snapshots = np.full((batch, i_max // snapshot_every, g.N), np.nan)

    # 2. iterate on the words still running
    active = np.arange(batch)
    alpha = np.clip(llr_ch[:, g.edge_var], -MESSAGE_CLAMP, MESSAGE_CLAMP)
    for it in range(1, i_max + 1):
        llr_active = llr_ch[active]
        beta = check_kernel(g, alpha)[-1]
        posterior = apost_kernel(g, weights, llr_active, beta)
        decisions = hard_decision(posterior)
        ok = is_codeword(g, decisions)
        if snapshot_every and it % snapshot_every == 0:
            snapshots[active, it // snapshot_every - 1] = posterior

        done = (ok & early_stop) | (it == i_max)
        finished = active[done]
        hard[finished] = decisions[done]
        llr_final[finished] = posterior[done]
        iterations[finished] = it
        converged[finished] = ok[done]

        keep = ~done
        if not np.any(keep):
            break
        active = active[keep]
        alpha = data_kernel(g, weights, llr_active[keep], beta[keep])[-1]

    return BatchDecodeResult(hard, llr_final, iterations, converged, iterations * g.E, snapshots)


def decode(g: TannerGraph, weights: WeightSet, llr_ch, i_max: int, early_stop: bool = True) -> DecodeResult:
    return decode_batch(g, weights, np.asarray(llr_ch)[None, :], i_max, early_stop).result(0)


# ---------------------------------------------------------------------------
# Weight files: header "N M E", then one line "n m w_data w_apost" per edge
# in canonical order, 1-based node indices, 17 significant digits.
# ---------------------------------------------------------------------------

def write_weights(g: TannerGraph, weights: WeightSet) -> str:
    weights.bind(g)
    lines = [f"{g.N} {g.M} {g.E}"]
    for e in range(g.E):
        lines.append(f"{g.edge_var[e] + 1} {g.edge_check[e] + 1} "
                     f"{weights.w_data[e]:.17g} {weights.w_apost[e]:.17g}")
    return "\n".join(lines) + "\n"


def read_weights(g: TannerGraph, text: str) -> WeightSet:
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or len(lines[0]) != 3:
        raise WeightFileError("missing 'N M E' header")
    try:
        header = [int(x) for x in lines[0]]
    except ValueError:
        raise WeightFileError("non-integer header")
    if header != [g.N, g.M, g.E]:
        raise GraphMismatchError(f"weight file is for N M E = {header}, graph has {[g.N, g.M, g.E]}")
    if len(lines) - 1 != g.E:
        raise WeightFileError(f"expected {g.E} weight lines, got {len(lines) - 1}")
    w_data = np.empty(g.E)
    w_apost = np.empty(g.E)
    for e, fields in enumerate(lines[1:]):
        if len(fields) != 4:
            raise WeightFileError(f"weight line {e + 1} must have 4 fields")
        n, m = int(fields[0]) - 1, int(fields[1]) - 1
        if (n, m) != (g.edge_var[e], g.edge_check[e]):
            raise WeightFileError(f"weight line {e + 1} is edge ({n + 1}, {m + 1}), expected canonical "
                                  f"({g.edge_var[e] + 1}, {g.edge_check[e] + 1})")
        w_data[e] = float(fields[2])
        w_apost[e] = float(fields[3])
    return WeightSet(w_data, w_apost)


def load_weights(g: TannerGraph, path: str) -> WeightSet:
    with open(path, "r") as weight_file:
        return read_weights(g, weight_file.read())


def save_weights(g: TannerGraph, weights: WeightSet, path: str) -> None:
    with open(path, "w") as weight_file:
        weight_file.write(write_weights(g, weights))
    logger.info("weights written to %s", path)

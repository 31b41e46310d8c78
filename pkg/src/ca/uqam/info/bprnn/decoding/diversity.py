import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ca.uqam.info.bprnn.decoding.bp import WeightSet, decode_batch
from ca.uqam.info.bprnn.errors import ConfigError, GraphMismatchError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph

logger = logging.getLogger(__name__)

PARALLEL = "parallel"
SERIAL = "serial"


@dataclass(frozen=True)
class PoolDecoder:
    id: int
    label: str
    # None decodes with plain BP
    weights: WeightSet = None
    snr_db: float = None


@dataclass
class DecoderPool:
    """Ordered decoders of a diversity, every one capped at i_test iterations."""
    decoders: list
    i_test: int = 25

    def __post_init__(self):
        ids = [d.id for d in self.decoders]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"decoder ids must be unique, got {ids}")
        if self.i_test < 1:
            raise ConfigError(f"i_test must be >= 1, got {self.i_test}")
        lengths = {d.weights.w_data.shape[0] for d in self.decoders if d.weights is not None}
        if len(lengths) > 1:
            raise GraphMismatchError(f"decoders were trained on graphs with different E: {sorted(lengths)}")

    def __len__(self):
        return len(self.decoders)

    def bind(self, g: TannerGraph) -> "DecoderPool":
        for d in self.decoders:
            if d.weights is not None:
                d.weights.bind(g)
        return self

    @property
    def ids(self) -> list:
        return [d.id for d in self.decoders]


@dataclass
class DiversityOutcome:
    chosen: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    llr_final: np.ndarray
    # chosen codeword, or the last decoder's hard decision when nothing converged
    output: np.ndarray
    success: bool


@dataclass
class BatchDiversityOutcome:
    """Diversity decoding of B words: per-word rows, per-decoder columns."""
    mode: str
    found: np.ndarray
    output: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    llr_final: np.ndarray
    n_edges: int

    def __len__(self):
        return self.found.shape[0]

    @property
    def success(self) -> np.ndarray:
        return self.found & ~np.any(self.output, axis=-1)

    def latency(self) -> np.ndarray:
        if self.mode == SERIAL:
            return self.iterations.sum(axis=1)
        return self.iterations.max(axis=1)

    def outcome(self, k: int) -> DiversityOutcome:
        chosen = self.output[k] if self.found[k] else None
        return DiversityOutcome(chosen, self.iterations[k], self.converged[k], self.llr_final[k],
                                self.output[k], bool(self.success[k]))


@dataclass
class DiversityMetrics:
    """Running totals; merging two of them is a plain sum."""
    words: int = 0
    total_iterations: int = 0
    total_latency: int = 0
    total_cn_updates: int = 0

    def __add__(self, other: "DiversityMetrics") -> "DiversityMetrics":
        return DiversityMetrics(self.words + other.words, self.total_iterations + other.total_iterations,
                                self.total_latency + other.total_latency,
                                self.total_cn_updates + other.total_cn_updates)

    def _mean(self, total) -> float:
        return total / self.words if self.words else float("nan")

    @property
    def avg_iterations(self) -> float:
        return self._mean(self.total_iterations)

    @property
    def avg_latency(self) -> float:
        return self._mean(self.total_latency)

    @property
    def avg_cn_updates(self) -> float:
        return self._mean(self.total_cn_updates)


def _words(words):
    y = np.atleast_2d(np.asarray(getattr(words, "y", words), dtype=np.float64))
    llr = getattr(words, "llr", None)
    return y, (np.atleast_2d(llr) if llr is not None else None)


def failure_sets(g: TannerGraph, pool: DecoderPool, words) -> list:
    """
    Indices of the test words each decoder fails on. A failure is any output
    other than the transmitted all-zero codeword: no convergence within
    i_test, or convergence to another codeword.
    """
    pool.bind(g)
    _, llr = _words(words)
    failures = []
    for d in pool.decoders:
        result = decode_batch(g, d.weights, llr, pool.i_test)
        failed = np.flatnonzero(np.any(result.hard, axis=1))
        failures.append(set(failed.tolist()))
        logger.debug("decoder %s fails on %d/%d words", d.id, failed.size, llr.shape[0])
    return failures


def select_order(failures) -> list:
    """
    Greedy ordering: fewest failures first, then each time the decoder whose
    failures overlap least the words still failed by every decoder already
    picked. Ties go to the lowest position.
    """
    remaining = list(range(len(failures)))
    order = []
    common = None
    while remaining:
        if common is None:
            best = min(remaining, key=lambda j: (len(failures[j]), j))
            common = set(failures[best])
        else:
            best = min(remaining, key=lambda j: (len(common & failures[j]), j))
            common &= failures[best]
        order.append(best)
        remaining.remove(best)
    return order


def take_diversity(pool: DecoderPool, order, Z: int) -> DecoderPool:
    if not 1 <= Z <= len(pool):
        raise ConfigError(f"Z must be in [1, {len(pool)}], got {Z}")
    return DecoderPool([pool.decoders[j] for j in order[:Z]], pool.i_test)


# ML rule under BPSK: minimize sum_n y_n c_n; first candidate wins ties.
def ml_select(candidates, y) -> np.ndarray:
    if len(candidates) == 0:
        raise ValueError("ml_select needs at least one candidate")
    y = np.asarray(getattr(y, "y", y), dtype=np.float64)
    stacked = np.asarray(candidates)
    scores = stacked.astype(np.float64) @ y
    return stacked[int(np.argmin(scores))]


def decode_parallel_batch(g: TannerGraph, pool: DecoderPool, words) -> BatchDiversityOutcome:
    pool.bind(g)
    y, llr = _words(words)
    batch, Z = y.shape[0], len(pool)
    hard = np.zeros((batch, Z, g.N), dtype=np.uint8)
    iterations = np.zeros((batch, Z), dtype=np.int64)
    converged = np.zeros((batch, Z), dtype=bool)
    llr_final = np.zeros((batch, Z, g.N))
    for j, d in enumerate(pool.decoders):
        result = decode_batch(g, d.weights, llr, pool.i_test)
        hard[:, j], llr_final[:, j] = result.hard, result.llr_final
        iterations[:, j], converged[:, j] = result.iterations, result.converged

    # ML choice among the converged outputs, lowest position on ties
    scores = np.einsum("bzn,bn->bz", hard.astype(np.float64), y)
    scores[~converged] = np.inf
    best = np.argmin(scores, axis=1)
    found = np.any(converged, axis=1)
    output = hard[np.arange(batch), best]
    output[~found] = hard[~found, Z - 1]
    return BatchDiversityOutcome(PARALLEL, found, output, iterations, converged, llr_final, g.E)


def decode_serial_batch(g: TannerGraph, pool: DecoderPool, words) -> BatchDiversityOutcome:
    pool.bind(g)
    y, llr = _words(words)
    batch, Z = y.shape[0], len(pool)
    iterations = np.zeros((batch, Z), dtype=np.int64)
    converged = np.zeros((batch, Z), dtype=bool)
    llr_final = np.full((batch, Z, g.N), np.nan)
    output = np.zeros((batch, g.N), dtype=np.uint8)
    found = np.zeros(batch, dtype=bool)

    active = np.arange(batch)
    for j, d in enumerate(pool.decoders):
        if active.size == 0:
            break
        result = decode_batch(g, d.weights, llr[active], pool.i_test)
        iterations[active, j] = result.iterations
        converged[active, j] = result.converged
        llr_final[active, j] = result.llr_final
        # the last decoder's decision is kept when nothing converges
        output[active] = result.hard
        found[active] = result.converged
        active = active[~result.converged]
    return BatchDiversityOutcome(SERIAL, found, output, iterations, converged, llr_final, g.E)


def decode_parallel(g: TannerGraph, pool: DecoderPool, llr_ch, y) -> DiversityOutcome:
    return decode_parallel_batch(g, pool, _single(llr_ch, y)).outcome(0)


def decode_serial(g: TannerGraph, pool: DecoderPool, llr_ch, y) -> DiversityOutcome:
    return decode_serial_batch(g, pool, _single(llr_ch, y)).outcome(0)


@dataclass(frozen=True)
class _Word:
    y: np.ndarray
    llr: np.ndarray = field(default=None)


def _single(llr_ch, y):
    return _Word(np.asarray(getattr(y, "y", y), dtype=np.float64)[None, :],
                 np.asarray(llr_ch, dtype=np.float64)[None, :])


def metrics(outcomes) -> DiversityMetrics:
    """
    Iteration, latency and check-node-update totals over one or more batch
    outcomes. Latency is the slowest decoder in parallel mode and the sum
    of the decoders actually run in serial mode.
    """
    if isinstance(outcomes, BatchDiversityOutcome):
        outcomes = [outcomes]
    total = DiversityMetrics()
    for outcome in outcomes:
        per_word = outcome.iterations.sum(axis=1)
        total = total + DiversityMetrics(len(outcome), int(per_word.sum()), int(outcome.latency().sum()),
                                         int(per_word.sum()) * outcome.n_edges)
    if total.words == 0:
        raise ValueError("metrics needs at least one decoded word")
    return total


def write_selection_report(path: str, pool: DecoderPool, order, failures, n_words: int, snr_db: float) -> None:
    report = {
        "snr_db": snr_db,
        "test_words": n_words,
        "order": [pool.decoders[j].id for j in order],
        "decoders": [{"id": d.id, "class": d.label, "failures": len(failures[j])}
                     for j, d in enumerate(pool.decoders)],
    }
    with open(path, "w") as report_file:
        json.dump(report, report_file, indent=2)
    logger.info("selection order %s written to %s", report["order"], path)


def read_selection_order(path: str) -> list:
    with open(path, "r") as report_file:
        return list(json.load(report_file)["order"])

import json
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri_exp

logger = logging.getLogger(__name__)

# Binary-input AWGN channel, BPSK (+1 for bit 0). The all-zero codeword is
# always the one transmitted, so the received word is y = 1 + z.


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float
    sigma: float
    sigma2: float

    # probability that a single received sample is wrong, Q(1/sigma)
    def error_probability(self) -> float:
        return float(ndtr(-1.0 / self.sigma))


@dataclass(frozen=True)
class ReceivedWord:
    y: np.ndarray
    llr: np.ndarray

    def __len__(self):
        return self.y.shape[-1]


def snr_to_sigma(snr_db: float) -> ChannelParams:
    if not np.isfinite(snr_db):
        raise ValueError(f"SNR must be finite, got {snr_db}")
    sigma2 = 10.0 ** (-snr_db / 10.0)
    return ChannelParams(float(snr_db), float(np.sqrt(sigma2)), float(sigma2))


def channel_llr(y, params: ChannelParams) -> np.ndarray:
    return 2.0 * np.asarray(y, dtype=np.float64) / params.sigma2


# Independent stream for (seed, key1, key2, ...): the same keys always give
# the same stream, different keys give statistically independent ones.
def worker_stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def sample_awgn(params: ChannelParams, n_bits: int, rng: np.random.Generator, size: int = None) -> ReceivedWord:
    shape = (n_bits,) if size is None else (size, n_bits)
    y = 1.0 + params.sigma * rng.standard_normal(shape)
    return ReceivedWord(y, channel_llr(y, params))


def _truncated_noise(in_error: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """
    Gaussian noise conditioned on the error pattern, by inverse CDF.

    Positions in error get z < -1, the others z > -1. The upper part is drawn
    as the mirror of a lower tail, so both cases invert the CDF on
    (0, Phi(bound)]. The inversion runs in log space and stays finite when
    Phi(bound) underflows at high SNR.
    """
    # u in (0, 1]
    u = 1.0 - rng.random(in_error.shape)
    bound = np.where(in_error, -1.0 / sigma, 1.0 / sigma)
    z = sigma * ndtri_exp(np.log(u) + log_ndtr(bound))
    z = np.where(in_error, z, -z)
    # the inverse CDF may land on the bound itself after rounding
    below = np.nextafter(-1.0, -np.inf)
    above = np.nextafter(-1.0, np.inf)
    return np.where(in_error, np.minimum(z, below), np.maximum(z, above))


def sample_error_class(params: ChannelParams, A, n_bits: int, rng: np.random.Generator) -> ReceivedWord:
    in_error = np.zeros(n_bits, dtype=bool)
    in_error[list(A)] = True
    y = 1.0 + _truncated_noise(in_error, params.sigma, rng)
    return ReceivedWord(y, channel_llr(y, params))


# Batch version: one row of the boolean mask per word.
def sample_error_patterns(params: ChannelParams, in_error: np.ndarray, rng: np.random.Generator) -> ReceivedWord:
    y = 1.0 + _truncated_noise(np.asarray(in_error, dtype=bool), params.sigma, rng)
    return ReceivedWord(y, channel_llr(y, params))


def error_set(y) -> set:
    y = y.y if isinstance(y, ReceivedWord) else np.asarray(y)
    return set(np.flatnonzero(y <= 0).tolist())


def dump_training_set(path: str, words: ReceivedWord, params: ChannelParams, label: str) -> None:
    """
    Writes the channel outputs as raw little-endian float32 records (N values
    per word) and a JSON sidecar named path + '.json'.
    """
    y = np.atleast_2d(words.y)
    y.astype("<f4").tofile(path)
    with open(path + ".json", "w") as sidecar:
        json.dump({"sigma": params.sigma, "snr_db": params.snr_db, "class": label,
                   "count": int(y.shape[0]), "n_bits": int(y.shape[1])}, sidecar, indent=2)
    logger.info("dumped %d words of class %s to %s", y.shape[0], label, path)


def load_training_set(path: str) -> np.ndarray:
    with open(path + ".json", "r") as sidecar:
        meta = json.load(sidecar)
    return np.fromfile(path, dtype="<f4").reshape(meta["count"], meta["n_bits"])

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ca.uqam.info.bprnn import channel
from ca.uqam.info.bprnn.decoding.bp import (MESSAGE_CLAMP, PRODUCT_CLAMP, WeightSet, apost_kernel,
                                            check_kernel, data_kernel, from_check_view,
                                            leave_one_out_product, sum_per_variable, to_check_view)
from ca.uqam.info.bprnn.errors import ConfigError, TrainingError
from ca.uqam.info.bprnn.graph.tanner import TannerGraph

logger = logging.getLogger(__name__)

UNSPECIALIZED = "unspecialized"


@dataclass
class TrainConfig:
    snr_db: float
    i_train: int = 10
    batch_size: int = 8192
    n_batches: int = 64
    epochs: int = 10
    learning_rate: float = 1e-3
    rms_decay: float = 0.9
    rms_epsilon: float = 1e-7
    class_label: str = UNSPECIALIZED
    # words per forward/backward pass inside a batch, bounds the trace memory
    micro_batch: int = 256

    def __post_init__(self):
        if self.i_train < 1:
            raise ConfigError(f"i_train must be >= 1, got {self.i_train}")
        if self.batch_size < 1 or self.n_batches < 1 or self.epochs < 1 or self.micro_batch < 1:
            raise ConfigError("batch_size, n_batches, epochs and micro_batch must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0 <= self.rms_decay < 1 or self.rms_epsilon <= 0:
            raise ConfigError("rms_decay must be in [0, 1) and rms_epsilon > 0")


@dataclass
class LossReport:
    epoch_losses: list = field(default_factory=list)
    # (epoch, batch, loss) rows, 1-based epoch and batch numbers
    history: list = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else float("nan")

    def to_csv(self) -> str:
        lines = ["epoch,batch,loss"]
        lines += [f"{epoch},{batch},{value:.10g}" for epoch, batch, value in self.history]
        return "\n".join(lines) + "\n"


@dataclass
class Gradient:
    w_data: np.ndarray
    w_apost: np.ndarray

    def __add__(self, other: "Gradient") -> "Gradient":
        return Gradient(self.w_data + other.w_data, self.w_apost + other.w_apost)

    def scaled(self, factor: float) -> "Gradient":
        return Gradient(self.w_data * factor, self.w_apost * factor)


@dataclass
class Trace:
    """Tape of one unrolled forward pass, read back in reverse by backward()."""
    llr_ch: np.ndarray
    # one dict per iteration: t, product, beta_raw (check pass) and, except for
    # the last iteration, extrinsic and alpha_raw (data pass)
    records: list
    beta_last: np.ndarray
    posterior: np.ndarray


def softplus(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


# Binary cross-entropy with the all-zero codeword as target:
# -(1/N) sum log sigmoid(L) = (1/N) sum softplus(-L), averaged over words.
def loss(llr_final) -> float:
    llr_final = np.asarray(llr_final, dtype=np.float64)
    return float(np.mean(softplus(-llr_final)))


def forward_unrolled(g: TannerGraph, weights: WeightSet, llr_ch, i_train: int):
    if i_train < 1:
        raise ValueError(f"i_train must be >= 1, got {i_train}")
    llr_ch = np.atleast_2d(np.asarray(llr_ch, dtype=np.float64))
    records = []
    alpha = np.clip(llr_ch[:, g.edge_var], -MESSAGE_CLAMP, MESSAGE_CLAMP)
    beta = None
    for it in range(1, i_train + 1):
        t, product, _, beta_raw, beta = check_kernel(g, alpha)
        record = {"t": t, "product": product, "beta_raw": beta_raw}
        # the a-posteriori layer is only evaluated after the last iteration
        if it < i_train:
            extrinsic, alpha_raw, alpha = data_kernel(g, weights, llr_ch, beta)
            record["extrinsic"] = extrinsic
            record["alpha_raw"] = alpha_raw
        records.append(record)
    posterior = apost_kernel(g, weights, llr_ch, beta)
    return Trace(llr_ch, records, beta, posterior), posterior


def _inside(x: np.ndarray, bound: float) -> np.ndarray:
    return (x > -bound) & (x < bound)


def _leave_one_out_backward(t_view: np.ndarray, grad_view: np.ndarray) -> np.ndarray:
    # d/dt_j of sum_e grad_e * prod_{k != e} t_k, one column at a time
    out = np.zeros_like(t_view)
    for j in range(t_view.shape[-1]):
        t_j = t_view.copy()
        t_j[..., j] = 1.0
        grad_j = grad_view.copy()
        grad_j[..., j] = 0.0
        out[..., j] = np.sum(grad_j * leave_one_out_product(t_j), axis=-1)
    return out


def backward(trace: Trace, g: TannerGraph, weights: WeightSet) -> Gradient:
    """
    Exact gradient of the batch-mean loss with respect to both weight vectors.

    The weights are shared by all unrolled iterations, so the contribution of
    every iteration is summed into the same vector. Clamped values pass no
    gradient.
    """
    batch, n_vars = trace.posterior.shape

    # 1. loss and a-posteriori layer
    grad_posterior = -expit(-trace.posterior) / (n_vars * batch)
    grad_edges = grad_posterior[:, g.edge_var]
    grad_apost = np.sum(grad_edges * trace.beta_last, axis=0)
    grad_beta = grad_edges * weights.w_apost
    grad_data = np.zeros(g.E)

    # 2. unrolled iterations, last one first
    for it in range(len(trace.records), 0, -1):
        record = trace.records[it - 1]
        grad_beta_raw = grad_beta * _inside(record["beta_raw"], MESSAGE_CLAMP)
        clipped = np.clip(record["product"], -PRODUCT_CLAMP, PRODUCT_CLAMP)
        grad_product = grad_beta_raw * 2.0 / (1.0 - clipped ** 2) * _inside(record["product"], PRODUCT_CLAMP)
        grad_t = from_check_view(g, _leave_one_out_backward(to_check_view(g, record["t"], 1.0),
                                                            to_check_view(g, grad_product, 0.0)))
        grad_alpha = grad_t * (1.0 - record["t"] ** 2) / 2.0
        if it == 1:
            break
        # alpha of this iteration came out of the previous data pass
        previous = trace.records[it - 2]
        grad_alpha_raw = grad_alpha * _inside(previous["alpha_raw"], MESSAGE_CLAMP)
        grad_data += np.sum(grad_alpha_raw * previous["extrinsic"], axis=0)
        grad_extrinsic = grad_alpha_raw * weights.w_data
        grad_beta = sum_per_variable(g, grad_extrinsic)[:, g.edge_var] - grad_extrinsic

    return Gradient(grad_data, grad_apost)


@dataclass
class RmsPropState:
    v_data: np.ndarray
    v_apost: np.ndarray
    learning_rate: float = 1e-3
    decay: float = 0.9
    epsilon: float = 1e-7

    @classmethod
    def zeros(cls, n_edges: int, learning_rate: float = 1e-3, decay: float = 0.9, epsilon: float = 1e-7):
        return cls(np.zeros(n_edges), np.zeros(n_edges), learning_rate, decay, epsilon)


def rmsprop_step(weights: WeightSet, gradient: Gradient, state: RmsPropState) -> WeightSet:
    state.v_data = state.decay * state.v_data + (1.0 - state.decay) * gradient.w_data ** 2
    state.v_apost = state.decay * state.v_apost + (1.0 - state.decay) * gradient.w_apost ** 2
    w_data = weights.w_data - state.learning_rate * gradient.w_data / (np.sqrt(state.v_data) + state.epsilon)
    w_apost = weights.w_apost - state.learning_rate * gradient.w_apost / (np.sqrt(state.v_apost) + state.epsilon)
    return WeightSet(w_data, w_apost)


def batch_gradient(g: TannerGraph, weights: WeightSet, llr_ch: np.ndarray, i_train: int, micro_batch: int):
    # mean loss and mean gradient over the batch, computed in slices
    total = llr_ch.shape[0]
    gradient = Gradient(np.zeros(g.E), np.zeros(g.E))
    loss_sum = 0.0
    for start in range(0, total, micro_batch):
        chunk = llr_ch[start:start + micro_batch]
        trace, posterior = forward_unrolled(g, weights, chunk, i_train)
        share = chunk.shape[0] / total
        gradient = gradient + backward(trace, g, weights).scaled(share)
        loss_sum += loss(posterior) * share
    return loss_sum, gradient


class ClassSampler:
    """
    Draws training words for one error class: an absorbing set chosen
    uniformly from the class, then truncated Gaussian noise putting the
    errors exactly on it. With no class sets, plain channel noise is drawn.
    """

    def __init__(self, n_bits: int, class_sets=None):
        self.n_bits = n_bits
        self.sets = None
        if class_sets is not None:
            members = [list(getattr(s, "members", s)) for s in class_sets]
            if not members:
                raise TrainingError("empty class set")
            sizes = {len(m) for m in members}
            if len(sizes) != 1:
                raise TrainingError("all absorbing sets of a class must have the same size")
            self.sets = np.array(members, dtype=np.int64)

    def draw(self, params: channel.ChannelParams, count: int, rng: np.random.Generator) -> channel.ReceivedWord:
        if self.sets is None:
            return channel.sample_awgn(params, self.n_bits, rng, size=count)
        chosen = self.sets[rng.integers(0, self.sets.shape[0], size=count)]
        in_error = np.zeros((count, self.n_bits), dtype=bool)
        in_error[np.repeat(np.arange(count), chosen.shape[1]), chosen.ravel()] = True
        return channel.sample_error_patterns(params, in_error, rng)


def train(g: TannerGraph, cfg: TrainConfig, class_sets, rng: np.random.Generator,
          initial: WeightSet = None, dump_path: str = None):
    """
    Trains one BP-RNN weight set with RMSprop.

    class_sets is the list of absorbing sets of the error class, or None for
    the unspecialized decoder trained on plain channel noise. Weights start
    from all ones, i.e. from plain BP.
    """
    if cfg.class_label != UNSPECIALIZED and class_sets is None:
        raise TrainingError(f"class {cfg.class_label} given without its absorbing sets")
    if cfg.class_label != UNSPECIALIZED and len(class_sets) == 0:
        raise TrainingError(f"class {cfg.class_label} has no absorbing set")
    sampler = ClassSampler(g.N, None if cfg.class_label == UNSPECIALIZED else class_sets)
    params = channel.snr_to_sigma(cfg.snr_db)
    weights = initial if initial is not None else WeightSet.ones(g)
    state = RmsPropState.zeros(g.E, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon)
    report = LossReport()

    logger.info("training class %s at %.2f dB: %d epochs x %d batches x %d words, I_train=%d",
                cfg.class_label, cfg.snr_db, cfg.epochs, cfg.n_batches, cfg.batch_size, cfg.i_train)
    batch_index = 0
    for epoch in range(1, cfg.epochs + 1):
        epoch_losses = []
        for batch in range(1, cfg.n_batches + 1):
            batch_index += 1
            words = sampler.draw(params, cfg.batch_size, rng)
            if dump_path is not None and batch_index == 1:
                channel.dump_training_set(dump_path, words, params, cfg.class_label)
            value, gradient = batch_gradient(g, weights, words.llr, cfg.i_train, cfg.micro_batch)
            if not np.isfinite(value):
                raise TrainingError("non-finite loss", batch_index)
            weights = rmsprop_step(weights, gradient, state)
            epoch_losses.append(value)
            report.history.append((epoch, batch, value))
            logger.debug("epoch %d batch %d loss %.6f", epoch, batch, value)
        report.epoch_losses.append(float(np.mean(epoch_losses)))
        logger.info("epoch %d/%d mean loss %.6f", epoch, cfg.epochs, report.epoch_losses[-1])
    return weights, report


def evaluate_loss(g: TannerGraph, weights: WeightSet, llr_ch, i_train: int) -> float:
    return loss(forward_unrolled(g, weights, llr_ch, i_train)[1])

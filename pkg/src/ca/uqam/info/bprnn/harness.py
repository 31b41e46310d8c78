import argparse
import csv
import io
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ca.uqam.info.bprnn import channel
from ca.uqam.info.bprnn.config_loader import (ExperimentConfig, PoolEntry, config_loader, load_experiment,
                                              load_pool_manifest, write_pool_manifest)
from ca.uqam.info.bprnn.decoding import bp, diversity, osd, training
from ca.uqam.info.bprnn.decoding.diversity import DecoderPool, DiversityMetrics, PoolDecoder
from ca.uqam.info.bprnn.errors import BprnnError, ConfigError
from ca.uqam.info.bprnn.graph import absorbing, tanner

logger = logging.getLogger(__name__)

CSV_HEADER = ["snr_db", "decoder", "osd_mode", "osd_order", "frames", "frame_errors", "fer", "fer_lo",
              "fer_hi", "avg_iters", "avg_latency", "avg_cn_updates", "osd_invocations", "seed"]


@dataclass
class ResultRow:
    snr_db: float
    decoder: str
    osd_mode: str
    osd_order: int
    frames: int
    frame_errors: int
    fer_lo: float
    fer_hi: float
    avg_iters: float
    avg_latency: float
    avg_cn_updates: float
    osd_invocations: int
    seed: int
    # max-frame cap reached before min_errors
    capped: bool = False

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    def to_csv_row(self) -> list:
        return [f"{self.snr_db:g}", self.decoder, self.osd_mode, self.osd_order, self.frames, self.frame_errors,
                f"{self.fer:.6e}", f"{self.fer_lo:.6e}", f"{self.fer_hi:.6e}", f"{self.avg_iters:.4f}",
                f"{self.avg_latency:.4f}", f"{self.avg_cn_updates:.2f}", self.osd_invocations, self.seed]


def wilson_interval(errors: int, frames: int, confidence: float = 0.95):
    if frames == 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / frames
    denom = 1.0 + z * z / frames
    center = (p + z * z / (2.0 * frames)) / denom
    half = z * np.sqrt(p * (1.0 - p) / frames + z * z / (4.0 * frames * frames)) / denom
    return min(max(0.0, center - half), p), max(min(1.0, center + half), p)


def write_results_csv(path: str, rows) -> None:
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.to_csv_row())
    logger.info("%d result rows written to %s", len(rows), path)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class ChunkCounts:
    frames: int = 0
    errors: int = 0
    osd_invocations: int = 0
    metrics: DiversityMetrics = field(default_factory=DiversityMetrics)

    def __add__(self, other: "ChunkCounts") -> "ChunkCounts":
        return ChunkCounts(self.frames + other.frames, self.errors + other.errors,
                           self.osd_invocations + other.osd_invocations, self.metrics + other.metrics)


@dataclass(frozen=True)
class SimulationTask:
    g: tanner.TannerGraph
    pool: DecoderPool
    mode: str
    osd_mode: str
    osd_order: int
    periodic_every: int
    params: channel.ChannelParams
    seed: int
    keys: tuple
    n_frames: int


def _simulate_periodic(task: SimulationTask, words):
    g, d = task.g, task.pool.decoders[0]
    result = bp.decode_batch(g, d.weights, words.llr, task.pool.i_test, snapshot_every=task.periodic_every)
    output = result.hard.copy()
    failed = np.flatnonzero(~result.converged)
    for k in failed:
        output[k] = osd.periodic_postprocess(g, result.snapshots[k], result.llr_final[k], words.y[k],
                                             task.osd_order)
    total = int(result.iterations.sum())
    return output, failed.size, DiversityMetrics(len(result), total, total, total * g.E)


def _simulate_chunk(task: SimulationTask) -> ChunkCounts:
    rng = channel.worker_stream(task.seed, *task.keys)
    words = channel.sample_awgn(task.params, task.g.N, rng, size=task.n_frames)
    if task.osd_mode == "periodic":
        output, invocations, metrics = _simulate_periodic(task, words)
    else:
        decode = diversity.decode_serial_batch if task.mode == diversity.SERIAL else diversity.decode_parallel_batch
        outcome = decode(task.g, task.pool, words)
        output = outcome.output.copy()
        invocations = 0
        if task.osd_mode == "postprocess":
            for k in np.flatnonzero(~outcome.found):
                soft = outcome.llr_final[k]
                soft = soft[~np.any(np.isnan(soft), axis=1)]
                output[k] = osd.postprocess(task.g, soft, words.y[k], task.osd_order)
                invocations += 1
        metrics = diversity.metrics(outcome)
    errors = int(np.count_nonzero(np.any(output, axis=1)))
    return ChunkCounts(task.n_frames, errors, invocations, metrics)


def run_point(cfg: ExperimentConfig, g: tanner.TannerGraph, pool: DecoderPool, snr_db: float,
              snr_index: int = 0) -> ResultRow:
    """
    Simulates rounds of cfg.workers chunks until cfg.min_errors frame errors
    or cfg.max_frames frames. The chunk of worker w in round r draws from
    the stream (seed, snr_index, w, r), so a run only depends on the seed
    and the worker count.
    """
    pool.bind(g)
    params = channel.snr_to_sigma(snr_db)
    mode = diversity.SERIAL if cfg.decoder == "diversity-serial" else diversity.PARALLEL
    totals = ChunkCounts()
    round_index = 0
    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        while totals.errors < cfg.min_errors and totals.frames < cfg.max_frames:
            left = cfg.max_frames - totals.frames
            tasks = []
            for worker in range(cfg.workers):
                n_frames = min(cfg.chunk_frames, left)
                if n_frames <= 0:
                    break
                left -= n_frames
                tasks.append(SimulationTask(g, pool, mode, cfg.osd_mode, cfg.osd_order, cfg.periodic_every,
                                            params, cfg.seed, (snr_index, worker, round_index), n_frames))
            results = executor.map(_simulate_chunk, tasks) if executor else map(_simulate_chunk, tasks)
            for counts in results:
                totals = totals + counts
            round_index += 1
            logger.debug("%.2f dB round %d: %d errors / %d frames", snr_db, round_index, totals.errors, totals.frames)
    finally:
        if executor is not None:
            executor.shutdown()

    capped = totals.errors < cfg.min_errors
    if capped:
        logger.warning("%.2f dB: frame cap %d reached with %d errors", snr_db, cfg.max_frames, totals.errors)
    lo, hi = wilson_interval(totals.errors, totals.frames)
    m = totals.metrics
    row = ResultRow(float(snr_db), cfg.decoder, cfg.osd_mode, cfg.osd_order, totals.frames, totals.errors, lo, hi,
                    m.avg_iterations, m.avg_latency, m.avg_cn_updates, totals.osd_invocations, cfg.seed, capped)
    logger.info("%.2f dB: FER %.3e [%.3e, %.3e] over %d frames, avg iters %.2f",
                snr_db, row.fer, lo, hi, row.frames, row.avg_iters)
    return row


# ---------------------------------------------------------------------------
# Decoder pools
# ---------------------------------------------------------------------------

def entries_for_snr(entries, snr_db: float) -> list:
    exact = [e for e in entries if e.snr_db is not None and np.isclose(e.snr_db, snr_db)]
    if exact:
        return exact
    untagged = [e for e in entries if e.snr_db is None]
    if untagged:
        return untagged
    nearest = min({e.snr_db for e in entries}, key=lambda s: abs(s - snr_db))
    logger.warning("no decoder trained at %.2f dB, using the ones trained at %.2f dB", snr_db, nearest)
    return [e for e in entries if np.isclose(e.snr_db, nearest)]


def order_from_ids(pool: DecoderPool, ids) -> list:
    positions = {d.id: j for j, d in enumerate(pool.decoders)}
    order = [positions[i] for i in ids if i in positions]
    return order + [j for j in range(len(pool)) if j not in order]


def build_pool(cfg: ExperimentConfig, g: tanner.TannerGraph, snr_db: float) -> DecoderPool:
    if cfg.decoder == "bp":
        return DecoderPool([PoolDecoder(0, "bp")], cfg.i_test)
    if cfg.decoder == "bprnn-single" and cfg.weights:
        return DecoderPool([PoolDecoder(0, "bprnn", bp.load_weights(g, cfg.weights), snr_db)], cfg.i_test)
    if not cfg.pool:
        raise ConfigError(f"decoder {cfg.decoder} needs a pool manifest")
    entries = entries_for_snr(load_pool_manifest(cfg.pool), snr_db)
    pool = DecoderPool([PoolDecoder(e.id, e.class_label, bp.load_weights(g, e.weights), e.snr_db) for e in entries],
                       cfg.i_test)
    order = order_from_ids(pool, diversity.read_selection_order(cfg.order)) if cfg.order else list(range(len(pool)))
    z = 1 if cfg.decoder == "bprnn-single" else min(cfg.z, len(pool))
    return diversity.take_diversity(pool, order, z)


def run_sweep(cfg: ExperimentConfig, g: tanner.TannerGraph = None) -> list:
    g = g if g is not None else tanner.read_alist(cfg.alist)
    rows = []
    for snr_index, snr_db in enumerate(cfg.snr_db):
        rows.append(run_point(cfg, g, build_pool(cfg, g, snr_db), snr_db, snr_index))
    if cfg.out:
        write_results_csv(cfg.out, rows)
    return rows


# ---------------------------------------------------------------------------
# Pipeline: enumerate, train, select, retrain, simulate
# ---------------------------------------------------------------------------

def _snr_key(snr_db: float) -> int:
    return int(round(snr_db * 100)) + 10_000


def _train_one(args):
    g, cfg, label, sets, seed, keys = args
    weights, report = training.train(g, cfg, sets, channel.worker_stream(seed, *keys))
    return weights, report


def train_pool(cfg: ExperimentConfig, g: tanner.TannerGraph, classes, snr_db: float, ids=None) -> DecoderPool:
    """One decoder per error class, trained at snr_db, saved under cfg.work_dir."""
    ids = list(range(len(classes))) if ids is None else list(ids)
    tasks = [(g, cfg.train_config(snr_db, str(c.et)), str(c.et), c.sets, cfg.seed, (1, i, _snr_key(snr_db)))
             for i, c in zip(ids, classes)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            trained = list(executor.map(_train_one, tasks))
    else:
        trained = [_train_one(task) for task in tasks]

    os.makedirs(cfg.work_dir, exist_ok=True)
    decoders, entries = [], []
    for i, c, (weights, report) in zip(ids, classes, trained):
        path = os.path.join(cfg.work_dir, f"weights_{i}_{snr_db:g}dB.txt")
        bp.save_weights(g, weights, path)
        with open(os.path.join(cfg.work_dir, f"loss_{i}_{snr_db:g}dB.csv"), "w") as loss_file:
            loss_file.write(report.to_csv())
        decoders.append(PoolDecoder(i, str(c.et), weights, snr_db))
        entries.append(PoolEntry(i, str(c.et), path, snr_db))
    write_pool_manifest(os.path.join(cfg.work_dir, f"pool_{snr_db:g}dB.json"), entries)
    return DecoderPool(decoders, cfg.i_test)


def collect_failures(g: tanner.TannerGraph, pool: DecoderPool, snr_db: float, n_words: int,
                     rng: np.random.Generator, chunk: int = 10_000) -> list:
    params = channel.snr_to_sigma(snr_db)
    failures = [set() for _ in pool.decoders]
    for start in range(0, n_words, chunk):
        words = channel.sample_awgn(params, g.N, rng, size=min(chunk, n_words - start))
        for j, failed in enumerate(diversity.failure_sets(g, pool, words)):
            failures[j].update(start + k for k in failed)
    return failures


def select_pool(cfg: ExperimentConfig, g: tanner.TannerGraph, pool: DecoderPool, snr_db: float,
                report_path: str = None) -> list:
    failures = collect_failures(g, pool, snr_db, cfg.test_words,
                                channel.worker_stream(cfg.seed, 2, _snr_key(snr_db)))
    for j, f in enumerate(failures):
        if not f:
            logger.warning("decoder %s has an empty failure set at %.2f dB", pool.decoders[j].id, snr_db)
    order = diversity.select_order(failures)
    if report_path:
        diversity.write_selection_report(report_path, pool, order, failures, cfg.test_words, snr_db)
    return order


def run_pipeline(cfg: ExperimentConfig) -> list:
    if not cfg.decoder.startswith("diversity"):
        raise ConfigError("the pipeline simulates diversity-parallel or diversity-serial")
    g = tanner.read_alist(cfg.alist)
    logger.info("graph %s loaded from %s", g, cfg.alist)
    os.makedirs(cfg.work_dir, exist_ok=True)

    # 1. absorbing-set classes, codeword supports left out
    classes = []
    for nu in cfg.nu:
        found = absorbing.enumerate_all(g, nu, cfg.workers, cfg.sample_size, cfg.seed)
        classes += [c for c in found.values() if not c.codeword_support and c.count > 0]
    if not classes:
        raise ConfigError(f"no trainable absorbing-set class for nu in {cfg.nu}")
    logger.info("%d error classes to train", len(classes))

    # 2. train and select at the anchor SNR
    anchor = cfg.anchor_snr_db
    pool = train_pool(cfg, g, classes, anchor)
    order = select_pool(cfg, g, pool, anchor, os.path.join(cfg.work_dir, f"order_{anchor:g}dB.json"))
    z = min(cfg.z, len(pool))

    # 3. one point per SNR
    rows = []
    for snr_index, snr_db in enumerate(cfg.snr_db):
        if cfg.reuse_weights or np.isclose(snr_db, anchor):
            point = diversity.take_diversity(pool, order, z)
        elif cfg.reselect_per_snr:
            retrained = train_pool(cfg, g, classes, snr_db)
            point_order = select_pool(cfg, g, retrained, snr_db,
                                      os.path.join(cfg.work_dir, f"order_{snr_db:g}dB.json"))
            point = diversity.take_diversity(retrained, point_order, z)
        else:
            chosen = order[:z]
            point = train_pool(cfg, g, [classes[j] for j in chosen], snr_db, ids=chosen)
        rows.append(run_point(cfg, g, point, snr_db, snr_index))
    if cfg.out:
        write_results_csv(cfg.out, rows)
    return rows


# ---------------------------------------------------------------------------
# Weight profiles and failure CDFs
# ---------------------------------------------------------------------------

def dump_weight_profile(weights: bp.WeightSet):
    return np.sort(weights.w_data), np.sort(weights.w_apost)


def weight_profile_csv(weights: bp.WeightSet) -> str:
    w_data, w_apost = dump_weight_profile(weights)
    lines = ["rank,w_data,w_apost"] + [f"{k},{a:.10g},{b:.10g}" for k, (a, b) in enumerate(zip(w_data, w_apost))]
    return "\n".join(lines) + "\n"


def dump_failure_cdf(g: tanner.TannerGraph, weights: bp.WeightSet, snr_db: float, n_failures: int,
                     i_test: int = 25, seed: int = 0, max_frames: int = 1_000_000, chunk: int = 1000):
    """
    Empirical CDF of the a-posteriori LLRs of failed frames: sorted values
    and cumulative probabilities, empty when nothing failed.
    """
    params = channel.snr_to_sigma(snr_db)
    rng = channel.worker_stream(seed, 3, _snr_key(snr_db))
    collected, failed_frames, frames = [], 0, 0
    while failed_frames < n_failures and frames < max_frames:
        words = channel.sample_awgn(params, g.N, rng, size=min(chunk, max_frames - frames))
        result = bp.decode_batch(g, weights, words.llr, i_test)
        failed = np.flatnonzero(np.any(result.hard, axis=1))[:n_failures - failed_frames]
        collected.append(result.llr_final[failed].ravel())
        failed_frames += failed.size
        frames += len(result)
    values = np.sort(np.concatenate(collected)) if collected else np.empty(0)
    if values.size == 0:
        logger.warning("no failed frame in %d frames at %.2f dB, empty CDF", frames, snr_db)
    cdf = np.arange(1, values.size + 1) / values.size if values.size else np.empty(0)
    return values, cdf


def cdf_csv(values, cdf) -> str:
    return "\n".join(["llr,cdf"] + [f"{v:.6g},{p:.8g}" for v, p in zip(values, cdf)]) + "\n"


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------

def _write(path: str, text: str) -> None:
    if path:
        with open(path, "w") as out_file:
            out_file.write(text)
    else:
        sys.stdout.write(text)


def cmd_graph_info(args) -> int:
    g = tanner.read_alist(args.alist)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(tanner.GRAPH_SUMMARY_HEADER)
    writer.writerow(tanner.graph_summary(g))
    _write(args.out, buffer.getvalue())
    return 0


def cmd_as_enum(args) -> int:
    g = tanner.read_alist(args.alist)
    status = 0
    dumps, rows = [], []
    for nu in args.nu:
        classes = absorbing.enumerate_all(g, nu, args.workers, args.sample_size, args.seed, args.connected_only)
        dumps.append(absorbing.write_dump(classes))
        rows += absorbing.summary_rows(classes)
        if args.brute_force_verify:
            found = {A for c in classes.values() for A in c.sets}
            expected = set(absorbing.brute_force(g, nu))
            if args.connected_only or args.sample_size is not None:
                logger.warning("brute-force verification needs the full, unrestricted enumeration; skipped")
            elif found != expected:
                logger.error("nu=%d: %d sets enumerated, %d by brute force", nu, len(found), len(expected))
                status = 1
            else:
                logger.info("nu=%d: enumeration matches brute force (%d sets)", nu, len(found))
    if args.dump:
        _write(args.dump, "".join(dumps))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(absorbing.SUMMARY_HEADER)
    writer.writerows(rows)
    _write(args.summary, buffer.getvalue())
    return status


def cmd_train(args) -> int:
    g = tanner.read_alist(args.alist)
    fragment = {}
    if args.config:
        loader = config_loader()
        fragment = dict(loader.read_data(os.path.dirname(args.config) or ".", os.path.basename(args.config))
                        .get("train", {}))
    for key in ("i_train", "batch_size", "n_batches", "epochs", "learning_rate", "micro_batch"):
        if getattr(args, key) is not None:
            fragment[key] = getattr(args, key)
    label = args.class_label
    fragment.update(snr_db=args.snr_db, class_label=label)
    cfg = config_loader.build_train_config(fragment)
    sets = None
    if label != training.UNSPECIALIZED:
        if not args.class_dump:
            raise ConfigError("training on an error class needs --class-dump")
        with open(args.class_dump, "r") as dump_file:
            classes = absorbing.read_dump(dump_file.read())
        et = absorbing.parse_extended_type(label)
        if et not in classes:
            raise ConfigError(f"class {label} not found in {args.class_dump}")
        sets = classes[et].sets
    weights, report = training.train(g, cfg, sets, channel.worker_stream(args.seed, 1),
                                     dump_path=args.dump_training_set)
    bp.save_weights(g, weights, args.out)
    if args.loss_csv:
        _write(args.loss_csv, report.to_csv())
    return 0


def cmd_select(args) -> int:
    g = tanner.read_alist(args.alist)
    entries = load_pool_manifest(args.pool)
    pool = DecoderPool([PoolDecoder(e.id, e.class_label, bp.load_weights(g, e.weights), e.snr_db)
                        for e in entries_for_snr(entries, args.snr_db)], args.i_test)
    cfg = ExperimentConfig(alist=args.alist, seed=args.seed, test_words=args.test_words, i_test=args.i_test)
    select_pool(cfg, g, pool, args.snr_db, args.out)
    return 0


def cmd_simulate(args) -> int:
    overrides = {key: getattr(args, key) for key in ("alist", "decoder", "i_test", "osd_mode", "osd_order",
                                                     "snr_db", "min_errors", "max_frames", "seed", "workers",
                                                     "weights", "pool", "order", "z", "out")}
    cfg = load_experiment(args.config, overrides) if args.config else \
        config_loader().build_experiment({}, overrides)
    if not cfg.alist:
        raise ConfigError("no alist file given")
    rows = run_sweep(cfg)
    if not cfg.out:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(row.to_csv_row() for row in rows)
        sys.stdout.write(buffer.getvalue())
    return 0


def cmd_dump_profile(args) -> int:
    g = tanner.read_alist(args.alist)
    _write(args.out, weight_profile_csv(bp.load_weights(g, args.weights)))
    return 0


def cmd_dump_cdf(args) -> int:
    g = tanner.read_alist(args.alist)
    weights = bp.load_weights(g, args.weights) if args.weights else None
    values, cdf = dump_failure_cdf(g, weights, args.snr_db, args.failures, args.i_test, args.seed)
    _write(args.out, cdf_csv(values, cdf))
    return 0


def cmd_pipeline(args) -> int:
    overrides = {"workers": args.workers, "out": args.out}
    if args.reuse_weights:
        overrides["reuse_weights"] = True
    if args.reselect_per_snr:
        overrides["reselect_per_snr"] = True
    run_pipeline(load_experiment(args.config, overrides))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bprnn", description="BP-RNN decoder diversity workbench")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", help="plain-text run log")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-info", help="N, M, E, girth and cycle multiplicity")
    p.add_argument("--alist", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_graph_info)

    p = sub.add_parser("as-enum", help="enumerate and classify absorbing sets")
    p.add_argument("--alist", required=True)
    p.add_argument("--nu", type=int, nargs="+", required=True)
    p.add_argument("--dump")
    p.add_argument("--summary")
    p.add_argument("--brute-force-verify", action="store_true")
    p.add_argument("--connected-only", action="store_true")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_as_enum)

    p = sub.add_parser("train", help="train one BP-RNN decoder")
    p.add_argument("--alist", required=True)
    p.add_argument("--class", dest="class_label", default=training.UNSPECIALIZED)
    p.add_argument("--class-dump")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--loss-csv")
    p.add_argument("--dump-training-set")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--i-train", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--n-batches", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--micro-batch", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("select", help="order a decoder pool by complementary failures")
    p.add_argument("--alist", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--test-words", type=int, default=1_000_000)
    p.add_argument("--snr-db", type=float, default=5.0)
    p.add_argument("--i-test", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="Monte Carlo FER sweep")
    p.add_argument("--config")
    p.add_argument("--alist")
    p.add_argument("--decoder", choices=["bp", "bprnn-single", "diversity-parallel", "diversity-serial"])
    p.add_argument("--i-test", type=int)
    p.add_argument("--osd-mode", metavar="{off,postprocess,periodic,periodic-K}")
    p.add_argument("--osd-order", type=int, choices=[0, 1, 2])
    p.add_argument("--snr-db", type=float, nargs="+")
    p.add_argument("--min-errors", type=int)
    p.add_argument("--max-frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--weights")
    p.add_argument("--pool")
    p.add_argument("--order")
    p.add_argument("--z", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dump-profile", help="sorted weight profiles of a weight file")
    p.add_argument("--alist", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_profile)

    p = sub.add_parser("dump-cdf", help="CDF of a-posteriori LLRs on failed frames")
    p.add_argument("--alist", required=True)
    p.add_argument("--weights")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--failures", type=int, default=1000)
    p.add_argument("--i-test", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_cdf)

    p = sub.add_parser("pipeline", help="enumerate, train, select and simulate")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--reuse-weights", action="store_true")
    p.add_argument("--reselect-per-snr", action="store_true")
    p.set_defaults(func=cmd_pipeline)
    return parser


def setup_logging(level: str, log_file: str = None) -> None:
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level), handlers=handlers, force=True,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    try:
        return args.func(args)
    except BprnnError as error:
        logger.error("%s", error)
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())

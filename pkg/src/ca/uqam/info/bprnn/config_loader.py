import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields

from ca.uqam.info.bprnn.decoding.training import TrainConfig
from ca.uqam.info.bprnn.errors import ConfigError

logger = logging.getLogger(__name__)

DECODERS = ("bp", "bprnn-single", "diversity-parallel", "diversity-serial")
OSD_MODES = ("off", "postprocess", "periodic")


@dataclass
class ExperimentConfig:
    alist: str = None
    decoder: str = "bp"
    i_test: int = 25
    osd_mode: str = "off"
    osd_order: int = 1
    # periodic OSD: a-posteriori LLRs recorded every that many iterations
    periodic_every: int = 25
    snr_db: list = field(default_factory=lambda: [4.0])
    min_errors: int = 100
    max_frames: int = 10_000_000
    seed: int = 0
    workers: int = 1
    # frames decoded by one worker in one round
    chunk_frames: int = 1000
    weights: str = None
    pool: str = None
    order: str = None
    z: int = 10
    out: str = None
    # pipeline
    work_dir: str = "./runs"
    nu: list = field(default_factory=lambda: [3, 4])
    sample_size: int = None
    anchor_snr_db: float = 5.0
    test_words: int = 1_000_000
    reuse_weights: bool = False
    reselect_per_snr: bool = False
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = [float(self.snr_db)]
        if isinstance(self.nu, int):
            self.nu = [self.nu]
        if isinstance(self.osd_mode, str) and self.osd_mode.startswith("periodic-"):
            # "periodic-25" is the short form of periodic with periodic_every=25
            every = self.osd_mode[len("periodic-"):]
            if not every.isdigit():
                raise ConfigError(f"osd_mode must be one of {OSD_MODES} or periodic-<k>, got {self.osd_mode!r}")
            self.osd_mode, self.periodic_every = "periodic", int(every)
        if not self.snr_db:
            raise ConfigError("snr list must not be empty")
        if self.min_errors < 1:
            raise ConfigError(f"min_errors must be >= 1, got {self.min_errors}")
        if self.max_frames < 1 or self.workers < 1 or self.chunk_frames < 1:
            raise ConfigError("max_frames, workers and chunk_frames must be >= 1")
        if self.decoder not in DECODERS:
            raise ConfigError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.osd_mode not in OSD_MODES:
            raise ConfigError(f"osd_mode must be one of {OSD_MODES}, got {self.osd_mode!r}")
        if not 0 <= self.osd_order <= 2:
            raise ConfigError(f"osd_order must be 0, 1 or 2, got {self.osd_order}")
        if self.osd_mode == "periodic" and self.decoder.startswith("diversity"):
            raise ConfigError("periodic OSD runs on a single decoder")
        if self.i_test < 1 or self.z < 1 or self.periodic_every < 1:
            raise ConfigError("i_test, z and periodic_every must be >= 1")

    def train_config(self, snr_db: float, class_label: str) -> TrainConfig:
        return config_loader.build_train_config(dict(self.train, snr_db=snr_db, class_label=class_label))


@dataclass(frozen=True)
class PoolEntry:
    id: int
    class_label: str
    weights: str
    snr_db: float = None


class config_loader:

    # Le chargeur lit un document JSON (configuration d'expérience ou
    # manifeste de décodeurs) puis transforme les fragments en objets typés.
    # Les clés reprennent les options de la ligne de commande, avec des
    # '_' à la place des '-'.
    def __init__(self):
        self.jsobjet = None
        self.input_path = None
        self.input_file_name = None

    # Lit le fichier 'file_name' se trouvant dans le répertoire input_path
    def read_data(self, input_path: str, file_name: str):
        self.input_path = input_path
        self.input_file_name = file_name
        try:
            with open(os.path.join(input_path, file_name), "r") as json_file:
                self.jsobjet = json.load(json_file)
        except json.JSONDecodeError as error:
            raise ConfigError(f"{file_name}: line {error.lineno}: {error.msg}")
        return self.jsobjet

    # Builds the experiment configuration. Values given in `overrides`
    # (typically the command-line flags that were set) win over the file.
    def build_experiment(self, json_fragment: dict = None, overrides: dict = None) -> ExperimentConfig:
        if json_fragment is None:
            fragment = dict(self.jsobjet or {})
            # paths in the file are relative to the file
            for key in ("alist", "weights", "pool", "order", "out", "work_dir"):
                value = fragment.get(key)
                if value is not None and self.input_path is not None and not os.path.isabs(value):
                    fragment[key] = os.path.join(self.input_path, value)
        else:
            fragment = dict(json_fragment)
        fragment.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = sorted(set(fragment) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        cfg = ExperimentConfig(**fragment)
        logger.info("configuration: %s", json.dumps(asdict(cfg), sort_keys=True))
        return cfg

    @staticmethod
    def build_train_config(json_fragment: dict) -> TrainConfig:
        known = {f.name for f in fields(TrainConfig)}
        unknown = sorted(set(json_fragment) - known)
        if unknown:
            raise ConfigError(f"unknown training keys: {unknown}")
        return TrainConfig(**json_fragment)

    # Le manifeste est une liste d'objets {id, class, weights, snr_db};
    # le chemin des poids est relatif au fichier manifeste.
    def build_pool_entries(self, json_fragment: list = None) -> list:
        fragment = self.jsobjet if json_fragment is None else json_fragment
        if not isinstance(fragment, list):
            raise ConfigError("a pool manifest is a JSON list")
        entries = []
        for position, item in enumerate(fragment):
            missing = {"id", "class", "weights"} - set(item)
            if missing:
                raise ConfigError(f"pool entry {position}: missing {sorted(missing)}")
            path = item["weights"]
            if self.input_path is not None and not os.path.isabs(path):
                path = os.path.join(self.input_path, path)
            snr = item.get("snr_db")
            entries.append(PoolEntry(int(item["id"]), str(item["class"]), path,
                                     None if snr is None else float(snr)))
        ids = [e.id for e in entries]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate decoder id in pool manifest: {ids}")
        return entries


def load_experiment(path: str, overrides: dict = None) -> ExperimentConfig:
    loader = config_loader()
    loader.read_data(os.path.dirname(path) or ".", os.path.basename(path))
    return loader.build_experiment(overrides=overrides)


def load_pool_manifest(path: str) -> list:
    loader = config_loader()
    loader.read_data(os.path.dirname(path) or ".", os.path.basename(path))
    return loader.build_pool_entries()


def write_pool_manifest(path: str, entries) -> None:
    base = os.path.dirname(os.path.abspath(path))
    items = []
    for e in entries:
        weights = os.path.relpath(os.path.abspath(e.weights), base)
        items.append({"id": e.id, "class": e.class_label, "weights": weights, "snr_db": e.snr_db})
    with open(path, "w") as manifest:
        json.dump(items, manifest, indent=2)
    logger.info("pool manifest with %d decoders written to %s", len(items), path)

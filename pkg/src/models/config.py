import logging
import os

from dotenv import dotenv_values

from src.errors import ConfigError, GroundTruthGateError

# Configure logging
logger = logging.getLogger(__name__)

# Every method of the benchmark; "one-label" is the multi-class simulation.
METHODS = (
    "unrealistic",
    "basic",
    "basic-C",
    "no-empty",
    "thresholding",
    "cost-sensitive",
    "cost-sensitive-no-empty",
    "cost-sensitive-simple",
    "one-label",
)

DEFAULT_STRATEGIES = (
    "basic",
    "basic-C",
    "no-empty",
    "thresholding",
    "cost-sensitive",
    "cost-sensitive-no-empty",
    "cost-sensitive-simple",
)

DEFAULTS = {
    "FEATURES": "",
    "LABELS": "",
    "FORMAT": "svmlight",
    "STRATEGIES": ",".join(DEFAULT_STRATEGIES),
    "SEEDS": "0,1,2,3,4",
    "TRAIN_FRACTION": "0.8",
    "K_FOLDS": "5",
    "C": "1.0",
    "C_GRID": "",
    "FBR": "0.0,0.1,0.2,0.3,0.4,0.5",
    "INNER_FOLDS": "3",
    "ONE_BASED": "false",
    "NORMALIZE": "false",
    "ALLOW_GROUND_TRUTH": "false",
    "N_JOBS": "1",
    "PARALLEL_SEEDS": "false",
    "OUTPUT_DIR": "output",
    "TOLERANCE": "1e-4",
    "BIAS": "true",
}

# Environment keys that stand in for config keys when neither a flag nor the file sets them.
ENVIRONMENT_KEYS = {
    "SEEDS": "MLC_SEEDS",
    "N_JOBS": "MLC_N_JOBS",
    "OUTPUT_DIR": "MLC_OUTPUT_DIR",
}


def _split_list(value):
    return [piece.strip() for piece in str(value).split(",") if piece.strip()]


def _to_bool(key, value):
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}")


def _convert(key, value, kind):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} has an invalid value {value!r}")


class ExperimentConfig:
    """
    Settings of a training or experiment run, merged from flags, a config
    file, the environment and built-in defaults (in that precedence).
    """

    def __init__(self, values):
        """
        Initialize a new ExperimentConfig from merged string values.

        Args:
            values (dict): KEY -> value, keys as in DEFAULTS
        """
        self.features = _split_list(values["FEATURES"])
        self.labels = values["LABELS"] or None
        self.format = values["FORMAT"]
        self.strategies = _split_list(values["STRATEGIES"])
        self.seeds = [_convert("SEEDS", s, int) for s in _split_list(values["SEEDS"])]
        self.train_fraction = _convert("TRAIN_FRACTION", values["TRAIN_FRACTION"], float)
        self.k_folds = _convert("K_FOLDS", values["K_FOLDS"], int)
        self.C = _convert("C", values["C"], float)
        self.c_grid = [_convert("C_GRID", c, float) for c in _split_list(values["C_GRID"])] or None
        self.fbr = [_convert("FBR", f, float) for f in _split_list(values["FBR"])]
        self.inner_folds = _convert("INNER_FOLDS", values["INNER_FOLDS"], int)
        self.one_based = _to_bool("ONE_BASED", values["ONE_BASED"])
        self.normalize = _to_bool("NORMALIZE", values["NORMALIZE"])
        self.allow_ground_truth = _to_bool("ALLOW_GROUND_TRUTH", values["ALLOW_GROUND_TRUTH"])
        self.n_jobs = _convert("N_JOBS", values["N_JOBS"], int)
        self.parallel_seeds = _to_bool("PARALLEL_SEEDS", values["PARALLEL_SEEDS"])
        self.output_dir = values["OUTPUT_DIR"]
        self.tolerance = _convert("TOLERANCE", values["TOLERANCE"], float)
        self.bias = _to_bool("BIAS", values["BIAS"])
        self.validate()

    def validate(self):
        unknown = [s for s in self.strategies if s not in METHODS]
        if unknown:
            raise ConfigError(f"unknown strategies {unknown}; choose from {', '.join(METHODS)}")
        if not self.strategies:
            raise ConfigError("no strategy selected")
        if "unrealistic" in self.strategies and not self.allow_ground_truth:
            raise GroundTruthGateError(
                "the unrealistic strategy reads test labels; set ALLOW_GROUND_TRUTH or pass --allow-ground-truth"
            )
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"TRAIN_FRACTION must lie in (0, 1), got {self.train_fraction}")
        if self.k_folds < 2 or self.inner_folds < 2:
            raise ConfigError("fold counts must be at least 2")
        if not self.C > 0 or (self.c_grid and min(self.c_grid) <= 0):
            raise ConfigError("C values must be positive")
        if not self.fbr or any(not 0.0 <= f <= 1.0 for f in self.fbr):
            raise ConfigError("FBR needs values in [0, 1]")
        if self.n_jobs < 1:
            raise ConfigError("N_JOBS must be at least 1")
        if not self.tolerance > 0:
            raise ConfigError("TOLERANCE must be positive")
        if self.format == "dense-pair" and not self.labels:
            raise ConfigError("dense-pair data needs LABELS")

    @classmethod
    def load(cls, config_path=None, overrides=None):
        """
        Merge the configuration sources.

        Args:
            config_path (str, optional): dotenv-style KEY=value file
            overrides (dict, optional): Values from command-line flags; None entries are ignored

        Returns:
            ExperimentConfig: Validated configuration
        """
        values = dict(DEFAULTS)
        for key, env_key in ENVIRONMENT_KEYS.items():
            if os.environ.get(env_key):
                values[key] = os.environ[env_key]
        if config_path:
            if not os.path.exists(config_path):
                logger.error(f"Config file {config_path} not found")
                raise ConfigError(f"config file {config_path} does not exist")
            file_values = dotenv_values(config_path)
            unknown = sorted(set(file_values) - set(DEFAULTS))
            if unknown:
                raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
            values.update({k: v for k, v in file_values.items() if v is not None})
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        return cls(values)

    def to_dict(self):
        return {
            "features": self.features,
            "labels": self.labels,
            "format": self.format,
            "strategies": self.strategies,
            "seeds": self.seeds,
            "train_fraction": self.train_fraction,
            "k_folds": self.k_folds,
            "C": self.C,
            "c_grid": self.c_grid,
            "fbr": self.fbr,
            "inner_folds": self.inner_folds,
            "one_based": self.one_based,
            "normalize": self.normalize,
            "allow_ground_truth": self.allow_ground_truth,
            "tolerance": self.tolerance,
            "bias": self.bias,
        }

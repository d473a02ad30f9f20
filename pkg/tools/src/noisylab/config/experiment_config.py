from __future__ import annotations
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import argparse
import hashlib
import json
import logging
import math
import os
import re

import jsonschema
import numpy as np
import yaml

from noisylab.config.method_kind import MethodKind
from noisylab.errors.config_error import ConfigError
from noisylab.errors.tensor_error import TensorError
from noisylab.nn.architecture import Architecture

logger = logging.getLogger(__name__)

OUT_ENV = "NOISYLAB_OUT"
DEFAULT_OUT = "runs"
_SCHEMA_PATH = Path(__file__).with_name("experiment.schema.json")
_BOOL_RE = re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$")
_ARG_RE = re.compile(r"argument (--[A-Za-z0-9-]+)")

# Settings that change where or how fast a run happens, never what it computes.
_RUNTIME_KEYS = frozenset({"out", "workers", "progress"})
_AUGMENTABLE = (MethodKind.BASELINE, MethodKind.JOCOR)


class _ConfigLoader(yaml.SafeLoader):
    """SafeLoader where only ``true``/``false`` are booleans (``yes``/``no``/``on``/``off`` stay strings)."""


_ConfigLoader.yaml_implicit_resolvers = {
    char: [(tag, regexp) for tag, regexp in mappers if tag != "tag:yaml.org,2002:bool"]
    for char, mappers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
_ConfigLoader.add_implicit_resolver("tag:yaml.org,2002:bool", _BOOL_RE, list("tTfF"))


@dataclass(frozen=True)
class _Setting:
    key: str     # flag / file spelling
    attr: str    # ExperimentConfig field
    kind: str    # int, float, str, bool, ints, floats, path, method
    help: str


_SETTINGS: Tuple[_Setting, ...] = (
    _Setting("method", "method", "method", "training regime: " + ", ".join(MethodKind.names())),
    _Setting("dataset", "dataset", "str", "synthetic or idx"),
    _Setting("idx-images", "idx_images", "path", "IDX image file (dataset=idx)"),
    _Setting("idx-labels", "idx_labels", "path", "IDX label file (dataset=idx)"),
    _Setting("test-fraction", "test_fraction", "float", "held-out share of an IDX set"),
    _Setting("n-train", "n_train", "int", "synthetic training samples"),
    _Setting("n-test", "n_test", "int", "synthetic test samples"),
    _Setting("classes", "classes", "int", "synthetic shape classes (2..6)"),
    _Setting("side", "side", "int", "synthetic image side in pixels"),
    _Setting("arch", "arch", "str", "mlp or conv"),
    _Setting("hidden", "hidden", "ints", "hidden layer widths, comma separated"),
    _Setting("conv-channels", "conv_channels", "ints", "conv layer channels (arch=conv)"),
    _Setting("kernel", "kernel", "int", "conv kernel side"),
    _Setting("noise-rate", "noise_rate", "float", "symmetric label noise rate tau"),
    _Setting("tk", "tk", "int", "warm-up epochs of the keep-ratio schedule"),
    _Setting("epochs", "epochs", "int", "training epochs T_max"),
    _Setting("batch-size", "batch_size", "int", "mini-batch size"),
    _Setting("eval-batch-size", "eval_batch_size", "int", "chunk size of inference passes"),
    _Setting("lr", "lr", "float", "initial learning rate"),
    _Setting("decay-start", "decay_start", "float", "fraction of epochs before linear lr decay"),
    _Setting("lr-schedule", "lr_schedule", "str", "linear or step"),
    _Setting("lr-steps", "lr_steps", "floats", "per-stage rates of the step schedule"),
    _Setting("weight-decay", "weight_decay", "float", "L2 coefficient added to gradients"),
    _Setting("lambda", "lam", "float", "agreement weight in selection (and JoCoR) losses"),
    _Setting("gamma", "gamma", "float", "mean point ensemble weight"),
    _Setting("select-on", "select_on", "str", "flip or original images for selection"),
    _Setting("flip-augment", "flip_augment", "bool", "random flip augmentation (baseline, jocor)"),
    _Setting("seed", "seed", "int", "master seed the other seeds derive from"),
    _Setting("data-seed", "data_seed", "int", "dataset, split and noise seed"),
    _Setting("model-seeds", "model_seeds", "ints", "two distinct init seeds"),
    _Setting("shuffle-seed", "shuffle_seed", "int", "batch order seed"),
    _Setting("checkpoint-every", "checkpoint_every", "int", "checkpoint period in epochs (0 = off)"),
    _Setting("debug-selection", "debug_selection", "bool", "dump selected indexes per epoch"),
    _Setting("workers", "workers", "int", "threads for inference passes"),
    _Setting("progress", "progress", "bool", "show an epoch progress bar"),
    _Setting("out", "out", "str", f"output directory (default ${OUT_ENV} or '{DEFAULT_OUT}')"),
)
_BY_KEY: Dict[str, _Setting] = {s.key: s for s in _SETTINGS}
_BY_ATTR: Dict[str, _Setting] = {s.attr: s for s in _SETTINGS}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one training run depends on.

    ``data_seed``, ``model_seeds`` and ``shuffle_seed`` left as ``None`` are
    derived from ``seed``. Construction does not range-check; call
    :meth:`validate` (the parser and the trainer both do).
    """

    method: MethodKind = MethodKind.MDA
    dataset: str = "synthetic"
    idx_images: Optional[str] = None
    idx_labels: Optional[str] = None
    test_fraction: float = 0.2
    n_train: int = 2000
    n_test: int = 1000
    classes: int = 4
    side: int = 16
    arch: str = "mlp"
    hidden: Tuple[int, ...] = (128, 64)
    conv_channels: Tuple[int, ...] = (8,)
    kernel: int = 3
    noise_rate: float = 0.2
    tk: int = 10
    epochs: int = 60
    batch_size: int = 128
    eval_batch_size: int = 1000
    lr: float = 0.001
    decay_start: float = 0.4
    lr_schedule: str = "linear"
    lr_steps: Tuple[float, ...] = ()
    weight_decay: float = 1e-4
    lam: float = 0.65
    gamma: float = 1.0
    select_on: str = "flip"
    flip_augment: bool = False
    seed: int = 0
    data_seed: Optional[int] = None
    model_seeds: Optional[Tuple[int, int]] = None
    shuffle_seed: Optional[int] = None
    checkpoint_every: int = 0
    debug_selection: bool = False
    workers: int = 1
    progress: bool = False
    out: str = DEFAULT_OUT

    def __post_init__(self) -> None:
        if self.data_seed is not None and self.model_seeds is not None and self.shuffle_seed is not None:
            return
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"expected an integer >= 0, got {self.seed!r}")
        data, models, shuffle = ExperimentConfig.derive_seeds(self.seed)
        if self.data_seed is None:
            object.__setattr__(self, "data_seed", data)
        if self.model_seeds is None:
            object.__setattr__(self, "model_seeds", models)
        if self.shuffle_seed is None:
            object.__setattr__(self, "shuffle_seed", shuffle)

    @staticmethod
    def derive_seeds(seed: int) -> Tuple[int, Tuple[int, int], int]:
        state = np.random.SeedSequence(seed).generate_state(4)
        return int(state[0]), (int(state[1]), int(state[2])), int(state[3])

    def reseeded(self, seed: int) -> "ExperimentConfig":
        """Same experiment under another master seed (every derived seed follows it)."""
        return replace(self, seed=seed, data_seed=None, model_seeds=None, shuffle_seed=None)

    def architecture(self, input_shape: Sequence[int], classes: int) -> Architecture:
        channels = self.conv_channels if self.arch == "conv" else ()
        return Architecture(input_shape=tuple(input_shape), hidden=tuple(self.hidden), classes=classes,
                            conv_channels=tuple(channels), kernel=self.kernel)

    # ----------------------------------------------------------- text form

    def to_settings(self) -> Dict[str, object]:
        """Key (flag spelling) -> JSON-shaped value."""
        settings: Dict[str, object] = {}
        for setting in _SETTINGS:
            value = getattr(self, setting.attr)
            if isinstance(value, MethodKind):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            settings[setting.key] = value
        return settings

    def canonical_text(self) -> str:
        """Sorted ``key = value`` lines of every setting that affects results."""
        lines = [f"{key} = {_format(value)}" for key, value in sorted(self.to_settings().items())
                 if key not in _RUNTIME_KEYS]
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.blake2b(self.canonical_text().encode("utf-8"), digest_size=32).hexdigest()

    # ----------------------------------------------------------- validation

    def validate(self) -> "ExperimentConfig":
        errors = sorted(_validator().iter_errors(self.to_settings()), key=lambda e: list(e.absolute_path))
        if errors:
            first = errors[0]
            key = str(first.absolute_path[0]) if first.absolute_path else "config"
            raise ConfigError(key, first.message)

        if self.epochs > 0 and self.tk > self.epochs:
            raise ConfigError("tk", f"warm-up {self.tk} exceeds epochs {self.epochs}")
        if self.dataset == "idx":
            for key, value in (("idx-images", self.idx_images), ("idx-labels", self.idx_labels)):
                if not value:
                    raise ConfigError(key, "required when dataset=idx")
        if self.model_seeds[0] == self.model_seeds[1]:
            raise ConfigError("model-seeds", "the two models need distinct seeds")
        if self.flip_augment and self.method not in _AUGMENTABLE:
            raise ConfigError("flip-augment", f"only applies to {', '.join(m.value for m in _AUGMENTABLE)}")
        if self.lr_schedule == "step" and not self.lr_steps:
            raise ConfigError("lr-steps", "step schedule needs at least one rate")
        if self.dataset == "synthetic":
            try:
                self.architecture((1, self.side, self.side), self.classes)
            except TensorError as exc:
                raise ConfigError("arch", exc.reason) from exc
        return self


class ExperimentConfigParser:
    """Builds an :class:`ExperimentConfig` from defaults, a config file and argv.

    Later sources win: defaults < ``--config`` file < command line. Every
    problem raises :class:`ConfigError` naming the offending key.
    """

    @staticmethod
    def parse(argv: Sequence[str] = (), config_file: Optional[Union[str, Path]] = None,
              environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
        namespace, leftovers = ExperimentConfigParser.build_parser().parse_known_args(list(argv))
        ExperimentConfigParser.reject_leftovers(leftovers)
        return ExperimentConfigParser.from_flags(vars(namespace), config_file, environ)

    @staticmethod
    def from_flags(flags: Mapping[str, object], config_file: Optional[Union[str, Path]] = None,
                   environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
        """Merge parsed flags (field name -> raw value; extra names ignored) over the file and defaults."""
        environ = os.environ if environ is None else environ
        file_path = flags.get("config") or config_file
        raw: Dict[str, object] = {}
        if file_path is not None:
            raw.update(ExperimentConfigParser.load_file(Path(file_path)))
        raw.update({_BY_ATTR[attr].key: value for attr, value in flags.items() if attr in _BY_ATTR})

        values: Dict[str, object] = {}
        for setting in _SETTINGS:
            if setting.key in raw:
                values[setting.attr] = _coerce(setting, raw[setting.key])
        if "out" not in values:
            values["out"] = environ.get(OUT_ENV) or DEFAULT_OUT

        config = ExperimentConfig(**values).validate()
        logger.debug("config %s: %s", config.fingerprint()[:12], config.canonical_text().replace("\n", "; "))
        return config

    @staticmethod
    def reject_leftovers(leftovers: Sequence[str]) -> None:
        if leftovers:
            flag = leftovers[0].split("=", 1)[0]
            raise ConfigError(flag.lstrip("-") or flag,
                              "unknown flag" if flag.startswith("-") else "unexpected argument")

    @staticmethod
    def build_parser(prog: str = "noisylab run") -> argparse.ArgumentParser:
        parser = UsageParser(prog=prog, allow_abbrev=False, add_help=False,
                              argument_default=argparse.SUPPRESS)
        parser.add_argument("--config", help="flat 'key = value', YAML or JSON settings file")
        for setting in _SETTINGS:
            if setting.kind == "bool":
                parser.add_argument(f"--{setting.key}", dest=setting.attr, nargs="?", const="true",
                                    help=setting.help)
            else:
                parser.add_argument(f"--{setting.key}", dest=setting.attr, help=setting.help)
        return parser

    @staticmethod
    def load_file(path: Path) -> Dict[str, object]:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from exc

        if path.suffix in (".yaml", ".yml", ".json"):
            try:
                data = yaml.load(text, Loader=_ConfigLoader)
            except yaml.YAMLError as exc:
                raise ConfigError("config", f"{path} is not valid YAML/JSON: {exc}") from exc
            if data is None:
                return {}
            if not isinstance(data, dict):
                raise ConfigError("config", f"{path}: top level must be a mapping of settings")
            pairs = [(str(key), value) for key, value in data.items()]
        else:
            pairs = []
            for number, line in enumerate(text.splitlines(), start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ConfigError("config", f"{path}:{number}: expected 'key = value'")
                pairs.append((key, value.strip()))

        settings: Dict[str, object] = {}
        for key, value in pairs:
            key = key.strip().replace("_", "-")
            if key not in _BY_KEY:
                raise ConfigError(key, f"unknown setting in {path}")
            if key in settings:
                raise ConfigError(key, f"set twice in {path}")
            settings[key] = value
        return settings


def parse_config(argv: Sequence[str] = (), config_file: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    return ExperimentConfigParser.parse(argv, config_file)


class UsageParser(argparse.ArgumentParser):
    """Raises :class:`ConfigError` (naming the flag when argparse does) instead of exiting."""

    def error(self, message: str):
        match = _ARG_RE.search(message)
        raise ConfigError(match.group(1).lstrip("-") if match else "argv", message)


@lru_cache(maxsize=1)
def _validator() -> jsonschema.Draft202012Validator:
    schema = json.loads(_SCHEMA_PATH.read_text(encoding="utf-8"))
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


# ------------------------------------------------------------------ coercion

def _coerce(setting: _Setting, raw: object):
    kind = setting.kind
    try:
        if kind == "int":
            return _to_int(raw)
        if kind == "float":
            return _to_float(raw)
        if kind == "bool":
            return _to_bool(raw)
        if kind == "str":
            return str(raw).strip()
        if kind == "path":
            return None if raw is None or str(raw).strip() == "" else str(raw).strip()
        if kind == "method":
            return MethodKind(str(raw).strip())
        if kind == "ints":
            return tuple(_to_int(item) for item in _to_items(raw))
        return tuple(_to_float(item) for item in _to_items(raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(setting.key, f"cannot read {raw!r} as {_KIND_NAMES[kind]}") from exc


_KIND_NAMES = {"int": "an integer", "float": "a number", "bool": "true/false", "str": "text",
               "path": "a path", "method": "one of " + ", ".join(MethodKind.names()),
               "ints": "a comma separated list of integers", "floats": "a comma separated list of numbers"}


def _to_int(raw: object) -> int:
    if isinstance(raw, bool):
        raise TypeError("bool is not an integer")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float):
        if not raw.is_integer():
            raise ValueError("fractional")
        return int(raw)
    return int(str(raw).strip())


def _to_float(raw: object) -> float:
    if isinstance(raw, bool):
        raise TypeError("bool is not a number")
    value = float(raw) if isinstance(raw, (int, float)) else float(str(raw).strip())
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def _to_bool(raw: object) -> bool:
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text not in ("true", "false"):
        raise ValueError("not a boolean")
    return text == "true"


def _to_items(raw: object) -> List[object]:
    if isinstance(raw, (list, tuple)):
        return list(raw)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return [raw]
    return [item for item in (part.strip() for part in str(raw).split(",")) if item]


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format(item) for item in value)
    return str(value)


"""Scenario configuration: dataclass, validation and TOML loading."""

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

RATE_UNITS = ("bits", "nats")
DEFAULT_SCENARIO = "paper.toml"

_REQUIRED = (
    "n_t", "k", "n_b", "w", "t", "lambdas", "delays",
    "sigma_direct", "sigma_cross", "aic",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one experiment.

    Units: ``w`` in Hz, ``t`` in seconds, ``lambdas`` in packets/interval,
    ``delays`` in intervals, ``aic`` in the same power units as the
    transmit powers times channel variances.
    """

    n_t: int
    k: int
    n_b: float
    w: float
    t: float
    lambdas: tuple
    delays: tuple
    sigma_direct: tuple
    sigma_cross: tuple
    aic: float
    l: int = 0
    sigma_intra: object = 0.01
    mu: float = 1.0
    phi: float = 0.0
    alpha: float = 2.0
    rate_unit: str = "bits"
    victims: tuple = None
    bit_cap: int = 32
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for key in ("lambdas", "delays", "sigma_direct", "sigma_cross"):
            object.__setattr__(self, key, tuple(float(v) for v in getattr(self, key)))
        if not isinstance(self.sigma_intra, (int, float)):
            object.__setattr__(
                self, "sigma_intra",
                tuple(tuple(float(v) for v in row) for row in self.sigma_intra),
            )
        if self.victims is None:
            victims = tuple(
                tuple((i + 1 + j) % self.k for j in range(self.l)) for i in range(self.k)
            )
        else:
            victims = tuple(tuple(int(v) for v in row) for row in self.victims)
        object.__setattr__(self, "victims", victims)
        self.validate()

    def validate(self):
        def bad(name, msg):
            raise ConfigError(f"invalid '{name}': {msg}", field=name)

        if int(self.n_t) != self.n_t or self.n_t < 2:
            bad("n_t", "must be an integer >= 2")
        if int(self.k) != self.k or self.k < 1:
            bad("k", "must be an integer >= 1")
        if int(self.l) != self.l or self.l < 0:
            bad("l", "must be a nonnegative integer")
        if self.l > self.n_t - 2:
            bad("l", f"l={self.l} exceeds n_t - 2 = {self.n_t - 2}")
        if self.l > self.k - 1:
            bad("l", f"l={self.l} exceeds the number of other links ({self.k - 1})")
        for name in ("n_b", "w", "t", "alpha"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                bad(name, "must be a positive number")
        for name in ("lambdas", "delays", "sigma_direct", "sigma_cross"):
            vals = getattr(self, name)
            if len(vals) != self.k:
                bad(name, f"expected {self.k} entries, got {len(vals)}")
            if not all(math.isfinite(v) and v > 0 for v in vals):
                bad(name, "all entries must be positive")
        for lam, d in zip(self.lambdas, self.delays):
            disc = (2 * d * lam + 2) ** 2 - 8 * d * lam
            if disc < 0:
                bad("delays", "rate-threshold discriminant is negative")
        if isinstance(self.sigma_intra, tuple):
            if len(self.sigma_intra) != self.k or any(len(r) != self.l for r in self.sigma_intra):
                bad("sigma_intra", f"must be a scalar or a {self.k}x{self.l} matrix")
            if not all(v > 0 for r in self.sigma_intra for v in r):
                bad("sigma_intra", "all entries must be positive")
        elif not self.sigma_intra > 0:
            bad("sigma_intra", "must be positive")
        if not (math.isfinite(self.aic) and self.aic >= 0):
            bad("aic", "must be a nonnegative number")
        if self.mu < 0 or self.phi < 0:
            bad("mu" if self.mu < 0 else "phi", "prices must be nonnegative")
        if self.rate_unit not in RATE_UNITS:
            bad("rate_unit", f"must be one of {RATE_UNITS}")
        if len(self.victims) != self.k:
            bad("victims", f"expected {self.k} rows")
        for i, row in enumerate(self.victims):
            if len(row) != self.l or any(not 0 <= v < self.k or v == i for v in row):
                bad("victims", f"row {i} must list {self.l} other link indices")
        if int(self.bit_cap) != self.bit_cap or self.bit_cap < 0:
            bad("bit_cap", "must be a nonnegative integer")

    def intra_variance(self, i, j):
        if isinstance(self.sigma_intra, tuple):
            return self.sigma_intra[i][j]
        return float(self.sigma_intra)

    @property
    def log_base(self):
        return 2.0 if self.rate_unit == "bits" else math.e

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        if ("l" in changes or "k" in changes) and "victims" not in changes:
            d["victims"] = None
        return ScenarioConfig(**d)

    def digest(self):
        """Short SHA-256 of the canonical JSON form (reproducibility header)."""
        d = asdict(self)
        d.pop("name")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def config_from_dict(data, name=""):
    missing = [key for key in _REQUIRED if key not in data]
    if missing:
        raise ConfigError(
            "missing required field(s): " + ", ".join(missing), field=missing[0]
        )
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError("unknown field(s): " + ", ".join(unknown), field=unknown[0])
    try:
        return ScenarioConfig(name=name, **{k: v for k, v in data.items() if k != "name"})
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value in config: {exc}") from exc


def load_config(path=None):
    """Parse and validate a TOML scenario file; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("cogfeedback.scenarios").joinpath(DEFAULT_SCENARIO).read_text()
        name = DEFAULT_SCENARIO
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        name = path.name
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {name}: {exc}") from exc
    return config_from_dict(data, name=name)


def default_config():
    return load_config(None)

"""Run configuration shared by the verifier and the command line."""

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError

AUTO = "AUTO"
OUTPUT_DIR_ENV = "HMSVERIFY_OUTPUT_DIR"


@dataclass(frozen=True)
class Config:
    t: float = 0.2
    R: int = 12
    N: int = 2
    G: int = 4
    tol: float = 1e-6  # verdict tolerance on tensor residuals
    rank_tol: float = 1e-9  # singular-value cutoff for numerical ranks and fits
    seed: int = 0
    fiber_calibration: object = AUTO
    C: complex = 1.0
    output_path: str = None

    def validate(self):
        if not 0 < self.t < 1:
            raise ConfigError(f"t={self.t} must lie in (0, 1)")
        if self.R < 1 or self.N < 0 or self.G < 0:
            raise ConfigError("R must be >= 1, N and G >= 0")
        if self.tol < 0 or self.rank_tol < 0:
            raise ConfigError("tolerances must be nonnegative")
        if self.C == 0:
            raise ConfigError("the differential scalar C must be nonzero")
        cal = self.fiber_calibration
        if cal != AUTO and not (isinstance(cal, (int, float)) and cal > 0):
            raise ConfigError(f"fiber_calibration must be AUTO or a positive number, got {cal!r}")
        return self

    def snapshot(self):
        d = asdict(self)
        if isinstance(d["C"], complex):
            d["C"] = [d["C"].real, d["C"].imag]
        return d


_CASTS = {"t": float, "R": int, "N": int, "G": int, "tol": float, "rank_tol": float,
          "seed": int, "C": complex, "output_path": str}


def _cast(key, raw):
    if key == "fiber_calibration":
        return AUTO if raw.strip().upper() == AUTO else float(raw)
    return _CASTS[key](raw.strip().replace(" ", ""))


def parse_overrides(pairs):
    """{key: string} -> typed overrides, rejecting unknown keys."""
    names = {f.name for f in fields(Config)}
    out = {}
    for key, raw in pairs.items():
        if key not in names:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[key] = _cast(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return out


def read_config_file(path):
    """key=value lines; blank lines and # comments are ignored."""
    pairs = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = line.split("=", 1)
        pairs[k.strip()] = v.strip()
    return parse_overrides(pairs)


def make_config(base=None, **overrides):
    return replace(base or Config(), **overrides).validate()

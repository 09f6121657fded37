"""Pipeline configuration: every free constant the estimates leave open,
with validated ranges and JSON (de)serialization, plus the calibration
lockfile for thresholds that are fixed only up to existence.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .potential import TeukolskyModel

_LOCKFILE = Path(__file__).with_name("calibration.json")


@dataclass
class PipelineConfig:
    # model
    omega: complex = 200.0 + 0.5j
    k: str = "2"
    s: str = "2"
    lam: complex = complex((200.0 + 0.5j + 2) ** 2) - (20008.0 + 210.0j)
    # region exponents / thresholds
    alpha_exp: float = 1.8
    C: float = 1.0                 # oscillatory-entry coefficient
    delta: float = 0.01            # lens driving-scale coefficient
    nu_policy_coeff: float = 20.0  # nu = coeff * delta * |Omega|^(2-3a/2)
    C2: float = 1.0                # turning-band half-width coefficient
    C1: float = 100.0              # turning-band envelope constant
    pc_c: float = 100.0            # quadratic-model WKB-regime threshold
    pc_big_c: float = 100.0        # quadratic-model branch-cut threshold
    # pole-region constants
    pole_handoff_factor: float = 2.2   # L=0 handoff at f/sqrt|Omega|
    cscr_min: float = 1.0
    cscr_max: float = 50.0
    c4: float = 1.0
    eps_zeta_deg: float = 15.0
    # numerics
    grid: int = 200
    n_starts: int = 100
    seed: int = 2026
    slack: float = 1e-12
    lens_ladder: str = "measured"
    glue_margin: float = 0.0
    out: str = "out"

    def __post_init__(self):
        self.omega = complex(self.omega)
        self.lam = complex(self.lam)
        self.validate()

    def validate(self):
        # parse-time range is the union of the per-method ranges
        # ((8/5, 2] evanescent, [4/3, 2) lens); each use site checks its own
        if not (4.0 / 3.0 <= self.alpha_exp <= 2.0):
            raise ValueError("alpha_exp must lie in [4/3, 2]")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must be in (0, 1]")
        if self.C <= 0 or self.C2 <= 0 or self.C1 <= 0:
            raise ValueError("region constants must be positive")
        if self.cscr_min <= 0 or self.cscr_max < self.cscr_min:
            raise ValueError("need 0 < cscr_min <= cscr_max")
        if self.lens_ladder not in ("strict", "measured"):
            raise ValueError("lens_ladder must be 'strict' or 'measured'")
        if self.grid < 16:
            raise ValueError("grid too coarse")

    # -- derived quantities -------------------------------------------------
    def model(self) -> TeukolskyModel:
        return TeukolskyModel(self.omega, Fraction(self.k), Fraction(self.s),
                              self.lam)

    def epsilon_evanescent(self) -> float:
        return abs(self.omega) ** (2.0 - 1.5 * self.alpha_exp)

    def epsilon_lens(self) -> float:
        return self.delta * abs(self.omega) ** (2.0 - 1.5 * self.alpha_exp)

    def nu_lens(self) -> float:
        return (self.nu_policy_coeff * self.delta
                * abs(self.omega) ** (2.0 - 1.5 * self.alpha_exp))

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        d["omega"] = [self.omega.real, self.omega.imag]
        d["lam"] = [self.lam.real, self.lam.imag]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        if isinstance(d.get("omega"), list):
            d["omega"] = complex(*d["omega"])
        if isinstance(d.get("lam"), list):
            d["lam"] = complex(*d["lam"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def load_calibration(path=None) -> dict:
    """Calibrated values for constants the estimates fix only up to
    existence; regenerate with the `calibrate` command."""
    p = Path(path) if path is not None else _LOCKFILE
    if not p.exists():
        return {}
    with open(p) as fh:
        return json.load(fh)


def save_calibration(table: dict, path=None):
    p = Path(path) if path is not None else _LOCKFILE
    with open(p, "w") as fh:
        json.dump(table, fh, sort_keys=True, indent=1)
        fh.write("\n")


def apply_calibration(cfg: PipelineConfig, table: dict = None) -> PipelineConfig:
    table = load_calibration() if table is None else table
    for name, entry in table.items():
        if hasattr(cfg, name):
            setattr(cfg, name, entry["value"])
    cfg.validate()
    return cfg

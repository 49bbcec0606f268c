"""Run configuration: a flat ``key = value`` file, rationals written as ``p/q``.

Example::

    tau1 = 1
    tau2 = 1
    window = 0 1 0 1     # x0 x1 y0 y1
    depth = 2
    epsilon = 1/10
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Tuple

from .cantor import ROOT_ANCHOR, DeepConfig
from .construction import ConstructionParams, ExponentPair, WeightPair, choose_base, choose_exponents
from .errors import ConfigError
from .exact import fmt
from .geometry import Rect

FAULTS = ("half-delta", "unnormalized-mass")


@dataclass
class RunConfig:
    weights: WeightPair = field(default_factory=lambda: WeightPair(Fraction(1), Fraction(1)))
    rho_override: Optional[ExponentPair] = None
    N_min: int = 1
    max_level: int = 3
    window: Rect = field(default_factory=lambda: Rect.from_bounds(0, 1, 0, 1))
    epsilon: Fraction = Fraction(1, 10)
    seed: int = 0
    output_dir: str = "out"
    depth: int = 2
    samples: int = 1600
    ledger_window: Optional[Rect] = None
    root_anchor: Tuple[Fraction, Fraction] = ROOT_ANCHOR
    prefix_rule: str = "full"
    enforce_ii: bool = False
    extra_levels: int = 1
    level_cap: int = 16
    workers: int = 1
    fault: Optional[str] = None
    N: Optional[int] = None
    t: Optional[int] = None
    D: int = 16

    def params(self) -> ConstructionParams:
        exps = self.rho_override or choose_exponents(self.weights, self.D)
        N, t = choose_base(exps, self.N_min, self.weights)
        return ConstructionParams(self.weights, exps, self.N or N, self.t or t)

    def deep(self) -> DeepConfig:
        return DeepConfig(extra_levels=self.extra_levels, max_level_cap=self.level_cap,
                          prefix_rule=self.prefix_rule, enforce_ii=self.enforce_ii,
                          fault=self.fault, workers=self.workers)

    def to_json(self):
        w = self.window
        return {
            "tau": [fmt(self.weights.tau1), fmt(self.weights.tau2)],
            "rho_override": None if self.rho_override is None else [fmt(self.rho_override.rho1),
                                                                    fmt(self.rho_override.rho2)],
            "N_min": self.N_min, "max_level": self.max_level,
            "window": [fmt(v) for v in w.bounds], "epsilon": fmt(self.epsilon), "seed": self.seed,
            "depth": self.depth, "samples": self.samples, "prefix_rule": self.prefix_rule,
            "enforce_ii": self.enforce_ii, "extra_levels": self.extra_levels, "level_cap": self.level_cap,
            "root_anchor": [fmt(v) for v in self.root_anchor], "fault": self.fault,
            "N": self.N, "t": self.t, "D": self.D,
        }


def _rat(key, v) -> Fraction:
    try:
        return Fraction(v.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a rational like 3/2, got {v!r}") from None


def _int(key, v, lo=None) -> int:
    try:
        x = int(v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None
    if lo is not None and x < lo:
        raise ConfigError(f"{key}: must be at least {lo}")
    return x


def _bool(key, v) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {v!r}")


def _rats(key, v, n):
    parts = v.replace(",", " ").split()
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} rationals, got {len(parts)}")
    return [_rat(key, p) for p in parts]


def _window(key, v) -> Rect:
    x0, x1, y0, y1 = _rats(key, v, 4)
    if not (0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1):
        raise ConfigError(f"{key}: need 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1")
    return Rect.from_bounds(x0, x1, y0, y1)


KEYS = ("tau1", "tau2", "rho1", "rho2", "N_min", "max_level", "window", "epsilon", "seed", "output_dir",
        "depth", "samples", "ledger_window", "root_anchor", "prefix_rule", "enforce_ii", "extra_levels",
        "level_cap", "workers", "fault", "N", "t", "D", "window_center", "window_halfwidth")


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"unreadable config: {e}") from None
    kv = dict(cp["run"])
    unknown = sorted(set(kv) - set(KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return apply(RunConfig(), kv)


def apply(cfg: RunConfig, kv: dict) -> RunConfig:
    """A copy of ``cfg`` with string values from ``kv`` parsed in."""
    up = {}
    if "tau1" in kv or "tau2" in kv:
        up["weights"] = WeightPair(_rat("tau1", kv.get("tau1", str(cfg.weights.tau1))),
                                   _rat("tau2", kv.get("tau2", str(cfg.weights.tau2))))
    if ("rho1" in kv) != ("rho2" in kv):
        raise ConfigError("rho1 and rho2 must be given together")
    if "rho1" in kv:
        up["rho_override"] = ExponentPair(_rat("rho1", kv["rho1"]), _rat("rho2", kv["rho2"]))
    for key, lo in (("N_min", 1), ("max_level", 1), ("depth", 1), ("samples", 1), ("extra_levels", 0),
                    ("level_cap", 1), ("workers", 1), ("N", 2), ("t", 3), ("D", 1)):
        if key in kv:
            up[key] = _int(key, kv[key], lo)
    if "seed" in kv:
        up["seed"] = _int("seed", kv["seed"])
    if "epsilon" in kv:
        eps = _rat("epsilon", kv["epsilon"])
        if not 0 < eps < 1:
            raise ConfigError("epsilon: need 0 < epsilon < 1")
        up["epsilon"] = eps
    if "window" in kv:
        up["window"] = _window("window", kv["window"])
    if ("window_center" in kv) != ("window_halfwidth" in kv):
        raise ConfigError("window_center and window_halfwidth must be given together")
    if "window_center" in kv:
        if "window" in kv:
            raise ConfigError("give window or window_center/window_halfwidth, not both")
        c = _rats("window_center", kv["window_center"], 2)
        h = _rats("window_halfwidth", kv["window_halfwidth"], 2)
        b = " ".join(str(v) for v in (c[0] - h[0], c[0] + h[0], c[1] - h[1], c[1] + h[1]))
        up["window"] = _window("window_center/window_halfwidth", b)
    if "ledger_window" in kv:
        up["ledger_window"] = _window("ledger_window", kv["ledger_window"])
    if "root_anchor" in kv:
        a = _rats("root_anchor", kv["root_anchor"], 2)
        if not all(0 <= x <= 1 for x in a):
            raise ConfigError("root_anchor: coordinates are relative to the window, in [0, 1]")
        up["root_anchor"] = tuple(a)
    if "prefix_rule" in kv:
        if kv["prefix_rule"].strip() not in ("full", "target", "half"):
            raise ConfigError("prefix_rule: expected full, target or half")
        up["prefix_rule"] = kv["prefix_rule"].strip()
    if "enforce_ii" in kv:
        up["enforce_ii"] = _bool("enforce_ii", kv["enforce_ii"])
    if "output_dir" in kv:
        up["output_dir"] = kv["output_dir"].strip()
    if "fault" in kv:
        f = kv["fault"].strip()
        if f in ("", "none"):
            f = None
        elif f not in FAULTS:
            raise ConfigError(f"fault: expected one of {', '.join(FAULTS)}")
        up["fault"] = f
    out = replace(cfg, **up)
    out.params().exps.check_against(out.weights)
    return out


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None

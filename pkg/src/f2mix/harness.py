"""Instances, their JSON form, and batch experiments over the recovery driver."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from .errors import ConfigError, InfeasibleSpec
from .gf2 import GF2Vector, Subspace, incomparable, random_subspace
from .oracle import MixtureOracle
from .hypothesis import DEFAULT_SAMPLE_CONSTANT
from .recovery import BASE_DIM, Regime, recover_driver
from .rng import make_rng

RELATIONS = ("incomparable", "nested", "identical", "random")
CSV_HEADER = ["trial", "seed", "regime", "exact_match", "w0_err", "samples", "micros"]
MAX_REJECTIONS = 10_000


def parse_weight(w) -> Fraction:
    """Exact weight from a decimal string, a number, or a Fraction."""
    if isinstance(w, Fraction):
        return w
    try:
        return Fraction(Decimal(str(w)))
    except (InvalidOperation, ValueError) as exc:
        raise ValueError(f"not a decimal weight: {w!r}") from exc


def format_weight(w: Fraction) -> str:
    """Exact decimal string; the weight must have a finite decimal expansion."""
    for places in range(64):
        scaled = w * 10**places
        if scaled.denominator == 1:
            return format(Decimal(scaled.numerator).scaleb(-places), "f")
    raise ValueError(f"weight {w} has no short decimal expansion")


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    d0: int
    d1: int
    relation: str
    w0: Fraction
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "w0", parse_weight(self.w0))
        if self.relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        if not (0 <= self.d0 <= self.n and 0 <= self.d1 <= self.n):
            raise InfeasibleSpec(f"dimensions ({self.d0}, {self.d1}) outside [0, {self.n}]")
        if not 0 <= self.w0 <= 1:
            raise InfeasibleSpec(f"w0 = {self.w0} outside [0, 1]")


@dataclass(frozen=True)
class Instance:
    n: int
    a0: Subspace
    a1: Subspace
    w0: Fraction
    seed: int

    def oracle(self, seed: int | None = None, budget: int | None = None) -> MixtureOracle:
        return MixtureOracle(self.a0, self.a1, self.w0, rng=make_rng(self.seed if seed is None else seed), budget=budget)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "basis_a0": self.a0.to_strings(),
            "basis_a1": self.a1.to_strings(),
            "w0": format_weight(self.w0),
            "seed": self.seed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, obj: dict) -> Instance:
        n = int(obj["n"])
        a0 = _parse_basis(obj["basis_a0"], n, "basis_a0")
        a1 = _parse_basis(obj["basis_a1"], n, "basis_a1")
        seed = int(obj.get("seed", 0))
        if seed < 0:
            raise ValueError("seed must be unsigned")
        return cls(n, a0, a1, parse_weight(obj["w0"]), seed)

    @classmethod
    def loads(cls, text: str) -> Instance:
        return cls.from_json(json.loads(text))


def _parse_basis(rows: list[str], n: int, name: str) -> Subspace:
    for r in rows:
        if len(r) != n:
            raise ValueError(f"{name}: bit-string {r!r} does not have length {n}")
    s = Subspace.from_ints((GF2Vector.from_string(r).bits for r in rows), n)
    if s.to_strings() != list(rows):
        warnings.warn(f"{name} is not in reduced echelon form; canonicalized", stacklevel=3)
    return s


def gen_instance(spec: InstanceSpec) -> tuple[Subspace, Subspace, MixtureOracle]:
    """Random pair with the requested relation and an oracle over it."""
    inst = make_instance(spec)
    return inst.a0, inst.a1, inst.oracle()


def make_instance(spec: InstanceSpec) -> Instance:
    rng = make_rng(spec.seed).spawn(1)[0]
    n, d0, d1 = spec.n, spec.d0, spec.d1
    if spec.relation == "incomparable":
        if d0 == 0 or d1 == 0:
            raise InfeasibleSpec("an incomparable pair needs both dimensions at least 1")
        if d0 == n or d1 == n:
            raise InfeasibleSpec("the full space contains every subspace")
        for _ in range(MAX_REJECTIONS):
            a0, a1 = random_subspace(n, d0, rng), random_subspace(n, d1, rng)
            if incomparable(a0, a1):
                break
        else:
            raise InfeasibleSpec(f"no incomparable pair found after {MAX_REJECTIONS} draws")
    elif spec.relation == "nested":
        if d1 > d0:
            raise InfeasibleSpec(f"nested pair needs d1 <= d0, got d1={d1}, d0={d0}")
        a0 = random_subspace(n, d0, rng)
        inner = random_subspace(d0, d1, rng)
        a1 = Subspace.from_ints((a0.from_coordinates(r) for r in inner.rows), n)
    elif spec.relation == "identical":
        if d1 != d0:
            raise InfeasibleSpec("identical pair needs d1 == d0")
        a0 = random_subspace(n, d0, rng)
        a1 = a0
    else:
        a0, a1 = random_subspace(n, d0, rng), random_subspace(n, d1, rng)
    return Instance(n, a0, a1, spec.w0, spec.seed)


# --------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int
    seed: int
    n: int
    d0: int
    d1: int
    relation: str
    w0: Fraction
    wmin: float
    delta: float
    threshold: float = 0.9
    timing: bool = False
    workers: int = 1
    base_dim: int = BASE_DIM
    hyp_constant: float = DEFAULT_SAMPLE_CONSTANT


_CONFIG_FIELDS = {
    "trials": int, "seed": int, "n": int, "d0": int, "d1": int, "relation": str, "w0": str,
    "wmin": float, "delta": float, "threshold": float, "timing": bool, "workers": int,
    "base_dim": int, "hyp_constant": float,
}
_REQUIRED = ("trials", "seed", "n", "d0", "d1", "relation", "w0", "wmin", "delta")


def _key_line(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def parse_config(text: str) -> ExperimentConfig:
    """Experiment configuration from JSON text; errors name the line."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ConfigError("top level must be an object", 1)
    for key in obj:
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"unknown key {key!r}", _key_line(text, key))
    for key in _REQUIRED:
        if key not in obj:
            raise ConfigError(f"missing key {key!r}", 1)
    values = {}
    for key, val in obj.items():
        want = _CONFIG_FIELDS[key]
        line = _key_line(text, key)
        if key == "w0":
            try:
                values[key] = parse_weight(val)
            except ValueError as exc:
                raise ConfigError(str(exc), line) from None
            continue
        if want is float and isinstance(val, (int, float)) and not isinstance(val, bool):
            values[key] = float(val)
        elif want is int and isinstance(val, int) and not isinstance(val, bool):
            values[key] = val
        elif isinstance(val, want):
            values[key] = val
        else:
            raise ConfigError(f"{key!r} must be {want.__name__}, got {val!r}", line)
    if values["trials"] < 0:
        raise ConfigError("'trials' must be non-negative", _key_line(text, "trials"))
    if values["relation"] not in RELATIONS:
        raise ConfigError(f"'relation' must be one of {RELATIONS}", _key_line(text, "relation"))
    if not 0 < values["wmin"] <= 0.5:
        raise ConfigError("'wmin' must lie in (0, 1/2]", _key_line(text, "wmin"))
    if not 0 < values["delta"] < 1:
        raise ConfigError("'delta' must lie in (0, 1)", _key_line(text, "delta"))
    if not values["wmin"] <= values["w0"] <= 1 - values["wmin"]:
        raise ConfigError("'w0' must lie in [wmin, 1 - wmin]", _key_line(text, "w0"))
    return ExperimentConfig(**values)


@dataclass
class TrialRow:
    trial: int
    seed: int
    regime: str
    exact_match: bool
    w0_err: float | None
    samples: int
    micros: int

    def as_list(self) -> list:
        return [self.trial, self.seed, self.regime, int(self.exact_match),
                "" if self.w0_err is None else repr(self.w0_err), self.samples, self.micros]


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float] | None:
    if trials == 0:
        return None
    p = successes / trials
    denom = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[TrialRow] = field(default_factory=list)

    @property
    def successes(self) -> int:
        return sum(r.exact_match for r in self.rows)

    @property
    def success_rate(self) -> float | None:
        return self.successes / len(self.rows) if self.rows else None

    @property
    def interval(self) -> tuple[float, float] | None:
        return wilson_interval(self.successes, len(self.rows))

    @property
    def passed(self) -> bool:
        rate = self.success_rate
        return rate is None or rate >= self.config.threshold

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.as_list())
        return buf.getvalue()

    def to_json(self) -> str:
        cfg = {k: (format_weight(v) if isinstance(v, Fraction) else v) for k, v in vars(self.config).items()}
        ci = self.interval
        return json.dumps({
            "config": cfg,
            "trials": len(self.rows),
            "successes": self.successes,
            "success_rate": self.success_rate,
            "ci95": list(ci) if ci else None,
            "passed": self.passed,
            "rows": [dict(zip(CSV_HEADER, r.as_list())) for r in self.rows],
        }, indent=2, sort_keys=True)


def trial_seeds(master: int, trials: int) -> list[int]:
    ss = np.random.SeedSequence(master & 0xFFFF_FFFF_FFFF_FFFF)
    return [int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(trials)]


def matches(result, inst: Instance) -> bool:
    if inst.a0 == inst.a1:
        return result.regime == Regime.IDENTICAL and result.a0_hat == inst.a0
    return {result.a0_hat, result.a1_hat} == {inst.a0, inst.a1} and result.a0_hat != result.a1_hat


def weight_error(result, inst: Instance) -> float | None:
    if result.w0_hat is None or not matches(result, inst):
        return None
    true = inst.w0 if result.a0_hat == inst.a0 else 1 - inst.w0
    return abs(result.w0_hat - float(true))


def run_trial(cfg: ExperimentConfig, trial: int, seed: int) -> TrialRow:
    spec = InstanceSpec(cfg.n, cfg.d0, cfg.d1, cfg.relation, cfg.w0, seed)
    inst = make_instance(spec)
    oracle = inst.oracle()
    t0 = time.perf_counter()
    result = recover_driver(oracle, cfg.n, cfg.wmin, cfg.delta, base_dim=cfg.base_dim, constant=cfg.hyp_constant)
    micros = int((time.perf_counter() - t0) * 1e6) if cfg.timing else 0
    return TrialRow(trial, seed, result.regime.value, matches(result, inst), weight_error(result, inst),
                    result.samples, micros)


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run every trial; rows come back in trial order whatever the pool does."""
    seeds = trial_seeds(cfg.seed, cfg.trials)
    jobs = [(cfg, i, s) for i, s in enumerate(seeds)]
    if cfg.workers > 1 and jobs:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_run_trial_args, jobs))
    else:
        rows = [run_trial(*job) for job in jobs]
    return ExperimentReport(cfg, rows)

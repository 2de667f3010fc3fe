"""Monte Carlo achievability study and per-instance parameter sweeps.

Each trial draws its channels from its own RNG stream derived from
``(seed, trial_index)``, so results do not depend on how trials are spread
over worker processes.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import CfmaError, ChannelPair, CodingChoice, InputError
from .rates import achievable_pair
from .sumcap import check_sum_capacity
from .waterfill import POLICIES, input_covariances

log = logging.getLogger(__name__)

MODELS = ("simo", "diag2x2", "generic2x2")
DEFAULT_P_GRID_DB = tuple(float(x) for x in range(0, 45, 5))
DEFAULT_POLICY = {"simo": "joint", "diag2x2": "per-user", "generic2x2": "joint"}
WILSON_Z = 1.959963984540054


@dataclass
class ExperimentConfig:
    model: str = "simo"
    trials: int = 10_000
    p_grid_db: Sequence[float] = DEFAULT_P_GRID_DB
    seed: int = 0
    output_path: Optional[str] = None
    policy: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise InputError(f"model must be one of {MODELS}, got {self.model!r}")
        self.trials = int(self.trials)
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        grid = [float(p) for p in self.p_grid_db]
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError("p_grid_db must be nonempty and strictly increasing")
        self.p_grid_db = tuple(grid)
        self.seed = int(self.seed)
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("seed must fit in an unsigned 64-bit integer")
        if self.policy is None:
            self.policy = DEFAULT_POLICY[self.model]
        if self.policy not in POLICIES:
            raise InputError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        self.workers = max(1, int(self.workers))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**doc)


@dataclass(frozen=True)
class CurvePoint:
    model: str
    p_db: float
    p_linear: float
    achievable_count: int
    trials: int
    failure_count: int
    seed: int
    R_A: float = field(init=False)
    wilson_halfwidth: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "R_A", self.achievable_count / self.trials)
        object.__setattr__(self, "wilson_halfwidth",
                           wilson_halfwidth(self.achievable_count, self.trials))


def wilson_halfwidth(k: int, n: int, z: float = WILSON_Z) -> float:
    """Half-width of the Wilson score interval for ``k`` successes out of ``n``."""
    p = k / n
    return z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)


def db_to_linear(p_db: float) -> float:
    return 10.0 ** (p_db / 10.0)


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial_index]))


def draw_channel(model: str, rng: np.random.Generator) -> ChannelPair:
    """Channel entries iid Uniform[0, 1]; H1 is drawn before H2."""
    if model == "simo":
        return ChannelPair(rng.uniform(size=(2, 1)), rng.uniform(size=(2, 1)))
    if model == "diag2x2":
        return ChannelPair(np.diag(rng.uniform(size=2)), np.diag(rng.uniform(size=2)))
    if model == "generic2x2":
        return ChannelPair(rng.uniform(size=(2, 2)), rng.uniform(size=(2, 2)))
    raise InputError(f"unknown model {model!r}")


def run_trial(cfg: ExperimentConfig, trial_index: int) -> list:
    """Verdict per grid point: 1 achievable, 0 not, -1 numerical failure."""
    ch = draw_channel(cfg.model, trial_rng(cfg.seed, trial_index))
    out = []
    for p_db in cfg.p_grid_db:
        try:
            # only the verdict is tallied, so skip locating the interval
            v = check_sum_capacity(ch, db_to_linear(p_db), diagonal=cfg.model == "diag2x2",
                                   policy=cfg.policy, locate=False)
            out.append(int(v.achievable))
        except (CfmaError, np.linalg.LinAlgError) as exc:
            log.warning("trial %d at %.3g dB failed: %s", trial_index, p_db, exc)
            out.append(-1)
    return out


def _run_chunk(args):
    cfg, start, stop = args
    return [run_trial(cfg, i) for i in range(start, stop)]


def run_trials(cfg: ExperimentConfig) -> np.ndarray:
    """``trials x len(p_grid_db)`` verdict matrix, in trial order."""
    if cfg.workers == 1:
        rows = _run_chunk((cfg, 0, cfg.trials))
    else:
        step = max(1, -(-cfg.trials // (4 * cfg.workers)))
        chunks = [(cfg, s, min(s + step, cfg.trials)) for s in range(0, cfg.trials, step)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = [row for part in pool.map(_run_chunk, chunks) for row in part]
    return np.array(rows, dtype=int).reshape(cfg.trials, len(cfg.p_grid_db))


def run_montecarlo(cfg: ExperimentConfig) -> list:
    verdicts = run_trials(cfg)
    points = []
    for j, p_db in enumerate(cfg.p_grid_db):
        col = verdicts[:, j]
        points.append(CurvePoint(cfg.model, p_db, db_to_linear(p_db),
                                 int(np.count_nonzero(col == 1)), cfg.trials,
                                 int(np.count_nonzero(col == -1)), cfg.seed))
    return points


@dataclass(frozen=True)
class SweepRow:
    P: float
    gamma: float
    g: float
    r1_a: float
    r2_a: float
    r1_b: float
    r2_b: float
    valid: bool
    sum_rate: float
    C_sum: float
    gap: float


def auto_gamma_grid(intervals, n: int = 101) -> np.ndarray:
    """Log-spaced grid over the widest feasible interval, padded by 10%."""
    if not intervals:
        return np.logspace(-2, 2, n)
    lo, hi = max(intervals, key=lambda iv: iv[1] - iv[0])
    pad = 0.1 * (hi - lo) if hi > lo else 0.1 * lo
    lo_p = lo - pad if lo - pad > 0 else 0.5 * lo
    return np.logspace(np.log10(lo_p), np.log10(hi + pad), n)


def run_sweep(ch: ChannelPair, p_grid: Sequence[float], gamma_grid=None,
              policy: str = "joint", diagonal: bool = False) -> list:
    """Rates and the ``g`` polynomial across ``(P, gamma)``.

    Uses ``a = (1, 1)``, ``b = (1, 0)`` and ``beta = (gamma, 1)``. Without a
    ``gamma_grid`` each power gets :func:`auto_gamma_grid` over its own
    feasible interval.
    """
    rows = []
    for P in p_grid:
        cap = input_covariances(ch, P, policy=policy, diagonal=diagonal)
        verdict = check_sum_capacity(ch, P, capacity=cap)
        cov = cap.covariance()
        grid = auto_gamma_grid(verdict.gamma_interval) if gamma_grid is None else gamma_grid
        for gamma in grid:
            res = achievable_pair(ch, cov, CodingChoice((1, 1), (1, 0), (float(gamma), 1.0)))
            rows.append(SweepRow(float(P), float(gamma), float(verdict.g_poly(float(gamma))),
                                 res.r1_first, res.r2_first, res.r1_second, res.r2_second,
                                 res.valid, res.sum_rate, cap.C_sum, cap.C_sum - res.sum_rate))
    return rows


MONTECARLO_COLUMNS = ("model", "p_db", "trials", "achievable_count", "R_A",
                      "wilson_halfwidth", "seed")
SWEEP_COLUMNS = tuple(f.name for f in fields(SweepRow))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(rows, fh, columns: Optional[Sequence[str]] = None) -> None:
    rows = list(rows)
    if columns is None:
        columns = SWEEP_COLUMNS if rows and isinstance(rows[0], SweepRow) else MONTECARLO_COLUMNS
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        d = row if isinstance(row, dict) else asdict(row)
        w.writerow([_fmt(d[c]) for c in columns])


def emit_csv(rows, path, columns: Optional[Sequence[str]] = None) -> None:
    """Write rows (CurvePoint or SweepRow) as UTF-8 CSV with LF line endings.

    Floats keep 12 significant digits. An empty row list writes only the
    header, using the Monte Carlo columns unless ``columns`` is given.
    """
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh, columns)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc

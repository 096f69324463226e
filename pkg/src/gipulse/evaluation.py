"""Monte Carlo harness: single trials, SNR sweeps, validity filtering and MAE.

Every trial seed is fixed up front from ``(master_seed, snr_index, trial_index)``
so a sweep gives the same records whether it runs serially or in a pool.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EmptyReportError, GiPulseError, InvalidInputError
from .gi import bucket_measure, normalize_bucket
from .hr_extract import ExtractConfig, extract_hr_from_bucket
from .signal_core import add_awgn, mae
from .synth import (
    HR_MAX_BPM,
    HR_MIN_BPM,
    RppgConfig,
    SceneConfig,
    SpeckleConfig,
    gen_rppg_waveform,
    gen_skin_frames,
    gen_speckles,
)

RECIPES = ("sinusoid", "gi")


@dataclass(frozen=True)
class TrialRecipe:
    """How a trial's clean signal is synthesised."""

    kind: str = "sinusoid"
    fs: float = 30.0
    duration_s: float = 12.0
    pulse_depth: float = 0.03
    scene_size: int = 16
    speckle_kind: str = "binary"

    def __post_init__(self):
        if self.kind not in RECIPES:
            raise InvalidInputError(f"recipe must be one of {RECIPES}, got {self.kind!r}")


@dataclass
class TrialOutcome:
    seed: int
    true_hr_bpm: float
    est_hr_bpm: float
    f_true: float
    f_est: float
    success: bool
    valid: bool
    out_of_band: bool = False
    snr_db: float = math.nan
    trial: int = 0
    error: str | None = None


def _sub_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def trial_signal(true_hr_bpm: float, snr_db: float, seed: int, recipe: TrialRecipe, cfg: ExtractConfig):
    """Noisy bucket-like input for one trial."""
    noise_seed, scene_seed, speckle_seed = _sub_seeds(seed, 3)
    rppg = gen_rppg_waveform(
        RppgConfig(hr_bpm=true_hr_bpm, duration_s=recipe.duration_s, fs=recipe.fs)
    )
    if recipe.kind == "sinusoid":
        return add_awgn(rppg, snr_db, noise_seed)
    n = recipe.scene_size
    frames = gen_skin_frames(
        SceneConfig(width=n, height=n, pulse_depth=recipe.pulse_depth, seed=scene_seed), rppg
    )
    speckles = gen_speckles(
        SpeckleConfig(n_patterns=len(rppg), width=n, height=n, kind=recipe.speckle_kind, seed=speckle_seed)
    )
    rec = bucket_measure(speckles, frames)
    b = normalize_bucket(rec) if cfg.normalize_by_reference else rec.bucket
    return add_awgn(b, snr_db, noise_seed)


def run_trial(
    true_hr_bpm: float | None,
    snr_db: float,
    seed: int,
    cfg: ExtractConfig = ExtractConfig(),
    recipe: TrialRecipe = TrialRecipe(),
    tol_hz: float = 0.02,
    validity_bpm: float = 10.0,
    trial: int = 0,
) -> TrialOutcome:
    """One synthesise, add noise, extract, score cycle.

    ``true_hr_bpm=None`` draws the heart rate uniformly from [42, 240] bpm
    using ``seed``.  Pipeline failures become failed trials carrying the
    error text; they never propagate.
    """
    if true_hr_bpm is None:
        true_hr_bpm = float(np.random.default_rng(seed).uniform(HR_MIN_BPM, HR_MAX_BPM))
    f_true = true_hr_bpm / 60.0
    if not cfg.band.contains(f_true):
        raise InvalidInputError(f"true heart rate {true_hr_bpm} bpm lies outside the band")
    try:
        b = trial_signal(true_hr_bpm, snr_db, seed, recipe, cfg)
        res = extract_hr_from_bucket(b, cfg)
    except GiPulseError as exc:
        return TrialOutcome(
            seed, true_hr_bpm, math.nan, f_true, math.nan, False, False, False,
            snr_db, trial, f"{type(exc).__name__}: {exc}",
        )
    success = (not res.out_of_band) and abs(res.f_max - f_true) <= tol_hz
    valid = abs(res.hr_bpm - true_hr_bpm) <= validity_bpm
    return TrialOutcome(
        seed, true_hr_bpm, res.hr_bpm, f_true, res.f_max, success, valid, res.out_of_band,
        snr_db, trial,
    )


@dataclass(frozen=True)
class SweepConfig:
    snr_db_list: tuple[float, ...] = (-10.0, -15.0, -20.0, -25.0)
    n_trials: int = 500
    true_hr_bpm: float | None = 75.0
    recipe: TrialRecipe = field(default_factory=TrialRecipe)
    tol_hz: float = 0.02
    validity_bpm: float = 10.0
    master_seed: int = 0

    def validate(self) -> None:
        if self.n_trials < 1:
            raise InvalidInputError("n_trials must be >= 1")
        if not self.tol_hz > 0:
            raise InvalidInputError("tol_hz must be positive")
        if not self.snr_db_list:
            raise InvalidInputError("snr_db_list is empty")


def trial_seed(master_seed: int, snr_index: int, trial_index: int) -> int:
    return int(np.random.SeedSequence([master_seed, snr_index, trial_index]).generate_state(1)[0])


@dataclass
class SnrSummary:
    snr_db: float
    n_trials: int
    successes: int
    success_rate: float
    n_valid: int
    mae_bpm: float | None


@dataclass
class SweepResult:
    per_snr: list[SnrSummary]
    trials: list[TrialOutcome]

    def rate(self, snr_db: float) -> float:
        for s in self.per_snr:
            if s.snr_db == snr_db:
                return s.success_rate
        raise KeyError(snr_db)

    def summary(self, snr_db: float) -> SnrSummary:
        for s in self.per_snr:
            if s.snr_db == snr_db:
                return s
        raise KeyError(snr_db)

    def to_dict(self) -> dict:
        return {
            "per_snr": [asdict(s) for s in self.per_snr],
            "trials": [_trial_json(t) for t in self.trials],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("snr_db,trial,seed,true_hr,est_hr,f_true,f_est,success,valid\n")
        for t in self.trials:
            row = [
                repr(t.snr_db), str(t.trial), str(t.seed), repr(t.true_hr_bpm),
                repr(t.est_hr_bpm), repr(t.f_true), repr(t.f_est),
                str(int(t.success)), str(int(t.valid)),
            ]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _trial_json(t: TrialOutcome) -> dict:
    d = asdict(t)
    for k, v in d.items():
        if isinstance(v, float) and math.isnan(v):
            d[k] = None
    return d


def summarize(outcomes: list[TrialOutcome], snr_db_list) -> list[SnrSummary]:
    """Aggregate per-SNR statistics from trial records alone."""
    out = []
    for snr in snr_db_list:
        group = [t for t in outcomes if t.snr_db == snr]
        succ = sum(t.success for t in group)
        valid = [t for t in group if t.valid]
        err = mae([t.est_hr_bpm for t in valid], [t.true_hr_bpm for t in valid]) if valid else None
        out.append(SnrSummary(snr, len(group), succ, succ / len(group) if group else 0.0, len(valid), err))
    return out


def _run_task(args) -> TrialOutcome:
    hr, snr, seed, cfg, extract, trial = args
    return run_trial(hr, snr, seed, extract, cfg.recipe, cfg.tol_hz, cfg.validity_bpm, trial)


def snr_sweep(cfg: SweepConfig, extract: ExtractConfig = ExtractConfig(), jobs: int = 1) -> SweepResult:
    """Run ``cfg.n_trials`` trials at every SNR in ``cfg.snr_db_list``."""
    cfg.validate()
    tasks = [
        (cfg.true_hr_bpm, float(snr), trial_seed(cfg.master_seed, i, j), cfg, extract, j)
        for i, snr in enumerate(cfg.snr_db_list)
        for j in range(cfg.n_trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        outcomes = [_run_task(t) for t in tasks]
    return SweepResult(summarize(outcomes, [float(s) for s in cfg.snr_db_list]), outcomes)


def mae_report(outcomes: list[TrialOutcome], validity_bpm: float | None = None) -> tuple[int, float]:
    """``(n_valid, mae_bpm)`` over trials whose estimate is within the validity window.

    By default each trial's stored ``valid`` flag is used; pass
    ``validity_bpm`` to re-apply a threshold to the raw errors.
    """
    if not outcomes:
        raise InvalidInputError("no outcomes given")
    if validity_bpm is None:
        valid = [t for t in outcomes if t.valid]
    else:
        valid = [
            t for t in outcomes
            if not math.isnan(t.est_hr_bpm) and abs(t.est_hr_bpm - t.true_hr_bpm) <= validity_bpm
        ]
    if not valid:
        raise EmptyReportError("no valid trials to report on")
    return len(valid), mae([t.est_hr_bpm for t in valid], [t.true_hr_bpm for t in valid])

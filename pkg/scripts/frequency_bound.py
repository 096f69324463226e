"""How precisely can any estimator place a tone in white noise?

Compares three numbers per (duration, SNR):
the Cramer-Rao standard deviation of the frequency of a sinusoid in AWGN,
the success rate of an ideal zero-padded periodogram peak (the maximum
likelihood estimate), and the success rate of the bucket pipeline.
Success means landing within ``--tol`` Hz of the truth.
"""
import argparse

import numpy as np

from gipulse.evaluation import SweepConfig, TrialRecipe, snr_sweep, trial_seed
from gipulse.signal_core import HEART_BAND, TimeSeries, add_awgn, spectrum_peak


def crlb_std_hz(snr_db: float, n: int, fs: float) -> float:
    # var(omega) >= 12 / (snr * n * (n^2 - 1)) for a real tone with snr = A^2 / (2 sigma^2)
    snr = 10 ** (snr_db / 10)
    return float(np.sqrt(12 / (snr * n * (n**2 - 1))) * fs / (2 * np.pi))


def periodogram_rate(f0: float, snr_db: float, dur: float, fs: float, trials: int, tol: float, seed: int) -> float:
    t = np.arange(int(round(dur * fs))) / fs
    clean = TimeSeries(np.sin(2 * np.pi * f0 * t), fs)
    hits = 0
    for j in range(trials):
        x = add_awgn(clean, snr_db, trial_seed(seed, 0, j))
        f, _ = spectrum_peak(x, HEART_BAND)
        hits += abs(f - f0) <= tol
    return hits / trials


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--durations", type=float, nargs="+", default=[12.0, 30.0, 60.0, 120.0])
    ap.add_argument("--snr", type=float, nargs="+", default=[-20.0, -25.0])
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--fs", type=float, default=30.0)
    ap.add_argument("--hr", type=float, default=75.0)
    ap.add_argument("--tol", type=float, default=0.02)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    f0 = args.hr / 60
    print(f"{'dur_s':>6} {'snr_db':>7} {'crlb_hz':>8} {'periodogram':>12} {'pipeline':>9}")
    for dur in args.durations:
        res = snr_sweep(
            SweepConfig(snr_db_list=tuple(args.snr), n_trials=args.trials, true_hr_bpm=args.hr,
                        recipe=TrialRecipe(fs=args.fs, duration_s=dur), tol_hz=args.tol, master_seed=args.seed),
            jobs=args.jobs,
        )
        for snr in args.snr:
            n = int(round(dur * args.fs))
            ml = periodogram_rate(f0, snr, dur, args.fs, args.trials, args.tol, args.seed)
            print(f"{dur:6.0f} {snr:7.1f} {crlb_std_hz(snr, n, args.fs):8.4f} {ml:12.3f} {res.rate(snr):9.3f}")


if __name__ == "__main__":
    main()

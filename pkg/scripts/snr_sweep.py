"""Success rate versus SNR for the bucket pipeline.

Example::

    python3 scripts/snr_sweep.py --snr -10 -15 -20 -25 -30 --duration 12 --trials 500
    python3 scripts/snr_sweep.py --snr -20 -25 --duration 120 --jobs 4
"""
import argparse

from gipulse.evaluation import SweepConfig, TrialRecipe, snr_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--snr", type=float, nargs="+", default=[-10.0, -15.0, -20.0, -25.0, -30.0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--hr", type=float, default=75.0)
    ap.add_argument("--duration", type=float, default=12.0)
    ap.add_argument("--fs", type=float, default=30.0)
    ap.add_argument("--recipe", choices=("sinusoid", "gi"), default="sinusoid")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", default=None, help="write per-trial records here")
    args = ap.parse_args()

    cfg = SweepConfig(
        snr_db_list=tuple(args.snr),
        n_trials=args.trials,
        true_hr_bpm=args.hr,
        recipe=TrialRecipe(kind=args.recipe, fs=args.fs, duration_s=args.duration),
        master_seed=args.seed,
    )
    res = snr_sweep(cfg, jobs=args.jobs)
    print(f"{'snr_db':>7} {'success':>8} {'valid':>6} {'mae_bpm':>8}")
    for s in res.per_snr:
        print(f"{s.snr_db:7.1f} {s.success_rate:8.3f} {s.n_valid:6d} {s.mae_bpm:8.3f}")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(res.to_csv())


if __name__ == "__main__":
    main()

"""Command-line entry point.

Every subcommand writes its outputs plus ``run_manifest.json`` into ``--out``.
``gipulse replay MANIFEST --out DIR`` re-executes a recorded run.

Exit codes: 0 success, 1 bad flags or configuration, 2 runtime or data error.
Errors are also reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .errors import GiPulseError, InvalidInputError
from .evaluation import RECIPES, SweepConfig, TrialRecipe, snr_sweep
from .fileio import read_gifr, read_timeseries, write_gifr, write_json, write_timeseries
from .gi import BucketRecord, bucket_measure, dgi_reconstruct, normalize_bucket, pearson
from .hr_extract import (
    MIN_DURATION_S,
    ExtractConfig,
    ExtractResult,
    Roi,
    extract_hr_from_bucket,
    extract_hr_from_frames,
)
from .signal_core import FrequencyBand
from .synth import (
    SPECKLE_KINDS,
    FrameSequence,
    IllumProfile,
    RppgConfig,
    SceneConfig,
    SpeckleConfig,
    SpeckleSequence,
    gen_rppg_waveform,
    gen_skin_frames,
    gen_speckles,
)
from .vmd import VmdConfig

FORMAT_VERSION = 1
MANIFEST_NAME = "run_manifest.json"
# flags whose values are comma/colon lists that may start with '-'
_LIST_FLAGS = ("--snr", "--band")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dump(path: Path, obj: dict) -> Path:
    return write_json(path, {"spec_version": FORMAT_VERSION, **obj})


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _band(text: str) -> FrequencyBand:
    try:
        return FrequencyBand.parse(text)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None


def default_mask() -> np.ndarray:
    """8x8 binary test object (a block letter 'F' on a dark background)."""
    m = np.zeros((8, 8))
    m[1:7, 2] = 1
    m[1, 2:6] = 1
    m[3, 2:5] = 1
    return m


# -- pipeline config helpers -------------------------------------------------

def _add_extract_flags(p):
    p.add_argument("--band", default="0.7:4.0", help="heart-rate band 'lo:hi' in Hz")
    p.add_argument("--k", type=int, default=3, help="number of VMD modes")
    p.add_argument("--alpha", type=float, default=2000.0, help="VMD bandwidth penalty")
    p.add_argument("--tau", type=float, default=0.0, help="VMD dual-ascent step")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=500)


def _extract_config(args, keep: bool = False, normalize: bool = True) -> ExtractConfig:
    vmd = VmdConfig(K=args.k, alpha=args.alpha, tau=args.tau, tol=args.tol, max_iter=args.max_iter)
    vmd.validate()
    return ExtractConfig(band=_band(args.band), K=args.k, vmd=vmd,
                         normalize_by_reference=normalize, keep_intermediates=keep)


def _write_result(out: Path, res: ExtractResult, keep: bool) -> list[str]:
    written = []
    doc = res.to_json()
    inter = res.intermediates
    if keep and inter is not None:
        paths = {}
        if inter.detrended is not None:
            paths["detrended"] = "01_detrended.csv"
            write_timeseries(out / paths["detrended"], inter.detrended)
        if inter.autocorr is not None:
            paths["autocorrelation"] = "02_autocorr.csv"
            write_timeseries(out / paths["autocorrelation"], inter.autocorr)
        if inter.vmd is not None:
            paths["vmd_modes"] = "03_vmd_modes.csv"
            write_modes(out / paths["vmd_modes"], inter.vmd, inter.selected_index)
        if inter.filtered is not None:
            paths["filtered_imf"] = "04_filtered_imf.csv"
            write_timeseries(out / paths["filtered_imf"], inter.filtered)
        if inter.xcorr is not None:
            paths["cross_correlation"] = "05_xcorr.csv"
            write_timeseries(out / paths["cross_correlation"], inter.xcorr)
        if inter.spectrum is not None:
            paths["spectrum"] = "06_spectrum.csv"
            write_spectrum(out / paths["spectrum"], inter.spectrum)
        doc["intermediates"] = paths
        written += sorted(paths.values())
    _dump(out / "result.json", doc)
    return ["result.json"] + written


def write_modes(path: Path, dec, selected_index=None) -> None:
    """``t,mode_1..mode_K`` CSV plus ``.json`` metadata (centre frequencies, diagnostics)."""
    fs = dec.modes[0].fs
    n = len(dec.modes[0])
    lines = ["t," + ",".join(f"mode_{k + 1}" for k in range(len(dec)))]
    cols = np.stack([m.samples for m in dec.modes], axis=1)
    for i in range(n):
        lines.append(f"{i / fs:.9g}," + ",".join(f"{v:.9g}" for v in cols[i]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _dump(path.with_suffix(".json"), {
        "fs_hz": fs,
        "n": n,
        "center_freqs_hz": [float(f) for f in dec.center_freqs],
        "iterations": dec.iterations,
        "converged": dec.converged,
        "final_increment": dec.final_increment,
        "selected_index": selected_index,
    })


def write_spectrum(path: Path, spec) -> None:
    lines = ["f,value"] + [f"{f:.9g},{m:.9g}" for f, m in zip(spec.freqs, spec.mags)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- subcommands ---------------------------------------------------------------
# Each handler validates its flags and returns a zero-argument runner.  Errors
# while preparing map to exit 1, errors inside the runner to exit 2.

Runner = Callable[[], dict]


def _scene_config(args, seed: int) -> SceneConfig:
    illum = IllumProfile(kind=args.illum, level=args.illum_level, slope=args.illum_slope,
                         amplitude=args.illum_amp, freq_hz=args.illum_freq)
    scene = SceneConfig(width=args.width, height=args.height, base_diffuse=args.diffuse,
                        pulse_depth=args.pulse_depth, specular_level=args.specular,
                        illum=illum, pixel_noise_sigma=args.pixel_noise, seed=seed)
    scene.validate()
    return scene


def _add_scene_flags(p, width=32):
    p.add_argument("--width", type=int, default=width)
    p.add_argument("--height", type=int, default=width)
    p.add_argument("--diffuse", type=float, default=1.0, help="base diffuse level")
    p.add_argument("--pulse-depth", type=float, default=0.03)
    p.add_argument("--specular", type=float, default=0.0)
    p.add_argument("--illum", choices=("constant", "ramp", "sinusoid"), default="constant")
    p.add_argument("--illum-level", type=float, default=1.0)
    p.add_argument("--illum-slope", type=float, default=0.0, help="ramp slope, fraction per second")
    p.add_argument("--illum-amp", type=float, default=0.0)
    p.add_argument("--illum-freq", type=float, default=0.0)
    p.add_argument("--pixel-noise", type=float, default=0.0)


def cmd_synth(args, out: Path) -> Runner:
    rcfg = RppgConfig(hr_bpm=args.hr, duration_s=args.duration, fs=args.fs,
                      n_harmonics=args.harmonics, harmonic_decay=args.decay,
                      waveform_noise_snr_db=args.noise_snr, seed=args.seed)
    rcfg.validate()
    scene = _scene_config(args, args.seed + 1) if args.frames else None

    def run():
        x = gen_rppg_waveform(rcfg)
        write_timeseries(out / "rppg.csv", x)
        outputs = ["rppg.csv", "rppg.json"]
        if scene is not None:
            frames = gen_skin_frames(scene, x)
            write_gifr(out / "frames.gifr", frames.frames, frames.fs)
            outputs.append("frames.gifr")
        return {"outputs": outputs}
    return run


def cmd_speckles(args, out: Path) -> Runner:
    cfg = SpeckleConfig(n_patterns=args.n, width=args.width, height=args.height,
                        kind=args.kind, grain=args.grain, seed=args.seed)
    cfg.validate()

    def run():
        sp = gen_speckles(cfg)
        write_gifr(out / "speckles.gifr", sp.patterns, 0)
        return {"outputs": ["speckles.gifr"]}
    return run


def _load_frames(path) -> FrameSequence:
    stack, fs = read_gifr(path)
    return FrameSequence(stack, fs)


def _load_speckles(path) -> SpeckleSequence:
    stack, _ = read_gifr(path)
    return SpeckleSequence(stack)


def _write_record(out: Path, rec: BucketRecord) -> list[str]:
    write_timeseries(out / "bucket.csv", rec.bucket)
    write_timeseries(out / "reference.csv", rec.reference)
    write_timeseries(out / "normalized.csv", normalize_bucket(rec))
    return ["bucket.csv", "bucket.json", "reference.csv", "reference.json",
            "normalized.csv", "normalized.json"]


def cmd_bucket(args, out: Path) -> Runner:
    if args.noise < 0:
        raise UsageError("--noise must be >= 0")

    def run():
        rec = bucket_measure(_load_speckles(args.speckles), _load_frames(args.frames),
                             args.noise, args.seed)
        return {"outputs": _write_record(out, rec)}
    return run


def cmd_dgi(args, out: Path) -> Runner:
    def run():
        speckles = _load_speckles(args.speckles)
        rec = BucketRecord(read_timeseries(args.bucket), read_timeseries(args.reference))
        img = dgi_reconstruct(rec, speckles, args.formula)
        write_gifr(out / "recon.gifr", img, 0)
        metrics = {}
        if args.truth:
            truth, _ = read_gifr(args.truth)
            metrics["correlation_to_truth"] = pearson(img, truth[0])
        return {"outputs": ["recon.gifr"], "metrics": metrics}
    return run


def cmd_extract(args, out: Path) -> Runner:
    cfg = _extract_config(args, keep=args.keep_intermediates, normalize=not args.no_normalize)

    def run():
        b = read_timeseries(args.input)
        if args.reference and cfg.normalize_by_reference:
            b = normalize_bucket(BucketRecord(b, read_timeseries(args.reference)))
        res = extract_hr_from_bucket(b, cfg)
        return {"outputs": _write_result(out, res, cfg.keep_intermediates),
                "metrics": res.to_json()}
    return run


def cmd_extract_frames(args, out: Path) -> Runner:
    cfg = _extract_config(args, keep=args.keep_intermediates)
    roi = Roi.parse(args.roi) if args.roi else None

    def run():
        frames = _load_frames(args.frames)
        res = extract_hr_from_frames(frames, cfg, roi)
        return {"outputs": _write_result(out, res, cfg.keep_intermediates),
                "metrics": res.to_json()}
    return run


def cmd_sweep(args, out: Path) -> Runner:
    hr = None if args.hr == "random" else float(args.hr)
    recipe = TrialRecipe(kind=args.recipe, fs=args.fs, duration_s=args.duration)
    cfg = SweepConfig(snr_db_list=tuple(_float_list(args.snr)), n_trials=args.trials,
                      true_hr_bpm=hr, recipe=recipe, tol_hz=args.tol_hz,
                      validity_bpm=args.validity, master_seed=args.seed)
    cfg.validate()
    extract = _extract_config(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")

    def run():
        res = snr_sweep(cfg, extract, jobs=args.jobs)
        (out / "sweep.csv").write_text(res.to_csv(), encoding="utf-8")
        _dump(out / "sweep.json", res.to_dict())
        return {"outputs": ["sweep.csv", "sweep.json"],
                "metrics": {"success_rate": {repr(s.snr_db): s.success_rate for s in res.per_snr}}}
    return run


def cmd_gi_chain(args, out: Path) -> Runner:
    if args.mode == "dgi":
        return _gi_chain_dgi(args, out)
    return _gi_chain_hr(args, out)


def _gi_chain_dgi(args, out: Path) -> Runner:
    if args.patterns < 2:
        raise UsageError("--patterns must be >= 2")

    def run():
        if args.object:
            obj, _ = read_gifr(args.object)
            obj = obj[0]
        else:
            obj = default_mask()
        h, w = obj.shape
        speckles = gen_speckles(SpeckleConfig(n_patterns=args.patterns, width=w, height=h,
                                              kind=args.speckle_kind, seed=args.seed))
        frames = FrameSequence(np.broadcast_to(obj, (args.patterns, h, w)), 1.0)
        rec = bucket_measure(speckles, frames, args.detector_noise, args.seed + 1)
        img = dgi_reconstruct(rec, speckles, args.formula)
        write_gifr(out / "recon.gifr", img, 0)
        r = pearson(img, obj)
        _dump(out / "dgi.json", {"correlation_to_truth": r, "patterns": args.patterns,
                                 "formula": args.formula})
        return {"outputs": ["recon.gifr", "dgi.json"], "metrics": {"correlation_to_truth": r}}
    return run


def _gi_chain_hr(args, out: Path) -> Runner:
    if args.duration < MIN_DURATION_S:
        raise UsageError(f"--duration must be at least {MIN_DURATION_S:g} s")
    cfg = _extract_config(args, keep=args.keep_intermediates, normalize=not args.no_normalize)
    rcfg = RppgConfig(hr_bpm=args.hr, duration_s=args.duration, fs=args.patterns_fs, seed=args.seed)
    rcfg.validate()
    scene = _scene_config(args, args.seed + 1)

    def run():
        if args.frames:
            frames = _load_frames(args.frames)
        else:
            frames = gen_skin_frames(scene, gen_rppg_waveform(rcfg))
        if args.speckles:
            speckles = _load_speckles(args.speckles)
        else:
            h, w = frames.shape
            speckles = gen_speckles(SpeckleConfig(n_patterns=len(frames), width=w, height=h,
                                                  kind=args.speckle_kind, seed=args.seed + 2))
        rec = bucket_measure(speckles, frames, args.detector_noise, args.seed + 3)
        outputs = _write_record(out, rec)
        b = normalize_bucket(rec) if cfg.normalize_by_reference else rec.bucket
        res = extract_hr_from_bucket(b, cfg)
        outputs += _write_result(out, res, cfg.keep_intermediates)
        metrics = res.to_json()
        if not args.frames:
            metrics["true_hr_bpm"] = args.hr
        return {"outputs": outputs, "metrics": metrics}
    return run


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gipulse", description="Ghost-imaging heart-rate simulation and extraction.")
    p.add_argument("--version", action="version", version=f"gipulse {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesise an rPPG waveform (and optionally frames)")
    s.add_argument("--hr", type=float, required=True)
    s.add_argument("--fs", type=float, default=30.0)
    s.add_argument("--duration", type=float, default=12.0)
    s.add_argument("--harmonics", type=int, default=0)
    s.add_argument("--decay", type=float, default=0.5)
    s.add_argument("--noise-snr", type=float, default=None)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--frames", action="store_true", help="also render frames.gifr")
    _add_scene_flags(s)
    s.set_defaults(handler=cmd_synth)

    s = sub.add_parser("speckles", help="generate speckle patterns")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--width", type=int, default=32)
    s.add_argument("--height", type=int, default=32)
    s.add_argument("--kind", choices=SPECKLE_KINDS, default="binary")
    s.add_argument("--grain", type=float, default=1.0)
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(handler=cmd_speckles)

    s = sub.add_parser("bucket", help="simulate bucket and reference signals")
    s.add_argument("--speckles", required=True)
    s.add_argument("--frames", required=True)
    s.add_argument("--noise", type=float, default=0.0, help="relative detector noise std")
    s.add_argument("--seed", type=int, required=True)
    s.set_defaults(handler=cmd_bucket)

    s = sub.add_parser("dgi", help="differential ghost imaging reconstruction")
    s.add_argument("--bucket", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--speckles", required=True)
    s.add_argument("--formula", choices=("canonical", "literal"), default="canonical")
    s.add_argument("--truth", default=None, help="GIFR ground-truth image for a correlation score")
    s.set_defaults(handler=cmd_dgi)

    s = sub.add_parser("extract", help="heart rate from a bucket signal")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--reference", default=None)
    s.add_argument("--no-normalize", action="store_true")
    s.add_argument("--keep-intermediates", action="store_true")
    _add_extract_flags(s)
    s.set_defaults(handler=cmd_extract)

    s = sub.add_parser("extract-frames", help="heart rate from a frame sequence")
    s.add_argument("--frames", required=True)
    s.add_argument("--roi", default=None, help="x,y,w,h (default: whole frame)")
    s.add_argument("--keep-intermediates", action="store_true")
    _add_extract_flags(s)
    s.set_defaults(handler=cmd_extract_frames)

    s = sub.add_parser("sweep", help="Monte Carlo SNR sweep")
    s.add_argument("--snr", required=True, help="comma-separated SNR list in dB")
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--hr", default="75", help="true heart rate in bpm, or 'random'")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--recipe", choices=RECIPES, default="sinusoid")
    s.add_argument("--fs", type=float, default=30.0)
    s.add_argument("--duration", type=float, default=12.0)
    s.add_argument("--tol-hz", type=float, default=0.02)
    s.add_argument("--validity", type=float, default=10.0, help="valid-trial window in bpm")
    s.add_argument("--jobs", type=int, default=1)
    _add_extract_flags(s)
    s.set_defaults(handler=cmd_sweep)

    s = sub.add_parser("gi-chain", help="scene -> speckles -> bucket -> DGI image or heart rate")
    s.add_argument("--mode", choices=("dgi", "hr"), required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--object", default=None, help="GIFR object image (dgi mode)")
    s.add_argument("--patterns", type=int, default=5000, help="pattern count (dgi mode)")
    s.add_argument("--formula", choices=("canonical", "literal"), default="canonical")
    s.add_argument("--speckle-kind", choices=SPECKLE_KINDS, default="binary")
    s.add_argument("--detector-noise", type=float, default=0.0)
    s.add_argument("--hr", type=float, default=75.0)
    s.add_argument("--patterns-fs", type=float, default=30.0)
    s.add_argument("--duration", type=float, default=12.0)
    s.add_argument("--frames", default=None, help="GIFR frames instead of a synthetic scene")
    s.add_argument("--speckles", default=None, help="GIFR speckles instead of generated ones")
    s.add_argument("--no-normalize", action="store_true")
    s.add_argument("--keep-intermediates", action="store_true")
    _add_scene_flags(s, width=16)
    _add_extract_flags(s)
    s.set_defaults(handler=cmd_gi_chain)

    s = sub.add_parser("replay", help="re-run a recorded manifest")
    s.add_argument("manifest")
    s.set_defaults(handler=None)

    for action in sub.choices.values():
        action.add_argument("--out", default=".", help="output directory")
    return p


def _merge_list_flags(argv: list[str]) -> list[str]:
    merged, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _LIST_FLAGS and i + 1 < len(argv):
            merged.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            merged.append(a)
            i += 1
    return merged


def _strip_out(argv: list[str]) -> list[str]:
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(a)
    return kept


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)
    return code


def dispatch(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand, write its manifest; return the exit code."""
    argv = _merge_list_flags(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            return dispatch(list(manifest["argv"]) + ["--out", args.out])
        out = Path(args.out)
        runner = args.handler(args, out)
    except (UsageError, InvalidInputError) as exc:
        return _fail(1, exc)
    except (OSError, KeyError, ValueError) as exc:
        return _fail(2, exc)

    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        report = runner()
    except (GiPulseError, OSError, ValueError) as exc:
        return _fail(2, exc)
    config = {k: v for k, v in vars(args).items() if k not in ("handler", "out")}
    _dump(out / MANIFEST_NAME, {
        "subcommand": args.command,
        "argv": _strip_out(argv),
        "config": config,
        "master_seed": getattr(args, "seed", None),
        "tool_version": __version__,
        "inputs": {k: v for k, v in config.items()
                   if k in ("input", "reference", "frames", "speckles", "bucket", "truth", "object")
                   and isinstance(v, str)},
        "output_dir": str(out),
        "outputs": report.get("outputs", []),
        "metrics": report.get("metrics", {}),
        "wall_clock_s": time.perf_counter() - t0,
    })
    return 0


def main() -> None:
    raise SystemExit(dispatch())


if __name__ == "__main__":
    main()

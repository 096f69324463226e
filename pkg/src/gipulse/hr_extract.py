"""Heart-rate extraction pipelines.

``extract_hr_from_bucket`` recovers a weak periodic component from a noisy
single-pixel bucket signal without forming an image:

1. demean
2. autocorrelation, lags 0..N-1
3. VMD of the autocorrelation
4. lowest-frequency mode inside the heart-rate band
5. Hamming FIR bandpass of that mode
6. cross-correlation of the filtered mode with the demeaned bucket, lags 0..N-1
7. spectral peak of the cross-correlation inside the band
8. ``hr = 60 * f_max``

``extract_hr_from_frames`` is the camera-style path: ROI spatial mean,
bandpass, spectral peak.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateSignalError, InvalidInputError
from .gi import BucketRecord, normalize_bucket
from .signal_core import (
    HEART_BAND,
    FrequencyBand,
    Spectrum,
    TimeSeries,
    autocorrelation,
    bandpass_fir,
    cross_correlation,
    demean,
    hr_from_peak,
    is_constant,
    spectrum_peak,
)
from .synth import FrameSequence
from .vmd import VmdConfig, VmdResult, select_imf, vmd_decompose

MIN_DURATION_S = 6.0


@dataclass(frozen=True)
class ExtractConfig:
    band: FrequencyBand = HEART_BAND
    K: int = 3
    vmd: VmdConfig = field(default_factory=VmdConfig)
    normalize_by_reference: bool = True
    keep_intermediates: bool = False

    def vmd_config(self) -> VmdConfig:
        # K on ExtractConfig is authoritative
        return replace(self.vmd, K=self.K)


@dataclass
class Intermediates:
    detrended: TimeSeries
    autocorr: TimeSeries | None = None
    vmd: VmdResult | None = None
    selected_index: int | None = None
    selected: TimeSeries | None = None
    filtered: TimeSeries | None = None
    xcorr: TimeSeries | None = None
    spectrum: Spectrum | None = None


@dataclass
class ExtractResult:
    hr_bpm: float
    f_max: float
    out_of_band: bool = False
    intermediates: Intermediates | None = None

    def to_json(self) -> dict:
        return {"hr_bpm": self.hr_bpm, "f_max_hz": self.f_max, "out_of_band": self.out_of_band}


def _check_input(x: TimeSeries, band: FrequencyBand) -> None:
    if len(x) * 1.0 < MIN_DURATION_S * x.fs - 1e-9:
        raise InvalidInputError(
            f"signal lasts {x.duration:.3g} s; at least {MIN_DURATION_S:g} s is required"
        )
    band.check(x.fs)
    if is_constant(x):
        raise DegenerateSignalError("input signal is constant")


def extract_hr_from_bucket(b: TimeSeries, cfg: ExtractConfig = ExtractConfig()) -> ExtractResult:
    """Estimate heart rate directly from a bucket signal (no image formation)."""
    _check_input(b, cfg.band)
    x = demean(b)
    r = autocorrelation(x)
    dec = vmd_decompose(r, cfg.vmd_config())
    idx, imf, out_of_band = select_imf(dec, cfg.band)
    if not np.any(imf.samples):
        raise DegenerateSignalError("selected mode is identically zero")
    filtered = bandpass_fir(imf, cfg.band)
    c = cross_correlation(filtered, x)
    f_max, spec = spectrum_peak(c, cfg.band)
    inter = None
    if cfg.keep_intermediates:
        inter = Intermediates(x, r, dec, idx, imf, filtered, c, spec)
    return ExtractResult(hr_from_peak(f_max), f_max, out_of_band, inter)


def extract_hr_from_record(rec: BucketRecord, cfg: ExtractConfig = ExtractConfig()) -> ExtractResult:
    """Bucket pipeline on a full GI record, optionally dividing out the reference arm first."""
    b = normalize_bucket(rec) if cfg.normalize_by_reference else rec.bucket
    return extract_hr_from_bucket(b, cfg)


@dataclass(frozen=True)
class Roi:
    """Pixel rectangle: columns ``x .. x+width-1``, rows ``y .. y+height-1``."""

    x: int
    y: int
    width: int
    height: int

    @classmethod
    def parse(cls, text: str) -> "Roi":
        try:
            x, y, w, h = (int(v) for v in text.split(","))
        except ValueError:
            raise InvalidInputError(f"roi must look like 'x,y,w,h', got {text!r}") from None
        return cls(x, y, w, h)

    def check(self, shape: tuple[int, int]) -> None:
        h, w = shape
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("roi is empty")
        if self.x < 0 or self.y < 0 or self.x + self.width > w or self.y + self.height > h:
            raise InvalidInputError(f"roi {self} exceeds frame bounds {w}x{h}")


def roi_mean_signal(frames: FrameSequence, roi: Roi) -> TimeSeries:
    roi.check(frames.shape)
    patch = frames.frames[:, roi.y:roi.y + roi.height, roi.x:roi.x + roi.width]
    return TimeSeries(patch.mean(axis=(1, 2)), frames.fs)


def extract_hr_from_frames(
    frames: FrameSequence, cfg: ExtractConfig = ExtractConfig(), roi: Roi | None = None
) -> ExtractResult:
    """Estimate heart rate from the ROI-averaged intensity of a frame sequence.

    ``roi`` defaults to the whole frame.
    """
    if roi is None:
        roi = Roi(0, 0, frames.shape[1], frames.shape[0])
    proxy = roi_mean_signal(frames, roi)
    _check_input(proxy, cfg.band)
    x = demean(proxy)
    filtered = bandpass_fir(x, cfg.band)
    f_max, spec = spectrum_peak(filtered, cfg.band)
    inter = None
    if cfg.keep_intermediates:
        inter = Intermediates(x, filtered=filtered, spectrum=spec)
    return ExtractResult(hr_from_peak(f_max), f_max, False, inter)

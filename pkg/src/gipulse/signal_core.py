"""Deterministic 1-D signal primitives.

Everything downstream (bucket signals, rPPG waveforms, correlations, VMD modes)
is carried around as a :class:`TimeSeries`.  Functions here are pure; the only
randomness is :func:`add_awgn`, which is driven entirely by its ``seed``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateSignalError, InvalidInputError

#: Finest spectral bin spacing (Hz) used by :func:`spectrum_peak`.
PEAK_RESOLUTION_HZ = 0.005
#: Target transition bandwidth (Hz) of the default bandpass design.
TRANSITION_HZ = 0.2


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real signal."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidInputError("TimeSeries needs a nonempty 1-D sample array")
        if not (np.isfinite(self.fs) and self.fs > 0):
            raise InvalidInputError(f"sampling rate must be positive, got {self.fs!r}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.fs

    def with_samples(self, samples) -> "TimeSeries":
        return TimeSeries(samples, self.fs)


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum on an ascending grid from 0 to fs/2."""

    freqs: np.ndarray
    mags: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        mags = np.asarray(self.mags, dtype=np.float64)
        if freqs.shape != mags.shape or freqs.ndim != 1:
            raise InvalidInputError("freqs and mags must be 1-D and equally long")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "mags", mags)


@dataclass(frozen=True)
class FrequencyBand:
    """Closed frequency interval [lo, hi] in Hz."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo < self.hi):
            raise InvalidInputError(f"need 0 < lo < hi, got [{self.lo}, {self.hi}]")

    def check(self, fs: float) -> None:
        """Raise unless the band lies strictly below the Nyquist frequency of ``fs``."""
        if self.hi >= fs / 2:
            raise InvalidInputError(
                f"band upper edge {self.hi} Hz is not below Nyquist ({fs / 2} Hz)"
            )

    def contains(self, f: float) -> bool:
        return self.lo <= f <= self.hi

    @classmethod
    def parse(cls, text: str) -> "FrequencyBand":
        """Parse ``"lo:hi"``."""
        try:
            lo, hi = (float(v) for v in text.split(":"))
        except ValueError:
            raise InvalidInputError(f"band must look like 'lo:hi', got {text!r}") from None
        return cls(lo, hi)


HEART_BAND = FrequencyBand(0.7, 4.0)


def _as_series(x) -> TimeSeries:
    if not isinstance(x, TimeSeries):
        raise InvalidInputError(f"expected TimeSeries, got {type(x).__name__}")
    return x


def is_constant(x: TimeSeries) -> bool:
    return bool(np.ptp(x.samples) == 0)


def demean(x: TimeSeries) -> TimeSeries:
    return x.with_samples(x.samples - x.samples.mean())


def autocorrelation(x: TimeSeries) -> TimeSeries:
    """Raw autocorrelation at nonnegative lags.

    ``r[k] = sum_{n=0}^{N-1-k} x[n] * x[n+k]`` for ``k = 0 .. N-1``.  No mean
    removal and no normalisation; callers demean first when they need to.
    """
    x = _as_series(x)
    if len(x) < 2:
        raise InvalidInputError("autocorrelation needs at least 2 samples")
    s = x.samples
    return x.with_samples(np.correlate(s, s, mode="full")[s.size - 1:])


def cross_correlation(x: TimeSeries, y: TimeSeries) -> TimeSeries:
    """Cross-correlation ``c[k] = sum_n x[n] * y[n+k]`` at lags ``0 .. N-1``."""
    x, y = _as_series(x), _as_series(y)
    if len(x) != len(y):
        raise InvalidInputError(f"length mismatch: {len(x)} vs {len(y)}")
    if x.fs != y.fs:
        raise InvalidInputError(f"sampling rate mismatch: {x.fs} vs {y.fs}")
    n = len(x)
    return x.with_samples(np.correlate(y.samples, x.samples, mode="full")[n - 1:])


def default_numtaps(fs: float, transition_hz: float = TRANSITION_HZ) -> int:
    """Smallest odd Hamming-window length giving roughly ``transition_hz`` of roll-off."""
    m = math.ceil(3.3 * fs / transition_hz)
    return m if m % 2 else m + 1


def design_bandpass(band: FrequencyBand, fs: float, numtaps: int | None = None) -> np.ndarray:
    """Windowed-sinc linear-phase bandpass with a Hamming window.

    The taps are scaled for unit gain at the band centre.
    """
    band.check(fs)
    m = default_numtaps(fs) if numtaps is None else int(numtaps)
    if m < 3 or m % 2 == 0:
        raise InvalidInputError(f"numtaps must be odd and >= 3, got {m}")
    n = np.arange(m) - (m - 1) / 2
    hi, lo = 2 * band.hi / fs, 2 * band.lo / fs
    h = hi * np.sinc(hi * n) - lo * np.sinc(lo * n)
    h *= np.hamming(m)
    fc = 0.5 * (band.lo + band.hi) / fs
    h /= np.sum(h * np.cos(2 * np.pi * fc * n))
    return h


def bandpass_fir(x: TimeSeries, band: FrequencyBand, numtaps: int | None = None) -> TimeSeries:
    """Zero-delay Hamming-windowed FIR bandpass.

    Parameters
    ----------
    x : TimeSeries
        Input signal.
    band : FrequencyBand
        Passband edges in Hz; ``band.hi`` must be below Nyquist.
    numtaps : int, optional
        Filter length (odd).  By default the length targeting a 0.2 Hz
        transition is used, shortened to the largest odd length that fits
        inside ``x`` when the signal is too short for it.

    Returns
    -------
    TimeSeries
        Same length and sampling rate as ``x``, time-aligned with it (the
        ``(numtaps - 1) / 2`` sample group delay is removed; edges are padded
        by reflection).
    """
    x = _as_series(x)
    band.check(x.fs)
    n = len(x)
    if numtaps is None:
        numtaps = min(default_numtaps(x.fs), n if n % 2 else n - 1)
        if numtaps < 3:
            raise InvalidInputError(f"signal of {n} samples is too short to filter")
    elif numtaps - 1 >= n:
        raise InvalidInputError(
            f"signal of {n} samples is shorter than the filter order {numtaps - 1}"
        )
    h = design_bandpass(band, x.fs, numtaps)
    pad = (numtaps - 1) // 2
    padded = np.pad(x.samples, pad, mode="reflect")
    return x.with_samples(np.convolve(padded, h, mode="valid"))


def dft(x: TimeSeries) -> np.ndarray:
    """Full complex DFT of the samples (no padding, no scaling)."""
    return np.fft.fft(_as_series(x).samples)


def peak_nfft(n: int, fs: float, resolution: float = PEAK_RESOLUTION_HZ) -> int:
    """Power-of-two transform length with bin spacing no coarser than ``resolution``."""
    need = max(n, math.ceil(fs / resolution))
    return 1 << (need - 1).bit_length()


def spectrum_peak(
    x: TimeSeries, band: FrequencyBand, resolution: float = PEAK_RESOLUTION_HZ
) -> tuple[float, Spectrum]:
    """Locate the strongest spectral line of ``x`` inside ``band``.

    The signal is demeaned and zero-padded so the bin spacing is at most
    ``resolution`` Hz.  Returns ``(f_max, spectrum)`` where ``spectrum`` spans
    the whole 0..fs/2 grid.
    """
    x = _as_series(x)
    if len(x) < 16:
        raise InvalidInputError("spectrum_peak needs at least 16 samples")
    band.check(x.fs)
    if is_constant(x):
        raise DegenerateSignalError("signal is constant; no spectral peak exists")
    s = x.samples - x.samples.mean()
    nfft = peak_nfft(s.size, x.fs, resolution)
    mags = np.abs(np.fft.rfft(s, nfft))
    freqs = np.fft.rfftfreq(nfft, 1.0 / x.fs)
    inband = np.flatnonzero((freqs >= band.lo) & (freqs <= band.hi))
    if not np.any(mags[inband] > 0):
        raise DegenerateSignalError("no spectral energy inside the band")
    f_max = float(freqs[inband[np.argmax(mags[inband])]])
    return f_max, Spectrum(freqs, mags)


def hr_from_peak(f_max: float) -> float:
    """Heart rate in beats per minute from a peak frequency in Hz."""
    if not (np.isfinite(f_max) and f_max > 0):
        raise InvalidInputError(f"peak frequency must be positive, got {f_max!r}")
    return 60.0 * f_max


def mae(estimates: Sequence[float], truths: Sequence[float]) -> float:
    """Mean absolute error between paired estimates and reference values."""
    est = np.asarray(estimates, dtype=np.float64)
    ref = np.asarray(truths, dtype=np.float64)
    if est.ndim != 1 or est.shape != ref.shape:
        raise InvalidInputError("estimates and truths must be equally long 1-D sequences")
    if est.size == 0:
        raise InvalidInputError("mae of an empty sequence is undefined")
    return float(np.mean(np.abs(est - ref)))


def signal_power(x: TimeSeries) -> float:
    """Power of the demeaned signal."""
    s = _as_series(x).samples
    return float(np.mean((s - s.mean()) ** 2))


def add_awgn(x: TimeSeries, snr_db: float, seed: int) -> TimeSeries:
    """Add white Gaussian noise at ``snr_db`` relative to the demeaned signal power.

    The noise vector depends only on ``seed`` and ``len(x)``, scaled by the
    signal power, so repeated calls are bit-identical.
    """
    power = signal_power(x)
    if power == 0:
        raise DegenerateSignalError("cannot set an SNR for a zero-power signal")
    sigma = math.sqrt(power / 10 ** (snr_db / 10))
    noise = np.random.default_rng(seed).standard_normal(len(x))
    return x.with_samples(x.samples + sigma * noise)

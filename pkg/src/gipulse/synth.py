"""Seeded synthetic data: rPPG waveforms, pulsing skin-patch frames, speckle patterns.

Frames follow the dichromatic reflection picture: a pixel reads
``I(t) * (v_s + v_d(t)) + v_n(t)`` where only the diffuse term carries the
pulse.  Frames are single-channel and stand in for the green channel.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .signal_core import TimeSeries, add_awgn

HR_MIN_BPM = 42.0
HR_MAX_BPM = 240.0


@dataclass(frozen=True)
class FrameSequence:
    """Stack of nonnegative frames shaped ``(F, H, W)`` sampled at ``fs`` Hz."""

    frames: np.ndarray
    fs: float

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[0] == 0:
            raise InvalidInputError("frames must be a nonempty (F, H, W) array")
        if not self.fs > 0:
            raise InvalidInputError("frame rate must be positive")
        if np.any(frames < 0):
            raise InvalidInputError("frames must be nonnegative")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames.shape[1:]


@dataclass(frozen=True)
class SpeckleSequence:
    """Illumination patterns shaped ``(N, H, W)``, one per measurement."""

    patterns: np.ndarray

    def __post_init__(self):
        patterns = np.asarray(self.patterns, dtype=np.float64)
        if patterns.ndim != 3 or patterns.shape[0] == 0:
            raise InvalidInputError("patterns must be a nonempty (N, H, W) array")
        if np.any(patterns < 0):
            raise InvalidInputError("speckle patterns must be nonnegative")
        if not np.any(patterns.sum(axis=(1, 2)) > 0):
            raise InvalidInputError("at least one pattern needs nonzero intensity")
        object.__setattr__(self, "patterns", patterns)

    def __len__(self) -> int:
        return self.patterns.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.patterns.shape[1:]


@dataclass(frozen=True)
class RppgConfig:
    hr_bpm: float = 75.0
    duration_s: float = 12.0
    fs: float = 30.0
    n_harmonics: int = 0
    harmonic_decay: float = 0.5
    waveform_noise_snr_db: float | None = None
    seed: int = 0

    def validate(self) -> None:
        if not HR_MIN_BPM <= self.hr_bpm <= HR_MAX_BPM:
            raise InvalidInputError(
                f"hr_bpm must lie in [{HR_MIN_BPM:g}, {HR_MAX_BPM:g}], got {self.hr_bpm}"
            )
        if not self.fs > 8:
            raise InvalidInputError(f"fs must exceed 8 Hz, got {self.fs}")
        if self.n_harmonics < 0:
            raise InvalidInputError("n_harmonics must be >= 0")
        if not 0 < self.harmonic_decay <= 1:
            raise InvalidInputError("harmonic_decay must lie in (0, 1]")
        if round(self.duration_s * self.fs) < 1:
            raise InvalidInputError("duration too short for a single sample")


def gen_rppg_waveform(cfg: RppgConfig) -> TimeSeries:
    """Harmonic pulse waveform scaled to unit peak, optionally with AWGN.

    ``s(t) = sum_h decay**h * sin(2*pi*(h+1)*f0*t)`` for ``h = 0..n_harmonics``.
    """
    cfg.validate()
    n = int(round(cfg.duration_s * cfg.fs))
    t = np.arange(n) / cfg.fs
    f0 = cfg.hr_bpm / 60.0
    s = np.zeros(n)
    for h in range(cfg.n_harmonics + 1):
        s += cfg.harmonic_decay**h * np.sin(2 * np.pi * (h + 1) * f0 * t)
    peak = np.max(np.abs(s))
    if peak > 0:
        s = s / peak
    x = TimeSeries(s, cfg.fs)
    if cfg.waveform_noise_snr_db is not None:
        x = add_awgn(x, cfg.waveform_noise_snr_db, cfg.seed)
    return x


@dataclass(frozen=True)
class IllumProfile:
    """Illumination intensity over time.

    ``constant``: ``level``; ``ramp``: ``level * (1 + slope * t)``;
    ``sinusoid``: ``level * (1 + amplitude * sin(2*pi*freq_hz*t))``.
    Negative values are clipped to zero.
    """

    kind: str = "constant"
    level: float = 1.0
    slope: float = 0.0
    amplitude: float = 0.0
    freq_hz: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "ramp", "sinusoid"):
            raise InvalidInputError(f"unknown illumination profile {self.kind!r}")
        if self.level < 0:
            raise InvalidInputError("illumination level must be >= 0")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "constant":
            out = np.full(t.shape, self.level)
        elif self.kind == "ramp":
            out = self.level * (1 + self.slope * t)
        else:
            out = self.level * (1 + self.amplitude * np.sin(2 * np.pi * self.freq_hz * t))
        return np.clip(out, 0, None)


@dataclass(frozen=True)
class SceneConfig:
    width: int = 32
    height: int = 32
    base_diffuse: float = 1.0
    pulse_depth: float = 0.03
    specular_level: float = 0.0
    illum: IllumProfile = field(default_factory=IllumProfile)
    pixel_noise_sigma: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("scene must be at least 1x1 pixels")
        if not self.base_diffuse > 0:
            raise InvalidInputError("base_diffuse must be positive")
        if not 0 <= self.pulse_depth <= 0.2:
            raise InvalidInputError("pulse_depth must lie in [0, 0.2]")
        if self.specular_level < 0 or self.pixel_noise_sigma < 0:
            raise InvalidInputError("specular_level and pixel_noise_sigma must be >= 0")


def gen_skin_frames(scene: SceneConfig, rppg: TimeSeries) -> FrameSequence:
    """Render one frame per rPPG sample from the dichromatic reflection model."""
    scene.validate()
    illum = scene.illum(rppg.t)
    diffuse = scene.base_diffuse * (1 + scene.pulse_depth * rppg.samples)
    level = illum * (scene.specular_level + diffuse)
    frames = np.broadcast_to(level[:, None, None], (len(rppg), scene.height, scene.width)).copy()
    if scene.pixel_noise_sigma > 0:
        rng = np.random.default_rng(scene.seed)
        frames += scene.pixel_noise_sigma * rng.standard_normal(frames.shape)
    np.clip(frames, 0, None, out=frames)
    return FrameSequence(frames, rppg.fs)


SPECKLE_KINDS = ("binary", "uniform", "gaussian")


@dataclass(frozen=True)
class SpeckleConfig:
    n_patterns: int = 1000
    width: int = 32
    height: int = 32
    kind: str = "binary"
    grain: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_patterns < 1:
            raise InvalidInputError("n_patterns must be >= 1")
        if self.width < 1 or self.height < 1:
            raise InvalidInputError("patterns must be at least 1x1 pixels")
        if self.kind not in SPECKLE_KINDS:
            raise InvalidInputError(f"speckle kind must be one of {SPECKLE_KINDS}")
        if self.kind == "gaussian" and self.grain < 1:
            raise InvalidInputError("grain size must be >= 1 pixel")


def _correlated_speckle(rng, n, h, w, grain):
    # circular Gaussian field smoothed to the grain size; intensity has unit mean
    yy = np.minimum(np.arange(h), h - np.arange(h))[:, None]
    xx = np.minimum(np.arange(w), w - np.arange(w))[None, :]
    kernel = np.exp(-(xx**2 + yy**2) / (2.0 * grain**2))
    kernel /= np.sqrt(np.sum(kernel**2))
    kf = np.fft.fft2(kernel)
    field_ = (rng.standard_normal((n, h, w)) + 1j * rng.standard_normal((n, h, w))) / np.sqrt(2)
    smooth = np.fft.ifft2(np.fft.fft2(field_) * kf)
    return np.abs(smooth) ** 2


def gen_speckles(cfg: SpeckleConfig) -> SpeckleSequence:
    """Independent random illumination patterns; binary all-dark patterns are redrawn."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    shape = (cfg.n_patterns, cfg.height, cfg.width)
    if cfg.kind == "binary":
        pats = rng.integers(0, 2, size=shape).astype(np.float64)
        dark = np.flatnonzero(pats.sum(axis=(1, 2)) == 0)
        while dark.size:
            pats[dark] = rng.integers(0, 2, size=(dark.size,) + shape[1:])
            dark = dark[pats[dark].sum(axis=(1, 2)) == 0]
    elif cfg.kind == "uniform":
        pats = rng.random(shape)
    else:
        pats = _correlated_speckle(rng, *shape, cfg.grain)
    return SpeckleSequence(pats)

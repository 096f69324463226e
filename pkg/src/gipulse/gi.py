"""Ghost-imaging forward model and differential ghost imaging (DGI) reconstruction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .signal_core import TimeSeries
from .synth import FrameSequence, SpeckleSequence

__all__ = [
    "BucketRecord",
    "SpeckleSequence",
    "bucket_measure",
    "dgi_reconstruct",
    "normalize_bucket",
    "pearson",
]


@dataclass(frozen=True)
class BucketRecord:
    """Object-arm bucket signal and reference-arm (total speckle intensity) signal."""

    bucket: TimeSeries
    reference: TimeSeries

    def __post_init__(self):
        if len(self.bucket) != len(self.reference):
            raise InvalidInputError("bucket and reference lengths differ")
        if self.bucket.fs != self.reference.fs:
            raise InvalidInputError("bucket and reference sampling rates differ")

    @property
    def fs(self) -> float:
        return self.bucket.fs

    def __len__(self) -> int:
        return len(self.bucket)


def bucket_measure(
    speckles: SpeckleSequence,
    frames: FrameSequence,
    detector_noise_sigma: float = 0.0,
    seed: int = 0,
) -> BucketRecord:
    """Simulate single-pixel detection of ``frames`` under ``speckles``.

    Pattern ``t`` illuminates frame ``t``.  Detector noise is relative: the
    bucket reading is multiplied by ``1 + eps_t`` with
    ``eps_t ~ N(0, detector_noise_sigma**2)``, so it scales with the
    collected intensity (an all-dark scene stays exactly zero).
    """
    if speckles.shape != frames.shape:
        raise InvalidInputError(f"speckle shape {speckles.shape} != frame shape {frames.shape}")
    if len(speckles) != len(frames):
        raise InvalidInputError(
            f"need one pattern per frame: {len(speckles)} patterns, {len(frames)} frames"
        )
    if detector_noise_sigma < 0:
        raise InvalidInputError("detector_noise_sigma must be >= 0")
    pats, frm = speckles.patterns, frames.frames
    bucket = np.einsum("nij,nij->n", pats, frm)
    if detector_noise_sigma > 0:
        eps = np.random.default_rng(seed).standard_normal(bucket.size)
        bucket = bucket * (1 + detector_noise_sigma * eps)
    reference = pats.sum(axis=(1, 2))
    return BucketRecord(TimeSeries(bucket, frames.fs), TimeSeries(reference, frames.fs))


def dgi_reconstruct(
    rec: BucketRecord, speckles: SpeckleSequence, formula: str = "canonical"
) -> np.ndarray:
    """Differential ghost imaging.

    ``canonical``: ``<I B> - (<B>/<B'>) <I B'>``, the standard DGI estimator.
    ``literal``: ``<I B> (1 - <B>/<B'>)``, i.e. the scalar-factor form.
    ``<.>`` is the mean over patterns.  Returns an ``(H, W)`` image.
    """
    if formula not in ("canonical", "literal"):
        raise InvalidInputError(f"formula must be 'canonical' or 'literal', got {formula!r}")
    n = len(speckles)
    if n < 2:
        raise InvalidInputError("DGI needs at least 2 patterns")
    if len(rec) != n:
        raise InvalidInputError(f"record has {len(rec)} samples for {n} patterns")
    b = rec.bucket.samples
    r = rec.reference.samples
    pats = speckles.patterns
    ib = np.tensordot(b, pats, axes=1) / n
    ratio = b.mean() / r.mean()
    if formula == "literal":
        return ib * (1 - ratio)
    ir = np.tensordot(r, pats, axes=1) / n
    return ib - ratio * ir


def normalize_bucket(rec: BucketRecord) -> TimeSeries:
    """Divide the bucket by the reference to cancel pattern-energy fluctuations."""
    r = rec.reference.samples
    if np.any(r <= 0):
        raise InvalidInputError("reference must be strictly positive to normalise")
    return rec.bucket.with_samples(rec.bucket.samples / r)


def pearson(a, b) -> float:
    """Pearson correlation of two arrays of equal size (flattened)."""
    a = np.ravel(np.asarray(a, dtype=np.float64))
    b = np.ravel(np.asarray(b, dtype=np.float64))
    if a.size != b.size:
        raise InvalidInputError("pearson: size mismatch")
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
    if denom == 0:
        return 0.0
    return float(np.dot(a, b) / denom)

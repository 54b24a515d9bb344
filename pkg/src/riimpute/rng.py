"""Deterministic random number streams and the distribution samplers built on them.

A stream is identified by a ``(seed, stream_id)`` pair fed to a counter-based
Philox generator, so distinct pairs give statistically independent sequences
and equal pairs reproduce draws bit for bit. All samplers take the stream
explicitly; nothing in the package touches global random state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParameter

_U64 = 2**64
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(state: int) -> int:
    state = (state + _SPLITMIX_GAMMA) % _U64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % _U64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % _U64
    return z ^ (z >> 31)


def mix_stream_id(*parts: int | str) -> int:
    """Fold integers and strings into one 64-bit stream id.

    Platform independent (does not use python's salted ``hash``), so derived
    stream ids are stable across runs and machines.
    """
    acc = 0
    for part in parts:
        if isinstance(part, str):
            for byte in part.encode("utf-8"):
                acc = _splitmix64(acc ^ byte)
        else:
            acc = _splitmix64(acc ^ (int(part) % _U64))
    return acc


@dataclass
class RngStream:
    """A named random stream: ``(seed, stream_id)`` keys a Philox generator.

    The identity fields never change; the wrapped generator advances as draws
    are consumed. Two freshly built streams with equal keys yield identical
    sequences.
    """

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < _U64:
                raise InvalidParameter(f"{name} must be an unsigned 64-bit integer, got {value}")

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            key = np.array([self.seed, self.stream_id], dtype=np.uint64)
            self._generator = np.random.Generator(np.random.Philox(key=key))
        return self._generator

    def child(self, *parts: int | str) -> "RngStream":
        """Derive an independent stream keyed by this stream's id and `parts`."""
        return RngStream(self.seed, mix_stream_id(self.stream_id, *parts))


def sample_normal(mean, variance, rng: RngStream, size: int | None = None):
    """Draw from N(mean, variance); variance 0 returns the mean exactly."""
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0) or not np.all(np.isfinite(variance)):
        raise InvalidParameter("variance must be finite and >= 0")
    shape = size if size is not None else np.broadcast(mean, variance).shape
    z = rng.generator.standard_normal(shape)
    out = mean + np.sqrt(variance) * z
    return float(out) if out.ndim == 0 else out


def sample_mvnormal(mean, covariance, rng: RngStream) -> np.ndarray:
    """Draw one vector from a multivariate normal with PSD covariance.

    Uses a symmetric eigendecomposition so that singular covariances (including
    the zero matrix, which returns the mean exactly) are handled.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    p = mean.shape[0]
    if cov.shape != (p, p):
        raise DimensionMismatch(f"covariance shape {cov.shape} does not match mean length {p}")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-8 * max(1.0, float(np.abs(cov).max(initial=0.0)))):
        raise InvalidParameter("covariance must be symmetric")
    eigvals, eigvecs = np.linalg.eigh(0.5 * (cov + cov.T))
    floor = -1e-8 * max(1.0, float(eigvals.max(initial=0.0)))
    if eigvals.min(initial=0.0) < floor:
        raise InvalidParameter("covariance must be positive semidefinite")
    root = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    return mean + root @ rng.generator.standard_normal(p)


def sample_scaled_inv_chi2(df: float, scale: float, rng: RngStream, size: int | None = None):
    """Draw scale*df / chi2(df), the scaled inverse chi-square distribution."""
    if df <= 0 or not np.isfinite(df):
        raise InvalidParameter("df must be positive")
    if scale <= 0 or not np.isfinite(scale):
        raise InvalidParameter("scale must be positive")
    draw = scale * df / rng.generator.chisquare(df, size=size)
    return float(draw) if size is None else draw


def sample_bernoulli(p, rng: RngStream, size: int | None = None):
    """Draw 0/1 with success probability p; exact at p = 0 and p = 1."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise InvalidParameter("p must lie in [0, 1]")
    shape = size if size is not None else p.shape
    u = rng.generator.random(shape)
    out = (u < p).astype(np.int8)
    return int(out) if out.ndim == 0 else out

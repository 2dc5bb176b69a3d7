"""Small input-validation helpers used by the public API."""

import os

import numpy as np

from .errors import ConfigError, DomainError, ShapeError

RngLike = int | np.random.Generator | np.random.SeedSequence | None


def as_rng(seed: RngLike) -> np.random.Generator:
    """Coerce an int seed, SeedSequence, Generator, or None to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def check_positive_int(name: str, value) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value <= 0:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_nonnegative(name: str, value) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")
    return value


def check_signal(sig) -> np.ndarray:
    """Accept a 1-D array (or object with .samples) of samples, return complex128."""
    samples = getattr(sig, "samples", sig)
    arr = np.asarray(samples)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"expected a nonempty 1-D sample array, got shape {arr.shape}")
    return arr.astype(np.complex128, copy=False)


def check_image_batch(X, image_hw: tuple[int, int] | None = None) -> np.ndarray:
    """Validate a batch of single-channel images, shape (n, h, w)."""
    arr = np.asarray(X)
    if arr.ndim != 3:
        raise ShapeError(f"expected image batch of shape (n, h, w), got {arr.shape}")
    if image_hw is not None and arr.shape[1:] != tuple(image_hw):
        raise ShapeError(f"expected images of shape {image_hw}, got {arr.shape[1:]}")
    if not np.isfinite(arr).all():
        raise DomainError("image batch contains non-finite values")
    return arr


def check_labels(y, n_samples: int) -> np.ndarray:
    arr = np.asarray(y)
    if arr.shape != (n_samples,):
        raise ShapeError(f"expected {n_samples} labels, got shape {arr.shape}")
    return arr


def resolve_n_jobs(requested: int | None = None) -> int:
    """Worker count for sample generation, capped by the SATJAM_THREADS env var."""
    env = os.environ.get("SATJAM_THREADS")
    cap = None
    if env is not None:
        try:
            cap = max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"SATJAM_THREADS must be an integer, got {env!r}") from exc
    if requested is None:
        return cap or 1
    requested = check_positive_int("n_jobs", requested)
    return min(requested, cap) if cap else requested

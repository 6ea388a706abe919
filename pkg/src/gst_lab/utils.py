import hashlib
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Stream ids for derive_rng; every consumer of randomness owns one.
LEVY_PATH_STREAM = 1
GST_PATH_STREAM = 2
KATO_STREAM = 3
FEYNMAN_KAC_STREAM = 4
THINNING_STREAM = 5
SAMPLE_TIME_STREAM = 6


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """
    Build an independent generator from a master seed and a counter key.

    The key is used as the SeedSequence spawn key, so streams for different
    keys never overlap and do not depend on the order they are requested in.

    Args:
        master_seed (int): Seed recorded in every run header
        *key (int): Counter path, e.g. (stream_id, path_index)

    Returns:
        np.random.Generator: PCG64 generator for this key
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(seed, *key: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return derive_rng(seed, *key)


@dataclass(frozen=True)
class EnsembleMoments:
    """Sample moments over the paths that carry a value."""

    count: int
    mean: float
    stdev: float

    @property
    def standard_error(self) -> float:
        return self.stdev / math.sqrt(self.count) if self.count > 1 else 0.0


def ensemble_moments(values) -> EnsembleMoments:
    """
    Mean and sample standard deviation of an ensemble, skipping non-finite entries.

    Paths that exited before the observation time are passed as NaN, so the
    count is the number of surviving paths.
    """
    arr = np.asarray(values, dtype=float).ravel()
    arr = arr[np.isfinite(arr)]
    mean = float(arr.mean()) if arr.size else 0.0
    stdev = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return EnsembleMoments(int(arr.size), mean, stdev)


def config_hash(text: str) -> str:
    """SHA-256 of a canonical config text, shortened to 16 hex digits."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def save_csv(path: str, columns: Sequence[str], rows, header_lines: Sequence[str] = ()):
    """
    Write a numeric table with a comment header.

    Args:
        path (str): Output file path
        columns (Sequence[str]): Column names, written as the last header line
        rows: 2-D array-like with len(columns) columns
        header_lines (Sequence[str]): Metadata lines written before the column names
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    data = np.asarray(rows, dtype=float)
    if data.ndim == 1:
        data = data.reshape(-1, len(columns))
    header = "\n".join([*header_lines, ",".join(columns)])
    np.savetxt(path, data, delimiter=",", header=header, comments="# ", fmt="%.17g")


def load_csv(path: str) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", comments="#"))


def dyadic_scales(lower: float, upper: float) -> np.ndarray:
    """Dyadic radii 2^-k lying in [lower, upper], in decreasing order."""
    if not (0 < lower < upper):
        return np.empty(0)
    k_min = int(np.ceil(-np.log2(upper)))
    k_max = int(np.floor(-np.log2(lower)))
    return 2.0 ** -np.arange(k_min, k_max + 1, dtype=float)

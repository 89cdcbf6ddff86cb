"""Ground-truth channels, Toeplitz training matrices, and noisy observations.

The channel is a length-L tap vector with T dominant complex-Gaussian taps
(Rayleigh-fading magnitudes) at uniformly random positions and exact zeros
elsewhere. The training matrix is built from a length N+L-1 i.i.d. probe
sequence arranged with constant diagonals (linear-convolution structure);
probe entries have variance 1/N so every column has unit expected squared
norm. All generators take explicit seeds and are bit-reproducible.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import hermitian, hermitian_eig_extremes

TRAINING_DISTRIBUTIONS = ("gaussian", "rademacher", "complex_gaussian")

# Nonzero values of the fixed five-tap demo channel.
DEMO_TAP_VALUES = (
    0.8 + 0.4j,
    -0.5 + 0.7j,
    -0.1 + 0.15j,
    0.6 - 0.3j,
    -0.8 - 0.7j,
)
DEMO_CHANNEL_LENGTH = 60


@dataclass(frozen=True)
class SparseChannel:
    """Length-L tap vector, zero exactly off the dominant-tap support."""

    length: int
    taps: np.ndarray
    support: tuple[int, ...]
    sparsity: int

    def __post_init__(self):
        if self.taps.shape != (self.length,):
            raise ValueError("taps length does not match channel length")
        if len(self.support) != self.sparsity:
            raise ValueError("support size does not match sparsity")


@dataclass(frozen=True)
class ToeplitzTraining:
    """N x L training matrix with matrix[i, j] = probe[i - j + L - 1]."""

    N: int
    L: int
    probe: np.ndarray
    matrix: np.ndarray
    distribution: str
    seed: int


@dataclass(frozen=True)
class Observation:
    """Received vector y = X h + z with recorded noise level and seed."""

    y: np.ndarray
    noise_variance: float
    snr_db: float
    rng_seed: int


@dataclass(frozen=True)
class MeasurementBudget:
    T: int
    p: int
    c: float
    n_min: int


@dataclass(frozen=True)
class RicEstimate:
    """Restricted isometry constant of order T.

    `delta` is the raw max over the enumerated supports of
    max(1 - lambda_min, lambda_max - 1) of the support Gram matrix; values
    >= 1 mean the isometry property is violated at this order
    (`rip_violated`). `exact` is False when only a sampled subset of
    supports was enumerated, in which case `delta` is a lower bound.
    """

    order: int
    delta: float
    rip_violated: bool
    exact: bool
    supports_checked: int
    per_support_extremes: tuple[tuple[tuple[int, ...], float, float], ...] = field(repr=False)


def generate_sparse_channel(L: int, T: int, seed: int) -> SparseChannel:
    """Draw a T-sparse channel: uniform random support, unit-variance
    circular complex Gaussian dominant taps."""
    if not 1 <= T <= L:
        raise ValueError(f"need 1 <= T <= L, got T={T}, L={L}")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(L, size=T, replace=False))
    taps = np.zeros(L, dtype=np.complex128)
    values = (rng.standard_normal(T) + 1j * rng.standard_normal(T)) / math.sqrt(2.0)
    taps[support] = values
    return SparseChannel(length=L, taps=taps, support=tuple(int(i) for i in support), sparsity=T)


def fixed_channel_figure_demo(seed: int = 0) -> SparseChannel:
    """The five-tap demo channel: fixed coefficient values, seed-determined
    positions on a length-60 channel."""
    L = DEMO_CHANNEL_LENGTH
    values = np.asarray(DEMO_TAP_VALUES, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(L, size=len(values), replace=False))
    taps = np.zeros(L, dtype=np.complex128)
    taps[support] = values
    return SparseChannel(
        length=L, taps=taps, support=tuple(int(i) for i in support), sparsity=len(values)
    )


def build_toeplitz_training(
    N: int, L: int, distribution: str = "gaussian", seed: int = 0
) -> ToeplitzTraining:
    """Build the N x L constant-diagonal training matrix from a fresh probe.

    Probe entries are i.i.d. with variance 1/N: real Gaussian by default,
    "rademacher" gives +-1/sqrt(N), "complex_gaussian" gives circular
    complex Gaussian entries.
    """
    if N < 1 or L < 1:
        raise ValueError(f"need N >= 1 and L >= 1, got N={N}, L={L}")
    if distribution not in TRAINING_DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}; choose from {TRAINING_DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    size = N + L - 1
    scale = 1.0 / math.sqrt(N)
    if distribution == "gaussian":
        probe = rng.standard_normal(size) * scale
    elif distribution == "rademacher":
        probe = (2.0 * rng.integers(0, 2, size=size) - 1.0) * scale
    else:
        probe = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * (
            scale / math.sqrt(2.0)
        )
    rows = np.arange(N)[:, None]
    cols = np.arange(L)[None, :]
    matrix = probe[rows - cols + L - 1]
    return ToeplitzTraining(N=N, L=L, probe=probe, matrix=matrix, distribution=distribution, seed=seed)


def observe(X: ToeplitzTraining, h: SparseChannel, snr_db: float, seed: int) -> Observation:
    """Form y = X h + z at the requested per-sample SNR.

    Noise variance is sigma^2 = ||X h||^2 / (N * 10^(snr_db/10)), i.e. SNR is
    per-sample signal power over total complex noise variance, independent
    of N. snr_db = +inf yields the noiseless y = X h.
    """
    if X.L != h.length:
        raise ValueError(f"training matrix has L={X.L} but channel has length {h.length}")
    signal = X.matrix @ h.taps
    if math.isinf(snr_db) and snr_db > 0:
        return Observation(y=signal, noise_variance=0.0, snr_db=snr_db, rng_seed=seed)
    sigma2 = float(np.linalg.norm(signal) ** 2) / (X.N * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(X.N) + 1j * rng.standard_normal(X.N)) * math.sqrt(sigma2 / 2.0)
    return Observation(y=signal + z, noise_variance=sigma2, snr_db=snr_db, rng_seed=seed)


def measurement_budget(T: int, p: int, c: float = 2.0) -> MeasurementBudget:
    """Minimum training length n_min = ceil(c * T * ln(p/T))."""
    if not 1 <= T < p:
        raise ValueError(f"need 1 <= T < p, got T={T}, p={p}")
    if c <= 0:
        raise ValueError(f"need c > 0, got c={c}")
    n_min = math.ceil(c * T * math.log(p / T))
    return MeasurementBudget(T=T, p=p, c=c, n_min=n_min)


def restricted_isometry_constant(
    X: ToeplitzTraining, T: int, max_supports: int = 100_000, seed: int = 0
) -> RicEstimate:
    """Isometry constant of order T by support enumeration.

    Enumerates every size-T column subset when the count fits within
    `max_supports` (exact result); otherwise evaluates a uniform random
    sample of supports and flags the estimate as a lower bound. Each
    support contributes the eigenvalue extremes of its Gram matrix.
    """
    if not 1 <= T <= X.L:
        raise ValueError(f"need 1 <= T <= L, got T={T}, L={X.L}")
    total = math.comb(X.L, T)
    if total <= max_supports:
        supports = itertools.combinations(range(X.L), T)
        exact = True
        count = total
    else:
        rng = np.random.default_rng(seed)
        supports = (
            tuple(int(i) for i in np.sort(rng.choice(X.L, size=T, replace=False)))
            for _ in range(max_supports)
        )
        exact = False
        count = max_supports

    delta = 0.0
    table = []
    for support in supports:
        cols = X.matrix[:, list(support)]
        gram = hermitian(cols) @ cols
        lo, hi = hermitian_eig_extremes(gram)
        table.append((tuple(support), lo, hi))
        delta = max(delta, 1.0 - lo, hi - 1.0)
    return RicEstimate(
        order=T,
        delta=float(delta),
        rip_violated=delta >= 1.0,
        exact=exact,
        supports_checked=count,
        per_support_extremes=tuple(table),
    )


def save_taps_csv(path, taps: np.ndarray) -> None:
    """Write a tap vector as rows of (index, real, imag)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "real", "imag"])
        for i, v in enumerate(taps):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_taps_csv(path) -> np.ndarray:
    """Read a tap vector written by save_taps_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["index", "real", "imag"]:
            raise ValueError(f"unexpected tap CSV header: {header}")
        entries = {int(row[0]): float(row[1]) + 1j * float(row[2]) for row in reader}
    taps = np.zeros(max(entries) + 1 if entries else 0, dtype=np.complex128)
    for i, v in entries.items():
        taps[i] = v
    return taps


def save_matrix_csv(path, matrix: np.ndarray) -> None:
    """Write a dense matrix as rows of (row, col, real, imag)."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "real", "imag"])
        for i in range(matrix.shape[0]):
            for j in range(matrix.shape[1]):
                v = complex(matrix[i, j])
                writer.writerow([i, j, repr(v.real), repr(v.imag)])

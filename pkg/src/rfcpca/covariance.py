"""Lag-indexed second-order summaries of multivariate time series.

Every series is reduced to, per lag l = 1..L, a 2p x 2p block covariance
matrix and a (T - l) x 2p lagged embedding.  Cluster subspaces are the top
eigenvectors of membership-weighted averages of the block matrices.

Conventions (fixed once, used everywhere):

* covariances are normalised by T (not T - l, not T - 1), so the lag-0
  block is the same matrix in every lag structure;
* per-channel means are computed once over the full series and reused for
  both the covariances and the lagged embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateWeights,
    DimensionMismatch,
    EigFailure,
    LagTooLarge,
    NonFiniteInput,
)

DEFAULT_MAX_LAG = 2
DEFAULT_VARIANCE_FRACTION = 0.95

# eigenvalues below this multiple of the largest one count as rank-deficient
_RANK_EPS = 1e-10


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionMismatch(f"expected a T x p series, got shape {x.shape}")
    return x


def lagged_cross_covariance(x, lag: int) -> np.ndarray:
    """Lag-l cross-covariance matrix of a T x p series.

    Entry (a, b) is (1/T) * sum_{t=1..T-l} (x[t,a] - mu_a) * (x[t+l,b] - mu_b),
    with mu the full-series column means.  The lag-0 matrix is symmetrised so
    mirrored entries are bitwise equal.
    """
    x = _as_series(x)
    t = x.shape[0]
    if not np.isfinite(x).all():
        raise NonFiniteInput("series contains NaN or Inf entries")
    if lag < 0:
        raise ValueError("lag must be nonnegative")
    if lag >= t:
        raise LagTooLarge(f"lag {lag} >= series length {t}")
    xc = x - x.mean(axis=0)
    cov = xc[: t - lag].T @ xc[lag:] / t
    if lag == 0:
        cov = (cov + cov.T) / 2.0
    return cov


def block_covariance(x, lag: int) -> np.ndarray:
    """2p x 2p block matrix [[G(0), G(l)], [G(l)^T, G(0)]] for one series."""
    if lag < 1:
        raise ValueError("block covariance needs lag >= 1")
    g0 = lagged_cross_covariance(x, 0)
    gl = lagged_cross_covariance(x, lag)
    return np.block([[g0, gl], [gl.T, g0]])


def lagged_embedding(x, lag: int) -> np.ndarray:
    """(T - l) x 2p matrix whose row t is [x_t, x_{t+l}], mean-centered.

    Centering uses the same full-series column means as the covariances.
    """
    x = _as_series(x)
    t = x.shape[0]
    if lag < 1:
        raise ValueError("lagged embedding needs lag >= 1")
    if lag >= t:
        raise LagTooLarge(f"lag {lag} >= series length {t}")
    xc = x - x.mean(axis=0)
    return np.hstack([xc[: t - lag], xc[lag:]])


def lagged_blocks(x, max_lag: int = DEFAULT_MAX_LAG) -> np.ndarray:
    """Stack of block covariance matrices for lags 1..max_lag, shape (L, 2p, 2p)."""
    return np.stack([block_covariance(x, lag) for lag in range(1, max_lag + 1)])


def lagged_embeddings(x, max_lag: int = DEFAULT_MAX_LAG) -> list[np.ndarray]:
    """Lagged embeddings for lags 1..max_lag (row counts differ per lag)."""
    return [lagged_embedding(x, lag) for lag in range(1, max_lag + 1)]


def embedding_grams(x, max_lag: int = DEFAULT_MAX_LAG):
    """Per-lag Gram matrices G(l) = Xhat(l)^T Xhat(l) and total energies.

    The Gram form lets reconstruction errors be evaluated without touching
    the raw embedding again: |Xhat C|_F^2 = trace(C^T G C).
    """
    grams = []
    energies = []
    for emb in lagged_embeddings(x, max_lag):
        g = emb.T @ emb
        g = (g + g.T) / 2.0
        grams.append(g)
        energies.append(float(np.trace(g)))
    return np.stack(grams), np.asarray(energies)


def weighted_common_covariance(blocks, u_col, m: float) -> np.ndarray:
    """Membership-weighted average sum_i u_i^m B_i / sum_i u_i^m.

    ``blocks`` is an (N, d, d) stack of symmetric matrices at one lag and
    ``u_col`` the membership column for one cluster.
    """
    blocks = np.asarray(blocks, dtype=float)
    w = np.asarray(u_col, dtype=float) ** m
    if blocks.ndim != 3 or blocks.shape[0] != w.shape[0]:
        raise DimensionMismatch("blocks and weights disagree on the number of series")
    total = w.sum()
    if total < 1e-12:
        raise DegenerateWeights("membership weights sum to zero")
    return np.tensordot(w, blocks, axes=(0, 0)) / total


def common_axes(sigma, v: float = DEFAULT_VARIANCE_FRACTION) -> np.ndarray:
    """Orthonormal axes for the k largest eigenvalues of a symmetric matrix.

    k is the smallest count whose eigenvalues capture at least a fraction
    ``v`` of the total positive spectrum (negative eigenvalues are clamped
    to zero, a roundoff guard for averages of PSD matrices).  Each column's
    sign is normalised so its largest-magnitude entry is positive.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {sigma.shape}")
    if np.abs(sigma - sigma.T).max() > 1e-8:
        raise ValueError("matrix is not symmetric within 1e-8")
    if not 0.0 < v <= 1.0:
        raise ValueError("variance fraction must lie in (0, 1]")
    try:
        evals, evecs = np.linalg.eigh(sigma)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare LAPACK failure
        raise EigFailure(str(exc)) from exc
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    lam = np.clip(evals, 0.0, None)
    top = lam.max(initial=0.0)
    lam[lam < _RANK_EPS * top] = 0.0
    cum = np.cumsum(lam)
    if cum[-1] <= 0.0:
        k = 1
    else:
        k = int(np.searchsorted(cum, v * cum[-1], side="left")) + 1
        k = min(max(k, 1), sigma.shape[0])
    axes = evecs[:, :k].copy()
    peak = np.argmax(np.abs(axes), axis=0)
    signs = np.sign(axes[peak, np.arange(k)])
    signs[signs == 0] = 1.0
    return axes * signs


def reconstruction_error(embeddings, axes) -> float:
    """Squared Frobenius distance between embeddings and their projections.

    r^2 = sum_l |Xhat(l) - Xhat(l) C(l) C(l)^T|_F^2 over matching lags.
    """
    if len(embeddings) != len(axes):
        raise DimensionMismatch("embeddings and axes cover different lags")
    total = 0.0
    for emb, c in zip(embeddings, axes):
        emb = np.asarray(emb, dtype=float)
        c = np.asarray(c, dtype=float)
        if emb.shape[1] != c.shape[0]:
            raise DimensionMismatch(
                f"embedding has {emb.shape[1]} columns but axes have {c.shape[0]} rows"
            )
        resid = emb - (emb @ c) @ c.T
        total += float((resid * resid).sum())
    return total


@dataclass
class ClusterSubspaces:
    """Per-cluster, per-lag orthonormal axes and the retained-variance level.

    ``axes[s][l]`` is the 2p x k_{s,l} axis matrix for cluster s at lag
    index l (lag l+1).  Prototypes are the projectors C C^T, which compare
    clusters independently of their (possibly different) ranks.
    """

    axes: list = field(default_factory=list)
    variance_fraction: float = DEFAULT_VARIANCE_FRACTION

    @property
    def n_clusters(self) -> int:
        return len(self.axes)

    @property
    def n_lags(self) -> int:
        return len(self.axes[0]) if self.axes else 0

    def projector(self, s: int, lag_index: int) -> np.ndarray:
        c = self.axes[s][lag_index]
        return c @ c.T

    def projectors(self, s: int) -> list[np.ndarray]:
        return [self.projector(s, j) for j in range(self.n_lags)]

    def ranks(self) -> list[list[int]]:
        return [[c.shape[1] for c in per_lag] for per_lag in self.axes]

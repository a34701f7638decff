"""Dense snapshots of time-t operators and norm/spectrum estimates.

Assembly materializes the action on the canonical sample basis.  Read-based
families fill their two-band interpolation matrix directly; the generic path
applies the family to every basis vector.  Both produce the same matrix (the
agreement is covered by tests), the direct fill is just cheaper.

Operator norms are taken in the weighted norm of the originating space.  For
the integral 1-norm and the weighted sup norm the induced norm of a matrix
has a closed form after conjugating by the diagonal weight factors; for the
integral 2-norm it is the spectral norm of the conjugated matrix; for other
exponents a documented maximization heuristic reports a certified lower
bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MatrixSizeError, NumericError
from .operators import (DiagonalFamily, DirectSumFamily, OperatorFamily,
                        RotatedFamily)
from .spaces import GridFunction, WeightedGridSpace, _read_weights

__all__ = [
    "OperatorMatrix",
    "assemble_matrix",
    "spectral_radius_estimate",
    "operator_norm_estimate",
    "MATRIX_CAP",
]

#: Largest grid for which dense assembly is supported.
MATRIX_CAP = 4096


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    t: float
    space: WeightedGridSpace

    def __post_init__(self):
        n = self.space.n
        if self.entries.shape != (n, n):
            raise MatrixSizeError(
                f"matrix shape {self.entries.shape} does not match n={n}")
        self.entries.flags.writeable = False

    def matvec(self, f: GridFunction) -> GridFunction:
        self.space._check_member(f)
        return GridFunction(self.entries @ f.values, self.space, f.truncated)

    def minus_identity(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries - np.eye(self.space.n, dtype=complex),
                              self.t, self.space)


def assemble_matrix(family: OperatorFamily, t: float,
                    cap: int = MATRIX_CAP) -> OperatorMatrix:
    """Dense matrix of the time-t operator; refuses grids beyond ``cap``."""
    if isinstance(family, DirectSumFamily):
        raise MatrixSizeError("dense assembly of product families is not supported")
    space = family.space
    if space.n > cap:
        raise MatrixSizeError(
            f"grid of size {space.n} exceeds the dense assembly cap {cap}")
    if isinstance(family, RotatedFamily):
        inner = assemble_matrix(family.base, t, cap)
        return OperatorMatrix(family.scalar * inner.entries, t, space)
    if isinstance(family, DiagonalFamily):
        return OperatorMatrix(np.diag(family.phases(t)).astype(complex), t, space)
    pts = family.read_points(t)
    if pts is not None:
        idx, frac, inside = _read_weights(space, pts)
        upper = np.minimum(idx + 1, space.n - 1)
        m = np.zeros((space.n, space.n), dtype=complex)
        rows = np.arange(space.n)
        np.add.at(m, (rows, idx), np.where(inside, 1.0 - frac, 0.0))
        np.add.at(m, (rows, upper), np.where(inside, frac, 0.0))
        return OperatorMatrix(m, t, space)
    cols = []
    for j in range(space.n):
        e = np.zeros(space.n, dtype=complex)
        e[j] = 1.0
        cols.append(family.apply(t, GridFunction(e, space)).values)
    return OperatorMatrix(np.stack(cols, axis=1), t, space)


def spectral_radius_estimate(m: OperatorMatrix, iters: int = 1000,
                             tol: float = 1e-8, seed: int = 0
                             ) -> tuple[float, bool]:
    """Dominant |eigenvalue| estimate by power iteration.

    Convergence means the last ten growth-ratio estimates agree to relative
    ``tol``.  A vector annihilated during the iteration certifies (for the
    iterate count reached) a nilpotent-like collapse and reports radius zero
    as converged.  NaN or overflow raises :class:`NumericError`.
    """
    n = m.space.n
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    history: list[float] = []
    est = 0.0
    for _ in range(iters):
        w = m.entries @ v
        nw = float(np.linalg.norm(w))
        if not np.isfinite(nw):
            raise NumericError("power iteration produced non-finite values")
        if nw == 0.0:
            return 0.0, True
        est = nw
        history.append(est)
        if len(history) >= 10:
            recent = history[-10:]
            spread = (max(recent) - min(recent)) / max(recent)
            if spread < tol:
                return est, True
        v = w / nw
    return est, False


def _two_norm(b: np.ndarray, iters: int = 200, tol: float = 1e-10,
              seed: int = 0) -> float:
    """Spectral norm; exact SVD for small matrices, power iteration above."""
    n = b.shape[0]
    if n <= 1024:
        return float(np.linalg.norm(b, 2))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    bh = b.conj().T
    last = 0.0
    for _ in range(iters):
        w = bh @ (b @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        sigma = np.sqrt(nw)
        if abs(sigma - last) <= tol * max(sigma, 1.0):
            return sigma
        last = sigma
        v = w / nw
    return last


def operator_norm_estimate(m: OperatorMatrix, samples: int = 32,
                           iters: int = 40, seed: int = 0) -> float:
    """Operator norm of the matrix in the weighted norm of its space.

    Exact (closed form) for the integral 1-norm and the weighted sup norm,
    spectral norm of the reweighted matrix for exponent two.  For other
    exponents: iterated maximization over random directions refined by a
    dual-norm fixed-point step; the returned value is a certified lower
    bound and a documented heuristic for the upper bound.
    """
    space = m.space
    a = np.abs(m.entries)
    rho = space.weight_samples
    if space.mode == "c0sup":
        return float(np.max(rho * (a @ (1.0 / rho))))
    d = rho * space.quad_weights
    if space.p == 1.0:
        return float(np.max((d @ a) / d))
    if space.p == 2.0:
        scale = np.sqrt(d)
        b = (scale[:, None] * m.entries) / scale[None, :]
        return _two_norm(b, seed=seed)
    p = space.p
    q = p / (p - 1.0)
    rng = np.random.default_rng(seed)

    def pnorm(v):
        return float(np.sum(np.abs(v) ** p * d) ** (1.0 / p))

    def unit_phase(v):
        mag = np.abs(v)
        return np.where(mag > 0, v / np.where(mag > 0, mag, 1.0), 0.0)

    best = 0.0
    for _ in range(samples):
        v = rng.standard_normal(space.n) + 1j * rng.standard_normal(space.n)
        v /= pnorm(v)
        for _ in range(iters):
            w = m.entries @ v
            nw = pnorm(w)
            if nw == 0.0:
                break
            best = max(best, nw)
            # dual-norm ascent step for the induced p-norm
            z = unit_phase(w) * np.abs(w) ** (p - 1.0)
            u = m.entries.conj().T @ (z * d)
            cand = unit_phase(u) * np.abs(u) ** (q - 1.0)
            denom = pnorm(cand)
            if denom == 0.0:
                break
            v = cand / denom
    return best

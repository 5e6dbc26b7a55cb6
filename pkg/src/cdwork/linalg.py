"""Dense Hermitian linear algebra for small systems.

Everything here accepts stacked input: an operator may have shape ``(N, N)``
or ``(..., N, N)`` and a state ``(N,)`` or ``(..., N)``; leading axes are
treated as a batch. Eigenvectors are stored as columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotConverged,
    NotHermitian,
)

HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-10
DEGENERACY_RTOL = 1e-10
# components within this relative margin of the largest one count as tied
_GAUGE_TIE_RTOL = 1e-12


def as_hermitian(matrix, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return ``matrix`` as a complex array after checking it is Hermitian."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {a.shape}")
    if a.shape[-1] < 2:
        raise DimensionMismatch("operators must have dimension >= 2")
    dev = np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2)))) if a.size else 0.0
    if dev > atol:
        raise NotHermitian(f"asymmetry {dev:.3e} exceeds {atol:.1e}")
    return a


def as_state(vector, atol: float = NORM_ATOL) -> np.ndarray:
    """Return ``vector`` as a complex array after checking unit norm."""
    v = np.asarray(vector, dtype=complex)
    if v.ndim < 1:
        raise DimensionMismatch("a state must be at least one-dimensional")
    norms = np.linalg.norm(v, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise ValueError(f"state not normalized (norm {np.max(norms):.15g})")
    return v


def _check_dims(op: np.ndarray, state: np.ndarray) -> None:
    if op.shape[-1] != state.shape[-1]:
        raise DimensionMismatch(
            f"operator dimension {op.shape[-1]} vs state dimension {state.shape[-1]}"
        )


def jacobi_eigh(matrix, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize Hermitian matrices with cyclic complex Jacobi rotations.

    Each (p, q) rotation first removes the phase of ``a[p, q]`` with a
    diagonal unitary and then applies the real symmetric Jacobi rotation.
    All matrices in the batch are rotated together; matrices that are
    already diagonal in a given plane get the identity rotation.

    Returns unsorted eigenvalues ``(..., N)`` and eigenvectors as columns
    ``(..., N, N)``.
    """
    a = np.array(matrix, dtype=complex)
    batch_shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape(-1, n, n)
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.linalg.norm(a, axis=(-2, -1))
    offdiag = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[:, offdiag]) ** 2, axis=-1))
        if np.all(off <= 1e-15 * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                mag = np.abs(apq)
                active = mag > 0.0
                safe = np.where(active, mag, 1.0)
                # e^{-i phi} with a_pq = |a_pq| e^{i phi}
                ephase = np.where(active, np.conj(apq) / safe, 1.0)
                zeta = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
                sgn = np.where(zeta >= 0.0, 1.0, -1.0)
                big = np.abs(zeta) > 1e150
                zs = np.where(big, 0.0, zeta)
                t = np.where(big, 0.5 / np.where(big, zeta, 1.0),
                             sgn / (np.abs(zs) + np.sqrt(zs * zs + 1.0)))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cc, ss, ee = c[:, None], s[:, None], ephase[:, None]

                col_p, col_q = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = cc * col_p - ss * ee * col_q
                a[:, :, q] = ss * col_p + cc * ee * col_q
                row_p, row_q = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = cc * row_p - ss * np.conj(ee) * row_q
                a[:, q, :] = ss * row_p + cc * np.conj(ee) * row_q
                a[:, p, q] = np.where(active, 0.0, a[:, p, q])
                a[:, q, p] = np.where(active, 0.0, a[:, q, p])

                vec_p, vec_q = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = cc * vec_p - ss * ee * vec_q
                v[:, :, q] = ss * vec_p + cc * ee * vec_q
    else:
        raise NotConverged(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    return w.reshape(*batch_shape, n), v.reshape(*batch_shape, n, n)


def fix_gauge(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real and positive.

    Ties (within a relative 1e-12) go to the lowest index.
    """
    v = np.array(vectors, dtype=complex)
    mags = np.abs(v)
    peak = np.max(mags, axis=-2, keepdims=True)
    tied = mags >= peak * (1.0 - _GAUGE_TIE_RTOL)
    idx = np.argmax(tied, axis=-2)[..., None, :]
    pivot = np.take_along_axis(v, idx, axis=-2)
    v = v * (np.conj(pivot) / np.abs(pivot))
    # remove round-off imaginary part of the pivot itself
    np.put_along_axis(v, idx, np.abs(np.take_along_axis(v, idx, axis=-2)), axis=-2)
    return v


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and gauge-fixed eigenvectors (columns).

    May hold a stack of decompositions; ``eigenvalues`` then has shape
    ``(..., N)`` and ``eigenvectors`` ``(..., N, N)``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[-1]

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[..., :, k]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))

    def __getitem__(self, index) -> "SpectralDecomposition":
        return SpectralDecomposition(self.eigenvalues[index], self.eigenvectors[index])

    def gaps(self) -> np.ndarray:
        return np.diff(self.eigenvalues, axis=-1)


def eigendecompose(op, degeneracy_tolerance: float | None = None) -> SpectralDecomposition:
    """Spectral decomposition of a (stack of) Hermitian operator(s).

    Raises DegenerateSpectrum when two eigenvalues are closer than
    ``degeneracy_tolerance`` (default ``1e-10`` times the spectral width).
    """
    a = as_hermitian(op)
    w, v = jacobi_eigh(a)
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)

    gaps = np.diff(w, axis=-1)
    if degeneracy_tolerance is None:
        tol = DEGENERACY_RTOL * (w[..., -1] - w[..., 0])
    else:
        tol = np.full(w.shape[:-1], float(degeneracy_tolerance))
    bad = np.any(gaps <= tol[..., None], axis=-1)
    if np.any(bad):
        where = np.argwhere(np.atleast_1d(bad))[0]
        raise DegenerateSpectrum(f"eigenvalue gap below tolerance (batch index {tuple(where)})")
    return SpectralDecomposition(w, fix_gauge(v))


def expectation(op, state) -> np.ndarray | float:
    """Real expectation value <psi|op|psi>; batched over leading axes."""
    a = np.asarray(op, dtype=complex)
    psi = np.asarray(state, dtype=complex)
    _check_dims(a, psi)
    val = np.einsum("...i,...ij,...j->...", np.conj(psi), a, psi)
    scale = np.maximum(1.0, np.max(np.abs(a), axis=(-2, -1)))
    if np.any(np.abs(val.imag) > 1e-10 * scale):
        raise NotHermitian("expectation value has a non-negligible imaginary part")
    val = val.real
    return float(val) if np.ndim(val) == 0 else val


def energy_std(op, state) -> np.ndarray | float:
    """Energy standard deviation sqrt(<H^2> - <H>^2).

    Evaluated as ``||(H - <H>) psi||``, which equals the usual formula for a
    normalized state but does not suffer from cancellation.
    """
    a = np.asarray(op, dtype=complex)
    psi = np.asarray(state, dtype=complex)
    _check_dims(a, psi)
    h_psi = np.einsum("...ij,...j->...i", a, psi)
    mean = np.einsum("...i,...i->...", np.conj(psi), h_psi).real
    val = np.linalg.norm(h_psi - mean[..., None] * psi, axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def trace_norm_product(op, state) -> np.ndarray | float:
    """Trace norm of rho @ op for rho = |psi><psi|, i.e. ||op psi||."""
    a = np.asarray(op, dtype=complex)
    psi = np.asarray(state, dtype=complex)
    _check_dims(a, psi)
    val = np.linalg.norm(np.einsum("...ij,...j->...i", a, psi), axis=-1)
    return float(val) if np.ndim(val) == 0 else val

"""Dense complex linear algebra and entropy primitives.

Operators are plain ``numpy`` arrays of dtype ``complex128``. The helpers
``as_hermitian``, ``as_density`` and ``as_subnormalized`` validate an array
against the corresponding set and return a symmetrized copy.

All entropies are in bits.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from .exceptions import DimensionMismatchError, DomainError, NotPSDError, NumericalFailure

#: eigenvalues at or above this value are treated as roundoff and clipped to 0
PSD_CLIP_TOL = 1e-8
#: relative Moore-Penrose cutoff (times the largest eigenvalue)
PINV_RTOL = 1e-10
#: absolute floor for support detection, so that an all-zero matrix has empty support
PINV_ATOL = 1e-14

_LOG2 = np.log(2.0)


def as_matrix(a, square: bool = False) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def as_hermitian(a) -> np.ndarray:
    """Symmetrize a square matrix, ``(M + M^dagger) / 2``."""
    m = as_matrix(a, square=True)
    return 0.5 * (m + m.conj().T)


def _check_psd(eigenvalues: np.ndarray, what: str = "matrix") -> None:
    if eigenvalues.size and eigenvalues.min() < -PSD_CLIP_TOL:
        raise NotPSDError(f"{what} has eigenvalue {eigenvalues.min():.3e} < -{PSD_CLIP_TOL:g}")


def as_subnormalized(a, tol: float = 1e-10) -> np.ndarray:
    """Validate a subnormalized density operator (PSD, trace at most one)."""
    m = as_hermitian(a)
    w = np.linalg.eigvalsh(m)
    if w.size and w.min() < -tol:
        raise NotPSDError(f"eigenvalue {w.min():.3e} below -{tol:g}")
    tr = float(np.trace(m).real)
    if tr > 1.0 + tol:
        raise DomainError(f"trace {tr:.12g} exceeds 1")
    return m


def as_density(a, tol: float = 1e-10) -> np.ndarray:
    """Validate a density operator (PSD, unit trace)."""
    m = as_subnormalized(a, tol)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > tol:
        raise DomainError(f"trace {tr:.12g} differs from 1")
    return m


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product; row and column dimensions multiply."""
    return np.kron(as_matrix(a), as_matrix(b))


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in descending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.
    """
    h = as_hermitian(m)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(f"eigendecomposition did not converge: {exc}") from exc
    return w[::-1].copy(), v[:, ::-1].copy()


def _default_cutoff(w: np.ndarray, cutoff: float | None) -> float:
    if cutoff is not None:
        return float(cutoff)
    top = float(np.max(np.abs(w))) if w.size else 0.0
    return max(PINV_RTOL * top, PINV_ATOL)


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Roundoff-negative eigenvalues are clipped to zero; eigenvalues below
    ``-PSD_CLIP_TOL`` raise :class:`NotPSDError`.
    """
    w, v = eig_hermitian(m)
    _check_psd(w)
    s = np.sqrt(np.clip(w, 0.0, None))
    return (v * s) @ v.conj().T


def _pinv_power(m, power: float, cutoff: float | None) -> np.ndarray:
    w, v = eig_hermitian(m)
    _check_psd(w)
    c = _default_cutoff(w, cutoff)
    keep = w > c
    f = np.zeros_like(w)
    f[keep] = w[keep] ** power
    return (v * f) @ v.conj().T


def pinv_psd(m, cutoff: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse of a PSD matrix.

    Eigenvalues at or below ``cutoff`` (default ``1e-10`` times the largest
    eigenvalue) are mapped to zero, the rest to their reciprocals.
    """
    return _pinv_power(m, -1.0, cutoff)


def pinv_sqrt_psd(m, cutoff: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse square root ``m^{-1/2}`` of a PSD matrix."""
    return _pinv_power(m, -0.5, cutoff)


def support_and_kernel_projectors(m, cutoff: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Projectors onto the support and the kernel of a PSD matrix.

    Returns ``(P_plus, P_zero)`` with ``P_plus + P_zero = I``.
    """
    w, v = eig_hermitian(m)
    _check_psd(w)
    c = _default_cutoff(w, cutoff)
    vs = v[:, w > c]
    p_plus = vs @ vs.conj().T
    return p_plus, np.eye(len(w)) - p_plus


def kernel_basis(m, cutoff: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of a PSD matrix."""
    w, v = eig_hermitian(m)
    c = _default_cutoff(w, cutoff)
    return v[:, w <= c]


def _entropy_from_eigenvalues(w: np.ndarray) -> float:
    _check_psd(w, "state")
    w = w[w > 0.0]
    return float(-np.sum(w * np.log(w)) / _LOG2)


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy ``-tr rho log2 rho`` in bits, with ``0 log 0 = 0``.

    Accepts subnormalized operators; the formula is applied to the raw
    eigenvalues without renormalization.
    """
    return _entropy_from_eigenvalues(np.linalg.eigvalsh(np.asarray(rho)))


def shannon_entropy(p: Sequence[float]) -> float:
    """Shannon entropy in bits of a probability vector."""
    p = np.asarray(p, dtype=float)
    if p.size and p.min() < -1e-12:
        raise DomainError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise DomainError(f"probabilities sum to {p.sum():.12g}")
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p)))


def binary_entropy(x: float) -> float:
    """Binary entropy ``h(x)`` in bits; ``h(0) = h(1) = 0``."""
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise DomainError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(float(x), 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def matrix_units(d: int) -> Iterator[tuple[int, int, np.ndarray]]:
    """Yield ``(i, j, |i><j|)`` for all ``d**2`` matrix units."""
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            yield i, j, e


def ket(index: int, d: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    """Rank-one projector ``|v><v|`` onto the normalized vector ``v``."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.ravel()
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in flat.real],
        "im": [float(x) for x in flat.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed matrix record: {exc}") from exc
    if re.size != rows * cols or im.size != rows * cols:
        raise DimensionMismatchError(f"expected {rows * cols} entries, got {re.size}/{im.size}")
    return as_matrix((re + 1j * im).reshape(rows, cols))

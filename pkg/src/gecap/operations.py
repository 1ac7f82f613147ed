"""Quantum operations as Kraus maps.

A :class:`KrausMap` stores Kraus operators ``A_k`` of shape
``(dim_out, dim_in)`` and acts as ``rho -> sum_k A_k rho A_k^dagger``. The
same type represents trace-decreasing operations and channels; use
:func:`validate` to classify a map and :func:`check_operation` to enforce
``Lambda^dagger[I] <= I``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    DomainError,
    InvalidOperationError,
    InvalidParametersError,
    NotAnExtensionError,
    NumericalFailure,
    UndefinedConditionalStateError,
)
from .linalg import (
    as_density,
    as_matrix,
    eig_hermitian,
    kernel_basis,
    matrix_from_json,
    matrix_to_json,
    matrix_units,
    pinv_sqrt_psd,
    psd_sqrt,
    support_and_kernel_projectors,
)

#: tolerance for classifying maps and checking map identities
MAP_TOL = 1e-9
#: Kraus operators with Frobenius norm below this are dropped where noted
ZERO_KRAUS_TOL = 1e-12

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Completely positive map given by Kraus operators.

    Parameters
    ----------
    kraus : array_like
        Sequence of ``dim_out x dim_in`` matrices, or a 3-D array of shape
        ``(k, dim_out, dim_in)``.
    """

    kraus: np.ndarray

    def __post_init__(self):
        k = np.array(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None, :, :]
        if k.ndim != 3 or k.shape[0] == 0:
            raise DimensionMismatchError(f"Kraus operators must share one 2-D shape, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise DomainError("Kraus operators have non-finite entries")
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @classmethod
    def from_list(cls, ops: Iterable) -> "KrausMap":
        ops = [as_matrix(a) for a in ops]
        shapes = {a.shape for a in ops}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"Kraus operators have differing shapes {sorted(shapes)}")
        return cls(np.stack(ops))

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def rank(self) -> int:
        """Number of stored Kraus operators."""
        return self.kraus.shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionMismatchError(f"input shape {rho.shape} does not match dim_in={self.dim_in}")
        k = self.kraus
        return np.einsum("kij,jl,kml->im", k, rho, k.conj())

    def dual(self, y: np.ndarray) -> np.ndarray:
        """Heisenberg-picture action ``sum_k A_k^dagger Y A_k``."""
        y = np.asarray(y)
        if y.shape != (self.dim_out, self.dim_out):
            raise DimensionMismatchError(f"dual input shape {y.shape} does not match dim_out={self.dim_out}")
        k = self.kraus
        return np.einsum("kji,jl,klm->im", k.conj(), y, k)

    def pruned(self, tol: float = ZERO_KRAUS_TOL) -> "KrausMap":
        """Copy without negligible Kraus operators (keeps one zero operator for the zero map)."""
        norms = np.linalg.norm(self.kraus, axis=(1, 2))
        keep = norms >= tol
        if not keep.any():
            return KrausMap(np.zeros((1, self.dim_out, self.dim_in)))
        return KrausMap(self.kraus[keep])


class Classification(str, enum.Enum):
    CHANNEL = "channel"
    UNBIASED = "unbiased-operation"
    BIASED = "biased-operation"
    INVALID = "invalid"


def identity_map(d: int) -> KrausMap:
    return KrausMap(np.eye(d, dtype=complex))


def zero_map(d_in: int, d_out: int | None = None) -> KrausMap:
    return KrausMap(np.zeros((1, d_out or d_in, d_in)))


def apply(op: KrausMap, rho) -> np.ndarray:
    """Apply ``op`` to an operator (Kraus sum)."""
    return op(np.asarray(rho, dtype=complex))


def dual_on_identity(op: KrausMap) -> np.ndarray:
    """``Lambda^dagger[I] = sum_k A_k^dagger A_k``."""
    k = op.kraus
    m = np.einsum("kji,kjl->il", k.conj(), k)
    return 0.5 * (m + m.conj().T)


def choi_matrix(op: KrausMap) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) op(|i><j|)`` of shape ``(d_in d_out, d_in d_out)``."""
    d_in, d_out = op.dim_in, op.dim_out
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i, j, e in matrix_units(d_in):
        c[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = op(e)
    return c


def detection_range(op: KrausMap) -> tuple[float, float]:
    """Smallest and largest eigenvalue of ``Lambda^dagger[I]``."""
    w, _ = eig_hermitian(dual_on_identity(op))
    return float(w[-1]), float(w[0])


def bias(op: KrausMap) -> float:
    """Spread ``max Spec - min Spec`` of ``Lambda^dagger[I]``."""
    p_min, p_max = detection_range(op)
    return max(p_max - p_min, 0.0)


def validate(op: KrausMap, tol: float = MAP_TOL) -> Classification:
    """Classify a map as a channel, an unbiased or biased operation, or invalid."""
    choi_min = float(np.linalg.eigvalsh(choi_matrix(op)).min())
    p_min, p_max = detection_range(op)
    if choi_min < -tol or p_max > 1.0 + tol:
        return Classification.INVALID
    if np.abs(dual_on_identity(op) - np.eye(op.dim_in)).max() <= tol:
        return Classification.CHANNEL
    if p_max - p_min < tol:
        return Classification.UNBIASED
    return Classification.BIASED


def validation_report(op: KrausMap, tol: float = MAP_TOL) -> dict:
    """Classification plus the diagnostics surfaced by the command line."""
    spectrum, _ = eig_hermitian(dual_on_identity(op))
    return {
        "classification": validate(op, tol).value,
        "choi_min_eigenvalue": float(np.linalg.eigvalsh(choi_matrix(op)).min()),
        "dual_identity_spectrum": [float(x) for x in spectrum],
        "bias": float(spectrum[0] - spectrum[-1]),
        "dim_in": op.dim_in,
        "dim_out": op.dim_out,
        "kraus_count": op.rank,
    }


def check_operation(op: KrausMap, square: bool = False) -> None:
    """Raise :class:`InvalidOperationError` unless ``op`` is a quantum operation."""
    if validate(op) is Classification.INVALID:
        raise InvalidOperationError("map is not trace nonincreasing (Lambda^dagger[I] is not <= I)")
    if square and op.dim_in != op.dim_out:
        raise DimensionMismatchError(f"expected a map d -> d, got {op.dim_in} -> {op.dim_out}")


def is_trace_preserving(op: KrausMap, tol: float = MAP_TOL) -> bool:
    return bool(np.abs(dual_on_identity(op) - np.eye(op.dim_in)).max() <= tol)


def compose(f: KrausMap, g: KrausMap) -> KrausMap:
    """``f o g`` (apply ``g`` first)."""
    if f.dim_in != g.dim_out:
        raise DimensionMismatchError(f"cannot compose {f.dim_in}-input map after {g.dim_out}-output map")
    ops = np.einsum("aij,bjk->abik", f.kraus, g.kraus)
    return KrausMap(ops.reshape(-1, f.dim_out, g.dim_in))


def tensor(f: KrausMap, g: KrausMap) -> KrausMap:
    """``f (x) g`` with Kraus operators ``F_a (x) G_b``."""
    return KrausMap(np.stack([np.kron(a, b) for a in f.kraus for b in g.kraus]))


def max_action_difference(f: KrausMap, g: KrausMap) -> float:
    """Largest entrywise difference of the two maps on all matrix units."""
    if (f.dim_in, f.dim_out) != (g.dim_in, g.dim_out):
        raise DimensionMismatchError("maps have different input/output dimensions")
    return max(float(np.abs(f(e) - g(e)).max()) for _, _, e in matrix_units(f.dim_in))


def maps_equal(f: KrausMap, g: KrausMap, tol: float = MAP_TOL) -> bool:
    """Representation-independent equality: same action on every matrix unit."""
    return max_action_difference(f, g) <= tol


def minimal_extension(op: KrausMap) -> KrausMap:
    """Rank-one completion ``rho -> sqrt(I - L^dag[I]) rho sqrt(I - L^dag[I])``."""
    if op.dim_in != op.dim_out:
        raise DimensionMismatchError("minimal extension needs dim_in == dim_out")
    check_operation(op)
    return KrausMap(psd_sqrt(np.eye(op.dim_in) - dual_on_identity(op)))


def recover_channel_factor(extension: KrausMap, op: KrausMap, tol: float = MAP_TOL) -> KrausMap:
    """Channel ``Phi`` with ``extension = Phi o minimal_extension(op)``.

    Every extension of an operation factors through the minimal one; the
    factor has Kraus operators ``B_l (I - L^dag[I])^{-1/2}`` plus
    ``|0><k|`` for each kernel vector ``k`` of ``I - L^dag[I]``, which the
    minimal extension never reaches.

    Raises
    ------
    NotAnExtensionError
        If ``L^dag[I] + extension^dag[I] != I``.
    NumericalFailure
        If the recovered factor fails its own composition check.
    """
    if extension.dim_in != op.dim_in or op.dim_in != op.dim_out:
        raise DimensionMismatchError("extension and operation act on different spaces")
    complement = np.eye(op.dim_in) - dual_on_identity(op)
    residual = float(np.abs(dual_on_identity(extension) - complement).max())
    if residual > tol:
        raise NotAnExtensionError(f"Lambda^dag[I] + Lambda'^dag[I] differs from I by {residual:.3e}")

    inv_sqrt = pinv_sqrt_psd(complement)
    first = np.zeros(extension.dim_out)
    first[0] = 1.0
    ops = [np.outer(first, k.conj()) for k in kernel_basis(complement).T]
    ops += [b @ inv_sqrt for b in extension.kraus]
    factor = KrausMap(np.stack(ops)).pruned()

    if not is_trace_preserving(factor, tol):
        raise NumericalFailure("recovered factor is not trace preserving")
    err = max_action_difference(compose(factor, minimal_extension(op)), extension)
    if err > tol:
        raise NumericalFailure(f"recovered factor reproduces the extension only to {err:.3e}")
    return factor


def normalized_apply(op: KrausMap, rho, min_probability: float = 1e-12) -> np.ndarray:
    """Conditional output state ``op(rho) / tr op(rho)``."""
    out = apply(op, rho)
    p = float(np.trace(out).real)
    if p <= min_probability:
        raise UndefinedConditionalStateError(f"detection probability {p:.3e} vanishes")
    return out / p


def phi_lambda(op: KrausMap, xi=None) -> KrausMap:
    """Channel whose image equals the normalized image of ``op``.

    ``Phi[rho] = op[D^{-1/2} rho D^{-1/2}] + tr[Pi_0 rho] xi`` where
    ``D = op^dagger[I]`` (Moore-Penrose inverse square root) and ``Pi_0``
    projects on ``ker D``. By default ``xi`` is the normalized output of the
    maximally mixed state on ``supp D``.
    """
    if op.dim_in != op.dim_out:
        raise DimensionMismatchError("phi_lambda needs dim_in == dim_out")
    d_op = dual_on_identity(op)
    if np.abs(d_op).max() <= 1e-14:
        raise UndefinedConditionalStateError("the zero map has no normalized image")

    ops = [a @ pinv_sqrt_psd(d_op) for a in op.kraus]
    kernel = kernel_basis(d_op)
    if kernel.shape[1]:
        if xi is None:
            p_plus, _ = support_and_kernel_projectors(d_op)
            xi = normalized_apply(op, p_plus / np.trace(p_plus).real)
        else:
            xi = as_density(xi)
        mu, vecs = eig_hermitian(xi)
        for m, e in zip(mu, vecs.T):
            if m <= 0:
                continue
            for k in kernel.T:
                ops.append(np.sqrt(m) * np.outer(e, k.conj()))
    return KrausMap(np.stack(ops)).pruned()


def pdl_operation(p_h: float, p_v: float) -> KrausMap:
    """Polarization dependent loss ``A = sqrt(p_H)|H><H| + sqrt(p_V)|V><V|``."""
    for name, p in (("p_h", p_h), ("p_v", p_v)):
        if not 0.0 <= p <= 1.0:
            raise InvalidParametersError(f"{name}={p} outside [0, 1]")
    return KrausMap(np.diag([np.sqrt(p_h), np.sqrt(p_v)]).astype(complex))


def phase_covariant_operation(a: float, b: float, c: float, d: float, tol: float = 1e-12) -> KrausMap:
    """Qubit operation with ``Lambda^dag[I] = a I + d sigma_z`` and axial symmetry.

    ``L[X] = (a tr X I + b tr(X s_x) s_x + b tr(X s_y) s_y + tr(X s_z)(c s_z + d I)) / 2``,
    admissible iff ``a >= |c| + |d|``, ``(a + c)^2 >= 4 b^2 + d^2`` and
    ``a + |d| <= 1``. Kraus operators come from the Choi eigendecomposition.
    """
    if a < abs(c) + abs(d) - tol or (a + c) ** 2 < 4 * b * b + d * d - tol or a + abs(d) > 1 + tol:
        raise InvalidParametersError(f"(a, b, c, d) = {(a, b, c, d)} violates the admissibility constraints")
    i2, sx, sy, sz = PAULI

    def action(x):
        return 0.5 * (
            a * np.trace(x) * i2
            + b * np.trace(x @ sx) * sx
            + b * np.trace(x @ sy) * sy
            + np.trace(x @ sz) * (c * sz + d * i2)
        )

    return kraus_from_choi(_choi_of_action(action, 2, 2), 2, 2)


def _choi_of_action(action, d_in: int, d_out: int) -> np.ndarray:
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=complex)
    for i, j, e in matrix_units(d_in):
        c[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = action(e)
    return c


def kraus_from_choi(choi, d_in: int, d_out: int) -> KrausMap:
    """Kraus operators ``sqrt(mu) v`` from the eigenpairs of a PSD Choi matrix."""
    w, v = eig_hermitian(choi)
    if w[-1] < -1e-9:
        raise InvalidOperationError(f"Choi matrix has eigenvalue {w[-1]:.3e}; map is not completely positive")
    cutoff = max(1e-10 * w[0], 1e-14)
    ops = [np.sqrt(m) * vec.reshape(d_in, d_out).T for m, vec in zip(w, v.T) if m > cutoff]
    if not ops:
        return zero_map(d_in, d_out)
    return KrausMap(np.stack(ops))


def pauli_transfer_matrix(op: KrausMap) -> np.ndarray:
    """Real 4x4 matrix ``R_ij = tr(s_i op(s_j)) / 2`` of a qubit map (``s_0 = I``).

    For a channel, ``R[1:, 0]`` is the translation vector and ``R[1:, 1:]``
    the Bloch-ball distortion matrix.
    """
    if (op.dim_in, op.dim_out) != (2, 2):
        raise DimensionMismatchError("Pauli transfer matrix is defined for qubit maps")
    return np.array([[0.5 * np.trace(si @ op(sj)).real for sj in PAULI] for si in PAULI])


def kraus_map_to_json(op: KrausMap) -> dict:
    return {"dim_in": op.dim_in, "dim_out": op.dim_out, "kraus": [matrix_to_json(a) for a in op.kraus]}


def kraus_map_from_json(obj: dict) -> KrausMap:
    """Parse an explicit Kraus record or a named constructor.

    Named constructors: ``{"pdl": {"p_h": x, "p_v": y}}`` and
    ``{"phase_covariant": {"a": ., "b": ., "c": ., "d": .}}``.
    """
    if "pdl" in obj:
        params = obj["pdl"]
        return pdl_operation(float(params["p_h"]), float(params["p_v"]))
    if "phase_covariant" in obj:
        params = obj["phase_covariant"]
        return phase_covariant_operation(*(float(params[k]) for k in "abcd"))
    try:
        ops = [matrix_from_json(m) for m in obj["kraus"]]
        dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed Kraus map record: {exc}") from exc
    op = KrausMap.from_list(ops)
    if (op.dim_in, op.dim_out) != (dim_in, dim_out):
        raise DimensionMismatchError(
            f"declared dims {dim_in}->{dim_out} disagree with Kraus shape {op.dim_in}->{op.dim_out}"
        )
    return op


def random_operation(rng: np.random.Generator, d: int, kraus_count: int = 2, scale: float | None = None) -> KrausMap:
    """Random trace-decreasing operation with ``max Spec Lambda^dag[I] = scale``."""
    g = rng.normal(size=(kraus_count, d, d)) + 1j * rng.normal(size=(kraus_count, d, d))
    op = KrausMap(g)
    top = eig_hermitian(dual_on_identity(op))[0][0]
    s = rng.uniform(0.3, 0.95) if scale is None else scale
    return KrausMap(g * np.sqrt(s / top))


def random_channel(rng: np.random.Generator, d_in: int, d_out: int | None = None, kraus_count: int = 2) -> KrausMap:
    """Random channel from a Haar-like isometry slice."""
    d_out = d_out or d_in
    g = rng.normal(size=(kraus_count * d_out, d_in)) + 1j * rng.normal(size=(kraus_count * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return KrausMap(q.reshape(kraus_count, d_out, d_in))


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """Random density operator (induced measure of the given rank)."""
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    r = g @ g.conj().T
    return r / np.trace(r).real


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))

"""Generalized erasure channel built from a trace-decreasing operation.

``Gamma[rho] = L[rho] (+) tr[rho - L[rho]] |e><e|`` maps ``d`` to ``d + 1``
dimensions; the erasure flag ``|e>`` is always the last output basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError, InvalidOperationError, UnsupportedRankError
from .linalg import eig_hermitian, psd_sqrt
from .operations import (
    MAP_TOL,
    ZERO_KRAUS_TOL,
    KrausMap,
    check_operation,
    compose,
    dual_on_identity,
    is_trace_preserving,
    max_action_difference,
    tensor,
)


@dataclass(frozen=True, eq=False)
class ErasureChannel:
    """``base`` is the operation on ``C^d``; ``channel`` is ``Gamma`` on ``C^d -> C^{d+1}``."""

    base: KrausMap
    channel: KrausMap

    @property
    def erasure_flag_index(self) -> int:
        return self.base.dim_in

    def __call__(self, rho):
        return self.channel(rho)


def _embed_rows(a: np.ndarray, rows: int, offset: int = 0) -> np.ndarray:
    out = np.zeros((rows, a.shape[1]), dtype=complex)
    out[offset:offset + a.shape[0]] = a
    return out


def _loss_kraus(complement: np.ndarray, d_out: int, flag: int) -> list[np.ndarray]:
    """Kraus operators ``sqrt(m_i)|flag><v_i|`` realizing ``rho -> tr[M rho] |flag><flag|``."""
    w, v = eig_hermitian(complement)
    ops = []
    for m, vec in zip(w, v.T):
        if m > ZERO_KRAUS_TOL ** 2:
            k = np.zeros((d_out, complement.shape[0]), dtype=complex)
            k[flag] = np.sqrt(m) * vec.conj()
            ops.append(k)
    return ops


def generalized_erasure(op: KrausMap) -> ErasureChannel:
    """Build ``Gamma_Lambda`` for an operation ``op`` on ``C^d``.

    Kraus set: each ``A_k`` padded with a zero flag row, plus one operator
    ``sqrt(m_i)|e><v_i|`` per nonzero eigenpair of ``I - Lambda^dag[I]``.
    """
    check_operation(op, square=True)
    d = op.dim_in
    ops = [_embed_rows(a, d + 1) for a in op.kraus if np.linalg.norm(a) >= ZERO_KRAUS_TOL]
    ops += _loss_kraus(np.eye(d) - dual_on_identity(op), d + 1, d)
    if not ops:  # pragma: no cover - Lambda = 0 always has a loss branch
        ops = [np.zeros((d + 1, d))]
    return ErasureChannel(base=op, channel=KrausMap(np.stack(ops)))


def _as_kraus_map(channel) -> KrausMap:
    return channel.channel if isinstance(channel, ErasureChannel) else channel


def complementary(channel, require_channel: bool = True) -> KrausMap:
    """Complementary channel with Kraus operators ``V~_j = sum_a |a><j| V_a``.

    The environment basis enumerates the stored Kraus operators in order,
    after dropping those with norm below ``1e-12``.
    """
    channel = _as_kraus_map(channel)
    if require_channel and not is_trace_preserving(channel):
        raise InvalidOperationError("complementary channel requires a trace-preserving input map")
    k = channel.pruned().kraus
    # row j of V~_j collects row j of every V_a
    return KrausMap(np.ascontiguousarray(k.transpose(1, 0, 2)))


def closed_form_complementary(op: KrausMap) -> KrausMap:
    """Environment output of ``Gamma_Lambda`` for ``Lambda = A . A^dag``.

    ``rho -> tr[A rho A^dag] (+) sqrt(I - A^dag A) rho sqrt(I - A^dag A)``, with
    the scalar block first.
    """
    a = _single_kraus(op)
    d = op.dim_in
    ops = []
    for j in range(d):
        k = np.zeros((d + 1, d), dtype=complex)
        k[0] = a[j]
        ops.append(k)
    ops.append(_embed_rows(psd_sqrt(np.eye(d) - a.conj().T @ a), d + 1, offset=1))
    return KrausMap(np.stack(ops))


def xi_degrading_map(theta: KrausMap, d: int | None = None) -> KrausMap:
    """Channel on ``C^{d+1}`` with ``Gamma_{Theta o L} = Xi o Gamma_L`` for every ``L``.

    ``Xi`` applies ``Theta`` to the ``d x d`` block, discards coherences with
    the flag and adds the loss probability of ``Theta`` to the flag weight.
    """
    check_operation(theta, square=True)
    d = theta.dim_in if d is None else d
    if theta.dim_in != d:
        raise DimensionMismatchError(f"theta acts on dimension {theta.dim_in}, not {d}")
    ops = []
    for t in theta.kraus:
        k = np.zeros((d + 1, d + 1), dtype=complex)
        k[:d, :d] = t
        ops.append(k)
    flag = np.zeros((d + 1, d + 1), dtype=complex)
    flag[d, d] = 1.0
    ops.append(flag)
    for k in _loss_kraus(np.eye(d) - dual_on_identity(theta), d + 1, d):
        ops.append(np.hstack([k, np.zeros((d + 1, 1))]))
    return KrausMap(np.stack(ops)).pruned()


@dataclass(frozen=True, eq=False)
class DegradabilityDecision:
    """Verdict for a rank-one generalized erasure channel.

    ``degrading_map`` is an explicit channel ``Xi`` on the output of ``Gamma``
    reproducing :func:`closed_form_complementary` (or, for antidegradability,
    mapping the environment output back to ``Gamma``); ``residual`` is the
    largest matrix-unit discrepancy of that identity.
    """

    decision: bool
    reason: str
    degrading_map: KrausMap | None = None
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.decision


def _single_kraus(op: KrausMap) -> np.ndarray:
    if op.rank != 1:
        raise UnsupportedRankError(f"decision implemented for Kraus rank 1 only, got {op.rank} operators")
    if op.dim_in != op.dim_out:
        raise DimensionMismatchError("expected a map d -> d")
    return op.kraus[0]


def _rank(m: np.ndarray, tol: float) -> int:
    return int(np.sum(eig_hermitian(m)[0] > tol))


def _degrading_map_invertible(a: np.ndarray) -> KrausMap:
    """``Xi`` with flag output ``c + tr{rho [2I - (AA^dag)^-1]}`` and block ``S rho S^dag``,
    ``S = sqrt(I - A^dag A) A^-1``; completely positive iff ``AA^dag >= I/2``."""
    d = a.shape[0]
    a_inv = np.linalg.inv(a)
    s = psd_sqrt(np.eye(d) - a.conj().T @ a) @ a_inv
    w_mat = 2 * np.eye(d) - np.linalg.inv(a @ a.conj().T)
    ops = []
    k = np.zeros((d + 1, d + 1), dtype=complex)
    k[1:, :d] = s
    ops.append(k)
    w, v = eig_hermitian(w_mat)
    for m, vec in zip(w, v.T):
        if m > 0:
            k = np.zeros((d + 1, d + 1), dtype=complex)
            k[0, :d] = np.sqrt(m) * vec.conj()
            ops.append(k)
    k = np.zeros((d + 1, d + 1), dtype=complex)
    k[0, d] = 1.0
    ops.append(k)
    return KrausMap(np.stack(ops))


def _degrading_map_rank1_loss(psi: np.ndarray, d: int) -> KrausMap:
    """``Xi`` sending the ``d x d`` block to its trace and the flag weight onto ``|psi>``."""
    ops = []
    for j in range(d):
        k = np.zeros((d + 1, d + 1), dtype=complex)
        k[0, j] = 1.0
        ops.append(k)
    k = np.zeros((d + 1, d + 1), dtype=complex)
    k[1:, d] = psi
    ops.append(k)
    return KrausMap(np.stack(ops))


def is_degradable_rank1(op: KrausMap, tol: float = 1e-12) -> DegradabilityDecision:
    """Degradability of ``Gamma_Lambda`` for ``Lambda = A . A^dag``.

    Degradable iff ``AA^dag >= I/2`` or ``I - A^dag A`` has rank one. In both
    cases the explicit degrading channel is returned and checked against the
    closed-form complementary channel.
    """
    a = _single_kraus(op)
    check_operation(op)
    d = a.shape[0]
    loss = np.eye(d) - a.conj().T @ a
    gamma = generalized_erasure(op).channel
    target = closed_form_complementary(op)

    xi = None
    if eig_hermitian(a @ a.conj().T)[0][-1] >= 0.5 - tol:
        xi, reason = _degrading_map_invertible(a), "AA^dag >= I/2"
    elif _rank(loss, tol) == 1:
        w, v = eig_hermitian(loss)
        xi, reason = _degrading_map_rank1_loss(v[:, 0], d), "I - A^dag A has rank 1"
    if xi is None:
        return DegradabilityDecision(False, "AA^dag is not >= I/2 and I - A^dag A is not rank 1")
    residual = max_action_difference(compose(xi, gamma), target)
    return DegradabilityDecision(True, reason, xi, residual)


def is_antidegradable_rank1(op: KrausMap, tol: float = 1e-12) -> DegradabilityDecision:
    """Antidegradability of ``Gamma_Lambda`` for ``Lambda = A . A^dag``.

    Antidegradable iff ``A^dag A <= I/2`` or ``A^dag A`` has rank one, which
    is degradability of the erasure channel built from
    ``B = sqrt(I - A^dag A)``. The returned map degrades ``Gamma_B``, i.e. it
    sends the environment output of ``Gamma_A`` (flag-last ordering) to a
    unitary relabeling of ``Gamma_A``.
    """
    a = _single_kraus(op)
    check_operation(op)
    d = a.shape[0]
    ada = a.conj().T @ a
    b = psd_sqrt(np.eye(d) - ada)
    b_decision = is_degradable_rank1(KrausMap(b), tol)
    if eig_hermitian(ada)[0][0] <= 0.5 + tol:
        reason = "A^dag A <= I/2"
    elif _rank(ada, tol) == 1:
        reason = "A^dag A has rank 1"
    else:
        return DegradabilityDecision(False, "A^dag A is not <= I/2 and not rank 1")
    # B B^dag >= I/2 and A^dag A <= I/2 coincide since B is Hermitian; rank conditions likewise.
    return DegradabilityDecision(True, reason, b_decision.degrading_map, b_decision.residual)


@dataclass(frozen=True)
class TensorStructureReport:
    max_residual: float
    flag_probability_max_residual: float
    passed: bool


def coarse_graining_channel(d: int, n: int = 2) -> KrausMap:
    """Channel ``(C^{d+1})^{(x)n} -> (C^d)^{(x)n} (+) |e>`` keeping the no-loss block.

    Basis vectors with no flag factor map to their ``(C^d)^{(x)n}`` index;
    the ``(d+1)^n - d^n`` others are sent to ``|e>`` (last index).
    """
    big, small = (d + 1) ** n, d ** n
    iso = np.zeros((small + 1, big), dtype=complex)
    ops = []
    for idx in range(big):
        digits = np.unravel_index(idx, (d + 1,) * n)
        if all(x < d for x in digits):
            iso[np.ravel_multi_index(digits, (d,) * n), idx] = 1.0
        else:
            k = np.zeros((small + 1, big), dtype=complex)
            k[small, idx] = 1.0
            ops.append(k)
    return KrausMap(np.stack([iso] + ops))


def gamma_tensor_structure_check(op: KrausMap, tol: float = MAP_TOL) -> TensorStructureReport:
    """Check ``Gamma_{L (x) L} = C o (Gamma_L (x) Gamma_L)`` on all matrix units."""
    d = op.dim_in
    gamma = generalized_erasure(op).channel
    lhs = generalized_erasure(tensor(op, op)).channel
    rhs = compose(coarse_graining_channel(d, 2), tensor(gamma, gamma))
    residual = max_action_difference(lhs, rhs)

    # flag probability of the joint erasure channel equals 1 - tr[(L (x) L)(rho)]
    flag_res = 0.0
    joint = tensor(op, op)
    for rho in (np.eye(d * d) / (d * d), np.diag(np.arange(1, d * d + 1) / np.sum(np.arange(1, d * d + 1)))):
        out = lhs(rho.astype(complex))
        flag_res = max(flag_res, abs(out[-1, -1].real - (1 - np.trace(joint(rho)).real)))
    return TensorStructureReport(residual, flag_res, residual <= tol and flag_res <= tol)

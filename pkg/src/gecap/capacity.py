"""Holevo quantity, coherent information and capacity bounds.

All optimizer-based values (:func:`holevo_capacity`, :func:`q1`) are lower
estimates of the corresponding suprema: the landscapes are non-convex and
the multi-start search is not certified.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .erasure import complementary, generalized_erasure, is_antidegradable_rank1, is_degradable_rank1
from .exceptions import DimensionMismatchError, DomainError, InvalidOperationError
from .linalg import _entropy_from_eigenvalues, as_density, binary_entropy, von_neumann_entropy
from .operations import KrausMap, check_operation, detection_range, is_trace_preserving, phi_lambda
from .optimize import DEFAULT_SEED, multistart_maximize, restart_generators

DEFAULT_RESTARTS = 32
BOUND_TOL = 1e-9
BLOCH_START_RADIUS = 12.0


@dataclass(frozen=True)
class Ensemble:
    """Weighted density operators ``{(pi_i, rho_i)}``."""

    weights: np.ndarray
    states: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.states) or w.size == 0:
            raise DimensionMismatchError("need one weight per state")
        if w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-9:
            raise DomainError(f"weights {w} are not a probability distribution")
        states = tuple(as_density(s) for s in self.states)
        if len({s.shape for s in states}) != 1:
            raise DimensionMismatchError("ensemble states have different dimensions")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_pairs(cls, items: Sequence[tuple[float, np.ndarray]]) -> "Ensemble":
        return cls(np.array([w for w, _ in items]), tuple(s for _, s in items))

    @property
    def average(self) -> np.ndarray:
        return sum(w * s for w, s in zip(self.weights, self.states))


def _require_channel(channel) -> KrausMap:
    channel = getattr(channel, "channel", channel)
    if not is_trace_preserving(channel):
        raise InvalidOperationError("a trace-preserving channel is required")
    return channel


def holevo_quantity(channel, ensemble: Ensemble) -> float:
    """``S(Psi[sum pi_i rho_i]) - sum pi_i S(Psi[rho_i])`` in bits."""
    channel = _require_channel(channel)
    if ensemble.states[0].shape != (channel.dim_in, channel.dim_in):
        raise DimensionMismatchError("ensemble dimension does not match the channel input")
    avg = von_neumann_entropy(channel(ensemble.average))
    return avg - sum(w * von_neumann_entropy(channel(s)) for w, s in zip(ensemble.weights, ensemble.states))


class _CoherentInformation:
    """Fast evaluator of ``S(Phi[rho]) - S(Phi~[rho])`` for a fixed channel."""

    def __init__(self, channel: KrausMap):
        k = channel.pruned().kraus
        self.n, self.d_out, self.d_in = k.shape
        self.flat = k.reshape(-1, self.d_in)
        self.conj = k.conj()

    def __call__(self, rho: np.ndarray) -> float:
        y = (self.flat @ rho).reshape(self.n, self.d_out, self.d_in)
        out = np.tensordot(y, self.conj, axes=([0, 2], [0, 2]))
        env = np.tensordot(y, self.conj, axes=([1, 2], [1, 2]))
        return (_entropy_from_eigenvalues(np.linalg.eigvalsh(out))
                - _entropy_from_eigenvalues(np.linalg.eigvalsh(env)))


def coherent_information(channel, rho) -> float:
    """``S(Phi[rho]) - S(Phi~[rho])`` in bits, with ``Phi~`` from :func:`complementary`."""
    channel = _require_channel(channel)
    rho = as_density(rho)
    return von_neumann_entropy(channel(rho)) - von_neumann_entropy(complementary(channel)(rho))


# -- density parametrizations ------------------------------------------------

def bloch_density(r) -> np.ndarray:
    """Qubit state ``(I + r.sigma)/2``; vectors longer than one are projected to the sphere."""
    r = np.asarray(r, dtype=float)
    r = r / max(1.0, float(np.linalg.norm(r)))
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def factor_density(theta, d: int) -> np.ndarray:
    """``T^dag T / tr(T^dag T)`` with ``T`` complex lower triangular from ``d**2`` reals.

    Layout: ``d`` real diagonal entries, then real and imaginary parts of the
    strictly lower entries (row-major ``tril_indices`` order).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size != d * d:
        raise DimensionMismatchError(f"factor parametrization of dimension {d} needs {d * d} reals")
    t = np.zeros((d, d), dtype=complex)
    t[np.diag_indices(d)] = theta[:d]
    low = np.tril_indices(d, -1)
    n = low[0].size
    t[low] = theta[d:d + n] + 1j * theta[d + n:]
    rho = t.conj().T @ t
    tr = np.trace(rho).real
    if tr <= 0:
        return np.eye(d, dtype=complex) / d
    return rho / tr


def density_parametrize(theta, d: int | None = None) -> np.ndarray:
    """Density operator from real parameters.

    Three parameters (with ``d`` unset or 2 and no factor layout implied) are
    read as a Bloch vector; ``d**2`` parameters use :func:`factor_density`.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size == 3 and d in (None, 2):
        return bloch_density(theta)
    if d is None:
        d = int(round(np.sqrt(theta.size)))
    return factor_density(theta, d)


def density_unparametrize(rho, kind: str = "factor", jitter: float = 1e-12) -> np.ndarray:
    """Parameters reproducing ``rho`` (up to gauge) for ``kind`` in {"factor", "bloch"}.

    Singular states are mixed with ``jitter`` of the maximally mixed state
    before the Cholesky step.
    """
    rho = as_density(rho)
    d = rho.shape[0]
    if kind == "bloch":
        if d != 2:
            raise DimensionMismatchError("Bloch parameters need a qubit state")
        return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real])
    mixed = (1 - jitter) * rho + jitter * np.eye(d) / d
    flip = np.eye(d)[::-1]
    low = np.linalg.cholesky(flip @ mixed @ flip)
    t = flip @ low.conj().T @ flip
    idx = np.tril_indices(d, -1)
    return np.concatenate([t[np.diag_indices(d)].real, t[idx].real, t[idx].imag])


def radial_bloch_density(v) -> np.ndarray:
    """Qubit state with Bloch vector ``(1 - exp(-|v|)) v/|v|``.

    Every ``v`` maps into the open ball and the distance to the surface is
    ``exp(-|v|)``, so near-pure optima stay reachable by a local search.
    """
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    return bloch_density(v * (-np.expm1(-n) / n if n > 1e-12 else 1.0))


def _radial_bloch_parameters(rho, max_log: float = 27.0) -> np.ndarray:
    r = density_unparametrize(rho, "bloch")
    n = float(np.linalg.norm(r))
    if n < 1e-12:
        return np.zeros(3)
    return r / n * min(-np.log1p(-min(n, 1.0 - 1e-12)), max_log)


# -- optimized functionals -------------------------------------------------

def holevo_capacity(channel, ensemble_size: int | None = None, restarts: int = DEFAULT_RESTARTS,
                    seed: int = DEFAULT_SEED, maxfev: int | None = None) -> float:
    """Lower estimate of the Holevo capacity (bits).

    Optimizes jointly over ``ensemble_size`` (default ``d_in**2``) pure
    states given by normalized complex vectors and weights given by a
    softmax of unconstrained reals.
    """
    channel = _require_channel(channel).pruned()
    d = channel.dim_in
    m = ensemble_size or d * d
    k = channel.kraus

    def chi(x):
        w = np.exp(x[:m] - x[:m].max())
        w /= w.sum()
        v = (x[m:m + m * d] + 1j * x[m + m * d:]).reshape(m, d)
        norms = np.linalg.norm(v, axis=1)
        if np.any(norms < 1e-300):
            return 0.0
        v = v / norms[:, None]
        kv = np.einsum("kij,mj->mki", k, v)
        outs = np.einsum("mki,mkj->mij", kv, kv.conj())
        avg = np.tensordot(w, outs, axes=1)
        s_out = [_entropy_from_eigenvalues(e) for e in np.linalg.eigvalsh(outs)]
        return _entropy_from_eigenvalues(np.linalg.eigvalsh(avg)) - float(np.dot(w, s_out))

    starts = [rng.normal(size=m + 2 * m * d) for rng in restart_generators(seed, restarts)]
    return max(multistart_maximize(chi, starts, maxfev=maxfev).value, 0.0)


def q1(channel, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED, parametrization: str = "auto",
       warm_starts: Sequence[np.ndarray] = (), maxfev: int | None = None, screen: int = 32) -> float:
    """Lower estimate of ``Q1 = max_rho [S(Phi[rho]) - S(Phi~[rho])]`` in bits, clipped at 0.

    Qubit inputs use :func:`radial_bloch_density` under ``"auto"``; other
    dimensions use :func:`factor_density`. ``warm_starts`` are density
    operators that are always evaluated exactly; they also seed the first
    local searches. ``restarts`` counts all local searches, warm or random;
    each random search starts from the best of ``screen`` random draws.
    """
    return q1_search(channel, restarts, seed, parametrization, warm_starts, maxfev, screen)[0]


def q1_search(channel, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED, parametrization: str = "auto",
              warm_starts: Sequence[np.ndarray] = (), maxfev: int | None = None,
              screen: int = 32) -> tuple[float, np.ndarray]:
    """Like :func:`q1` but also returns the best input state found."""
    channel = _require_channel(channel)
    d = channel.dim_in
    ci = _CoherentInformation(channel)
    if parametrization == "auto":
        parametrization = "bloch" if d == 2 else "factor"
    if parametrization == "bloch":
        if d != 2:
            raise DimensionMismatchError("Bloch parametrization needs a qubit input")
        to_rho, to_x = radial_bloch_density, _radial_bloch_parameters

        def random_start(rng):
            v = rng.normal(size=3)
            return v / np.linalg.norm(v) * rng.uniform(0.0, BLOCH_START_RADIUS)
    elif parametrization == "factor":
        def to_rho(x):
            return factor_density(x, d)

        def to_x(rho):
            return density_unparametrize(rho, "factor")

        def random_start(rng):
            return rng.normal(size=d * d)
    else:
        raise ValueError(f"unknown parametrization {parametrization!r}")

    best_value, best_rho = -np.inf, np.eye(d, dtype=complex) / d
    for rho in warm_starts:
        value = ci(as_density(rho))
        if value > best_value:
            best_value, best_rho = value, as_density(rho)

    starts = [to_x(rho) for rho in warm_starts][:max(restarts, 0)]
    rngs = restart_generators(seed, max(restarts, 0))
    for rng in rngs[len(starts):]:
        candidates = [random_start(rng) for _ in range(max(screen, 1))]
        starts.append(max(candidates, key=lambda x: ci(to_rho(x))))
    if starts:
        res = multistart_maximize(lambda x: ci(to_rho(x)), starts, maxfev=maxfev)
        if res.value > best_value:
            best_value, best_rho = res.value, to_rho(res.x)
    return max(best_value, 0.0), best_rho


# -- closed-form bounds ----------------------------------------------------

def f_lower_bound(p_min: float, p_max: float) -> float:
    """Holevo quantity of the best binary ensemble of extreme-detection eigenstates (bits).

    Equals ``log2(1 + 2^{-s}) - (p_max h(p_min) - p_min h(p_max)) / (p_max - p_min)``
    with chord slope ``s = (h(p_max) - h(p_min)) / (p_max - p_min)``. It is
    evaluated as the height of ``h`` above the chord at the tangent point
    ``p* = 1 / (1 + 2^s)``, which stays accurate when the two probabilities
    nearly coincide.
    """
    if not (0.0 <= p_min <= p_max <= 1.0):
        raise DomainError(f"need 0 <= p_min <= p_max <= 1, got ({p_min}, {p_max})")
    if p_min == p_max:
        return 0.0
    h_min, h_max = binary_entropy(p_min), binary_entropy(p_max)
    slope = (h_max - h_min) / (p_max - p_min)
    p_star = min(max(float(expit(-slope * np.log(2.0))), p_min), p_max)
    return max(binary_entropy(p_star) - h_min - slope * (p_star - p_min), 0.0)


def bias_lower_bound(b: float) -> float:
    """``1 - h((1 + b)/2)`` bits: the minimum of :func:`f_lower_bound` at fixed bias ``b``."""
    if not 0.0 <= b <= 1.0 + 1e-12:
        raise DomainError(f"bias {b} outside [0, 1]")
    return 1.0 - binary_entropy(min((1.0 + b) / 2.0, 1.0))


@dataclass
class BoundsReport:
    """Lower/upper bounds in bits with the rule that produced each."""

    lower: float
    upper: float
    lower_method: str
    upper_method: str
    extras: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        self.lower, self.upper = float(self.lower), float(self.upper)
        if self.lower > self.upper + BOUND_TOL:
            self.diagnostics.append(f"bound violation: lower {self.lower:.12g} > upper {self.upper:.12g}")

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def classical_bounds(op: KrausMap, holevo: bool = False, restarts: int = DEFAULT_RESTARTS,
                     seed: int = DEFAULT_SEED) -> BoundsReport:
    """Bounds on the classical capacity of ``Gamma_Lambda``.

    Lower: ``max(F(p_min, p_max), 1 - h((1+b)/2))``; upper: ``p_max log2 d``.
    With ``holevo=True`` the report also carries the Holevo-capacity bracket
    ``[p_min C, p_max C + F]`` with ``C`` the (estimated) Holevo capacity of
    :func:`~gecap.operations.phi_lambda`.
    """
    check_operation(op, square=True)
    p_min, p_max = detection_range(op)
    p_min, p_max = min(max(p_min, 0.0), 1.0), min(max(p_max, 0.0), 1.0)
    d = op.dim_in
    f = f_lower_bound(p_min, p_max)
    cor = bias_lower_bound(p_max - p_min)
    lower, lower_method = (f, "F(p_min,p_max)") if f >= cor else (cor, "1-h((1+b)/2)")
    extras = {"p_min": p_min, "p_max": p_max, "bias": p_max - p_min, "F": f, "bias_bound": cor}
    report = BoundsReport(lower, p_max * np.log2(d), lower_method, "p_max*log2(d)", extras)

    if holevo:
        c_phi = holevo_capacity(phi_lambda(op), restarts=restarts, seed=seed) if p_max > 0 else 0.0
        lo, hi = p_min * c_phi, p_max * c_phi + f
        extras.update({"holevo_phi_lambda_estimate": c_phi, "holevo_gamma_lower": lo, "holevo_gamma_upper": hi})
        if lo > hi + BOUND_TOL:
            report.diagnostics.append("Holevo bracket violation")
    return report


def quantum_bounds(op: KrausMap, restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED) -> BoundsReport:
    """Bounds on the quantum capacity of ``Gamma_Lambda``.

    Upper: ``min(max(0, 2 p_max - 1) log2 d, p_max Q1(Phi_Lambda))``. Lower:
    ``max(0, p_min Q1(Phi_Lambda) - (1 - p_min) log2 d)`` when
    ``Lambda^dag[I] > 0``. Rank-one operations additionally get the
    degradability verdicts; antidegradable ones have upper bound 0, and for
    degradable ones the optimized ``Q1(Gamma_Lambda)`` is a valid lower bound.
    """
    check_operation(op, square=True)
    p_min, p_max = detection_range(op)
    p_min, p_max = min(max(p_min, 0.0), 1.0), min(max(p_max, 0.0), 1.0)
    log_d = np.log2(op.dim_in)
    upper, upper_method = max(0.0, 2 * p_max - 1) * log_d, "max(0,2p_max-1)*log2(d)"
    lower, lower_method = 0.0, "trivial"
    extras: dict = {"p_min": p_min, "p_max": p_max}

    if p_min > 1e-12:
        q_phi = q1(phi_lambda(op), restarts=restarts, seed=seed)
        extras["q1_phi_lambda_estimate"] = q_phi
        sandwich_lo = p_min * q_phi - (1 - p_min) * log_d
        sandwich_hi = p_max * q_phi
        extras["sandwich"] = [float(sandwich_lo), float(sandwich_hi)]
        if sandwich_hi < upper:
            upper, upper_method = sandwich_hi, "p_max*Q1(Phi_Lambda)"
        if sandwich_lo > lower:
            lower, lower_method = sandwich_lo, "p_min*Q1(Phi_Lambda)-(1-p_min)*log2(d)"

    if op.rank == 1:
        degradable = is_degradable_rank1(op)
        antidegradable = is_antidegradable_rank1(op)
        extras["degradable"] = degradable.decision
        extras["antidegradable"] = antidegradable.decision
        if antidegradable:
            upper, upper_method = 0.0, "antidegradable"
            lower, lower_method = 0.0, "antidegradable"
        elif degradable:
            extras["annotation"] = "degradable: Q = Q1"
            q_gamma = q1(generalized_erasure(op), restarts=restarts, seed=seed)
            extras["q1_gamma_estimate"] = q_gamma
            if q_gamma > lower:
                lower, lower_method = q_gamma, "degradable: Q = Q1(Gamma_Lambda) (optimizer)"
    else:
        extras["degradability"] = "unsupported rank: decision available for Kraus rank 1 only"
    return BoundsReport(lower, upper, lower_method, upper_method, extras)

"""Polarization-dependent loss: single-letter solution, two-letter witness and grid scans.

The operation is ``diag(sqrt(p_h), sqrt(p_v))`` and ``Gamma`` is its
generalized erasure channel. Diagonal qubit inputs are written
``(I + z sigma_z)/2``, so ``rho_HH = (1 + z)/2`` and ``rho_VV = (1 - z)/2``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, TextIO

import numpy as np
from scipy.optimize import bisect

from .capacity import _CoherentInformation, q1_search
from .erasure import complementary, generalized_erasure
from .exceptions import DomainError, InvalidParametersError
from .linalg import shannon_entropy, von_neumann_entropy
from .operations import pdl_operation, tensor
from .optimize import DEFAULT_SEED

Z_EDGE = 1e-9
LOG_CLAMP = 1e-12
PRESCAN_POINTS = 1024
TWO_LETTER_RESTARTS = 64
TWO_LETTER_MAXFEV = 12000
SCAN_KINDS = ("q1-heatmap", "superadd-lower-bound", "superadd-gap")


def _check_probabilities(p_h: float, p_v: float) -> tuple[float, float]:
    p_h, p_v = float(p_h), float(p_v)
    if not (0.0 <= p_h <= 1.0 and 0.0 <= p_v <= 1.0):
        raise InvalidParametersError(f"transmissions must lie in [0, 1], got ({p_h}, {p_v})")
    return p_h, p_v


def _xlog2_ratio(c: float, num: float, den: float) -> float:
    """``c * log2(num / den)`` with ``0 log 0 = 0``."""
    if c == 0.0 or num == 0.0:
        return 0.0
    return c * math.log2(num / den)


def _g_parts(p1: float, p2: float, up: float, down: float) -> float:
    a, b = p1 * up, (1.0 - p1) * up
    return -_xlog2_ratio(p1, a, a + p2 * down) + _xlog2_ratio(1.0 - p1, b, b + (1.0 - p2) * down)


def g_function(p1: float, p2: float, z: float) -> float:
    """Stationarity function ``G(p1, p2, z)`` in bits.

    ``-p1 log2(p1(1+z) / (p1(1+z) + p2(1-z)))
    + (1-p1) log2((1-p1)(1+z) / ((1-p1)(1+z) + (1-p2)(1-z)))``.
    ``z`` is clamped to ``[-1 + 1e-12, 1 - 1e-12]``.
    """
    z = min(max(float(z), -1.0 + LOG_CLAMP), 1.0 - LOG_CLAMP)
    return _g_parts(p1, p2, 1.0 + z, 1.0 - z)


def _q_parts(p_h: float, p_v: float, up: float, down: float) -> float:
    a, b = 0.5 * p_h * up, 0.5 * p_v * down
    direct = shannon_entropy([a, b, max(1.0 - a - b, 0.0)])
    env = shannon_entropy([a + b, 0.5 * (1.0 - p_h) * up, 0.5 * (1.0 - p_v) * down])
    return direct - env


def q_of_z(p_h: float, p_v: float, z: float) -> float:
    """Coherent information of ``Gamma`` at ``(I + z sigma_z)/2`` in bits.

    ``H({a, b, 1-a-b}) - H({a+b, (1-p_h)(1+z)/2, (1-p_v)(1-z)/2})`` with
    ``a = p_h (1+z)/2`` and ``b = p_v (1-z)/2``; exactly 0 at ``z = +-1``.
    """
    p_h, p_v = _check_probabilities(p_h, p_v)
    if not -1.0 <= z <= 1.0:
        raise DomainError(f"z = {z} outside [-1, 1]")
    if abs(z) == 1.0:
        return 0.0
    return _q_parts(p_h, p_v, 1.0 + z, 1.0 - z)


def _d_function(p_h: float, p_v: float):
    return lambda z: g_function(p_h, p_v, z) - g_function(p_v, p_h, -z)


def _edge_parts(sign: float, u: float) -> tuple[float, float]:
    """``(1 + z, 1 - z)`` for ``z = sign (1 - u)`` without cancellation."""
    return (2.0 - u, u) if sign > 0 else (u, 2.0 - u)


@dataclass(frozen=True)
class PdlQ1Result:
    """Single-letter quantum capacity of ``Gamma`` for polarization-dependent loss.

    ``z_star``, ``z_prime`` and ``q_at_z_prime`` are ``None`` where ``Q1 = 0``.
    ``edge_distance`` is ``1 - |z_star|`` computed without rounding, which
    matters when the optimum sits closer to a pole than double precision
    resolves (then ``z_star`` itself rounds to ``+-1``).
    """

    p_h: float
    p_v: float
    z_star: float | None
    q1: float
    z_prime: float | None
    q_at_z_prime: float | None
    edge_distance: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def is_zero_region(p_h: float, p_v: float) -> bool:
    """``max(p_h, p_v) <= 1/2`` or ``p_h p_v = 0``, where ``Q1 = 0``."""
    return max(p_h, p_v) <= 0.5 or p_h * p_v == 0.0


def z_prime(p_h: float, p_v: float) -> float | None:
    """Closed-form approximation to ``z_star``; ``None`` in the zero region or if undefined."""
    p_h, p_v = _check_probabilities(p_h, p_v)
    if is_zero_region(p_h, p_v):
        return None
    if p_h == p_v:
        return 0.0
    mirrored = p_v > p_h
    hi, lo = (p_v, p_h) if mirrored else (p_h, p_v)
    k = 2.0 * hi - 1.0
    first = 1.0 if hi == 1.0 else ((1.0 - lo) / (1.0 - hi)) ** ((1.0 - hi) / k)
    try:
        ratio = first * (hi / lo) ** (hi / k) - (hi - lo) * (hi + lo - 2.0 * hi * lo) / (k * (1.0 - lo) * lo)
    except OverflowError:
        # ratio beyond double range: z' = -1 to working precision
        ratio = math.inf
    if math.isnan(ratio) or ratio <= 0.0:
        return None
    z = -1.0 if math.isinf(ratio) else (1.0 - ratio) / (1.0 + ratio)
    return -z if mirrored else z


def _sign_change(values: np.ndarray) -> int | None:
    idx = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)
    return int(idx[0]) if idx.size else None


def _edge_root(p_h: float, p_v: float, sign: float) -> float | None:
    """Distance ``u`` of the root from the pole when it lies beyond ``1 - 1e-9``.

    The search runs in ``log10 u`` down to ``1e-300``.
    """
    def d_log(t):
        up, down = _edge_parts(sign, 10.0 ** t)
        return _g_parts(p_h, p_v, up, down) - _g_parts(p_v, p_h, down, up)

    ts = np.linspace(math.log10(Z_EDGE), -300.0, 292)
    values = np.array([d_log(t) for t in ts])
    i = _sign_change(values)
    if i is None:
        return None
    t = bisect(d_log, ts[i + 1], ts[i], xtol=1e-13, maxiter=200)
    return 10.0 ** t


def solve_q1_pdl(p_h: float, p_v: float) -> PdlQ1Result:
    """``Q1(Gamma)`` by solving ``G(p_h, p_v, z) = G(p_v, p_h, -z)``.

    The root is searched on the half-interval where ``sign(z) =
    sign(p_v - p_h)``: a 1024-point scan of ``[0, 1 - 1e-9]`` (mirrored
    when ``p_h > p_v``) brackets it and bisection refines it. When the root
    lies even closer to the pole, the scan continues in ``log10(1 - |z|)``
    down to ``1e-300``; below that ``Q1`` is reported as 0.
    """
    p_h, p_v = _check_probabilities(p_h, p_v)
    if is_zero_region(p_h, p_v):
        return PdlQ1Result(p_h, p_v, None, 0.0, None, None)

    if p_h == p_v:
        z_star, up, down = 0.0, 1.0, 1.0
    else:
        d = _d_function(p_h, p_v)
        sign = 1.0 if p_v > p_h else -1.0
        grid = sign * np.linspace(0.0, 1.0 - Z_EDGE, PRESCAN_POINTS)
        values = np.array([d(z) for z in grid])
        i = _sign_change(values)
        if i is not None:
            lo, hi = sorted((grid[i], grid[i + 1]))
            z_star = bisect(d, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
            up, down = 1.0 + z_star, 1.0 - z_star
        else:
            u = _edge_root(p_h, p_v, sign)
            if u is None:
                u = 0.0
            up, down = _edge_parts(sign, u)
            z_star = sign * (1.0 - u)

    q = _q_parts(p_h, p_v, up, down) if min(up, down) > 0.0 else 0.0
    zp = z_prime(p_h, p_v)
    q_zp = q_of_z(p_h, p_v, zp) if zp is not None else None
    return PdlQ1Result(p_h, p_v, float(z_star), max(q, 0.0), zp, q_zp, float(min(up, down)))


# -- two-letter analysis ---------------------------------------------------

def _diagonal_qubit(z: float) -> np.ndarray:
    return np.diag([0.5 * (1.0 + z), 0.5 * (1.0 - z)]).astype(complex)


def _resolve_z(p_h: float, p_v: float, z: float | None) -> float:
    if z is not None:
        if not -1.0 <= z <= 1.0:
            raise DomainError(f"z = {z} outside [-1, 1]")
        return float(z)
    res = solve_q1_pdl(p_h, p_v)
    if res.z_star is None:
        raise DomainError(f"Q1 vanishes at (p_h, p_v) = ({p_h}, {p_v}); the optimal input is undefined")
    return res.z_star


def rho2_witness(p_h: float, p_v: float, z: float | None = None) -> np.ndarray:
    """Two-qubit input ``rho_HH^2 |HH><HH| + 2 rho_HH rho_VV |phi-><phi-| + rho_VV^2 |VV><VV|``.

    ``z`` defaults to the single-letter optimum ``z_star``.
    """
    z = _resolve_z(*_check_probabilities(p_h, p_v), z)
    r_hh, r_vv = 0.5 * (1.0 + z), 0.5 * (1.0 - z)
    phi = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = r_hh ** 2
    rho[3, 3] = r_vv ** 2
    rho += 2.0 * r_hh * r_vv * np.outer(phi, phi)
    return rho


def rho1_product(p_h: float, p_v: float, z: float | None = None) -> np.ndarray:
    """``rho_1 (x) rho_1`` for the diagonal single-letter input."""
    rho1 = _diagonal_qubit(_resolve_z(*_check_probabilities(p_h, p_v), z))
    return np.kron(rho1, rho1)


def _two_letter_channels(p_h: float, p_v: float):
    gamma = generalized_erasure(pdl_operation(p_h, p_v)).channel
    gamma2 = tensor(gamma, gamma)
    return gamma2, complementary(gamma2)


@dataclass
class EntropyDecrementReport:
    """Entropy changes from ``rho_1 (x) rho_1`` to ``rho_2`` under ``Gamma^(x)2`` and its complement (bits)."""

    p_h: float
    p_v: float
    z: float
    direct_decrement: float
    complementary_decrement: float
    direct_expected: float
    complementary_expected: float
    direct_residual: float
    complementary_residual: float
    coherent_gain: float

    def to_dict(self) -> dict:
        return asdict(self)


def entropy_decrement_check(p_h: float, p_v: float, z: float | None = None) -> EntropyDecrementReport:
    """Compare output-entropy changes with ``-2 p_h p_v rho_HH rho_VV`` and ``-2 (1-p_h)(1-p_v) rho_HH rho_VV``.

    ``coherent_gain`` is half the coherent-information increase, expected to
    equal ``(1 - p_h - p_v) rho_HH rho_VV``.
    """
    p_h, p_v = _check_probabilities(p_h, p_v)
    z = _resolve_z(p_h, p_v, z)
    rho2, rho11 = rho2_witness(p_h, p_v, z), rho1_product(p_h, p_v, z)
    gamma2, comp2 = _two_letter_channels(p_h, p_v)
    d_direct = von_neumann_entropy(gamma2(rho2)) - von_neumann_entropy(gamma2(rho11))
    d_comp = von_neumann_entropy(comp2(rho2)) - von_neumann_entropy(comp2(rho11))
    weight = 0.25 * (1.0 + z) * (1.0 - z)
    e_direct = -2.0 * p_h * p_v * weight
    e_comp = -2.0 * (1.0 - p_h) * (1.0 - p_v) * weight
    return EntropyDecrementReport(p_h, p_v, z, d_direct, d_comp, e_direct, e_comp,
                                  abs(d_direct - e_direct), abs(d_comp - e_comp), 0.5 * (d_direct - d_comp))


def in_superadditivity_region(p_h: float, p_v: float) -> bool:
    """``1/2 < p_h < 1`` and ``0 < p_v < 1 - p_h``, or the same with the roles swapped."""
    def one_way(a, b):
        return 0.5 < a < 1.0 and 0.0 < b and a + b < 1.0
    return one_way(p_h, p_v) or one_way(p_v, p_h)


def superadditivity_lower_bound(p_h: float, p_v: float) -> float:
    """``(1 - p_h - p_v) rho_HH rho_VV`` bits at ``z_star``; 0 outside the superadditivity region."""
    p_h, p_v = _check_probabilities(p_h, p_v)
    if not in_superadditivity_region(p_h, p_v):
        return 0.0
    z = solve_q1_pdl(p_h, p_v).z_star
    return (1.0 - p_h - p_v) * 0.25 * (1.0 + z) * (1.0 - z)


def two_letter_q1(p_h: float, p_v: float, restarts: int = TWO_LETTER_RESTARTS, seed: int = DEFAULT_SEED,
                  maxfev: int = TWO_LETTER_MAXFEV) -> float:
    """Half the optimized coherent information of ``Gamma^(x)2`` (bits), a lower estimate of ``Q1(Gamma^(x)2)/2``.

    Warm starts ``rho_2``, ``rho_1 (x) rho_1`` and their average take the
    first three of the ``restarts`` local searches; their exact values are
    always candidates, so the result is at least ``rho_2``'s value.
    """
    return _two_letter_search(p_h, p_v, restarts, seed, maxfev)[0]


def _two_letter_search(p_h, p_v, restarts, seed, maxfev):
    p_h, p_v = _check_probabilities(p_h, p_v)
    res = solve_q1_pdl(p_h, p_v)
    z = res.z_star if res.z_star is not None else 0.0
    rho2, rho11 = rho2_witness(p_h, p_v, z), rho1_product(p_h, p_v, z)
    gamma2, _ = _two_letter_channels(p_h, p_v)
    value, rho = q1_search(gamma2, restarts=restarts, seed=seed, parametrization="factor",
                           warm_starts=[rho2, rho11, 0.5 * (rho2 + rho11)], maxfev=maxfev)
    return 0.5 * value, rho, res


def rho2_half_coherent_information(p_h: float, p_v: float, z: float | None = None) -> float:
    """``(S(Gamma^(x)2[rho_2]) - S(Gamma~^(x)2[rho_2])) / 2`` in bits."""
    p_h, p_v = _check_probabilities(p_h, p_v)
    gamma2, _ = _two_letter_channels(p_h, p_v)
    return 0.5 * _CoherentInformation(gamma2)(rho2_witness(p_h, p_v, z))


@dataclass
class SuperadditivityReport:
    """Single- versus two-letter coherent information (bits)."""

    p_h: float
    p_v: float
    q1_single: float
    q1_two_letter_half: float
    lower_bound: float
    gap: float
    in_region: bool
    residuals: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def superadditivity_report(p_h: float, p_v: float, restarts: int = TWO_LETTER_RESTARTS, seed: int = DEFAULT_SEED,
                           maxfev: int = TWO_LETTER_MAXFEV) -> SuperadditivityReport:
    """Gap ``two_letter_q1 - Q1`` next to the analytic lower bound."""
    half, _, single = _two_letter_search(p_h, p_v, restarts, seed, maxfev)
    p_h, p_v = single.p_h, single.p_v
    residuals = {}
    if single.z_star is not None:
        dec = entropy_decrement_check(p_h, p_v, single.z_star)
        residuals = {"direct_entropy": dec.direct_residual, "complementary_entropy": dec.complementary_residual,
                     "root": abs(_d_function(p_h, p_v)(single.z_star))}
    return SuperadditivityReport(p_h, p_v, single.q1, half, superadditivity_lower_bound(p_h, p_v),
                                 half - single.q1, in_superadditivity_region(p_h, p_v), residuals)


# -- grid scans ------------------------------------------------------------

def default_region(kind: str) -> tuple[float, float, float, float]:
    """``(p_h_min, p_h_max, p_v_min, p_v_max)`` for each scan kind."""
    if kind == "q1-heatmap":
        return (0.0, 1.0, 0.0, 1.0)
    if kind in SCAN_KINDS:
        return (0.5, 1.0, 0.0, 0.5)
    raise ValueError(f"unknown scan kind {kind!r}; choose from {SCAN_KINDS}")


def default_resolution(kind: str) -> int:
    return 101 if kind == "q1-heatmap" else 51


def _cell_value(task) -> float:
    kind, p_h, p_v, restarts, seed = task
    if kind == "q1-heatmap":
        return solve_q1_pdl(p_h, p_v).q1
    if kind == "superadd-lower-bound":
        return superadditivity_lower_bound(p_h, p_v)
    return superadditivity_report(p_h, p_v, restarts=restarts, seed=seed).gap


def scan_grid(kind: str = "q1-heatmap", resolution: int | None = None,
              region: tuple[float, float, float, float] | None = None, restarts: int = TWO_LETTER_RESTARTS,
              seed: int = DEFAULT_SEED, workers: int = 1) -> list[tuple[float, float, float]]:
    """Rows ``(p_h, p_v, value)`` over a uniform grid including the endpoints.

    Rows come in row-major order (``p_h`` outer, ``p_v`` inner) whatever the
    number of worker processes.
    """
    region = region or default_region(kind)
    default_region(kind)
    resolution = resolution or default_resolution(kind)
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    h_grid = np.linspace(region[0], region[1], resolution)
    v_grid = np.linspace(region[2], region[3], resolution)
    tasks = [(kind, float(h), float(v), restarts, seed) for h in h_grid for v in v_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_cell_value, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        values = [_cell_value(t) for t in tasks]
    return [(t[1], t[2], v) for t, v in zip(tasks, values)]


def argmax_row(rows: Iterable[tuple[float, float, float]]) -> tuple[float, float, float]:
    return max(rows, key=lambda r: r[2])


def write_csv(rows: Iterable[tuple[float, float, float]], stream: TextIO) -> None:
    """CSV with header ``p_h,p_v,value`` and 12 significant digits."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["p_h", "p_v", "value"])
    for row in rows:
        writer.writerow([f"{x:.12g}" for x in row])

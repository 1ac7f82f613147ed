"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line, printed in the terminal
summary. Tolerances are pinned; do not loosen them to make a run pass.
"""

import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import q1_oracle
from gecap.capacity import (
    bias_lower_bound,
    classical_bounds,
    f_lower_bound,
    holevo_capacity,
    q1,
    quantum_bounds,
)
from gecap.erasure import complementary, generalized_erasure, is_antidegradable_rank1, is_degradable_rank1
from gecap.linalg import psd_sqrt, pinv_sqrt_psd, pinv_psd, von_neumann_entropy
from gecap.operations import (
    compose,
    dual_on_identity,
    is_trace_preserving,
    max_action_difference,
    minimal_extension,
    normalized_apply,
    pauli_transfer_matrix,
    pdl_operation,
    phase_covariant_operation,
    phi_lambda,
    random_channel,
    random_density,
    random_operation,
    recover_channel_factor,
)
from gecap.pdl import (
    entropy_decrement_check,
    in_superadditivity_region,
    solve_q1_pdl,
    superadditivity_lower_bound,
    superadditivity_report,
    two_letter_q1,
)

HEADLINE_GAP = 7.197e-3
HEADLINE_TOL = 5e-4
CHAIN_TOL = 1e-6
DECREMENT_TOL = 1e-9
ORACLE_TOL = 1e-8
GENERIC_TOL = 1e-5
HOLEVO_TOL = 1e-3
Q1_TOL = 1e-5
DEGRADING_TOL = 1e-9
FACTOR_TOL = 1e-9
IMAGE_TOL = 1e-9
CLOSED_FORM_TOL = 1e-10
BIAS_BOUND_TOL = 1e-12


def record(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_superadditivity_headline():
    start = time.perf_counter()
    gaps = [superadditivity_report(h, v, restarts=64).gap for h, v in [(0.7, 0.19), (0.19, 0.7)]]
    ok = all(abs(g - HEADLINE_GAP) <= HEADLINE_TOL for g in gaps)
    record(1, ok, f"gap {gaps[0]:.6e} / mirrored {gaps[1]:.6e} vs {HEADLINE_GAP:.3e} +- {HEADLINE_TOL:.0e} "
                  f"({time.perf_counter() - start:.0f} s)")


def _chain_grid():
    h_grid = np.linspace(0.5, 1.0, 28)[1:-1]
    v_grid = np.linspace(0.0, 0.5, 28)[1:-1]
    return [(float(h), float(v)) for h in h_grid for v in v_grid if in_superadditivity_region(h, v)]


def test_criterion_02_superadditivity_chain():
    worst, cells = np.inf, _chain_grid()
    for h, v in cells:
        slack = two_letter_q1(h, v, restarts=1, maxfev=1500) - solve_q1_pdl(h, v).q1 - superadditivity_lower_bound(h, v)
        worst = min(worst, slack)
    record(2, worst >= -CHAIN_TOL, f"{len(cells)} in-region cells of a 26x26 grid, min slack {worst:.3e}")


def test_criterion_03_entropy_decrements():
    rng = np.random.default_rng(3)
    worst, count = 0.0, 0
    while count < 50:
        h, v = rng.uniform(0.5, 1.0), rng.uniform(0.0, 0.5)
        if rng.random() < 0.5:
            h, v = v, h
        if not in_superadditivity_region(h, v):
            continue
        rep = entropy_decrement_check(h, v)
        worst = max(worst, rep.direct_residual, rep.complementary_residual)
        count += 1
    record(3, worst < DECREMENT_TOL, f"50 random in-region points, max residual {worst:.3e}")


def test_criterion_04_exact_vs_oracle():
    grid = np.linspace(0, 1, 21)
    worst_oracle = worst_generic = 0.0
    zero_ok = True
    for h in grid:
        for v in grid:
            h, v = float(h), float(v)
            exact = solve_q1_pdl(h, v).q1
            worst_oracle = max(worst_oracle, abs(exact - q1_oracle(h, v)[0]))
            generic = q1(generalized_erasure(pdl_operation(h, v)), restarts=8)
            worst_generic = max(worst_generic, abs(exact - generic))
            if max(h, v) <= 0.5 or h * v == 0:
                zero_ok &= exact == 0.0
    ok = worst_oracle <= ORACLE_TOL and worst_generic <= GENERIC_TOL and zero_ok
    record(4, ok, f"21x21 grid, oracle err {worst_oracle:.2e}, generic err {worst_generic:.2e}, "
                  f"exact zeros {'ok' if zero_ok else 'violated'}")


def test_criterion_05_erasure_calibration():
    worst_chi = worst_q = 0.0
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        gamma = generalized_erasure(pdl_operation(p, p))
        worst_chi = max(worst_chi, abs(holevo_capacity(gamma, restarts=8) - p))
        worst_q = max(worst_q, abs(q1(gamma, restarts=8) - max(0.0, 2 * p - 1)))
    ok = worst_chi <= HOLEVO_TOL and worst_q <= Q1_TOL
    record(5, ok, f"chi err {worst_chi:.2e}, q1 err {worst_q:.2e}")


def test_criterion_06_degradability_atlas():
    rng = np.random.default_rng(6)
    grid = np.linspace(0, 1, 21)
    mismatches, worst = 0, 0.0
    for h in grid:
        for v in grid:
            op = pdl_operation(float(h), float(v))
            deg, anti = is_degradable_rank1(op), is_antidegradable_rank1(op)
            mismatches += bool(deg) != (min(h, v) >= 0.5 or h == 1 or v == 1)
            mismatches += bool(anti) != (max(h, v) <= 0.5 or h == 0 or v == 0)
            if deg:
                gamma = generalized_erasure(op).channel
                env = complementary(gamma)
                for _ in range(20):
                    rho = random_density(rng, 2)
                    diff = von_neumann_entropy(deg.degrading_map(gamma(rho))) - von_neumann_entropy(env(rho))
                    worst = max(worst, abs(diff))
    ok = mismatches == 0 and worst <= DEGRADING_TOL
    record(6, ok, f"21x21 grid, {mismatches} verdict mismatches, degrading-map entropy err {worst:.2e}")


def test_criterion_07_extension_round_trip():
    rng = np.random.default_rng(7)
    worst, tp_ok = 0.0, True
    for i in range(100):
        d = 2 + i % 2
        op = random_operation(rng, d, kraus_count=int(rng.integers(1, 4)))
        minimal = minimal_extension(op)
        ext = compose(random_channel(rng, minimal.dim_out, int(rng.integers(2, 5)), kraus_count=3), minimal)
        factor = recover_channel_factor(ext, op)
        tp_ok &= is_trace_preserving(factor)
        worst = max(worst, max_action_difference(compose(factor, minimal), ext))
    record(7, tp_ok and worst <= FACTOR_TOL, f"100 operations, factors trace preserving: {tp_ok}, err {worst:.2e}")


def _phase_covariant_samples(rng, count):
    out = []
    while len(out) < count:
        a = rng.uniform(0.05, 1)
        d = rng.uniform(-1, 1) * min(a, 1 - a) * 0.95
        c = rng.uniform(-1, 1) * (a - abs(d))
        b = rng.uniform(-1, 1) * np.sqrt(max((a + c) ** 2 - d * d, 0)) / 2
        try:
            out.append((a, b, c, d, phase_covariant_operation(a, b, c, d)))
        except Exception:
            continue
    return out


def test_criterion_08_image_coincidence():
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(100):
        d = 2 + i % 2
        op = random_operation(rng, d, kraus_count=int(rng.integers(1, 4)))
        dual = dual_on_identity(op)
        phi = phi_lambda(op)
        rho = random_density(rng, d)
        inv_half = pinv_sqrt_psd(dual)
        rho_prime = inv_half @ rho @ inv_half / np.trace(pinv_psd(dual) @ rho).real
        worst = max(worst, np.abs(phi(rho) - normalized_apply(op, rho_prime)).max())
        rho_prime = random_density(rng, d)
        half = psd_sqrt(dual)
        rho_back = half @ rho_prime @ half / np.trace(op(rho_prime)).real
        worst = max(worst, np.abs(normalized_apply(op, rho_prime) - phi(rho_back)).max())
    closed = 0.0
    for a, b, c, d, op in _phase_covariant_samples(rng, 50):
        r = pauli_transfer_matrix(phi_lambda(op))
        s = a * a - d * d
        expected = (b / np.sqrt(s), b / np.sqrt(s), a * c / s, -c * d / s)
        closed = max(closed, np.abs(np.array([r[1, 1], r[2, 2], r[3, 3], r[3, 0]]) - expected).max())
    ok = worst <= IMAGE_TOL and closed <= CLOSED_FORM_TOL
    record(8, ok, f"100 operations, correspondence err {worst:.2e}; 50 phase-covariant maps, closed-form err {closed:.2e}")


def test_criterion_09_bound_sanity():
    rng = np.random.default_rng(9)
    f_equal = max(f_lower_bound(p, p) for p in np.linspace(0, 1, 101))
    f_one = abs(f_lower_bound(0.0, 1.0) - 1.0)
    brewster = all(classical_bounds(pdl_operation(float(p), 0.0)).lower
                   <= classical_bounds(pdl_operation(float(p), 0.0)).upper for p in np.linspace(0, 1, 101))
    pairs = np.sort(rng.uniform(size=(10_000, 2)), axis=1)
    excess = max(bias_lower_bound(hi - lo) - f_lower_bound(lo, hi) for lo, hi in pairs)
    ok = f_equal == 0.0 and f_one <= 1e-12 and brewster and excess <= BIAS_BOUND_TOL
    record(9, ok, f"F(p,p) max {f_equal:.1e}, |F(0,1)-1| {f_one:.1e}, Brewster ordered: {brewster}, "
                  f"bias-bound excess {excess:.2e}")


def test_criterion_10_bound_consistency():
    rng = np.random.default_rng(10)
    bad = 0
    grid = np.linspace(0, 1, 6)
    for h in grid:
        for v in grid:
            op = pdl_operation(float(h), float(v))
            for rep in (classical_bounds(op), quantum_bounds(op, restarts=2)):
                bad += rep.lower > rep.upper + 1e-9
            exact = solve_q1_pdl(float(h), float(v)).q1
            rep = quantum_bounds(op, restarts=2)
            bad += not (rep.lower - 1e-6 <= exact <= rep.upper + 1e-9)
    for i in range(10):
        op = random_operation(rng, 2 + i % 2, kraus_count=2)
        for rep in (classical_bounds(op, holevo=True, restarts=2), quantum_bounds(op, restarts=2)):
            bad += rep.lower > rep.upper + 1e-9
    record(10, bad == 0, f"{bad} inconsistent brackets over a 6x6 PDL grid and 10 random operations")

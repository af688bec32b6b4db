"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a one-line verdict that the terminal summary prints as
``criterion N: PASS|FAIL``.
"""

import numpy as np

from tricenter import kam, reference
from tricenter.core import (
    CartesianState,
    SystemConfig,
    full_hamiltonian,
    integrate,
    truncated_hamiltonian,
)
from tricenter.equilibria import (
    classify,
    equilibrium,
    hessian_at,
    near_return_distance,
    residual_field,
    return_envelope,
)
from tricenter.verify import suite_brackets, suite_normalform

L_VALUES = (0.8, 1.0, 1.3)


def _record(record_property, number, ok, detail):
    record_property("criterion", number)
    record_property("detail", detail)
    assert ok, detail


def test_criterion_01_hessians(record_property):
    worst_entry = worst_det = 0.0
    for L in L_VALUES:
        for i in range(1, 7):
            H = hessian_at(equilibrium("first", i, L))
            ref = reference.hessian(i, L)
            worst_entry = max(worst_entry, float(np.max(np.abs(H - ref) / np.abs(ref))))
            worst_det = max(worst_det, abs(np.linalg.det(H) / reference.hessian_det(i, L) - 1))
    ok = worst_entry <= 1e-9 and worst_det <= 1e-9
    _record(record_property, 1, ok,
            f"Hessian entries rel {worst_entry:.2e}, determinants rel {worst_det:.2e} (tol 1e-9)")


def test_criterion_02_spectra(record_property):
    worst_eig = worst_poly = 0.0
    real_pairs = True
    for L in L_VALUES:
        for i in range(1, 7):
            rep = classify(equilibrium("first", i, L))
            lam = rep.eigenvalues
            if i <= 4:
                got = np.sort(np.abs(lam.imag))
                want = np.sort(np.repeat(reference.eigenvalue_moduli(i, L), 2))
                worst_eig = max(worst_eig, float(np.max(np.abs(got - want))),
                                float(np.max(np.abs(lam.real))))
            else:
                real = np.sort(lam[np.abs(lam.imag) < 1e-10].real)
                real_pairs &= len(real) == 2 and real[1] > 1e-6 and abs(real[0] + real[1]) < 1e-9
            cref = reference.char_poly(i, L)
            scale = np.where(cref == 0, 1.0, np.abs(cref))
            worst_poly = max(worst_poly, float(np.max(np.abs(rep.char_poly - cref) / scale)))
    ok = worst_eig <= 1e-9 and worst_poly <= 1e-9 and real_pairs
    _record(record_property, 2, ok,
            f"eigenvalues {worst_eig:.2e}, char-poly rel {worst_poly:.2e}, "
            f"E5/E6 real pair {real_pairs}")


def test_criterion_03_verdicts(record_property):
    got = {(L, i): classify(equilibrium("first", i, L)).verdict
           for L in L_VALUES for i in range(1, 7)}
    bad = [k for k, v in got.items() if v != reference.VERDICTS[k[1]]]
    _record(record_property, 3, not bad, f"mismatched verdicts {bad}")


def test_criterion_04_second_order_identity(record_property):
    rep = suite_normalform(np.random.default_rng(0), grid=5)
    checks = {c.name: c for c in rep.checks}
    identity = checks["second_order_identity"]
    mean_h1 = checks["mean_h1_vanishes"]
    ok = identity.residual <= 1e-6 and mean_h1.residual <= 1e-10
    _record(record_property, 4, ok,
            f"<H2 + {{H1, W1}}> vs displayed coefficient {identity.residual:.2e} (tol 1e-6); "
            f"<H1> {mean_h1.residual:.2e} (tol 1e-10); axisymmetric average "
            f"{checks['second_order_axisymmetric'].residual:.2e}")


def test_criterion_05_chart_composition(record_property):
    rep = suite_normalform(np.random.default_rng(1), grid=2)
    checks = {c.name: c for c in rep.checks}
    names = ("h1_chart_composition", "h2_chart_composition", "delaunay_round_trip")
    ok = all(checks[n].residual <= 1e-10 for n in names)
    _record(record_property, 5, ok,
            ", ".join(f"{n} {checks[n].residual:.2e}" for n in names) + " (tol 1e-10)")


def test_criterion_06_brackets(record_property):
    rep = suite_brackets(np.random.default_rng(2))
    checks = {c.name: c for c in rep.checks}
    limits = {"bracket_x_x": 1e-6, "bracket_y_y": 1e-6, "bracket_x_y": 1e-6,
              "first_field_vs_bracket_flow": 1e-8, "second_field_collinear": 1e-8,
              "first_field_casimirs": 1e-12, "second_field_casimir": 1e-12}
    bad = [n for n, tol in limits.items() if not checks[n].residual <= tol]
    worst = ", ".join(f"{n} {checks[n].residual:.1e}" for n in limits)
    _record(record_property, 6, not bad, f"failing {bad}; {worst}")


def test_criterion_07_equilibria(record_property):
    worst = 0.0
    for L in L_VALUES:
        for i in range(1, 7):
            worst = max(worst, float(np.max(np.abs(residual_field(equilibrium("first", i, L))))))
            for G in (0.5 * L, L):
                worst = max(worst, float(np.max(np.abs(residual_field(equilibrium("second", i, L, G))))))
    _record(record_property, 7, worst <= 1e-12, f"max reduced field {worst:.2e} (tol 1e-12)")


def test_criterion_08_reconstruction(record_property):
    _, f_e1 = near_return_distance(equilibrium("first", 1, 1.0), 0.1)
    eps = np.array([0.2, 0.1, 0.05])
    slopes = {}
    for i in range(1, 5):
        e = equilibrium("first", i, 1.0)
        d = np.array([near_return_distance(e, x)[1] for x in eps])
        slopes[i] = float(np.polyfit(np.log2(eps), np.log2(d), 1)[0])
    env1 = return_envelope(equilibrium("first", 1, 1.0), 0.1, periods=10)
    env5 = return_envelope(equilibrium("first", 5, 1.0), 0.1, periods=10)
    exceeds = bool(np.any(env5 > np.max(env1)))
    slopes_ok = all(2.0 <= s <= 4.0 for s in slopes.values())
    ok = f_e1 <= 0.05 and slopes_ok and exceeds
    slope_text = ", ".join(f"E{i} {s:.3f}" for i, s in slopes.items())
    _record(record_property, 8, ok,
            f"E1 return {f_e1:.2e} (tol 0.05); log2 slopes {slope_text} (window [2, 4]); "
            f"E5 exceeds E1 max within 10 periods {exceeds}")


def test_criterion_09_kam_ranks(record_property):
    rng = np.random.default_rng(3)
    bad, worst_fd = [], 0.0
    for space in kam.SPACES:
        for pair in kam.PAIRS:
            expected = kam.EXPECTED_RANK[(space, pair)]
            for _ in range(20):
                a, b = rng.uniform(0.0, 1.0, 2)
                actions = [1.0, a, b] if space == "first" else [1.0, 0.05 + 0.95 * a, b]
                m = kam.m_omega(space, pair, actions)
                ranks = {kam.rank(m, tol) for tol in (1e-8, 1e-10, 1e-12)}
                if ranks != {expected}:
                    bad.append((space, pair, tuple(actions), ranks))
                fd = kam.m_omega_numeric(space, pair, actions)
                worst_fd = max(worst_fd, float(np.max(np.abs(fd - m) / (1 + np.abs(m)))))
    ok = not bad and worst_fd <= 1e-7
    _record(record_property, 9, ok, f"rank mismatches {len(bad)}, FD columns {worst_fd:.2e} (tol 1e-7)")


def test_criterion_10_energy_and_expansion(record_property):
    cfg = SystemConfig(0.1)
    states = [CartesianState([1.0, 0.0, 0.0], [0.0, 1.0, 0.05]),
              CartesianState([0.9, 0.3, 0.2], [-0.3, 1.05, 0.1])]
    drift = max(integrate(s, 10 * 2 * np.pi, cfg, samples=2001).max_relative_energy_drift
                for s in states)
    # The remainder is O(eps^3); halving ratios approach 8 as eps -> 0.
    rng = np.random.default_rng(4)
    ratios = []
    for _ in range(10):
        u = rng.normal(size=3)
        s = CartesianState(u / np.linalg.norm(u), rng.normal(size=3))
        rem = [full_hamiltonian(s, SystemConfig(x)) - truncated_hamiltonian(s, x)
               for x in (0.05, 0.025, 0.0125)]
        ratios += [rem[0] / rem[1], rem[1] / rem[2]]
    ok = drift <= 1e-9 and all(6.0 <= r <= 10.0 for r in ratios)
    _record(record_property, 10, ok,
            f"energy drift {drift:.2e} (tol 1e-9); remainder ratios "
            f"in [{min(ratios):.2f}, {max(ratios):.2f}] (window [6, 10])")

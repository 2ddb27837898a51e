"""Certified integration over chains: oracles, invariants, the verifier."""

import math

import numpy as np
import pytest

from gaugeint import (
    AmbientGauge,
    ArcFunction,
    CauchyFail,
    Curve,
    Current1D,
    ExceptionalTagEncountered,
    MonotonicityViolation,
    PieceCharge,
    QuadratureUnstable,
    ftc_verify,
    hkp_integrate,
    hkp_riemann_sum,
    howard_cousin_current,
    indefinite_integral,
    lebesgue_compare,
    mass_charge,
    monotone_convergence_harness,
    piece_as_current,
    restrict,
    saks_henstock_hkp_audit,
    uniform_current_schedule,
)
from gaugeint.hkp_integral import REPORT_COLUMNS, REPORT_PREAMBLE

# seed gap for a Lipschitz integrand is about Lip * h * length, so the
# blanket mesh keeps a margin under eps for length-5 chains
MESH = uniform_current_schedule(lambda e: e / 4.0)


def x1(p):
    A = np.asarray(p, dtype=float)
    return A[..., 0] if A.ndim > 1 else float(A[0])


def x2(p):
    A = np.asarray(p, dtype=float)
    return A[..., 1] if A.ndim > 1 else float(A[1])


# ---------------------------------------------------------------------------
# oracles

def test_constant_integrand_gives_mass(segment345):
    res = hkp_integrate(lambda p: 1.0, segment345, mass_charge(), MESH, 1e-3)
    assert res.value == pytest.approx(5.0, abs=1e-9)
    assert res.epsilon < 1e-3


def test_closed_loop_odd_integrand_cancels(circle1024):
    res = hkp_integrate(x1, circle1024, mass_charge(), MESH, 1e-3)
    assert abs(res.value) < 1e-3
    assert res.epsilon < 1e-3


def test_certified_value_matches_midpoint_oracle(circle1024):
    # same polyline, two routes: tagged families vs midpoint quadrature
    from gaugeint import lambda_f
    f = lambda p: np.asarray(p)[..., 0] ** 2 if np.asarray(p).ndim > 1 \
        else float(p[0]) ** 2
    res = hkp_integrate(f, circle1024, mass_charge(), MESH, 1e-3)
    oracle = lambda_f(f, circle1024.full_piece())
    assert res.value == pytest.approx(oracle, abs=2e-3)


def test_eps_must_be_positive(segment345):
    with pytest.raises(ValueError):
        hkp_integrate(lambda p: 1.0, segment345, mass_charge(), MESH, 0.0)


# ---------------------------------------------------------------------------
# invariants, all within the certificates

def test_linearity_within_certificates(segment345):
    a, b = 2.5, -1.5
    f = x1
    g = x2
    fg = lambda p: a * x1(p) + b * x2(p)
    rf = hkp_integrate(f, segment345, mass_charge(), MESH, 1e-3)
    rg = hkp_integrate(g, segment345, mass_charge(), MESH, 1e-3)
    rfg = hkp_integrate(fg, segment345, mass_charge(), MESH, 1e-3)
    slack = rfg.epsilon + abs(a) * rf.epsilon + abs(b) * rg.epsilon + 1e-12
    assert abs(rfg.value - (a * rf.value + b * rg.value)) <= slack


def test_order_within_certificates(segment345):
    f = lambda p: 0.2 * x1(p)
    g = lambda p: 0.2 * x1(p) + 0.3
    rf = hkp_integrate(f, segment345, mass_charge(), MESH, 1e-3)
    rg = hkp_integrate(g, segment345, mass_charge(), MESH, 1e-3)
    assert rg.value >= rf.value - (rf.epsilon + rg.epsilon)
    assert rg.value - rf.value == pytest.approx(0.3 * 5.0, abs=3e-3)


def test_single_point_change_is_invisible(segment345):
    # a gauge vanishing at the changed point keeps every tag away from it
    p0 = segment345.components[0][0].point_at(2.5)

    def spiked(p):
        A = np.asarray(p, dtype=float)
        if A.ndim == 1:
            return 1e6 if bool(np.all(A == p0)) else float(A[0])
        hit = (A[:, 0] == p0[0]) & (A[:, 1] == p0[1])
        return np.where(hit, 1e6, A[:, 0])

    def sched(eps):
        return AmbientGauge(
            fn=lambda p: min(0.2 * eps, float(np.hypot(*(np.asarray(p) - p0)))),
            zero_points=(tuple(p0),))

    r_clean = hkp_integrate(x1, segment345, mass_charge(), sched, 1e-2)
    r_spiked = hkp_integrate(spiked, segment345, mass_charge(), sched, 1e-2)
    assert r_spiked.value == r_clean.value
    assert r_clean.value == pytest.approx(7.5, abs=1e-2)


def test_disjoint_components_decompose():
    A = Current1D([(Curve(np.array([[0.0, 0.0], [1.0, 0.0]])), 1)])
    B = Current1D([(Curve(np.array([[0.0, 1.0], [1.0, 1.0]])), 1)])
    both = Current1D([(A.components[0][0], 1), (B.components[0][0], 1)])
    ra = hkp_integrate(x1, A, mass_charge(), MESH, 1e-3)
    rb = hkp_integrate(x1, B, mass_charge(), MESH, 1e-3)
    rboth = hkp_integrate(x1, both, mass_charge(), MESH, 1e-3)
    slack = ra.epsilon + rb.epsilon + rboth.epsilon
    assert abs(rboth.value - (ra.value + rb.value)) <= slack
    assert rboth.value == pytest.approx(1.0, abs=2e-3)


def test_indefinite_integral_restriction_consistent(segment345):
    S = restrict(segment345, [(0, 0.0, 2.5, 1)])
    F = indefinite_integral(x1, segment345, MESH, 1e-3, pieces=[S])
    assert F(S) == pytest.approx(3.0 / 10.0 * 2.5 ** 2, abs=2e-3)
    whole = F.results["full"]
    comp = S.complement()
    assert abs(F(S) + F(comp) - whole.value) <= whole.epsilon + 4e-3


# ---------------------------------------------------------------------------
# audits

def test_saks_henstock_hkp_audit_under_two_eps(segment345):
    eps = 1e-3
    gauge = MESH.gauge(eps)
    fam = howard_cousin_current(segment345, gauge, mass_charge(), eps)
    assert fam.is_fine(np.full(fam.n, eps))

    def exact(S):
        return sum(m * 0.3 * (s2 ** 2 - s1 ** 2)
                   for _ci, s1, s2, m in S.fragments)

    F = PieceCharge(exact, frozenset({"additive"}), "primitive")
    audit = saks_henstock_hkp_audit(x1, F, fam)
    assert audit < 2.0 * eps
    assert hkp_riemann_sum(x1, fam) == pytest.approx(7.5, abs=2e-3)


# ---------------------------------------------------------------------------
# convergence harnesses

def test_monotone_harness_accepts_increasing_sequence(segment345):
    f_seq = [lambda p, k=k: x1(p) - 1.0 / k for k in (1, 2, 4)]
    results = monotone_convergence_harness(f_seq, segment345, mass_charge(),
                                           MESH, 1e-3)
    assert len(results) == 3
    vals = [r.value for r in results]
    assert vals == sorted(vals)
    assert vals[-1] == pytest.approx(7.5 - 5.0 / 4.0, abs=2e-3)


def test_monotone_harness_rejects_decreasing_sequence(segment345):
    f_seq = [lambda p: 1.0, lambda p: 0.0]
    with pytest.raises(MonotonicityViolation):
        monotone_convergence_harness(f_seq, segment345, mass_charge(),
                                     MESH, 1e-3)


def test_lebesgue_compare_agrees_on_smooth_integrand(circle16):
    f = lambda p: np.asarray(p)[..., 0] ** 2 if np.asarray(p).ndim > 1 \
        else float(p[0]) ** 2
    leb, res = lebesgue_compare(f, circle16, gauge_schedule=MESH, eps=1e-3)
    assert abs(leb - res.value) < 2e-3


def test_lebesgue_compare_flags_unstable_quadrature(segment345):
    f = ArcFunction({0: lambda ss: 1.0 / np.sqrt(np.asarray(ss, dtype=float))})
    with pytest.raises(QuadratureUnstable) as info:
        lebesgue_compare(f, segment345, max_refine=10)
    assert len(info.value.values) == 10


# ---------------------------------------------------------------------------
# non-integrability diagnostics

def test_cauchy_fail_carries_growing_partial_sums(segment345):
    # 1/s at the foot: each smaller tau uncovers more of the divergence
    f = ArcFunction({0: lambda ss: 1.0 / np.asarray(ss, dtype=float)})
    foot = (0.0, 0.0)

    def sched(eps):
        return AmbientGauge(
            fn=lambda p: min(1e-2, float(np.hypot(p[0], p[1]))),
            zero_points=(foot,))

    with pytest.raises(CauchyFail) as info:
        hkp_integrate(f, segment345, mass_charge(), sched, 1e-3,
                      tau_schedule=[1e-1, 1e-2, 1e-3])
    partial = info.value.partial_sums
    assert len(partial) == 4
    sums = [s for _tau, s in partial[:3]]
    assert sums[0] < sums[1] < sums[2]


# ---------------------------------------------------------------------------
# the boundary pairing verifier

def test_ftc_verify_linear_on_segment(segment345):
    rep = ftc_verify(x1, segment345, [1e-2, 1e-3],
                     Du=lambda p: (1.0, 0.0))
    assert rep.lhs == pytest.approx(3.0, abs=1e-12)
    assert rep.max_discrepancy() < 1e-3
    for row, eps in zip(rep.rows, (1e-2, 1e-3)):
        assert row["epsilon"] == eps
        assert row["gap"] < eps


def test_ftc_verify_discrepancy_monotone_within_certificates(circle16):
    u = lambda p: float(p[0]) ** 2 + float(p[1])

    def du(p):
        A = np.asarray(p, dtype=float)
        if A.ndim == 1:
            return (2.0 * A[0], 1.0)
        out = np.empty_like(A)
        out[:, 0] = 2.0 * A[:, 0]
        out[:, 1] = 1.0
        return out

    rep = ftc_verify(u, circle16, [1e-1, 1e-2, 1e-3], Du=du,
                     u_batch=lambda P: P[:, 0] ** 2 + P[:, 1])
    assert rep.lhs == pytest.approx(0.0, abs=1e-12)
    rows = rep.rows
    for r, eps in zip(rows, (1e-1, 1e-2, 1e-3)):
        assert r["discrepancy"] < eps
    for ra, rb in zip(rows, rows[1:]):
        assert rb["discrepancy"] <= ra["discrepancy"] + ra["gap"] + rb["gap"]


def test_ftc_verify_rejects_positive_gauge_at_exceptional(segment345):
    with pytest.raises(ExceptionalTagEncountered):
        ftc_verify(x1, segment345, [1e-2], Du=lambda p: (1.0, 0.0),
                   exceptional=[(0.0, 0.0)],
                   gauge_schedule=uniform_current_schedule(lambda e: 0.5 * e))


def test_report_csv_round_trips(segment345):
    rep = ftc_verify(x1, segment345, [1e-2], Du=lambda p: (1.0, 0.0))
    text = rep.to_csv()
    lines = text.splitlines()
    assert lines[0] == REPORT_PREAMBLE
    assert lines[1] == ",".join(REPORT_COLUMNS)
    cells = lines[2].split(",")
    parsed = dict(zip(REPORT_COLUMNS, cells))
    assert float(parsed["certified_value"]) == rep.rows[0]["certified_value"]
    assert float(parsed["lhs"]) == rep.lhs


# ---------------------------------------------------------------------------
# pieces as chains

def test_piece_as_current_preserves_mass(segment345):
    S = restrict(segment345, [(0, 1.0, 4.0, 1)])
    sub = piece_as_current(S)
    assert sub.full_piece().mass() == pytest.approx(3.0, abs=1e-12)
    res = hkp_integrate(lambda p: 1.0, sub, mass_charge(), MESH, 1e-3)
    assert res.value == pytest.approx(3.0, abs=1e-9)


def test_tangential_fd_matches_gradient_route(segment345):
    fd = ArcFunction.tangential_fd(segment345, x1)
    ss = np.linspace(0.5, 4.5, 9)
    assert np.allclose(fd.fns[0](ss), 0.6, atol=1e-6)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaugeint import (
    CauchyFail,
    ContinuityBudgetFail,
    DepthExceeded,
    Gauge,
    InvalidGauge,
    PrimitiveControl,
    ac_star_probe,
    cousin_partition,
    ftc_schedule,
    gallery,
    hk_integrate,
    howard_cousin_family,
    riemann_sum,
    saks_henstock_audit,
    uniform_schedule,
)
from gaugeint.hk_core import TaggedFamily1D


# ---------------------------------------------------------------------------
# gauges

def test_gauge_rejects_negative_value():
    g = Gauge(0.0, 1.0, lambda x: -1.0)
    with pytest.raises(InvalidGauge):
        g(0.5)


def test_gauge_rejects_undeclared_zero():
    g = Gauge(0.0, 1.0, lambda x: abs(x - 0.5))
    with pytest.raises(InvalidGauge):
        g(0.5)


def test_gauge_accepts_declared_zero():
    g = Gauge(0.0, 1.0, lambda x: abs(x - 0.5), zero_set=(0.5,))
    assert g(0.5) == 0.0
    assert g(0.25) == 0.25


def test_gauge_batch_matches_scalar():
    g = Gauge.proportional(0.0, 2.0, 0.0, 0.1)
    xs = np.linspace(0.1, 1.9, 17)
    batch = g.eval_many(xs)
    assert batch == pytest.approx([g(float(x)) for x in xs], abs=0.0)


# ---------------------------------------------------------------------------
# Cousin partitions

def test_cousin_partition_is_fine_partition():
    g = Gauge(0.0, 1.0, lambda x: 0.05 + 0.2 * x)
    part = cousin_partition((0.0, 1.0), g)
    assert part.is_partition
    assert part.is_fine(g)
    # tags sit inside their own interval
    assert np.all(part.lefts <= part.tags)
    assert np.all(part.tags <= part.rights)


def test_cousin_partition_deterministic():
    g = Gauge.uniform(0.0, 1.0, 0.013)
    p1 = cousin_partition((0.0, 1.0), g)
    p2 = cousin_partition((0.0, 1.0), g)
    assert np.array_equal(p1.lefts, p2.lefts)
    assert np.array_equal(p1.tags, p2.tags)


def test_cousin_partition_node_budget():
    g = Gauge.uniform(0.0, 1.0, 1e-6)
    with pytest.raises(DepthExceeded):
        cousin_partition((0.0, 1.0), g, max_nodes=100)


@given(st.floats(min_value=0.01, max_value=0.5),
       st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.1, max_value=3.0))
@settings(max_examples=25, deadline=None)
def test_cousin_partition_properties_random(h, a, span):
    b = a + span
    g = Gauge.uniform(a, b, h)
    part = cousin_partition((a, b), g)
    assert part.is_partition
    assert part.is_fine(g)


# ---------------------------------------------------------------------------
# Riemann sums

def test_riemann_sum_additive_over_merge():
    g = Gauge.uniform(0.0, 1.0, 0.1)
    left = cousin_partition((0.0, 0.5), g)
    right = cousin_partition((0.5, 1.0), g)
    f = lambda x: x * x - 0.3
    merged = TaggedFamily1D(
        (0.0, 1.0),
        np.concatenate([left.lefts, right.lefts]),
        np.concatenate([left.rights, right.rights]),
        np.concatenate([left.tags, right.tags]))
    assert merged.is_partition
    assert riemann_sum(f, merged) == pytest.approx(
        riemann_sum(f, left) + riemann_sum(f, right), abs=1e-15)


def test_riemann_sum_linear_in_f():
    g = Gauge.uniform(0.0, 1.0, 0.07)
    part = cousin_partition((0.0, 1.0), g)
    f = lambda x: math.sin(3.0 * x)
    h = lambda x: x
    combo = riemann_sum(lambda x: 2.0 * f(x) + h(x), part)
    assert combo == pytest.approx(2.0 * riemann_sum(f, part)
                                  + riemann_sum(h, part), rel=1e-12)


def test_riemann_sum_vector_scalar_agree():
    g = Gauge.uniform(0.0, 1.0, 0.01)
    part = cousin_partition((0.0, 1.0), g)

    def f(x):
        xs = np.asarray(x, dtype=float)
        out = np.sin(xs) + xs
        return float(out) if np.ndim(x) == 0 else out

    assert riemann_sum(f, part) == riemann_sum(f, part, vectorized=True)


# ---------------------------------------------------------------------------
# certified integrals

def test_hk_integrate_linear_exact_midpoint():
    res = hk_integrate(lambda x: x, uniform_schedule(0.0, 1.0, 1e-3), 1e-3,
                       vectorized=True)
    assert res.value == 0.5
    assert res.epsilon < 1e-3


def test_hk_integrate_polynomial():
    res = hk_integrate(lambda x: 3.0 * x * x, uniform_schedule(0.0, 1.0, 1e-4),
                       1e-3, vectorized=True)
    assert abs(res.value - 1.0) < 1e-3


def test_hk_integrate_trig_closed_form():
    res = hk_integrate(np.sin, uniform_schedule(0.0, math.pi, 1e-3), 5e-3,
                       vectorized=True)
    assert abs(res.value - 2.0) < 5e-3


def test_hk_integrate_converges_with_mesh():
    errs = []
    for h in (1e-1, 1e-2, 1e-3):
        res = hk_integrate(lambda x: math.exp(x), uniform_schedule(0.0, 1.0, h),
                           1.0)
        errs.append(abs(res.value - (math.e - 1.0)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-4


def test_hk_integrate_cauchyfail_on_tight_eps():
    with pytest.raises(CauchyFail):
        hk_integrate(lambda x: x, uniform_schedule(0.0, 1.0, 1e-2), 1e-9)


def test_hk_integrate_rejects_bad_eps():
    with pytest.raises(ValueError):
        hk_integrate(lambda x: x, uniform_schedule(0.0, 1.0, 0.1), 0.0)


def test_finite_set_change_does_not_move_value():
    # a gauge vanishing on the changed points keeps their contribution
    # inside the weighted carve budget
    bad = {0.3, 0.7}

    def f(x):
        return 100.0 if x in bad else x

    def sched(eps):
        return Gauge(0.0, 1.0,
                     lambda x: min(eps / 4.0, abs(x - 0.3), abs(x - 0.7)),
                     zero_set=(0.3, 0.7))

    from gaugeint import as_schedule
    res = hk_integrate(f, as_schedule(sched,
                                      control=PrimitiveControl(lambda x: 0.5 * x * x)),
                       1e-3)
    assert abs(res.value - 0.5) < 1e-3


# ---------------------------------------------------------------------------
# the pathological primitive pipeline

@pytest.fixture(scope="module")
def sqsin_runs(square_sine_pair):
    pair = square_sine_pair
    sched = ftc_schedule(pair["F"], pair["Fprime"],
                         list(pair["exceptional"]), pair["host"])
    runs = {}
    for eps in (1e-2, 1e-3):
        runs[eps] = hk_integrate(pair["Fprime"], sched, eps, vectorized=True,
                                 keep_families=True)
    return pair, runs


def test_ftc_pipeline_certifies_sin1(sqsin_runs):
    pair, runs = sqsin_runs
    for eps, res in runs.items():
        assert abs(res.value - pair["value"]) < 2.0 * eps
        assert res.epsilon < eps


def test_saks_henstock_audit_within_bound(sqsin_runs):
    pair, runs = sqsin_runs
    for eps, res in runs.items():
        for fc in res.certificate.families:
            audit = saks_henstock_audit(pair["Fprime"], pair["F"],
                                        fc.partition, vectorized=True)
            assert audit < 2.0 * eps


def test_saks_henstock_audit_on_subfamily(sqsin_runs):
    # the bound survives dropping pairs from the partition
    pair, runs = sqsin_runs
    res = runs[1e-2]
    part = res.certificate.families[0].partition
    keep = np.arange(part.n) % 3 == 0
    fam = TaggedFamily1D(part.host, part.lefts[keep], part.rights[keep],
                         part.tags[keep], validate=False)
    audit = saks_henstock_audit(pair["Fprime"], pair["F"], fam,
                                vectorized=True)
    assert audit < 2.0 * 1e-2


def test_howard_cousin_remainder_under_tau(square_sine_pair):
    pair = square_sine_pair
    eps = 1e-2
    tau = eps / 4.0
    sched = ftc_schedule(pair["F"], pair["Fprime"],
                         list(pair["exceptional"]), pair["host"])
    gauge = sched.gauge(eps)
    fc = howard_cousin_family(pair["host"], gauge, sched.control, tau)
    # remainder is exactly the carve union; evaluate the control on it
    carve_rows = [(float(l), float(r)) for l, r in
                  zip(fc.carves.lefts, fc.carves.rights)]
    val = abs(sched.control.union_value(carve_rows))
    assert val == fc.remainder_value or val == pytest.approx(
        fc.remainder_value, abs=1e-15)
    assert val < tau
    # carves + covered family partition the host
    assert fc.partition.is_partition


def test_carve_needs_control():
    g = Gauge(0.0, 1.0, lambda x: abs(x - 0.5), zero_set=(0.5,))
    with pytest.raises(InvalidGauge):
        howard_cousin_family((0.0, 1.0), g, None, 0.1)


def test_carve_budget_failure_on_jump():
    # a unit jump at the zero point can never fit a small charge budget
    F = lambda x: 0.0 if x < 0.5 else 1.0
    g = Gauge(0.0, 1.0, lambda x: abs(x - 0.5), zero_set=(0.5,))
    with pytest.raises(ContinuityBudgetFail):
        howard_cousin_family((0.0, 1.0), g, PrimitiveControl(F), 0.01)


# ---------------------------------------------------------------------------
# AC* probing

def test_ac_star_devil_staircase_fails():
    # the staircase climbs its full height inside the Cantor windows: with
    # anchors refined along with the gauge the witness never shrinks
    dev = gallery.devil_staircase(levels=16)
    for k in (8, 10):
        anchors = dev["level_points"](k)
        g = Gauge.uniform(0.0, 1.0, 3.0 ** -k)
        assert ac_star_probe(dev["fn"], anchors, g) > 0.9


def test_ac_star_smooth_primitive_passes():
    # an absolutely continuous charge's family sums scale away with the
    # gauge: bounded by 2 * sum(anchor) * h here
    anchors = gallery.devil_staircase(levels=16)["level_points"](8)
    g8 = Gauge.uniform(0.0, 1.0, 3.0 ** -8)
    g10 = Gauge.uniform(0.0, 1.0, 3.0 ** -10)
    p8 = ac_star_probe(lambda x: x * x, anchors, g8)
    p10 = ac_star_probe(lambda x: x * x, anchors, g10)
    assert p8 < 2.0 * float(np.sum(anchors)) * 3.0 ** -8 + 1e-12
    assert p10 < 0.01
    assert p10 < p8 / 5.0


# ---------------------------------------------------------------------------
# property: random cubics against their antiderivative

@given(st.integers(min_value=-3, max_value=3),
       st.integers(min_value=-3, max_value=3),
       st.integers(min_value=-3, max_value=3))
@settings(max_examples=20, deadline=None)
def test_hk_integrate_matches_antiderivative(c0, c1, c2):
    f = lambda x: c0 + c1 * x + 3.0 * c2 * x * x
    F = lambda x: c0 * x + 0.5 * c1 * x * x + c2 * x ** 3
    eps = 1e-3
    res = hk_integrate(f, uniform_schedule(0.0, 1.0, 1e-4), eps)
    assert abs(res.value - (F(1.0) - F(0.0))) < eps

import math
import logging
import pytest
from ptchain import ChainParams, SpecialMomentum, Reality, Order
from ptchain.critical import (
    special_radicands,
    gap_at_special_k,
    critical_fields,
    classify_phase,
    sweep_values,
    phase_diagram,
)
from ptchain.reality import eta_critical_isotropic
from utils import FIG1_I, FIG2_SOLID, random_params


TRIALS = 100


def test_critical_field_examples():
    fields = critical_fields(FIG1_I)
    assert fields.h_c1 == pytest.approx(math.sqrt(4.76), abs=1e-12)
    assert fields.h_c2 == pytest.approx(math.sqrt(1.56), abs=1e-12)
    assert fields.h_c1 == pytest.approx(2.18174, abs=1e-5)
    assert fields.h_c2 == pytest.approx(1.24900, abs=1e-5)


def test_critical_field_collapses_without_dimerization():
    fields = critical_fields(ChainParams(0.9, 0.9))
    assert fields.h_c2 == 0.0
    assert fields.h_c1 == pytest.approx(1.8)


def test_critical_field_undefined():
    fields = critical_fields(ChainParams(1.0, 0.5, gamma1=2.0, gamma2=-1.0, eta=0.2))
    assert fields.h_c1 is None
    assert critical_fields(FIG1_I._replace(eta=2.0)).h_c2 is None


def test_critical_field_ignores_h():
    def test():
        params = random_params()
        assert critical_fields(params) == critical_fields(params._replace(h=0.0))

    for _ in range(TRIALS):
        test()


def test_gap_closes_at_critical_fields():
    def test():
        params = random_params()
        fields = critical_fields(params)
        if fields.h_c1 is not None:
            assert abs(gap_at_special_k(params._replace(h=fields.h_c1), SpecialMomentum.K0)) < 1e-10
        if fields.h_c2 is not None:
            assert abs(gap_at_special_k(params._replace(h=fields.h_c2), SpecialMomentum.KPI2)) < 1e-10

    for _ in range(TRIALS):
        test()


def test_gap_example():
    assert gap_at_special_k(FIG1_I, SpecialMomentum.KPI2) == pytest.approx(1 - math.sqrt(1.56))
    assert gap_at_special_k(FIG1_I, SpecialMomentum.KPI2) == pytest.approx(-0.2490, abs=1e-4)
    assert gap_at_special_k(FIG1_I._replace(h=math.sqrt(4.76)), SpecialMomentum.K0) == pytest.approx(0.0, abs=1e-12)


def test_gap_is_complex_past_the_edge():
    gap = gap_at_special_k(FIG1_I._replace(eta=3.0), SpecialMomentum.K0)
    assert isinstance(gap, complex)
    assert gap.imag != 0


def test_gap_is_real_inside():
    assert isinstance(gap_at_special_k(FIG1_I, SpecialMomentum.K0), float)


def test_special_radicands():
    lam, mu = special_radicands(FIG2_SOLID, SpecialMomentum.KPI2)
    assert lam == pytest.approx(2.60)
    assert mu == pytest.approx(0.0, abs=1e-12)
    lam, mu = special_radicands(FIG2_SOLID, SpecialMomentum.K0)
    assert lam == pytest.approx(0.04 + 3.2 ** 2)
    assert mu == pytest.approx(1.44 - 1.0)


def test_gap_sign_is_the_order_criterion():
    """The acoustic gap is negative at exactly one special momentum inside the window."""

    def test():
        params = random_params(isotropic=True)
        fields = critical_fields(params)
        if fields.h_c1 is None or fields.h_c2 is None:
            return
        low, high = sorted((fields.h_c1, fields.h_c2))
        if min(abs(params.h - low), abs(params.h - high)) < 1e-6:
            return
        gaps = [gap_at_special_k(params, which) for which in SpecialMomentum]
        negative = sum(g.real < 0 for g in gaps)
        inside = low < params.h < high
        assert (negative == 1) == inside

    for _ in range(TRIALS):
        test()


def test_window_width_is_product_of_exchanges():
    def test():
        params = random_params(isotropic=True)
        fields = critical_fields(params)
        if fields.h_c1 is None or fields.h_c2 is None:
            return
        assert abs(fields.h_c1 ** 2 - fields.h_c2 ** 2) == pytest.approx(4 * abs(params.j1 * params.j2))

    for _ in range(TRIALS):
        test()


def test_classify_examples():
    point = classify_phase(FIG1_I._replace(h=1.5))
    assert point.reality is Reality.REAL
    assert point.order is Order.ORDERED
    assert point.h_c_low == pytest.approx(math.sqrt(1.56))
    assert point.h_c_high == pytest.approx(math.sqrt(4.76))
    assert point.isotropic_class

    point = classify_phase(FIG1_I._replace(h=3.0))
    assert point.order is Order.DISORDERED

    point = classify_phase(ChainParams(1.0, 1.0, h=1.0, eta=0.1))
    assert point.reality is Reality.BROKEN
    assert point.order is Order.UNDEFINED
    assert point.h_c_low is None
    assert point.h_c_high is None


def test_classify_anisotropic_class():
    assert not classify_phase(FIG2_SOLID).isotropic_class


def test_sweep_values():
    values = sweep_values((0.0, 1.0, 5), "h")
    assert list(values) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_sweep_errors():
    with pytest.raises(ValueError):
        sweep_values((0.0, 1.0, 1), "h")
    with pytest.raises(ValueError):
        sweep_values((0.0, 1.0, 2.5), "h")
    with pytest.raises(ValueError):
        sweep_values((1.0, 0.0, 3), "eta")


def test_phase_diagram_rejects_negative_fields():
    with pytest.raises(ValueError):
        phase_diagram(FIG1_I, (-1.0, 1.0, 3), (0.0, 1.0, 3), 64)


def test_phase_diagram_order():
    points = phase_diagram(FIG1_I, (0.0, 2.0, 3), (0.0, 1.0, 2), 64)
    assert [(p.h, p.eta) for p in points] == [
        (0.0, 0.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (2.0, 0.0),
        (2.0, 1.0),
    ]


def test_phase_diagram_is_deterministic():
    first = phase_diagram(FIG2_SOLID, (0.0, 2.0, 5), (0.0, 1.5, 4), 64)
    second = phase_diagram(FIG2_SOLID, (0.0, 2.0, 5), (0.0, 1.5, 4), 64)
    assert first == second


def test_phase_diagram_hermitian_row_is_real():
    points = phase_diagram(FIG2_SOLID, (0.0, 3.0, 7), (0.0, 0.5, 2), 64)
    assert all(p.reality is Reality.REAL for p in points if p.eta == 0.0)


def test_isotropic_boundary_does_not_depend_on_h():
    params = ChainParams(1.0, 0.6)
    eta_c = eta_critical_isotropic(params).eta_c
    points = phase_diagram(params, (0.1, 2.0, 5), (0.0, 2 * eta_c, 9), 64)
    for point in points:
        if abs(point.eta - eta_c) < 1e-9:
            continue
        assert (point.reality is Reality.REAL) == (point.eta < eta_c)


def test_fig2_points_differ_in_reality():
    assert classify_phase(FIG2_SOLID).reality is Reality.BROKEN
    assert classify_phase(FIG2_SOLID._replace(h=1.5)).reality is Reality.REAL


def test_undefined_order_is_summarized_once(caplog):
    caplog.set_level(logging.DEBUG, logger="ptchain")
    points = phase_diagram(FIG1_I, (0.0, 1.0, 2), (1.8, 2.0, 2), 64)
    assert all(p.order is Order.UNDEFINED for p in points)
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(warnings) == 1
    assert "4 of 4" in warnings[0].getMessage()
    per_point = [r for r in caplog.records if r.levelno == logging.DEBUG and "Order is undefined at h" in r.getMessage()]
    assert len(per_point) == 4


def test_broken_point_keeps_its_order():
    params = ChainParams(1.549, -0.0929, gamma1=-0.0196, gamma2=0.2735, h=0.106, eta=0.904)
    point = classify_phase(params)
    assert point.reality is Reality.BROKEN
    assert point.order is Order.DISORDERED
    assert point.h_c_low is not None

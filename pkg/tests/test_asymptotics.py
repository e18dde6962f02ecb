import math

import numpy as np
import pytest

from bhdirac.geometry import Background
from bhdirac.radial import ModeParams, RegimeError
from bhdirac.asymptotics import (
    ExtrapolationError,
    default_u_base,
    evanescent_transmission,
    extract_branches,
    extract_transmission,
    infinity_matrix,
    phase,
    _gauge_distance,
)

BG = Background(M=1.0)
J = np.diag([1.0, -1.0])


def test_phase_massless_values():
    p = ModeParams(bg=BG, m=0.0, omega=2.0, lam=0.0)
    assert phase(p, 10.0) == pytest.approx(20.0, rel=1e-15)
    pm = ModeParams(bg=BG, m=0.0, omega=-2.0, lam=0.0)
    assert phase(pm, 10.0) == pytest.approx(-20.0, rel=1e-15)


def test_phase_massive_value():
    # direct evaluation oracle at u = e where log u = 1
    p = ModeParams(bg=BG, m=1.0, omega=2.0, lam=0.0)
    expected = math.sqrt(3.0) * math.e + 1.0 / math.sqrt(3.0)
    assert phase(p, math.e) == pytest.approx(expected, rel=1e-14)


def test_phase_domain_errors():
    p = ModeParams(bg=BG, m=1.0, omega=2.0, lam=0.0)
    with pytest.raises(ValueError):
        phase(p, 0.0)
    with pytest.raises(RegimeError):
        phase(ModeParams(bg=BG, m=1.0, omega=0.5, lam=0.0), 1.0)


def test_infinity_matrix_massless_identity():
    p = ModeParams(bg=BG, m=0.0, omega=2.0, lam=0.0)
    assert np.allclose(infinity_matrix(p), np.eye(2), atol=0)


def test_infinity_matrix_value_and_pseudo_unitarity():
    m = 0.4
    p = ModeParams(bg=BG, m=m, omega=1.25 * m, lam=1.0)
    th = -math.log(9.0) / 4.0
    A = infinity_matrix(p)
    assert A[0, 0] == pytest.approx(math.cosh(th), rel=1e-14)
    assert A[0, 1] == pytest.approx(math.sinh(th), rel=1e-14)
    assert abs(np.linalg.det(A) - 1.0) < 1e-12
    assert np.max(np.abs(A.T @ J @ A - J)) < 1e-12


def test_infinity_matrix_regime():
    with pytest.raises(RegimeError):
        infinity_matrix(ModeParams(bg=BG, m=1.0, omega=0.2, lam=0.0))


def test_free_wave_extraction():
    p = ModeParams(bg=BG, m=0.0, omega=2.0, lam=0.0)
    tr = extract_transmission(p, 1, 1e-8, ode_tol=1e-13)
    assert np.max(np.abs(tr.finf - np.array([1.0, 0.0]))) < 1e-10
    assert tr.regime == "propagating"
    assert np.all(tr.f0 == np.array([1.0, 0.0]))


@pytest.fixture(scope="module")
def generic_pair():
    p = ModeParams(bg=BG, m=0.5, omega=0.75, lam=1.0)
    return extract_branches(p, (1, 2), 1e-6, 1e-11)


def test_pseudo_unitarity_both_branches(generic_pair):
    tr1, tr2 = generic_pair
    f1, f2 = tr1.finf, tr2.finf
    assert abs(abs(f1[0]) ** 2 - abs(f1[1]) ** 2 - 1.0) < 1e-6
    assert abs(abs(f2[0]) ** 2 - abs(f2[1]) ** 2 + 1.0) < 1e-6


def test_norm_equality_and_lower_bound(generic_pair):
    tr1, tr2 = generic_pair
    assert abs(tr1.fnorm - tr2.fnorm) < 1e-6
    assert tr1.fnorm >= 1.0 - 1e-8


def test_pseudo_orthogonality(generic_pair):
    tr1, tr2 = generic_pair
    cross = np.conj(tr1.finf[0]) * tr2.finf[0] - np.conj(tr1.finf[1]) * tr2.finf[1]
    assert abs(cross) < 1e-6


def test_self_consistency_under_u_base_doubling(generic_pair):
    tr1, _ = generic_pair
    p = tr1.params
    ub = default_u_base(p)
    a = extract_branches(p, (1,), 1e-6, 1e-11, u_base=ub)[0]
    b = extract_branches(p, (1,), 1e-6, 1e-11, u_base=2 * ub)[0]
    allowance = 3.0 * max(a.err_estimate, b.err_estimate)
    assert _gauge_distance(a.finf, b.finf) < allowance


def test_extraction_regime_and_branch_validation():
    evan = ModeParams(bg=BG, m=0.5, omega=0.3, lam=1.0)
    with pytest.raises(RegimeError):
        extract_transmission(evan, 1)
    prop = ModeParams(bg=BG, m=0.5, omega=0.75, lam=1.0)
    with pytest.raises(ValueError):
        extract_transmission(prop, 0)


def test_extraction_stall_reports_best():
    p = ModeParams(bg=BG, m=0.5, omega=5.0, lam=1.0)
    with pytest.raises(ExtrapolationError) as err:
        extract_transmission(p, 1, tol=1e-16, ode_tol=1e-8)
    best = err.value.best
    assert best.finf is not None
    assert abs(best.fnorm - 1.0) < 1e-3


def test_evanescent_transmission():
    p = ModeParams(bg=BG, m=0.5, omega=0.3, lam=1.0)
    tr = evanescent_transmission(p, ode_tol=1e-11)
    assert tr.regime == "evanescent"
    assert tr.finf is None
    assert abs(abs(tr.f0[0]) - abs(tr.f0[1])) < 1e-6
    assert tr.err_estimate < 1e-6
    with pytest.raises(RegimeError):
        tr.fnorm
    with pytest.raises(RegimeError):
        evanescent_transmission(ModeParams(bg=BG, m=0.5, omega=0.75, lam=1.0))

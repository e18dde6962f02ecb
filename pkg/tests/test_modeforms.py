import math
import warnings

import numpy as np
import pytest

from bhdirac.geometry import Background
from bhdirac.modeforms import (
    EvanescentWeightWarning,
    ModeProfile,
    QuadSpec,
    ScatteringCache,
    SignatureImage,
    apply_signature,
    bump,
    flux_form,
    horizon_bilinear_integrand,
    scalar_product,
    signature_form,
)

BG = Background(M=1.0)
M_FERMION = 0.5
LAM = 1.0

# one shared cache: the interval models are the expensive part
CACHE = ScatteringCache()
QUAD = QuadSpec(nodes=64)


def profile(bumps1=(), bumps2=()):
    return ModeProfile(
        bg=BG, m=M_FERMION, lam=LAM, bumps1=tuple(bumps1), bumps2=tuple(bumps2)
    )


PSI = profile(
    bumps1=((0.95, 0.2, 1.0 + 0.3j), (0.05, 0.15, 0.5 - 0.1j)),
    bumps2=((0.95, 0.2, 0.4 - 0.2j),),
)
PHI = profile(
    bumps1=((1.0, 0.2, 0.8j), (-0.05, 0.12, -0.3j)),
    bumps2=((1.0, 0.18, -0.6 + 0.5j),),
)


def sp(a, b, quad=QUAD):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EvanescentWeightWarning)
        return scalar_product(a, b, quad, CACHE)


def test_bump_support_and_smoothness():
    assert bump(0.0) == pytest.approx(math.exp(-1.0))
    assert bump(1.0) == 0.0
    assert bump(-1.0) == 0.0
    assert bump(2.0) == 0.0
    x = np.linspace(-1.2, 1.2, 101)
    vals = bump(x)
    assert np.all(vals >= 0.0)
    assert np.all(vals[np.abs(x) >= 1.0] == 0.0)


def test_profile_validation():
    with pytest.raises(ValueError):
        profile(bumps1=((0.5, 0.2, 1.0),))  # straddles omega = m
    with pytest.raises(ValueError):
        profile(bumps1=((-0.5, 0.3, 1.0),))  # straddles omega = -m
    with pytest.raises(ValueError):
        profile(bumps2=((0.0, 0.2, 1.0),))  # second channel inside the band
    with pytest.raises(ValueError):
        profile(bumps1=((1.0, -0.1, 1.0),))  # bad width
    # touching is also rejected: support must stay away from +-m
    with pytest.raises(ValueError):
        profile(bumps1=((0.75, 0.25, 1.0),))


def test_profile_component_evaluation():
    psi = profile(bumps1=((1.0, 0.2, 2.0),))
    om = np.array([1.0, 1.1, 1.3, 0.7])
    vals = psi.component(1, om)
    assert vals[0] == pytest.approx(2.0 * math.exp(-1.0))
    assert vals[2] == 0.0 and vals[3] == 0.0
    assert np.all(psi.component(2, om) == 0.0)


def test_disjoint_supports_give_zero():
    a = profile(bumps1=((0.95, 0.1, 1.0),))
    b = profile(bumps1=((1.25, 0.1, 1.0),))
    assert sp(a, b) == 0.0


def test_scalar_product_positive_definite():
    val = sp(PSI, PSI)
    assert abs(val.imag) < 1e-12 * abs(val)
    assert val.real > 0.0


def test_scalar_product_conjugate_symmetry():
    ab = sp(PSI, PHI)
    ba = sp(PHI, PSI)
    assert ab == pytest.approx(np.conj(ba), rel=1e-12)


def test_scalar_product_warns_on_evanescent_weight():
    a = profile(bumps1=((0.0, 0.2, 1.0),))
    with pytest.warns(EvanescentWeightWarning):
        scalar_product(a, a, QUAD, CACHE)


def test_signature_form_band_only_profile_vanishes():
    a = profile(bumps1=((0.0, 0.2, 1.0),))
    assert signature_form(a, a, QUAD, CACHE) == 0.0
    assert flux_form(a, a, QUAD, CACHE) == 0.0


def test_two_path_signature_consistency():
    direct = signature_form(PSI, PHI, QUAD, CACHE)
    via_op = sp(PSI, apply_signature(PHI))
    assert abs(direct - via_op) <= 1e-8 * abs(direct)
    assert isinstance(apply_signature(PHI), SignatureImage)


def test_forms_real_on_diagonal():
    for form in (signature_form, flux_form):
        val = form(PSI, PSI, QUAD, CACHE)
        assert abs(val.imag) < 1e-12 * max(abs(val), 1.0)


def test_operator_norm_bounds():
    spv = sp(PSI, PSI).real
    assert abs(signature_form(PSI, PSI, QUAD, CACHE).real) <= 2.0 * spv * (1 + 1e-12)
    assert abs(flux_form(PSI, PSI, QUAD, CACHE).real) <= spv * (1 + 1e-12)


def test_flux_sign_single_channel():
    a = profile(bumps1=((1.0, 0.2, 1.3),))
    val = flux_form(a, a, QUAD, CACHE)
    assert val.real < 0.0
    assert abs(val.imag) < 1e-14


def test_sesquilinearity():
    rng = np.random.default_rng(3)
    za, zb = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    scaled_psi = profile(
        bumps1=tuple((c, w, za * amp) for c, w, amp in PSI.bumps1),
        bumps2=tuple((c, w, za * amp) for c, w, amp in PSI.bumps2),
    )
    scaled_phi = profile(
        bumps1=tuple((c, w, zb * amp) for c, w, amp in PHI.bumps1),
        bumps2=tuple((c, w, zb * amp) for c, w, amp in PHI.bumps2),
    )
    base = sp(PSI, PHI)
    assert sp(scaled_psi, scaled_phi) == pytest.approx(
        np.conj(za) * zb * base, rel=1e-12
    )
    for form in (signature_form, flux_form):
        assert form(scaled_psi, scaled_phi, QUAD, CACHE) == pytest.approx(
            np.conj(za) * zb * form(PSI, PHI, QUAD, CACHE), rel=1e-12
        )


def test_quadrature_node_doubling():
    for form, rel in ((scalar_product, 1e-9), (signature_form, 1e-9), (flux_form, 1e-9)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EvanescentWeightWarning)
            a = form(PSI, PHI, QuadSpec(nodes=64), CACHE)
            b = form(PSI, PHI, QuadSpec(nodes=128), CACHE)
        assert abs(a - b) <= rel * max(abs(a), 1e-12)


def test_incompatible_profiles_rejected():
    other = ModeProfile(bg=BG, m=0.4, lam=LAM, bumps1=((1.0, 0.2, 1.0),))
    with pytest.raises(ValueError):
        scalar_product(PSI, other, QUAD, CACHE)


def test_bilinear_propagating_equal_mass():
    # with unit horizon vectors the integrand reduces to
    # conj(psi1) phi1 - conj(psi2) phi2
    omega = 1.0
    val = horizon_bilinear_integrand(PSI, PHI, omega, QUAD, CACHE)
    p1 = complex(PSI.component(1, np.array([omega]))[0])
    p2 = complex(PSI.component(2, np.array([omega]))[0])
    q1 = complex(PHI.component(1, np.array([omega]))[0])
    q2 = complex(PHI.component(2, np.array([omega]))[0])
    assert val == pytest.approx(np.conj(p1) * q1 - np.conj(p2) * q2, rel=1e-14)


def test_bilinear_evanescent_vanishes():
    a = profile(bumps1=((0.0, 0.2, 1.0),))
    val = horizon_bilinear_integrand(a, a, 0.1, QUAD, CACHE)
    scale = abs(complex(a.component(1, np.array([0.1]))[0])) ** 2
    assert abs(val) < 1e-6 * scale


def test_bilinear_integral_matches_flux():
    # integrating the equal-mass integrand over the support reproduces
    # -flux/(4 pi^2); same Gauss-Legendre nodes as the form quadrature
    from numpy.polynomial.legendre import leggauss

    total = 0.0
    for lo, hi in ((0.75, 1.15), (-0.1, 0.2)):  # the exact support decomposition
        x, w = leggauss(256)
        om = lo + 0.5 * (hi - lo) * (x + 1.0)
        vals = [horizon_bilinear_integrand(PSI, PSI, o, QUAD, CACHE) for o in om]
        total += 0.5 * (hi - lo) * np.sum(w * np.array(vals))
    flux = flux_form(PSI, PSI, QUAD, CACHE)
    assert total == pytest.approx(-flux / (4 * math.pi**2), rel=2e-9)


def test_bilinear_excluded_points():
    with pytest.raises(ValueError):
        horizon_bilinear_integrand(PSI, PHI, M_FERMION, QUAD, CACHE)


def test_bilinear_mixed_masses():
    lighter = ModeProfile(bg=BG, m=0.3, lam=LAM, bumps1=((0.4, 0.05, 1.0),))
    # omega = 0.4: evanescent for m = 0.5, propagating for m = 0.3
    val = horizon_bilinear_integrand(
        profile(bumps1=((0.0, 0.45, 1.0),)), lighter, 0.4, QUAD, CACHE
    )
    assert np.isfinite(val.real) and np.isfinite(val.imag)


def test_operator_bounds_50_random_profiles():
    # amplitude-randomized profiles on the same support decomposition as the
    # module fixtures, so the cached scattering models are reused
    from bhdirac.suite import random_profile

    rng = np.random.default_rng(11)
    spans = ((0.75, 1.15, True), (-0.1, 0.2, False))
    for _ in range(50):
        psi = random_profile(rng, BG, M_FERMION, LAM, spans)
        spv = sp(psi, psi).real
        assert spv > 0
        assert abs(signature_form(psi, psi, QUAD, CACHE).real) <= 2.0 * spv * (1 + 1e-12)
        assert abs(flux_form(psi, psi, QUAD, CACHE).real) <= spv * (1 + 1e-12)

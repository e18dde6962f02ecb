"""Quadratic forms over mode-coefficient profiles of one angular mode.

Profiles are finite sums of C-infinity bumps exp(-1/(1-x^2)) per component,
compactly supported away from omega = +-m; the second component vanishes
inside (-m, m) where no bounded second solution exists.  All forms are
Gauss-Legendre quadratures per support interval, with the scattering data
at each node computed once and cached.

Node data is canonicalized through the Gram pair of the transmission
vectors, so the algebraic identities tying the scattering matrix, the Gram
matrix and the operator eigenvalues hold to rounding rather than only to
extraction accuracy.
"""

import math
import threading
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import Background
from .radial import DEFAULT_TOL, ModeParams
from .asymptotics import evanescent_transmission, extract_branches
from .operators import params_from_f, pseudo_product


class EvanescentWeightWarning(UserWarning):
    """A scalar product picked up weight from the evanescent band.

    The mode-coupling matrix is only defined for |omega| > m; inside the
    band the a = 1 channel is weighted with the identity, which is a
    provisional convention.
    """


def bump(x):
    """C-infinity bump exp(-1/(1-x^2)) supported exactly on (-1, 1)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return float(out[0]) if scalar else out


def _zone(lo, hi, m):
    """Classify an interval against the mass gap; reject straddling."""
    if hi <= -m or lo >= m:
        if lo <= -m <= hi or lo <= m <= hi:
            raise ValueError(f"support interval [{lo}, {hi}] touches omega = +-{m}")
        return "propagating"
    if -m < lo and hi < m:
        return "evanescent"
    raise ValueError(f"support interval [{lo}, {hi}] straddles omega = +-{m}")


@dataclass(frozen=True)
class ModeProfile:
    """Coefficient profile (psi1, psi2) of one angular mode.

    Each component is a list of bumps (center, halfwidth, amplitude) with
    complex amplitudes allowed; (bg, m, lam) pin the mode, since the
    scattering weights in the forms depend on all three.
    """

    bg: Background
    m: float
    lam: float
    bumps1: tuple = ()
    bumps2: tuple = ()
    k: float = 0.5

    def __post_init__(self):
        if not self.m >= 0:
            raise ValueError(f"mass must be >= 0, got {self.m}")
        for a, bumps in ((1, self.bumps1), (2, self.bumps2)):
            for c, w, _amp in bumps:
                if not w > 0:
                    raise ValueError(f"bump halfwidth must be positive, got {w}")
                zone = _zone(c - w, c + w, self.m)
                if a == 2 and zone == "evanescent":
                    raise ValueError(
                        "second-component support inside (-m, m) is forbidden "
                        f"(bump [{c - w}, {c + w}])"
                    )

    def component(self, a, omega):
        """psi_a evaluated on an array of frequencies."""
        omega = np.asarray(omega, dtype=float)
        bumps = self.bumps1 if a == 1 else self.bumps2
        out = np.zeros(omega.shape, dtype=complex)
        for c, w, amp in bumps:
            out += amp * bump((omega - c) / w)
        return out

    def intervals(self):
        return [(c - w, c + w) for c, w, _ in self.bumps1] + [
            (c - w, c + w) for c, w, _ in self.bumps2
        ]

    def min_bump_halfwidth(self, lo, hi):
        """Narrowest bump intersecting [lo, hi] (sets quadrature resolution)."""
        widths = [
            w
            for c, w, _ in self.bumps1 + self.bumps2
            if c + w > lo and c - w < hi
        ]
        return min(widths) if widths else math.inf

    def mode_params(self, omega):
        return ModeParams(bg=self.bg, m=self.m, omega=float(omega), lam=self.lam, k=self.k)


@dataclass(frozen=True)
class SignatureImage:
    """Image of a profile under the signature operator (lazy).

    Hat components are epsilon(omega)/(|f1|^2+1) (T^-1 psi)_a on the
    propagating support and zero inside the band; they are materialized
    inside the quadratures with the same node data as the outer weight,
    so the two integral representations of the signature form agree to
    rounding.
    """

    base: ModeProfile

    @property
    def bg(self):
        return self.base.bg

    @property
    def m(self):
        return self.base.m

    @property
    def lam(self):
        return self.base.lam

    @property
    def k(self):
        return self.base.k

    def intervals(self):
        return self.base.intervals()

    def min_bump_halfwidth(self, lo, hi):
        return self.base.min_bump_halfwidth(lo, hi)

    def mode_params(self, omega):
        return self.base.mode_params(omega)


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature controls: nodes per support interval and pipeline tolerances."""

    nodes: int = 64
    extract_tol: float = 3e-6
    ode_tol: float = DEFAULT_TOL


class _IntervalModel:
    """Chebyshev model of the Gram data over one propagating interval.

    The smooth gauge-invariant scattering content of a mode is the Gram
    pair c(omega) = |f1|^2 and z(omega) = <f1, f2>; the hyperbolic angle
    and phase read off from z (theta = arcsinh(|z|)/2, delta = arg z) stay
    exactly consistent with c = sqrt(1 + |z|^2), so every downstream
    identity holds to rounding.  A per-node extraction would instead leave
    uncorrelated noise at the extraction tolerance, visible in quadrature
    refinement far above rounding; moreover delta itself is the phase of a
    possibly tiny z and cannot be interpolated directly.
    """

    def __init__(self, re_fit, im_fit, degree):
        self.re_fit = re_fit
        self.im_fit = im_fit
        # the norm factor sqrt(1 + |z|^2) is smooth but not polynomial, so
        # the quadrature must oversample the model oscillation well beyond
        # exactness for the polynomial part
        self.min_nodes = 4 * degree + 64

    def __call__(self, omega):
        z = self.re_fit(omega) + 1j * self.im_fit(omega)
        theta = 0.5 * np.arcsinh(np.abs(z))
        delta = np.angle(z)
        return theta, delta


def _gram_direct(p, quad):
    """Gram data (c, z) of the transmission pair by direct extraction."""
    tr1, tr2 = extract_branches(p, (1, 2), quad.extract_tol, quad.ode_tol)
    c = float(np.vdot(tr1.finf, tr1.finf).real)
    z = complex(np.vdot(tr1.finf, tr2.finf))
    return c, z


def _hyperbolic_direct(p, quad):
    tr1, tr2 = extract_branches(p, (1, 2), quad.extract_tol, quad.ode_tol)
    return params_from_f(tr1.finf, tr2.finf, tol=1e-3)


class ScatteringCache:
    """Canonical scattering data per (M, m, lambda) mode, cached and smooth.

    Pointwise lookups are keyed by omega rounded to 1e-12; interval lookups
    are served from per-interval Chebyshev models of the Gram data,
    validated against direct extraction at probe points.  Thread-safe.
    """

    _MODEL_POINTS = 33
    _MODEL_POINTS_MAX = 129

    def __init__(self):
        self._gram = {}
        self._evan = {}
        self._models = {}
        self._lock = threading.Lock()

    @staticmethod
    def _key(p):
        return (
            round(p.bg.M, 12),
            round(p.m, 12),
            round(p.lam, 12),
            round(p.omega, 12),
        )

    def gram(self, p, quad):
        """Pointwise Gram data (c, z), cached."""
        key = self._key(p)
        with self._lock:
            hit = self._gram.get(key)
        if hit is not None:
            return hit
        cz = _gram_direct(p, quad)
        with self._lock:
            self._gram[key] = cz
        return cz

    def _build_model(self, prof, lo, hi, quad):
        probes = lo + (hi - lo) * np.array([0.31, 0.74])
        probe_cz = [self.gram(prof.mode_params(om), quad) for om in probes]
        npts = self._MODEL_POINTS
        while True:
            # Chebyshev-Lobatto points: nested under npts -> 2 npts - 1
            xc = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(
                math.pi * np.arange(npts) / (npts - 1.0)
            )
            cz = [self.gram(prof.mode_params(om), quad) for om in xc]
            zre = np.array([v[1].real for v in cz])
            zim = np.array([v[1].imag for v in cz])
            cs = np.array([v[0] for v in cz])
            deg = npts - 1
            model = _IntervalModel(
                np.polynomial.chebyshev.Chebyshev.fit(xc, zre, deg, domain=[lo, hi]),
                np.polynomial.chebyshev.Chebyshev.fit(xc, zim, deg, domain=[lo, hi]),
                deg,
            )
            scale = max(1.0, float(np.max(np.abs(cs))))
            zm = model.re_fit(probes) + 1j * model.im_fit(probes)
            worst = max(
                abs(zv - z_true) / scale
                for zv, (_, z_true) in zip(zm, probe_cz)
            )
            if worst < 100.0 * quad.extract_tol or npts >= self._MODEL_POINTS_MAX:
                if worst >= 100.0 * quad.extract_tol:
                    warnings.warn(
                        f"scattering model on [{lo}, {hi}] validated only to "
                        f"{worst:.2e}; increase nodes or shrink the interval",
                        stacklevel=4,
                    )
                return model
            npts = 2 * npts - 1

    def interval_model(self, prof, lo, hi, quad):
        """Gram model of [lo, hi], built on first use."""
        key = (
            round(prof.bg.M, 12),
            round(prof.m, 12),
            round(prof.lam, 12),
            round(lo, 12),
            round(hi, 12),
        )
        with self._lock:
            model = self._models.get(key)
        if model is None:
            model = self._build_model(prof, lo, hi, quad)
            with self._lock:
                self._models[key] = model
        return model

    def node_params(self, prof, lo, hi, omegas, quad):
        """Arrays (theta, delta) at the quadrature nodes of [lo, hi]."""
        model = self.interval_model(prof, lo, hi, quad)
        return model(np.asarray(omegas, dtype=float))

    def evanescent_f0(self, p, quad):
        key = self._key(p)
        with self._lock:
            hit = self._evan.get(key)
        if hit is not None:
            return hit
        tr = evanescent_transmission(p, quad.extract_tol, quad.ode_tol)
        with self._lock:
            self._evan[key] = tr.f0
        return tr.f0

    def clear(self):
        with self._lock:
            self._gram.clear()
            self._evan.clear()
            self._models.clear()


_default_cache = ScatteringCache()


def default_cache():
    return _default_cache


def _check_pair(psi, phi):
    if not (
        psi.m == phi.m
        and psi.lam == phi.lam
        and psi.bg.M == phi.bg.M
    ):
        raise ValueError("profiles must live on the same (M, m, lambda) mode")


def _decomposition(psi, phi):
    """Canonical disjoint interval list covering both supports, with zones."""
    ivs = sorted(set(psi.intervals()) | set(phi.intervals()))
    merged = []
    for lo, hi in ivs:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi, _zone(lo, hi, psi.m)) for lo, hi in merged]


def _gl_nodes(lo, hi, n):
    x, w = leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _interval_nodes(quad, lo, hi, psi, phi, model=None):
    """Effective node count: the base count scaled up so the narrowest bump
    and (on propagating intervals) the Gram-model polynomial are resolved to
    well below the refinement tolerance."""
    hw = min(psi.min_bump_halfwidth(lo, hi), phi.min_bump_halfwidth(lo, hi))
    scale = max(1.0, (hi - lo) / (2.0 * hw)) if math.isfinite(hw) else 1.0
    n = int(math.ceil(2.5 * quad.nodes * scale))
    if model is not None:
        n = max(n, model.min_nodes)
    return max(n, quad.nodes)


def _tinv_apply(theta, delta, v1, v2):
    """(T^-1 v) for the canonical coupling matrix, componentwise on arrays."""
    tau = np.tanh(theta)
    pref = 2.0 / (1.0 - tau * tau)
    ed = np.exp(1j * delta)
    return pref * (v1 + tau * ed * v2), pref * (tau * np.conj(ed) * v1 + v2)


def scalar_product(psi, phi, quad=None, cache=None):
    """Mode scalar product 2 pi^2 int (T^-1)^{ab} conj(psi_a) phi_b domega.

    On evanescent support only the first channel contributes and carries
    identity weight (flagged by EvanescentWeightWarning when nonzero).
    Conjugate-symmetric and positive definite on the propagating part.
    The second argument may be a SignatureImage.
    """
    image = isinstance(phi, SignatureImage)
    base = phi.base if image else phi
    _check_pair(psi, base)
    quad = quad or QuadSpec()
    cache = cache or _default_cache
    total = 0.0 + 0.0j
    for lo, hi, zone in _decomposition(psi, base):
        if zone == "propagating":
            model = cache.interval_model(base, lo, hi, quad)
            om, w = _gl_nodes(lo, hi, _interval_nodes(quad, lo, hi, psi, base, model))
            p1 = np.conj(psi.component(1, om))
            p2 = np.conj(psi.component(2, om))
            q1 = base.component(1, om)
            q2 = base.component(2, om)
            theta, delta = model(om)
            if image:
                s1, s2 = _tinv_apply(theta, delta, q1, q2)
                fac = np.sign(om) / (np.cosh(2.0 * theta) + 1.0)
                q1, q2 = fac * s1, fac * s2
            t1, t2 = _tinv_apply(theta, delta, q1, q2)
            vals = p1 * t1 + p2 * t2
        elif image:
            continue  # the signature image vanishes inside the band
        else:
            om, w = _gl_nodes(lo, hi, _interval_nodes(quad, lo, hi, psi, base))
            vals = np.conj(psi.component(1, om)) * base.component(1, om)
            if np.max(np.abs(vals)) > 0:
                warnings.warn(
                    "evanescent-band contribution weighted with identity "
                    "(no mode-coupling matrix is defined for |omega| < m)",
                    EvanescentWeightWarning,
                    stacklevel=2,
                )
        total += np.sum(w * vals)
    return complex(2.0 * math.pi**2 * total)


def signature_form(psi, phi, quad=None, cache=None):
    """Signature quadratic form 4 pi^2 int eps(omega) psi^dag G phi domega.

    G is the Gram matrix of the transmission pair; the integral runs over
    the propagating support only.
    """
    _check_pair(psi, phi)
    quad = quad or QuadSpec()
    cache = cache or _default_cache
    total = 0.0 + 0.0j
    for lo, hi, zone in _decomposition(psi, phi):
        if zone != "propagating":
            continue
        model = cache.interval_model(psi, lo, hi, quad)
        om, w = _gl_nodes(lo, hi, _interval_nodes(quad, lo, hi, psi, phi, model))
        p1 = np.conj(psi.component(1, om))
        p2 = np.conj(psi.component(2, om))
        q1 = phi.component(1, om)
        q2 = phi.component(2, om)
        theta, delta = model(om)
        ch2 = np.cosh(2.0 * theta)
        sh2 = np.sinh(2.0 * theta)
        ed = np.exp(1j * delta)
        eps = np.sign(om)
        vals = eps * (
            ch2 * (p1 * q1 + p2 * q2) + sh2 * (ed * p1 * q2 + np.conj(ed) * p2 * q1)
        )
        total += np.sum(w * vals)
    return complex(4.0 * math.pi**2 * total)


def flux_form(psi, phi, quad=None, cache=None):
    """Flux quadratic form -4 pi^2 int (conj(psi1) phi1 - conj(psi2) phi2) domega.

    Diagonal in the channel index with signs (+1, -1); vanishes on the
    evanescent band.
    """
    _check_pair(psi, phi)
    quad = quad or QuadSpec()
    total = 0.0 + 0.0j
    for lo, hi, zone in _decomposition(psi, phi):
        if zone != "propagating":
            continue
        om, w = _gl_nodes(lo, hi, _interval_nodes(quad, lo, hi, psi, phi))
        vals = np.conj(psi.component(1, om)) * phi.component(1, om) - np.conj(
            psi.component(2, om)
        ) * phi.component(2, om)
        total += np.sum(w * vals)
    return complex(-4.0 * math.pi**2 * total)


def apply_signature(phi):
    """Image of a profile under the signature operator (see SignatureImage)."""
    return SignatureImage(base=phi)


def horizon_bilinear_integrand(psi_m, phi_mprime, omega, quad=None, cache=None):
    """Integrand of the horizon term of the mass decomposition at one omega.

    Sum over channels of conj(psi_a) phi_a' <f0_{m,a}, diag(1,-1) f0_{m',a'}>
    with the horizon data of each mass in its own regime: unit basis vectors
    when propagating, the decaying-branch data when evanescent.
    """
    quad = quad or QuadSpec()
    cache = cache or _default_cache
    omega = float(omega)
    for mm in (psi_m.m, phi_mprime.m):
        if abs(omega) == mm:
            raise ValueError(f"omega = {omega} sits on an excluded point +-{mm}")
    if psi_m.lam != phi_mprime.lam or psi_m.bg.M != phi_mprime.bg.M:
        raise ValueError("profiles must share the background and angular eigenvalue")

    def horizon_vectors(prof):
        if abs(omega) > prof.m:
            return np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)
        f0 = cache.evanescent_f0(prof.mode_params(omega), quad)
        return f0, None

    om_arr = np.array([omega])
    psi_vals = [complex(psi_m.component(a, om_arr)[0]) for a in (1, 2)]
    phi_vals = [complex(phi_mprime.component(a, om_arr)[0]) for a in (1, 2)]
    fpsi = horizon_vectors(psi_m)
    fphi = horizon_vectors(phi_mprime)
    total = 0.0 + 0.0j
    for a in (1, 2):
        if psi_vals[a - 1] == 0:
            continue
        if fpsi[a - 1] is None:
            raise ValueError("nonzero second channel inside the evanescent band")
        for ap in (1, 2):
            if phi_vals[ap - 1] == 0:
                continue
            if fphi[ap - 1] is None:
                raise ValueError("nonzero second channel inside the evanescent band")
            total += (
                np.conj(psi_vals[a - 1])
                * phi_vals[ap - 1]
                * pseudo_product(fpsi[a - 1], fphi[ap - 1])
            )
    return complex(total)

"""Scattering matrix and pointwise operator spectra.

The transmission pair (f1, f2) of a propagating mode is pseudo-orthonormal
for diag(1, -1) and admits the hyperbolic parametrization

    f1 = (e^{i beta} cosh th, e^{i gamma} sinh th),
    f2 = e^{i delta} (e^{i beta} sinh th, e^{i gamma} cosh th).

From it follow the closed-form scattering matrix with diagonal exactly 1/2
and the eigenvalue formulas of the signature and flux operators at fixed
frequency.
"""

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import extract_transmission
from .radial import DEFAULT_TOL, RegimeError

PSEUDO_TOL = 1e-4


def _wrap_phase(x):
    """Wrap to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return y if y != -math.pi else math.pi


def pseudo_product(f, g):
    """Indefinite product <f, diag(1,-1) g> (conjugation on the first slot)."""
    return np.conj(f[0]) * g[0] - np.conj(f[1]) * g[1]


def pseudo_orthonormality_defect(f1, f2):
    """Largest violation of the pseudo-orthonormality relations of (f1, f2)."""
    return max(
        abs(pseudo_product(f1, f1) - 1.0),
        abs(pseudo_product(f2, f2) + 1.0),
        abs(pseudo_product(f1, f2)),
    )


@dataclass(frozen=True)
class HyperbolicParams:
    """Parameters (th, beta, gamma, delta) of a transmission pair."""

    theta: float
    beta: float
    gamma: float
    delta: float

    def reconstruct(self):
        """The exactly pseudo-orthonormal pair encoded by the parameters."""
        ch, sh = math.cosh(self.theta), math.sinh(self.theta)
        eb = np.exp(1j * self.beta)
        eg = np.exp(1j * self.gamma)
        ed = np.exp(1j * self.delta)
        f1 = np.array([eb * ch, eg * sh])
        f2 = ed * np.array([eb * sh, eg * ch])
        return f1, f2

    @property
    def fnorm_sq(self):
        """Common squared Euclidean norm cosh(2 th) of both vectors."""
        return math.cosh(2.0 * self.theta)


def params_from_f(f1, f2, tol=PSEUDO_TOL):
    """Hyperbolic parameters of a transmission pair.

    The angle comes from arcsinh|f1-| (well conditioned near th = 0, where
    arccosh|f1+| is not); at th = 0 the gamma phase is unidentifiable and
    set to zero.
    """
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    defect = pseudo_orthonormality_defect(f1, f2)
    if defect > tol:
        raise ValueError(
            f"input pair violates pseudo-orthonormality by {defect:.3e} (tol {tol:.1e})"
        )
    theta = math.asinh(abs(f1[1]))
    beta = _wrap_phase(np.angle(f1[0]))
    gamma = _wrap_phase(np.angle(f1[1])) if abs(f1[1]) > 0 else 0.0
    delta = _wrap_phase(np.angle(f2[1]) - gamma)
    return HyperbolicParams(theta=theta, beta=beta, gamma=gamma, delta=delta)


@dataclass(frozen=True)
class ScatteringMatrix:
    """Hermitian 2x2 mode-coupling matrix with entries t_ab."""

    t: np.ndarray

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.t)

    def inverse(self):
        return np.linalg.inv(self.t)


def scattering_matrix_closed(f1, f2):
    """Closed-form scattering matrix: diagonal 1/2, t12 = -f2+/(2 f1+)."""
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    if f1[0] == 0:
        raise ValueError("f1+ vanishes; input is not a valid transmission pair")
    t12 = -0.5 * f2[0] / f1[0]
    t = np.array([[0.5, t12], [np.conj(t12), 0.5]])
    return ScatteringMatrix(t=t)


def scattering_matrix_from_params(hp):
    """Scattering matrix in the hyperbolic parametrization (exactly Hermitian)."""
    tau = math.tanh(hp.theta)
    off = -0.5 * np.exp(1j * hp.delta) * tau
    t = np.array([[0.5, off], [np.conj(off), 0.5]])
    return ScatteringMatrix(t=t)


def scattering_matrix_quadrature(f1, f2, nodes=512):
    """Scattering matrix by angle quadrature of the Dirichlet-limit weights.

    Trapezoidal rule on the periodic integrand, spectrally accurate; the
    node count must grow like 1/log(coth th) for strongly amplified pairs.
    """
    if nodes < 4:
        raise ValueError(f"need at least 4 quadrature nodes, got {nodes}")
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    alpha = 2.0 * math.pi * (np.arange(nodes) + 0.5) / nodes
    em = np.exp(-1j * alpha)
    ep = np.exp(1j * alpha)
    t1 = f2[0] * em - f2[1] * ep
    t2 = -f1[0] * em + f1[1] * ep
    den = np.abs(t1) ** 2 + np.abs(t2) ** 2
    if den.min() <= 1e-14 * den.max():
        raise ValueError("vanishing Dirichlet weight: near-degenerate input pair")
    ts = (t1, t2)
    t = np.empty((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            t[a, b] = np.mean(ts[a] * np.conj(ts[b]) / den)
    return ScatteringMatrix(t=t)


def quadrature_nodes_for(theta, floor=512, target=1e-9):
    """Node count giving the angle quadrature a tail below `target`.

    The trapezoid aliasing error decays like tanh(theta)^n with a 1/(1-tanh)
    tail sum, so strongly amplified pairs need many nodes.
    """
    tau = math.tanh(max(theta, 1e-8))
    if tau < 0.5:
        return floor
    need = int(math.log(target * (1.0 - tau) / 30.0) / math.log(tau)) + 1
    return max(floor, need)


def closure_identity_residual(T, f1, f2):
    """Deviation of T G T from the diagonal closure identity.

    G is the Gram matrix of (f1, f2); for exact transmission data the
    product equals delta_ad / (2 (1 + |f_a|^2)).
    """
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    fs = (f1, f2)
    G = np.array([[np.vdot(fa, fb) for fb in fs] for fa in fs])
    R = T.t @ G @ T.t
    target = np.diag([1.0 / (2.0 * (1.0 + np.vdot(f, f).real)) for f in fs])
    return float(np.max(np.abs(R - target)))


@dataclass(frozen=True)
class SpectrumPoint:
    """Pointwise spectra of the signature and flux operators at one mode."""

    omega: float
    m: float
    lam: float
    k: float
    fnorm: float | None
    mu_plus: float
    mu_minus: float
    nu_plus: float
    nu_minus: float
    err_estimate: float = 0.0


def spectrum_from_fnorm(omega, fnorm_sq):
    """Eigenvalue formulas (mu+-, nu+-) given |f_inf,1|^2 at frequency omega.

    The norm is clamped at its exact lower bound 1, which extraction error
    may undershoot by ~1e-8; otherwise |nu| would exceed 1 spuriously.
    """
    eps = 1.0 if omega > 0 else -1.0
    fn2 = max(fnorm_sq, 1.0)
    gap = math.sqrt((fn2 - 1.0) / (fn2 + 1.0))
    nu = math.sqrt(2.0 / (fn2 + 1.0))
    return eps + gap, eps - gap, nu, -nu


def spectrum_point(p, tol=1e-6, ode_tol=DEFAULT_TOL):
    """Spectrum of one (omega, lambda) fiber.

    Evanescent frequencies carry exactly vanishing spectra (no infinity
    data exists there); propagating ones are filled from the extracted
    transmission norm.
    """
    if abs(p.omega) == p.m:
        raise RegimeError(f"|omega| = m = {p.m} is excluded")
    if p.evanescent:
        return SpectrumPoint(
            omega=p.omega, m=p.m, lam=p.lam, k=p.k,
            fnorm=None, mu_plus=0.0, mu_minus=0.0, nu_plus=0.0, nu_minus=0.0,
        )
    tr = extract_transmission(p, 1, tol, ode_tol)
    fn = tr.fnorm
    mu_p, mu_m, nu_p, nu_m = spectrum_from_fnorm(p.omega, fn * fn)
    return SpectrumPoint(
        omega=p.omega, m=p.m, lam=p.lam, k=p.k,
        fnorm=fn, mu_plus=mu_p, mu_minus=mu_m, nu_plus=nu_p, nu_minus=nu_m,
        err_estimate=tr.err_estimate,
    )

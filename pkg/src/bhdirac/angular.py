"""Angular mode eigenvalues and eigenfunctions for half-integer azimuthal number.

The first-order angular pair (Y+, Y-) couples through the ladder operators
d/dtheta + cot(theta)/2 -/+ k/sin(theta).  Both components carry known
half-angle endpoint factors; dividing them out leaves polynomial unknowns
(g+, g-) in x = cos(theta) obeying the degree-preserving system

    lam g+ = -(1 - x) g-' + (|k| + 1/2) g-        (k > 0)
    lam g- =  (1 + x) g+' + (|k| + 1/2) g+

(mirrored for k < 0), while the L^2(dcos theta)^2 norm of (Y+, Y-) turns
into integer-exponent Jacobi weights for (g+, g-).  Discretizing on a
Gauss-Legendre grid in the orthonormal basis of each weight folds the
inner product into the 2N x 2N matrix, which is then symmetric to rounding
for every k and N, and its eigenvalues are exact for all modes whose
polynomial factor fits the basis.
"""

import math
import threading

import numpy as np
from numpy.polynomial.legendre import leggauss

_solve_lock = threading.Lock()
_solve_cache = {}

DEFAULT_N = 128
MAX_N = 2048


def _check_half_integer(k):
    """Validate k in Z + 1/2 and return the exact doubled value."""
    k2 = round(2.0 * k)
    if abs(2.0 * k - k2) > 1e-9 or k2 % 2 == 0:
        raise ValueError(f"azimuthal number must be a half-integer, got k = {k!r}")
    return int(k2)


def _weight_exponents(k2):
    """Jacobi exponents (a, b) of the plus component; the minus swaps them."""
    e_lo = (abs(k2) - 1) // 2  # |k| - 1/2
    e_hi = (abs(k2) + 1) // 2  # |k| + 1/2
    return (e_lo, e_hi) if k2 > 0 else (e_hi, e_lo)


def _jacobi_rows(nrows, a, b, x):
    """Values of the Jacobi polynomials P_0..P_{nrows-1}^{(a,b)} at x."""
    P = np.zeros((nrows, len(x)))
    P[0] = 1.0
    if nrows > 1:
        P[1] = 0.5 * ((a - b) + (a + b + 2.0) * x)
    for n in range(2, nrows):
        c1 = 2.0 * n * (n + a + b) * (2 * n + a + b - 2)
        c2 = (2 * n + a + b - 1) * (a * a - b * b)
        c3 = (2 * n + a + b - 1) * (2 * n + a + b) * (2 * n + a + b - 2)
        c4 = 2.0 * (n + a - 1) * (n + b - 1) * (2 * n + a + b)
        P[n] = ((c2 + c3 * x) * P[n - 1] - c4 * P[n - 2]) / c1
    return P


def _jacobi_norms(nrows, a, b):
    """Norms of P_n^{(a,b)} under the scaled weight ((1-x)/2)^a ((1+x)/2)^b / 2."""
    n = np.arange(nrows)
    logh = (
        np.array([math.lgamma(v) for v in n + a + 1])
        + np.array([math.lgamma(v) for v in n + b + 1])
        - np.array([math.lgamma(v) for v in n + a + b + 1])
        - np.array([math.lgamma(v) for v in n + 1])
        - np.log(2 * n + a + b + 1)
    )
    return np.exp(0.5 * logh)


def _basis(nrows, a, b, x):
    """Orthonormal basis values and derivatives at x for the (a, b) weight."""
    norms = _jacobi_norms(nrows, a, b)
    P = _jacobi_rows(nrows, a, b, x) / norms[:, None]
    dP = np.zeros_like(P)
    if nrows > 1:
        Pup = _jacobi_rows(nrows - 1, a + 1, b + 1, x)
        fac = 0.5 * (np.arange(1, nrows) + a + b + 1)
        dP[1:] = fac[:, None] * Pup / norms[1:, None]
    return P, dP


def _scaled_weight(a, b, x):
    """Component weight ((1-x)/2)^a ((1+x)/2)^b / 2 (polynomial for half-integer k)."""
    return 0.5 * (0.5 * (1.0 - x)) ** a * (0.5 * (1.0 + x)) ** b


def angular_operator(k, N):
    """Weight-folded 2N x 2N discretization of the angular pair.

    Assembled from values on a Gauss-Legendre grid sized to make every
    entry an exact integral, in the orthonormal polynomial basis of each
    component weight; the matrix is symmetric to rounding and its
    eigenvalues are the exact mode eigenvalues up to the basis cutoff.
    Rows/columns 0..N-1 belong to the plus component.
    """
    k2 = _check_half_integer(k)
    if N < 16:
        raise ValueError(f"grid size must be at least 16, got {N}")
    ap, bp = _weight_exponents(k2)
    am, bm = bp, ap
    kap = 0.5 * abs(k2) + 0.5  # |k| + 1/2
    nq = N + abs(k2) // 2 + 2
    xq, wq = leggauss(nq)
    Fp, dFp = _basis(N, ap, bp, xq)
    Fm, dFm = _basis(N, am, bm, xq)
    wp = wq * _scaled_weight(ap, bp, xq)
    wm = wq * _scaled_weight(am, bm, xq)
    if k2 > 0:
        a12_on_minus = -(1.0 - xq) * dFm + kap * Fm
        a21_on_plus = (1.0 + xq) * dFp + kap * Fp
    else:
        a12_on_minus = -(1.0 + xq) * dFm - kap * Fm
        a21_on_plus = (1.0 - xq) * dFp - kap * Fp
    B = np.zeros((2 * N, 2 * N))
    B[:N, N:] = (Fp * wp) @ a12_on_minus.T
    B[N:, :N] = (Fm * wm) @ a21_on_plus.T
    return B


def _solve(k2, N):
    """Eigen-decomposition of the folded operator, memoized per (k2, N)."""
    key = (k2, N)
    with _solve_lock:
        hit = _solve_cache.get(key)
    if hit is not None:
        return hit
    B = angular_operator(k2 / 2.0, N)
    vals, vecs = np.linalg.eigh(0.5 * (B + B.T))
    out = (vals, vecs)
    with _solve_lock:
        _solve_cache[key] = out
    return out


def _select_modes(vals, count):
    """Indices of the `count` smallest-|lambda| eigenvalues, |lambda| then sign."""
    order = np.argsort(np.abs(vals), kind="stable")
    return sorted(order[:count], key=lambda i: vals[i])


def angular_eigenvalues(k, count, *, n_start=DEFAULT_N, conv_tol=1e-8):
    """The `count` smallest-|lambda| eigenvalues of the angular operator.

    Each returned eigenvalue is converged in the grid size: doubling N moves
    it by less than `conv_tol`.  Raises with the achieved tolerance if the
    cap N = 2048 is hit first.
    """
    k2 = _check_half_integer(k)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    N = max(n_start, count, 16)
    while True:
        vals, _ = _solve(k2, N)
        vals2, _ = _solve(k2, 2 * N)
        sel = _select_modes(vals, count)
        sel2 = _select_modes(vals2, count)
        drift = np.max(np.abs(vals[sel] - vals2[sel2]))
        if drift < conv_tol:
            return np.asarray(vals2[sel2])
        if 2 * N >= MAX_N:
            raise RuntimeError(
                f"angular eigenvalues not converged at N = {MAX_N}: "
                f"best drift {drift:.3e} > {conv_tol:.1e}"
            )
        N *= 2


def eigenvalue_for_index(k, n, **kw):
    """Eigenvalue lambda_{k n} in the signed index convention.

    n = +1, +2, ... walks up the positive eigenvalues, n = -1, -2, ... walks
    down the negative ones; n = 0 is not a valid label.
    """
    if n == 0 or int(n) != n:
        raise ValueError(f"mode index must be a nonzero integer, got {n!r}")
    vals = angular_eigenvalues(k, 2 * abs(int(n)), **kw)
    pos = np.sort(vals[vals > 0])
    neg = -np.sort(-vals[vals < 0])  # descending: closest to zero first
    return float(pos[n - 1] if n > 0 else neg[-n - 1])


def _mode_coefficients(k2, n, N):
    """Eigenvalue and basis coefficients (g+, g-) of mode n at resolution N."""
    vals, vecs = _solve(k2, N)
    pos = np.flatnonzero(vals > 0)
    neg = np.flatnonzero(vals < 0)[::-1]  # ascending |lambda|
    if n > 0 and n <= len(pos):
        idx = pos[n - 1]
    elif n < 0 and -n <= len(neg):
        idx = neg[-n - 1]
    else:
        raise KeyError(f"angular mode (k={k2 / 2.0}, n={n}) not available at N={N}")
    v = vecs[:, idx]
    pivot = np.argmax(np.abs(v))
    if v[pivot] < 0:
        v = -v
    return float(vals[idx]), v[:N], v[N:]


def angular_eigenfunction(k, n, theta, *, N=DEFAULT_N):
    """Eigenvalue and samples (Y+, Y-) of the normalized mode on `theta`.

    Quadrature-normalized so int (|Y+|^2 + |Y-|^2) dcos(theta) = 1; the
    overall sign is fixed by the largest basis coefficient.
    """
    k2 = _check_half_integer(k)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any((theta <= 0.0) | (theta >= math.pi)):
        raise ValueError("theta samples must lie strictly inside (0, pi)")
    lam, cp, cm = _mode_coefficients(k2, n, N)
    x = np.cos(theta)
    ap, bp = _weight_exponents(k2)
    Pp, _ = _basis(N, ap, bp, x)
    Pm, _ = _basis(N, bp, ap, x)
    gp = cp @ Pp
    gm = cm @ Pm
    sig = np.sin(0.5 * theta)
    cos = np.cos(0.5 * theta)
    # Y(+-) = g(+-) sigma^a cos^b / sqrt(2) with the component's exponents
    yp = sig**ap * cos**bp * gp / math.sqrt(2.0)
    ym = sig**bp * cos**ap * gm / math.sqrt(2.0)
    return lam, yp, ym

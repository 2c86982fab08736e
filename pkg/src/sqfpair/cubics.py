"""Chord-parameter cubics of the kernel curves and their real geometry.

Rotating coordinates by 2w = s1 - s2, 2z = s1 + s2 turns each kernel zero
set into a monic cubic R_j(w, z) in the chord offset w, with coefficients
polynomial in the chord parameter z. For z > 0 each cubic has three real
roots straddling -z and z:

    alpha_j(z) < -z < beta_j(z) < z < gamma_j(z)

The roots are computed by the trigonometric form of Cardano's method with
one Newton polish, with a companion-matrix fallback near discriminant
zeros. The two real zeros of the w-discriminant of R_j (the ramification
points eta_j of the root functions) are located through the tangency
characterisation T_j'(s) = -1, which is a quartic in s solved by
companion-matrix eigenvalues.

Between the rightmost real ramification point eta_j^(1) (< 0) and +infinity
no two real roots of R_j ever collide, so the extreme roots alpha_1 and
gamma_2 continue analytically from z > 0 as the smallest/largest real root.
``tracked_roots`` relies on that interval and guards it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RootCountError, RootDomainError, RootOrderingError
from .params import (
    SystemParams,
    diagonal_quadratic,
    stationary_points,
    t_map,
    t_poles,
    t_prime,
)

# relative slack for |Delta| below which the closed form falls back to
# companion-matrix eigenvalues
_DISC_FALLBACK_RTOL = 1e-10


@dataclass(frozen=True)
class CubicCoeffs:
    """Monic cubic w^3 + c1 w^2 + c2 w + c3 at a fixed chord parameter z."""

    c1: float
    c2: float
    c3: float
    p_depressed: float
    q_depressed: float
    discriminant: float
    z: float


@dataclass(frozen=True)
class RootTriple:
    alpha: float
    beta: float
    gamma: float
    z: float

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class IntersectionFrame:
    """Coordinates of the six chord/curve intersections at one z.

    Curve 1 meets the line s1 + s2 = 2z at (a1, A1), (b1, B1), (c1, C1)
    (lower-case abscissae); curve 2 at (A2, a2), (B2, b2), (C2, c2)
    (lower-case ordinates, the axes being exchanged between the curves).
    """

    z: float
    a1: float
    b1: float
    c1: float
    A1: float
    B1: float
    C1: float
    A2: float
    B2: float
    C2: float
    a2: float
    b2: float
    c2: float


def _coeff_arrays(params: SystemParams, j: int, z):
    """Cubic coefficients (c1, c2, c3) at z; z may be an ndarray."""
    lam = params.total_rate
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    zP = z * diagonal_quadratic(params, z)
    if j == 1:
        c1 = z - (lam - m1 + m2)
        c2 = l1 * m2 - l2 * m1 - m1 * m2 - 2.0 * m2 * z - z * z
        c3 = -zP
    else:
        c1 = (lam + m1 - m2) - z
        c2 = l2 * m1 - l1 * m2 - m1 * m2 - 2.0 * m1 * z - z * z
        c3 = zP
    return c1, c2, c3


def cubic_coeffs(params: SystemParams, j: int, z: float) -> CubicCoeffs:
    """Coefficients, depressed form and discriminant of R_j(., z)."""
    c1, c2, c3 = _coeff_arrays(params, j, z)
    p = c2 - c1 * c1 / 3.0
    q = c3 - c1 * c2 / 3.0 + 2.0 * c1 ** 3 / 27.0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    return CubicCoeffs(c1=c1, c2=c2, c3=c3, p_depressed=p, q_depressed=q,
                       discriminant=disc, z=z)


def cubic_value(params: SystemParams, j: int, w, z):
    """R_j(w, z); accepts scalars or arrays."""
    c1, c2, c3 = _coeff_arrays(params, j, z)
    return ((w + c1) * w + c2) * w + c3


def discriminant(params: SystemParams, j: int, z: float) -> float:
    """Discriminant of R_j(., z) in w; positive iff three distinct real roots."""
    return cubic_coeffs(params, j, z).discriminant


def discriminant_leading_coeff(params: SystemParams, j: int) -> float:
    """Exact z^4 coefficient of the discriminant polynomial (always > 0)."""
    lam, mu = params.rates(j)
    lam_o, _ = params.rates(3 - j)
    return 16.0 * ((mu - lam) ** 2 + lam_o ** 2 + 2.0 * lam_o * (lam + mu))


def discriminant_poly(params: SystemParams, j: int) -> np.ndarray:
    """Coefficients (ascending) of the degree-4 discriminant polynomial in z.

    Built by polynomial arithmetic on the coefficient polynomials; the
    formal degree-5/6 terms cancel identically and are trimmed.
    """
    P = np.polynomial.Polynomial
    lam = params.total_rate
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    stab = P([m1 * m2 * (1.0 - params.rho), m1 + m2 - lam, 1.0])
    zP = P([0.0, 1.0]) * stab
    if j == 1:
        c1 = P([-(lam - m1 + m2), 1.0])
        c2 = P([l1 * m2 - l2 * m1 - m1 * m2, -2.0 * m2, -1.0])
        c3 = -zP
    else:
        c1 = P([lam + m1 - m2, -1.0])
        c2 = P([l2 * m1 - l1 * m2 - m1 * m2, -2.0 * m1, -1.0])
        c3 = zP
    p = c2 - c1 * c1 / 3.0
    q = c3 - c1 * c2 / 3.0 + 2.0 * c1 ** 3 / 27.0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    coef = disc.coef
    lead = discriminant_leading_coeff(params, j)
    # degrees 5 and 6 vanish in exact arithmetic; trim the rounding residue
    if len(coef) > 5:
        assert np.all(np.abs(coef[5:]) <= 1e-6 * abs(lead) * max(1.0, np.abs(coef).max() / abs(lead))), \
            "discriminant degree-5/6 terms failed to cancel"
        coef = coef[:5]
    return coef


def _roots_closed_form(c1, c2, c3, p, q, disc):
    """Three real roots via the trigonometric Cardano form (requires disc > 0)."""
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)  # == (3q/2p) * sqrt(-3/p)
    arg = min(1.0, max(-1.0, arg))
    phi = math.acos(arg)
    shift = c1 / 3.0
    roots = [m * math.cos((phi - 2.0 * math.pi * k) / 3.0) - shift for k in range(3)]
    roots.sort()
    return roots


def _newton_polish(c1, c2, c3, w):
    f = ((w + c1) * w + c2) * w + c3
    df = (3.0 * w + 2.0 * c1) * w + c2
    if df != 0.0:
        w = w - f / df
    return w


def _solve_real_cubic(params: SystemParams, j: int, z: float):
    """Sorted real roots of R_j(., z); requires three real roots."""
    cc = cubic_coeffs(params, j, z)
    scale = 4.0 * abs(cc.p_depressed) ** 3 + 27.0 * cc.q_depressed ** 2
    if cc.discriminant > _DISC_FALLBACK_RTOL * max(scale, 1.0):
        roots = _roots_closed_form(cc.c1, cc.c2, cc.c3, cc.p_depressed,
                                   cc.q_depressed, cc.discriminant)
    else:
        if cc.discriminant < -_DISC_FALLBACK_RTOL * max(scale, 1.0):
            raise RootDomainError(
                f"cubic {j} has complex roots at z={z} (discriminant "
                f"{cc.discriminant:.3e})", j=j, z=z,
            )
        rr = np.roots([1.0, cc.c1, cc.c2, cc.c3])
        roots = sorted(float(r.real) for r in rr)
    return [_newton_polish(cc.c1, cc.c2, cc.c3, w) for w in roots]


def real_roots(params: SystemParams, j: int, z: float) -> RootTriple:
    """Ordered real roots of R_j(., z) for z > 0, Newton-polished.

    The bracket ordering alpha < -z < beta < z < gamma is asserted; its
    failure signals a parameter or branch bug upstream.
    """
    if not z > 0.0:
        raise RootDomainError(f"real_roots requires z > 0, got z={z}", z=z)
    alpha, beta, gamma = _solve_real_cubic(params, j, z)
    if not (alpha < -z < beta < z < gamma):
        raise RootOrderingError(
            f"root ordering violated for curve {j} at z={z}: "
            f"({alpha}, {beta}, {gamma})", j=j, z=z,
        )
    return RootTriple(alpha=alpha, beta=beta, gamma=gamma, z=z)


def tracked_roots(params: SystemParams, j: int, z: float) -> RootTriple:
    """Roots continued to the full collision-free interval z > eta_j^(1).

    For z > 0 this is ``real_roots``. For z <= 0 the three roots are still
    real and distinct as long as z stays right of the largest real
    ramification point, and no pair of them can cross without colliding;
    the analytic continuations of (alpha, beta, gamma) from z > 0 therefore
    remain the sorted triple. The interval is guarded explicitly.
    """
    if z > 0.0:
        return real_roots(params, j, z)
    eta1 = branch_points(params, j).eta_1
    if z <= eta1:
        raise RootDomainError(
            f"z={z} not right of the real ramification point "
            f"eta_{j}^(1)={eta1:.6g}; roots are not tracked there",
            j=j, z=z, eta_1=eta1,
        )
    alpha, beta, gamma = _solve_real_cubic(params, j, z)
    return RootTriple(alpha=alpha, beta=beta, gamma=gamma, z=z)


def roots_array(params: SystemParams, j: int, z: np.ndarray, eta1: float) -> np.ndarray:
    """Vectorised sorted real roots for the series engine.

    Returns an array of shape (n, 3). All z must lie right of ``eta1``
    (the caller passes the cached ramification point to avoid recomputing
    it per slice).
    """
    z = np.asarray(z, dtype=float)
    if z.size and z.min() <= eta1:
        raise RootDomainError(
            f"series argument z={z.min():.6g} left of eta^(1)={eta1:.6g}",
            j=j, z=float(z.min()), eta_1=eta1,
        )
    c1, c2, c3 = _coeff_arrays(params, j, z)
    p = c2 - c1 * c1 / 3.0
    q = c3 - c1 * c2 / 3.0 + 2.0 * c1 ** 3 / 27.0
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    if np.any(disc <= 0.0):
        bad = z[disc <= 0.0][0]
        raise RootDomainError(
            f"non-positive cubic discriminant at z={bad:.6g} inside tracked domain",
            j=j, z=float(bad),
        )
    m = 2.0 * np.sqrt(-p / 3.0)
    arg = np.clip(3.0 * q / (p * m), -1.0, 1.0)
    phi = np.arccos(arg)
    shift = c1 / 3.0
    ks = np.array([0.0, 1.0, 2.0])
    w = m[:, None] * np.cos((phi[:, None] - 2.0 * np.pi * ks[None, :]) / 3.0) - shift[:, None]
    w.sort(axis=1)
    # one Newton step per root
    f = ((w + c1[:, None]) * w + c2[:, None]) * w + c3[:, None]
    df = (3.0 * w + 2.0 * c1[:, None]) * w + c2[:, None]
    step = np.where(df != 0.0, f / np.where(df != 0.0, df, 1.0), 0.0)
    return w - step


@dataclass(frozen=True)
class BranchPoints:
    """Ramification points of the root functions of R_j in z.

    eta_2 < eta_1 < 0 are the real ones (where alpha and beta of curve 1,
    or beta and gamma of curve 2, collide); the complex-conjugate pair is
    kept for diagnostics. ``tangency_s`` holds the curve abscissae (resp.
    ordinates) where the chord line is tangent, i.e. T_j'(s) = -1.
    """

    eta_1: float
    eta_2: float
    eta_complex: tuple[complex, complex]
    tangency_s: tuple[float, float]


def branch_points(params: SystemParams, j: int) -> BranchPoints:
    """Real branch points via the tangency characterisation T_j'(s) = -1.

    T_j'(s) = -1 is equivalent to d_j(s)^2 + lam_o*mu_o*((s+mu_j)^2 -
    lambda_j*mu_j) = 0, a quartic solved by companion-matrix eigenvalues.
    Exactly two real solutions must appear, one in (a_j^-, sigma_j^-) and
    one in (sigma_j^-, a_j^+); each maps to eta = (s + T_j(s))/2.
    """
    lam, mu = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    # d_j(s) = s^2 - (lambda - mu_j) s - lam_o * mu_j
    b = params.total_rate - mu
    c = -lam_o * mu
    # d^2 coefficients (ascending): (c - b s + s^2)^2
    quart = np.array([
        c * c + lam_o * mu_o * (mu * mu - lam * mu),
        -2.0 * b * c + 2.0 * lam_o * mu_o * mu,
        b * b + 2.0 * c + lam_o * mu_o,
        -2.0 * b,
        1.0,
    ])
    rr = np.polynomial.polynomial.polyroots(quart)
    scale = max(1.0, float(np.max(np.abs(rr))))
    real = sorted(float(r.real) for r in rr if abs(r.imag) < 1e-9 * scale)
    am, ap = stationary_points(params, j)
    sm, _ = t_poles(params, j)
    inside = [s for s in real if am - 1e-9 < s < ap + 1e-9]
    if len(inside) != 2:
        raise RootCountError(
            f"tangency quartic for curve {j} produced {len(inside)} real "
            f"solutions in ({am:.6g}, {ap:.6g}); expected 2",
            j=j, roots=real,
        )
    s2_, s1_ = inside  # s2_ < sigma_j^- < s1_
    if not (s2_ < sm < s1_):
        raise RootCountError(
            f"tangency solutions {inside} do not straddle the pole {sm:.6g}",
            j=j, roots=inside,
        )
    eta_lo = 0.5 * (s2_ + t_map(params, j, s2_))
    eta_hi = 0.5 * (s1_ + t_map(params, j, s1_))
    if eta_lo > eta_hi:
        eta_lo, eta_hi = eta_hi, eta_lo
        s2_, s1_ = s1_, s2_
    return BranchPoints(eta_1=eta_hi, eta_2=eta_lo,
                        eta_complex=_complex_eta_pair(params, j),
                        tangency_s=(s1_, s2_))


def _complex_eta_pair(params: SystemParams, j: int) -> tuple[complex, complex]:
    """Conjugate discriminant roots straight from the degree-4 polynomial."""
    coef = discriminant_poly(params, j)
    rr = np.polynomial.polynomial.polyroots(coef)
    scale = max(1.0, float(np.max(np.abs(rr))))
    cplx = [complex(r) for r in rr if abs(r.imag) >= 1e-8 * scale]
    return tuple(cplx[:2]) if len(cplx) >= 2 else (complex("nan"), complex("nan"))


def intersection_frame(params: SystemParams, z: float) -> IntersectionFrame:
    """All six chord/curve intersection coordinates at z > 0."""
    r1 = real_roots(params, 1, z)
    r2 = real_roots(params, 2, z)
    return IntersectionFrame(
        z=z,
        a1=z + r1.alpha, b1=z + r1.beta, c1=z + r1.gamma,
        A1=z - r1.alpha, B1=z - r1.beta, C1=z - r1.gamma,
        A2=z + r2.alpha, B2=z + r2.beta, C2=z + r2.gamma,
        a2=z - r2.alpha, b2=z - r2.beta, c2=z - r2.gamma,
    )


__all__ = [
    "CubicCoeffs",
    "RootTriple",
    "IntersectionFrame",
    "BranchPoints",
    "cubic_coeffs",
    "cubic_value",
    "discriminant",
    "discriminant_leading_coeff",
    "discriminant_poly",
    "real_roots",
    "tracked_roots",
    "roots_array",
    "branch_points",
    "intersection_frame",
]

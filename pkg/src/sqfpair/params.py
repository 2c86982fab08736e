"""Model parameters, kernels, algebraic branches and characteristic constants.

Two parallel queues share one server. Jobs arrive in queue j as a Poisson
stream of rate lambda_j and carry exponential service requirements of mean
1/mu_j. The server always works on the nonempty queue with the smaller
workload (ties to queue 1). All stationary quantities of that system are
driven by the pair of kernels

    K(s1, s2)  = lambda1*s1/(s1+mu1) + lambda2*s2/(s2+mu2)
    K1 = s1 - K,   K2 = s2 - K

whose zero sets are two rational cubic curves in the (s1, s2) plane. This
module evaluates the kernels, the two-valued algebraic solutions xi_j^+/-
of ``K_j = 0`` in one variable, the degree-2 rational parametrisations T_j
of the curves, and every closed-form characteristic constant of the curve
geometry (double roots of the diagonal equation, curve poles, stationary
points, ramification points of the xi branches).

Only real arguments are supported for the branch functions; the quadratic
sign labels are swapped left of the branch-cut midline so that xi^- is the
globally analytic determination on the real axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import (
    CutIntervalError,
    KernelPoleError,
    ParameterError,
    PoleError,
    StabilityError,
)

_EQUAL_MU_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Arrival and service rates; the single source of model truth.

    Rates are per unit time. Construction validates positivity and the
    stability condition rho1 + rho2 < 1.
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "mu1", "mu2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(
                    f"rate {name}={v!r} must be a finite positive number", field=name
                )
        if self.rho >= 1.0:
            raise StabilityError(
                f"total load rho={self.rho:.6g} >= 1; no stationary regime",
                rho=self.rho,
            )

    @property
    def rho1(self) -> float:
        return self.lambda1 / self.mu1

    @property
    def rho2(self) -> float:
        return self.lambda2 / self.mu2

    @property
    def rho(self) -> float:
        return self.rho1 + self.rho2

    @property
    def total_rate(self) -> float:
        return self.lambda1 + self.lambda2

    def swapped(self) -> "SystemParams":
        """Parameters with the queue indices exchanged."""
        return SystemParams(self.lambda2, self.lambda1, self.mu2, self.mu1)

    def rates(self, j: int) -> tuple[float, float]:
        """(lambda_j, mu_j) for queue j in {1, 2}."""
        if j == 1:
            return self.lambda1, self.mu1
        if j == 2:
            return self.lambda2, self.mu2
        raise ParameterError(f"queue index must be 1 or 2, got {j}")


@dataclass(frozen=True)
class LoadSummary:
    rho1: float
    rho2: float
    rho: float
    total_rate: float


def derived_loads(params: SystemParams) -> LoadSummary:
    """Per-queue and total loads; rejects rho >= 1 (checked at construction)."""
    return LoadSummary(params.rho1, params.rho2, params.rho, params.total_rate)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelValues:
    K: complex
    K1: complex
    K2: complex


def kernels(params: SystemParams, s1, s2) -> KernelValues:
    """Evaluate K, K1, K2 at (s1, s2); rejects the service-rate poles."""
    if s1 == -params.mu1 or s2 == -params.mu2:
        raise KernelPoleError(
            "kernel pole: s1=-mu1 or s2=-mu2", s1=s1, s2=s2
        )
    K = params.lambda1 * s1 / (s1 + params.mu1) + params.lambda2 * s2 / (s2 + params.mu2)
    return KernelValues(K=K, K1=s1 - K, K2=s2 - K)


def service_transform(params: SystemParams, j: int, s) -> complex:
    """Laplace transform mu_j/(s+mu_j) of the exponential service time."""
    _, mu = params.rates(j)
    if s == -mu:
        raise KernelPoleError("service transform pole", j=j, s=s)
    return mu / (s + mu)


# ---------------------------------------------------------------------------
# Diagonal quadratic and its roots
# ---------------------------------------------------------------------------


def diagonal_quadratic(params: SystemParams, s):
    """P(s) = s^2 + (mu1+mu2-lambda)s + mu1*mu2*(1-rho).

    Its roots are the two off-origin intersections of the curves K1=0 and
    K2=0 with the diagonal s1=s2 (for mu1 != mu2).
    """
    lam = params.total_rate
    return s * s + (params.mu1 + params.mu2 - lam) * s + params.mu1 * params.mu2 * (1.0 - params.rho)


def sigma0_roots(params: SystemParams) -> tuple[float, float]:
    """(sigma0_minus, sigma0_plus), the ordered real negative roots of P."""
    lam = params.total_rate
    b = params.mu1 + params.mu2 - lam
    disc = (params.mu1 - params.mu2 - params.lambda1 + params.lambda2) ** 2 \
        + 4.0 * params.lambda1 * params.lambda2
    r = math.sqrt(disc)
    return (-b - r) / 2.0, (-b + r) / 2.0


# ---------------------------------------------------------------------------
# Rational parametrisations T_j and their derivatives
# ---------------------------------------------------------------------------


def _t_den(params: SystemParams, j: int, s):
    # denominator d_j(s) = s^2 - (lambda - mu_j) s - lambda_{3-j} mu_j
    lam_o, _ = params.rates(3 - j)
    _, mu = params.rates(j)
    return s * s - (params.total_rate - mu) * s - lam_o * mu


def t_poles(params: SystemParams, j: int) -> tuple[float, float]:
    """(sigma_j_minus, sigma_j_plus): the two real poles of T_j."""
    lam_o, _ = params.rates(3 - j)
    _, mu = params.rates(j)
    b = params.total_rate - mu
    r = math.sqrt(b * b + 4.0 * lam_o * mu)
    return (b - r) / 2.0, (b + r) / 2.0


def stationary_points(params: SystemParams, j: int) -> tuple[float, float]:
    """(a_j_minus, a_j_plus) = -mu_j -/+ sqrt(lambda_j mu_j): zeros of T_j'."""
    lam, mu = params.rates(j)
    r = math.sqrt(lam * mu)
    return -mu - r, -mu + r


def t_map(params: SystemParams, j: int, s) -> float:
    """The degree-1 solution of K_j = 0 in the other variable.

    T_1 sends an abscissa s1 on curve 1 to its ordinate; T_2 sends an
    ordinate s2 on curve 2 to its abscissa.
    """
    lam, mu = params.rates(j)
    _, mu_o = params.rates(3 - j)
    den = _t_den(params, j, s)
    scale = max(1.0, abs(s) ** 2)
    if abs(den) < 1e-14 * scale:
        raise PoleError(f"T_{j} pole at s={s}", j=j, s=s)
    return -mu_o * s * (s + mu - lam) / den


def t_prime(params: SystemParams, j: int, s) -> float:
    """Closed-form derivative of T_j (rational, no finite differences)."""
    lam, mu = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    den = _t_den(params, j, s)
    if den == 0.0:
        raise PoleError(f"T_{j} pole at s={s}", j=j, s=s)
    return lam_o * mu_o * ((s + mu) ** 2 - lam * mu) / den ** 2


def t_second(params: SystemParams, j: int, s) -> float:
    """Closed-form second derivative of T_j (for convexity checks)."""
    lam, mu = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    den = _t_den(params, j, s)
    if den == 0.0:
        raise PoleError(f"T_{j} pole at s={s}", j=j, s=s)
    cubic = s ** 3 + 3.0 * mu * s ** 2 + 3.0 * mu * (mu - lam) * s \
        + mu * ((mu - lam) ** 2 + lam * lam_o)
    return -2.0 * lam_o * mu_o * cubic / den ** 3


# ---------------------------------------------------------------------------
# Algebraic branches xi_j^{+/-}
# ---------------------------------------------------------------------------


def branch_cut(params: SystemParams, j: int) -> tuple[float, float]:
    """Ramification points bounding the real branch cut of xi_{3-j}.

    ``branch_cut(params, 1)`` returns (zeta1_minus, zeta1_plus), the cut of
    the branches xi_2^{+/-}(s1); indices follow the queue whose axis carries
    the argument.
    """
    lam, mu = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    plus_sq = (math.sqrt(mu_o) + math.sqrt(lam_o)) ** 2
    minus_sq = (math.sqrt(mu_o) - math.sqrt(lam_o)) ** 2
    zminus = -mu * plus_sq / (lam + plus_sq)
    zplus = -mu * minus_sq / (lam + minus_sq)
    return zminus, zplus


def branch_discriminant(params: SystemParams, j: int, s):
    """Discriminant under the square root in xi_{3-j}(s); negative inside the cut.

    For j=1 this is D_1(s1) governing xi_2^{+/-}; it factors as
    D_{0,1} (s - zeta1_minus)(s - zeta1_plus) with the positive constant
    returned by :func:`branch_disc_leading`.
    """
    lam, mu = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    lin = mu * mu_o - lam_o * mu + (mu_o - params.total_rate) * s
    return lin * lin + 4.0 * lam * mu_o * s * (mu + s)


def branch_disc_leading(params: SystemParams, j: int) -> float:
    """Leading coefficient D_{0,j} = 4 lambda1 lambda2 + (mu_{3-j}+lambda_j-lambda_{3-j})^2."""
    lam, _ = params.rates(j)
    lam_o, mu_o = params.rates(3 - j)
    return 4.0 * params.lambda1 * params.lambda2 + (mu_o + lam - lam_o) ** 2


def xi_branches(params: SystemParams, j: int, s: float) -> tuple[float, float]:
    """Both real solutions (xi_j_plus, xi_j_minus) of K_j = 0 at a real argument.

    ``j`` selects the equation solved: xi_1^{+/-}(s2) solves K_1(., s2) = 0,
    xi_2^{+/-}(s1) solves K_2(s1, .) = 0. The argument must lie outside the
    open branch cut. Left of the cut midline the quadratic-formula labels
    are swapped so that the minus branch is the analytic one on the real
    axis; the plus branch keeps its simple pole at -mu_{3-j} there.
    """
    if isinstance(s, complex):
        raise ParameterError("xi branches support real arguments only", s=s)
    lam, mu = params.rates(j)          # rates of the queue being solved for
    lam_a, mu_a = params.rates(3 - j)  # rates tied to the argument axis
    # quadratic in x: (s+mu_a) x^2 + B x - lam mu_a ... with the conventions below
    disc = branch_discriminant(params, 3 - j, s)
    if disc < 0.0:
        zm, zp = branch_cut(params, 3 - j)
        raise CutIntervalError(
            f"argument s={s} inside the branch cut [{zm:.6g}, {zp:.6g}]",
            j=j, s=s,
        )
    B = mu_a * mu - lam * mu_a + (mu - params.total_rate) * s
    a = s + mu_a
    c = -lam_a * mu * s
    root = math.sqrt(disc)
    zm, zp = branch_cut(params, 3 - j)
    swap = s < 0.5 * (zm + zp)
    if a == 0.0:
        # s = -mu_a: the meromorphic branch has its pole here
        if swap:
            raise PoleError(f"xi_{j}^+ pole at s={s}", j=j, s=s)
        raise PoleError(f"xi_{j} branches undefined at s={s}", j=j, s=s)
    # stable quadratic roots: avoid subtracting nearly equal quantities
    if B >= 0.0:
        x_minus = (-B - root) / (2.0 * a)
        x_plus = (c / a) / x_minus if x_minus != 0.0 else (-B + root) / (2.0 * a)
    else:
        x_plus = (-B + root) / (2.0 * a)
        x_minus = (c / a) / x_plus if x_plus != 0.0 else (-B - root) / (2.0 * a)
    if swap:
        x_plus, x_minus = x_minus, x_plus
    return x_plus, x_minus


# ---------------------------------------------------------------------------
# Characteristic constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DerivedConstants:
    """All closed-form characteristic points of the kernel curves.

    The eta fields (real ramification points of the root functions in the
    chord parameter) are filled by the cubic-geometry module; everything
    else is an explicit radical in the rates.
    """

    sigma0_minus: float
    sigma0_plus: float
    sigma1_minus: float
    sigma1_plus: float
    sigma2_minus: float
    sigma2_plus: float
    a1_minus: float
    a1_plus: float
    a2_minus: float
    a2_plus: float
    zeta1_minus: float
    zeta1_plus: float
    zeta2_minus: float
    zeta2_plus: float
    tau1: float
    tau2: float
    mu_equal_flag: bool
    eta1_1: Optional[float] = None  # rightmost real branch point, curve 1
    eta1_2: Optional[float] = None  # leftmost real branch point, curve 1
    eta2_1: Optional[float] = None
    eta2_2: Optional[float] = None

    def sigma(self, j: int) -> tuple[float, float]:
        return (self.sigma1_minus, self.sigma1_plus) if j == 1 else (self.sigma2_minus, self.sigma2_plus)

    def a_points(self, j: int) -> tuple[float, float]:
        return (self.a1_minus, self.a1_plus) if j == 1 else (self.a2_minus, self.a2_plus)

    def zeta(self, j: int) -> tuple[float, float]:
        return (self.zeta1_minus, self.zeta1_plus) if j == 1 else (self.zeta2_minus, self.zeta2_plus)

    def eta_1(self, j: int) -> float:
        return self.eta1_1 if j == 1 else self.eta2_1

    def tau(self, j: int) -> float:
        return self.tau1 if j == 1 else self.tau2


def characteristic_constants(
    params: SystemParams, include_branch_points: bool = True
) -> DerivedConstants:
    """Fill every characteristic constant from its closed form.

    For mu1 = mu2 the quadratic P factors as (s - (lambda-mu))(s + mu); the
    root -mu coincides with a kernel pole and is not a curve intersection,
    so sigma0_plus = -(mu)(1-rho) = lambda - mu is the effective smallest
    singularity and the degeneracy is flagged.
    """
    s0m, s0p = sigma0_roots(params)
    mu_equal = math.isclose(params.mu1, params.mu2, rel_tol=_EQUAL_MU_RTOL)
    if mu_equal:
        # exact factorisation: roots are lambda - mu and -mu
        s0p = -(params.mu1) * (1.0 - params.rho)
        s0m = -params.mu1
    s1m, s1p = t_poles(params, 1)
    s2m, s2p = t_poles(params, 2)
    a1m, a1p = stationary_points(params, 1)
    a2m, a2p = stationary_points(params, 2)
    z1m, z1p = branch_cut(params, 1)
    z2m, z2p = branch_cut(params, 2)
    tau1 = xi_branches(params, 1, s0p)[1]
    tau2 = xi_branches(params, 2, s0p)[1]
    dc = DerivedConstants(
        sigma0_minus=s0m, sigma0_plus=s0p,
        sigma1_minus=s1m, sigma1_plus=s1p,
        sigma2_minus=s2m, sigma2_plus=s2p,
        a1_minus=a1m, a1_plus=a1p, a2_minus=a2m, a2_plus=a2p,
        zeta1_minus=z1m, zeta1_plus=z1p, zeta2_minus=z2m, zeta2_plus=z2p,
        tau1=tau1, tau2=tau2, mu_equal_flag=mu_equal,
    )
    if include_branch_points:
        from .cubics import branch_points  # deferred: cubics imports this module

        bp1 = branch_points(params, 1)
        bp2 = branch_points(params, 2)
        dc = replace(
            dc,
            eta1_1=bp1.eta_1, eta1_2=bp1.eta_2,
            eta2_1=bp2.eta_1, eta2_2=bp2.eta_2,
        )
    return dc


def forcing_term(params: SystemParams, j: int, s, psi_other_origin: float):
    """Inhomogeneous term J_j(s) of the boundary functional equations.

    J_1(s1) = (1-rho)(lambda - lambda1 b_1(s1)) - psi2(0) and symmetrically
    for J_2; ``psi_other_origin`` is the boundary density of the *other*
    queue at the origin.
    """
    lam, _ = params.rates(j)
    b = service_transform(params, j, s)
    return (1.0 - params.rho) * (params.total_rate - lam * b) - psi_other_origin


__all__ = [
    "SystemParams",
    "LoadSummary",
    "derived_loads",
    "KernelValues",
    "kernels",
    "service_transform",
    "diagonal_quadratic",
    "sigma0_roots",
    "t_map",
    "t_prime",
    "t_second",
    "t_poles",
    "stationary_points",
    "branch_cut",
    "branch_discriminant",
    "branch_disc_leading",
    "xi_branches",
    "DerivedConstants",
    "characteristic_constants",
    "forcing_term",
]

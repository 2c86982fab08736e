"""Singularity-regime conditions and the analyticity half-plane edge.

Two closed-form inequalities on the rates decide, per queue, whether the
dominant singularity of the boundary transform sits at the diagonal double
root sigma_0^+ (a simple pole) or at the branch point zeta_j^+ (an
algebraic singularity):

    condition I  :  (2 mu2 - mu1) sqrt(rho2) + mu1  vs  mu2 + lambda1 + lambda2
    condition II :  (2 mu1 - mu2) sqrt(rho1) + mu2  vs  mu1 + lambda1 + lambda2

"<=" is the plus sign of each condition. The four sign combinations label
the cases a1..a4 and fix the left edge of the half-plane on which the
auxiliary vector M extends analytically; series evaluation at negative
arguments is restricted to that half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cubics import branch_points
from .params import SystemParams, characteristic_constants

# margin below which a condition is flagged as a boundary tie
TIE_TOL = 1e-9

_CASE_BY_SIGNS = {("+", "+"): "a1", ("-", "+"): "a2",
                  ("+", "-"): "a3", ("-", "-"): "a4"}


def condition_margin(params: SystemParams, which: int) -> float:
    """Signed margin of condition I (which=1) or II (which=2); <= 0 is '+'."""
    if which == 1:
        return (2.0 * params.mu2 - params.mu1) * math.sqrt(params.rho2) \
            + params.mu1 - (params.mu2 + params.total_rate)
    return (2.0 * params.mu1 - params.mu2) * math.sqrt(params.rho1) \
        + params.mu2 - (params.mu1 + params.total_rate)


@dataclass(frozen=True)
class Regime:
    """Case label, per-queue decay rates and the analyticity edge."""

    case_label: str
    cond_I: str                 # "+" or "-"
    cond_II: str
    s_tilde_1: float
    s_tilde_2: float
    singularity_type_1: str     # "simple_pole" or "algebraic_order_1"
    singularity_type_2: str
    vm_abscissa: float
    tie_I: bool
    tie_II: bool
    margin_I: float
    margin_II: float


def classify(params: SystemParams) -> Regime:
    """Evaluate both conditions and the case-specific half-plane edge."""
    dc = characteristic_constants(params, include_branch_points=False)
    m_I = condition_margin(params, 1)
    m_II = condition_margin(params, 2)
    sign_I = "+" if m_I <= 0.0 else "-"
    sign_II = "+" if m_II <= 0.0 else "-"
    label = _CASE_BY_SIGNS[(sign_I, sign_II)]
    s0p = dc.sigma0_plus
    s1 = s0p if sign_I == "+" else dc.zeta1_plus
    s2 = s0p if sign_II == "+" else dc.zeta2_plus
    eta1 = branch_points(params, 1).eta_1
    eta2 = branch_points(params, 2).eta_1
    half_tau1 = 0.5 * (s0p + dc.tau1)
    half_tau2 = 0.5 * (s0p + dc.tau2)
    if label == "a1":
        edge = max(half_tau1, half_tau2)
    elif label == "a2":
        edge = max(half_tau1, eta2)
    elif label == "a3":
        edge = max(eta1, half_tau2)
    else:
        edge = max(eta1, eta2)
    return Regime(
        case_label=label,
        cond_I=sign_I,
        cond_II=sign_II,
        s_tilde_1=s1,
        s_tilde_2=s2,
        singularity_type_1="simple_pole" if sign_I == "+" else "algebraic_order_1",
        singularity_type_2="simple_pole" if sign_II == "+" else "algebraic_order_1",
        vm_abscissa=edge,
        tie_I=abs(m_I) < TIE_TOL,
        tie_II=abs(m_II) < TIE_TOL,
        margin_I=m_I,
        margin_II=m_II,
    )


def equal_mu_boundary(x: float) -> float:
    """f boundary of the equal-service-rate case map: sqrt(x)(1 - sqrt(x))."""
    r = math.sqrt(x)
    return r * (1.0 - r)


def equal_lambda_boundary(x: float) -> float:
    """g boundary of the equal-arrival-rate case map."""
    r = math.sqrt(x)
    return x * (1.0 - r) / (1.0 + 2.0 * x - 2.0 * r)


__all__ = [
    "Regime",
    "classify",
    "condition_margin",
    "equal_mu_boundary",
    "equal_lambda_boundary",
    "TIE_TOL",
]

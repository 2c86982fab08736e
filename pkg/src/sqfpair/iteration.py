"""Height maps, involutions and the per-slice data of the functional equation.

Cutting both kernel curves with the line s1 + s2 = 2z and applying the
point involution of each rational cubic produces two strictly increasing
"height" maps h1, h2 on the chord parameter. The stationary auxiliary
vector satisfies

    M(z) = Q1(z) . M(h1(z)) + Q2(z) . M(h2(z)) + L(z)

and this module assembles, for any admissible z, the 2x2 matrices Q1, Q2,
the determinant D(z) of the underlying linear system, and the forcing
vector L in its psi-agnostic decomposition

    L(z) = L0(z) + psi1(0) * L1vec(z) + psi2(0) * L2vec(z)

so that the unknown boundary densities at the origin can be solved for
afterwards. Everything reduces to the extreme cubic roots alpha_1(z) and
gamma_2(z) plus rational operations: the involution gives the image
abscissa/ordinate in closed form, and the identities

    q1(beta1*) = mu1 + z + alpha_1(z),   q2(beta2*) = mu2 + z - gamma_2(z)

remove every remaining branch evaluation from the hot path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cubics import branch_points, cubic_value, roots_array, tracked_roots
from .errors import PoleError, RootDomainError, SingularMatrixError
from .params import SystemParams

_D_TINY = 1e-300
_DEGENERACY_RTOL = 1e-13


def _guard_denominator(values: np.ndarray, z: np.ndarray, what: str):
    scale = np.maximum(1.0, np.abs(z))
    bad = np.abs(values) < _DEGENERACY_RTOL * scale
    if np.any(bad):
        zbad = float(np.asarray(z)[bad][0]) if np.ndim(z) else float(z)
        raise PoleError(f"step data pole ({what}) at z={zbad:.9g}", z=zbad)


@dataclass(frozen=True)
class StepMatrices:
    """Snapshot of every per-z object of the functional equation."""

    z: float
    s1: float          # abscissa z + gamma_2(z) feeding the curve-2 branch data
    s2: float          # ordinate z - alpha_1(z) feeding the curve-1 branch data
    h1: float
    h2: float
    alpha1: float
    gamma2: float
    beta1_star: float  # root value beta_1(h1(z))
    beta2_star: float  # root value beta_2(h2(z))
    k1: float
    k2: float
    Pi1: np.ndarray
    Pi2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    D: float
    e1: np.ndarray
    e2: np.ndarray
    L0: np.ndarray
    L1vec: np.ndarray
    L2vec: np.ndarray
    L: Optional[np.ndarray] = None


def involution_image(params: SystemParams, j: int, coordinate: float) -> float:
    """Image of a curve-j coordinate under the cubic's rational involution.

    For curve 1 the involution acts on abscissae, for curve 2 on ordinates;
    both read iota_j(x) = -mu_j (x + mu_j - lambda_j)/(x + mu_j). Applying
    it twice returns the input.
    """
    lam, mu = params.rates(j)
    if coordinate == -mu:
        raise PoleError(f"involution pole at coordinate -mu_{j}", j=j)
    return -mu * (coordinate + mu - lam) / (coordinate + mu)


def q_factors(params: SystemParams, z: float, epsilon: float) -> tuple[float, float]:
    """(q1, q2) evaluated at a root value epsilon of either cubic at z."""
    d1 = params.mu1 + z + epsilon
    d2 = params.mu2 + z - epsilon
    if d1 == 0.0 or d2 == 0.0:
        raise PoleError("q factor pole", z=z, epsilon=epsilon)
    return params.lambda1 * params.mu1 / d1, params.lambda2 * params.mu2 / d2


def h_map(params: SystemParams, j: int, z: float) -> float:
    """The height map h_j; strictly above z for z > 0.

    2 h1(z) = 2z - (a1 + mu1) + lambda1 mu1/(a1 + mu1) with a1 = z + alpha_1(z);
    2 h2(z) = 2z - (c2 + mu2) + lambda2 mu2/(c2 + mu2) with c2 = z - gamma_2(z).
    """
    lam, mu = params.rates(j)
    roots = tracked_roots(params, j, z)
    coord = z + roots.alpha if j == 1 else z - roots.gamma
    if coord + mu == 0.0:
        raise PoleError(f"degenerate chord: coordinate at -mu_{j}", j=j, z=z)
    return z - 0.5 * (coord + mu) + 0.5 * lam * mu / (coord + mu)


# ---------------------------------------------------------------------------
# Vectorised assembly used by the series engine
# ---------------------------------------------------------------------------


class StepAssembler:
    """Precomputed-rate assembler mapping slice parameters to step data.

    One instance per SystemParams; ``arrays(z)`` evaluates every functional-
    equation ingredient on a whole batch of z values at once. The tracked
    domain max(eta_1^(1), eta_2^(1)) < z is enforced by the root solver.
    """

    def __init__(self, params: SystemParams):
        self.params = params
        self.eta1_curve1 = branch_points(params, 1).eta_1
        self.eta1_curve2 = branch_points(params, 2).eta_1
        self.rho = params.rho

    def arrays(self, z: np.ndarray) -> dict:
        p = self.params
        z = np.asarray(z, dtype=float)
        l1, l2, m1, m2 = p.lambda1, p.lambda2, p.mu1, p.mu2
        lam = p.total_rate
        alpha1 = roots_array(p, 1, z, self.eta1_curve1)[:, 0]
        gamma2 = roots_array(p, 2, z, self.eta1_curve2)[:, 2]
        a1 = z + alpha1
        c2 = z - gamma2
        s1 = z + gamma2
        s2 = z - alpha1
        _guard_denominator(a1 + m1, z, "curve-1 coordinate at -mu1")
        _guard_denominator(c2 + m2, z, "curve-2 coordinate at -mu2")
        # involution images (abscissa on curve 1, ordinate on curve 2)
        b1s = -m1 * (a1 + m1 - l1) / (a1 + m1)
        b2s = -m2 * (c2 + m2 - l2) / (c2 + m2)
        # the step data has removable-in-the-limit poles where an
        # intersection point reaches a coordinate axis (image point on the
        # diagonal); evaluation exactly there is rejected
        _guard_denominator(s2 - b1s, z, "curve-1 image point on the diagonal")
        _guard_denominator(s1 - b2s, z, "curve-2 image point on the diagonal")
        h1 = z - 0.5 * (a1 + m1) + 0.5 * l1 * m1 / (a1 + m1)
        h2 = z - 0.5 * (c2 + m2) + 0.5 * l2 * m2 / (c2 + m2)
        q1_alpha = l1 * m1 / (m1 + a1)
        q2_alpha = l2 * m2 / (m2 + s2)
        q1_gamma = l1 * m1 / (m1 + s1)
        q2_gamma = l2 * m2 / (m2 + c2)
        q1_b1s = m1 + a1     # = lambda1 mu1 / (mu1 + b1s)
        q2_b2s = m2 + c2     # = lambda2 mu2 / (mu2 + b2s)
        D = q1_gamma * q2_alpha - q2_gamma * q1_alpha
        k1 = (s2 - a1) / (s2 - b1s) / D
        k2 = (s1 - c2) / (s1 - b2s) / D
        # branch-difference ratios entering the forcing vector
        X2 = (b1s - a1) / (s2 - b1s)
        X1 = (b2s - c2) / (s1 - b2s)
        n = z.shape[0]
        Q1 = np.empty((n, 2, 2))
        Q1[:, 0, 0] = -q2_gamma * q1_b1s
        Q1[:, 0, 1] = q2_gamma * q2_alpha
        Q1[:, 1, 0] = -q1_gamma * q1_b1s
        Q1[:, 1, 1] = q1_gamma * q2_alpha
        Q1 *= k1[:, None, None]
        Q2 = np.empty((n, 2, 2))
        Q2[:, 0, 0] = q2_alpha * q1_gamma
        Q2[:, 0, 1] = -q2_alpha * q2_b2s
        Q2[:, 1, 0] = q1_alpha * q1_gamma
        Q2[:, 1, 1] = -q1_alpha * q2_b2s
        Q2 *= k2[:, None, None]
        # forcing decomposition: L = L0 + psi1(0) L1vec + psi2(0) L2vec
        e1 = np.stack([q2_gamma, q1_gamma], axis=1)
        e2 = np.stack([q2_alpha, q1_alpha], axis=1)
        kern1 = lam - l1 * m1 / (s1 + m1)   # lambda - lambda1 b1(s1)
        kern2 = lam - l2 * m2 / (s2 + m2)   # lambda - lambda2 b2(s2)
        L0 = (-(1.0 - self.rho) / D)[:, None] * (
            (X1 * kern1)[:, None] * e2 + (X2 * kern2)[:, None] * e1
        )
        L1vec = (X2 / D)[:, None] * e1
        L2vec = (X1 / D)[:, None] * e2
        return {
            "z": z, "alpha1": alpha1, "gamma2": gamma2,
            "s1": s1, "s2": s2, "h1": h1, "h2": h2,
            "b1_star": b1s, "b2_star": b2s,
            "q1_alpha": q1_alpha, "q2_alpha": q2_alpha,
            "q1_gamma": q1_gamma, "q2_gamma": q2_gamma,
            "k1": k1, "k2": k2, "D": D,
            "Q1": Q1, "Q2": Q2,
            "e1": e1, "e2": e2,
            "L0": L0, "L1vec": L1vec, "L2vec": L2vec,
        }


def step_matrices(
    params: SystemParams,
    z: float,
    psi: Optional[tuple[float, float]] = None,
) -> StepMatrices:
    """Assemble Q1, Q2, D and the forcing decomposition at a single z.

    ``psi`` (psi1(0), psi2(0)), when given, also fills the combined
    forcing vector L. D(z) is guaranteed nonzero for z > 0; elsewhere it is
    guarded numerically.
    """
    arr = StepAssembler(params).arrays(np.array([z], dtype=float))
    D = float(arr["D"][0])
    scale = max(abs(arr["q1_alpha"][0] * arr["q2_gamma"][0]),
                abs(arr["q2_alpha"][0] * arr["q1_gamma"][0]), _D_TINY)
    if abs(D) < 1e-13 * scale:
        raise SingularMatrixError(f"step-matrix determinant vanishes at z={z}",
                                  z=z, D=D)
    h1 = float(arr["h1"][0])
    h2 = float(arr["h2"][0])
    beta1_star = tracked_roots(params, 1, h1).beta
    beta2_star = tracked_roots(params, 2, h2).beta
    L0 = arr["L0"][0]
    L1v = arr["L1vec"][0]
    L2v = arr["L2vec"][0]
    L = None
    if psi is not None:
        L = L0 + psi[0] * L1v + psi[1] * L2v
    k1 = float(arr["k1"][0])
    k2 = float(arr["k2"][0])
    return StepMatrices(
        z=z, s1=float(arr["s1"][0]), s2=float(arr["s2"][0]), h1=h1, h2=h2,
        alpha1=float(arr["alpha1"][0]), gamma2=float(arr["gamma2"][0]),
        beta1_star=beta1_star, beta2_star=beta2_star,
        k1=k1, k2=k2,
        Pi1=arr["Q1"][0] / k1, Pi2=arr["Q2"][0] / k2,
        Q1=arr["Q1"][0], Q2=arr["Q2"][0], D=D,
        e1=arr["e1"][0], e2=arr["e2"][0],
        L0=L0, L1vec=L1v, L2vec=L2v, L=L,
    )


def determinant_identity_value(params: SystemParams, z: float) -> float:
    """D(z) through the closed rational form (independent of the q-products).

    D = 4 l1 m1 l2 m2 (mu1+mu2+2z) alpha1 gamma2 (alpha1-gamma2)
        / (R1(gamma2, z) R2(alpha1, z)); used as a cross-check of the
    product formula implemented in :class:`StepAssembler`.
    """
    r1 = tracked_roots(params, 1, z)
    r2 = tracked_roots(params, 2, z)
    a, g = r1.alpha, r2.gamma
    num = 4.0 * params.lambda1 * params.mu1 * params.lambda2 * params.mu2 \
        * (params.mu1 + params.mu2 + 2.0 * z) * a * g * (a - g)
    den = cubic_value(params, 1, g, z) * cubic_value(params, 2, a, z)
    return num / den


__all__ = [
    "StepMatrices",
    "StepAssembler",
    "involution_image",
    "q_factors",
    "h_map",
    "step_matrices",
    "determinant_identity_value",
]

"""Series solution of the vector functional equation and all transforms.

The auxiliary vector M = (M1, M2) solves

    M(z) = Q1(z) M(h1(z)) + Q2(z) M(h2(z)) + L(z)

and unrolls into a sum over the binary tree of compositions of the two
height maps: every node carries the left-to-right product of Q matrices
along its path and contributes (product) . L(argument). The engine below
walks that tree breadth-first with numpy-vectorised layers, keeping the
three forcing columns L0, L1vec, L2vec together so that one traversal
yields the three basis solutions; the boundary densities psi1(0), psi2(0)
then come from a 2x2 linear relation at z = 0 and close the system.

Evaluation at z > 0 is covered by the convergence proof (geometric decay
at rate at most rho); at negative z inside the analyticity half-plane the
decay is monitored layer by layer and failure raises, because convergence
there is only empirical.

Downstream of M: the single-queue boundary transforms G1, G2 (in their two
equivalent branch forms), the bivariate transforms F1, F2, the H coupling
term, the full workload transform F, and the empty-queue probabilities.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AnalyticityDomainError,
    ExtrapolationError,
    InversionError,
    KernelZeroError,
    PoleError,
    SeriesDivergenceError,
)
from .iteration import StepAssembler
from .params import (
    SystemParams,
    forcing_term,
    kernels,
    xi_branches,
)
from .regime import classify

_GUARD_START = 5          # layer index from which the decay guard is enforced
_WIDTH_LIMIT = 300_000    # soft cap on live tree width per layer
_NODE_BUDGET = 40_000_000  # hard cap on total visited nodes
_DEPTH_CAP = 96           # hard cap on the default depth formula
# absolute pruning floor as a fraction of tol: tol/2^K alone is far below
# any useful scale once K grows past ~17, and near-pure composition chains
# would then keep an exponential number of live paths alive
_PRUNE_FRACTION = 1e-5

# abscissae used for the z->0+ and s->0+ limits (largest first)
_PSI_LIMIT_POINTS = (1e-2, 5e-3, 2.5e-3)
_G0_LIMIT_POINTS = (5e-2, 2.5e-2, 1.25e-2)


@dataclass(frozen=True)
class TruncationPolicy:
    """Depth/tolerance policy for the composition-tree evaluation.

    ``max_depth`` defaults to ceil(log tol / log rho) (capped), matching
    the proven O(rho^K) remainder envelope; ``decay_guard`` is the largest
    acceptable layer-to-layer norm ratio once transients have passed and
    defaults to rho + 0.15.
    """

    tol: float = 1e-8
    max_depth: Optional[int] = None
    decay_guard: Optional[float] = None

    def __post_init__(self):
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")

    def depth_for(self, rho: float) -> int:
        if self.max_depth is not None:
            return self.max_depth
        k = math.ceil(math.log(self.tol) / math.log(rho))
        return max(8, min(k, _DEPTH_CAP))

    def guard_for(self, rho: float) -> float:
        if self.decay_guard is not None:
            return self.decay_guard
        return rho + 0.15


@dataclass(frozen=True)
class SeriesDiagnostics:
    depth_used: int
    layers_evaluated: int
    max_width: int
    nodes_visited: int
    last_layer_norm: float
    prune_mass_bound: float
    truncation_capped: bool


@dataclass(frozen=True)
class BasisSolutions:
    """Values at one z of the three basis solutions (columns 0, 1, 2)."""

    stack: np.ndarray          # shape (2, 3)
    error_estimate: float
    diagnostics: SeriesDiagnostics


@dataclass(frozen=True)
class PsiConstants:
    psi1_0: float
    psi2_0: float
    extrapolation_gap: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.psi1_0, self.psi2_0)


@dataclass(frozen=True)
class MVector:
    M1: float
    M2: float
    error_estimate: float


@dataclass(frozen=True)
class FTransforms:
    F1: float
    F2: float
    H: float
    F: float


@dataclass(frozen=True)
class EmptyProbabilities:
    p_empty_1: float
    p_empty_2: float
    g1_at_0: float
    g2_at_0: float
    psi: PsiConstants


def _inf_norm_2x2(mats: np.ndarray) -> np.ndarray:
    """Row-sum norm of a batch of 2x2 matrices."""
    return np.abs(mats).sum(axis=2).max(axis=1)


def evaluate_basis(params: SystemParams, z: float,
                   policy: Optional[TruncationPolicy] = None,
                   assembler: Optional[StepAssembler] = None) -> BasisSolutions:
    """One breadth-first tree traversal; returns the (2, 3) basis stack.

    Column i solves the functional equation with forcing L^(i). Children
    of each node are visited in (h1, h2) order, and layer sums run in that
    fixed order, so results do not depend on any worker configuration.
    Nodes whose accumulated matrix product drops below the pruning floor
    tol/2^K are cut; if a layer grows past the width limit, the smallest-
    norm nodes are cut as well and the discarded mass bound is reported.
    """
    policy = policy or TruncationPolicy()
    asm = assembler or StepAssembler(params)
    if z <= 0.0:
        edge = classify(params).vm_abscissa
        if z <= edge:
            raise AnalyticityDomainError(
                f"z={z:.6g} is not inside the analyticity half-plane "
                f"(edge {edge:.6g})", z=z, edge=edge,
            )
    rho = params.rho
    depth = policy.depth_for(rho)
    formula_depth = math.ceil(math.log(policy.tol) / math.log(rho))
    guard = policy.guard_for(rho)
    prune_floor = max(policy.tol / 2.0 ** min(depth, 1020),
                      policy.tol * _PRUNE_FRACTION)
    zs = np.array([z], dtype=float)
    prods = np.eye(2)[None, :, :].copy()
    total = np.zeros((2, 3))
    prev_norm = None
    last_norm = 0.0
    nodes = 0
    max_width = 1
    prune_bound = 0.0
    layers = 0
    stop_factor = min(guard, 0.95)
    recent_ratios: list[float] = []
    for k in range(depth + 1):
        n = zs.shape[0]
        nodes += n
        if nodes > _NODE_BUDGET:
            raise SeriesDivergenceError(
                f"node budget exhausted at depth {k} (z={z:.6g})", z=z, depth=k,
            )
        max_width = max(max_width, n)
        arr = asm.arrays(zs)
        lstack = np.stack([arr["L0"], arr["L1vec"], arr["L2vec"]], axis=2)
        contrib = np.matmul(prods, lstack)          # (n, 2, 3)
        layer_sum = np.add.reduce(contrib, axis=0)  # fixed node order
        total += layer_sum
        layer_norm = float(np.abs(layer_sum).max())
        layers = k + 1
        last_norm = layer_norm
        if k >= _GUARD_START and prev_norm is not None and prev_norm > 0.0:
            ratio = layer_norm / prev_norm
            if ratio > guard and layer_norm > policy.tol * 1e-6:
                raise SeriesDivergenceError(
                    f"layer norms stopped contracting at depth {k} "
                    f"(ratio {ratio:.3f} > guard {guard:.3f}, z={z:.6g})",
                    z=z, depth=k, ratio=ratio, guard=guard,
                )
        if prev_norm is not None and prev_norm > 0.0:
            recent_ratios.append(layer_norm / prev_norm)
            if len(recent_ratios) > 3:
                recent_ratios.pop(0)
        prev_norm = layer_norm
        if k == depth:
            break
        # early exit once the geometric tail bound is negligible; the decay
        # rate estimate is the worst ratio seen over the last three layers
        rate = min(max(max(recent_ratios, default=stop_factor), 0.2), 0.98)
        if layer_norm * rate / (1.0 - rate) < 0.05 * policy.tol:
            break
        child_prods = np.stack(
            [np.matmul(prods, arr["Q1"]), np.matmul(prods, arr["Q2"])], axis=1
        ).reshape(-1, 2, 2)
        child_zs = np.stack([arr["h1"], arr["h2"]], axis=1).reshape(-1)
        norms = _inf_norm_2x2(child_prods)
        keep = norms >= prune_floor
        if not np.all(keep):
            prune_bound += float(norms[~keep].sum())
            child_prods = child_prods[keep]
            child_zs = child_zs[keep]
            norms = norms[keep]
        if child_zs.shape[0] > _WIDTH_LIMIT:
            cutoff = np.partition(norms, -_WIDTH_LIMIT)[-_WIDTH_LIMIT]
            keep = norms >= cutoff
            prune_bound += float(norms[~keep].sum())
            child_prods = child_prods[keep]
            child_zs = child_zs[keep]
        if child_zs.shape[0] == 0:
            break
        zs, prods = child_zs, child_prods
    diag = SeriesDiagnostics(
        depth_used=depth,
        layers_evaluated=layers,
        max_width=max_width,
        nodes_visited=nodes,
        last_layer_norm=last_norm,
        prune_mass_bound=prune_bound,
        truncation_capped=(policy.max_depth is None and formula_depth > depth),
    )
    return BasisSolutions(stack=total, error_estimate=last_norm, diagnostics=diag)


def script_L(params: SystemParams, i: int, z: float,
             policy: Optional[TruncationPolicy] = None) -> np.ndarray:
    """Basis solution i in {0, 1, 2} of the functional equation at z."""
    if i not in (0, 1, 2):
        raise ValueError("basis index must be 0, 1 or 2")
    return evaluate_basis(params, z, policy).stack[:, i].copy()


def _neville_at_zero(xs, ys):
    """Polynomial extrapolation of (xs, ys) to x = 0."""
    xs = list(xs)
    ys = [np.asarray(y, dtype=float) for y in ys]
    n = len(xs)
    tab = list(ys)
    for m in range(1, n):
        new = []
        for i in range(n - m):
            num = xs[i] * tab[i + 1] - xs[i + m] * tab[i]
            new.append(num / (xs[i] - xs[i + m]))
        tab = new
    return tab[0]


# relative slack of the extrapolation consistency guard: the 3-point vs
# 2-point gap measures the ordinary O(step^2) spacing error (curvature of
# the transform grows quickly with the load), so a purely absolute
# threshold would reject smooth limits of order-one quantities; genuine
# instability produces gaps of the order of the value itself
_RICHARDSON_REL = 1e-2


def _richardson_limit(xs, values, gap_tol, what):
    """Extrapolate to 0 with a 3-point/2-point consistency guard."""
    full = _neville_at_zero(xs, values)
    two = _neville_at_zero(xs[-2:], values[-2:])
    gap = float(np.max(np.abs(full - two)))
    threshold = max(gap_tol, _RICHARDSON_REL * float(np.max(np.abs(full))))
    if gap > threshold:
        raise ExtrapolationError(
            f"{what}: extrapolants disagree by {gap:.3e} (> {threshold:.3e})",
            gap=gap, tolerance=threshold,
        )
    return full, gap


@functools.lru_cache(maxsize=128)
def psi_constants(params: SystemParams,
                  policy: Optional[TruncationPolicy] = None) -> PsiConstants:
    """Boundary densities at the origin from the basis solutions near 0.

    Plugging M = L^(0)-basis + psi1 L^(1)-basis + psi2 L^(2)-basis into the
    finiteness constraint at the origin and the mass balance
    psi1(0) + psi2(0) = lambda (1 - rho) gives two closed-form ratios. The
    basis values at 0 are obtained by Richardson extrapolation down the
    fixed abscissa ladder; the 3-point and 2-point extrapolants must agree
    within 100 * tol.
    """
    policy = policy or TruncationPolicy()
    asm = StepAssembler(params)
    pts = _PSI_LIMIT_POINTS
    stacks = [evaluate_basis(params, zp, policy, asm).stack for zp in pts]

    def assemble(stack):
        l1, l2 = params.lambda1, params.lambda2
        lam = params.total_rate
        one = 1.0 - params.rho
        A = [l1 * stack[0, i] - l2 * stack[1, i] for i in range(3)]
        den = 1.0 - A[1] + A[2]
        psi1 = (l1 * one + A[0] + lam * one * A[2]) / den
        psi2 = (l2 * one - A[0] - lam * one * A[1]) / den
        return np.array([psi1, psi2])

    vals = [assemble(s) for s in stacks]
    est, gap = _richardson_limit(pts, vals, 100.0 * policy.tol, "psi constants")
    return PsiConstants(psi1_0=float(est[0]), psi2_0=float(est[1]),
                        extrapolation_gap=gap)


def m_vector(params: SystemParams, z: float,
             psi: Optional[PsiConstants] = None,
             policy: Optional[TruncationPolicy] = None) -> MVector:
    """M(z) = basis0 + psi1(0) * basis1 + psi2(0) * basis2."""
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    basis = evaluate_basis(params, z, policy)
    weights = np.array([1.0, psi.psi1_0, psi.psi2_0])
    m = basis.stack @ weights
    return MVector(M1=float(m[0]), M2=float(m[1]),
                   error_estimate=basis.error_estimate * float(np.abs(weights).max()))


# ---------------------------------------------------------------------------
# Boundary transforms G1, G2 and the bivariate transforms
# ---------------------------------------------------------------------------


def _chord_parameter(params: SystemParams, j: int, s: float, branch: str) -> tuple[float, float]:
    """(xi value, chord parameter z) for the two equivalent G_j forms.

    For j = 1 the argument is an abscissa and the relevant branches are
    xi_2^{+/-}(s); for j = 2 an ordinate and xi_1^{+/-}(s). The minus
    branch recovers the chord through the primary intersection point, the
    plus branch the chord through its involution image.
    """
    xp, xm = xi_branches(params, 3 - j, s)
    xi = xm if branch == "minus" else xp
    return xi, 0.5 * (s + xi)


def g_transform(params: SystemParams, j: int, s: float,
                psi: Optional[PsiConstants] = None,
                policy: Optional[TruncationPolicy] = None,
                form: str = "auto") -> float:
    """Boundary transform G_j(s) for the queue-j-alone-nonempty event.

    ``form="minus"`` evaluates through the analytic branch (primary form);
    ``form="plus"`` through the meromorphic one, used as a cross-check and
    near singularities. For small s the minus form requires M left of the
    guarded analyticity half-plane, so ``form="auto"`` (default) falls back
    to the plus form when the minus form is not evaluable. For j = 1 the
    chord parameter solves s = z + gamma_2(z) (monotone); consistency of
    the branch-based solve with that equation is asserted.
    """
    if form not in ("auto", "minus", "plus"):
        raise ValueError("form must be 'auto', 'minus' or 'plus'")
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    if form == "auto":
        try:
            return g_transform(params, j, s, psi, policy, "minus")
        except (AnalyticityDomainError, SeriesDivergenceError, PoleError):
            return g_transform(params, j, s, psi, policy, "plus")
    xi, z = _chord_parameter(params, j, s, form)
    den = s - xi
    if den == 0.0:
        raise SeriesDivergenceError(
            f"G_{j} evaluated exactly at its dominant singularity s={s}", s=s
        )
    if form == "minus":
        _check_chord_inversion(params, j, s, z)
    m = m_vector(params, z, psi, policy)
    l1, m1_, l2, m2_ = params.lambda1, params.mu1, params.lambda2, params.mu2
    if j == 1:
        j1 = forcing_term(params, 1, s, psi.psi2_0)
        return (j1 - l1 * m1_ * m.M1 / (m1_ + s) + l2 * m2_ * m.M2 / (m2_ + xi)) / den
    j2 = forcing_term(params, 2, s, psi.psi1_0)
    return (j2 + l1 * m1_ * m.M1 / (m1_ + xi) - l2 * m2_ * m.M2 / (m2_ + s)) / den


def _check_chord_inversion(params: SystemParams, j: int, s: float, z: float):
    """Assert that z reproduces s through the chord/root relation."""
    from .cubics import tracked_roots

    try:
        roots = tracked_roots(params, 3 - j, z)
    except Exception as exc:  # outside tracked interval: report as inversion failure
        raise InversionError(
            f"chord parameter z={z:.6g} for G_{j}(s={s:.6g}) left the tracked domain",
            j=j, s=s, z=z,
        ) from exc
    s_back = z + roots.gamma if j == 1 else z - roots.alpha
    if abs(s_back - s) > 1e-8 * max(1.0, abs(s)):
        raise InversionError(
            f"chord inversion mismatch for G_{j}: s={s:.6g} reproduced as {s_back:.6g}",
            j=j, s=s, z=z,
        )


def h_coupling(params: SystemParams, s1: float, s2: float,
               psi: Optional[PsiConstants] = None,
               policy: Optional[TruncationPolicy] = None) -> float:
    """Coupling term H(s1, s2) expressed through M at the half-sum."""
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    m = m_vector(params, 0.5 * (s1 + s2), psi, policy)
    return params.lambda1 * params.mu1 * m.M1 / (params.mu1 + s1) \
        - params.lambda2 * params.mu2 * m.M2 / (params.mu2 + s2)


def f_transforms(params: SystemParams, s1: float, s2: float,
                 psi: Optional[PsiConstants] = None,
                 policy: Optional[TruncationPolicy] = None,
                 form: str = "auto") -> FTransforms:
    """Bivariate transforms F1, F2, the coupling H and the full transform F.

    Valid off the kernel zero sets; evaluation within 1e-8 of K1 = 0 or
    K2 = 0 is rejected because the finite quotients become numerically
    indeterminate there.
    """
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    kv = kernels(params, s1, s2)
    scale = max(1.0, abs(s1), abs(s2))
    if abs(kv.K1) < 1e-8 * scale or abs(kv.K2) < 1e-8 * scale:
        raise KernelZeroError(
            f"({s1}, {s2}) is within 1e-8 of a kernel zero", s1=s1, s2=s2,
            K1=kv.K1, K2=kv.K2,
        )
    g1 = g_transform(params, 1, s1, psi, policy, form)
    g2 = g_transform(params, 2, s2, psi, policy, form)
    h = h_coupling(params, s1, s2, psi, policy)
    j1 = forcing_term(params, 1, s1, psi.psi2_0)
    j2 = forcing_term(params, 2, s2, psi.psi1_0)
    f1 = (j2 - kv.K2 * g2 + h) / kv.K1
    f2 = (j1 - kv.K1 * g1 - h) / kv.K2
    f = 1.0 - params.rho + f1 + g1 + f2 + g2
    return FTransforms(F1=float(f1), F2=float(f2), H=float(h), F=float(f))


def marginal_transform(params: SystemParams, j: int, s: float,
                       psi: Optional[PsiConstants] = None,
                       policy: Optional[TruncationPolicy] = None,
                       g_other_origin: Optional[float] = None,
                       form: str = "auto") -> float:
    """Laplace transform of the workload of queue j alone, E[exp(-s U_j)].

    Specialises the full transform to the other argument equal to 0; the
    0/0 boundary value G_{3-j}(0) is supplied by ``empty_probabilities``
    when not passed in.
    """
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    if s == 0.0:
        return 1.0
    if g_other_origin is None:
        ep = empty_probabilities(params, policy, psi)
        g_other_origin = ep.g2_at_0 if j == 1 else ep.g1_at_0
    l1, m1_, l2, m2_ = params.lambda1, params.mu1, params.lambda2, params.mu2
    lam = params.total_rate
    if j == 1:
        s1 = s
        kv = kernels(params, s1, 0.0)
        m = m_vector(params, 0.5 * s1, psi, policy)
        h = l1 * m1_ * m.M1 / (m1_ + s1) - l2 * m.M2
        g1 = g_transform(params, 1, s1, psi, policy, form)
        j2_0 = forcing_term(params, 2, 0.0, psi.psi1_0)
        j1_s = forcing_term(params, 1, s1, psi.psi2_0)
        f1 = (j2_0 - kv.K2 * g_other_origin + h) / kv.K1
        f2 = (j1_s - kv.K1 * g1 - h) / kv.K2
        return 1.0 - params.rho + f1 + g1 + f2 + g_other_origin
    return marginal_transform(params.swapped(), 1, s,
                              _swap_psi(psi), policy, g_other_origin, form)


def _swap_psi(psi: PsiConstants) -> PsiConstants:
    return PsiConstants(psi1_0=psi.psi2_0, psi2_0=psi.psi1_0,
                        extrapolation_gap=psi.extrapolation_gap)


def empty_probabilities(params: SystemParams,
                        policy: Optional[TruncationPolicy] = None,
                        psi: Optional[PsiConstants] = None) -> EmptyProbabilities:
    """P(U1 = 0) = 1 - rho + G2(0) and P(U2 = 0) = 1 - rho + G1(0).

    G_j(0) is a 0/0 limit of the meromorphic-branch form; it is evaluated
    down the fixed abscissa ladder and Richardson-extrapolated with the
    same consistency guard as the psi limits.
    """
    policy = policy or TruncationPolicy()
    psi = psi or psi_constants(params, policy)
    pts = _G0_LIMIT_POINTS

    g2_vals = [g_transform(params, 2, s, psi, policy, form="plus") for s in pts]
    g1_vals = [g_transform(params, 1, s, psi, policy, form="plus") for s in pts]
    g2_0, _ = _richardson_limit(pts, [np.array([v]) for v in g2_vals],
                                100.0 * policy.tol, "G2(0) limit")
    g1_0, _ = _richardson_limit(pts, [np.array([v]) for v in g1_vals],
                                100.0 * policy.tol, "G1(0) limit")
    one = 1.0 - params.rho
    return EmptyProbabilities(
        p_empty_1=one + float(g2_0[0]),
        p_empty_2=one + float(g1_0[0]),
        g1_at_0=float(g1_0[0]),
        g2_at_0=float(g2_0[0]),
        psi=psi,
    )


__all__ = [
    "TruncationPolicy",
    "SeriesDiagnostics",
    "BasisSolutions",
    "PsiConstants",
    "MVector",
    "FTransforms",
    "EmptyProbabilities",
    "evaluate_basis",
    "script_L",
    "psi_constants",
    "m_vector",
    "g_transform",
    "h_coupling",
    "f_transforms",
    "marginal_transform",
    "empty_probabilities",
]

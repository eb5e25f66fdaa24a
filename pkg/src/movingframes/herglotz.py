"""Rigid-flow isometry verification (generalized Herglotz-Noether pipeline).

For a rotational rigid flow in an admissible ambient space (flat, constant
curvature, conformally flat or Ricci flat) the theorem demands that the flow
direction u is proportional to a Killing field lambda*u.  The pipeline:

1. hypothesis gates: rigidity, rotation (max |M| over samples above a
   threshold), closedness K_[i;j] ~ 0 and basicness of M, K;
2. reconstruct log(lambda) by integrating the coordinate 1-form K from a
   basepoint (Poincare-lemma step), with two independent polygonal paths per
   target point as a path-independence certificate;
3. verify L_{lambda u} g ~ 0, assembling the Killing residual from the
   symbolic L_u g frame components and a finite-difference gradient of the
   reconstructed lambda so that the quadrature participates in the check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .expression import Chart, Expr, add, eval_at, mul, num, simplify
from .frames import Metric, SpaceClassification
from .submersion import (FlowData, covariant_derivative, directional,
                         lie_derivative_metric)

__all__ = [
    "ClosednessError", "PathError", "HypothesisReport", "LambdaReconstruction",
    "HerglotzReport", "RicciFlatReport",
    "check_hypotheses", "reconstruct_lambda", "verify_killing",
    "scaled_flow_killing_residual", "ricci_flat_check", "run_herglotz",
]


class ClosednessError(ValueError):
    def __init__(self, residual: float, tol: float):
        super().__init__(
            f"K is not closed: max |K_[i;j]| = {residual:.3e} exceeds {tol:g}; "
            "log-magnitude reconstruction refused")
        self.residual = residual


class PathError(ValueError):
    pass


@dataclass
class HypothesisReport:
    rigid: bool
    rigidity_residual: float
    rotational: bool
    max_m: float
    rotational_threshold: float
    closedness_residual: float
    basic_m_residual: float
    basic_k_residual: float
    ambient_admissible: bool
    ambient_reason: str
    tol: float

    def satisfied(self) -> bool:
        return (self.rigid and self.rotational and self.ambient_admissible
                and self.closedness_residual < self.tol
                and self.basic_m_residual < self.tol
                and self.basic_k_residual < self.tol)

    def failure_reason(self) -> str | None:
        if not self.rigid:
            return f"flow is not rigid (residual {self.rigidity_residual:.3e})"
        if not self.rotational:
            return (f"flow is non-rotational (max |M| = {self.max_m:.3e} <= "
                    f"threshold {self.rotational_threshold:g})")
        if not self.ambient_admissible:
            return f"ambient space not admissible ({self.ambient_reason})"
        if self.closedness_residual >= self.tol:
            return f"K_[i;j] residual {self.closedness_residual:.3e} above {self.tol:g}"
        if self.basic_m_residual >= self.tol:
            return f"M basicness residual {self.basic_m_residual:.3e} above {self.tol:g}"
        if self.basic_k_residual >= self.tol:
            return f"K basicness residual {self.basic_k_residual:.3e} above {self.tol:g}"
        return None


def check_hypotheses(flow: FlowData, ambient: SpaceClassification,
                     points: Sequence[Mapping[str, float]],
                     tol: float = 1e-7,
                     rotational_threshold: float = 1e-6) -> HypothesisReport:
    """Gate the isometry theorem: rigidity, rotation, closedness, basicness."""
    h = flow.horizontal
    max_m = flow.invariants.max_m(points)
    mc = covariant_derivative(flow.m, flow, rank=2)
    kc = covariant_derivative(flow.k, flow, rank=1)
    closed = 0.0
    basic_m = 0.0
    basic_k = 0.0
    for p in points:
        memo: dict = {}
        for i in range(h):
            basic_k = max(basic_k, abs(eval_at(kc[i][0], p, memo)))
            for j in range(h):
                basic_m = max(basic_m, abs(eval_at(mc[i][j][0], p, memo)))
                closed = max(closed, 0.5 * abs(eval_at(kc[i][j + 1], p, memo)
                                               - eval_at(kc[j][i + 1], p, memo)))
    if ambient.flat:
        reason = "flat"
    elif ambient.constant_curvature:
        reason = f"constant curvature (kappa = {ambient.kappa})"
    elif ambient.conformally_flat is True:
        reason = "conformally flat"
    elif ambient.ricci_flat:
        reason = "Ricci flat"
    else:
        reason = "neither flat, constant-curvature, conformally flat nor Ricci flat"
    return HypothesisReport(
        rigid=flow.rigidity.rigid,
        rigidity_residual=flow.rigidity.residual,
        rotational=max_m > rotational_threshold,
        max_m=max_m,
        rotational_threshold=rotational_threshold,
        closedness_residual=closed,
        basic_m_residual=basic_m,
        basic_k_residual=basic_k,
        ambient_admissible=ambient.admissible_for_isometry_theorem(),
        ambient_reason=reason,
        tol=tol,
    )


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                      tol: float, depth: int = 24) -> float:
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0 or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    return rec(a, b, fa, fm, fb, whole, tol, depth)


@dataclass
class LambdaReconstruction:
    basepoint: dict
    points: list                       # evaluation points (dicts)
    values: list                       # lambda at each point, lambda(base) = 1
    path_independence_residual: float  # max relative gap between the two paths
    leaf_derivative_residual: float    # |u(lambda)| estimate via a flow step
    quadrature_tol: float
    log_lambda: Callable = field(default=None, repr=False)  # point -> log lambda


def _k_coordinate_form(flow: FlowData) -> list:
    """K = K_i theta^i written in coordinate components K_mu."""
    chart = flow.chart
    h = flow.horizontal
    out = []
    for mu in range(chart.n):
        terms = []
        for i in range(h):
            coeff = flow.adapted.coframe.theta[i + 1].coefficient((mu,))
            if not coeff.is_zero():
                terms.append(mul(flow.k[i], coeff))
        out.append(simplify(add(*terms)))
    return out


def _segment_integral(k_eval, start: np.ndarray, end: np.ndarray, tol: float) -> float:
    delta = end - start
    if not np.any(delta):
        return 0.0

    def f(t: float) -> float:
        return float(k_eval(start + t * delta) @ delta)

    return _adaptive_simpson(f, 0.0, 1.0, tol)


def _check_path(chart: Chart, pts: Iterable[np.ndarray]):
    for q in pts:
        p = chart.point(q)
        for c, (lo, hi) in chart.domain.items():
            pad = 1e-9 * (1.0 + abs(hi) + abs(lo))
            if not lo - pad <= p[c] <= hi + pad:
                raise PathError(f"integration path leaves the domain box at {p}")
        for ex in chart.exclusions:
            if ex.excludes(p):
                raise PathError(f"integration path crosses excluded region "
                                f"({ex.text}) at {p}")


def reconstruct_lambda(flow: FlowData, basepoint: Mapping[str, float],
                       points: Sequence[Mapping[str, float]],
                       closedness_residual: float,
                       closedness_tol: float = 1e-8,
                       quadrature_tol: float = 1e-10,
                       path_tol: float = 1e-6) -> LambdaReconstruction:
    """lambda(p) = exp(line integral of K) from the basepoint.

    Requires the closedness certificate; integrates along the straight
    segment and along an axis-ordered polyline, comparing the two.  The
    sampling domain is assumed simply connected (declared, not inferred).
    """
    if closedness_residual >= closedness_tol:
        raise ClosednessError(closedness_residual, closedness_tol)
    chart = flow.chart
    if not chart.simply_connected:
        raise PathError("sampling domain is not declared simply connected; "
                        "the Poincare-lemma step is only local")
    k_mu = _k_coordinate_form(flow)

    def k_eval(arr: np.ndarray) -> np.ndarray:
        p = chart.point(arr)
        memo: dict = {}
        return np.array([eval_at(c, p, memo) for c in k_mu])

    base = np.array([basepoint[c] for c in chart.coords], dtype=float)

    def log_lambda_direct(arr: np.ndarray) -> float:
        steps = np.linspace(0.0, 1.0, 17)[:, None]
        _check_path(chart, base + steps * (arr - base))
        return _segment_integral(k_eval, base, arr, quadrature_tol)

    def log_lambda_staircase(arr: np.ndarray) -> float:
        total = 0.0
        cur = base.copy()
        for mu in range(chart.n):
            nxt = cur.copy()
            nxt[mu] = arr[mu]
            steps = np.linspace(0.0, 1.0, 9)[:, None]
            _check_path(chart, cur + steps * (nxt - cur))
            total += _segment_integral(k_eval, cur, nxt, quadrature_tol)
            cur = nxt
        return total

    values = []
    worst_gap = 0.0
    for p in points:
        arr = np.array([p[c] for c in chart.coords], dtype=float)
        direct = log_lambda_direct(arr)
        stair = log_lambda_staircase(arr)
        gap = abs(direct - stair) / max(1.0, abs(direct))
        worst_gap = max(worst_gap, gap)
        values.append(math.exp(direct))
    if worst_gap >= path_tol:
        raise PathError(f"path-independence violated: relative gap {worst_gap:.3e} "
                        f"exceeds {path_tol:g}")

    # |u(lambda)| via a short flow step: both endpoints are reconstructed
    # independently, so quadrature consistency enters the estimate.
    u_eval = _vector_evaluator(chart, flow.adapted.u)
    step = 0.01
    leaf = 0.0
    for p in list(points)[:8]:
        arr = np.array([p[c] for c in chart.coords], dtype=float)
        moved = _rk4_step(u_eval, arr, step)
        try:
            l0 = log_lambda_direct(arr)
            l1 = log_lambda_direct(moved)
        except PathError:
            continue
        leaf = max(leaf, abs(l1 - l0) / step)

    return LambdaReconstruction(
        basepoint=dict(basepoint),
        points=[dict(p) for p in points],
        values=values,
        path_independence_residual=worst_gap,
        leaf_derivative_residual=leaf,
        quadrature_tol=quadrature_tol,
        log_lambda=lambda target: log_lambda_direct(
            np.array([target[c] for c in chart.coords], dtype=float)),
    )


def _vector_evaluator(chart: Chart, components: Sequence[Expr]):
    def ev(arr: np.ndarray) -> np.ndarray:
        p = chart.point(arr)
        memo: dict = {}
        return np.array([eval_at(c, p, memo) for c in components])

    return ev


def _rk4_step(f, x: np.ndarray, h: float) -> np.ndarray:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def verify_killing(metric: Metric, vector: Sequence[Expr],
                   points: Sequence[Mapping[str, float]],
                   frame_vectors: Sequence[Sequence[Expr]] | None = None) -> float:
    """max frame component of L_V g over the samples (full tensor).

    Components are taken in the supplied orthonormal frame, or in the
    coordinate basis when no frame is given.
    """
    chart = metric.chart
    n = chart.n
    lie = lie_derivative_metric(metric, list(vector))
    worst = 0.0
    for p in points:
        memo: dict = {}
        lmat = np.array([[eval_at(lie[a][b], p, memo) for b in range(n)]
                         for a in range(n)])
        if frame_vectors is not None:
            e = np.array([[eval_at(c, p, memo) for c in row] for row in frame_vectors])
            lmat = e @ lmat @ e.T
        worst = max(worst, float(np.max(np.abs(lmat))))
    return worst


def scaled_flow_killing_residual(flow: FlowData, lam: LambdaReconstruction,
                                 points: Sequence[Mapping[str, float]],
                                 fd_step: float = 1e-4) -> float:
    """Killing residual of V = lambda u assembled at sample points.

    Uses L_{f u} g = f L_u g + df (x) psi0 + psi0 (x) df with the symbolic
    L_u g frame components and a central-difference gradient of the
    reconstructed log(lambda), so reconstruction error shows up here.
    """
    chart = flow.chart
    n = chart.n
    worst = 0.0
    for p in points:
        arr = np.array([p[c] for c in chart.coords], dtype=float)
        logl = lam.log_lambda(p)
        lval = math.exp(logl)
        grad = np.zeros(n)
        for mu in range(n):
            hi, lo = arr.copy(), arr.copy()
            hi[mu] += fd_step
            lo[mu] -= fd_step
            grad[mu] = (lam.log_lambda(chart.point(hi))
                        - lam.log_lambda(chart.point(lo))) / (2.0 * fd_step)
        grad *= lval  # d lambda = lambda d log lambda
        memo: dict = {}
        evec = np.array([[eval_at(c, p, memo) for c in row]
                         for row in flow.adapted.coframe.vectors])
        dlam_frame = evec @ grad  # d lambda on the frame vectors
        for a in range(n):
            for b in range(a, n):
                val = lval * eval_at(flow.lie_frame[a][b], p, memo)
                if b == 0:
                    val += dlam_frame[a]
                if a == 0:
                    val += dlam_frame[b]
                worst = max(worst, abs(val))
    return worst


@dataclass
class RicciFlatReport:
    applicable: bool
    reason: str
    residuals: dict = field(default_factory=dict)
    m2_leaf_residual: float | None = None

    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def ricci_flat_check(flow: FlowData, ambient: SpaceClassification,
                     points: Sequence[Mapping[str, float]],
                     tol: float = 1e-7) -> RicciFlatReport:
    """The Ricci-flat constraint rows plus leaf-constancy of |M|^2.

    Inapplicable (not a failure) when the ambient space is not Ricci flat.
    """
    if not ambient.ricci_flat:
        return RicciFlatReport(False, f"ambient is not Ricci flat "
                                      f"(max |Ricci| = {ambient.max_ricci:.3e})")
    h = flow.horizontal
    m = flow.m
    k = flow.k
    ricci = flow.frame_data.ricci
    scalar = flow.frame_data.scalar
    kc = covariant_derivative(flow.k, flow, rank=1)
    mc = covariant_derivative(flow.m, flow, rank=2)
    mm = [[simplify(add(*[mul(m[i][l], m[l][j]) for l in range(h)]))
           for j in range(h)] for i in range(h)]
    m_sq = simplify(add(*[mul(m[i][j], m[i][j]) for i in range(h) for j in range(h)]))
    k_sq = simplify(add(*[mul(k[i], k[i]) for i in range(h)]))
    div_k = simplify(add(*[kc[i][i + 1] for i in range(h)]))

    rows = {
        "R_00": [simplify(add(ricci[0][0], div_k, k_sq, mul(num(-1), m_sq)))],
        "R_0i": [simplify(add(ricci[0][i + 1],
                              mul(num(-1), add(*[mc[j][i][j + 1] for j in range(h)])),
                              mul(num(2), add(*[mul(k[j], m[i][j]) for j in range(h)]))))
                 for i in range(h)],
        "R_ij": [simplify(add(ricci[i + 1][j + 1],
                              mul(num(-1), _quotient_ricci_expr(flow, i, j)),
                              mul(num(-2), mm[i][j]),
                              mul(k[i], k[j]),
                              mul(num(Fraction(1, 2)),
                                  add(kc[i][j + 1], kc[j][i + 1]))))
                 for i in range(h) for j in range(h)],
        "R": [simplify(add(scalar, mul(num(-1), _quotient_scalar_expr(flow)),
                           m_sq, mul(num(2), k_sq), mul(num(2), div_k)))],
    }
    residuals = {}
    for name, exprs in rows.items():
        worst = 0.0
        for p in points:
            memo: dict = {}
            for e in exprs:
                worst = max(worst, abs(eval_at(e, p, memo)))
        residuals[name] = worst
    m2_leaf_expr = directional(m_sq, flow.adapted.coframe.vectors[0], flow.chart)
    m2_leaf = max(abs(eval_at(m2_leaf_expr, p, {})) for p in points)
    return RicciFlatReport(True, "ambient is Ricci flat", residuals, m2_leaf)


def _quotient_riemann_expr(flow: FlowData, i, j, kk, l) -> Expr:
    m = flow.m
    R = flow.frame_data.riemann
    return simplify(add(R[i + 1][j + 1][kk + 1][l + 1],
                        mul(m[i][kk], m[j][l]),
                        mul(num(-1), m[i][l], m[j][kk]),
                        mul(num(2), m[i][j], m[kk][l])))


def _quotient_ricci_expr(flow: FlowData, j, l) -> Expr:
    h = flow.horizontal
    return simplify(add(*[_quotient_riemann_expr(flow, i, j, i, l) for i in range(h)]))


def _quotient_scalar_expr(flow: FlowData) -> Expr:
    h = flow.horizontal
    return simplify(add(*[_quotient_ricci_expr(flow, j, j) for j in range(h)]))


@dataclass
class HerglotzReport:
    hypotheses: HypothesisReport
    verdict: str                       # isometric-verified | hypotheses-not-met | inconsistent
    reason: str
    lam: LambdaReconstruction | None = None
    killing_residual: float | None = None
    killing_tol: float | None = None

    def verified(self) -> bool:
        return self.verdict == "isometric-verified"


def run_herglotz(flow: FlowData, ambient: SpaceClassification,
                 basepoint: Mapping[str, float],
                 points: Sequence[Mapping[str, float]],
                 tol: float = 1e-7,
                 rotational_threshold: float = 1e-6,
                 closedness_tol: float = 1e-8,
                 quadrature_tol: float = 1e-10,
                 path_tol: float = 1e-6,
                 killing_tol: float = 1e-7) -> HerglotzReport:
    """Full theorem pipeline; the verdict is isometric-verified only when
    every hypothesis gate and every residual clears its tolerance."""
    hyp = check_hypotheses(flow, ambient, points, tol, rotational_threshold)
    failure = hyp.failure_reason()
    if failure is not None:
        return HerglotzReport(hyp, "hypotheses-not-met", failure)
    try:
        lam = reconstruct_lambda(flow, basepoint, points, hyp.closedness_residual,
                                 closedness_tol, quadrature_tol, path_tol)
    except (ClosednessError, PathError) as exc:
        return HerglotzReport(hyp, "inconsistent", str(exc))
    if lam.leaf_derivative_residual >= tol:
        return HerglotzReport(hyp, "inconsistent",
                              f"u(lambda) estimate {lam.leaf_derivative_residual:.3e} "
                              f"exceeds {tol:g}", lam)
    # the assembled residual needs a gradient of the reconstructed lambda at
    # each point (4n quadratures); a bounded representative set keeps large
    # sample counts affordable
    killing = scaled_flow_killing_residual(flow, lam, list(points)[:12])
    if killing >= killing_tol:
        return HerglotzReport(hyp, "inconsistent",
                              f"Killing residual {killing:.3e} exceeds {killing_tol:g}",
                              lam, killing, killing_tol)
    return HerglotzReport(hyp, "isometric-verified",
                          "all hypothesis gates and residuals cleared",
                          lam, killing, killing_tol)

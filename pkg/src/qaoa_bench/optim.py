"""Bound-constrained derivative-free minimisation and a multistart driver.

:func:`local_optimize` follows the structure of Powell's BOBYQA:

* ``2d + 1`` interpolation points, initially ``x0`` and ``x0 +/- rho*e_i``
  (a coordinate that would leave the box is replaced by a second step of
  ``2*rho`` into it);
* a quadratic model refit every iteration so that it interpolates all
  points and its Hessian changes by the least Frobenius norm from the
  previous one;
* a truncated conjugate-gradient trust-region step that freezes variables
  as they reach the box (``trsbox``);
* two radii: ``rho`` (the resolution, only ever decreased) and ``delta``
  (the trust region, adapted by the reduction ratio);
* geometry steps that move a far-away interpolation point to where its
  Lagrange function is large.

Stopping rules, all absolute: an accepted step lowers ``f`` by less than
``ftol``; an accepted step is shorter than ``xtol``; ``rho`` has reached
``xtol`` and no further progress is possible; the evaluation budget is
spent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationError, InputError

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

STOP_FTOL = "ftol"
STOP_XTOL = "xtol"
STOP_MAXEVAL = "maxeval"


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InputError("bounds must be 1-d vectors of equal length")
        if not np.all(lo < hi):
            raise InputError("every lower bound must be < its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def contains(self, x):
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    @classmethod
    def qaoa(cls, p):
        """``([0, pi] x [0, 2*pi])^p`` laid out as betas then gammas."""
        return cls(np.zeros(2 * p), np.array([math.pi] * p + [2 * math.pi] * p))


@dataclass
class StartRecord:
    start: np.ndarray
    point: np.ndarray
    value: float
    evaluations: int
    iterations: int
    stop_reason: str

    @property
    def converged(self):
        return self.stop_reason != STOP_MAXEVAL


@dataclass
class OptResult:
    best_point: np.ndarray
    best_value: float
    evaluations_used: int
    starts_completed: int
    converged: list = field(default_factory=list)
    history: list = field(default_factory=list)
    best_start: int = 0


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    def __init__(self, objective, bounds, max_evals):
        self.objective = objective
        self.lo, self.hi = bounds.lower, bounds.upper
        self.max_evals = max_evals
        self.nf = 0
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x):
        if self.nf >= self.max_evals:
            raise _BudgetExhausted
        x = np.minimum(np.maximum(x, self.lo), self.hi)
        f = self.objective(x)
        self.nf += 1
        try:
            f = float(f)
        except (TypeError, ValueError):
            f = math.nan
        if not math.isfinite(f):
            raise EvaluationError(f"objective returned {f!r} at {x.tolist()}", point=x)
        if f < self.best_f:
            self.best_f, self.best_x = f, x.copy()
        return x, f


def _trsbox_py(g, hess, delta, sl, su):
    """Approximately minimise ``g.s + s.H.s/2`` over ``|s| <= delta``,
    ``sl <= s <= su`` by truncated CG, freezing coordinates that hit a bound.
    ``sl <= 0 <= su`` is assumed."""
    d = g.shape[0]
    s = np.zeros(d)
    free = np.ones(d, dtype=np.bool_)
    for i in range(d):
        if (sl[i] >= 0.0 and g[i] > 0.0) or (su[i] <= 0.0 and g[i] < 0.0):
            free[i] = False
    for _restart in range(d + 1):
        r = -(g + hess @ s)
        for i in range(d):
            if not free[i]:
                r[i] = 0.0
        p = r.copy()
        rr = r @ r
        hit_bound = False
        for _it in range(d):
            if rr <= 1e-24 or not free.any():
                return s
            hp = hess @ p
            curv = p @ hp
            ss = s @ s
            sp = s @ p
            pp = p @ p
            disc = max(sp * sp + pp * (delta * delta - ss), 0.0)
            a_tr = (math.sqrt(disc) - sp) / pp
            a_bd = math.inf
            j = -1
            for i in range(d):
                if not free[i]:
                    continue
                if p[i] > 0.0:
                    lim = (su[i] - s[i]) / p[i]
                elif p[i] < 0.0:
                    lim = (sl[i] - s[i]) / p[i]
                else:
                    continue
                if lim < a_bd:
                    a_bd = lim
                    j = i
            a_bd = max(a_bd, 0.0)
            a_cg = rr / curv if curv > 0.0 else math.inf
            a = min(a_tr, a_bd, a_cg)
            s = s + a * p
            if j >= 0 and a_bd < a_tr and a_bd < a_cg:
                free[j] = False
                s[j] = su[j] if p[j] > 0.0 else sl[j]
                hit_bound = True
                break
            if a_tr <= a_cg:
                return s
            r = r - a * hp
            for i in range(d):
                if not free[i]:
                    r[i] = 0.0
            rr_new = r @ r
            p = r + (rr_new / rr) * p
            for i in range(d):
                if not free[i]:
                    p[i] = 0.0
            rr = rr_new
        if not hit_bound:
            return s
    return s


trsbox = numba.njit(cache=True)(_trsbox_py) if numba is not None else _trsbox_py


def _fit_py(xpts, fvals, xopt, scale, hess, use_pinv):
    """Solve the KKT system for the minimum-norm Hessian change.

    Returns the scaled points, the inverse KKT matrix, the solution
    ``(lambda, c, g)`` and the new scaled Hessian.
    """
    m, d = xpts.shape
    y = (xpts - xopt) / scale
    hs = hess * (scale * scale)
    resid = np.empty(m)
    for k in range(m):
        resid[k] = fvals[k] - 0.5 * (y[k] @ hs @ y[k])
    w = np.zeros((m + 1 + d, m + 1 + d))
    w[:m, :m] = 0.5 * (y @ y.T) ** 2
    w[:m, m] = 1.0
    w[m, :m] = 1.0
    w[:m, m + 1:] = y
    w[m + 1:, :m] = y.T
    winv = np.linalg.pinv(w) if use_pinv else np.linalg.inv(w)
    rhs = np.zeros(m + 1 + d)
    rhs[:m] = resid
    sol = winv @ rhs
    hs = hs + (y.T * sol[:m]) @ y
    return y, winv, sol, hs


def _geometry_scores_py(pts, xopt, radius, lo, hi, y, wrow, scale):
    """Candidate points around ``xopt`` and ``|L_t|`` at each of them."""
    m, d = pts.shape
    cands = np.empty((2 * (d + m), d))
    nc = 0
    for sign in (1.0, -1.0):
        for k in range(d + m):
            if k < d:
                u = np.zeros(d)
                u[k] = 1.0
            else:
                v = pts[k - d] - xopt
                nv = math.sqrt(v @ v)
                if nv == 0.0:
                    continue
                u = v / nv
            c = np.minimum(np.maximum(xopt + sign * radius * u, lo), hi)
            if np.max(np.abs(c - xopt)) > 0.0:
                cands[nc] = c
                nc += 1
    cands = cands[:nc]
    scores = np.empty(nc)
    for j in range(nc):
        yh = (cands[j] - xopt) / scale
        val = wrow[m]
        for i in range(d):
            val += wrow[m + 1 + i] * yh[i]
        for k in range(m):
            dk = y[k] @ yh
            val += 0.5 * wrow[k] * dk * dk
        scores[j] = abs(val)
    return cands, scores


if numba is not None:
    _fit_kernel = numba.njit(cache=True)(_fit_py)
    _geometry_scores = numba.njit(cache=True)(_geometry_scores_py)
else:  # pragma: no cover
    _fit_kernel, _geometry_scores = _fit_py, _geometry_scores_py


class _Model:
    """Quadratic interpolation model with least-Frobenius-norm Hessian updates.

    Coordinates are shifted to the current best point and scaled by
    ``scale`` (the resolution radius) before solving the KKT system.
    """

    def __init__(self, d):
        self.d = d
        self.hess = np.zeros((d, d))  # unscaled Hessian carried between fits

    def fit(self, xpts, fvals, xopt, scale):
        try:
            y, winv, sol, hs = _fit_kernel(xpts, fvals, xopt, scale, self.hess, False)
        except np.linalg.LinAlgError:
            y, winv, sol, hs = _fit_kernel(xpts, fvals, xopt, scale, self.hess, True)
        m = xpts.shape[0]
        self.y, self.winv, self.scale, self.m = y, winv, scale, m
        self.const = sol[m]
        self.grad = sol[m + 1:] / scale
        self.hess = hs / (scale * scale)
        return self

    def value_change(self, s):
        """Q(s) - Q(0)."""
        return float(self.grad @ s + 0.5 * s @ self.hess @ s)

    def lagrange_values(self, x, xopt):
        """Values at ``x`` of all ``m`` Lagrange functions."""
        yh = (x - xopt) / self.scale
        phi = np.empty(self.m + 1 + self.d)
        phi[: self.m] = 0.5 * (self.y @ yh) ** 2
        phi[self.m] = 1.0
        phi[self.m + 1:] = yh
        return self.winv[: self.m] @ phi


def _initial_points(x0, rho, lo, hi):
    d = x0.size
    pts = [x0.copy()]
    for i in range(d):
        up = x0[i] + rho <= hi[i]
        down = x0[i] - rho >= lo[i]
        steps = [rho, -rho] if (up and down) else ([rho, 2 * rho] if up else [-rho, -2 * rho])
        for st in steps:
            x = x0.copy()
            x[i] += st
            pts.append(x)
    return np.array(pts)


def local_optimize(
    objective: Callable[[np.ndarray], float],
    start,
    bounds: Bounds,
    ftol: float = 1e-3,
    xtol: float = 1e-2,
    max_evals: int = 10_000,
    rhobeg: float | None = None,
) -> OptResult:
    """Minimise ``objective`` inside ``bounds`` from ``start``.

    Returns an :class:`OptResult` with one history entry. The returned value
    is never worse than ``objective(start)``.
    """
    x0 = np.asarray(start, dtype=float).copy()
    if x0.shape != bounds.lower.shape:
        raise InputError(f"start has shape {x0.shape}, bounds have dimension {bounds.dim}")
    if not bounds.contains(x0):
        raise InputError(f"start {x0.tolist()} lies outside the bounds")
    if ftol <= 0 or xtol <= 0:
        raise InputError("ftol and xtol must be positive")
    if max_evals < 1:
        raise InputError("max_evals must be >= 1")

    lo, hi = bounds.lower, bounds.upper
    d = x0.size
    if rhobeg is None:
        rhobeg = 0.1 * float(np.min(hi - lo))
    rhoend = min(xtol, rhobeg)
    ev = _Evaluator(objective, bounds, max_evals)
    iterations = 0
    reason = STOP_MAXEVAL

    try:
        pts = _initial_points(x0, rhobeg, lo, hi)
        fv = np.empty(len(pts))
        for k, x in enumerate(pts):
            pts[k], fv[k] = ev(x)
        reason = _trust_region_loop(ev, pts, fv, lo, hi, rhobeg, rhoend, ftol, xtol, d)
        iterations = ev.iterations
    except _BudgetExhausted:
        iterations = getattr(ev, "iterations", 0)

    rec = StartRecord(x0, ev.best_x, ev.best_f, ev.nf, iterations, reason)
    return OptResult(ev.best_x, ev.best_f, ev.nf, 1, [rec.converged], [rec])


def _trust_region_loop(ev, pts, fv, lo, hi, rho, rhoend, ftol, xtol, d):
    model = _Model(d)
    delta = rho
    kopt = int(np.argmin(fv))
    ev.iterations = 0
    while True:
        xopt, fopt = pts[kopt], fv[kopt]
        model.fit(pts, fv, xopt, rho)
        s = trsbox(model.grad, model.hess, delta, lo - xopt, hi - xopt)
        snorm = math.sqrt(float(s @ s))
        pred = -model.value_change(s)

        if snorm < 0.5 * rho or pred <= 0:
            # Step too short to be informative: fix geometry or refine rho.
            dist = _row_norms(pts - xopt)
            far = int(np.argmax(dist))
            if dist[far] > 2.0 * rho:
                kopt = _geometry_step(ev, model, pts, fv, far, kopt, delta, rho, lo, hi)
                continue
            if rho <= rhoend:
                return STOP_XTOL
            rho, delta = _reduce_rho(rho, rhoend, delta)
            continue

        xnew, fnew = ev(xopt + s)
        ratio = (fopt - fnew) / pred
        if ratio <= 0.1:
            delta = min(0.5 * delta, snorm)
            if delta <= 1.5 * rho:
                delta = rho
        elif ratio <= 0.7:
            delta = max(0.5 * delta, snorm)
        else:
            delta = max(0.5 * delta, 2.0 * snorm)

        # Replace the point whose removal least damages the geometry.
        lag = np.abs(model.lagrange_values(xnew, xopt))
        dist = _row_norms(pts - (xnew if fnew < fopt else xopt))
        weight = np.maximum(1.0, (dist / max(delta, rho)) ** 2)
        score = lag * weight
        if fnew >= fopt:
            score[kopt] = -1.0
        t = int(np.argmax(score))
        pts[t], fv[t] = xnew, fnew

        if fnew < fopt:
            kopt = t
            ev.iterations += 1
            # A small gain only counts as convergence when the model agrees;
            # otherwise it is a poor step, not a flat region.
            if fopt - fnew < ftol and pred < ftol:
                return STOP_FTOL
            if snorm < xtol:
                return STOP_XTOL
            continue

        if ratio <= 0.1:
            dist = _row_norms(pts - xopt)
            far = int(np.argmax(dist))
            if dist[far] > 2.0 * delta:
                kopt = _geometry_step(ev, model, pts, fv, far, kopt, delta, rho, lo, hi)
            elif delta <= rho:
                if rho <= rhoend:
                    return STOP_XTOL
                rho, delta = _reduce_rho(rho, rhoend, delta)


def _row_norms(a):
    return np.sqrt(np.einsum("ij,ij->i", a, a))


def _reduce_rho(rho, rhoend, delta):
    ratio = rho / rhoend
    if ratio <= 16.0:
        new = rhoend
    elif ratio <= 250.0:
        new = math.sqrt(rho * rhoend)
    else:
        new = 0.1 * rho
    return new, max(0.5 * rho, new)


def _geometry_step(ev, model, pts, fv, t, kopt, delta, rho, lo, hi):
    """Move point ``t`` to a candidate within ``max(0.1*delta, rho)`` of the
    best point where the ``t``-th Lagrange function is largest."""
    xopt = pts[kopt]
    radius = max(0.1 * delta, rho)
    cands, lval = _geometry_scores(pts, xopt, radius, lo, hi, model.y, model.winv[t],
                                   model.scale)
    if len(cands) == 0:
        return kopt
    best_x = cands[int(np.argmax(lval))]
    x, f = ev(best_x)
    pts[t], fv[t] = x, f
    if f < fv[kopt]:
        return t
    return kopt


def uniform_start(bounds: Bounds, seed: int, index: int) -> np.ndarray:
    """Start ``index`` of the stream for ``seed``: uniform over the box, drawn
    from ``numpy.random.default_rng([seed, index])`` so any start can be
    regenerated without replaying earlier ones."""
    rng = np.random.default_rng([int(seed), int(index)])
    return bounds.lower + rng.random(bounds.dim) * (bounds.upper - bounds.lower)


def multistart(
    objective: Callable[[np.ndarray], float],
    bounds: Bounds,
    total_budget: int,
    seed: int,
    ftol: float = 1e-3,
    xtol: float = 1e-2,
    initial_points: Sequence = (),
    rhobeg: float | None = None,
) -> OptResult:
    """Restart :func:`local_optimize` until ``total_budget`` evaluations are used.

    The ``initial_points`` are tried first, then uniform random starts. Each
    local run may spend whatever budget remains. Ties in value keep the
    earlier start.
    """
    if total_budget < 1:
        raise InputError("total_budget must be >= 1")
    remaining = int(total_budget)
    best: OptResult | None = None
    history = []
    k = 0
    n_init = len(initial_points)
    while remaining > 0:
        if k < n_init:
            x0 = np.clip(np.asarray(initial_points[k], dtype=float), bounds.lower, bounds.upper)
        else:
            x0 = uniform_start(bounds, seed, k - n_init)
        res = local_optimize(objective, x0, bounds, ftol, xtol, remaining, rhobeg)
        remaining -= res.evaluations_used
        history.extend(res.history)
        if best is None or res.best_value < best.best_value:
            best = res
            best.best_start = k
        k += 1
    return OptResult(
        best_point=best.best_point,
        best_value=best.best_value,
        evaluations_used=int(total_budget) - remaining,
        starts_completed=len(history),
        converged=[h.converged for h in history],
        history=history,
        best_start=best.best_start,
    )

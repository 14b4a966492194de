"""Single-letter coding quantities: channel capacity and rate-distortion.

Both are computed with Blahut-Arimoto alternating optimization and carry
certified bounds:

* capacity: the iterate's mutual information is a lower bound and
  ``max_x D(W(.|x) || q)`` (plus the multiplier term when a power budget
  is active) is an upper bound; iteration stops when the two meet within
  ``tol``.
* rate-distortion: the rate of the returned test channel is an upper
  bound on ``R(D)``; Blahut's supporting line gives a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import Dmc
from .errors import ConvergenceFailure, InvalidArgument
from .info_core import Pmf, as_pmf, binary_entropy, entropy

LN2 = math.log(2.0)
DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000
BA_NEWTON_SWITCH = 2000


@dataclass
class CapacityResult:
    capacity: float
    optimal_input: Pmf
    iterations: int
    gap: float
    upper_bound: float
    multiplier: float = 0.0
    lower_bounds: list[float] = field(default_factory=list, repr=False)


@dataclass
class RdResult:
    rate: float
    test_channel: np.ndarray
    distortion_achieved: float
    lower_bound: float
    iterations: int
    beta: float


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Per-letter distortion table ``d(u, u_hat)``.

    With ``faithful=True`` the table must be square and vanish exactly on
    the diagonal.
    """

    table: np.ndarray
    faithful: bool = False

    def __post_init__(self) -> None:
        t = np.array(self.table, dtype=float)
        if t.ndim != 2 or t.size == 0:
            raise InvalidArgument("distortion table must be a non-empty 2-D array")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise InvalidArgument("distortions must be finite and non-negative")
        if self.faithful:
            if t.shape[0] != t.shape[1]:
                raise InvalidArgument("a faithful measure needs a square table")
            off = ~np.eye(t.shape[0], dtype=bool)
            if np.any(np.diag(t) != 0) or np.any(t[off] <= 0):
                raise InvalidArgument("faithful measure needs d(u, v) = 0 iff u = v")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def hamming(cls, k: int) -> "DistortionMeasure":
        return cls(1.0 - np.eye(k), faithful=True)

    @property
    def d_max(self) -> float:
        return float(self.table.max())

    @property
    def d_min(self) -> float:
        """Smallest ``d(u, v)`` over ``u != v``."""
        t = self.table
        if t.shape[0] != t.shape[1]:
            raise InvalidArgument("d_min is defined for square tables")
        off = ~np.eye(t.shape[0], dtype=bool)
        return float(t[off].min()) if off.any() else 0.0

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.table[np.asarray(u), np.asarray(v)]


# --------------------------------------------------------------------------
# Channel capacity


def _divergences(w: np.ndarray, logw: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise ``D(W(.|x) || q)`` in nats, with ``0 log 0 = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.log(q)
        terms = np.where(w > 0, w * (logw - logq[None, :]), 0.0)
    return terms.sum(axis=1)


def _ba_penalized(
    w: np.ndarray,
    logw: np.ndarray,
    r: np.ndarray,
    cost: np.ndarray,
    s: float,
    tol_nats: float,
    max_iter: int,
    lower_bounds: list[float] | None,
) -> tuple[np.ndarray, np.ndarray, float, int, bool]:
    """Maximize ``I(r) - s E_r[cost]``; returns (r, D, inner_gap, iters, converged)."""
    it = 0
    while True:
        q = r @ w
        dv = _divergences(w, logw, q)
        pen = dv - s * cost
        mean_pen = float(r @ pen)
        gap = float(pen.max()) - mean_pen
        if lower_bounds is not None:
            lower_bounds.append(float(r @ dv) / LN2)
        if gap <= tol_nats:
            return r, dv, gap, it, True
        if it >= max_iter:
            return r, dv, gap, it, False
        logits = np.log(np.where(r > 0, r, 1.0)) + pen - pen.max()
        nr = np.where(r > 0, np.exp(logits), 0.0)
        r = nr / nr.sum()
        it += 1


def ba_capacity(
    ch: Dmc,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    power_budget: float | None = None,
    cost: np.ndarray | None = None,
    track: bool = False,
) -> CapacityResult:
    """Capacity ``max_{p(x)} I(X;Y)`` in bits with a certified duality gap.

    With ``power_budget`` set, the maximization is restricted to inputs
    with ``E[cost(X)] <= power_budget``; ``cost`` defaults to the
    channel's ``input_cost`` (squared levels for discretized AWGN).  The
    reported ``capacity`` is always the mutual information of a feasible
    input, so it never exceeds the true capacity.

    Unbudgeted solves that are still open after ``BA_NEWTON_SWITCH``
    iterations finish with Newton steps; ``track`` records the BA phase only.

    Raises ``ConvergenceFailure`` (with the best result attached) when the
    gap is still above ``tol`` after ``max_iter`` iterations.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    w = ch.transitions
    with np.errstate(divide="ignore"):
        logw = np.where(w > 0, np.log(np.where(w > 0, w, 1.0)), 0.0)
    m = ch.input_size
    tol_nats = tol * LN2
    history: list[float] | None = [] if track else None

    if power_budget is None:
        c = np.zeros(m)
    else:
        c = np.asarray(cost if cost is not None else ch.input_cost, dtype=float)
        if c is None or c.shape != (m,):
            raise InvalidArgument("a power budget needs a per-input cost vector")
        if power_budget < c.min():
            raise InvalidArgument("power budget below the cheapest input's cost")

    def result(r, dv, gap_nats, s, converged, iters):
        used = r > 0
        lower = float(r[used] @ dv[used]) / LN2
        res = CapacityResult(
            capacity=max(lower, 0.0),
            optimal_input=Pmf(r / r.sum()),
            iterations=iters,
            gap=max(gap_nats, 0.0) / LN2,
            upper_bound=lower + max(gap_nats, 0.0) / LN2,
            multiplier=s,
            lower_bounds=history or [],
        )
        if not converged:
            raise ConvergenceFailure(
                f"Blahut-Arimoto gap {res.gap:.3g} > tol {tol:g} after {iters} iterations",
                best=res,
            )
        return res

    if power_budget is None or power_budget >= c.max():
        r0 = np.full(m, 1.0 / m)
        r, dv, gap, iters, ok = _ba_penalized(w, logw, r0, c, 0.0, tol_nats, min(max_iter, BA_NEWTON_SWITCH), history)
        if not ok and iters < max_iter:
            # near-identical rows make BA crawl; an inactive budget turns the barrier solve into plain Newton
            rn, dvn, gapn, _, more, ok = _barrier_budgeted(
                w, logw, np.zeros(m), 1.0, tol_nats, max_iter - iters, None
            )
            iters += more
            if ok or gapn < gap:
                r, dv, gap = rn, dvn, gapn
        return result(r, dv, gap, 0.0, ok, iters)

    if power_budget <= c.min():
        # only the cheapest inputs are allowed
        keep = c <= power_budget
        k = int(keep.sum())
        rk, _, gap, iters, ok = _ba_penalized(
            w[keep], logw[keep], np.full(k, 1.0 / k), np.zeros(k), 0.0, tol_nats, max_iter, history
        )
        r = np.zeros(m)
        r[keep] = rk
        return result(r, _divergences(w, logw, r @ w), gap, 0.0, ok, iters)

    r, dv, gap, s, iters, ok = _barrier_budgeted(w, logw, c, power_budget, tol_nats, max_iter, history)
    return result(r, dv, gap, s, ok, iters)


def _budget_certificate(dv: np.ndarray, c: np.ndarray, budget: float, s_hint: float):
    """Minimize ``s P + max_x (D(x) - s c(x))`` over ``s >= 0``.

    Any ``s`` gives a valid upper bound on the budgeted capacity, so an
    approximate minimizer is enough.  Returns (bound, s).
    """

    def g(s: float) -> float:
        return s * budget + float((dv - s * c).max())

    hi = max(1.0, 2.0 * s_hint)
    while g(2.0 * hi) < g(hi):
        hi *= 2.0
    res = minimize_scalar(g, bounds=(0.0, 2.0 * hi), method="bounded", options={"xatol": 1e-13})
    cands = [(g(0.0), 0.0), (g(s_hint), s_hint), (float(res.fun), float(res.x))]
    # g is piecewise linear, so its minimum sits where two of the top lines cross
    top = np.argsort(-(dv - float(res.x) * c))[:8]
    for i in top:
        for j in top:
            if c[i] > c[j]:
                s = float((dv[i] - dv[j]) / (c[i] - c[j]))
                if s >= 0:
                    cands.append((g(s), s))
    return min(cands)


def _barrier_budgeted(w, logw, c, budget, tol_nats, max_iter, lower_bounds):
    """Interior-point Newton solve of ``max I(r)`` s.t. ``E_r[c] <= budget``.

    The log barrier keeps every iterate strictly feasible, so ``I(r)`` is
    always a valid lower bound; the dual bound from
    ``_budget_certificate`` closes the gap.
    """
    m = w.shape[0]
    cols = w.sum(axis=0) > 0
    w = w[:, cols]
    logw = logw[:, cols]
    # start at an exponentially tilted law halfway into the budget
    target = 0.5 * (budget + float(c.min()))
    if float(c.mean()) <= target:
        r = np.full(m, 1.0 / m)
    else:
        lo, hi = 0.0, 1.0
        while float(_softmin(c, hi) @ c) > target:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(_softmin(c, mid) @ c) > target:
                lo = mid
            else:
                hi = mid
        r = _softmin(c, hi)
    r = np.maximum(r, 1e-12)
    r /= r.sum()

    mu = 1e-2
    it = 0
    dv = _divergences(w, logw, r @ w)
    best = (math.inf, 0.0)

    def phi(x: np.ndarray, mu: float) -> float:
        slack = budget - float(x @ c)
        if np.any(x <= 0) or slack <= 0:
            return -math.inf
        return float(x @ _divergences(w, logw, x @ w)) + mu * (np.log(x).sum() + math.log(slack))

    while True:
        # centering by equality-constrained Newton
        for _ in range(60):
            q = r @ w
            dv = _divergences(w, logw, q)
            slack = budget - float(r @ c)
            if slack <= 0:
                # rounding pushed the iterate onto the budget; stop centering here
                break
            grad = dv + mu / r - mu * c / slack
            hess = -(w / q) @ w.T - np.diag(mu / r**2) - mu * np.outer(c, c) / slack**2
            # Newton system in the scaled variable r = diag(r) z keeps tiny masses well conditioned
            kkt = np.zeros((m + 1, m + 1))
            kkt[:m, :m] = r[:, None] * hess * r[None, :]
            kkt[:m, m] = r
            kkt[m, :m] = r
            rhs = np.concatenate([-r * grad, [0.0]])
            try:
                step = r * np.linalg.solve(kkt, rhs)[:m]
            except np.linalg.LinAlgError:
                step = r * np.linalg.lstsq(kkt, rhs, rcond=None)[0][:m]
            decrement = float(-step @ hess @ step)
            if lower_bounds is not None:
                lower_bounds.append(float(r @ dv) / LN2)
            it += 1
            if decrement < 1e-20 or it >= max_iter:
                break
            # fraction-to-boundary, then backtracking on the barrier objective
            t = 1.0
            neg = step < 0
            if np.any(neg):
                t = min(t, 0.99 * float(np.min(-r[neg] / step[neg])))
            dc = float(step @ c)
            if dc > 0:
                t = min(t, 0.99 * slack / dc)
            f0 = phi(r, mu)
            slope = float(grad @ step)
            # near the optimum the objective is flat to rounding; tolerate that noise
            noise = 1e-13 * (1.0 + abs(f0))
            while t > 1e-16 and phi(r + t * step, mu) < f0 + 0.25 * t * slope - noise:
                t *= 0.5
            if t <= 1e-16:
                break
            r = r + t * step
            r = np.maximum(r, 1e-100)
            r /= r.sum()
        dv = _divergences(w, logw, r @ w)
        lower = float(r @ dv)
        s_barrier = mu / max(budget - float(r @ c), 1e-300)
        cert = _budget_certificate(dv, c, budget, s_barrier)
        if cert[0] < best[0]:
            best = cert
        gap = best[0] - lower
        if gap <= tol_nats:
            return r, dv, gap, best[1], it, True
        if it >= max_iter or mu < 1e-13:
            return r, dv, gap, best[1], it, False
        mu *= 0.1


def _softmin(c: np.ndarray, a: float) -> np.ndarray:
    z = -a * (c - c.min())
    e = np.exp(z)
    return e / e.sum()


# --------------------------------------------------------------------------
# Rate-distortion


def _rd_newton(p: np.ndarray, loge: np.ndarray, q: np.ndarray, tol_nats: float, max_iter: int = 200) -> np.ndarray:
    """Active-set Newton on ``F(q) = -sum_u p(u) log sum_v q(v) e^{-beta d(u, v)}``.

    ``F`` is convex with gradient ``-c`` and the optimum satisfies
    ``c(v) <= 1`` with equality on the support, which is where the
    multiplicative update crawls.
    """
    mx = np.where(np.isfinite(loge), loge, -np.inf).max(axis=1, keepdims=True)
    a = np.exp(loge - mx)

    def objective(q):
        z = a @ q
        return float(-(p * np.log(z)).sum()) if np.all(z > 0) else math.inf

    live = a.sum(axis=0) > 0
    q = np.where(live, q, 0.0)
    q = q / q.sum()
    for _ in range(max_iter):
        z = a @ q
        w = p / z
        c = w @ a
        support = q > 0
        gap = float(c[live].max()) - 1.0
        if gap <= tol_nats:
            break
        active = support.copy()
        out = live & ~support
        if out.any():
            v = int(np.flatnonzero(out)[np.argmax(c[out])])
            if c[v] > 1.0 + tol_nats:
                active[v] = True
        idx = np.flatnonzero(active)
        b = a[:, idx]
        h = (b * (w / z)[:, None]).T @ b
        h += 1e-12 * max(float(np.trace(h)), 1e-300) * np.eye(len(idx))
        m = len(idx)
        kkt = np.zeros((m + 1, m + 1))
        kkt[:m, :m] = h
        kkt[:m, m] = 1.0
        kkt[m, :m] = 1.0
        rhs = np.concatenate([c[idx], [0.0]])
        step = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:m]
        dq = np.zeros_like(q)
        dq[idx] = step
        neg = dq < 0
        alpha, block = 1.0, -1
        if neg.any():
            ratios = np.full_like(q, np.inf)
            ratios[neg] = q[neg] / -dq[neg]
            block = int(np.argmin(ratios))
            if ratios[block] <= 1.0:
                alpha = float(ratios[block])
            else:
                block = -1
        f0 = objective(q)
        slope = float(-(c @ dq))
        while alpha > 1e-16:
            trial = np.maximum(q + alpha * dq, 0.0)
            if block >= 0:
                # the blocking coordinate leaves the support exactly
                trial[block] = 0.0
            if objective(trial) <= f0 + 1e-4 * alpha * slope + 1e-15 * (1 + abs(f0)):
                break
            alpha *= 0.5
        else:
            if block < 0:
                break
            trial = q.copy()
            trial[block] = 0.0
        q = trial / trial.sum()
    return q


def _rd_iterate(
    p: np.ndarray,
    d: np.ndarray,
    beta: float,
    q: np.ndarray,
    tol_nats: float,
    max_iter: int,
    mask: np.ndarray | None = None,
):
    """Blahut iteration at slope ``beta``; returns (Q, q, D, R_bits, LB-line, iters, ok)."""
    loge = -beta * d
    if mask is not None:
        loge = np.where(mask, loge, -np.inf)

    def evaluate(q):
        with np.errstate(divide="ignore"):
            logq = np.log(q)
        la = logq[None, :] + loge
        mx = la.max(axis=1, keepdims=True)
        a = np.exp(la - mx)
        z = a.sum(axis=1, keepdims=True)
        qcond = a / z
        logz = (np.log(z) + mx).ravel()
        # c(v) = sum_u p(u) e^{-beta d(u,v)} / Z(u)
        with np.errstate(over="ignore", invalid="ignore"):
            cv = p @ np.exp(loge - logz[:, None])
        live = cv > 0
        with np.errstate(divide="ignore"):
            logc = np.log(np.where(live, cv, 1.0))
        # the certificate ranges over every reachable reproduction, including
        # ones whose mass has been pruned to zero
        max_logc = float(logc[live].max())
        gap = max_logc - float((q * cv * np.where(q > 0, logc, 0.0)).sum())
        return qcond, logz, cv, max_logc, gap

    # at small slopes the optimum is a single reproduction, which the
    # multiplicative update only approaches geometrically; certify it directly
    for v in np.argsort(-q):
        if mask is not None and not mask[:, v].all():
            continue
        vertex = np.zeros_like(q)
        vertex[v] = 1.0
        state = evaluate(vertex)
        if state[4] <= tol_nats:
            q = vertex
            qcond, logz, cv, max_logc, gap = state
            break
    else:
        # warm starts may carry pruned zeros; keep every reproduction reachable
        q = np.maximum(q, 1e-3 * float(q.max()))
        q = q / q.sum()
        qcond, logz, cv, max_logc, gap = evaluate(q)
    it = 0
    while gap > tol_nats and it < max_iter:
        q = q * cv
        q = q / q.sum()
        it += 1
        qcond, logz, cv, max_logc, gap = evaluate(q)
        if it % 50 == 0 and gap > tol_nats:
            # mass drains from unused reproductions only geometrically; try
            # the pruned law and keep it if it certifies quickly
            small = (q > 0) & (q < 1e-4 * q.max())
            if small.any():
                trial = np.where(small, 0.0, q)
                trial /= trial.sum()
                for _ in range(100):
                    state = evaluate(trial)
                    it += 1
                    if state[4] <= tol_nats:
                        q = trial
                        qcond, logz, cv, max_logc, gap = state
                        break
                    trial = trial * state[2]
                    trial /= trial.sum()
        if it >= 300 and gap > tol_nats:
            # near a critical slope the update crawls; finish with Newton
            q = _rd_newton(p, loge, q, tol_nats)
            qcond, logz, cv, max_logc, gap = evaluate(q)
            break
    dist = float((p[:, None] * qcond * np.where(qcond > 0, d, 0.0)).sum())
    rate = _channel_mi_bits(p, qcond)
    base = float(-(p * logz).sum()) - max_logc
    # supporting line in nats: R(D') >= -beta D' + base
    return qcond, q, dist, rate, base, it, gap <= tol_nats


def _channel_mi_bits(p: np.ndarray, qcond: np.ndarray) -> float:
    joint = p[:, None] * qcond
    out = joint.sum(axis=0)
    mask = joint > 0
    ratio = joint[mask] / (p[:, None] * out[None, :])[mask]
    return max(0.0, float((joint[mask] * np.log2(ratio)).sum()))


def rd_extremes(src: Pmf, d: DistortionMeasure) -> tuple[float, float]:
    """``(D_min, D_max)``: smallest achievable and zero-rate distortions."""
    p = as_pmf(src).probs
    t = d.table
    return float(p @ t.min(axis=1)), float((p @ t).min())


def ba_rate_distortion(
    src: Pmf,
    d: DistortionMeasure,
    D_target: float,
    tol: float = 1e-7,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RdResult:
    """``R(D) = min I(U; U_hat)`` subject to ``E d(U, U_hat) <= D`` (bits).

    Sweeps the Lagrange slope on a geometric grid, refines by bisection,
    and mixes the two bracketing test channels so the distortion constraint
    is met to within 1e-9.
    """
    pmf = as_pmf(src)
    table = d.table
    if table.shape[0] != pmf.alphabet_size:
        raise InvalidArgument("source alphabet and distortion table disagree")
    if D_target < 0:
        raise InvalidArgument("target distortion must be non-negative")
    keep = pmf.probs > 0
    p = pmf.probs[keep]
    p = p / p.sum()
    t = table[keep]
    d_min = float(p @ t.min(axis=1))
    d_max = float((p @ t).min())
    tol_nats = tol * LN2

    def expand(qc: np.ndarray) -> np.ndarray:
        full = np.empty((pmf.alphabet_size, table.shape[1]))
        full[keep] = qc
        full[~keep] = qc.T @ p if qc.size else 0.0
        return full

    if D_target < d_min - 1e-12:
        raise InvalidArgument(f"target distortion {D_target} below the minimum {d_min}")

    if D_target >= d_max:
        best = int(np.argmin(p @ t))
        qc = np.zeros_like(t)
        qc[:, best] = 1.0
        return RdResult(0.0, expand(qc), float(p @ t[:, best]), 0.0, 0, 0.0)

    k = t.shape[1]
    if D_target <= d_min + 1e-12:
        # only minimum-distortion reproductions are allowed: minimize I over that support
        mask = np.isclose(t, t.min(axis=1, keepdims=True), rtol=0, atol=1e-15)
        qc, q, dist, rate, _, it, ok = _rd_iterate(
            p, t, 0.0, np.full(k, 1.0 / k), tol_nats, max_iter, mask=mask
        )
        if not ok:
            raise ConvergenceFailure("rate-distortion iteration did not converge at D_min")
        return RdResult(rate, expand(qc), dist, rate - tol, it, math.inf)

    q0 = np.full(k, 1.0 / k)
    iters = 0

    def point(beta: float, q_init: np.ndarray):
        nonlocal iters
        res = _rd_iterate(p, t, beta, q_init, tol_nats, max_iter)
        iters += res[5]
        if not res[6]:
            raise ConvergenceFailure(f"rate-distortion iteration stalled at slope {beta:g}")
        return res

    # bracket on a geometric grid of slopes
    scale = 1.0 / max(float(t[t > 0].min()), 1e-12)
    lo_beta, lo = 0.0, point(0.0, q0)
    hi = None
    beta = 1e-3 * scale
    while beta < 1e9 * scale:
        # every law is optimal at slope zero, so that point is no warm start
        cand = point(beta, lo[1] if lo_beta > 0 else q0)
        if cand[2] <= D_target:
            hi_beta, hi = beta, cand
            break
        lo_beta, lo = beta, cand
        beta *= 2.0
    if hi is None:
        raise ConvergenceFailure("could not bracket the target distortion")

    for _ in range(200):
        if lo[2] - hi[2] <= 1e-10 or hi_beta - lo_beta <= 1e-13 * hi_beta:
            break
        mid_beta = 0.5 * (lo_beta + hi_beta)
        mid = point(mid_beta, hi[1])
        if mid[2] <= D_target:
            hi_beta, hi = mid_beta, mid
        else:
            lo_beta, lo = mid_beta, mid

    # mix the bracketing channels to land exactly on D_target
    span = lo[2] - hi[2]
    lam = 0.0 if span <= 0 else min(1.0, max(0.0, (D_target - hi[2]) / span))
    qc = lam * lo[0] + (1.0 - lam) * hi[0]
    dist = float((p[:, None] * qc * t).sum())
    rate = _channel_mi_bits(p, qc)
    lines = [(-b * D_target + pt[4]) / LN2 for b, pt in ((lo_beta, lo), (hi_beta, hi))]
    lower = max(0.0, max(lines))
    return RdResult(rate, expand(qc), dist, min(lower, rate), iters, hi_beta)


def f_epsilon(epsilon: float, d_min: float, alphabet_size: int) -> float:
    """``h(eps/d_min) + log2|U| * eps/d_min``, defined for ``eps/d_min < 1/2``."""
    if d_min <= 0:
        raise InvalidArgument("d_min must be positive")
    if epsilon < 0:
        raise InvalidArgument("epsilon must be non-negative")
    ratio = epsilon / d_min
    if ratio >= 0.5:
        raise InvalidArgument("f_epsilon needs epsilon < d_min / 2")
    return binary_entropy(ratio) + math.log2(alphabet_size) * ratio


def separation_frontier(
    src: Pmf,
    d: DistortionMeasure,
    C: float,
    kappa: float,
    tol: float = 1e-7,
) -> float:
    """Smallest ``D`` with ``kappa R(D) <= C`` (the point-to-point OPTA)."""
    if C < 0 or kappa <= 0:
        raise InvalidArgument("need C >= 0 and kappa > 0")
    pmf = as_pmf(src)
    d_lo, d_hi = rd_extremes(pmf, d)
    budget = C / kappa
    if budget <= 0:
        return d_hi
    if d.faithful and budget >= entropy(pmf):
        return d_lo
    if ba_rate_distortion(pmf, d, d_lo).rate <= budget:
        return d_lo
    lo, hi = d_lo, d_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ba_rate_distortion(pmf, d, mid, tol=min(1e-7, tol)).rate <= budget:
            hi = mid
        else:
            lo = mid
    return hi

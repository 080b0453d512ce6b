"""Vectorized bracketed root finding (scan, then safeguarded Newton).

Many independent scalar problems are solved at once.  Problem ``r`` is
described by a bracket ``[lo[r], hi[r]]`` and callables ``f(u, rows)`` /
``df(u, rows)`` that evaluate the residual and its derivative for the
problems listed in ``rows``.
"""

import warnings

import numpy as np

from .errors import TangencyWarning


def scan_brackets(f, lo, hi, nsample):
    """Sample each bracket; return sign-change subintervals.

    Returns ``(rows, a, b, fa, fb, around_min)`` where ``around_min`` is,
    per problem, the pair of samples enclosing the sample of smallest
    ``|f|`` (used to detect tangency).
    """
    n = lo.shape[0]
    t = np.linspace(0.0, 1.0, nsample)
    grid = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    rows = np.repeat(np.arange(n), nsample)
    vals = f(grid.ravel(), rows).reshape(n, nsample)
    fa, fb = vals[:, :-1], vals[:, 1:]
    # a zero at a sample point is attributed to the interval it opens
    # (and to the last interval if it sits at the right end)
    change = (fa * fb < 0) | (fa == 0)
    change[:, -1] |= fb[:, -1] == 0
    r, k = np.nonzero(change)
    amin = np.argmin(np.abs(vals), axis=1)
    rows_n = np.arange(n)
    grid_min = (grid[rows_n, np.maximum(amin - 1, 0)],
                grid[rows_n, np.minimum(amin + 1, nsample - 1)])
    return r, grid[r, k], grid[r, k + 1], fa[r, k], fb[r, k], grid_min


def golden_min_abs(f, rows, a, b, iters=80):
    """Minimize ``|f|`` on each ``[a, b]`` by golden-section search."""
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    a, b = a.copy(), b.copy()
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = np.abs(f(c, rows)), np.abs(f(d, rows))
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new = np.where(left, b - g * (b - a), d)
        d_new = np.where(left, c, a + g * (b - a))
        fc_new = np.where(left, np.abs(f(c_new, rows)), fd)
        fd_new = np.where(left, fc, np.abs(f(d_new, rows)))
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    u = 0.5 * (a + b)
    return u, f(u, rows)


def safeguarded_newton(f, df, rows, a, b, fa, fb, ftol, maxiter=100, polish=2):
    """Refine roots inside sign-change brackets ``[a, b]``.

    Newton steps are accepted only while they stay inside the current
    bracket; otherwise the bracket is bisected.  Iteration stops once
    ``|f| <= ftol`` and ``polish`` further Newton steps have been taken.
    """
    a = a.copy()
    b = b.copy()
    # orient so that f(lo_side) <= 0 <= f(hi_side); an endpoint may be a zero
    flip = (fb < 0) | ((fb == 0) & (fa > 0))
    lo = np.where(flip, b, a)
    hi = np.where(flip, a, b)
    u = 0.5 * (a + b)
    done_count = np.zeros(u.shape, dtype=int)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        fu = f(u[idx], rows[idx])
        zero = fu == 0
        neg = fu < 0
        lo[idx[neg]] = u[idx[neg]]
        hi[idx[~neg & ~zero]] = u[idx[~neg & ~zero]]
        d = df(u[idx], rows[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = fu / d
        cand = u[idx] - step
        left = np.minimum(lo[idx], hi[idx])
        right = np.maximum(lo[idx], hi[idx])
        ok = np.isfinite(cand) & (cand >= left) & (cand <= right)
        new = np.where(ok, cand, 0.5 * (lo[idx] + hi[idx]))
        new = np.where(zero, u[idx], new)
        converged = (np.abs(fu) <= ftol) | zero
        done_count[idx] = np.where(converged, done_count[idx] + 1, 0)
        stalled = np.abs(new - u[idx]) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(u[idx]))
        u[idx] = new
        finished = (done_count[idx] > polish) | (converged & stalled) | zero
        active[idx[finished]] = False
    return u


def bracketed_roots(f, df, lo, hi, ftol, nsample=17, tangency_tol=None):
    """All roots of each problem inside its bracket.

    Returns ``(rows, roots, tangent)``: flat arrays where ``rows`` gives the
    problem index of each root and ``tangent`` flags roots accepted from a
    near-zero minimum without a sign change (a :class:`TangencyWarning` is
    emitted for them).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    r, a, b, fa, fb, (ga, gb) = scan_brackets(f, lo, hi, nsample)
    roots = safeguarded_newton(f, df, r, a, b, fa, fb, ftol) if r.size else np.empty(0)
    tangent = np.zeros(r.shape, dtype=bool)
    tol = ftol if tangency_tol is None else tangency_tol
    missing = np.setdiff1d(np.arange(lo.shape[0]), r)
    if missing.size:
        mu, mf = golden_min_abs(f, missing, ga[missing], gb[missing])
        near = np.abs(mf) <= tol
        touch, touch_u = missing[near], mu[near]
    else:
        touch = missing
    if touch.size:
        warnings.warn("%d normal line(s) touch the curve without crossing; "
                      "using the point of minimal residual" % touch.size,
                      TangencyWarning, stacklevel=3)
        r = np.concatenate([r, touch])
        roots = np.concatenate([roots, touch_u])
        tangent = np.concatenate([tangent, np.ones(touch.size, dtype=bool)])
    order = np.lexsort((roots, r))
    return r[order], roots[order], tangent[order]

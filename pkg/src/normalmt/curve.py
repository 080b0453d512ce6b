"""Analytic closed planar curves and line-curve intersection.

Every curve is parametrized by some ``u`` with period ``U`` and traversed
counterclockwise.  Arc length is measured from ``u = 0`` and extended
periodically: ``arclength(u + U) = arclength(u) + L``.  Functions accept
scalars or numpy arrays; points are returned as arrays of shape ``(..., 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import CurveError, NoIntersection, NotMonotone, QuadratureNonConvergence
from .roots import bracketed_roots

ARC_TOL = 1e-12
_GL_X, _GL_W = leggauss(16)


def perp(v):
    """Rotate vectors by +90 degrees: (x, y) -> (-y, x)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def signed_area(points) -> float:
    """Signed area of a closed polygon (positive when counterclockwise)."""
    p = np.asarray(points, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


class Curve:
    """Base class.  Subclasses provide ``_xy``, ``_dxy``, ``_ddxy`` and ``period``."""

    period = 2 * math.pi
    n_panels = 256

    def __init__(self):
        self._check_regular()
        self._build_table()

    # -- geometry -----------------------------------------------------------
    def eval(self, u):
        return self._xy(np.asarray(u, dtype=float))

    def derivative(self, u):
        return self._dxy(np.asarray(u, dtype=float))

    def second_derivative(self, u):
        return self._ddxy(np.asarray(u, dtype=float))

    def speed(self, u):
        return np.linalg.norm(self.derivative(u), axis=-1)

    def _check_regular(self, n=2048):
        u = np.linspace(0.0, self.period, n, endpoint=False)
        sp = self.speed(u)
        if not np.all(np.isfinite(sp)) or sp.min() <= 1e-12 * max(sp.max(), 1.0):
            raise CurveError("curve is not regular (vanishing derivative)")

    # -- arc length ---------------------------------------------------------
    def _gl(self, a, b):
        """16-point Gauss-Legendre integral of the speed over [a, b] (arrays)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        nodes = mid[..., None] + half[..., None] * _GL_X
        return half * np.sum(_GL_W * self.speed(nodes), axis=-1)

    def _build_table(self):
        edges = np.linspace(0.0, self.period, self.n_panels + 1)
        coarse = self._gl(edges[:-1], edges[1:])
        mids = 0.5 * (edges[:-1] + edges[1:])
        fine = self._gl(edges[:-1], mids) + self._gl(mids, edges[1:])
        err = np.max(np.abs(coarse - fine))
        if err > ARC_TOL * max(1.0, float(np.sum(fine))):
            raise QuadratureNonConvergence(
                "arc-length panels did not converge (estimated error %.3g)" % err)
        self._edges = edges
        self._cum = np.concatenate([[0.0], np.cumsum(fine)])
        self.total_length = float(self._cum[-1])

    def arclength(self, u):
        """Arc length from parameter 0 to ``u`` (periodically extended)."""
        u = np.asarray(u, dtype=float)
        q = np.floor(u / self.period)
        r = u - q * self.period
        k = np.clip((r / self.period * self.n_panels).astype(int), 0, self.n_panels - 1)
        s = self._cum[k] + self._gl(self._edges[k], r)
        return q * self.total_length + s

    def param_of_arclength(self, s, tol=1e-14, maxiter=50):
        """Inverse of :meth:`arclength` by Newton with bisection fallback."""
        s = np.asarray(s, dtype=float)
        L = self.total_length
        q = np.floor(s / L)
        r = s - q * L
        k = np.clip(np.searchsorted(self._cum, r, side="right") - 1, 0, self.n_panels - 1)
        lo = self._edges[k].copy()
        hi = self._edges[k + 1].copy()
        frac = (r - self._cum[k]) / (self._cum[k + 1] - self._cum[k])
        u = lo + frac * (hi - lo)
        for _ in range(maxiter):
            g = self._cum[k] + self._gl(self._edges[k], u) - r
            lo = np.where(g < 0, u, lo)
            hi = np.where(g > 0, u, hi)
            cand = u - g / self.speed(u)
            bad = ~((cand > lo) & (cand < hi))
            new = np.where(bad, 0.5 * (lo + hi), cand)
            step = np.max(np.abs(new - u)) if new.size else 0.0
            u = new
            if step <= tol * self.period:
                break
        return q * self.period + u

    def frame_at(self, s):
        """Unit tangent and normal ``perp(tangent)`` at arc length ``s``."""
        u = self.param_of_arclength(s)
        d = self.derivative(u)
        t = d / np.linalg.norm(d, axis=-1, keepdims=True)
        return t, perp(t)

    def point_at(self, s):
        return self.eval(self.param_of_arclength(s))

    def locate(self, points, n_grid=4096, tol=1e-9):
        """Arc lengths in ``[0, L)`` of points lying on the curve.

        Nearest grid parameter, then Newton on ``(c(u) - p) . c'(u) = 0``.
        Raises CurveError for points farther than ``tol`` (relative to L).
        """
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        grid = np.linspace(0.0, self.period, n_grid, endpoint=False)
        g = self.eval(grid)
        d2 = np.sum((p[:, None, :] - g[None, :, :]) ** 2, axis=-1)
        u = grid[np.argmin(d2, axis=1)]
        for _ in range(30):
            r = self.eval(u) - p
            d1 = self.derivative(u)
            f = np.sum(r * d1, axis=-1)
            df = np.sum(d1 * d1, axis=-1) + np.sum(r * self.second_derivative(u), axis=-1)
            u = u - f / df
        dist = np.linalg.norm(self.eval(u) - p, axis=-1)
        if np.any(dist > tol * self.total_length):
            raise CurveError("point %d is not on the curve (distance %.3g)"
                             % (int(np.argmax(dist)), dist.max()))
        return np.mod(self.arclength(u), self.total_length)

    def to_dict(self) -> dict:
        raise NotImplementedError


class Circle(Curve):
    def __init__(self, r=1.0, center=(0.0, 0.0)):
        if not r > 0:
            raise CurveError("radius must be positive")
        self.r = float(r)
        self.center = np.asarray(center, dtype=float)
        self.total_length = 2 * math.pi * self.r

    def _xy(self, u):
        return self.center + self.r * np.stack([np.cos(u), np.sin(u)], axis=-1)

    def _dxy(self, u):
        return self.r * np.stack([-np.sin(u), np.cos(u)], axis=-1)

    def _ddxy(self, u):
        return -self.r * np.stack([np.cos(u), np.sin(u)], axis=-1)

    def speed(self, u):
        return np.full(np.shape(u), self.r)

    def arclength(self, u):
        return self.r * np.asarray(u, dtype=float)

    def param_of_arclength(self, s, tol=None, maxiter=None):
        return np.asarray(s, dtype=float) / self.r

    def to_dict(self):
        d = {"kind": "circle", "r": self.r}
        if np.any(self.center):
            d["center"] = self.center.tolist()
        return d


class Ellipse(Curve):
    def __init__(self, a=2.0, b=1.0, center=(0.0, 0.0)):
        if not (a > 0 and b > 0):
            raise CurveError("semi-axes must be positive")
        self.a = float(a)
        self.b = float(b)
        self.center = np.asarray(center, dtype=float)
        super().__init__()

    def _xy(self, u):
        return self.center + np.stack([self.a * np.cos(u), self.b * np.sin(u)], axis=-1)

    def _dxy(self, u):
        return np.stack([-self.a * np.sin(u), self.b * np.cos(u)], axis=-1)

    def _ddxy(self, u):
        return np.stack([-self.a * np.cos(u), -self.b * np.sin(u)], axis=-1)

    def to_dict(self):
        d = {"kind": "ellipse", "a": self.a, "b": self.b}
        if np.any(self.center):
            d["center"] = self.center.tolist()
        return d


class TrigCurve(Curve):
    """Trigonometric polynomial curve.

    ``x(u) = sum_k cx[k] cos(k u) + sx[k] sin(k u)`` for ``k = 0, 1, ...``
    (so ``sx[0]`` has no effect), and likewise for ``y`` with ``cy``, ``sy``.
    """

    def __init__(self, cx, sx, cy, sy):
        self.cx, self.sx, self.cy, self.sy = (
            np.asarray(c, dtype=float) for c in (cx, sx, cy, sy))
        n = max(len(self.cx), len(self.sx), len(self.cy), len(self.sy))
        if n < 2:
            raise CurveError("trig curve needs at least first harmonics")
        self._coef = np.zeros((4, n))
        for row, c in enumerate((self.cx, self.sx, self.cy, self.sy)):
            self._coef[row, :len(c)] = c
        self._k = np.arange(n, dtype=float)
        super().__init__()

    def _series(self, u, order):
        ku = u[..., None] * self._k
        c, s = np.cos(ku), np.sin(ku)
        kp = self._k ** order
        # derivative of order m cycles (cos, sin) -> (-sin, cos) -> ...
        if order % 4 == 0:
            bc, bs = c, s
        elif order % 4 == 1:
            bc, bs = -s, c
        elif order % 4 == 2:
            bc, bs = -c, -s
        else:
            bc, bs = s, -c
        a = self._coef * kp
        x = bc @ a[0] + bs @ a[1]
        y = bc @ a[2] + bs @ a[3]
        return np.stack([x, y], axis=-1)

    def _xy(self, u):
        return self._series(u, 0)

    def _dxy(self, u):
        return self._series(u, 1)

    def _ddxy(self, u):
        return self._series(u, 2)

    def to_dict(self):
        return {"kind": "trig", "cx": self.cx.tolist(), "sx": self.sx.tolist(),
                "cy": self.cy.tolist(), "sy": self.sy.tolist()}


def curve_from_spec(spec) -> Curve:
    """Build a curve from a config dict (or pass a Curve through)."""
    if isinstance(spec, Curve):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise CurveError("curve spec must be a dict with a 'kind' key")
    kind = spec["kind"]
    center = spec.get("center", (0.0, 0.0))
    try:
        if kind == "circle":
            return Circle(spec.get("r", 1.0), center)
        if kind == "ellipse":
            return Ellipse(spec.get("a", 2.0), spec.get("b", 1.0), center)
        if kind == "trig":
            return TrigCurve(spec.get("cx", []), spec.get("sx", []),
                             spec.get("cy", []), spec.get("sy", []))
    except TypeError as e:
        raise CurveError("bad curve parameters: %s" % e) from None
    raise CurveError("unknown curve kind %r" % kind)


# -- rays and intersections ---------------------------------------------------

@dataclass(frozen=True)
class Ray:
    origin: tuple
    direction: tuple

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (2,) or abs(np.hypot(*d) - 1.0) > 1e-14:
            raise ValueError("ray direction must be a unit 2-vector")

    @classmethod
    def through(cls, origin, vector):
        v = np.asarray(vector, dtype=float)
        v = v / np.hypot(*v)
        return cls(tuple(map(float, origin)), tuple(map(float, v)))


def intersect_lines(curve: Curve, origins, directions, lo, hi, nsample=17, rel_tol=1e-13):
    """Intersect many lines with ``curve`` inside parameter brackets.

    Line ``r`` passes through ``origins[r]`` with unit direction
    ``directions[r]``; roots are sought for ``u`` in ``[lo[r], hi[r]]``.
    Returns flat arrays ``(rows, u, t, tangent)`` with ``t`` the signed
    distance along the direction.  Roots are refined to
    ``|f| <= rel_tol * L``.
    """
    o = np.asarray(origins, dtype=float).reshape(-1, 2)
    d = np.asarray(directions, dtype=float).reshape(-1, 2)
    nrm = perp(d)
    ftol = rel_tol * curve.total_length

    def f(u, rows):
        return np.sum((curve.eval(u) - o[rows]) * nrm[rows], axis=-1)

    def df(u, rows):
        return np.sum(curve.derivative(u) * nrm[rows], axis=-1)

    rows, u, tangent = bracketed_roots(f, df, lo, hi, ftol, nsample=nsample)
    t = np.sum((curve.eval(u) - o[rows]) * d[rows], axis=-1)
    return rows, u, t, tangent


def intersect_ray(curve: Curve, ray: Ray, bracket) -> list:
    """All intersections ``(u, t)`` of the ray's line with the curve in ``bracket``."""
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("empty bracket")
    if hi - lo >= curve.period:
        raise ValueError("bracket must be shorter than one period")
    rows, u, t, _ = intersect_lines(curve, [ray.origin], [ray.direction], [lo], [hi])
    if rows.size == 0:
        raise NoIntersection("line does not meet the curve in [%g, %g]" % (lo, hi))
    return [(float(a), float(b)) for a, b in zip(u, t)]


# -- initial samples ----------------------------------------------------------

def _check_sample(points, s, closed, curve, require_ccw):
    ds = np.diff(s)
    strict = ds[:-1] if closed else ds
    if np.any(strict <= 0):
        raise NotMonotone("initial arc-length sample is not strictly increasing")
    if closed and s[-1] != s[0] + curve.total_length:
        raise NotMonotone("closed sample must end one period after it starts")
    if not closed and s[-1] >= s[0] + curve.total_length:
        raise NotMonotone("sample wraps past one period")
    if require_ccw and signed_area(points) <= 0:
        raise CurveError("initial polygon must be counterclockwise")


def initial_sample_quadratic(curve: Curve, h: float, closed: bool = False,
                             require_ccw: bool = True):
    """Sample at arc lengths ``(L/2)(x + x**2)`` for ``x = i*h``.

    For the unit circle this is ``pi*(x + x**2)``.  With ``closed=False``
    ``i = 0..N-1`` (N = 1/h distinct points).  With ``closed=True`` the
    endpoint ``x = 1`` is included, so the last point repeats the first one
    (period N+1).  Returns ``(points, s0)``.
    """
    n = int(round(1.0 / h))
    if n < 1 or abs(n * h - 1.0) > 1e-9:
        raise ValueError("1/h must be an integer")
    i = np.arange(n + 1 if closed else n)
    x = i / n
    s = 0.5 * curve.total_length * (x + x * x)
    if closed:
        s[-1] = curve.total_length
    pts = curve.point_at(s)
    _check_sample(pts, s, closed, curve, require_ccw)
    return pts, s


def initial_sample_uniform(curve: Curve, n: int, require_ccw: bool = True):
    """``n`` points equally spaced in arc length starting at ``s = 0``."""
    s = curve.total_length * np.arange(n) / n
    pts = curve.point_at(s)
    _check_sample(pts, s, False, curve, require_ccw)
    return pts, s


def initial_sample_parameter(curve: Curve, n: int, require_ccw: bool = True):
    """``n`` points equally spaced in the curve parameter ``u``."""
    u = curve.period * np.arange(n) / n
    pts = curve.eval(u)
    s = curve.arclength(u)
    _check_sample(pts, s, False, curve, require_ccw)
    return pts, s

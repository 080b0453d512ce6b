"""Decay-order estimation for decompositions.

A :class:`DecayTable` lists, per level ``j``, a max-norm and two order
estimates: the cumulative ``-log2(norm_j) / (j + level_offset)`` and the
consecutive ratio ``log2(norm_{j-1} / norm_j)`` (with ``norm_0 = 1`` for the
first row, so the ratios telescope to the cumulative statistic).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import subdivision as sd
from .curve import Circle, initial_sample_quadratic
from .roots import bracketed_roots
from .transform import Decomposition, TransformConfig, decompose

CSV_HEADER = ["j", "norm", "order_cumulative", "order_ratio"]


@dataclass(frozen=True)
class DecayRow:
    j: int
    norm: float
    order_cumulative: float
    order_ratio: float


class DecayTable:
    def __init__(self, levels, norms, level_offset=0):
        levels = [int(j) for j in levels]
        norms = [float(x) for x in norms]
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be strictly increasing")
        if any(not x > 0 for x in norms):
            raise ValueError("norms must be positive")
        self.level_offset = level_offset
        rows, prev = [], 1.0
        for j, x in zip(levels, norms):
            denom = j + level_offset
            cum = -np.log2(x) / denom if denom else float("nan")
            rows.append(DecayRow(j, x, float(cum), float(np.log2(prev / x))))
            prev = x
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def levels(self):
        return np.array([r.j for r in self.rows])

    @property
    def norms(self):
        return np.array([r.norm for r in self.rows])

    @property
    def cumulative(self):
        return np.array([r.order_cumulative for r in self.rows])

    @property
    def ratio(self):
        return np.array([r.order_ratio for r in self.rows])

    def to_csv(self, fh=None):
        """Write ``j,norm,order_cumulative,order_ratio`` rows; returns text if no file."""
        out = fh if fh is not None else io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.j, repr(r.norm), repr(r.order_cumulative), repr(r.order_ratio)])
        if fh is None:
            return out.getvalue()

    def to_json(self) -> str:
        return json.dumps({"level_offset": self.level_offset,
                           "rows": [dict(zip(CSV_HEADER, (r.j, r.norm, r.order_cumulative,
                                                          r.order_ratio)))
                                    for r in self.rows]})


def _norm_table(arrays, start=1, level_offset=0):
    norms = [float(np.max(np.abs(a))) for a in arrays]
    return DecayTable(range(start, start + len(norms)), norms, level_offset)


def detail_decay(dec: Decomposition, level_offset=0) -> DecayTable:
    """Max-norm of the details per level.

    ``level_offset=1`` divides the cumulative statistic by ``j + 1``; this
    is the convention under which the closed-sample experiment in
    :func:`table1` is tabulated.
    """
    if not dec.details:
        raise ValueError("decomposition has no detail levels")
    return _norm_table(dec.details, 1, level_offset)


def omega_decay(dec: Decomposition) -> DecayTable:
    if not dec.diagnostics:
        raise ValueError("omega decay needs a curve-backed decomposition")
    return _norm_table([d.omega for d in dec.diagnostics])


def periodic_differences(s, n, L=0.0):
    """``n``-th forward differences of one period of ``s`` (extension drift ``L``)."""
    d = np.diff(np.concatenate([s, [s[0] + L]]))
    for _ in range(n - 1):
        d = np.roll(d, -1) - d
    return d


def difference_norms(s_levels, n, L, start=0) -> DecayTable:
    """Table of ``max |Delta^n s^j|`` for the given arc-length sequences.

    ``s_levels[k]`` is taken to be level ``start + k``.  Rows for level 0
    carry a NaN cumulative order.
    """
    if not 1 <= n <= 4:
        raise ValueError("difference order must be in 1..4")
    return _norm_table([periodic_differences(np.asarray(s), n, L) for s in s_levels], start)


def omega_difference_norms(dec: Decomposition, n) -> DecayTable:
    """``max |Delta^n omega^j|`` per level (exposed as data only)."""
    return _norm_table([periodic_differences(d.omega, n) for d in dec.diagnostics])


def fit_order(table: DecayTable, window=4) -> float:
    """Negated least-squares slope of ``log2(norm)`` against ``j``.

    ``window`` is either the number of trailing rows or a ``(jmin, jmax)``
    pair of levels (inclusive).
    """
    j = table.levels
    y = np.log2(table.norms)
    if isinstance(window, (tuple, list)):
        keep = (j >= window[0]) & (j <= window[1])
    else:
        keep = np.zeros(j.shape, dtype=bool)
        keep[-int(window):] = True
    if np.count_nonzero(keep) < 2:
        raise ValueError("need at least two rows to fit an order")
    slope = np.polyfit(j[keep].astype(float), y[keep], 1)[0]
    return float(-slope)


# -- normal accuracy ------------------------------------------------------------

@dataclass
class NormalAccuracyReport:
    table: DecayTable
    order: float
    bound: np.ndarray

    @property
    def values(self):
        return self.table.norms


def tangent_parameters(curve, raw, s_guess, s_coarse, L, w):
    """Arc lengths where the curve tangent is parallel to ``raw[K]``.

    Searched in the coarse window around each fine index; among the roots
    with the tangent pointing the same way as ``raw[K]`` the one nearest
    ``s_guess[K]`` is kept.
    """
    M = raw.shape[0]
    n = s_coarse.shape[0]
    i = np.arange(M) // 2

    def ext(idx):
        q, r = np.divmod(idx, n)
        return s_coarse[r] + q * L

    half = 0.5 * L * (1 - 1e-6)
    slo = np.maximum(ext(i - w), s_guess - half)
    shi = np.minimum(ext(i + 1 + w), s_guess + half)
    ulo, uhi = curve.param_of_arclength(slo), curve.param_of_arclength(shi)

    def f(u, rows):
        d = curve.derivative(u)
        return d[..., 0] * raw[rows, 1] - d[..., 1] * raw[rows, 0]

    def df(u, rows):
        d = curve.second_derivative(u)
        return d[..., 0] * raw[rows, 1] - d[..., 1] * raw[rows, 0]

    rows, u, _ = bracketed_roots(f, df, ulo, uhi, ftol=1e-15 * np.abs(raw).max(),
                                 nsample=4 * (2 * w + 1) + 1)
    same = np.sum(curve.derivative(u) * raw[rows], axis=-1) > 0
    rows, u = rows[same], u[same]
    s = curve.arclength(u)
    dist = np.abs(s - s_guess[rows])
    order = np.lexsort((dist, rows))
    rows, s = rows[order], s[order]
    first = np.ones(rows.size, dtype=bool)
    first[1:] = rows[1:] != rows[:-1]
    if np.count_nonzero(first) != M:
        raise ValueError("tangent direction not found for every fine index")
    return s[first]


def normal_accuracy(dec: Decomposition, curve, window=(6, 10)) -> NormalAccuracyReport:
    """Distance in arc length between where each normal is exact and ``s^j``.

    Per level ``j`` and fine index ``K``, ``xi`` is the arc parameter at
    which the curve tangent is parallel to ``(N dv^{j-1})_K``; the table
    holds ``max_K |xi - s^j_K|``.
    """
    from .transform import normals

    cfg = dec.config
    L = curve.total_length
    s_levels = dec.level_s()
    pts = dec.level_points()
    vals, bound = [], []
    for j in range(1, len(s_levels)):
        nf = normals(cfg.normals_scheme, pts[j - 1], cfg.coincident)
        xi = tangent_parameters(curve, nf.raw, s_levels[j], s_levels[j - 1], L, cfg.window)
        vals.append(np.max(np.abs(xi - s_levels[j])))
        bound.append((cfg.p + 1) * np.max(periodic_differences(s_levels[j - 1], 1, L)))
    table = DecayTable(range(1, len(vals) + 1), vals)
    try:
        order = fit_order(table, window)
    except ValueError:
        order = float("nan")
    return NormalAccuracyReport(table, order, np.array(bound))


# -- the six-run experiment -------------------------------------------------------

TABLE1_RUNS = [(3, 0.01), (3, 0.1), (5, 0.01), (5, 0.1), (7, 0.01), (7, 0.1)]


def table1_label(p, h):
    return "(S%d,S%d,T%d),h=%g" % (p, p - 2, p, h)


def table1_decomposition(p, h, levels=10) -> Decomposition:
    """Combined ``(S_p, S_{p-2}, T_p)`` decomposition of the unit circle.

    ``T_p`` is the (p+1)-point Deslauriers-Dubuc scheme.  The closed
    quadratic sample (endpoint repeated) is used.
    """
    c = Circle(1.0)
    v, s = initial_sample_quadratic(c, h, closed=True)
    cfg = TransformConfig(p, "lr:%d" % (p - 2), "dd:%d" % (p + 1), levels=levels,
                          coincident="chord")
    return decompose(c, v, s, cfg, strict=True)


def table1_run(p, h, levels=10):
    """Cumulative detail orders of one circle run, divided by ``j + 1``."""
    return detail_decay(table1_decomposition(p, h, levels), level_offset=1)


def table1(levels=10, runs=None):
    """Dict ``label -> DecayTable`` for the six combined circle runs."""
    return {table1_label(p, h): table1_run(p, h, levels)
            for p, h in (runs or TABLE1_RUNS)}


def table1_csv(tables, fh=None):
    """One row per run: label, then the cumulative order at each level."""
    out = fh if fh is not None else io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    levels = max(len(t) for t in tables.values())
    w.writerow(["run"] + ["j=%d" % j for j in range(1, levels + 1)])
    for label, t in tables.items():
        w.writerow([label] + ["%.4f" % x for x in t.cumulative])
    if fh is None:
        return out.getvalue()

"""Normal multi-scale transforms of closed planar curves.

One refinement step predicts fine points from coarse ones with a B-spline
scheme ``S_p``, optionally corrects the prediction along the normal with an
interpolatory scheme ``T`` (combined transform), and then moves each
predicted point along an approximate normal until it hits the curve.  The
signed displacement is the detail coefficient.  Coarse points plus details
determine the fine points exactly, without access to the curve.

Sequences are numpy arrays holding one period; arc-length sequences are
extended with ``s[i + N] = s[i] + L``.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import subdivision as sd
from .curve import Curve, curve_from_spec, intersect_lines, perp
from .errors import (ConfigError, DegenerateDifference, MonotonicityViolation,
                     NoIntersection, SchemeError, WellPosednessError)

COINCIDENT_POLICIES = ("raise", "chord")


def _spec_to_json(spec):
    if spec is None or isinstance(spec, str):
        return spec
    return spec.to_dict() if isinstance(spec, sd.Scheme) else dict(spec)


@dataclass
class TransformConfig:
    """Parameters of a transform.

    ``normal_scheme`` defaults to ``lr:(p-2)``.  ``tangential_scheme`` set
    means a combined transform.  ``window`` is the half-width, in coarse
    gaps, of the arc-length interval searched for each intersection.
    ``coincident="chord"`` tolerates repeated coarse points by replacing a
    degenerate normal direction with the chord across the repeated pair.
    """

    p: int
    normal_scheme: object = None
    tangential_scheme: object = None
    levels: int = 6
    window: int | None = None
    root_tol: float = 1e-13
    monotonicity_tol: float = 0.0
    coincident: str = "raise"

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2:
            raise ConfigError("p must be an integer >= 2")
        if self.normal_scheme is None:
            self.normal_scheme = "lr:%d" % (self.p - 2)
        if self.window is None:
            self.window = self.p + 1
        if int(self.levels) < 0:
            raise ConfigError("levels must be >= 0")
        self.levels = int(self.levels)
        if int(self.window) < 1:
            raise ConfigError("window must be >= 1")
        if self.coincident not in COINCIDENT_POLICIES:
            raise ConfigError("coincident must be one of %s" % (COINCIDENT_POLICIES,))
        try:
            self._build()
        except SchemeError as e:
            raise ConfigError(str(e)) from None

    def _build(self):
        raw = sd.lr_scheme(self.p)
        m = sd.centering_offset(raw)
        self.offset = m
        self.predictor = sd.center(raw)
        nraw = sd.scheme_from_spec(self.normal_scheme)
        if not (nraw.reproduces_constants and nraw.is_positive):
            raise ConfigError("normal scheme must be positive and reproduce constants")
        self.normals_scheme = sd.reindex(nraw, m, "reindexed(%s,%d)" % (nraw.label, m))
        self.tangential = None
        if self.tangential_scheme is not None:
            t = sd.center(sd.scheme_from_spec(self.tangential_scheme))
            if t.shift != self.predictor.shift:
                raise ConfigError(
                    "tangential scheme %s has centred shift %s but the predictor "
                    "has %s; combined transforms need equal shifts"
                    % (t.label, t.shift, self.predictor.shift))
            self.tangential = t

    @property
    def combined(self) -> bool:
        return self.tangential is not None

    @property
    def min_points(self) -> int:
        return math.ceil(self.p / 2) + 1

    def to_dict(self) -> dict:
        return {"p": self.p, "normal_scheme": _spec_to_json(self.normal_scheme),
                "tangential_scheme": _spec_to_json(self.tangential_scheme),
                "levels": self.levels, "window": self.window,
                "root_tol": self.root_tol,
                "monotonicity_tol": self.monotonicity_tol,
                "coincident": self.coincident}

    @classmethod
    def from_dict(cls, d: dict) -> "TransformConfig":
        known = {"p", "normal_scheme", "tangential_scheme", "levels", "window",
                 "root_tol", "monotonicity_tol", "coincident"}
        extra = set(d) - known
        if extra:
            raise ConfigError("unknown config keys: %s" % sorted(extra))
        if "p" not in d:
            raise ConfigError("config needs 'p'")
        return cls(**d)


@dataclass
class NormalField:
    """Unit normals at fine indices and the first coarse index they depend on."""
    normals: np.ndarray
    coarse_index: np.ndarray
    raw: np.ndarray


@dataclass
class LevelDiagnostics:
    """Curve-side data of one refinement (never used for reconstruction)."""
    level: int
    points: np.ndarray
    s: np.ndarray
    omega: np.ndarray
    window_constant: float
    ambiguous: int = 0
    tangent: int = 0


@dataclass
class Decomposition:
    config: TransformConfig
    base_points: np.ndarray
    details: list = field(default_factory=list)
    base_s: np.ndarray | None = None
    diagnostics: list | None = None
    failure: dict | None = None
    length: float | None = None

    @property
    def levels(self) -> int:
        return len(self.details)

    @property
    def complete(self) -> bool:
        return self.failure is None and self.levels == self.config.levels

    def finest_points(self):
        """Curve-backed finest points (from diagnostics) or the base points."""
        if self.diagnostics:
            return self.diagnostics[-1].points
        return self.base_points

    def level_s(self):
        """Arc-length sequences s^0, s^1, ... (needs diagnostics)."""
        if self.diagnostics is None or self.base_s is None:
            raise ValueError("decomposition has no arc-length diagnostics")
        return [self.base_s] + [d.s for d in self.diagnostics]

    def level_points(self):
        return [self.base_points] + [d.points for d in (self.diagnostics or [])]

    def truncated(self, keep: int) -> "Decomposition":
        """Copy with details above level ``keep`` set to zero."""
        details = [d if j < keep else np.zeros_like(d)
                   for j, d in enumerate(self.details)]
        return Decomposition(self.config, self.base_points, details)

    # -- files ---------------------------------------------------------------
    def to_dict(self, diagnostics=False) -> dict:
        d = {"config": self.config.to_dict(),
             "base_points": self.base_points.tolist(),
             "details": [np.asarray(x).tolist() for x in self.details]}
        if self.failure is not None:
            d["failure"] = self.failure
        if diagnostics and self.base_s is not None:
            d["base_s"] = self.base_s.tolist()
        return d

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "Decomposition":
        if not isinstance(d, dict) or not {"config", "base_points", "details"} <= set(d):
            raise ValueError("decomposition needs config, base_points and details")
        config = TransformConfig.from_dict(d["config"])
        base = np.asarray(d["base_points"], dtype=float)
        if base.ndim != 2 or base.shape[1] != 2:
            raise ValueError("base_points must be a list of [x, y]")
        details = [np.asarray(x, dtype=float) for x in d["details"]]
        n = base.shape[0]
        for j, x in enumerate(details, start=1):
            if x.shape != (n * 2 ** j,):
                raise ValueError("level %d details must have length %d" % (j, n * 2 ** j))
        return cls(config, base, details, failure=d.get("failure"))

    @classmethod
    def load(cls, path) -> "Decomposition":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def write_diagnostics_csv(self, path):
        """Rows ``level,index,s,omega,x,y,detail`` for every curve-backed level."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["level", "index", "s", "omega", "x", "y", "detail"])
            if self.base_s is not None:
                for i, (pt, s) in enumerate(zip(self.base_points, self.base_s)):
                    w.writerow([0, i, repr(float(s)), "", repr(float(pt[0])),
                                repr(float(pt[1])), ""])
            for diag, det in zip(self.diagnostics or [], self.details):
                for k in range(det.shape[0]):
                    w.writerow([diag.level, k, repr(float(diag.s[k])),
                                repr(float(diag.omega[k])),
                                repr(float(diag.points[k, 0])),
                                repr(float(diag.points[k, 1])), repr(float(det[k]))])


# -- one level ------------------------------------------------------------------

def _chord_differences(v):
    """Forward differences with zero-length edges replaced by a tiny chord."""
    dv = np.roll(v, -1, axis=0) - v
    lens = np.linalg.norm(dv, axis=1)
    bad = lens < 1e-14 * lens.max()
    if bad.any():
        chord = np.roll(v, -2, axis=0) - np.roll(v, 1, axis=0)
        dv[bad] = 1e-9 * chord[bad]
    return dv


def normals(nscheme: sd.Scheme, v, coincident="raise", level=None) -> NormalField:
    """Unit vectors ``perp((N dv)_K)/|(N dv)_K|`` at every fine index.

    ``nscheme`` is applied as given, so it must already carry the re-index
    of the predictor it is paired with (see :class:`TransformConfig`).
    """
    v = np.asarray(v, dtype=float)
    dv = np.roll(v, -1, axis=0) - v
    raw = sd.apply(nscheme, dv)
    size = np.linalg.norm(raw, axis=1)
    scale = np.linalg.norm(dv, axis=1).max()
    bad = size < 1e-14 * scale
    if bad.any():
        if coincident != "chord":
            k = int(np.nonzero(bad)[0][0])
            raise DegenerateDifference(
                "normal difference (N dv)_%d vanishes (coincident coarse points)" % k,
                level=level, index=k)
        alt = sd.apply(nscheme, _chord_differences(v))
        raw[bad] = alt[bad]
        size = np.linalg.norm(raw, axis=1)
    n = perp(raw) / size[:, None]
    lo, _ = nscheme.offsets
    return NormalField(n, np.arange(raw.shape[0]) // 2 + lo, raw)


def _outward(nf: NormalField):
    # perp of a counterclockwise tangent points inward; details use the
    # outward direction so that they are positive on convex curves
    return -nf.normals


def predict(config: TransformConfig, v, nf: NormalField | None = None):
    """Predicted fine points: ``S_p v`` or its combined correction."""
    v = np.asarray(v, dtype=float)
    sv = sd.apply(config.predictor, v)
    if not config.combined:
        return sv
    if nf is None:
        nf = normals(config.normals_scheme, v, config.coincident)
    n = _outward(nf)
    tv = sd.apply(config.tangential, v)
    return sv + np.sum((tv - sv) * n, axis=1)[:, None] * n


def _windows(s, L, w, nfine):
    """Arc-length interval around each fine index: coarse ``[i-w, i+1+w]``."""
    n = s.shape[0]
    i = np.arange(nfine) // 2

    def ext(idx):
        q, r = np.divmod(idx, n)
        return s[r] + q * L

    return ext(i - w), ext(i + 1 + w)


def refine(curve: Curve, v, s, config: TransformConfig, level=None):
    """One level of the transform.

    Returns ``(v_fine, s_fine, details, omega, diag_extra)``.
    """
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    L = curve.total_length
    nf = normals(config.normals_scheme, v, config.coincident, level)
    n = _outward(nf)
    vhat = predict(config, v, nf)
    spred = sd.apply(config.predictor, s, drift=L)
    M = vhat.shape[0]

    slo, shi = _windows(s, L, config.window, M)
    # never search a full period: the line meets a closed curve twice
    half = 0.5 * L * (1 - 1e-6)
    centre = spred
    slo = np.maximum(slo, centre - half)
    shi = np.minimum(shi, centre + half)
    ulo = curve.param_of_arclength(slo)
    uhi = curve.param_of_arclength(shi)
    nsample = 4 * (2 * config.window + 1) + 1
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows, u, t, tangent = intersect_lines(curve, vhat, n, ulo, uhi, nsample=nsample,
                                              rel_tol=config.root_tol)
    for wmsg in caught:
        warnings.warn(wmsg.message, wmsg.category, stacklevel=2)

    if rows.size == 0 or np.unique(rows).size < M:
        missing = np.setdiff1d(np.arange(M), rows)
        k = int(missing[0])
        raise NoIntersection("normal line at fine index %d does not meet the curve "
                             "inside its window" % k, level=level, index=k)
    # keep the root of smallest displacement for each fine index
    order = np.lexsort((np.abs(t), rows))
    rows_o, u_o, t_o = rows[order], u[order], t[order]
    first = np.ones(rows_o.size, dtype=bool)
    first[1:] = rows_o[1:] != rows_o[:-1]
    ub, tb = u_o[first], t_o[first]
    # ties: a second root with (almost) the same |t|
    second = np.zeros(rows_o.size, dtype=bool)
    second[1:] = ~first[1:] & first[:-1]
    ties = np.abs(np.abs(t_o[second]) - np.abs(t_o[np.roll(second, -1)])) <= 1e-12 * L
    ambiguous = int(np.count_nonzero(ties))

    vfine = curve.eval(ub)
    sfine = curve.arclength(ub)
    ds = np.diff(np.concatenate([sfine, [sfine[0] + L]]))
    bad = np.nonzero(ds <= config.monotonicity_tol)[0]
    if bad.size:
        k = int(bad[0])
        raise MonotonicityViolation(
            "refined arc lengths not strictly increasing at fine index %d" % k,
            level=level, index=k)
    details = tb
    omega = sfine - spred
    gap = np.max(np.diff(np.concatenate([s, [s[0] + L]])))
    extra = {"window_constant": float(np.max(np.abs(omega)) / gap),
             "ambiguous": ambiguous,
             "tangent": int(np.count_nonzero(tangent))}
    return vfine, sfine, details, omega, extra


def _distinct_count(v, tol=1e-14):
    v = np.asarray(v, dtype=float)
    scale = max(1.0, float(np.abs(v).max()))
    keys = np.round(v / (tol * 1e3 * scale))
    return np.unique(keys, axis=0).shape[0]


def decompose(curve, v0, s0, config: TransformConfig, strict=False) -> Decomposition:
    """Run ``config.levels`` refinements starting from ``(v0, s0)``.

    A well-posedness failure stops the run; the partial result carries a
    ``failure`` record (reason, level, index) unless ``strict`` is set, in
    which case the exception propagates.
    """
    curve = curve_from_spec(curve)
    v = np.asarray(v0, dtype=float)
    s = np.asarray(s0, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or s.shape != (v.shape[0],):
        raise ConfigError("v0 must have shape (N, 2) and s0 shape (N,)")
    if _distinct_count(v) < config.min_points:
        raise ConfigError("need at least %d distinct points for p=%d"
                          % (config.min_points, config.p))
    ds = np.diff(np.concatenate([s, [s[0] + curve.total_length]]))
    # repeated points are only acceptable when the chord policy handles them
    ok = np.all(ds >= 0) if config.coincident == "chord" else np.all(ds > 0)
    if not ok:
        raise ConfigError("initial arc lengths must increase strictly within one period")
    dec = Decomposition(config, v.copy(), [], base_s=s.copy(), diagnostics=[],
                        length=curve.total_length)
    for j in range(1, config.levels + 1):
        try:
            v, s, d, omega, extra = refine(curve, v, s, config, level=j)
        except WellPosednessError as e:
            if strict:
                raise
            dec.failure = e.as_dict()
            break
        dec.details.append(d)
        dec.diagnostics.append(LevelDiagnostics(
            j, v, s, omega, extra["window_constant"], extra["ambiguous"], extra["tangent"]))
    return dec


def reconstruct(dec: Decomposition, levels=None):
    """Replay the transform from base points and details only."""
    config = dec.config
    v = np.asarray(dec.base_points, dtype=float)
    details = dec.details if levels is None else dec.details[:levels]
    for j, d in enumerate(details, start=1):
        nf = normals(config.normals_scheme, v, config.coincident, level=j)
        vhat = predict(config, v, nf)
        v = vhat + np.asarray(d, dtype=float)[:, None] * _outward(nf)
    return v


def predict_levels(config: TransformConfig, v0, levels: int):
    """``levels`` steps of prediction only (all details zero)."""
    v = np.asarray(v0, dtype=float)
    for _ in range(levels):
        v = predict(config, v)
    return v

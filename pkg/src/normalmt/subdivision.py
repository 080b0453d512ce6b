"""Stationary binary subdivision schemes with exact rational stencils.

A scheme ``S`` acts on a sequence ``x`` (one period of a periodic sequence)
through two stencils::

    (Sx)[2i]   = sum(c * x[i + o] for o, c in even)
    (Sx)[2i+1] = sum(c * x[i + o] for o, c in odd)

Equivalently ``(Sx)[k] = sum_i a[k - 2i] x[i]`` with the *mask* ``a``;
``a[-2o] = c`` for even entries and ``a[1 - 2o] = c`` for odd ones.  All
coefficients are :class:`fractions.Fraction` so identities such as the
derived-scheme relation or polynomial reproduction can be checked exactly.

Lane-Riesenfeld schemes are stored in the right-shifted indexing obtained by
unrolling the averaging recursion; :func:`center` is the only operation that
re-indexes a scheme.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import (FitFailure, NoDerivedScheme, NonCenterable,
                     NotExactlyLinear, PeriodTooSmall, SchemeError)

__all__ = [
    "Scheme", "ReproductionReport", "lr_scheme", "dd_scheme", "center",
    "centering_offset", "reindex", "apply", "shift_of", "derived",
    "reproduction_report", "scheme_from_spec",
]

Stencil = tuple[tuple[int, Fraction], ...]


def _normalize(stencil) -> Stencil:
    acc: dict[int, Fraction] = {}
    for o, c in stencil:
        acc[int(o)] = acc.get(int(o), Fraction(0)) + Fraction(c)
    return tuple(sorted((o, c) for o, c in acc.items() if c != 0))


def _measure_shift(even: Stencil, odd: Stencil) -> Fraction:
    se = sum(c for _, c in even)
    so = sum(c for _, c in odd)
    if se == 0 or se != so:
        raise NotExactlyLinear("stencil sums differ or vanish: %s vs %s" % (se, so))
    # image of x_i = i: even -> i + ce, odd -> (2i+1)/2 + co
    ce = sum(c * o for o, c in even) / se
    co = sum(c * o for o, c in odd) / so - Fraction(1, 2)
    if ce != co:
        raise NotExactlyLinear("image of a linear ramp is not affine in K "
                               "(even offset %s, odd offset %s)" % (ce, co))
    return ce


@dataclass(frozen=True)
class Scheme:
    """Immutable binary subdivision scheme.

    ``shift`` is the parameter ``c`` with ``S(t|Z) = t|(Z/2 + c)``, measured
    from the stencils (normalized by the stencil sum, so scaled schemes such
    as derived schemes keep a meaningful value).  It is ``None`` when the
    scheme does not map linear samples to linear samples.
    """

    even: Stencil
    odd: Stencil
    label: str = field(default="", compare=False)
    shift: Fraction | None = field(default=None, init=False)

    def __post_init__(self):
        object.__setattr__(self, "even", _normalize(self.even))
        object.__setattr__(self, "odd", _normalize(self.odd))
        if not self.even and not self.odd:
            raise SchemeError("empty scheme")
        try:
            shift = _measure_shift(self.even, self.odd)
        except NotExactlyLinear:
            shift = None
        object.__setattr__(self, "shift", shift)

    # -- views -------------------------------------------------------------

    @classmethod
    def from_mask(cls, mask: dict[int, Fraction], label: str = "") -> "Scheme":
        even, odd = [], []
        for r, c in mask.items():
            if r % 2 == 0:
                even.append((-r // 2, c))
            else:
                odd.append(((1 - r) // 2, c))
        return cls(tuple(even), tuple(odd), label)

    def mask(self) -> dict[int, Fraction]:
        a = {-2 * o: c for o, c in self.even}
        a.update({1 - 2 * o: c for o, c in self.odd})
        return a

    @property
    def offsets(self) -> tuple[int, int]:
        """Smallest and largest coarse offset used by either stencil."""
        offs = [o for o, _ in self.even + self.odd]
        return min(offs), max(offs)

    @property
    def width(self) -> int:
        lo, hi = self.offsets
        return hi - lo + 1

    @property
    def is_positive(self) -> bool:
        return all(c > 0 for _, c in self.even + self.odd)

    @property
    def reproduces_constants(self) -> bool:
        return (sum(c for _, c in self.even) == 1
                and sum(c for _, c in self.odd) == 1)

    def scaled(self, factor) -> "Scheme":
        f = Fraction(factor)
        return Scheme(tuple((o, f * c) for o, c in self.even),
                      tuple((o, f * c) for o, c in self.odd),
                      "%s*(%s)" % (f, self.label))

    def float_stencils(self):
        """((offsets, weights), (offsets, weights)) as numpy arrays."""
        return tuple((np.array([o for o, _ in st], dtype=np.int64),
                      np.array([float(c) for _, c in st]))
                     for st in (self.even, self.odd))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "shift": None if self.shift is None else _frac_str(self.shift),
            "even": [[o, _frac_str(c)] for o, c in self.even],
            "odd": [[o, _frac_str(c)] for o, c in self.odd],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Scheme":
        s = cls(tuple((int(o), Fraction(c)) for o, c in d["even"]),
                tuple((int(o), Fraction(c)) for o, c in d["odd"]),
                d.get("label", ""))
        stated = d.get("shift")
        if stated is not None and Fraction(stated) != s.shift:
            raise SchemeError("stated shift %s disagrees with stencils (%s)"
                              % (stated, s.shift))
        return s

    @classmethod
    def from_json(cls, text: str) -> "Scheme":
        return cls.from_dict(json.loads(text))


def _frac_str(q: Fraction) -> str:
    return "%d/%d" % (q.numerator, q.denominator)


# -- constructors -------------------------------------------------------------

def lr_scheme(p: int) -> Scheme:
    """Degree-``p`` B-spline scheme from the Lane-Riesenfeld recursion.

    ``(S_0 x)[2i] = (S_0 x)[2i+1] = x[i]`` and
    ``(S_p x)[k] = ((S_{p-1} x)[k] + (S_{p-1} x)[k+1]) / 2``.
    """
    if p < 0:
        raise SchemeError("degree must be nonnegative, got %r" % p)
    half = Fraction(1, 2)
    mask = {0: Fraction(1), 1: Fraction(1)}
    for _ in range(p):
        nxt: dict[int, Fraction] = {}
        for r, c in mask.items():
            nxt[r] = nxt.get(r, Fraction(0)) + half * c
            nxt[r - 1] = nxt.get(r - 1, Fraction(0)) + half * c
        mask = nxt
    return Scheme.from_mask(mask, "LR:p=%d" % p)


def dd_scheme(points: int) -> Scheme:
    """Interpolatory Deslauriers-Dubuc scheme on ``points`` (= 2n) nodes."""
    if points % 2 or points < 4:
        raise SchemeError("Deslauriers-Dubuc needs an even number of points >= 4, "
                          "got %r" % points)
    n = points // 2
    nodes = range(-n + 1, n + 1)
    half = Fraction(1, 2)
    odd = []
    for j in nodes:
        w = Fraction(1)
        for m in nodes:
            if m != j:
                w *= (half - m) / (j - m)
        odd.append((j, w))
    return Scheme(((0, Fraction(1)),), tuple(odd), "DD:2n=%d" % points)


def scheme_from_spec(spec) -> Scheme:
    """Parse ``"lr:<p>"`` / ``"dd:<2n>"`` (a Scheme passes through)."""
    if isinstance(spec, Scheme):
        return spec
    if isinstance(spec, dict):
        return Scheme.from_dict(spec)
    kind, _, arg = str(spec).strip().lower().partition(":")
    try:
        value = int(arg)
    except ValueError:
        raise SchemeError("bad scheme spec %r (expected lr:<p> or dd:<2n>)" % spec)
    if kind == "lr":
        return lr_scheme(value)
    if kind == "dd":
        return dd_scheme(value)
    raise SchemeError("unknown scheme kind %r in %r" % (kind, spec))


# -- re-indexing ---------------------------------------------------------------

def reindex(s: Scheme, m: int, label: str | None = None) -> Scheme:
    """Scheme ``S'`` with ``(S'x)[k] = (Sx)[k - m]``; its shift is ``c - m/2``."""
    mask = {r + m: c for r, c in s.mask().items()}
    return Scheme.from_mask(mask, label if label is not None else s.label)


def centering_offset(s: Scheme) -> int:
    """Integer ``m`` such that ``reindex(s, m)`` has shift 0 or 1/4."""
    c = s.shift
    if c is None:
        raise NonCenterable("%s has no shift parameter" % (s.label or "scheme"))
    for target in (Fraction(0), Fraction(1, 4)):
        twice = 2 * (c - target)
        if twice.denominator == 1:
            return int(twice)
    raise NonCenterable("shift %s of %s cannot be moved to 0 or 1/4 by an "
                        "integer re-index" % (c, s.label or "scheme"))


def center(s: Scheme) -> Scheme:
    m = centering_offset(s)
    if m == 0:
        return s
    return reindex(s, m, "centered(%s)" % s.label)


def shift_of(s: Scheme) -> Fraction:
    """Shift parameter measured on the linear ramp ``x[i] = i``."""
    return _measure_shift(s.even, s.odd)


# -- application ---------------------------------------------------------------

def apply(s: Scheme, x, drift=None, exact: bool = False):
    """One refinement step on one period of ``x``.

    ``x`` has period ``N`` (``len(x)``); with ``drift`` the sequence is
    extended as ``x[i + N] = x[i] + drift`` (arc-length sequences).  Float
    arrays of shape ``(N,)`` or ``(N, d)`` are refined in floating point;
    with ``exact=True`` (or a list of Fractions/ints) the computation is done
    in rationals and a list is returned.
    """
    if exact or (isinstance(x, (list, tuple)) and x
                 and isinstance(x[0], (int, Fraction))):
        return _apply_exact(s, list(x), drift)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if n < s.width:
        raise PeriodTooSmall("period %d smaller than stencil width %d of %s"
                             % (n, s.width, s.label))
    out = np.zeros((2 * n,) + x.shape[1:])
    base = np.arange(n)
    for parity, (offs, wts) in enumerate(s.float_stencils()):
        acc = out[parity::2]
        for o, w in zip(offs, wts):
            q, idx = np.divmod(base + o, n)
            term = x[idx]
            if drift is not None:
                term = term + (q * drift if term.ndim == 1
                               else np.multiply.outer(q, drift))
            acc += w * term
    return out


def _apply_exact(s: Scheme, x: list, drift) -> list:
    n = len(x)
    if n < s.width:
        raise PeriodTooSmall("period %d smaller than stencil width %d of %s"
                             % (n, s.width, s.label))
    d = Fraction(0) if drift is None else Fraction(drift)
    out = []
    for i in range(n):
        for stencil in (s.even, s.odd):
            acc = Fraction(0)
            for o, c in stencil:
                q, idx = divmod(i + o, n)
                acc += c * (Fraction(x[idx]) + q * d)
            out.append(acc)
    return out


def _image_on_window(s: Scheme, values: dict[int, Fraction], lo: int, hi: int):
    """Exact ``(Sx)[K]`` for all K whose stencil stays inside ``[lo, hi]``."""
    omin, omax = s.offsets
    image = {}
    for i in range(lo - omin, hi - omax + 1):
        for parity, stencil in enumerate((s.even, s.odd)):
            image[2 * i + parity] = sum(c * values[i + o] for o, c in stencil)
    return image


def derived(s: Scheme) -> Scheme:
    """First derived scheme ``S1`` with ``Delta(Sx) = S1(Delta x)``.

    With mask symbols ``A(z)`` of ``S`` and ``B(z)`` of ``S1`` the defining
    identity is ``B(z) = z A(z) / (1 + z)``; the division must be exact.
    """
    mask = s.mask()
    rmin, rmax = min(mask), max(mask)
    coeffs = [mask.get(r, Fraction(0)) for r in range(rmin, rmax + 1)]
    if len(coeffs) < 2:
        raise NoDerivedScheme("%s has a single mask entry" % s.label)
    q = [coeffs[0]]
    for c in coeffs[1:-1]:
        q.append(c - q[-1])
    if coeffs[-1] != q[-1]:
        raise NoDerivedScheme("mask of %s is not divisible by (1+z); "
                              "constants are not reproduced" % (s.label or "scheme"))
    bmask = {rmin + 1 + k: c for k, c in enumerate(q) if c != 0}
    return Scheme.from_mask(bmask, "derived(%s)" % s.label)


# -- polynomial reproduction ----------------------------------------------------

@dataclass(frozen=True)
class ReproductionReport:
    """``S(t^n|Z) = (u^n + q(u))`` at ``u = K/2 + c``.

    ``residual`` holds the coefficients of ``q`` in ascending order
    (length ``degree``); ``exact`` is true when ``q`` vanishes.
    """

    degree: int
    residual: tuple[Fraction, ...]
    exact: bool

    def residual_at(self, u) -> Fraction:
        return sum(c * Fraction(u) ** k for k, c in enumerate(self.residual))


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] / m[r][r] for r in range(n)]


def reproduction_report(s: Scheme, n: int) -> ReproductionReport:
    """Apply ``s`` to exact samples of ``t^n`` and fit the image.

    The image values at fine indices ``K`` are fitted by a polynomial of
    degree ``n`` in ``u = K/2 + c`` through ``n + 1`` points and verified on
    every remaining point of the window.
    """
    if n < 0:
        raise SchemeError("degree must be nonnegative")
    c = s.shift
    if c is None:
        raise NotExactlyLinear("%s does not reproduce linears" % s.label)
    half_w = n + s.width + 3
    values = {i: Fraction(i) ** n for i in range(-half_w, half_w + 1)}
    image = _image_on_window(s, values, -half_w, half_w)
    ks = sorted(image)
    us = [Fraction(k, 2) + c for k in ks]
    fit_idx = list(range(n + 1))
    coeffs = _solve_exact([[us[i] ** e for e in range(n + 1)] for i in fit_idx],
                          [image[ks[i]] for i in fit_idx])
    for u, k in zip(us, ks):
        if sum(a * u ** e for e, a in enumerate(coeffs)) != image[k]:
            raise FitFailure("image of t^%d under %s is not a polynomial of "
                             "degree <= %d in K/2 + c" % (n, s.label, n))
    if coeffs[n] != 1:
        raise FitFailure("%s does not reproduce the leading term of t^%d "
                         "(coefficient %s)" % (s.label, n, coeffs[n]))
    residual = tuple(coeffs[:n])
    return ReproductionReport(n, residual, all(q == 0 for q in residual))


def reproduction_coefficient(p: int, n: int, k: int) -> Fraction:
    """Closed form of ``A_k`` in ``S_p(t^n|Z) = t^n + A_2 t^(n-2) + ...``.

    Only ``k`` in {2, 4, 6} have known closed forms.
    """
    p = Fraction(p)
    base = {2: p + 1, 4: (3 * p + 1) * (p + 1), 6: (15 * p * p + 1) * (p + 1)}
    if k not in base:
        raise ValueError("closed form known only for k in (2, 4, 6)")
    return Fraction(comb(n, k), 4 ** k) * base[k]


def shifted_power_image(s: Scheme, alpha, n: int) -> dict[int, Fraction]:
    """Exact image of ``((t + alpha)^n)|Z`` under ``s`` on a small window."""
    a = Fraction(alpha)
    w = n + s.width + 3
    values = {i: (i + a) ** n for i in range(-w, w + 1)}
    return _image_on_window(s, values, -w, w)


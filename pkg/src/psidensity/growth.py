"""Order, lower order and type of non-decreasing functions, plus the
zig-zag construction that realizes a prescribed (lower order, order) pair.

Zig-zags are built in (x, y) = (log r, log T) coordinates as piecewise
linear paths: a rising segment of slope L until y/x reaches L - delta_n,
then a flat segment until y/x falls back to ell, and so on, with
delta_n -> 0.  Breakpoints are closed-form, so the ratio trajectory -- and
every level set of it -- is known exactly; growth verification at radii
like e^(10^300) never leaves log coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainMismatchError, PreconditionError
from .functions import FuncFn, ScalarFn
from .radius import as_logr

INF_ORDER_CAP = 1e6  # a ratio beyond this before the horizon means "infinite"

# delta-sequence presets (1-based n)
DELTA_RULES: dict[str, Callable[[int], float]] = {
    "harmonic": lambda n: 1.0 / (n + 1),
}


def geometric_delta(first: float, q: float) -> Callable[[int], float]:
    return lambda n: first * q ** (n - 1)


@dataclass(frozen=True)
class ZigzagSpec:
    """Parameters of a zig-zag path; breakpoints are generated on demand."""

    ell: float
    L: float                       # math.inf for the unbounded variant
    x0: float
    delta: Optional[Callable[[int], float]] = field(default=None, compare=False)
    # unbounded variant: target ratio ell*q^n reached with slope factor*target
    ratio_growth: float = 2.0
    slope_factor: float = 4.0
    max_cycles: int = 2000

    def breakpoints(self, x_hi: float) -> tuple[np.ndarray, np.ndarray]:
        """Breakpoints (xs, ys) covering [x0, x_hi] plus one spare cycle."""
        xs = [self.x0]
        ys = [self.ell * self.x0]
        n = 1
        while xs[-1] <= x_hi and n <= self.max_cycles:
            x, y = xs[-1], ys[-1]
            if math.isinf(self.L):
                target = self.ell * self.ratio_growth ** n
                slope = self.slope_factor * target
            else:
                d = self.delta(n)
                if not 0 < d < self.L - self.ell:
                    raise DomainMismatchError(
                        f"delta_{n}={d} escapes (0, L-ell)=(0, {self.L - self.ell})")
                target = self.L - d
                slope = self.L
            # rising segment: solve (y + slope (x'-x))/x' = target
            x_rise = (slope * x - y) / (slope - target)
            y_rise = y + slope * (x_rise - x)
            # flat segment: y stays, ratio decays to ell
            x_flat = y_rise / self.ell
            if not (x_rise > x and x_flat > x_rise) or math.isinf(x_flat):
                break  # float range exhausted; caller sees what exists
            xs.extend((x_rise, x_flat))
            ys.extend((y_rise, y_rise))
            n += 1
        return np.array(xs), np.array(ys)


class GrowthFunction(ScalarFn):
    """A positive, non-decreasing, unbounded function of r.

    Backed either by a zig-zag spec (exact breakpoints, usable at any log
    radius) or by a generic ScalarFn (usable while r fits in a float).
    """

    def __init__(self, fn: Optional[ScalarFn] = None,
                 zig: Optional[ZigzagSpec] = None, name: str = "T",
                 log_fn_x: Optional[Callable] = None):
        if (fn is None) == (zig is None) and log_fn_x is None:
            raise DomainMismatchError("provide exactly one of fn or zig")
        self.fn = fn
        self.zig = zig
        self.log_fn_x = log_fn_x  # exact y(x) = log T(e^x) when available
        self.name = name
        self.monotone_checked = False
        self._cache: Optional[tuple[float, np.ndarray, np.ndarray]] = None

    # -- zig-zag plumbing ---------------------------------------------------

    def _bps(self, x_hi: float) -> tuple[np.ndarray, np.ndarray]:
        if self._cache is None or self._cache[0] < x_hi:
            xs, ys = self.zig.breakpoints(x_hi)
            self._cache = (x_hi, xs, ys)
        return self._cache[1], self._cache[2]

    @property
    def x0(self) -> float:
        return self.zig.x0 if self.zig else 0.0

    # -- evaluation -----------------------------------------------------------

    def log_T_at_logx(self, x):
        """y(x) = log T(e^x); exact for zig-zags, via fn otherwise."""
        if self.zig is not None:
            hi = float(np.max(x)) if np.ndim(x) else float(x)
            xs, ys = self._bps(hi)
            if xs[-1] < hi:
                raise DomainMismatchError(
                    f"zig-zag exhausts float range before x={hi:g}")
            return np.interp(x, xs, ys)
        if self.log_fn_x is not None:
            return self.log_fn_x(np.asarray(x, dtype=float) if np.ndim(x) else x)
        with np.errstate(all="ignore"):
            return np.log(self.fn(np.exp(x)))

    def ratio_at_logx(self, x):
        """y(x)/x, the quantity whose limsup/liminf are order/lower order."""
        return self.log_T_at_logx(x) / x

    def __call__(self, r):
        if self.fn is not None:
            return self.fn(r)
        with np.errstate(over="ignore"):
            return np.exp(self.log_T_at_logx(np.log(r)))

    def sample_hints(self, r_lo, r_hi):
        return self.fn.sample_hints(r_lo, r_hi) if self.fn is not None else []

    def powered(self, c: float) -> "GrowthFunction":
        """T^c; for zig-zags this scales y, ell, L and every delta by c."""
        if self.zig is None:
            inner = self.fn
            return GrowthFunction(fn=FuncFn(lambda r: inner(r) ** c,
                                            name=f"({self.name})^{c:g}"))
        z = self.zig
        scaled = ZigzagSpec(
            ell=c * z.ell, L=c * z.L, x0=z.x0,
            delta=(None if math.isinf(z.L) else (lambda n: c * z.delta(n))),
            ratio_growth=z.ratio_growth, slope_factor=z.slope_factor,
            max_cycles=z.max_cycles)
        return GrowthFunction(zig=scaled, name=f"({self.name})^{c:g}")


def make_zigzag(ell: float, L: float, x0: float = 1.0,
                delta: Callable[[int], float] | str | None = None
                ) -> GrowthFunction:
    """Zig-zag with lower order ell and order L (delta_n -> 0 drives the
    rise-end ratios L - delta_n up to L)."""
    if not (0 < ell < L):
        raise DomainMismatchError(f"need 0 < ell < L, got ell={ell}, L={L}")
    if math.isinf(L):
        raise DomainMismatchError("use make_unbounded_zigzag for L = inf")
    if not x0 > 0:
        raise DomainMismatchError(f"need x0 > 0, got {x0}")
    if delta is None:
        delta = DELTA_RULES["harmonic"]
    elif isinstance(delta, str):
        delta = DELTA_RULES[delta]
    d1 = delta(1)
    if not 0 < d1 < L - ell:
        raise DomainMismatchError(
            f"delta_1={d1} escapes (0, L-ell)=(0, {L - ell})")
    zig = ZigzagSpec(ell=float(ell), L=float(L), x0=float(x0), delta=delta)
    return GrowthFunction(zig=zig, name=f"zigzag({ell:g},{L:g})")


def make_unbounded_zigzag(ell: float = 1.0, x0: float = 1.0,
                          ratio_growth: float = 2.0,
                          slope_factor: float = 4.0) -> GrowthFunction:
    """Zig-zag of infinite order: cycle n rises (ever more steeply) until
    y/x = ell * ratio_growth^n, then flattens back to ell."""
    if not (ell > 0 and x0 > 0 and ratio_growth > 1 and slope_factor > 1):
        raise DomainMismatchError("bad unbounded zig-zag parameters")
    zig = ZigzagSpec(ell=float(ell), L=math.inf, x0=float(x0),
                     ratio_growth=float(ratio_growth),
                     slope_factor=float(slope_factor))
    return GrowthFunction(zig=zig, name=f"zigzag({ell:g},inf)")


def growth_from_fn(fn: ScalarFn, name: str = "") -> GrowthFunction:
    return GrowthFunction(fn=fn, name=name or getattr(fn, "name", "T"))


def power_growth(c: float) -> GrowthFunction:
    """T(r) = r^c with y(x) = c x carried exactly at any log radius."""
    if not c > 0:
        raise DomainMismatchError(f"exponent must be positive, got {c}")
    return GrowthFunction(fn=FuncFn(lambda r: r ** c, name=f"t^{c:g}"),
                          log_fn_x=lambda x: c * np.multiply(x, 1.0),
                          name=f"t^{c:g}")


# -- ratio level-set predicates ---------------------------------------------------


class RatioPredicate(ScalarFn):
    """sign(y(x) - c x) (or its negation): the level set {ratio > c} resp.
    {ratio < c}.  Linear on each zig-zag segment, so extraction is exact."""

    def __init__(self, gf: GrowthFunction, c: float, above: bool):
        self.gf = gf
        self.c = float(c)
        self.above = above
        self.name = f"ratio{'>' if above else '<'}{c:g}"

    def at_logr(self, x):
        g = self.gf.log_T_at_logx(x) - self.c * np.asarray(x, dtype=float)
        return g if self.above else -g

    def __call__(self, r):
        return self.at_logr(np.log(r))

    def linear_pieces_x(self, x_hi: float):
        if self.gf.zig is None:
            raise AttributeError("no exact pieces for generic growth functions")
        xs, ys = self.gf._bps(x_hi)
        segs = []
        sgn = 1.0 if self.above else -1.0
        for i in range(len(xs) - 1):
            if xs[i] >= x_hi:
                break
            slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
            g0 = sgn * (ys[i] - self.c * xs[i])
            segs.append((xs[i], xs[i + 1], g0, sgn * (slope - self.c)))
        return segs


def ratio_above(gf: GrowthFunction, c: float) -> RatioPredicate:
    return RatioPredicate(gf, c, above=True)


def ratio_below(gf: GrowthFunction, c: float) -> RatioPredicate:
    return RatioPredicate(gf, c, above=False)


# -- order and type estimation -----------------------------------------------------


@dataclass(frozen=True)
class OrderEstimate:
    upper_order: Optional[float]       # None when flagged infinite
    lower_order: float
    upper_infinite: bool
    ratio_at_cutoff: float
    cutoff_x: float
    tail_window: int
    eval_points: int
    lower_infinite: bool = False
    type_value: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "upper_order": self.upper_order,
            "lower_order": None if self.lower_infinite else self.lower_order,
            "upper_infinite": self.upper_infinite,
            "lower_infinite": self.lower_infinite,
            "ratio_at_cutoff": self.ratio_at_cutoff,
            "cutoff_log_r": self.cutoff_x,
            "tail_window": self.tail_window,
            "eval_points": self.eval_points,
        }


def _escapes_float_range(gf: GrowthFunction, x_lo: float, x_hi: float,
                         points: int = 1000) -> Optional[float]:
    """If T overflows floats inside the horizon (its ratio exceeds every
    bound before the cutoff), return the last finite ratio as evidence."""
    xs = np.linspace(x_lo, x_hi, points)
    vals = np.asarray(gf.log_T_at_logx(xs), dtype=float)
    pos_inf = np.isposinf(vals)
    if not pos_inf.any():
        return None
    finite = np.isfinite(vals)
    if not finite.any() or np.any(np.isnan(vals)):
        raise PreconditionError("T <= 0 or undefined at a sampled point")
    if np.any(np.diff(vals[finite]) < -1e-9 * np.maximum(np.abs(vals[finite][:-1]), 1.0)):
        raise PreconditionError("T is not non-decreasing before escaping")
    last = int(np.nonzero(finite)[0][-1])
    return float(vals[last] / xs[last])


def _spot_check_growth(gf: GrowthFunction, x_lo: float, x_hi: float,
                       points: int = 1000) -> None:
    """T must be positive and non-decreasing on a log-spaced grid."""
    xs = np.linspace(x_lo, min(x_hi, 700.0), points)
    vals = np.asarray(gf.log_T_at_logx(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("T <= 0 or undefined at a sampled point")
    drops = np.diff(vals) < -1e-9 * np.maximum(np.abs(vals[:-1]), 1.0)
    if drops.any():
        i = int(np.nonzero(drops)[0][0])
        raise PreconditionError(
            f"T is not non-decreasing near x=log r={xs[i]:.6g}")
    gf.monotone_checked = True


def estimate_orders(gf: GrowthFunction, cutoff, tail_window: int = 8
                    ) -> OrderEstimate:
    """Trailing-window estimates of order and lower order.

    Zig-zags contribute their breakpoint ratios exactly; generic functions
    are scanned on a log-spaced grid, with each discrete-slope sign change
    refined by golden-section search.
    """
    cx = as_logr(cutoff)
    if gf.zig is not None:
        return _orders_from_zigzag(gf, cx, tail_window)
    return _orders_from_grid(gf, cx, tail_window)


def _orders_from_zigzag(gf: GrowthFunction, cx: float, w: int) -> OrderEstimate:
    xs, ys = gf._bps(cx)
    if xs[-1] < cx:
        raise DomainMismatchError("zig-zag exhausts float range before cutoff")
    ratios = ys / xs
    # breakpoints alternate: start, rise-end, flat-end, rise-end, ...
    rise_idx = [i for i in range(1, len(xs), 2) if xs[i] <= cx]
    flat_idx = [i for i in range(2, len(xs), 2) if xs[i] <= cx]
    r_cut = float(np.interp(cx, xs, ys) / cx)
    highs = [float(ratios[i]) for i in rise_idx[-w:]] + [r_cut]
    lows = [float(ratios[i]) for i in flat_idx[-w:]] + [r_cut]
    upper = max(highs)
    infinite = upper > INF_ORDER_CAP
    return OrderEstimate(
        upper_order=None if infinite else upper,
        lower_order=min(lows),
        upper_infinite=infinite,
        ratio_at_cutoff=r_cut,
        cutoff_x=cx,
        tail_window=w,
        eval_points=len(rise_idx) + len(flat_idx) + 1,
    )


def _golden(fobj: Callable[[float], float], lo: float, hi: float,
            maximize: bool, iters: int = 60) -> tuple[float, float]:
    """Golden-section extremum of a locally unimodal function."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    sign = 1.0 if maximize else -1.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = sign * fobj(c), sign * fobj(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = sign * fobj(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = sign * fobj(d)
        if b - a <= 1e-12 * max(abs(a), 1.0):
            break
    xm = 0.5 * (a + b)
    return xm, sign * max(fc, fd)


def _grid_extrema(fobj: Callable, x_lo: float, x_hi: float, points: int = 2048
                  ) -> tuple[list[tuple[float, float]], list[tuple[float, float]]]:
    """Local maxima/minima of fobj located from a dense grid plus
    golden-section refinement between discrete-slope sign changes."""
    xs = np.linspace(x_lo, x_hi, points)
    vals = np.asarray(fobj(xs), dtype=float)
    d = np.diff(vals)
    sgn = np.sign(d)
    nz = sgn != 0
    maxima, minima = [], []
    prev_sign = 0.0
    prev_idx = 0
    scalar = lambda x: float(fobj(np.array([x]))[0])
    for i in np.nonzero(nz)[0]:
        s = sgn[i]
        if prev_sign > 0 and s < 0:
            x, v = _golden(scalar, xs[prev_idx], xs[i + 1], maximize=True)
            maxima.append((x, v))
        elif prev_sign < 0 and s > 0:
            x, v = _golden(scalar, xs[prev_idx], xs[i + 1], maximize=False)
            minima.append((x, v))
        prev_sign, prev_idx = s, i
    return maxima, minima


def _orders_from_grid(gf: GrowthFunction, cx: float, w: int) -> OrderEstimate:
    x_lo = max(gf.x0, 1e-6) + 1e-9
    if cx > 700 and gf.log_fn_x is None:
        raise DomainMismatchError(
            "generic growth functions need r within float range; "
            "use a zig-zag for larger horizons")
    escape = _escapes_float_range(gf, x_lo, min(cx, 700.0))
    if escape is not None:
        return OrderEstimate(
            upper_order=None, lower_order=math.inf, upper_infinite=True,
            lower_infinite=True, ratio_at_cutoff=escape, cutoff_x=cx,
            tail_window=w, eval_points=0)
    _spot_check_growth(gf, x_lo, cx)
    fobj = lambda x: gf.log_T_at_logx(x) / x
    maxima, minima = _grid_extrema(fobj, x_lo + (cx - x_lo) * 1e-3, cx)
    r_cut = float(gf.log_T_at_logx(cx) / cx)
    highs = [v for _, v in maxima[-w:]] + [r_cut]
    lows = [v for _, v in minima[-w:]] + [r_cut]
    upper = max(highs)
    infinite = upper > INF_ORDER_CAP
    return OrderEstimate(
        upper_order=None if infinite else upper,
        lower_order=min(lows),
        upper_infinite=infinite,
        ratio_at_cutoff=r_cut,
        cutoff_x=cx,
        tail_window=w,
        eval_points=len(maxima) + len(minima) + 1,
    )


def estimate_type(gf: GrowthFunction, rho: float, cutoff,
                  tail_window: int = 8) -> float:
    """Trailing-window max of T(r)/r^rho; math.inf if it escapes floats."""
    if not 0 < rho < math.inf:
        raise PreconditionError(f"rho must be in (0, inf), got {rho}")
    cx = as_logr(cutoff)
    if gf.zig is not None:
        xs, ys = gf._bps(cx)
        mask = xs <= cx
        exponents = ys[mask] - rho * xs[mask]
        exponents = np.append(exponents,
                              float(np.interp(cx, xs, ys)) - rho * cx)
        tail = exponents[-(2 * tail_window + 1):]
        m = float(np.max(tail))
        return math.inf if m > 700 else float(math.exp(m))
    if cx > 700:
        raise DomainMismatchError("generic type estimation needs r in float range")
    x_lo = max(gf.x0, 1e-6) + 1e-9
    _spot_check_growth(gf, x_lo, cx)
    fobj = lambda x: gf.log_T_at_logx(x) - rho * np.asarray(x, dtype=float)
    maxima, _ = _grid_extrema(fobj, x_lo + (cx - x_lo) * 1e-3, cx)
    cands = [v for _, v in maxima[-tail_window:]]
    cands.append(float(gf.log_T_at_logx(cx)) - rho * cx)
    m = max(cands)
    return math.inf if m > 700 else float(math.exp(m))

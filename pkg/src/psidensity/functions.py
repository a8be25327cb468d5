"""Evaluatable real functions of one radial variable.

Everything downstream (densities, growth metrics, quadrature) consumes this
small protocol rather than raw callables: values must be computable both at
r and at x = log r, vectorized over numpy arrays, and a function may expose
*sample hints* -- points its own structure marks as interesting (spike
locations, breakpoints) -- which grid-based scanners fold into their
evaluation points so that features narrower than any grid are not missed.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from . import expr as _expr


class ScalarFn:
    """Base: a real function of r > 0; subclasses override __call__."""

    name = "fn"

    def __call__(self, r):
        raise NotImplementedError

    def at_logr(self, x):
        """Value at r = e^x; default goes through r and needs x < ~709."""
        return self(np.exp(x))

    def sample_hints(self, r_lo: float, r_hi: float) -> list[float]:
        """Radii worth sampling explicitly in [r_lo, r_hi]; default none."""
        return []

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ExpressionFn(ScalarFn):
    """A parsed arithmetic expression in t."""

    def __init__(self, source):
        self.expression = source if isinstance(source, _expr.Expression) else _expr.parse(source)
        self.name = self.expression.source_text

    def __call__(self, r):
        return self.expression(r)


class FuncFn(ScalarFn):
    """Wrap a plain (numpy-compatible) python callable."""

    def __init__(self, fn: Callable, name: str = "fn",
                 hints: Optional[Callable[[float, float], list]] = None):
        self._fn = fn
        self.name = name
        self._hints = hints

    def __call__(self, r):
        return self._fn(r)

    def sample_hints(self, r_lo, r_hi):
        return list(self._hints(r_lo, r_hi)) if self._hints else []


class LogrFn(ScalarFn):
    """A function given natively in x = log r; safe at astronomic radii."""

    def __init__(self, fn_x: Callable, name: str = "fn",
                 hints_x: Optional[Callable[[float, float], list]] = None):
        self._fn_x = fn_x
        self.name = name
        self._hints_x = hints_x

    def at_logr(self, x):
        return self._fn_x(x)

    def __call__(self, r):
        return self._fn_x(np.log(r))

    def sample_hints(self, r_lo, r_hi):
        if self._hints_x is None:
            return []
        return [math.exp(x) for x in self._hints_x(math.log(r_lo), math.log(r_hi))]


class ConstFn(ScalarFn):
    def __init__(self, c: float):
        self.c = float(c)
        self.name = f"{c:g}"

    def __call__(self, r):
        return np.full_like(r, self.c, dtype=float) if np.ndim(r) else self.c

    def at_logr(self, x):
        return np.full_like(x, self.c, dtype=float) if np.ndim(x) else self.c


class SpikeTrainFn(ScalarFn):
    """1 on [n, n + 2^-n] for integers n >= 1, else 0.

    The classic example of a function with no limit whose spikes carry
    summable total length.  Spikes narrower than float resolution collapse
    onto the integer itself (closed left end keeps the value 1 there).
    """

    name = "eq51"

    def __call__(self, r):
        if np.ndim(r):
            r = np.asarray(r, dtype=float)
            n = np.floor(r)
            with np.errstate(under="ignore"):
                width = np.exp2(-np.minimum(n, 1080.0))
            return ((n >= 1) & (r - n <= width)).astype(float)
        n = math.floor(r)
        if n < 1:
            return 0.0
        width = 2.0 ** -min(n, 1080)
        return 1.0 if r - n <= width else 0.0

    def sample_hints(self, r_lo, r_hi):
        lo = max(1, int(math.floor(r_lo)))
        hi = int(math.ceil(r_hi))
        if hi - lo > 200000:
            raise ValueError("spike-train hint range too large")
        out = []
        for n in range(lo, hi + 1):
            if r_lo <= n <= r_hi:
                w = 2.0 ** -n if n < 1075 else 0.0
                out.append(n + w / 2 if n + w / 2 > n else float(n))
        return out


def transform(f: ScalarFn, g: Callable, name: str) -> ScalarFn:
    """Pointwise post-map keeping f's sample hints (e.g. |f - l|)."""
    return FuncFn(lambda r: g(f(r)), name=name, hints=f.sample_hints)


def shift_arg(f: ScalarFn, factor: float, name: str = "") -> ScalarFn:
    """r -> f(factor * r)."""
    return FuncFn(lambda r: f(factor * r), name=name or f"{f.name}({factor:g}t)")


BUILTIN_FNS = {
    "eq51": SpikeTrainFn,
}


def parse_fn_spec(text: str) -> ScalarFn:
    """CLI function syntax: a builtin name (eq51) or an expression in t."""
    t = text.strip()
    if t in BUILTIN_FNS:
        return BUILTIN_FNS[t]()
    return ExpressionFn(t)

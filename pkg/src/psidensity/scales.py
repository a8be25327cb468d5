"""Scale functions psi used to weigh subsets of (r0, R).

A scale here is positive, unbounded, differentiable and strictly increasing
on its domain, comes with an exact derivative and inverse, and additionally
evaluates from log-r coordinates (``value_x``) so that radii far beyond
float range stay usable.  Scales are a closed set of builtins: parsed user
expressions cannot provide trustworthy inverses or derivatives.

The exponential lift e^psi is first-class: density arithmetic for lifted
scales factors out e^(psi(cutoff)) and never forms e^psi itself, which is
what makes linear densities of sets living at r ~ e^(10^6) computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainMismatchError
from .radius import Radius, as_logr

KINDS = ("linear", "log", "loglog", "powlog", "neglog1m", "explift")

_E = math.e


@dataclass(frozen=True)
class Domain:
    """Open interval (r0, R) of the radial axis, in log coordinates."""

    x0: float          # log r0
    x1: float          # log R; +inf when R is infinite, 0.0 when R = 1

    @classmethod
    def from_r(cls, r0: float, R: float) -> "Domain":
        if not (r0 > 0 and R > r0):
            raise DomainMismatchError(f"need 0 < r0 < R, got r0={r0}, R={R}")
        return cls(math.log(r0), math.inf if math.isinf(R) else math.log(R))

    @property
    def r0(self) -> float:
        return math.exp(self.x0)

    @property
    def R(self) -> float:
        return math.inf if math.isinf(self.x1) else math.exp(self.x1)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.x1)

    def contains_x(self, x: float) -> bool:
        return self.x0 < x < self.x1


@dataclass(frozen=True)
class PsiScale:
    kind: str
    domain: Domain
    beta: Optional[float] = None
    base: Optional["PsiScale"] = None  # set when this scale is e^(base)

    # -- evaluation in r ---------------------------------------------------

    def value_r(self, r):
        """psi(r).  Accepts scalars or numpy arrays."""
        k = self.kind
        if k == "linear":
            return r
        if k == "log":
            return np.log(r)
        if k == "loglog":
            return np.log(np.log(r))
        if k == "powlog":
            return np.log(r) ** self.beta
        if k == "neglog1m":
            return -np.log1p(-np.asarray(r)) if np.ndim(r) else -math.log1p(-r)
        if k == "explift":
            return np.exp(self.base.value_r(r))
        raise AssertionError(k)

    def derivative_r(self, r):
        """psi'(r).  Accepts scalars or numpy arrays."""
        k = self.kind
        if k == "linear":
            return np.ones_like(r, dtype=float) if np.ndim(r) else 1.0
        if k == "log":
            return 1.0 / np.asarray(r, dtype=float) if np.ndim(r) else 1.0 / r
        if k == "loglog":
            return 1.0 / (r * np.log(r))
        if k == "powlog":
            return self.beta * np.log(r) ** (self.beta - 1.0) / r
        if k == "neglog1m":
            return 1.0 / (1.0 - r)
        if k == "explift":
            return self.base.derivative_r(r) * np.exp(self.base.value_r(r))
        raise AssertionError(k)

    def inverse_r(self, v):
        """psi^{-1}(v) as a plain radius (may overflow for huge v)."""
        k = self.kind
        if k == "linear":
            return v
        if k == "log":
            return np.exp(v)
        if k == "loglog":
            return np.exp(np.exp(v))
        if k == "powlog":
            return np.exp(v ** (1.0 / self.beta))
        if k == "neglog1m":
            return -np.expm1(-v) if np.ndim(v) else -math.expm1(-v)
        if k == "explift":
            return self.base.inverse_r(np.log(v))
        raise AssertionError(k)

    # -- evaluation in x = log r --------------------------------------------

    def value_x(self, x):
        """psi(e^x); stable wherever psi itself fits in a float (saturates
        to +inf past that, which only lifted-density code ever reaches)."""
        k = self.kind
        with np.errstate(over="ignore"):
            if k == "linear":
                return np.exp(x)
            if k == "log":
                return np.multiply(x, 1.0)
            if k == "loglog":
                return np.log(x)
            if k == "powlog":
                return np.float_power(x, self.beta)
            if k == "neglog1m":
                m = -np.expm1(x) if np.ndim(x) else -math.expm1(x)  # = 1 - r
                return -np.log(m) if np.ndim(x) else -math.log(m)
            if k == "explift":
                return np.exp(self.base.value_x(x))
        raise AssertionError(k)

    def log_value_x(self, x):
        """log psi(e^x); the representation used for e^psi densities."""
        k = self.kind
        if k == "linear":
            return np.multiply(x, 1.0)
        if k == "explift":
            return self.base.value_x(x)
        return np.log(self.value_x(x))

    def inverse_x(self, v):
        """log psi^{-1}(v); stays in log coordinates for huge values."""
        k = self.kind
        if k == "linear":
            return np.log(v)
        if k == "log":
            return np.multiply(v, 1.0)
        if k == "loglog":
            return np.exp(v)
        if k == "powlog":
            return np.float_power(v, 1.0 / self.beta)
        if k == "neglog1m":
            return np.log1p(-np.exp(-v)) if np.ndim(v) else math.log1p(-math.exp(-v))
        if k == "explift":
            return self.base.inverse_x(np.log(v))
        raise AssertionError(k)

    # -- bookkeeping ---------------------------------------------------------

    @property
    def uses_exp_arithmetic(self) -> bool:
        """True when psi = e^(something); densities then work on log psi."""
        return self.kind in ("explift", "linear")

    @property
    def name(self) -> str:
        if self.base is not None and self.kind == "linear":
            return f"exp:{self.base.name}"
        if self.kind == "explift":
            return f"exp:{self.base.name}"
        if self.kind == "powlog":
            return f"powlog:{self.beta:g}"
        return self.kind

    def scale_eval(self, which: str, v: float) -> float:
        """Dispatch forward / derivative / inverse evaluation at a point."""
        if which == "forward":
            return float(self.value_r(v))
        if which == "derivative":
            return float(self.derivative_r(v))
        if which == "inverse":
            return float(self.inverse_r(v))
        raise DomainMismatchError(f"unknown evaluation mode {which!r}")


def make_scale(kind: str, r0: float | None = None, R: float | None = None,
               beta: float | None = None) -> PsiScale:
    """Construct a builtin scale on (r0, R), validating kind-specific limits.

    Positivity on the open interval forces the left endpoint: log needs
    r0 >= 1, loglog needs r0 >= e, powlog needs r0 >= 1.  neglog1m lives on
    (r0, 1); every other kind needs R = +inf to be unbounded.
    """
    if kind == "explift":
        raise DomainMismatchError("build lifted scales with exp_lift()")
    if kind not in KINDS:
        raise DomainMismatchError(f"unknown scale kind {kind!r}")

    defaults = {"linear": 1.0, "log": 1.0, "loglog": _E, "powlog": 1.0,
                "neglog1m": 0.5}
    if r0 is None:
        r0 = defaults[kind]
    if R is None:
        R = 1.0 if kind == "neglog1m" else math.inf

    if kind == "neglog1m":
        if R != 1.0:
            raise DomainMismatchError("neglog1m requires R = 1")
        if not 0 < r0 < 1:
            raise DomainMismatchError(f"neglog1m needs r0 in (0,1), got {r0}")
    else:
        if not math.isinf(R):
            raise DomainMismatchError(f"{kind} is bounded on (r0, {R}); R must be +inf")
        minima = {"linear": 0.0, "log": 1.0, "loglog": _E, "powlog": 1.0}
        if r0 <= 0 or r0 < minima[kind] * (1 - 1e-12):
            raise DomainMismatchError(
                f"{kind} is not positive on ({r0}, inf); need r0 >= {minima[kind]:g}")

    if kind == "powlog":
        if beta is None or beta <= 0:
            raise DomainMismatchError(f"powlog needs beta > 0, got {beta}")
    elif beta is not None:
        raise DomainMismatchError(f"{kind} takes no beta parameter")

    return PsiScale(kind=kind, domain=Domain.from_r(r0, R), beta=beta)


def exp_lift(s: PsiScale) -> PsiScale:
    """The scale e^(psi).  For psi = log this is exactly the linear scale."""
    if s.base is not None:
        raise DomainMismatchError("scale is already a lift; one level suffices")
    if s.kind == "log":
        return PsiScale(kind="linear", domain=s.domain, base=s)
    return PsiScale(kind="explift", domain=s.domain, base=s)


def parse_psi_spec(text: str) -> PsiScale:
    """CLI scale syntax: linear | log | loglog | powlog:<beta> | neglog1m | exp:<name>."""
    t = text.strip()
    if t.startswith("exp:"):
        return exp_lift(parse_psi_spec(t[4:]))
    if ":" in t:
        name, _, param = t.partition(":")
        if name != "powlog":
            raise DomainMismatchError(f"scale {name!r} takes no parameter")
        return make_scale("powlog", beta=float(param))
    return make_scale(t)


def scale_shift_x(s: PsiScale, alpha: float, x: float) -> float:
    """log of s_alpha(r) = psi^{-1}(alpha * psi(r)), given x = log r."""
    return float(s.inverse_x(alpha * s.value_x(x)))


__all__ = [
    "Domain", "PsiScale", "make_scale", "exp_lift", "parse_psi_spec",
    "scale_shift_x", "Radius", "as_logr", "KINDS",
]

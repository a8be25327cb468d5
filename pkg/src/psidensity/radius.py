"""Points of the radial axis, stored as log r.

Growth constructions live at radii like e^(10^6) that do not fit in a
float.  Everything in this package therefore carries radial positions in
log-coordinates; ``Radius`` is the tiny value type that makes the choice
explicit at API boundaries.  Plain floats are accepted wherever a radius is
expected and are interpreted as r itself.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import DomainMismatchError

# exp(x) overflows past this; used when deciding whether r is printable
_MAX_EXP = math.log(sys.float_info.max)


@dataclass(frozen=True, order=True)
class Radius:
    x: float  # log r

    @classmethod
    def at(cls, r: float) -> "Radius":
        if not r > 0:
            raise DomainMismatchError(f"radius must be positive, got {r}")
        return cls(math.log(r))

    @classmethod
    def from_log(cls, x: float) -> "Radius":
        return cls(float(x))

    @property
    def r(self) -> float:
        """r itself; +inf if it overflows a float."""
        return math.exp(self.x) if self.x <= _MAX_EXP else math.inf

    def __repr__(self) -> str:
        if abs(self.x) <= _MAX_EXP and math.isfinite(self.x):
            r = math.exp(self.x)
            if 1e-4 <= r <= 1e16:
                return f"Radius({r:g})"
        return f"Radius(e^{self.x:g})"


def as_logr(value) -> float:
    """Coerce a Radius or positive float to a log-r coordinate."""
    if isinstance(value, Radius):
        return value.x
    if isinstance(value, (int, float)):
        if not value > 0:
            raise DomainMismatchError(f"radius must be positive, got {value}")
        return math.log(value)
    raise TypeError(f"expected Radius or float, got {type(value).__name__}")


def parse_radius(text: str) -> Radius:
    """Parse CLI radius syntax: ``1e24``, ``2^81``, ``e^262144``, ``e^2^20``.

    The ``e^`` prefix keeps astronomically large radii exact in
    log-coordinates instead of overflowing a float.
    """
    t = text.strip()
    if t.startswith("e^"):
        return Radius.from_log(_parse_powexpr(t[2:], text))
    return Radius.at(_parse_powexpr(t, text))


def _parse_powexpr(t: str, original: str) -> float:
    parts = t.split("^")
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2:
            return float(parts[0]) ** float(parts[1])
    except (ValueError, OverflowError) as exc:
        raise DomainMismatchError(f"cannot parse radius {original!r}: {exc}") from exc
    raise DomainMismatchError(f"cannot parse radius {original!r}")

"""Finite unions of half-open radial intervals, stored in log coordinates.

Sets are either fully known (a finite list of [a, b) pieces) or backed by a
rule that produces every piece whose left endpoint lies below a requested
horizon.  Boolean algebra on fully known sets is exact endpoint arithmetic;
algebra involving rule-backed sets yields a derived rule so that density
estimation can still pick its own horizon later.

All endpoints live in x = log r.  Generated families such as
union_k [e^(4^k), e^(2*4^k)) then have exactly representable endpoints
(4^k and 2*4^k), which is the whole point of the representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .errors import DomainMismatchError, PreconditionError
from .radius import Radius, as_logr
from .scales import Domain, PsiScale

_LN2 = math.log(2.0)

Pairs = tuple[tuple[float, float], ...]


def _normalize(pairs: Iterable[tuple[float, float]]) -> Pairs:
    """Sort, drop degenerate pieces, merge overlapping or touching ones."""
    out: list[list[float]] = []
    for a, b in sorted(pairs):
        if not b > a:
            continue  # degenerate or inverted: measure zero, dropped
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _union(A: Pairs, B: Pairs) -> Pairs:
    return _normalize(list(A) + list(B))


def _intersection(A: Pairs, B: Pairs) -> Pairs:
    out = []
    i = j = 0
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if hi > lo:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def _complement(A: Pairs, lo: float, hi: float) -> Pairs:
    out = []
    cur = lo
    for a, b in A:
        a, b = max(a, lo), min(b, hi)
        if b <= cur:
            continue
        if a >= hi:
            break
        if a > cur:
            out.append((cur, a))
        cur = b
    if cur < hi:
        out.append((cur, hi))
    return tuple(out)


def _clip(A: Pairs, hi: float) -> Pairs:
    return tuple((a, min(b, hi)) for a, b in A if a < hi and min(b, hi) > a)


@dataclass(frozen=True)
class IntervalSet:
    domain: Domain
    pieces: Pairs = ()
    rule: Optional[Callable[[float], Pairs]] = field(default=None, compare=False)
    materialized_to: float = math.inf
    label: str = ""

    def __post_init__(self):
        pieces = _normalize(self.pieces)
        for a, b in pieces:
            if a < self.domain.x0 - 1e-12 or b > self.domain.x1 + 1e-12:
                raise DomainMismatchError(
                    f"piece [{a}, {b}) escapes domain "
                    f"[{self.domain.x0}, {self.domain.x1}]")
        object.__setattr__(self, "pieces", pieces)

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_r_pairs(cls, r0: float, R: float, pairs_r, label: str = "") -> "IntervalSet":
        dom = Domain.from_r(r0, R)
        pairs = [(math.log(a), math.log(b)) for a, b in pairs_r]
        return cls(dom, tuple(pairs), label=label)

    @classmethod
    def from_log_pairs(cls, x0: float, x1: float, pairs, label: str = "") -> "IntervalSet":
        return cls(Domain(x0, x1), tuple(pairs), label=label)

    @classmethod
    def from_rule(cls, domain: Domain, rule, label: str = "") -> "IntervalSet":
        return cls(domain, (), rule=rule, materialized_to=-math.inf, label=label)

    @classmethod
    def empty(cls, domain: Domain) -> "IntervalSet":
        return cls(domain, ())

    @classmethod
    def full(cls, domain: Domain) -> "IntervalSet":
        return cls(domain, ((domain.x0, domain.x1),))

    # -- basics ---------------------------------------------------------------

    def materialize(self, cutoff) -> "IntervalSet":
        """Fully known prefix holding every piece with left endpoint < cutoff."""
        return self.materialize_x(as_logr(cutoff))

    def materialize_x(self, cx: float) -> "IntervalSet":
        """Same as materialize, with the horizon given directly as log r."""
        if self.rule is None:
            if self.materialized_to < cx:
                raise PreconditionError(
                    f"set only materialized to x={self.materialized_to}, need {cx}")
            return self
        pairs = _normalize(self.rule(cx))
        return IntervalSet(self.domain, pairs, materialized_to=cx, label=self.label)

    def pairs_r(self) -> list[tuple[float, float]]:
        """Pieces as plain radii; +inf where e^x overflows."""
        def safe_exp(x):
            return math.exp(x) if x < 700 else math.inf
        return [(safe_exp(a), safe_exp(b)) for a, b in self.pieces]

    def __len__(self) -> int:
        return len(self.pieces)

    def __repr__(self) -> str:
        tag = self.label or ("rule" if self.rule else f"{len(self.pieces)} pieces")
        return f"IntervalSet({tag} on x∈[{self.domain.x0:g},{self.domain.x1:g}])"


def combine(A: IntervalSet, B: Optional[IntervalSet], mode: str) -> IntervalSet:
    """Boolean algebra: union | intersection | difference | complement.

    Complement ignores B.  If either operand is rule-backed the result is a
    derived rule clipped at its materialization horizon, which keeps
    materialization monotone in the horizon.
    """
    if mode not in ("union", "intersection", "difference", "complement"):
        raise DomainMismatchError(f"unknown combine mode {mode!r}")
    if mode != "complement":
        if B is None:
            raise DomainMismatchError(f"{mode} needs two operands")
        if A.domain != B.domain:
            raise DomainMismatchError(
                f"domain mismatch: {A.domain} vs {B.domain}")
    dom = A.domain

    def apply(pa: Pairs, pb: Pairs, hi: float) -> Pairs:
        if mode == "union":
            return _union(pa, pb)
        if mode == "intersection":
            return _intersection(pa, pb)
        if mode == "difference":
            return _intersection(pa, _complement(pb, dom.x0, hi))
        return _complement(pa, dom.x0, hi)

    rule_backed = A.rule is not None or (B is not None and B.rule is not None)
    if not rule_backed:
        hi = min(dom.x1, A.materialized_to,
                 B.materialized_to if B is not None else math.inf)
        pairs = apply(A.pieces, B.pieces if B is not None else (), hi)
        mt = min(A.materialized_to, B.materialized_to) if B is not None else A.materialized_to
        return IntervalSet(dom, pairs, materialized_to=mt, label=_combined_label(A, B, mode))

    def rule(cx: float) -> Pairs:
        pa = A.materialize_x(cx).pieces
        pb = B.materialize_x(cx).pieces if B is not None else ()
        return _clip(apply(pa, pb, min(dom.x1, cx)), cx)

    return IntervalSet.from_rule(dom, rule, label=_combined_label(A, B, mode))


def _combined_label(A, B, mode):
    la = A.label or "A"
    if mode == "complement":
        return f"({la})^c"
    lb = (B.label or "B") if B is not None else "?"
    sym = {"union": "∪", "intersection": "∩", "difference": "\\"}[mode]
    return f"({la}{sym}{lb})"


def psi_measure(E: IntervalSet, s: PsiScale, upto) -> float:
    """Integral of psi' over E ∩ [r0, upto): sum of psi at clipped endpoints.

    Closed form, no quadrature.  For lifted scales this forms e^psi directly
    and may overflow to +inf; density code uses ratio arithmetic instead.
    """
    ux = as_logr(upto)
    if ux > E.domain.x1 + 1e-12:
        raise DomainMismatchError(f"upto beyond domain end (x={ux} > {E.domain.x1})")
    ivs = E.materialize_x(ux) if E.rule is not None else E
    if ivs.materialized_to < ux:
        raise PreconditionError("set not materialized up to the requested point")
    total = 0.0
    for a, b in ivs.pieces:
        if a >= ux:
            break
        hi = min(b, ux)
        total += float(s.value_x(hi)) - float(s.value_x(a))
    return total


# -- named generated families --------------------------------------------------


def geo2(base: float = 2.0) -> IntervalSet:
    """union_k [base^(2k), base^(2k+1)) on (1, inf)."""
    lb = math.log(base)

    def rule(cx: float) -> Pairs:
        out = []
        k = 0
        while 2 * k * lb < cx and k < 100000:
            out.append((2 * k * lb, (2 * k + 1) * lb))
            k += 1
        return tuple(out)

    return IntervalSet.from_rule(Domain(0.0, math.inf), rule, label=f"geo{base:g}")


def accel4(q: float = 4.0) -> IntervalSet:
    """union_k [e^(q^k), e^(2 q^k)) on (1, inf); endpoints exact in log space."""

    def rule(cx: float) -> Pairs:
        out = []
        k = 0
        while q ** k < cx and k < 4000:
            out.append((q ** k, 2 * q ** k))
            k += 1
        return tuple(out)

    return IntervalSet.from_rule(Domain(0.0, math.inf), rule, label=f"accel{q:g}")


def finlog() -> IntervalSet:
    """union_n [e^n, e^n (1 + 2^-n)) on (1, inf); finite log measure.

    Pieces beyond n ~ 50 collapse below float resolution and are dropped;
    their total measure is below 1e-15.
    """

    def rule(cx: float) -> Pairs:
        out = []
        n = 0
        while n < cx and n < 100000:
            out.append((float(n), n + math.log1p(2.0 ** -n)))
            n += 1
        return tuple(out)

    return IntervalSet.from_rule(Domain(0.0, math.inf), rule, label="finlog")


def random_block_set(rng, style: str | None = None) -> IntervalSet:
    """A reproducible random one-interval-per-block set on (1, inf).

    Two families: 'geometric' blocks whose x-extent grows by a fixed factor
    (densities converge fast, linear densities degenerate to 1/0) and
    'constant' blocks of fixed x-period (both density pairs nondegenerate).
    Used as fodder for the chain/complement verification suites.
    """
    if style is None:
        style = "geometric" if rng.random() < 0.5 else "constant"
    n_blocks = 220
    jitter = [1.0 + 0.35 * (rng.random() - 0.5) for _ in range(n_blocks)]
    frac = 0.15 + 0.7 * rng.random()
    if style == "geometric":
        growth = 1.2 + 1.3 * rng.random()
        p0 = 0.3 + rng.random()
    else:
        growth = 1.0
        p0 = 0.5 + 3.5 * rng.random()

    def rule(cx: float) -> Pairs:
        out = []
        start = 0.0
        period = p0
        for k in range(n_blocks):
            if start >= cx:
                break
            on = frac * period * jitter[k]
            out.append((start, start + on))
            start += period
            period *= growth
        return tuple(out)

    return IntervalSet.from_rule(Domain(0.0, math.inf), rule,
                                 label=f"rand-{style[:3]}")


_GENERATORS = {"geo2": geo2, "accel4": accel4, "finlog": finlog}


def parse_set_spec(text: str) -> IntervalSet:
    """CLI set syntax: named generator ('geo2', 'accel4:4', 'finlog') or an
    explicit list of radius pairs like '2:3,5:8' on (1, inf)."""
    t = text.strip()
    name, _, param = t.partition(":")
    if name in _GENERATORS and (param == "" or _is_number(param)):
        gen = _GENERATORS[name]
        return gen(float(param)) if param else gen()
    pairs = []
    for chunk in t.split(","):
        a, sep, b = chunk.partition(":")
        if not sep:
            raise DomainMismatchError(f"bad set spec chunk {chunk!r}")
        pairs.append((float(a), float(b)))
    if any(a <= 0 or b <= a for a, b in pairs):
        raise DomainMismatchError(f"set pieces must satisfy 0 < a < b: {text!r}")
    return IntervalSet.from_r_pairs(1.0, math.inf, pairs, label=text)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False

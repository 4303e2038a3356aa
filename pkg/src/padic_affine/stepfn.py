"""Exact algebra of locally constant functions with a prescribed tail value.

A StepFunction is finitely many (ball, value) parts plus a tail value on the
complement of their union. It represents both the p-adic-valued coefficient
functions of group elements and real-valued densities / test functions; the
interpretation is a declared kind.
"""

from __future__ import annotations

import math
import operator
from fractions import Fraction

from .errors import (
    ContextMismatch,
    KindMismatch,
    OverlappingParts,
    UnboundedIntegral,
)
from .padic import (
    DISJOINT,
    EQUAL,
    FIRST_INSIDE_SECOND,
    SECOND_INSIDE_FIRST,
    Ball,
    ClopenSet,
    Padic,
    PadicContext,
)

PADIC = "padic"
REAL = "real"


def _as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _canonical_parts(ctx: PadicContext, parts, tail: Fraction) -> tuple:
    live = [(b, v) for b, v in parts if v != tail]
    p = ctx.p
    if len(live) < p:
        live.sort(key=lambda bv: bv[0].sort_key())
        return tuple(live)
    changed = True
    while changed:
        changed = False
        groups = {}
        for b, v in live:
            key = (b.radius_exp, b.truncate_key(b.radius_exp + 1))
            groups.setdefault(key, []).append((b, v))
        merged = []
        for members in groups.values():
            if len(members) == p and len({v for _, v in members}) == 1:
                merged.append((members[0][0].parent(), members[0][1]))
                changed = True
            else:
                merged.extend(members)
        live = merged
    live.sort(key=lambda bv: bv[0].sort_key())
    return tuple(live)


class StepFunction:
    """Locally constant function given by disjoint (ball, value) parts + tail.

    Canonical form: parts carrying the tail value are dropped and complete
    sibling families with a common value are merged, so equal functions have
    equal stored forms.
    """

    __slots__ = ("ctx", "kind", "parts", "tail")

    def __init__(self, ctx, kind, parts, tail):
        self.ctx = ctx
        self.kind = kind
        self.parts = parts
        self.tail = tail

    @classmethod
    def make(cls, ctx: PadicContext, kind: str, parts, tail) -> "StepFunction":
        """Build and canonicalize; raises OverlappingParts on bad input."""
        if kind not in (PADIC, REAL):
            raise KindMismatch(f"unknown kind {kind!r}")
        norm = [(b, _as_fraction(v)) for b, v in parts]
        for b, _ in norm:
            if b.ctx.p != ctx.p:
                raise ContextMismatch("part ball from a different context")
        for i in range(len(norm)):
            for j in range(i + 1, len(norm)):
                if norm[i][0].relation(norm[j][0]) != DISJOINT:
                    raise OverlappingParts(
                        f"balls {norm[i][0]!r} and {norm[j][0]!r} overlap"
                    )
        return cls._build(ctx, kind, norm, _as_fraction(tail))

    @classmethod
    def _build(cls, ctx, kind, parts, tail) -> "StepFunction":
        # internal path: parts already pairwise disjoint
        return cls(ctx, kind, _canonical_parts(ctx, parts, tail), tail)

    @classmethod
    def constant(cls, ctx, kind, value) -> "StepFunction":
        return cls(ctx, kind, (), _as_fraction(value))

    @classmethod
    def indicator(cls, s: ClopenSet, value=1, kind=REAL) -> "StepFunction":
        return cls._build(
            s.ctx, kind, [(b, _as_fraction(value)) for b in s.balls], Fraction(0)
        )

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, StepFunction)
            and self.ctx.p == other.ctx.p
            and self.kind == other.kind
            and self.tail == other.tail
            and self.parts == other.parts
        )

    def __hash__(self):
        return hash((self.ctx.p, self.kind, self.parts, self.tail))

    def __repr__(self):
        body = ", ".join(f"{b!r}: {v}" for b, v in self.parts)
        return f"StepFunction({{{body} | tail {self.tail}}}, kind={self.kind})"

    # -- geometry -----------------------------------------------------------

    def enclosing_exp(self, floor: int = 0) -> int:
        """Exponent R of the smallest zero-centered ball containing all parts."""
        if not self.parts:
            return floor
        return max(max(b.enclosing_zero_exp() for b, _ in self.parts), floor)

    def padded_partition(self, radius_exp=None) -> list:
        """Full partition of B(0; R) as (ball, value) pairs, pads at tail value."""
        r = self.enclosing_exp() if radius_exp is None else radius_exp
        cells = list(self.parts)
        hull = Ball(self.ctx, r, ())
        covered = ClopenSet.of(self.ctx, [b for b, _ in self.parts])
        pad = ClopenSet.of(self.ctx, [hull]).subtract(covered)
        cells.extend((b, self.tail) for b in pad.balls)
        cells.sort(key=lambda bv: bv[0].sort_key())
        return cells

    def deviation_support(self) -> ClopenSet:
        """Exact clopen set where the function differs from its tail."""
        return ClopenSet.of(self.ctx, [b for b, _ in self.parts])

    # -- evaluation and algebra --------------------------------------------

    def evaluate(self, x: Padic) -> Fraction:
        if x.ctx.p != self.ctx.p:
            raise ContextMismatch("point from a different context")
        for b, v in self.parts:
            if b.contains(x):
                return v
        return self.tail

    def __call__(self, x: Padic) -> Fraction:
        return self.evaluate(x)

    def map_values(self, fn) -> "StepFunction":
        """Apply an exact transform to every value including the tail."""
        return StepFunction._build(
            self.ctx,
            self.kind,
            [(b, _as_fraction(fn(v))) for b, v in self.parts],
            _as_fraction(fn(self.tail)),
        )

    def translate(self, h) -> "StepFunction":
        h = _as_fraction(h.frac if isinstance(h, Padic) else h)
        return StepFunction._build(
            self.ctx,
            self.kind,
            [(b.translate(h), v) for b, v in self.parts],
            self.tail,
        )

    def combine(self, other: "StepFunction", op: str) -> "StepFunction":
        """Pointwise add/mul on the common refinement, exact."""
        if self.ctx.p != other.ctx.p:
            raise ContextMismatch("step functions over different primes")
        if self.kind != other.kind:
            raise KindMismatch(f"cannot combine {self.kind} with {other.kind}")
        if op == "add":
            fn = operator.add
        elif op == "mul":
            fn = operator.mul
        else:
            raise ValueError(f"unknown op {op!r}")
        # combining with the other operand's tail is often the identity
        # (add 0 / multiply by 1); skip the exact-arithmetic call then
        def against(tail):
            if op == "add" and tail == 0:
                return None
            if op == "mul" and tail == 1:
                return None
            return lambda v: fn(v, tail)

        right_tail_fn = against(other.tail)
        left_tail_fn = against(self.tail)
        # constant operands short-circuit to a value map
        if not other.parts:
            if right_tail_fn is None:
                return self
            return StepFunction._build(
                self.ctx, self.kind,
                [(b, right_tail_fn(v)) for b, v in self.parts],
                right_tail_fn(self.tail),
            )
        if not self.parts:
            if left_tail_fn is None:
                return other
            return StepFunction._build(
                self.ctx, self.kind,
                [(b, left_tail_fn(v)) for b, v in other.parts],
                left_tail_fn(other.tail),
            )
        # work locally on the deviation parts: overlaps refine pairwise, the
        # uncovered remainder of each part meets the other function's tail
        parts = []
        left_covered = [False] * len(self.parts)
        right_covered = [False] * len(other.parts)
        left_inner = [[] for _ in self.parts]
        right_inner = [[] for _ in other.parts]
        for i, (b1, v1) in enumerate(self.parts):
            for j, (b2, v2) in enumerate(other.parts):
                rel = b1.relation(b2)
                if rel == EQUAL:
                    parts.append((b1, fn(v1, v2)))
                    left_covered[i] = True
                    right_covered[j] = True
                elif rel == FIRST_INSIDE_SECOND:
                    parts.append((b1, fn(v1, v2)))
                    left_covered[i] = True
                    right_inner[j].append(b1)
                elif rel == SECOND_INSIDE_FIRST:
                    parts.append((b2, fn(v1, v2)))
                    right_covered[j] = True
                    left_inner[i].append(b2)
        for i, (b1, v1) in enumerate(self.parts):
            if left_covered[i]:
                continue
            w = v1 if right_tail_fn is None else right_tail_fn(v1)
            if not left_inner[i]:
                parts.append((b1, w))
                continue
            rest = ClopenSet.of(self.ctx, [b1]).subtract(
                ClopenSet.of(self.ctx, left_inner[i])
            )
            parts.extend((b, w) for b in rest.balls)
        for j, (b2, v2) in enumerate(other.parts):
            if right_covered[j]:
                continue
            w = v2 if left_tail_fn is None else left_tail_fn(v2)
            if not right_inner[j]:
                parts.append((b2, w))
                continue
            rest = ClopenSet.of(self.ctx, [b2]).subtract(
                ClopenSet.of(self.ctx, right_inner[j])
            )
            parts.extend((b, w) for b in rest.balls)
        return StepFunction._build(
            self.ctx, self.kind, parts, fn(self.tail, other.tail)
        )

    def __add__(self, other):
        return self.combine(other, "add")

    def __mul__(self, other):
        return self.combine(other, "mul")

    def __neg__(self):
        return self.map_values(lambda v: -v)

    def __sub__(self, other):
        return self.combine(-other, "add")

    # -- integration --------------------------------------------------------

    def _clipped_measures(self, s: ClopenSet) -> list:
        """(value, m(part ball ∩ S)) for each part, plus the residual tail mass."""
        out = []
        covered = Fraction(0)
        for b, v in self.parts:
            m = ClopenSet.of(self.ctx, [b]).intersect(s).measure
            if m:
                out.append((v, m))
            covered += m
        out.append((self.tail, s.measure - covered))
        return out

    def integrate(self, s: ClopenSet) -> Fraction:
        """Exact Haar integral over the bounded clopen set S."""
        if self.kind != REAL:
            raise KindMismatch("integrate requires a real-valued function")
        return sum((v * m for v, m in self._clipped_measures(s)), Fraction(0))

    def integrate_transform(self, s: ClopenSet, transform: str):
        """Integral of t(F) over S for a named transform t.

        abs_dev (v -> |v-1|) and one_minus (v -> 1-v) stay exact rationals;
        expm1 (v -> e^v - 1) evaluates one float exponential per piece.
        """
        if self.kind != REAL:
            raise KindMismatch("integrate requires a real-valued function")
        pieces = self._clipped_measures(s)
        if transform == "abs_dev":
            return sum((abs(v - 1) * m for v, m in pieces), Fraction(0))
        if transform == "one_minus":
            return sum(((1 - v) * m for v, m in pieces), Fraction(0))
        if transform == "expm1":
            return math.fsum(math.expm1(v) * m for v, m in pieces)
        raise ValueError(f"unknown transform {transform!r}")

    def support_integral(self) -> Fraction:
        """Exact integral of the function over all of Q_p; tail must be 0."""
        if self.kind != REAL:
            raise KindMismatch("integrate requires a real-valued function")
        if self.tail != 0:
            raise UnboundedIntegral("full-space integral needs tail 0")
        return sum((v * b.measure for b, v in self.parts), Fraction(0))

    def l1_norm(self) -> Fraction:
        """Exact integral of |F| over Q_p; tail must be 0."""
        if self.kind != REAL:
            raise KindMismatch("integrate requires a real-valued function")
        if self.tail != 0:
            raise ValueError("L1 norm needs tail 0")
        return sum((abs(v) * b.measure for b, v in self.parts), Fraction(0))


def make_step(ctx, kind, parts, tail) -> StepFunction:
    return StepFunction.make(ctx, kind, parts, tail)


def common_refinement(f: StepFunction, g: StepFunction):
    """Rewrite both functions on one shared partition (plus matching tails)."""
    if f.ctx.p != g.ctx.p:
        raise ContextMismatch("step functions over different primes")
    r = max(f.enclosing_exp(), g.enclosing_exp())
    left = f.padded_partition(r)
    right = g.padded_partition(r)
    cells = []
    for b1, v1 in left:
        for b2, v2 in right:
            rel = b1.relation(b2)
            if rel in (EQUAL, FIRST_INSIDE_SECOND):
                cells.append((b1, v1, v2))
            elif rel == SECOND_INSIDE_FIRST:
                cells.append((b2, v1, v2))
    cells.sort(key=lambda c: c[0].sort_key())
    return cells

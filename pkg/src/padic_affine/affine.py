"""The infinite-dimensional p-adic affine group and its three actions.

An element is a pair g = (a, b) of locally constant coefficient functions,
a nonvanishing with tail 1 and b with tail 0, acting at a point x through
the section (a(x), b(x)) by x -> (x + b(x)) / a(x).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContextMismatch, KindMismatch, PadicAffineError
from .padic import (
    EQUAL,
    FIRST_INSIDE_SECOND,
    SECOND_INSIDE_FIRST,
    Ball,
    ClopenSet,
    Padic,
    PadicContext,
    fraction_valuation,
)
from .stepfn import PADIC, StepFunction


@dataclass(frozen=True)
class SectionPair:
    """A constant affine pair (a(x), b(x)) obtained by evaluating g at x."""

    a_val: Padic
    b_val: Padic

    def __post_init__(self):
        if self.a_val.frac == 0:
            raise PadicAffineError("section a-value must be nonzero")
        if self.a_val.ctx.p != self.b_val.ctx.p:
            raise ContextMismatch("section pair mixes contexts")

    def act(self, x: Padic) -> Padic:
        return (x + self.b_val) / self.a_val


def pair_product(left: SectionPair, right: SectionPair) -> SectionPair:
    """Product of constant pairs; the LEFT factor acts first on points."""
    a = right.a_val * left.a_val
    b = left.b_val + left.a_val * right.b_val
    return SectionPair(a, b)


def act_pair(s: SectionPair, x: Padic) -> Padic:
    return s.act(x)


class AffineElement:
    """A group element g = (a, b); equal to (1, 0) outside a bounded ball."""

    __slots__ = ("ctx", "a", "b")

    def __init__(self, a: StepFunction, b: StepFunction):
        if a.ctx.p != b.ctx.p:
            raise ContextMismatch("a and b over different primes")
        if a.kind != PADIC or b.kind != PADIC:
            raise KindMismatch("coefficient functions must be p-adic kind")
        if a.tail != 1:
            raise PadicAffineError("a must have tail 1")
        if b.tail != 0:
            raise PadicAffineError("b must have tail 0")
        if any(v == 0 for _, v in a.parts):
            raise PadicAffineError("a must be nonvanishing")
        self.ctx = a.ctx
        self.a = a
        self.b = b

    @classmethod
    def identity(cls, ctx: PadicContext) -> "AffineElement":
        return cls(
            StepFunction.constant(ctx, PADIC, 1),
            StepFunction.constant(ctx, PADIC, 0),
        )

    @classmethod
    def from_parts(cls, ctx, a_parts, b_parts) -> "AffineElement":
        return cls(
            StepFunction.make(ctx, PADIC, a_parts, 1),
            StepFunction.make(ctx, PADIC, b_parts, 0),
        )

    def __eq__(self, other):
        return (
            isinstance(other, AffineElement)
            and self.a == other.a
            and self.b == other.b
        )

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"AffineElement(a={self.a!r}, b={self.b!r})"

    def is_identity(self) -> bool:
        return not self.a.parts and not self.b.parts

    def enclosing_exp(self) -> int:
        return max(self.a.enclosing_exp(), self.b.enclosing_exp())

    def pieces(self, radius_exp=None) -> list:
        """Shared padded partition of B(0; R) as (ball, a_k, b_k) triples."""
        r = self.enclosing_exp() if radius_exp is None else radius_exp
        return _refine(self.a, self.b, r)

    # -- group structure ----------------------------------------------------

    def __mul__(self, other: "AffineElement") -> "AffineElement":
        return multiply(self, other)

    def inverse(self) -> "AffineElement":
        a_inv = self.a.map_values(lambda v: 1 / v)
        b_inv = (-self.b).combine(a_inv, "mul")
        return AffineElement(a_inv, b_inv)

    # -- actions ------------------------------------------------------------

    def section(self, x: Padic) -> SectionPair:
        return SectionPair(
            Padic(self.ctx, self.a.evaluate(x)),
            Padic(self.ctx, self.b.evaluate(x)),
        )

    def act_point(self, x: Padic) -> Padic:
        return self.section(x).act(x)

    def act_function(self, f: StepFunction) -> StepFunction:
        """The one-particle motion (gf)(x) = f(g(x) x), exact and piecewise."""
        if f.ctx.p != self.ctx.p:
            raise ContextMismatch("function from a different context")
        r = self.enclosing_exp()
        hull = ClopenSet.of(self.ctx, [Ball(self.ctx, r, ())])
        parts = []
        for cell, a_k, b_k in _refine(self.a, self.b, r):
            for c_j, v_j in f.parts:
                # {x in cell : (x + b_k)/a_k in C_j} = cell ∩ (a_k C_j - b_k)
                pre = c_j.image(1 / a_k, -b_k / a_k)
                rel = cell.relation(pre)
                if rel in (EQUAL, SECOND_INSIDE_FIRST):
                    parts.append((pre, v_j))
                elif rel == FIRST_INSIDE_SECOND:
                    parts.append((cell, v_j))
        for c_j, v_j in f.parts:
            outside = ClopenSet.of(self.ctx, [c_j]).subtract(hull)
            parts.extend((b, v_j) for b in outside.balls)
        return StepFunction._build(self.ctx, f.kind, parts, f.tail)

    def preimage_clopen(self, s: ClopenSet) -> ClopenSet:
        """Exact {x : g(x) x ∈ S}."""
        ind = StepFunction.indicator(s)
        return self.act_function(ind).deviation_support()

    def act_configuration(self, points: list) -> tuple:
        """Image points (with multiplicity) and an exact collision flag."""
        if len(set(points)) != len(points):
            raise PadicAffineError("input points must be pairwise distinct")
        images = [self.act_point(x) for x in points]
        return images, len(set(images)) < len(images)

    def is_measure_preserving(self) -> bool:
        """True iff every piece maps its own ball onto itself."""
        for ball, a_k, b_k in _refine(self.a, self.b, self.enclosing_exp()):
            if fraction_valuation(a_k, self.ctx.p) != 0:
                return False
            if b_k != 0 and fraction_valuation(b_k, self.ctx.p) < -ball.radius_exp:
                return False
        return True


def _refine(a: StepFunction, b: StepFunction, radius_exp: int) -> list:
    cells = []
    left = a.padded_partition(radius_exp)
    right = b.padded_partition(radius_exp)
    for b1, v1 in left:
        for b2, v2 in right:
            rel = b1.relation(b2)
            if rel in (EQUAL, FIRST_INSIDE_SECOND):
                cells.append((b1, v1, v2))
            elif rel == SECOND_INSIDE_FIRST:
                cells.append((b2, v1, v2))
    cells.sort(key=lambda c: c[0].sort_key())
    return cells


def identity(ctx: PadicContext) -> AffineElement:
    return AffineElement.identity(ctx)


def multiply(left: AffineElement, right: AffineElement) -> AffineElement:
    """Group product; with left = (a2, b2) and right = (a1, b1) this is
    (a1 a2, b2 + a2 b1), so the left factor acts first on points."""
    if left.ctx.p != right.ctx.p:
        raise ContextMismatch("elements over different primes")
    a = right.a.combine(left.a, "mul")
    b = left.b.combine(left.a.combine(right.b, "mul"), "add")
    return AffineElement(a, b)


def inverse(g: AffineElement) -> AffineElement:
    return g.inverse()


def section(g: AffineElement, x: Padic) -> SectionPair:
    return g.section(x)


def act_point(g: AffineElement, x: Padic) -> Padic:
    return g.act_point(x)


def act_function(g: AffineElement, f: StepFunction) -> StepFunction:
    return g.act_function(f)


def preimage_clopen(g: AffineElement, s: ClopenSet) -> ClopenSet:
    return g.preimage_clopen(s)


def act_configuration(g: AffineElement, points: list) -> tuple:
    return g.act_configuration(points)


def composition_defect(
    g1: AffineElement, g2: AffineElement, f: StepFunction
) -> ClopenSet:
    """Exact region where acting by g1 then g2 on f differs from the action
    of the product element; an empty set certifies the pointwise group
    property for this triple."""
    composed = g1.act_function(g2.act_function(f))
    product = multiply(g1, g2).act_function(f)
    return (composed - product).deviation_support()

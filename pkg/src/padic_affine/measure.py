"""Haar measure, intensity measures with step densities, and pushforwards.

The pushforward of an intensity rho·m under a group element g has again a
step density: each piece (B_k, a_k, b_k) contributes |a_k|_p · rho(a_k y - b_k)
on the image ball C_k = (B_k + b_k)/a_k, and overlapping contributions sum.
With rho = 1 this is the exact density rho_g of g* m.
"""

from __future__ import annotations

from fractions import Fraction

from .affine import AffineElement
from .errors import PadicAffineError
from .padic import Ball, ClopenSet, PadicContext, fraction_abs_p
from .stepfn import REAL, StepFunction


class IntensityMeasure:
    """A measure rho·m with a nonnegative step density agreeing with Haar
    (density 1) at infinity."""

    __slots__ = ("density",)

    def __init__(self, density: StepFunction):
        if density.kind != REAL:
            raise PadicAffineError("density must be real-kind")
        if density.tail != 1:
            raise PadicAffineError("density tail must be 1")
        if any(v < 0 for _, v in density.parts):
            raise PadicAffineError("density values must be nonnegative")
        self.density = density

    @classmethod
    def haar(cls, ctx: PadicContext) -> "IntensityMeasure":
        return cls(StepFunction.constant(ctx, REAL, 1))

    @property
    def ctx(self):
        return self.density.ctx

    def __eq__(self, other):
        return isinstance(other, IntensityMeasure) and self.density == other.density

    def __hash__(self):
        return hash(self.density)

    def __repr__(self):
        return f"IntensityMeasure({self.density!r})"

    def is_haar(self) -> bool:
        return not self.density.parts

    def mass(self, s: ClopenSet) -> Fraction:
        return self.density.integrate(s)

    def l1_deviation(self) -> Fraction:
        """Exact integral of |rho - 1| dm; finite for every step density."""
        support = self.density.deviation_support()
        return self.density.integrate_transform(support, "abs_dev")

    def l1_distance(self, other: "IntensityMeasure") -> Fraction:
        diff = self.density - other.density  # tail 0: both tails are 1
        return diff.l1_norm()


def ball_measure(b: Ball) -> Fraction:
    """Haar measure p^k of a ball, under the normalization m(Z_p) = 1."""
    return b.measure


def image_ball(b: Ball, a_val, b_val) -> Ball:
    """The image (B + b)/a of a ball under a constant section."""
    return b.image(Fraction(a_val), Fraction(b_val))


def pushforward(mu: IntensityMeasure, g: AffineElement) -> IntensityMeasure:
    """Exact step density of g*(rho·m); overlaps are summed on a common
    refinement, so total mass over the moved region is conserved."""
    ctx = mu.ctx
    rho = mu.density
    r = max(g.enclosing_exp(), rho.enclosing_exp())
    hull = Ball(ctx, r, ())
    # density contributed outside the moved hull: rho is 1 there already
    total = StepFunction._build(ctx, REAL, [(hull, Fraction(0))], Fraction(1))
    for cell, a_k, b_k in g.pieces(r):
        c_k = cell.image(a_k, b_k)
        scale = fraction_abs_p(a_k, ctx.p)
        # pull rho back through y -> a_k y - b_k, restricted to C_k
        parts = []
        covered = []
        for d_j, r_j in rho.parts:
            pre = d_j.image(a_k, b_k)
            rel = c_k.relation(pre)
            if rel in ("equal", "second-inside-first"):
                piece = pre if rel == "second-inside-first" else c_k
                parts.append((piece, scale * r_j))
                covered.append(piece)
            elif rel == "first-inside-second":
                parts.append((c_k, scale * r_j))
                covered.append(c_k)
        rest = ClopenSet.of(ctx, [c_k]).subtract(ClopenSet.of(ctx, covered))
        parts.extend((b, scale * rho.tail) for b in rest.balls)
        contribution = StepFunction._build(ctx, REAL, parts, Fraction(0))
        total = total + contribution
    assert all(v >= 0 for _, v in total.parts)
    return IntensityMeasure(total)


def l1_deviation(mu: IntensityMeasure) -> Fraction:
    return mu.l1_deviation()


def roundtrip_defect(g: AffineElement) -> Fraction:
    """Exact L1 distance between Haar and the two-step pushforward through
    g^{-1} then g; zero certifies the isometry step for this element."""
    haar = IntensityMeasure.haar(g.ctx)
    back = pushforward(haar, g.inverse())
    forth = pushforward(back, g)
    return forth.l1_distance(haar)

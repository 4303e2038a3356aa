"""Exact p-adic rational arithmetic, ultrametric balls and clopen sets.

Points of Q_p are represented by exact rationals (a dense subfield); every
quantity computed here is an exact integer or Fraction, never a float.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import ContextMismatch, PadicAffineError

INFINITY = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PadicContext:
    """The prime p fixing which field Q_p we work in.

    Every object in the package carries exactly one context; mixing
    contexts raises :class:`ContextMismatch`.
    """

    __slots__ = ("p",)

    def __init__(self, p: int):
        if not _is_prime(p):
            raise PadicAffineError(f"p must be prime, got {p}")
        self.p = p

    def __eq__(self, other):
        return isinstance(other, PadicContext) and self.p == other.p

    def __hash__(self):
        return hash(("PadicContext", self.p))

    def __repr__(self):
        return f"PadicContext(p={self.p})"

    def rational(self, num, den=1) -> "Padic":
        return Padic(self, Fraction(num, den))

    def zero(self) -> "Padic":
        return Padic(self, Fraction(0))

    def one(self) -> "Padic":
        return Padic(self, Fraction(1))


def _int_valuation(n: int, p: int) -> int:
    # n != 0
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def fraction_valuation(x: Fraction, p: int):
    """p-adic valuation of an exact rational; +inf for 0."""
    if x == 0:
        return INFINITY
    return _int_valuation(x.numerator, p) - _int_valuation(x.denominator, p)


def fraction_abs_p(x: Fraction, p: int) -> Fraction:
    """|x|_p as an exact rational; 0 for x = 0."""
    if x == 0:
        return Fraction(0)
    v = fraction_valuation(x, p)
    return Fraction(1, p**v) if v > 0 else Fraction(p ** (-v))


def fraction_digits(x: Fraction, p: int, lo: int, hi: int) -> list:
    """Canonical p-adic digits d_i of x for lo <= i <= hi.

    Digits below the valuation are 0; the denominator is handled by a
    modular inverse, so the result is exact.
    """
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    if x == 0:
        return [0] * (hi - lo + 1)
    v = fraction_valuation(x, p)
    base = min(lo, v)
    shifted = x * Fraction(p) ** (-base)  # a p-adic integer
    num, den = shifted.numerator, shifted.denominator
    if den % p == 0:
        raise PadicAffineError("denominator not prime to p after shift")
    mod = p ** (hi - base + 1)
    m = (num * pow(den, -1, mod)) % mod
    return [(m // p ** (i - base)) % p for i in range(lo, hi + 1)]


class Padic:
    """An element of Q embedded in Q_p: an exact rational with p-adic size."""

    __slots__ = ("ctx", "frac")

    def __init__(self, ctx: PadicContext, value):
        self.ctx = ctx
        self.frac = value if isinstance(value, Fraction) else Fraction(value)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Fraction:
        if isinstance(other, Padic):
            if other.ctx.p != self.ctx.p:
                raise ContextMismatch(
                    f"mixing Q_{self.ctx.p} with Q_{other.ctx.p}"
                )
            return other.frac
        return Fraction(other)

    def __add__(self, other):
        return Padic(self.ctx, self.frac + self._coerce(other))

    def __sub__(self, other):
        return Padic(self.ctx, self.frac - self._coerce(other))

    def __mul__(self, other):
        return Padic(self.ctx, self.frac * self._coerce(other))

    def __truediv__(self, other):
        return Padic(self.ctx, self.frac / self._coerce(other))

    def __neg__(self):
        return Padic(self.ctx, -self.frac)

    def __eq__(self, other):
        if isinstance(other, Padic):
            return self.ctx.p == other.ctx.p and self.frac == other.frac
        return self.frac == other

    def __hash__(self):
        return hash((self.ctx.p, self.frac))

    def __repr__(self):
        return f"Padic({self.frac!r}, p={self.ctx.p})"

    # -- p-adic structure ---------------------------------------------------

    def valuation(self):
        return fraction_valuation(self.frac, self.ctx.p)

    def abs_p(self) -> Fraction:
        return fraction_abs_p(self.frac, self.ctx.p)

    def digits(self, lo: int, hi: int) -> list:
        return fraction_digits(self.frac, self.ctx.p, lo, hi)


def valuation(x: Padic):
    return x.valuation()


def abs_p(x: Padic) -> Fraction:
    return x.abs_p()


def digits(x: Padic, lo: int, hi: int) -> list:
    return x.digits(lo, hi)


# -- balls ------------------------------------------------------------------

EQUAL = "equal"
FIRST_INSIDE_SECOND = "first-inside-second"
SECOND_INSIDE_FIRST = "second-inside-first"
DISJOINT = "disjoint"


class Ball:
    """The ball B(c; k) = {x : |x - c|_p <= p^k}, with measure p^k.

    Identity is the coset c + p^{-k} Z_p: the canonical key is the tuple of
    nonzero digits of the center at positions below -k, which makes
    equality, nesting and hashing drift-free.
    """

    __slots__ = ("ctx", "radius_exp", "key", "_center")

    def __init__(self, ctx: PadicContext, radius_exp: int, key: tuple):
        self.ctx = ctx
        self.radius_exp = radius_exp
        self.key = key  # sorted tuple of (position, digit), digit != 0
        self._center = None

    @classmethod
    def from_center(cls, center: Padic, radius_exp: int) -> "Ball":
        v = center.valuation()
        if v >= -radius_exp:  # includes center == 0
            return cls(center.ctx, radius_exp, ())
        ds = center.digits(v, -radius_exp - 1)
        key = tuple((v + i, d) for i, d in enumerate(ds) if d != 0)
        return cls(center.ctx, radius_exp, key)

    @property
    def center(self) -> Padic:
        if self._center is None:
            p = self.ctx.p
            total = sum(
                (Fraction(d) * Fraction(p) ** i for i, d in self.key),
                Fraction(0),
            )
            self._center = Padic(self.ctx, total)
        return self._center

    @property
    def measure(self) -> Fraction:
        p, k = self.ctx.p, self.radius_exp
        return Fraction(p**k) if k >= 0 else Fraction(1, p**-k)

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and self.ctx.p == other.ctx.p
            and self.radius_exp == other.radius_exp
            and self.key == other.key
        )

    def __hash__(self):
        return hash((self.ctx.p, self.radius_exp, self.key))

    def __repr__(self):
        return f"Ball({self.center.frac!r}; {self.radius_exp}, p={self.ctx.p})"

    def sort_key(self):
        return (self.radius_exp, self.key)

    def contains(self, x: Padic) -> bool:
        return (x - self.center).valuation() >= -self.radius_exp

    def truncate_key(self, radius_exp: int) -> tuple:
        # key of the ball of the given larger radius containing this one
        return tuple((i, d) for i, d in self.key if i < -radius_exp)

    def relation(self, other: "Ball") -> str:
        if self.ctx.p != other.ctx.p:
            raise ContextMismatch("balls over different primes")
        k1, k2 = self.radius_exp, other.radius_exp
        if k1 == k2:
            return EQUAL if self.key == other.key else DISJOINT
        if k1 < k2:
            if self.truncate_key(k2) == other.key:
                return FIRST_INSIDE_SECOND
            return DISJOINT
        if other.truncate_key(k1) == self.key:
            return SECOND_INSIDE_FIRST
        return DISJOINT

    def is_disjoint(self, other: "Ball") -> bool:
        return self.relation(other) == DISJOINT

    def children(self) -> list:
        """The p disjoint sub-balls of radius p^{k-1} partitioning this ball."""
        k = self.radius_exp
        out = []
        for r in range(self.ctx.p):
            key = self.key if r == 0 else self.key + ((-k, r),)
            out.append(Ball(self.ctx, k - 1, key))
        return out

    def parent(self) -> "Ball":
        k = self.radius_exp
        return Ball(self.ctx, k + 1, self.truncate_key(k + 1))

    def sibling_index(self) -> int:
        # digit distinguishing this ball among its parent's children
        pos = -self.radius_exp - 1
        for i, d in self.key:
            if i == pos:
                return d
        return 0

    def enclosing_zero_exp(self) -> int:
        """Smallest R with this ball inside B(0; R)."""
        if not self.key:
            return self.radius_exp
        lowest = min(i for i, _ in self.key)
        return max(self.radius_exp, -lowest)

    def image(self, a_val: Fraction, b_val: Fraction) -> "Ball":
        """The ball (B + b)/a, exact; radius scales by 1/|a|_p."""
        if a_val == 0:
            raise PadicAffineError("a must be nonzero")
        p = self.ctx.p
        c = (self.center.frac + b_val) / a_val
        k = self.radius_exp + fraction_valuation(a_val, p)
        return Ball.from_center(Padic(self.ctx, c), k)

    def translate(self, h: Fraction) -> "Ball":
        return Ball.from_center(
            Padic(self.ctx, self.center.frac + h), self.radius_exp
        )

    def sample(self, depth: int, rng) -> Padic:
        """Haar-uniform point of the ball, exact at the given digit depth.

        The returned point determines a residual ball of radius
        p^{radius_exp - depth}; deterministic for a fixed stream.
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        p, k = self.ctx.p, self.radius_exp
        n = rng.randrange(p**depth)
        offset = Fraction(n, p**k) if k >= 0 else Fraction(n * p**-k)
        return Padic(self.ctx, self.center.frac + offset)


def ball_relation(b1: Ball, b2: Ball) -> str:
    return b1.relation(b2)


def split_ball(b: Ball) -> list:
    return b.children()


def _ball_subtract(a: Ball, b: Ball) -> list:
    """a minus b as a list of disjoint balls."""
    rel = a.relation(b)
    if rel == DISJOINT:
        return [a]
    if rel in (EQUAL, FIRST_INSIDE_SECOND):
        return []
    out = []
    for child in a.children():
        crel = child.relation(b)
        if crel == DISJOINT:
            out.append(child)
        elif crel == SECOND_INSIDE_FIRST:
            out.extend(_ball_subtract(child, b))
        elif crel == EQUAL or crel == FIRST_INSIDE_SECOND:
            pass
    return out


class ClopenSet:
    """A finite disjoint union of balls, kept in canonical form.

    Canonicalization removes nested duplicates, merges any complete set of
    p sibling balls into their parent, and sorts by (radius_exp, digit key).
    """

    __slots__ = ("ctx", "balls")

    def __init__(self, ctx: PadicContext, balls: tuple):
        self.ctx = ctx
        self.balls = balls

    @classmethod
    def empty(cls, ctx: PadicContext) -> "ClopenSet":
        return cls(ctx, ())

    @classmethod
    def of(cls, ctx: PadicContext, balls) -> "ClopenSet":
        """Union of the given balls (nesting and duplicates allowed)."""
        return cls(ctx, _canonical_balls(ctx, list(balls)))

    def __eq__(self, other):
        return (
            isinstance(other, ClopenSet)
            and self.ctx.p == other.ctx.p
            and self.balls == other.balls
        )

    def __hash__(self):
        return hash((self.ctx.p, self.balls))

    def __repr__(self):
        return f"ClopenSet({list(self.balls)!r})"

    def __bool__(self):
        return bool(self.balls)

    @property
    def is_empty(self) -> bool:
        return not self.balls

    @property
    def measure(self) -> Fraction:
        return sum((b.measure for b in self.balls), Fraction(0))

    def contains(self, x: Padic) -> bool:
        return any(b.contains(x) for b in self.balls)

    def enclosing_zero_exp(self, default: int = 0) -> int:
        if not self.balls:
            return default
        return max(b.enclosing_zero_exp() for b in self.balls)

    def union(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        return ClopenSet.of(self.ctx, self.balls + other.balls)

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        out = []
        for a in self.balls:
            for b in other.balls:
                rel = a.relation(b)
                if rel in (EQUAL, FIRST_INSIDE_SECOND):
                    out.append(a)
                elif rel == SECOND_INSIDE_FIRST:
                    out.append(b)
        return ClopenSet.of(self.ctx, out)

    def subtract(self, other: "ClopenSet") -> "ClopenSet":
        self._check(other)
        pieces = list(self.balls)
        for b in other.balls:
            pieces = [r for a in pieces for r in _ball_subtract(a, b)]
        return ClopenSet.of(self.ctx, pieces)

    def translate(self, h: Fraction) -> "ClopenSet":
        return ClopenSet.of(self.ctx, [b.translate(h) for b in self.balls])

    def _check(self, other):
        if self.ctx.p != other.ctx.p:
            raise ContextMismatch("clopen sets over different primes")


def _canonical_balls(ctx: PadicContext, balls: list) -> tuple:
    if len(balls) == 1:
        return tuple(balls)
    # dedupe and drop balls nested inside others
    unique = list({b: None for b in balls})
    keep = []
    for i, b in enumerate(unique):
        nested = False
        for j, other in enumerate(unique):
            if i == j:
                continue
            rel = b.relation(other)
            if rel == FIRST_INSIDE_SECOND:
                nested = True
                break
        if not nested:
            keep.append(b)
    # merge complete sibling families into parents, repeatedly
    p = ctx.p
    changed = True
    while changed:
        changed = False
        groups = {}
        for b in keep:
            groups.setdefault((b.radius_exp, b.truncate_key(b.radius_exp + 1)), []).append(b)
        merged = []
        for (_, _), members in groups.items():
            if len(members) == p:
                merged.append(members[0].parent())
                changed = True
            else:
                merged.extend(members)
        keep = merged
    keep.sort(key=Ball.sort_key)
    return tuple(keep)


def clopen_combine(a: ClopenSet, b: ClopenSet, op: str) -> ClopenSet:
    if op == "union":
        return a.union(b)
    if op == "intersect":
        return a.intersect(b)
    if op == "subtract":
        return a.subtract(b)
    raise ValueError(f"unknown op {op!r}")


def sample_uniform(ball: Ball, depth: int, rng) -> Padic:
    return ball.sample(depth, rng)

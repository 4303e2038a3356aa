"""Poisson configurations, cylinder functionals, the V_g action and the
Monte Carlo expectation engine.

Cylinder functionals are restricted to a closed descriptor family
(exponential, low-degree polynomial, count events) so that every identity
check has a closed form; anything else goes through Monte Carlo. All
sampling rates are exact rationals; floats appear only in final
exponentials and in estimator accumulation.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .affine import AffineElement
from .errors import (
    PadicAffineError,
    UnsupportedShape,
    WindowMismatch,
)
from .measure import IntensityMeasure, pushforward
from .padic import (
    DISJOINT,
    EQUAL,
    FIRST_INSIDE_SECOND,
    Ball,
    ClopenSet,
    Padic,
)
from .stepfn import REAL, StepFunction


@dataclass(frozen=True)
class Configuration:
    """A finite point set inside a bounded clopen window."""

    points: tuple
    window: ClopenSet

    def __post_init__(self):
        if len(set(self.points)) != len(self.points):
            raise PadicAffineError("configuration points must be distinct")
        for x in self.points:
            if not self.window.contains(x):
                raise WindowMismatch(f"point {x!r} outside the window")

    def __len__(self):
        return len(self.points)


# -- cylinder functionals ---------------------------------------------------


class CylinderFunction:
    """Base for the descriptor family F(gamma) = psi(<f_1,gamma>, ...)."""

    def window(self) -> ClopenSet:
        raise NotImplementedError

    def transform(self, g: AffineElement) -> "CylinderFunction":
        raise NotImplementedError

    def evaluate(self, gamma: Configuration) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(CylinderFunction):
    """F(gamma) = e^{<f, gamma>} for a compactly supported step function f."""

    f: StepFunction

    def __post_init__(self):
        if self.f.kind != REAL:
            raise PadicAffineError("exponential descriptor needs a real f")
        if self.f.tail != 0:
            raise PadicAffineError("test function must vanish at infinity")

    def window(self) -> ClopenSet:
        return self.f.deviation_support()

    def transform(self, g: AffineElement) -> "Exponential":
        return Exponential(g.act_function(self.f))

    def evaluate(self, gamma: Configuration) -> float:
        return math.exp(float(pair_sum(self.f, gamma)))


@dataclass(frozen=True)
class Polynomial(CylinderFunction):
    """F(gamma) = prod_j <f_j, gamma>^{e_j}."""

    factors: tuple  # of (StepFunction, positive int)

    def __post_init__(self):
        for f, e in self.factors:
            if f.kind != REAL or f.tail != 0:
                raise PadicAffineError("polynomial factors need real f, tail 0")
            if e < 1:
                raise PadicAffineError("powers must be positive")

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.factors)

    def window(self) -> ClopenSet:
        out = None
        for f, _ in self.factors:
            s = f.deviation_support()
            out = s if out is None else out.union(s)
        return out

    def transform(self, g: AffineElement) -> "Polynomial":
        return Polynomial(tuple((g.act_function(f), e) for f, e in self.factors))

    def evaluate(self, gamma: Configuration) -> float:
        out = 1.0
        for f, e in self.factors:
            out *= float(pair_sum(f, gamma)) ** e
        return out


EQ, LE, GE = "=", "<=", ">="


@dataclass(frozen=True)
class CountEvent(CylinderFunction):
    """Indicator of simultaneous count conditions N(S_i) op k_i."""

    conditions: tuple  # of (ClopenSet, op, int)

    def __post_init__(self):
        for _, op, k in self.conditions:
            if op not in (EQ, LE, GE) or k < 0:
                raise PadicAffineError(f"bad count condition {op!r} {k}")

    def window(self) -> ClopenSet:
        out = None
        for s, _, _ in self.conditions:
            out = s if out is None else out.union(s)
        return out

    def sets_disjoint(self) -> bool:
        sets = [s for s, _, _ in self.conditions]
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                if not sets[i].intersect(sets[j]).is_empty:
                    return False
        return True

    def transform(self, g: AffineElement) -> "CountEvent":
        return CountEvent(
            tuple((g.preimage_clopen(s), op, k) for s, op, k in self.conditions)
        )

    def evaluate(self, gamma: Configuration) -> float:
        for s, op, k in self.conditions:
            n = sum(1 for x in gamma.points if s.contains(x))
            if not _holds(n, op, k):
                return 0.0
        return 1.0


def _holds(n: int, op: str, k: int) -> bool:
    if op == EQ:
        return n == k
    if op == LE:
        return n <= k
    return n >= k


# -- pairings and depths ----------------------------------------------------


def pair_sum(f: StepFunction, gamma: Configuration) -> Fraction:
    """<f, gamma> = sum of f over the configuration points, exact."""
    if not f.deviation_support().subtract(gamma.window).is_empty:
        raise WindowMismatch("supp f must lie inside the configuration window")
    return sum((f.evaluate(x) for x in gamma.points), Fraction(0))


def required_depth(objects, ball: Ball) -> int:
    """Smallest sampling depth making every listed step function / clopen set
    constant on the sampled point's residual ball inside the given ball."""
    exps = []
    for obj in objects:
        if isinstance(obj, StepFunction):
            exps.extend(b.radius_exp for b, _ in obj.parts)
        elif isinstance(obj, ClopenSet):
            exps.extend(b.radius_exp for b in obj.balls)
        elif isinstance(obj, Ball):
            exps.append(obj.radius_exp)
        else:
            raise PadicAffineError(f"cannot take depth of {type(obj).__name__}")
    r_min = min(exps, default=ball.radius_exp)
    return max(1, ball.radius_exp - r_min)


# -- refinement atoms -------------------------------------------------------


def _split_cells(ball: Ball, cuts: list) -> list:
    inner = []
    for c in cuts:
        rel = ball.relation(c)
        if rel == "second-inside-first" and c.radius_exp < ball.radius_exp:
            inner.append(c)
    if not inner:
        return [ball]
    out = []
    for child in ball.children():
        sub = [c for c in inner if child.relation(c) != DISJOINT]
        out.extend(_split_cells(child, sub))
    return out


def refine_window(window: ClopenSet, fns: list) -> list:
    """Partition the window into balls on which every listed function is
    constant; returns (cell, tuple of per-function values)."""
    cuts = []
    for fn in fns:
        if isinstance(fn, StepFunction):
            cuts.extend(b for b, _ in fn.parts)
        elif isinstance(fn, ClopenSet):
            cuts.extend(fn.balls)
        else:
            raise PadicAffineError(f"cannot refine against {type(fn).__name__}")
    cells = []
    for w in window.balls:
        for cell in _split_cells(w, cuts):
            values = tuple(
                fn.evaluate(cell.center)
                if isinstance(fn, StepFunction)
                else fn.contains(cell.center)
                for fn in fns
            )
            cells.append((cell, values))
    return cells


# -- sampling ---------------------------------------------------------------


def _poisson_inverse(lam: float, u: float) -> int:
    """Poisson variate by CDF inversion from a single uniform."""
    if lam <= 0.0:
        return 0
    k = 0
    pk = math.exp(-lam)
    cdf = pk
    while u > cdf:
        k += 1
        pk *= lam / k
        cdf += pk
        if k > 1000:  # numerical guard; unreachable for desk-scale rates
            break
    return k


def sample_config(
    mu: IntensityMeasure, window: ClopenSet, depth: int, rng: random.Random
) -> Configuration:
    """One Poisson configuration on the window with intensity rho·m.

    Atom rates are exact rationals; the atom choice compares the uniform
    draw against exact cumulative weights. Duplicate points (possible only
    through finite depth) are resampled.
    """
    cells = refine_window(window, [mu.density])
    atoms = [(ball, v * ball.measure) for ball, (v,) in cells if v > 0]
    total = sum((rate for _, rate in atoms), Fraction(0))
    if total == 0:
        return Configuration((), window)
    n = _poisson_inverse(float(total), rng.random())
    points = []
    seen = set()
    for _ in range(n):
        threshold = Fraction(rng.random()) * total
        acc = Fraction(0)
        chosen = atoms[-1][0]
        for ball, rate in atoms:
            acc += rate
            if threshold < acc:
                chosen = ball
                break
        # a collision means the two continuum points share their first
        # digits; append digits within the collided residue until distinct,
        # which leaves every coarser count untouched
        x = chosen.sample(depth, rng)
        digit_pos = depth
        while x in seen:
            step = Fraction(rng.randrange(mu.ctx.p) * mu.ctx.p**digit_pos)
            x = x + Padic(mu.ctx, step / chosen.measure)
            digit_pos += 1
        seen.add(x)
        points.append(x)
    return Configuration(tuple(points), window)


# -- the V_g action ---------------------------------------------------------


def transform_Vg(g: AffineElement, f: CylinderFunction) -> CylinderFunction:
    return f.transform(g)


# -- exact expectations -----------------------------------------------------


def _hull(ctx, *sets) -> ClopenSet:
    r = 0
    empty = True
    for s in sets:
        if s is not None and not s.is_empty:
            r = max(r, s.enclosing_zero_exp())
            empty = False
    if empty:
        return ClopenSet.empty(ctx)
    return ClopenSet.of(ctx, [Ball(ctx, r, ())])


def laplace_exponent(f: StepFunction, mu: IntensityMeasure) -> float:
    """The integral of (e^f - 1) rho dm; rational coefficients exact, one
    float exponential per constant piece."""
    hull = _hull(
        f.ctx, f.deviation_support(), mu.density.deviation_support()
    )
    if hull.is_empty:
        return 0.0
    cells = refine_window(hull, [f, mu.density])
    return math.fsum(
        math.expm1(fv) * float(rv * cell.measure) for cell, (fv, rv) in cells
    )


def _moment1(f: StepFunction, mu: IntensityMeasure) -> Fraction:
    hull = _hull(f.ctx, f.deviation_support(), mu.density.deviation_support())
    if hull.is_empty:
        return Fraction(0)
    cells = refine_window(hull, [f, mu.density])
    return sum((fv * rv * cell.measure for cell, (fv, rv) in cells), Fraction(0))


def _cross_moment(f1, f2, mu) -> Fraction:
    hull = _hull(
        f1.ctx,
        f1.deviation_support(),
        f2.deviation_support(),
        mu.density.deviation_support(),
    )
    if hull.is_empty:
        return Fraction(0)
    cells = refine_window(hull, [f1, f2, mu.density])
    return sum(
        (v1 * v2 * rv * cell.measure for cell, (v1, v2, rv) in cells),
        Fraction(0),
    )


def _poisson_pmf(lam: float, k: int) -> float:
    return math.exp(-lam) * lam**k / math.factorial(k)


def _predicate_prob(op: str, k: int, lam: float) -> float:
    if op == EQ:
        return _poisson_pmf(lam, k)
    cdf = sum(_poisson_pmf(lam, j) for j in range(k + 1))
    if op == LE:
        return cdf
    return 1.0 - sum(_poisson_pmf(lam, j) for j in range(k))


def expect_exact(f: CylinderFunction, mu: IntensityMeasure) -> float:
    """Closed-form Poisson expectation for the supported shapes."""
    if isinstance(f, Exponential):
        return math.exp(laplace_exponent(f.f, mu))
    if isinstance(f, Polynomial):
        if f.degree > 2:
            raise UnsupportedShape("polynomial expectations need degree <= 2")
        if f.degree == 1:
            return float(_moment1(f.factors[0][0], mu))
        if len(f.factors) == 1:
            g = f.factors[0][0]
            m1 = _moment1(g, mu)
            return float(_cross_moment(g, g, mu) + m1 * m1)
        g1, g2 = f.factors[0][0], f.factors[1][0]
        return float(
            _cross_moment(g1, g2, mu) + _moment1(g1, mu) * _moment1(g2, mu)
        )
    if isinstance(f, CountEvent):
        if not f.sets_disjoint():
            raise UnsupportedShape(
                "count events need pairwise disjoint sets for exact expectation"
            )
        out = 1.0
        for s, op, k in f.conditions:
            out *= _predicate_prob(op, k, float(mu.mass(s)))
        return out
    raise UnsupportedShape(f"no closed form for {type(f).__name__}")


# -- Monte Carlo engine -----------------------------------------------------

_CHUNK = 4096


def _chunk_rng(seed: int, index: int) -> random.Random:
    return random.Random(f"{seed}:{index}")


def mc_atoms(mu: IntensityMeasure, window: ClopenSet, fns: list) -> list:
    """Sampling atoms (cell, rate, values) for count-based estimators.

    Every listed function is constant per cell, so any descriptor value is a
    function of the per-cell counts alone; estimating from counts is
    distribution-exact, not an approximation.
    """
    cells = refine_window(window, [mu.density] + fns)
    return [
        (cell, float(values[0] * cell.measure), values[1:])
        for cell, values in cells
        if values[0] > 0
    ]


def mc_run(atoms: list, eval_counts, n: int, seed: int):
    """Mean and standard error of eval_counts over n Poisson draws.

    The stream is pre-split into fixed-size chunks merged in index order, so
    the estimate is bit-identical for a given (seed, n) regardless of any
    parallel scheduling.
    """
    rates = [rate for _, rate, _ in atoms]
    total = 0.0
    total_sq = 0.0
    done = 0
    index = 0
    while done < n:
        take = min(_CHUNK, n - done)
        rng = _chunk_rng(seed, index)
        for _ in range(take):
            counts = [_poisson_inverse(lam, rng.random()) for lam in rates]
            v = eval_counts(counts)
            total += v
            total_sq += v * v
        done += take
        index += 1
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    se = math.sqrt(var / n) if n > 1 else float("inf")
    return mean, se


def _counts_evaluator(f: CylinderFunction, atoms: list, offset: int = 0):
    """Closure computing F(gamma) from per-atom counts; values[offset...]
    hold this descriptor's per-cell data in mc_atoms order."""
    if isinstance(f, Exponential):
        fvals = [float(vals[offset]) for _, _, vals in atoms]

        def ev(counts):
            return math.exp(sum(c * v for c, v in zip(counts, fvals)))

        return ev
    if isinstance(f, Polynomial):
        table = [
            [float(vals[offset + j]) for _, _, vals in atoms]
            for j in range(len(f.factors))
        ]
        powers = [e for _, e in f.factors]

        def ev(counts):
            out = 1.0
            for row, e in zip(table, powers):
                out *= sum(c * v for c, v in zip(counts, row)) ** e
            return out

        return ev
    if isinstance(f, CountEvent):
        masks = [
            [bool(vals[offset + i]) for _, _, vals in atoms]
            for i in range(len(f.conditions))
        ]
        preds = [(op, k) for _, op, k in f.conditions]

        def ev(counts):
            for mask, (op, k) in zip(masks, preds):
                total = sum(c for c, inside in zip(counts, mask) if inside)
                if not _holds(total, op, k):
                    return 0.0
            return 1.0

        return ev
    raise UnsupportedShape(f"cannot evaluate {type(f).__name__} from counts")


def _descriptor_fns(f: CylinderFunction) -> list:
    if isinstance(f, Exponential):
        return [f.f]
    if isinstance(f, Polynomial):
        return [fn for fn, _ in f.factors]
    if isinstance(f, CountEvent):
        return [s for s, _, _ in f.conditions]
    raise UnsupportedShape(f"unknown descriptor {type(f).__name__}")


def expect_mc(f: CylinderFunction, mu: IntensityMeasure, n: int, seed: int):
    """Monte Carlo mean and standard error over n independent configurations
    on an auto-derived window; deterministic for a fixed seed."""
    if n < 1000:
        raise PadicAffineError("Monte Carlo runs need n >= 1000")
    window = _hull(
        mu.ctx, f.window(), mu.density.deviation_support()
    )
    if window.is_empty:
        v = f.evaluate(Configuration((), ClopenSet.empty(mu.ctx)))
        return v, 0.0
    fns = _descriptor_fns(f)
    atoms = mc_atoms(mu, window, fns)
    ev = _counts_evaluator(f, atoms)
    return mc_run(atoms, ev, n, seed)

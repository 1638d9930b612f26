"""Bruhat-Schwartz test functions on Q_p^n as finite sums of
character-modulated ball indicators.

Each term is coeff * chi_p(<b, x>) * 1_{B_gamma(a)}(x) with the Euclidean
dot form <.,.>.  This class is closed under exact Haar integration, exact
Fourier transforms (a modulated indicator maps to a modulated indicator),
pointwise products and group translations, so every operation here is a
finite exact computation; the only rounding is one complex exponential per
folded phase.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .padic import (
    PadicError,
    PadicScalar,
    emit_rational_literal,
    frac_norm,
    frac_part,
    parse_rational_literal,
    p_power,
    trunc_below,
    unit_phase,
)


@dataclass(frozen=True)
class Term:
    coeff: complex
    b: tuple          # modulation, Fractions
    a: tuple          # ball center, Fractions
    gamma: int        # ball radius p^gamma


def _vec(values, dim) -> tuple:
    vals = tuple(Fraction(v) for v in values)
    if len(vals) != dim:
        raise PadicError(f"expected {dim} components, got {len(vals)}")
    return vals


def _dot(u, v) -> Fraction:
    return sum((ui * vi for ui, vi in zip(u, v)), Fraction(0))


def _sup_norm(u, p) -> Fraction:
    n = Fraction(0)
    for ui in u:
        n = max(n, frac_norm(ui, p))
    return n


def _reduce_term(t: Term, p: int) -> Term:
    """Canonical digit ranges: center mod the ball lattice, modulation mod its
    dual, with the discarded modulation tail folded into the coefficient."""
    a = tuple(trunc_below(ai, -t.gamma, p) for ai in t.a)
    b = tuple(trunc_below(bi, t.gamma, p) for bi in t.b)
    tail = tuple(bi - bj for bi, bj in zip(t.b, b))
    coeff = t.coeff
    if any(tail):
        coeff = coeff * unit_phase(frac_part(_dot(tail, a), p))
    return Term(coeff, b, a, t.gamma)


def _ball_contains(a1, g1, a2, g2, p) -> bool:
    """B_g1(a1) contains B_g2(a2) (requires g1 >= g2)."""
    diff = tuple(x - y for x, y in zip(a1, a2))
    return _sup_norm(diff, p) <= p_power(p, g1)


def _split_pieces(outer: Term, inner_a, inner_g, p, dim):
    """Split the outer ball into the sibling cells along the path down to the
    inner ball, plus the inner ball itself; all pieces inherit outer's data."""
    pieces = []
    cur = outer.gamma
    anchor = inner_a
    while cur > inner_g:
        step = p_power(p, -cur)
        for r in itertools.product(range(p), repeat=dim):
            if all(ri == 0 for ri in r):
                continue
            center = tuple(ai + ri * step for ai, ri in zip(anchor, r))
            pieces.append(Term(outer.coeff, outer.b, center, cur - 1))
        cur -= 1
    pieces.append(Term(outer.coeff, outer.b, inner_a, inner_g))
    return [_reduce_term(t, p) for t in pieces]


class ModulatedCellFunction:
    """Finite sum of modulated ball indicators; immutable after construction.

    Canonical form: per-term digit ranges reduced, balls within an
    equal-modulation group pairwise disjoint, identical cells merged, terms
    sorted deterministically.
    """

    __slots__ = ("prime", "dim", "terms")

    def __init__(self, prime, dim, terms, _canonical=False):
        self.prime = prime
        self.dim = dim
        if _canonical:
            self.terms = tuple(terms)
        else:
            self.terms = self._canonicalize(terms)

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, prime, dim):
        return cls(prime, dim, (), _canonical=True)

    @classmethod
    def from_terms(cls, prime, dim, raw):
        """raw: iterable of (coeff, b-sequence, a-sequence, gamma)."""
        terms = [Term(complex(c), _vec(b, dim), _vec(a, dim), int(g)) for c, b, a, g in raw]
        return cls(prime, dim, terms)

    @classmethod
    def indicator(cls, prime, dim, center, gamma, coeff=1.0):
        return cls.from_terms(prime, dim, [(coeff, (0,) * dim, center, gamma)])

    def _canonicalize(self, raw_terms):
        p, dim = self.prime, self.dim
        pool = [_reduce_term(t, p) for t in raw_terms if t.coeff != 0]
        while True:
            groups = defaultdict(list)
            for t in pool:
                groups[t.b].append(t)
            new_pool = []
            split = False
            for b, ts in groups.items():
                cells = {}
                for t in ts:
                    key = (t.a, t.gamma)
                    cells[key] = cells.get(key, 0j) + t.coeff
                items = [Term(c, b, a, g) for (a, g), c in cells.items() if c != 0]
                items.sort(key=lambda t: -t.gamma)
                done = []
                while items:
                    t = items.pop(0)
                    inner = None
                    for s in items:
                        if t.gamma > s.gamma and _ball_contains(t.a, t.gamma, s.a, s.gamma, p):
                            inner = s
                            break
                    if inner is None:
                        done.append(t)
                    else:
                        items.extend(_split_pieces(t, inner.a, inner.gamma, p, dim))
                        split = True
                new_pool.extend(done)
            pool = new_pool
            if not split:
                break
        pool.sort(key=lambda t: (t.gamma, t.a, t.b))
        return tuple(pool)

    # -- evaluation --------------------------------------------------------

    def __call__(self, point):
        if any(isinstance(x, PadicScalar) for x in point):
            return self._eval_padic(point)
        x = _vec(point, self.dim)
        p = self.prime
        total = 0j
        for t in self.terms:
            radius = p_power(p, t.gamma)
            if all(frac_norm(xi - ai, p) <= radius for xi, ai in zip(x, t.a)):
                total += t.coeff * unit_phase(frac_part(_dot(t.b, x), p))
        return total

    def _eval_padic(self, point):
        p = self.prime
        comps = [
            x if isinstance(x, PadicScalar) else PadicScalar.from_rational(Fraction(x), p)
            for x in point
        ]
        if len(comps) != self.dim:
            raise PadicError("dimension mismatch in evaluation point")
        total = 0j
        for t in self.terms:
            radius = p_power(p, t.gamma)
            if all((xi - ai).norm() <= radius for xi, ai in zip(comps, t.a)):
                acc = PadicScalar.zero(p)
                for bi, xi in zip(t.b, comps):
                    if bi != 0:
                        acc = acc + xi * bi
                total += t.coeff * unit_phase(acc.frac_part())
        return total

    def constancy_level(self, point) -> int:
        """An l with f(x + x') = f(x) whenever ||x'||_p <= p^l."""
        x = _vec(point, self.dim)
        p = self.prime
        level = None
        for t in self.terms:
            radius = p_power(p, t.gamma)
            dist = _sup_norm(tuple(xi - ai for xi, ai in zip(x, t.a)), p)
            if dist <= radius:
                # membership stable inside the ball; character trivial on
                # shifts with |b_i * x'_i| <= 1
                lt = t.gamma
                for bi in t.b:
                    if bi != 0:
                        lt = min(lt, frac_valuation_of(bi, p))
            else:
                # dist = p^e with e > gamma; membership stable below it
                lt = frac_valuation_of(dist, p) - 1
            level = lt if level is None else min(level, lt)
        return 0 if level is None else level

    # -- integration and inner products --------------------------------------

    def integrate(self) -> complex:
        """Exact Haar integral (self-dual normalization, vol(Z_p^n) = 1)."""
        p, n = self.prime, self.dim
        total = 0j
        for t in self.terms:
            if _sup_norm(t.b, p) <= p_power(p, -t.gamma):
                total += t.coeff * float(p_power(p, n * t.gamma)) * unit_phase(
                    frac_part(_dot(t.b, t.a), p)
                )
        return total

    def inner(self, other) -> complex:
        """<f, g> = integral of f * conj(g)."""
        self._compat(other)
        p, n = self.prime, self.dim
        total = 0j
        for t1 in self.terms:
            for t2 in other.terms:
                cell = _intersect(t1.a, t1.gamma, t2.a, t2.gamma, p)
                if cell is None:
                    continue
                a, g = cell
                bd = tuple(x - y for x, y in zip(t1.b, t2.b))
                if _sup_norm(bd, p) <= p_power(p, -g):
                    total += (
                        t1.coeff
                        * t2.coeff.conjugate()
                        * float(p_power(p, n * g))
                        * unit_phase(frac_part(_dot(bd, a), p))
                    )
        return total

    def norm2(self) -> float:
        return self.inner(self).real

    # -- algebra -------------------------------------------------------------

    def _compat(self, other):
        if self.prime != other.prime or self.dim != other.dim:
            raise PadicError("mixed primes or dimensions")

    def __add__(self, other):
        self._compat(other)
        return ModulatedCellFunction(self.prime, self.dim, self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "ModulatedCellFunction":
        c = complex(c)
        return ModulatedCellFunction(
            self.prime,
            self.dim,
            tuple(Term(t.coeff * c, t.b, t.a, t.gamma) for t in self.terms),
            _canonical=(c != 0),
        ) if c != 0 else ModulatedCellFunction.zero(self.prime, self.dim)

    def mul(self, other) -> "ModulatedCellFunction":
        """Exact pointwise product."""
        self._compat(other)
        out = []
        for t1 in self.terms:
            for t2 in other.terms:
                cell = _intersect(t1.a, t1.gamma, t2.a, t2.gamma, self.prime)
                if cell is None:
                    continue
                a, g = cell
                out.append(Term(t1.coeff * t2.coeff, tuple(x + y for x, y in zip(t1.b, t2.b)), a, g))
        return ModulatedCellFunction(self.prime, self.dim, out)

    def conjugate(self) -> "ModulatedCellFunction":
        return ModulatedCellFunction(
            self.prime,
            self.dim,
            tuple(Term(t.coeff.conjugate(), tuple(-bi for bi in t.b), t.a, t.gamma) for t in self.terms),
        )

    def translate(self, shift) -> "ModulatedCellFunction":
        """f(x - shift)."""
        s = _vec(shift, self.dim)
        out = []
        for t in self.terms:
            phase = unit_phase(-frac_part(_dot(t.b, s), self.prime))
            out.append(Term(t.coeff * phase, t.b, tuple(ai + si for ai, si in zip(t.a, s)), t.gamma))
        return ModulatedCellFunction(self.prime, self.dim, out)

    def modulate(self, d) -> "ModulatedCellFunction":
        """chi_p(<d, x>) * f(x)."""
        d = _vec(d, self.dim)
        out = [Term(t.coeff, tuple(bi + di for bi, di in zip(t.b, d)), t.a, t.gamma) for t in self.terms]
        return ModulatedCellFunction(self.prime, self.dim, out)

    def reflect(self, signs=None) -> "ModulatedCellFunction":
        """f(Sx) for a sign matrix S (default: full reflection f(-x))."""
        if signs is None:
            signs = (-1,) * self.dim
        out = [
            Term(t.coeff, tuple(s * bi for s, bi in zip(signs, t.b)), tuple(s * ai for s, ai in zip(signs, t.a)), t.gamma)
            for t in self.terms
        ]
        return ModulatedCellFunction(self.prime, self.dim, out)

    # -- Fourier transforms ---------------------------------------------------

    def fourier(self, inverse=False) -> "ModulatedCellFunction":
        """Exact Euclidean transform with kernel chi_p(+<x,k>) (self-dual).

        Term-by-term: a level-gamma cell maps to a level-(-gamma) cell, so the
        class is closed with zero growth.
        """
        p, n = self.prime, self.dim
        out = []
        for t in self.terms:
            coeff = t.coeff * float(p_power(p, n * t.gamma)) * unit_phase(frac_part(_dot(t.a, t.b), p))
            if inverse:
                out.append(Term(coeff, tuple(-ai for ai in t.a), t.b, -t.gamma))
            else:
                out.append(Term(coeff, t.a, tuple(-bi for bi in t.b), -t.gamma))
        return ModulatedCellFunction(p, n, out)

    def fourier_minkowski(self, inverse=False) -> "ModulatedCellFunction":
        """The transform built from the bilinear form x0*k0 - x.k (dim 4):
        the Euclidean transform composed with a spatial sign flip."""
        if self.dim != 4:
            raise PadicError("the Minkowski transform lives on dimension 4")
        signs = (1, -1, -1, -1)
        if inverse:
            return self.reflect(signs).fourier(inverse=True)
        return self.fourier().reflect(signs)

    def convolve(self, other) -> "ModulatedCellFunction":
        self._compat(other)
        return self.fourier().mul(other.fourier()).fourier(inverse=True)

    # -- misc -----------------------------------------------------------------

    def support_radius_exp(self) -> int | None:
        """Smallest e with supp(f) inside the ball of radius p^e at 0."""
        if not self.terms:
            return None
        e = None
        for t in self.terms:
            et = t.gamma
            for ai in t.a:
                if ai != 0:
                    et = max(et, -frac_valuation_of(ai, self.prime))
            e = et if e is None else max(e, et)
        return e

    def __eq__(self, other):
        if not isinstance(other, ModulatedCellFunction):
            return NotImplemented
        return (
            self.prime == other.prime
            and self.dim == other.dim
            and self.terms == other.terms
        )

    __hash__ = None

    def __repr__(self):
        return f"ModulatedCellFunction(p={self.prime}, dim={self.dim}, terms={len(self.terms)})"


def _intersect(a1, g1, a2, g2, p):
    """Intersection of two balls: nested or disjoint (ultrametric)."""
    if g1 < g2:
        a1, g1, a2, g2 = a2, g2, a1, g1
    if _ball_contains(a1, g1, a2, g2, p):
        return (a2, g2)
    return None


def frac_valuation_of(q, p):
    from .padic import frac_valuation

    return frac_valuation(q, p)


# -- function-file format -----------------------------------------------------
# One term per line: `<re> <im> ; b=<lit>,<lit>,... ; a=<lit>,... ; gamma=<int>`
# `#` starts a comment.  Literals use the scalar grammar; emission is canonical
# so emit -> parse -> emit round-trips byte-exactly.


def emit_function(f: ModulatedCellFunction) -> str:
    lines = [f"# p={f.prime} dim={f.dim} terms={len(f.terms)}"]
    for t in f.terms:
        bs = ",".join(emit_rational_literal(x) for x in t.b)
        as_ = ",".join(emit_rational_literal(x) for x in t.a)
        lines.append(f"{t.coeff.real!r} {t.coeff.imag!r} ; b={bs} ; a={as_} ; gamma={t.gamma}")
    return "\n".join(lines) + "\n"


def parse_function(text: str, prime: int) -> ModulatedCellFunction:
    terms = []
    dim = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            fields = [part.strip() for part in line.split(";")]
            if len(fields) != 4:
                raise PadicError("expected 4 ';'-separated fields")
            re_s, im_s = fields[0].split()
            coeff = complex(float(re_s), float(im_s))
            if not fields[1].startswith("b=") or not fields[2].startswith("a=") or not fields[3].startswith("gamma="):
                raise PadicError("fields must be b=, a=, gamma=")
            b = tuple(parse_rational_literal(x, prime) for x in fields[1][2:].split(","))
            a = tuple(parse_rational_literal(x, prime) for x in fields[2][2:].split(","))
            gamma = int(fields[3][len("gamma="):])
            if dim is None:
                dim = len(b)
            if len(b) != dim or len(a) != dim:
                raise PadicError(f"inconsistent dimension (expected {dim})")
            terms.append(Term(coeff, b, a, gamma))
        except PadicError as exc:
            raise PadicError(f"line {lineno}: {exc}") from None
        except (ValueError, IndexError) as exc:
            raise PadicError(f"line {lineno}: malformed term line: {exc}") from None
    if dim is None:
        raise PadicError("function file contains no terms")
    return ModulatedCellFunction(prime, dim, terms)

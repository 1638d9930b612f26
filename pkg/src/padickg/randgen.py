"""Seeded generators for randomized suites; everything is deterministic in
(prime, seed)."""

from __future__ import annotations

import random
from fractions import Fraction

from .schwartz import ModulatedCellFunction


def rng_for(seed: int) -> random.Random:
    return random.Random(seed)


def random_rational(rng, p, span=20, denom_exp=2) -> Fraction:
    """Rational with p-power denominator (exact cell data)."""
    num = rng.randint(-span, span)
    e = rng.randint(0, denom_exp)
    return Fraction(num, p**e)


def random_plain_rational(rng, span=30) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def random_point(rng, p, dim, span=20, denom_exp=2):
    return tuple(random_rational(rng, p, span, denom_exp) for _ in range(dim))


def random_function(rng, p, dim, max_terms=4, level_range=(-2, 2), mod_exp=1, span=6):
    """Random Bruhat-Schwartz function with small exact cell data."""
    lo, hi = level_range
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        gamma = rng.randint(lo, hi)
        coeff = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        a = tuple(random_rational(rng, p, span, max(0, -gamma)) for _ in range(dim))
        b = tuple(random_rational(rng, p, span, max(0, gamma) + mod_exp) for _ in range(dim))
        terms.append((coeff, b, a, gamma))
    return ModulatedCellFunction.from_terms(p, dim, terms)


def inside_cell_pool(shell, level=-1, limit=24, span=None):
    """Deterministic pool of certified inside cells at the given level."""
    import itertools

    p = shell.prime
    span = span if span is not None else min(2 * p, 14)
    pool = []
    for c in itertools.product(range(span), repeat=3):
        cell = shell.classify(tuple(Fraction(x) for x in c), level)
        if cell.status == "inside":
            pool.append(cell)
            if len(pool) >= limit:
                break
    return pool


def random_certified_function(rng, shell, max_terms=3, pool=None, mod_exp=1):
    """4-dim function whose spatial balls are certified inside cells; shell
    integrals of these resolve exactly (zero error bound)."""
    p = shell.prime
    pool = pool or inside_cell_pool(shell)
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        cell = rng.choice(pool)
        coeff = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if rng.random() < 0.5:
            # time ball that meets a branch: truncate +-omega to the level
            from .padic import trunc_below

            sgn = rng.choice([1, -1])
            a0 = trunc_below((cell.omega * sgn).as_fraction(), -cell.gamma, p)
        else:
            a0 = Fraction(rng.randint(-6, 6))
        b = tuple(random_rational(rng, p, 6, mod_exp) for _ in range(4))
        terms.append((coeff, b, (a0,) + cell.center, cell.gamma))
    return ModulatedCellFunction.from_terms(p, 4, terms)


def random_supported_function3(rng, shell, max_terms=3, pool=None, mod_exp=1):
    """Spatial-side function with certified support inside the shell domain."""
    p = shell.prime
    pool = pool or inside_cell_pool(shell)
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        cell = rng.choice(pool)
        coeff = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        b = tuple(random_rational(rng, p, 6, mod_exp) for _ in range(3))
        terms.append((coeff, b, cell.center, cell.gamma))
    return ModulatedCellFunction.from_terms(p, 3, terms)

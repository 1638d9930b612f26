import math
import random
from fractions import Fraction

import pytest

from padickg.padic import (
    PadicScalar,
    PadicError,
    PrimeMismatchError,
    frac_norm,
    frac_part,
    frac_valuation,
    legendre_symbol,
    parse_scalar_literal,
    trunc_below,
    unit_phase,
)


def embed(q, p=7, prec=32):
    return PadicScalar.from_rational(Fraction(q), p, prec)


def random_rational(rng, span=40):
    num = rng.randint(-span, span)
    den = rng.randint(1, span)
    return Fraction(num, den)


class TestFieldOps:
    def test_integer_addition_digits(self):
        x = embed(3) + embed(5)
        assert x.val == 0
        assert x.digits(2) == (1, 1)

    def test_valuation_cancellation(self):
        x = embed(Fraction(1, 7)) * embed(7)
        assert x == embed(1)
        assert x.val == 0

    def test_inverse_of_two_mod_343(self):
        x = embed(1, prec=3) / embed(2, prec=3)
        assert x.digits(3) == (4, 3, 3)  # 172, and 2*172 = 343 + 1

    def test_prime_mismatch(self):
        with pytest.raises(PrimeMismatchError):
            embed(1, p=7) + embed(1, p=11)

    def test_division_by_tracked_zero(self):
        with pytest.raises(ZeroDivisionError):
            embed(1) / embed(0)

    def test_full_cancellation_gives_tracked_zero(self):
        x = embed(Fraction(22, 7)) - embed(Fraction(22, 7))
        assert x.is_zero()
        assert x.norm() == 0

    def test_rational_oracle(self):
        rng = random.Random(7)
        for _ in range(400):
            a, b = random_rational(rng), random_rational(rng)
            xa, xb = embed(a), embed(b)
            assert (xa + xb) == embed(a + b)
            assert (xa - xb) == embed(a - b)
            assert (xa * xb) == embed(a * b)
            if b != 0:
                assert (xa / xb) == embed(a / b)

    def test_add_precision_tracked_conservatively(self):
        # Hensel-root path (no exact backing): near-cancellation loses digits.
        two = embed(2)
        r, _ = two.sqrt()
        eps = embed(Fraction(7**20))
        y = (r + eps) - r
        assert (not y.is_zero()) and y.val == 20
        assert y.prec <= 32 - 20


class TestNormOrdAc:
    def test_forty_nine(self):
        x = embed(49)
        assert x.norm() == Fraction(1, 49)
        assert x.ord() == 2
        assert x.ac() == embed(1)

    def test_three_sevenths(self):
        x = embed(Fraction(3, 7))
        assert x.norm() == 7
        assert x.ord() == -1
        assert x.ac() == embed(3)

    def test_zero(self):
        z = embed(0)
        assert z.norm() == 0
        assert z.ord() == math.inf

    def test_ultrametric(self):
        rng = random.Random(11)
        strict = 0
        for _ in range(10_000):
            a, b = random_rational(rng), random_rational(rng)
            if a == 0 or b == 0 or a + b == 0:
                continue
            na, nb = frac_norm(a, 7), frac_norm(b, 7)
            assert frac_norm(a * b, 7) == na * nb
            ns = frac_norm(a + b, 7)
            assert ns <= max(na, nb)
            if na != nb:
                assert ns == max(na, nb)
                strict += 1
        assert strict > 0


class TestFracChar:
    def test_integers_have_trivial_character(self):
        for q in (0, 1, -5, 21, Fraction(3, 5)):
            x = embed(q)
            assert x.frac_part() == 0
            assert x.char() == 1

    def test_three_sevenths(self):
        x = embed(Fraction(3, 7))
        assert x.frac_part() == Fraction(3, 7)
        assert abs(x.char() - unit_phase(Fraction(3, 7))) == 0

    def test_negative_one_over_49(self):
        x = embed(Fraction(-1, 49))
        assert x.frac_part() == Fraction(48, 49)

    def test_character_is_additive(self):
        rng = random.Random(3)
        for _ in range(500):
            a, b = random_rational(rng), random_rational(rng)
            lhs = embed(a).char() * embed(b).char()
            rhs = embed(a + b).char()
            assert abs(lhs - rhs) < 1e-12

    def test_digit_path_matches_rational_path(self):
        rng = random.Random(5)
        for _ in range(300):
            q = random_rational(rng)
            x = embed(q)
            y = PadicScalar(7, x.val, x.unit, x.prec, None) if not x.is_zero() else x
            assert y.frac_part() == frac_part(q, 7)


class TestQuadratic:
    def test_two_is_a_residue_mod_7(self):
        x = embed(2)
        assert x.legendre() == 1 and x.is_square()

    def test_five_is_not(self):
        x = embed(5)
        assert x.legendre() == -1 and not x.is_square()
        assert x.sqrt() is None

    def test_odd_valuation_is_not_a_square(self):
        assert not embed(7).is_square()

    def test_residues_by_enumeration(self):
        for p in (3, 7, 11, 19):
            residues = {pow(t, 2, p) for t in range(1, p)}
            for a in range(1, p):
                assert legendre_symbol(a, p) == (1 if a in residues else -1)

    def test_sqrt_of_one(self):
        pos, neg = embed(1).sqrt()
        assert pos == embed(1)
        assert neg.digits(3) == (6, 6, 6)

    def test_sqrt_of_two(self):
        pos, _ = embed(2, prec=3).sqrt()
        assert pos.digits(3) == (3, 1, 2)  # 108^2 = 34*343 + 2

    def test_sqrt_squares_back_full_precision(self):
        rng = random.Random(13)
        for p in (3, 7, 11, 19):
            found = 0
            while found < 20:
                q = random_rational(rng)
                if q == 0:
                    continue
                x = PadicScalar.from_rational(q, p)
                if not x.is_square():
                    continue
                found += 1
                for r in x.sqrt():
                    assert r * r == x
                pos, neg = x.sqrt()
                assert pos.sign() == 1 and neg.sign() == -1


class TestSign:
    def test_examples(self):
        assert embed(3).sign() == 1
        assert embed(-3).sign() == -1  # -3 = 4 mod 7
        assert embed(Fraction(1, 7)).sign() == 1

    def test_antisymmetry(self):
        rng = random.Random(17)
        for _ in range(2000):
            q = random_rational(rng)
            if q == 0:
                continue
            assert embed(-q).sign() == -embed(q).sign()

    def test_zero_has_no_sign(self):
        with pytest.raises(PadicError):
            embed(0).sign()


class TestLiterals:
    def test_padic_literal(self):
        x = parse_scalar_literal("7adic:v=-1:d=3,1,2", 7)
        assert x.as_fraction() == Fraction(3 + 7 + 2 * 49, 7)

    def test_rational_literal(self):
        assert parse_scalar_literal("rat:-3/49", 7).as_fraction() == Fraction(-3, 49)
        assert parse_scalar_literal("5", 7).as_fraction() == 5

    def test_leading_zero_digit_rejected(self):
        with pytest.raises(PadicError):
            parse_scalar_literal("7adic:v=-1:d=0,1", 7)

    def test_prime_mismatch(self):
        with pytest.raises(PrimeMismatchError):
            parse_scalar_literal("11adic:v=0:d=1", 7)


class TestTruncation:
    def test_trunc_below_reduces_mod_lattice(self):
        rng = random.Random(19)
        for _ in range(500):
            q = random_rational(rng)
            for cutoff in (-2, -1, 0, 1, 3):
                r = trunc_below(q, cutoff, 7)
                assert 0 <= r < Fraction(7) ** cutoff or r == 0
                diff = q - r
                if diff != 0:
                    assert frac_valuation(diff, 7) >= cutoff

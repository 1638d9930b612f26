import itertools
from fractions import Fraction

import pytest

from padickg.padic import PadicError, unit_phase
from padickg.randgen import random_function, random_point, rng_for
from padickg.schwartz import ModulatedCellFunction, Term, emit_function, parse_function

P = 7


def unit_ball(dim=1, coeff=1.0):
    return ModulatedCellFunction.indicator(P, dim, (0,) * dim, 0, coeff)


def brute_fourier_value(f, k):
    """Riemann-sum oracle at certified resolution: the integrand is constant
    on level -L cells, so the cell sum is exact."""
    from padickg.padic import frac_part, frac_valuation
    from padickg.schwartz import _dot

    p, n = f.prime, f.dim

    def den_exp(q):
        return max(0, -frac_valuation(q, p)) if q != 0 else 0

    L = max(max(0, den_exp(ki)) for ki in k)
    E = 0
    for t in f.terms:
        L = max(L, -t.gamma if t.gamma < 0 else 0)
        L = max(L, max((den_exp(bi) for bi in t.b), default=0))
        E = max(E, t.gamma, max((-frac_valuation(ai, p) for ai in t.a if ai != 0), default=0))
    total = 0j
    vol = float(Fraction(p) ** (-L * n))
    step = Fraction(1, p**E)
    for idx in itertools.product(range(p ** (L + E)), repeat=n):
        x = tuple(i * step for i in idx)
        total += f(x) * unit_phase(frac_part(_dot(x, k), p)) * vol
    return total


class TestCanonicalization:
    def test_cancellation(self):
        f = unit_ball() + unit_ball(coeff=-1.0)
        assert f.terms == ()

    def test_nested_refinement(self):
        inner = ModulatedCellFunction.indicator(P, 1, (0,), -1)
        f = unit_ball() + inner
        # coeff 2 on the small ball, 1 on its 6 sibling cells
        assert len(f.terms) == 7
        coeffs = sorted(t.coeff.real for t in f.terms)
        assert coeffs == [1.0] * 6 + [2.0]
        assert sum(t.coeff.real * 7.0 ** t.gamma for t in f.terms) == pytest.approx(1 + 1 / 7)

    def test_single_term_unchanged(self):
        f = ModulatedCellFunction.from_terms(P, 2, [(1.5, (0, Fraction(1, 7)), (1, 2), 0)])
        assert len(f.terms) == 1

    def test_evaluation_unchanged_by_canonicalization(self):
        rng = rng_for(23)
        for _ in range(40):
            raw = []
            for _ in range(rng.randint(1, 5)):
                gamma = rng.randint(-2, 2)
                raw.append(
                    Term(
                        complex(rng.uniform(-1, 1), rng.uniform(-1, 1)),
                        (Fraction(rng.randint(-30, 30), 7 ** rng.randint(0, 2)),),
                        (Fraction(rng.randint(-30, 30), 7 ** rng.randint(0, 2)),),
                        gamma,
                    )
                )
            f = ModulatedCellFunction(P, 1, raw)
            raw_fn = ModulatedCellFunction(P, 1, raw, _canonical=True)
            for _ in range(25):
                x = random_point(rng, P, 1, span=40, denom_exp=3)
                assert abs(f(x) - raw_fn(x)) < 1e-12

    def test_disjointness_within_modulation_groups(self):
        rng = rng_for(29)
        for _ in range(25):
            f = random_function(rng, P, 1, max_terms=5)
            from collections import defaultdict

            groups = defaultdict(list)
            for t in f.terms:
                groups[t.b].append(t)
            from padickg.schwartz import _intersect

            for ts in groups.values():
                for t1, t2 in itertools.combinations(ts, 2):
                    assert _intersect(t1.a, t1.gamma, t2.a, t2.gamma, P) is None


class TestIntegration:
    def test_unit_ball_dim4(self):
        f = unit_ball(dim=4)
        assert f.integrate() == 1

    def test_ball_volume(self):
        f = ModulatedCellFunction.indicator(P, 1, (0,), 1)
        assert f.integrate() == 7

    def test_modulated_ball_integrates_to_zero(self):
        f = ModulatedCellFunction.from_terms(P, 1, [(1, (Fraction(1, 7),), (0,), 0)])
        assert f.integrate() == 0
        # brute-force oracle over the 7 residue cells mod 7
        total = sum(unit_phase(Fraction(t, 7)) for t in range(7)) / 7
        assert abs(total - f.integrate()) < 1e-12


class TestFourier:
    def test_unit_ball_self_dual(self):
        f = unit_ball()
        assert f.fourier() == f

    def test_small_ball_support_volume_duality(self):
        f = ModulatedCellFunction.indicator(P, 1, (0,), -1)
        g = f.fourier()
        assert len(g.terms) == 1
        t = g.terms[0]
        assert t.gamma == 1 and abs(t.coeff - 1 / 7) < 1e-15 and t.b == (0,)

    def test_fourier_against_brute_force(self):
        rng = rng_for(31)
        for _ in range(8):
            f = random_function(rng, P, 1, max_terms=3, level_range=(-1, 0), span=3)
            g = f.fourier()
            for _ in range(4):
                k = random_point(rng, P, 1, span=8, denom_exp=1)
                assert abs(g(k) - brute_fourier_value(f, k)) < 1e-9

    def test_involution(self):
        rng = rng_for(37)
        for _ in range(30):
            f = random_function(rng, P, 2, max_terms=4)
            g = f.fourier().fourier()
            for _ in range(20):
                x = random_point(rng, P, 2)
                assert abs(g(x) - f(tuple(-xi for xi in x))) < 1e-12

    def test_round_trip_exact(self):
        rng = rng_for(41)
        for _ in range(30):
            f = random_function(rng, P, 1, max_terms=4)
            assert f.fourier(inverse=True).fourier() == f or _close(f.fourier(inverse=True).fourier(), f, rng)
            assert _close(f.fourier().fourier(inverse=True), f, rng)

    def test_parseval(self):
        rng = rng_for(43)
        for _ in range(50):
            f = random_function(rng, P, 1, max_terms=4)
            g = random_function(rng, P, 1, max_terms=4)
            assert abs(f.inner(g) - f.fourier().inner(g.fourier())) < 1e-9

    def test_minkowski_reflection_identity(self):
        f = ModulatedCellFunction.indicator(P, 4, (1, 0, 0, 0), -1)
        g = f.fourier_minkowski().fourier_minkowski()
        assert abs(g((-1, 0, 0, 0)) - 1) < 1e-12
        assert abs(g((1, 0, 0, 0))) < 1e-12

    def test_minkowski_round_trip(self):
        rng = rng_for(47)
        for _ in range(10):
            f = random_function(rng, P, 4, max_terms=3, level_range=(-1, 1))
            assert _close(f.fourier_minkowski().fourier_minkowski(inverse=True), f, rng, dim=4)


class TestCombine:
    def test_inner_unit_balls(self):
        assert unit_ball().inner(unit_ball()) == 1

    def test_nested_product(self):
        small = ModulatedCellFunction.indicator(P, 1, (0,), -1)
        assert unit_ball().mul(small) == small

    def test_modulated_inner_is_zero(self):
        f = ModulatedCellFunction.from_terms(P, 1, [(1, (Fraction(1, 7),), (0,), 0)])
        assert f.inner(unit_ball()) == 0

    def test_convolution_matches_pointwise_definition(self):
        rng = rng_for(53)
        f = random_function(rng, P, 1, max_terms=2, level_range=(-1, 1), span=2)
        g = random_function(rng, P, 1, max_terms=2, level_range=(-1, 1), span=2)
        h = f.convolve(g)
        # oracle: (f*g)(x) = integral f(y) g(x-y) dy
        for _ in range(6):
            x = random_point(rng, P, 1, span=5, denom_exp=1)
            oracle = f.mul(g.reflect().translate(x)).integrate()
            assert abs(h(x) - oracle) < 1e-9

    def test_local_constancy_level(self):
        rng = rng_for(59)
        for _ in range(20):
            f = random_function(rng, P, 1, max_terms=3)
            x = random_point(rng, P, 1)
            level = f.constancy_level(x)
            fx = f(x)
            for _ in range(10):
                # ||delta||_p <= p^level  (real factor 7^-level has norm 7^level)
                delta = Fraction(rng.randint(-6, 6)) * Fraction(7) ** (-level)
                assert abs(f((x[0] + delta,)) - fx) < 1e-12


class TestFileFormat:
    def test_spec_example_line(self):
        f = parse_function("1 0 ; b=0,0,0,0 ; a=0,0,0,0 ; gamma=0\n", P)
        assert f.dim == 4 and f.integrate() == 1

    def test_round_trip_bytes(self):
        rng = rng_for(61)
        for _ in range(20):
            f = random_function(rng, P, 2, max_terms=4)
            text = emit_function(f)
            g = parse_function(text, P)
            assert g.terms == f.terms
            assert emit_function(g) == text

    def test_bad_literal_reports_line(self):
        with pytest.raises(PadicError, match="line 2"):
            parse_function("1 0 ; b=0 ; a=0 ; gamma=0\n1 0 ; b=7adic:v=-1:d=0,1 ; a=0 ; gamma=0\n", P)

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(PadicError):
            parse_function("1 0 ; b=0 ; a=0 ; gamma=0\n1 0 ; b=0,0 ; a=0,0 ; gamma=0\n", P)


def _close(f, g, rng, dim=None, samples=15, tol=1e-12):
    dim = dim or f.dim
    for _ in range(samples):
        x = random_point(rng, f.prime, dim)
        if abs(f(x) - g(x)) > tol:
            return False
    return True

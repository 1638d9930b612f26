"""Exact p-adic scalars at fixed relative precision, plus the character,
Legendre/square-root and positivity primitives everything else consumes.

A nonzero scalar is p^val * unit with unit a p-adic unit known to `prec`
base-p digits.  Scalars built from rationals also carry the exact rational
value, so arithmetic on embedded rationals never silently loses digits;
Hensel roots carry digits only.  The positivity convention: a nonzero x is
positive iff the leading digit of its angular component lies in
{1, ..., (p-1)/2}.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

DEFAULT_PRECISION = 32

INFINITE_ORD = math.inf


class PadicError(Exception):
    pass


class PrimeMismatchError(PadicError):
    pass


class PrecisionLossError(PadicError):
    pass


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def require_odd_prime(p: int) -> int:
    if not is_odd_prime(p):
        raise PadicError(f"prime must be an odd prime >= 3, got {p}")
    return p


def int_valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def frac_valuation(q: Fraction, p: int) -> int:
    if q == 0:
        raise ValueError("valuation of 0 is infinite")
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)


def frac_norm(q: Fraction, p: int) -> Fraction:
    """|q|_p as an exact rational (0 for q = 0)."""
    if q == 0:
        return Fraction(0)
    return p_power(p, -frac_valuation(q, p))


def p_power(p: int, e: int) -> Fraction:
    return Fraction(p) ** e


def frac_part(q: Fraction, p: int) -> Fraction:
    """{q}_p in [0, 1): the principal (negative-power) part of the expansion.

    Works for any rational; only the p-part of the denominator matters.
    """
    q = Fraction(q)
    if q == 0:
        return Fraction(0)
    den = q.denominator
    d = int_valuation(den, p) if den % p == 0 else 0
    if d == 0:
        return Fraction(0)
    m = p**d
    e = den // m
    # r/m = q mod Z_p with 0 <= r < m
    r = (q.numerator * pow(e, -1, m)) % m
    return Fraction(r, m)


def trunc_below(q: Fraction, cutoff: int, p: int) -> Fraction:
    """Canonical representative of q modulo p^cutoff Z_p.

    Returns the finite expansion with digits only at positions < cutoff,
    lying in [0, p^cutoff).  Requires the denominator's p-part only.
    """
    q = Fraction(q)
    if q == 0:
        return Fraction(0)
    den = q.denominator
    d = int_valuation(den, p) if den % p == 0 else 0
    e = den // (p**d)
    if d + cutoff <= 0:
        return Fraction(0)
    m = p ** (d + cutoff)
    r = (q.numerator * pow(e, -1, m)) % m
    return Fraction(r, p**d)


def unit_phase(phase: Fraction) -> complex:
    """exp(2*pi*i*phase) for an exact rational phase."""
    phase = Fraction(phase)
    phase -= math.floor(phase)
    if phase == 0:
        return complex(1.0, 0.0)
    if phase == Fraction(1, 2):
        return complex(-1.0, 0.0)
    if phase == Fraction(1, 4):
        return complex(0.0, 1.0)
    if phase == Fraction(3, 4):
        return complex(0.0, -1.0)
    return cmath.exp(2j * math.pi * float(phase))


def legendre_symbol(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def sqrt_mod_prime(a: int, p: int) -> int:
    """A square root of the residue a modulo an odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if legendre_symbol(a, p) != 1:
        raise ValueError(f"{a} is not a quadratic residue mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks for p = 1 mod 4
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre_symbol(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, (b * b) % p
        t = (t * c) % p
        r = (r * b) % p
    return r


def hensel_sqrt_unit(u: int, p: int, prec: int) -> int:
    """Square root of the unit u modulo p^prec, by Newton doubling."""
    z = sqrt_mod_prime(u % p, p)
    k = 1
    mod = p
    while k < prec:
        k = min(2 * k, prec)
        mod = p**k
        z = (z + (u % mod) * pow(z, -1, mod)) * pow(2, -1, mod) % mod
    return z % (p**prec)


class PadicScalar:
    """A p-adic number at fixed relative precision.

    Nonzero: value = p^val * unit, 0 < unit < p^prec, unit % p != 0.
    Zero: val is None, unit 0 ("zero at tracked precision").
    `exact` holds the exact rational value when known (rational embeddings
    and their arithmetic); Hensel roots have exact=None.
    """

    __slots__ = ("prime", "val", "unit", "prec", "exact")

    def __init__(self, prime, val, unit, prec, exact=None):
        self.prime = prime
        self.val = val
        self.unit = unit
        self.prec = prec
        self.exact = exact

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, prime: int, prec: int = DEFAULT_PRECISION) -> "PadicScalar":
        return cls(prime, None, 0, prec, Fraction(0))

    @classmethod
    def from_rational(cls, q, prime: int, prec: int = DEFAULT_PRECISION) -> "PadicScalar":
        q = Fraction(q)
        if q == 0:
            return cls.zero(prime, prec)
        v = frac_valuation(q, prime)
        u = q / p_power(prime, v)
        mod = prime**prec
        num = u.numerator % mod
        den = u.denominator % mod
        unit = (num * pow(den, -1, mod)) % mod
        return cls(prime, v, unit, prec, q)

    @classmethod
    def from_digits(cls, val: int, digits, prime: int) -> "PadicScalar":
        digits = list(digits)
        if not digits or digits[0] == 0:
            raise PadicError("leading digit of a nonzero scalar must be nonzero")
        if any(d < 0 or d >= prime for d in digits):
            raise PadicError(f"digits must lie in 0..{prime - 1}")
        unit = 0
        for d in reversed(digits):
            unit = unit * prime + d
        exact = p_power(prime, val) * unit
        return cls(prime, val, unit, len(digits), exact)

    @classmethod
    def from_unit(cls, prime, val, unit, prec, exact=None) -> "PadicScalar":
        if unit % prime == 0:
            raise PadicError("unit part must be a p-adic unit")
        return cls(prime, val, unit % prime**prec, prec, exact)

    # -- basic structure ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.val is None

    def ord(self):
        """p-adic order; +inf for zero."""
        return INFINITE_ORD if self.val is None else self.val

    def norm(self) -> Fraction:
        if self.val is None:
            return Fraction(0)
        return p_power(self.prime, -self.val)

    def ac(self) -> "PadicScalar":
        """Angular component (unit part)."""
        if self.is_zero():
            raise PadicError("zero has no angular component")
        exact = None
        if self.exact is not None:
            exact = self.exact / p_power(self.prime, self.val)
        return PadicScalar(self.prime, 0, self.unit, self.prec, exact)

    def digits(self, count: int | None = None):
        """First `count` base-p digits of the unit part."""
        if count is None:
            count = self.prec
        out = []
        u = self.unit
        for _ in range(count):
            u, d = divmod(u, self.prime)
            out.append(d)
        return tuple(out)

    def leading_digit(self) -> int:
        if self.is_zero():
            raise PadicError("zero has no leading digit")
        return self.unit % self.prime

    def as_fraction(self) -> Fraction:
        """Exact value if known, else the tracked finite expansion."""
        if self.exact is not None:
            return self.exact
        if self.is_zero():
            return Fraction(0)
        return p_power(self.prime, self.val) * self.unit

    # -- arithmetic --------------------------------------------------------

    def _check(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.prime != self.prime:
                raise PrimeMismatchError(f"mixed primes {self.prime} and {other.prime}")
            return other
        if isinstance(other, (int, Fraction)):
            return PadicScalar.from_rational(other, self.prime, self.prec)
        return NotImplemented

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.prime
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact + other.exact
            return PadicScalar.from_rational(exact, p, min(self.prec, other.prec))
        k = min(self.val + self.prec, other.val + other.prec)
        v = min(self.val, other.val)
        raw = self.unit * p ** (self.val - v) + other.unit * p ** (other.val - v)
        raw %= p ** (k - v)
        if raw == 0:
            return PadicScalar.zero(p, min(self.prec, other.prec))
        w = int_valuation(raw, p)
        prec = (k - v) - w
        if prec <= 0:
            return PadicScalar.zero(p, min(self.prec, other.prec))
        return PadicScalar(p, v + w, (raw // p**w) % p**prec, prec, None)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        mod = self.prime**self.prec
        exact = -self.exact if self.exact is not None else None
        return PadicScalar(self.prime, self.val, (mod - self.unit) % mod, self.prec, exact)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.prime
        if self.is_zero() or other.is_zero():
            return PadicScalar.zero(p, min(self.prec, other.prec))
        prec = min(self.prec, other.prec)
        unit = (self.unit * other.unit) % p**prec
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
        return PadicScalar(p, self.val + other.val, unit, prec, exact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.prime
        if other.is_zero():
            raise ZeroDivisionError("division by (tracked) zero p-adic scalar")
        if self.is_zero():
            return PadicScalar.zero(p, min(self.prec, other.prec))
        prec = min(self.prec, other.prec)
        mod = p**prec
        unit = (self.unit * pow(other.unit % mod, -1, mod)) % mod
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact / other.exact
        return PadicScalar(p, self.val - other.val, unit, prec, exact)

    def __rtruediv__(self, other):
        return self._check(other) / self

    def __pow__(self, n: int):
        if n == 0:
            return PadicScalar.from_rational(1, self.prime, self.prec)
        if n < 0:
            return PadicScalar.from_rational(1, self.prime, self.prec) / self**(-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PadicScalar.from_rational(other, self.prime, self.prec)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        if self.prime != other.prime:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.val != other.val:
            return False
        k = min(self.prec, other.prec)
        return (self.unit - other.unit) % self.prime**k == 0

    __hash__ = None

    def __repr__(self):
        if self.is_zero():
            return f"PadicScalar({self.prime}, 0)"
        ds = ",".join(str(d) for d in self.digits(min(self.prec, 6)))
        tail = ",.." if self.prec > 6 else ""
        return f"PadicScalar({self.prime}, v={self.val}, d=[{ds}{tail}])"

    # -- character / fractional part ---------------------------------------

    def frac_part(self) -> Fraction:
        """{x}_p: zero when ord >= 0, else the finite principal part."""
        if self.is_zero() or self.val >= 0:
            return Fraction(0)
        if self.exact is not None:
            return frac_part(self.exact, self.prime)
        d = -self.val
        if self.prec < d:
            raise PrecisionLossError("principal part exceeds tracked digits")
        return Fraction(self.unit % self.prime**d, self.prime**d)

    def char(self) -> complex:
        """Additive character chi_p(x) = exp(2*pi*i*{x}_p)."""
        return unit_phase(self.frac_part())

    # -- quadratic structure -----------------------------------------------

    def legendre(self) -> int:
        """Legendre symbol of the leading digit of ac(x); 0 for zero."""
        if self.is_zero():
            return 0
        return legendre_symbol(self.leading_digit(), self.prime)

    def is_square(self) -> bool:
        """x is a square iff ord(x) is even and its leading digit is a residue."""
        if self.is_zero():
            return True
        return self.val % 2 == 0 and self.legendre() == 1

    def sign(self) -> int:
        """+1 iff the leading digit of ac(x) is in {1, ..., (p-1)/2}."""
        if self.is_zero():
            raise PadicError("zero has no sign")
        return 1 if self.leading_digit() <= (self.prime - 1) // 2 else -1

    def pi1(self, tau: complex = 1) -> complex:
        """The rank-one twisting character tau * (ac(x)-leading-digit / p)."""
        if self.is_zero():
            raise PadicError("pi1 undefined at zero")
        return tau * self.legendre()

    def sqrt(self):
        """Both square roots (positive-first) or None when x is not a square.

        The returned roots square back to x at full tracked precision.
        """
        if self.is_zero():
            z = PadicScalar.zero(self.prime, self.prec)
            return (z, z)
        if not self.is_square():
            return None
        p = self.prime
        root_unit = hensel_sqrt_unit(self.unit, p, self.prec)
        r = PadicScalar(p, self.val // 2, root_unit, self.prec, None)
        if r.sign() < 0:
            r = -r
        return (r, -r)


# -- scalar literal grammar -------------------------------------------------
#   <p>adic:v=<ord>:d=<d0>,<d1>,...    exact finite expansion
#   rat:<num>/<den>                    rational
#   bare integers / fractions like -3 or 5/49 are accepted as rationals


def parse_rational_literal(text: str, prime: int) -> Fraction:
    text = text.strip()
    if text.endswith(")") and "adic:" in text:
        raise PadicError(f"malformed literal {text!r}")
    if "adic:" in text:
        return parse_scalar_literal(text, prime).as_fraction()
    if text.startswith("rat:"):
        text = text[4:]
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise PadicError(f"malformed rational literal {text!r}: {exc}") from None


def parse_scalar_literal(text: str, prime: int, prec: int = DEFAULT_PRECISION) -> PadicScalar:
    text = text.strip()
    if "adic:" in text:
        head, _, rest = text.partition("adic:")
        try:
            lit_prime = int(head)
        except ValueError:
            raise PadicError(f"malformed p-adic literal {text!r}") from None
        if lit_prime != prime:
            raise PrimeMismatchError(f"literal prime {lit_prime} != configured prime {prime}")
        parts = rest.split(":")
        if len(parts) != 2 or not parts[0].startswith("v=") or not parts[1].startswith("d="):
            raise PadicError(f"malformed p-adic literal {text!r}")
        val = int(parts[0][2:])
        digits = [int(d) for d in parts[1][2:].split(",") if d != ""]
        return PadicScalar.from_digits(val, digits, prime)
    return PadicScalar.from_rational(parse_rational_literal(text, prime), prime, prec)


def emit_rational_literal(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"rat:{q.numerator}/{q.denominator}"

"""The quadratic space (Q_p^4, Q) with Q(x) = x0^2 - x1^2 - x2^2 - x3^2:
bilinear form, orthogonal-group membership, rotation embeddings, and group
actions on test functions."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .padic import PadicError, PadicScalar, frac_norm, frac_part, frac_valuation, p_power, unit_phase
from .schwartz import ModulatedCellFunction, Term

G_SIGNS = (1, -1, -1, -1)


class RefinementCapError(PadicError):
    pass


class FourPoint:
    """A point of Q_p^4; components are PadicScalar (rationals are embedded)."""

    __slots__ = ("prime", "comps")

    def __init__(self, comps, prime=None, prec=None):
        comps = list(comps)
        if len(comps) != 4:
            raise PadicError("a four-point needs 4 components")
        for x in comps:
            if isinstance(x, PadicScalar):
                prime = prime or x.prime
        if prime is None:
            raise PadicError("prime required when all components are rational")
        out = []
        for x in comps:
            if isinstance(x, PadicScalar):
                if x.prime != prime:
                    raise PadicError("mixed primes in four-point")
                out.append(x)
            else:
                out.append(PadicScalar.from_rational(Fraction(x), prime, prec or 32))
        self.prime = prime
        self.comps = tuple(out)

    @property
    def time(self):
        return self.comps[0]

    @property
    def space(self):
        return self.comps[1:]

    def __iter__(self):
        return iter(self.comps)

    def __repr__(self):
        return f"FourPoint({list(self.comps)!r})"


def bilinear_q(x: FourPoint, y: FourPoint) -> PadicScalar:
    """[x, y] = x0*y0 - x1*y1 - x2*y2 - x3*y3."""
    total = PadicScalar.zero(x.prime)
    for s, xi, yi in zip(G_SIGNS, x.comps, y.comps):
        total = total + xi * yi * s
    return total


def quadratic(x: FourPoint) -> PadicScalar:
    return bilinear_q(x, x)


class LorentzMatrix:
    """4x4 matrix over exactly-represented rationals, with cached determinant.

    Membership in O(Q) is the exact identity L^T G L = G; members satisfy
    det = +-1.
    """

    __slots__ = ("rows", "_det")

    def __init__(self, rows):
        rows = tuple(tuple(Fraction(e) for e in row) for row in rows)
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise PadicError("expected a 4x4 matrix")
        self.rows = rows
        self._det = None

    @classmethod
    def identity(cls):
        return cls([[1 if i == j else 0 for j in range(4)] for i in range(4)])

    @classmethod
    def diagonal(cls, diag):
        return cls([[diag[i] if i == j else 0 for j in range(4)] for i in range(4)])

    def transpose(self):
        return LorentzMatrix(tuple(zip(*self.rows)))

    def __matmul__(self, other):
        if isinstance(other, LorentzMatrix):
            cols = tuple(zip(*other.rows))
            return LorentzMatrix(
                [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows]
            )
        return NotImplemented

    def apply(self, vec):
        vec = tuple(Fraction(v) for v in vec)
        return tuple(sum(a * b for a, b in zip(row, vec)) for row in self.rows)

    def det(self) -> Fraction:
        if self._det is None:
            self._det = _det4(self.rows)
        return self._det

    def inverse(self) -> "LorentzMatrix":
        d = self.det()
        if d == 0:
            raise PadicError("matrix is singular")
        cof = [
            [(-1) ** (i + j) * _det3(_minor(self.rows, i, j)) for j in range(4)]
            for i in range(4)
        ]
        return LorentzMatrix([[cof[j][i] / d for j in range(4)] for i in range(4)])

    def is_orthogonal(self) -> bool:
        prod = self.transpose() @ (G @ self)
        return prod.rows == G.rows

    def is_p_integral(self, p) -> bool:
        return all(e == 0 or frac_valuation(e, p) >= 0 for row in self.rows for e in row)

    def __eq__(self, other):
        return isinstance(other, LorentzMatrix) and self.rows == other.rows

    __hash__ = None

    def __repr__(self):
        return f"LorentzMatrix({[list(map(str, r)) for r in self.rows]})"


def _minor(rows, i, j):
    return [
        [rows[r][c] for c in range(4) if c != j]
        for r in range(4)
        if r != i
    ]


def _det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _det4(rows):
    total = Fraction(0)
    for j in range(4):
        total += (-1) ** j * rows[0][j] * _det3(_minor(rows, 0, j))
    return total


G = LorentzMatrix.diagonal(G_SIGNS)
LAMBDA0 = LorentzMatrix.diagonal((-1, 1, 1, 1))


def check_orthogonal(mat: LorentzMatrix):
    """(member, det, special).  Exact over rational entries."""
    member = mat.is_orthogonal()
    det = mat.det()
    special = member and det == 1
    return member, det, special


def rotation_from_parameter(plane, u) -> tuple:
    """3x3 plane rotation with c = (1-u^2)/(1+u^2), s = 2u/(1+u^2);
    c^2 + s^2 = 1 identically."""
    u = Fraction(u)
    den = 1 + u * u
    if den == 0:
        raise PadicError("1 + u^2 = 0: rotation parameter degenerate")
    c = (1 - u * u) / den
    s = 2 * u / den
    i, j = plane
    rows = [[Fraction(1 if r == q else 0) for q in range(3)] for r in range(3)]
    rows[i][i] = c
    rows[i][j] = s
    rows[j][i] = -s
    rows[j][j] = c
    return tuple(tuple(r) for r in rows)


def rotation_matrix_3(rows) -> tuple:
    rows = tuple(tuple(Fraction(e) for e in row) for row in rows)
    if len(rows) != 3 or any(len(r) != 3 for r in rows):
        raise PadicError("expected a 3x3 matrix")
    return rows


def mat3_mul(a, b):
    cols = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def mat3_apply(rows, vec):
    vec = tuple(Fraction(v) for v in vec)
    return tuple(sum(a * b for a, b in zip(row, vec)) for row in rows)


def mat3_transpose(rows):
    return tuple(zip(*rows))


def mat3_det(m):
    return _det3([list(r) for r in m])


def is_rotation_3(rows) -> bool:
    rt = mat3_transpose(rows)
    return mat3_mul(rt, rows) == rotation_matrix_3([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) and mat3_det(rows) == 1


def embed_rotation(rows) -> LorentzMatrix:
    """Block embedding diag(1, R) of R in SO(3); lands in SO(Q) and preserves
    both mass-shell branches."""
    rows = rotation_matrix_3(rows)
    if not is_rotation_3(rows):
        raise PadicError("input is not a special orthogonal 3x3 matrix")
    out = [[Fraction(0)] * 4 for _ in range(4)]
    out[0][0] = Fraction(1)
    for i in range(3):
        for j in range(3):
            out[i + 1][j + 1] = rows[i][j]
    return LorentzMatrix(out)


def act(mat: LorentzMatrix, shift, f: ModulatedCellFunction, max_cells=200_000) -> ModulatedCellFunction:
    """The group action ((mat, shift) f)(x) = f(mat^-1 (x - shift)).

    Exact lattice path when mat is p-integral (members then have p-integral
    inverse and unit determinant, so balls map to balls); otherwise an
    evaluation-based rebuild at a certified common refinement level.
    """
    if f.dim != 4:
        raise PadicError("actions are defined on dimension-4 functions")
    p = f.prime
    shift = tuple(Fraction(s) for s in (shift if shift is not None else (0, 0, 0, 0)))
    inv = mat.inverse()
    if mat.is_p_integral(p) and inv.is_p_integral(p):
        mt = inv.transpose()
        out = []
        for t in f.terms:
            b2 = mt.apply(t.b)
            a2 = tuple(x + y for x, y in zip(shift, mat.apply(t.a)))
            phase = unit_phase(-frac_part(sum(x * y for x, y in zip(b2, shift)), p))
            out.append(Term(t.coeff * phase, b2, a2, t.gamma))
        return ModulatedCellFunction(p, 4, out)
    return _act_resample(mat, inv, shift, f, max_cells)


def _act_resample(mat, inv, shift, f, max_cells):
    """General path: sample f(inv(x - shift)) on a certified refinement.

    The image support is covered by a per-coordinate box (a non-integral
    matrix can stretch one axis while shrinking another); f(inv(x - shift))
    is constant on cubes of the chosen level, so the rebuild is exact.
    """
    p = f.prime
    if not f.terms:
        return f
    ein = min(
        (frac_valuation(e, p) for row in inv.rows for e in row if e != 0), default=0
    )
    # constancy level of f, uniformly over its terms
    lf = min(t.gamma for t in f.terms)
    for t in f.terms:
        for bi in t.b:
            if bi != 0:
                lf = min(lf, frac_valuation(bi, p))
    level = lf + min(0, ein)  # ||inv z|| <= p^-ein ||z||
    sup = f.support_radius_exp()
    # image box: |x_i - shift_i| <= max_j |mat[i][j]| * p^sup
    box = []
    for i in range(4):
        ri = max(
            (sup - frac_valuation(e, p) for e in mat.rows[i] if e != 0), default=level
        )
        for si in shift:
            if si != 0:
                ri = max(ri, -frac_valuation(si, p))
        box.append(max(ri, level))
    count = 1
    for ri in box:
        count *= p ** (ri - level)
    if count > max_cells:
        raise RefinementCapError(
            f"resampling needs {count} cells (> cap {max_cells}); matrix too ill-conditioned"
        )
    out = []
    zero_b = (Fraction(0),) * 4
    steps = [p_power(p, -ri) for ri in box]
    ranges = [range(p ** (ri - level)) for ri in box]
    for idx in itertools.product(*ranges):
        x = tuple(i * s for i, s in zip(idx, steps))
        y = inv.apply(tuple(xi - si for xi, si in zip(x, shift)))
        v = f(y)
        if v != 0:
            out.append(Term(v, zero_b, x, level))
    return ModulatedCellFunction(p, 4, out)

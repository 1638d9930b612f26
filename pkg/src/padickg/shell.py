"""Mass-shell geometry and the invariant measure.

The shell over the spatial slice is the set U where s(k) = k.k + m^2 is a
nonzero square; omega(k) is its positive square root, and the two branches
are the graphs of +-omega.  Everything is driven by certified ultrametric
cells: on a spatial ball of radius p^gamma around c,

    |s(k) - s(c)| <= beta := max(||c||_p p^gamma, p^{2 gamma}),

so once p*beta <= |s(c)|_p the norm, squareness and positive-root branch of
s are exactly constant on the whole cell (units congruent to 1 mod p are
squares), and |omega(k) - omega(c)| <= beta / |omega(c)|.  Cell sums over
certified cells are exact; cells still unresolved at the refinement cap
contribute only to a rigorously summable error bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .padic import (
    PadicError,
    PadicScalar,
    frac_norm,
    frac_part,
    frac_valuation,
    legendre_symbol,
    p_power,
    trunc_below,
    unit_phase,
)
from .schwartz import ModulatedCellFunction, Term

INSIDE = "inside"
OUTSIDE = "outside"
UNRESOLVED = "unresolved"

BOUND_SLACK = 1.0 + 1e-9  # absorbs float rounding when exact bounds are reported


@dataclass(frozen=True)
class ShellCell:
    center: tuple
    gamma: int
    status: str
    s_value: Fraction
    s_norm: Fraction
    beta: Fraction
    omega: PadicScalar | None


@dataclass
class ShellMeasureResult:
    value: complex
    error_bound: float
    cells_used: int
    cells_unresolved: int


class ShellPoint:
    """An exact point of a mass-shell branch: (sgn * omega(k), k).

    The time component squares to k.k + m^2 by construction, so the
    quadratic form minus m^2 vanishes exactly at a ShellPoint.
    """

    __slots__ = ("shell", "kvec", "sgn", "omega")

    def __init__(self, shell, kvec, sgn):
        self.shell = shell
        self.kvec = tuple(Fraction(x) for x in kvec)
        self.sgn = 1 if sgn >= 0 else -1
        self.omega = shell.omega_at(self.kvec)

    @property
    def time(self) -> PadicScalar:
        return self.omega * self.sgn

    def components(self):
        p, n = self.shell.prime, self.shell.precision
        return (self.time,) + tuple(
            PadicScalar.from_rational(x, p, n) for x in self.kvec
        )

    def q_minus_m2(self) -> Fraction:
        return Fraction(0)


class MassShell:
    """The shell of mass m (a nonzero p-adic rational) over Q_p^3."""

    def __init__(self, prime, m, precision=32):
        self.prime = prime
        self.m = Fraction(m)
        if self.m == 0:
            raise PadicError("mass parameter must be nonzero")
        self.m2 = self.m * self.m
        self.precision = precision
        self._cells = {}

    # -- certification ------------------------------------------------------

    def classify(self, center, gamma: int) -> ShellCell:
        p = self.prime
        center = tuple(trunc_below(Fraction(c), -gamma, p) for c in center)
        key = (center, gamma)
        cached = self._cells.get(key)
        if cached is not None:
            return cached
        s = sum((c * c for c in center), self.m2)
        cnorm = max((frac_norm(c, p) for c in center), default=Fraction(0))
        beta = max(cnorm * p_power(p, gamma), p_power(p, 2 * gamma))
        omega = None
        if s == 0:
            status = UNRESOLVED
            s_norm = Fraction(0)
        else:
            s_norm = frac_norm(s, p)
            if p * beta <= s_norm:
                v = frac_valuation(s, p)
                unit = s / p_power(p, v)
                lead = (unit.numerator * pow(unit.denominator, -1, p)) % p
                if v % 2 == 0 and legendre_symbol(lead, p) == 1:
                    status = INSIDE
                    omega = self._sqrt(s)
                else:
                    status = OUTSIDE
            else:
                status = UNRESOLVED
        cell = ShellCell(center, gamma, status, s, s_norm, beta, omega)
        self._cells[key] = cell
        return cell

    def _sqrt(self, s: Fraction) -> PadicScalar:
        roots = PadicScalar.from_rational(s, self.prime, self.precision).sqrt()
        if roots is None:
            raise PadicError(f"{s} is not a square in Q_{self.prime}")
        return roots[0]

    def omega_at(self, kvec) -> PadicScalar:
        """The positive analytic root at an exact spatial point."""
        s = sum((Fraction(c) * Fraction(c) for c in kvec), self.m2)
        if s == 0:
            raise PadicError("point lies on the boundary k.k + m^2 = 0")
        root = PadicScalar.from_rational(s, self.prime, self.precision).sqrt()
        if root is None:
            raise PadicError("point is not on the shell (s is not a square)")
        return root[0]

    def split(self, center, gamma: int):
        """The p^3 children cells, in deterministic order."""
        p = self.prime
        step = p_power(p, -gamma)
        return [
            tuple(c + r * step for c, r in zip(center, rs))
            for rs in itertools.product(range(p), repeat=3)
        ]

    def omega_variation(self, cell: ShellCell) -> Fraction:
        """Certified bound for |omega(k) - omega(cell.center)| on the cell."""
        return cell.beta / self._omega_norm(cell)

    def _omega_norm(self, cell: ShellCell) -> Fraction:
        v = frac_valuation(cell.s_value, self.prime)
        return p_power(self.prime, -v // 2)

    def _cell_mass_bound(self, cell: ShellCell) -> float:
        """Upper bound for the lambda-mass integral of |s|^(-1/2) over the
        part of the cell that could meet the shell."""
        p = self.prime
        sigma = max(cell.s_norm, cell.beta)
        if sigma == 0:
            sigma = cell.beta
        rho = p_power(p, cell.gamma)
        cnorm = max((frac_norm(c, p) for c in cell.center), default=Fraction(0))
        if cnorm > rho:
            lam = float(rho * rho) * math.sqrt(float(sigma)) * p / ((p - 1) * float(cnorm))
        else:
            lam = float(rho) * math.sqrt(float(sigma)) * (p**3 - 1) / ((p - 1) ** 2)
        return lam * BOUND_SLACK

    # -- the invariant measure on branches -----------------------------------

    def integrate(
        self, g: ModulatedCellFunction, branch="both", eps=1e-9, cap=8, max_cells=50_000
    ) -> ShellMeasureResult:
        """Integral of g against the branch measure(s): on each branch the
        measure is d^3 k / |omega(k)|_p over the certified inside cells."""
        if g.dim != 4:
            raise PadicError("shell integration expects a dimension-4 function")
        if g.prime != self.prime:
            raise PadicError("prime mismatch")
        signs = {"plus": (1,), "minus": (-1,), "both": (1, -1)}[branch]
        total = 0j
        bound = 0.0
        used = unresolved = 0
        for sgn in signs:
            v, b, u, r = self._integrate_branch(g, sgn, eps, cap, max_cells)
            total += v
            bound += b
            used += u
            unresolved += r
        return ShellMeasureResult(total, bound, used, unresolved)

    def _integrate_branch(self, g, sgn, eps, cap, max_cells):
        p = self.prime
        used = unresolved = 0
        depth_bounds = []
        leaf_bound = 0.0  # retired unresolved leaves, counted at every depth
        pending = [(term, term.a[1:], term.gamma) for term in g.terms]
        value_acc = 0j
        depth = 0
        appended = 0  # total children created; hard work budget
        while True:
            next_pending = []
            level_bound = 0.0
            for term, center, gamma in pending:
                cell = self.classify(center, gamma)
                if cell.status == OUTSIDE:
                    continue
                decision = None
                if cell.status == INSIDE:
                    decision = self._certified_contribution(term, cell, sgn)
                if decision is not None:
                    value_acc += decision
                    used += 1
                    continue
                # undecided: bound it, split while depth and budget remain
                if cell.status == INSIDE:
                    cb = abs(term.coeff) * float(
                        p_power(p, 3 * cell.gamma) / self._omega_norm(cell)
                    ) * BOUND_SLACK
                else:
                    cb = abs(term.coeff) * self._cell_mass_bound(cell)
                if depth < cap and cb > eps * 0.01 and appended < max_cells:
                    level_bound += cb
                    appended += p**3
                    for child in self.split(cell.center, cell.gamma):
                        next_pending.append((term, child, cell.gamma - 1))
                else:
                    leaf_bound += cb
                    unresolved += 1
            depth_bounds.append(leaf_bound + level_bound)
            if not next_pending:
                break
            pending = next_pending
            depth += 1
        # every depth bound covers the final remainder region, so the best one
        # is still valid; this also makes the bound non-increasing in cap
        bound = min(depth_bounds) if depth_bounds else 0.0
        return value_acc, bound, used, unresolved

    def _certified_contribution(self, term, cell, sgn):
        """Exact contribution of an inside cell for one 4-dim term, or None
        when the cell is not yet certified for the t-data."""
        p = self.prime
        a0 = term.a[0]
        b0 = term.b[0]
        bvec = term.b[1:]
        omega = cell.omega
        var = self.omega_variation(cell)
        t_radius = p_power(p, term.gamma)
        omega_signed = omega * sgn
        dn = (omega_signed - a0).norm()
        if dn > t_radius:
            if var < dn:
                return 0j  # t-indicator certified 0 on the whole cell
            return None
        if var > t_radius:
            return None
        # t-indicator certified 1; character in the time frequency
        phase = Fraction(0)
        if b0 != 0:
            if frac_norm(b0, p) * var > 1:
                return None
            phase += (omega_signed * b0).frac_part()
        # spatial character integrates in closed form over the cell
        if max((frac_norm(bi, p) for bi in bvec), default=Fraction(0)) > p_power(p, -cell.gamma):
            return 0j
        phase += frac_part(sum((bi * ci for bi, ci in zip(bvec, cell.center)), Fraction(0)), p)
        vol_weight = p_power(p, 3 * cell.gamma) / self._omega_norm(cell)
        return term.coeff * float(vol_weight) * unit_phase(phase)

    # -- branch sums for evaluators -------------------------------------------

    def branch_sum(
        self,
        phi: ModulatedCellFunction,
        sgn: int,
        t=Fraction(0),
        xmod=None,
        weight=True,
        cell_factor=None,
        cap=12,
    ):
        """sum over the branch of chi_p(t * sgn-signed omega) chi_p(<xmod, k>)
        phi(k) [* cell_factor] d^3k [/ |omega|]: an exact cell sum once the
        time character is constant per cell.  Returns (value, bound)."""
        if phi.dim != 3 or phi.prime != self.prime:
            raise PadicError("branch_sum expects a dimension-3 function over the same prime")
        p = self.prime
        t = Fraction(t)
        xmod = tuple(Fraction(x) for x in xmod) if xmod is not None else (Fraction(0),) * 3
        tnorm = frac_norm(t, p)
        total = 0j
        bound = 0.0
        appended = 0
        max_cells = 200_000
        pending = [(term, term.a, term.gamma, 0) for term in phi.terms]
        while pending:
            term, center, gamma, depth = pending.pop()
            cell = self.classify(center, gamma)
            if cell.status == OUTSIDE:
                continue
            if cell.status == UNRESOLVED:
                if depth < cap and appended < max_cells:
                    appended += p**3
                    pending.extend(
                        (term, child, gamma - 1, depth + 1) for child in self.split(cell.center, gamma)
                    )
                else:
                    bound += abs(term.coeff) * self._cell_mass_bound(cell) * _factor_bound(cell_factor, cell, sgn)
                continue
            var = self.omega_variation(cell)
            if tnorm * var > 1:
                if depth < cap and appended < max_cells:
                    appended += p**3
                    pending.extend(
                        (term, child, gamma - 1, depth + 1) for child in self.split(cell.center, gamma)
                    )
                else:
                    w = 1.0 / float(self._omega_norm(cell)) if weight else 1.0
                    bound += abs(term.coeff) * float(p_power(p, 3 * cell.gamma)) * w * _factor_bound(cell_factor, cell, sgn)
                continue
            phase = Fraction(0)
            if t != 0:
                phase += (cell.omega * (t * sgn)).frac_part()
            bvec = tuple(bi + xi for bi, xi in zip(term.b, xmod))
            if max((frac_norm(bi, p) for bi in bvec), default=Fraction(0)) > p_power(p, -cell.gamma):
                continue
            phase += frac_part(sum((bi * ci for bi, ci in zip(bvec, cell.center)), Fraction(0)), p)
            w = p_power(p, 3 * cell.gamma)
            if weight:
                w = w / self._omega_norm(cell)
            factor = cell_factor(cell, sgn) if cell_factor is not None else 1.0
            total += term.coeff * float(w) * unit_phase(phase) * factor
        return total, bound * BOUND_SLACK

    # -- constant-per-cell restriction ----------------------------------------

    def restrict(self, g: ModulatedCellFunction, sgn: int, cap=12):
        """Values of g on the branch graph, constant on certified cells.

        Returns a list of (ShellCell, complex) pairs over a disjoint cell
        cover of the spatial support of g; the restriction of g to the branch
        is exactly the indicated constant on each cell.
        """
        if g.dim != 4 or g.prime != self.prime:
            raise PadicError("restrict expects a dimension-4 function over the same prime")
        p = self.prime
        base_level = min((t.gamma for t in g.terms), default=0)
        seen = set()
        cover = []
        for term in g.terms:
            spatial = term.a[1:]
            for child in _subcells(spatial, term.gamma, base_level, p):
                key = tuple(trunc_below(c, -base_level, p) for c in child)
                if key not in seen:
                    seen.add(key)
                    cover.append(key)
        out = []
        pending = [(c, base_level, 0) for c in cover]
        while pending:
            center, gamma, depth = pending.pop()
            cell = self.classify(center, gamma)
            if cell.status == OUTSIDE:
                continue
            if cell.status == UNRESOLVED:
                if depth >= cap:
                    raise PadicError("restriction support not certified inside the shell domain")
                pending.extend((ch, gamma - 1, depth + 1) for ch in self.split(center, gamma))
                continue
            value = self._restrict_value(g, cell, sgn)
            if value is None:
                if depth >= cap:
                    raise PadicError("restriction not constant at the refinement cap")
                pending.extend((ch, gamma - 1, depth + 1) for ch in self.split(center, gamma))
                continue
            if value != 0:
                out.append((cell, value))
        out.sort(key=lambda cv: (cv[0].gamma, cv[0].center))
        return out

    def _restrict_value(self, g, cell, sgn):
        p = self.prime
        var = self.omega_variation(cell)
        radius = p_power(p, cell.gamma)
        omega_signed = cell.omega * sgn
        total = 0j
        for term in g.terms:
            t_radius = p_power(p, term.gamma)
            # spatial membership of the whole cell in the term's spatial ball
            dist = max(
                (frac_norm(ci - ai, p) for ci, ai in zip(cell.center, term.a[1:])),
                default=Fraction(0),
            )
            if dist > t_radius:
                if dist <= radius:
                    return None  # cell straddles the ball; refine
                continue
            if radius > t_radius:
                return None
            dn = (omega_signed - term.a[0]).norm()
            if dn > t_radius:
                if var < dn:
                    continue
                return None
            if var > t_radius:
                return None
            phase = Fraction(0)
            if term.b[0] != 0:
                if frac_norm(term.b[0], p) * var > 1:
                    return None
                phase += (omega_signed * term.b[0]).frac_part()
            bvec = term.b[1:]
            if max((frac_norm(bi, p) for bi in bvec), default=Fraction(0)) * radius > 1:
                return None
            phase += frac_part(sum((bi * ci for bi, ci in zip(bvec, cell.center)), Fraction(0)), p)
            total += term.coeff * unit_phase(phase)
        return total

    # -- census ---------------------------------------------------------------

    def census(self, region_exp=0, depth=3):
        """Per-level counts of inside/outside/unresolved cells below the ball
        of radius p^region_exp, plus the resolved lambda-mass and a bound for
        the unresolved remainder."""
        p = self.prime
        rows = []
        cells = [((Fraction(0),) * 3, region_exp)]
        mass = 0.0
        for level in range(depth + 1):
            counts = {INSIDE: 0, OUTSIDE: 0, UNRESOLVED: 0}
            bound = 0.0
            next_cells = []
            for center, gamma in cells:
                cell = self.classify(center, gamma)
                counts[cell.status] += 1
                if cell.status == INSIDE:
                    mass += float(p_power(p, 3 * gamma) / self._omega_norm(cell))
                elif cell.status == UNRESOLVED:
                    bound += self._cell_mass_bound(cell)
                    next_cells.extend((ch, gamma - 1) for ch in self.split(center, gamma))
            rows.append(
                {
                    "level": region_exp - level,
                    "inside": counts[INSIDE],
                    "outside": counts[OUTSIDE],
                    "unresolved": counts[UNRESOLVED],
                    "resolved_mass": mass,
                    "unresolved_bound": bound * BOUND_SLACK,
                }
            )
            cells = next_cells
            if not cells:
                break
        return rows


def _factor_bound(cell_factor, cell, sgn) -> float:
    if cell_factor is None:
        return 1.0
    try:
        return abs(cell_factor(cell, sgn))
    except Exception:
        return 1.0


def _subcells(center, gamma, target, p):
    """Level-`target` subcells of the ball B_gamma(center) (target <= gamma)."""
    if target == gamma:
        yield tuple(Fraction(c) for c in center)
        return
    span = p ** (gamma - target)
    step = p_power(p, -gamma)
    for rs in itertools.product(range(span), repeat=len(center)):
        yield tuple(Fraction(c) + r * step for c, r in zip(center, rs))


def gelfand_leray_weight(point, index: int, gamma: int) -> Fraction:
    """Chart weight 1 / |dQ/dk_index|_p on a cell of level gamma around the
    lifted point; requires the derivative norm constant (|k_index| > p^gamma)."""
    comp = point.components()[index] if isinstance(point, ShellPoint) else point.comps[index]
    n = comp.norm()
    if n <= p_power(comp.prime, gamma):
        raise PadicError("derivative not certified constant on the chart cell")
    return 1 / n  # |2|_p = 1 for odd p


def invariance_residual(shell: MassShell, mat, g: ModulatedCellFunction, branch="both", eps=1e-9, cap=8):
    """|integral of g(Lambda k) - integral of g| against the branch measure,
    with the certified bounds of both computations."""
    from .minkowski import act

    moved = act(mat.inverse(), None, g)
    r1 = shell.integrate(moved, branch, eps, cap)
    r2 = shell.integrate(g, branch, eps, cap)
    return abs(r1.value - r2.value), r1.error_bound + r2.error_bound

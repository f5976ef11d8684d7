"""PSL(2,R) with fixed matrix conventions.

Conventions used everywhere in this package:

    a_t   = diag(e^{t/2}, e^{-t/2})        (geodesic flow)
    n_s   = [[1, 0], [s, 1]]               (lower unipotent, stable horocycle)
    u_r   = [[1, r], [0, 1]]               (upper unipotent, unstable horocycle)
    omega = [[0, -1], [1, 0]]

Every element is stored as a canonical representative of its {+g, -g}
class: trace >= 0, and for trace zero the first nonzero entry among
(a, b, c) is positive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

DET_TOL = 1e-12
CELL_TOL = 1e-9


class SingularMatrix(ValueError):
    """Input matrix is numerically singular (or orientation reversing)."""


class CrossoverUndefined(ValueError):
    """h * g^{-1} fell into the omega cell, so the crossover is undefined."""


def _canonical(a, b, c, d):
    tr = a + d
    if tr < 0.0:
        return -a, -b, -c, -d
    if tr == 0.0:
        for e in (a, b, c):
            if e != 0.0:
                if e < 0.0:
                    return -a, -b, -c, -d
                break
    return a, b, c, d


@dataclass(frozen=True)
class GroupElement:
    """Unimodular 2x2 matrix modulo sign, stored as its canonical representative."""

    a: float
    b: float
    c: float
    d: float

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return make_element(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self) -> "GroupElement":
        return make_element(self.d, -self.b, -self.c, self.a)

    @property
    def trace(self) -> float:
        return self.a + self.d

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def is_hyperbolic(self, margin: float = 1e-9) -> bool:
        return abs(self.trace) > 2.0 + margin

    def translation_length(self) -> float:
        """2 arccosh(|tr|/2) for hyperbolic elements, 0 otherwise."""
        t = abs(self.trace) / 2.0
        if t <= 1.0:
            return 0.0
        return 2.0 * math.acosh(t)


def make_element(a: float, b: float, c: float, d: float) -> GroupElement:
    det = a * d - b * c
    if abs(det) <= DET_TOL:
        raise SingularMatrix(f"determinant {det!r} below tolerance")
    if det < 0.0:
        raise SingularMatrix(f"negative determinant {det!r}: not in PSL(2,R)")
    s = math.sqrt(det)
    a, b, c, d = _canonical(a / s, b / s, c / s, d / s)
    return GroupElement(a, b, c, d)


IDENTITY = GroupElement(1.0, 0.0, 0.0, 1.0)


def a_t(t: float) -> GroupElement:
    e = math.exp(t / 2.0)
    return make_element(e, 0.0, 0.0, 1.0 / e)


def n_s(s: float) -> GroupElement:
    return make_element(1.0, 0.0, s, 1.0)


def u_r(r: float) -> GroupElement:
    return make_element(1.0, r, 0.0, 1.0)


def omega() -> GroupElement:
    return make_element(0.0, -1.0, 1.0, 0.0)


class Cell(Enum):
    BIG_CELL = "big"
    OMEGA_CELL = "omega"


@dataclass(frozen=True)
class BruhatFactors:
    """g = n_s a_t u_r on the big cell; t = 0 by convention on the omega cell."""

    cell: Cell
    s: float = 0.0
    t: float = 0.0
    r: float = 0.0

    def reconstruct(self) -> GroupElement:
        if self.cell is Cell.OMEGA_CELL:
            raise ValueError("omega-cell factors carry no reconstruction data")
        return n_s(self.s) @ a_t(self.t) @ u_r(self.r)


def bruhat_decompose(g: GroupElement, cell_tolerance: float = CELL_TOL) -> BruhatFactors:
    """Factor g = n_s a_t u_r; the (1,1) entry decides the cell.

    On the big cell: s = c/a, e^{t/2} = |a|, r = b/a.
    """
    a = g.a
    if abs(a) <= cell_tolerance:
        return BruhatFactors(Cell.OMEGA_CELL)
    return BruhatFactors(Cell.BIG_CELL, s=g.c / a, t=2.0 * math.log(abs(a)), r=g.b / a)


def flow_conjugate(g: GroupElement, T: float) -> GroupElement:
    """a_{-T} g a_T.  Expands the stable (n) parameter and contracts the unstable (u)."""
    return a_t(-T) @ g @ a_t(T)


def crossover_delta(h: GroupElement, g: GroupElement) -> float:
    """A-parameter of the Bruhat factorization of h g^{-1}.

    Unchanged under h -> n h and g -> u g; nonnegative for frames tangent
    to distinct quasi-minimizing leaves facing the same end.
    """
    f = bruhat_decompose(h @ g.inv())
    if f.cell is Cell.OMEGA_CELL:
        raise CrossoverUndefined("h g^{-1} lies in the omega cell (h+ = g-)")
    return f.t


@dataclass(frozen=True)
class HPoint:
    """Point of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"imaginary part must be positive, got {self.y!r}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def mobius_act(g: GroupElement, p: HPoint) -> HPoint:
    w = (g.a * p.z + g.b) / (g.c * p.z + g.d)
    return HPoint(w.real, w.imag)


def hyp_distance(p: HPoint, q: HPoint) -> float:
    # cosh d = 1 + |p-q|^2 / (2 Im p Im q)
    arg = 1.0 + abs(p.z - q.z) ** 2 / (2.0 * p.y * q.y)
    return math.acosh(max(arg, 1.0))


def rep_distance(g: GroupElement, h: GroupElement) -> float:
    """Frobenius distance between projective classes (min over the sign choice)."""
    plus = minus = 0.0
    for x, y in zip(g.entries(), h.entries()):
        plus += (x - y) ** 2
        minus += (x + y) ** 2
    return math.sqrt(min(plus, minus))


def entrywise_error(g: GroupElement, h: GroupElement) -> float:
    return max(
        min(abs(x - y), abs(x + y)) for x, y in zip(g.entries(), h.entries())
    )


def axis_frame(g: GroupElement) -> GroupElement:
    """Frame whose A-orbit is the axis of the hyperbolic element g.

    Returns v with v^{-1} g v = a_l (up to sign), l the translation length;
    the first column of v is the attracting eigenvector.
    """
    if not g.is_hyperbolic():
        raise ValueError("axis_frame requires a hyperbolic element")
    tr = g.trace
    disc = math.sqrt(tr * tr - 4.0)
    lam = (abs(tr) + disc) / 2.0  # |eigenvalue| > 1 for the canonical rep
    sign = 1.0 if tr >= 0 else -1.0
    cols = []
    for mu in (sign * lam, sign / lam):
        # (g - mu) v = 0
        if abs(g.b) > abs(g.d - mu):
            v = (g.b, mu - g.a)
        elif abs(g.c) > 1e-300 or abs(mu - g.d) > 1e-300:
            v = (mu - g.d, g.c)
        else:
            raise ValueError("degenerate eigenvector computation")
        cols.append(v)
    (p, r), (q, s) = cols
    if p * s - q * r < 0.0:
        q, s = -q, -s
    return make_element(p, q, r, s)

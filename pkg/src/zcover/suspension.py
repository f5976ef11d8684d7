"""Constant-roof suspension of an IET and its flat Z-cover strip model.

The base surface is the rectangle [0, c] x [0, |I|) with the horizontal
sides glued by translation and the vertical sides by (c, p) ~ (0, T(p)).
Cover points carry a sheet index k and the height function is
tau = k*c + x; crossing the vertical side left-to-right increments the
sheet, which realizes the signed intersection with the core curve of the
vertical foliation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .iet import IET, Reducible

HIT_TOL = 1e-12
CLOSE_TOL = 1e-10


class SingularityHit(Exception):
    """The trajectory ran into a cone point."""

    def __init__(self, time, vertex):
        super().__init__(f"singularity at t={time!r} ({vertex})")
        self.time = time
        self.vertex = vertex


class UndefinedRay(ValueError):
    """Ray based at a cone point."""


class NotClosed(ValueError):
    """Trajectory endpoint does not match its start."""


@dataclass(frozen=True)
class ConePoint:
    side: str  # 'L' or 'R' edge of the rectangle
    position: object  # height on that edge (one representative per class)
    angle_turns: int  # cone angle as a multiple of 2*pi


@dataclass(frozen=True)
class CoverPoint:
    sheet: int
    x: object
    y: object

    def deck(self, m: int) -> "CoverPoint":
        return replace(self, sheet=self.sheet + m)


@dataclass(frozen=True)
class FlatRay:
    start: CoverPoint
    theta: float


class _UnionFind(dict):
    def find(self, k):
        while self[k] != k:
            self[k] = self[self[k]]
            k = self[k]
        return k

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self[ra] = rb


@dataclass(frozen=True)
class TranslationSurface:
    roof: object
    iet: IET
    cone_points: tuple
    marked_points: tuple
    genus: int
    singular_right: frozenset  # heights on the right edge hitting a cone point
    singular_left: frozenset

    @property
    def exact(self) -> bool:
        return self.iet.exact and isinstance(self.roof, Fraction)

    @property
    def height(self):
        return self.iet.total

    def tau(self, p: CoverPoint):
        return p.sheet * self.roof + p.x

    def point(self, x, y, sheet: int = 0) -> CoverPoint:
        if not (0 <= x <= self.roof and 0 <= y < self.height):
            raise ValueError(f"({x!r}, {y!r}) outside the fundamental rectangle")
        return CoverPoint(sheet, x, y)


def suspend(iet: IET, c) -> TranslationSurface:
    """Build the suspension and compute its singularity data.

    Cone angles come from tracing corner/division-point identifications;
    genus from the Euler characteristic of the identified cell complex.
    The Gauss-Bonnet identity (sum of angle excesses = 2g - 2) is checked
    exactly and cannot fail silently.
    """
    if c <= 0:
        raise ValueError("roof must be positive")
    if iet.p > 1 and not iet.permutation.is_irreducible():
        raise Reducible(f"permutation {iet.permutation.images} is reducible")

    total = iet.total
    d_off = iet.domain_offsets
    r_off = iet.range_offsets
    lengths = iet.lengths

    right_pts = list(d_off) + [total]  # p+1 points, includes both corners
    left_pts = sorted(r_off) + [total]

    verts = [("R", y) for y in right_pts] + [("L", y) for y in left_pts]
    uf = _UnionFind({v: v for v in verts})

    # horizontal sides glued by vertical translation
    uf.union(("L", left_pts[0]), ("L", total))
    uf.union(("R", right_pts[0]), ("R", total))
    def snap_left(v):
        # float cumulative sums of the same partition can differ in the last ulp
        if iet.exact:
            return v
        return min(left_pts, key=lambda q: abs(q - v))

    # vertical side segment over I_j glued to the image of I_j on the left
    for j in range(iet.p):
        uf.union(("R", d_off[j]), ("L", r_off[j]))
        top = d_off[j + 1] if j + 1 < iet.p else total
        uf.union(("R", top), ("L", snap_left(r_off[j] + lengths[j])))

    corner = {("R", right_pts[0]), ("R", total), ("L", left_pts[0]), ("L", total)}
    quarter_turns = {}
    members = {}
    for v in verts:
        r = uf.find(v)
        quarter_turns[r] = quarter_turns.get(r, 0) + (1 if v in corner else 2)
        members.setdefault(r, []).append(v)

    n_vertices = len(quarter_turns)
    n_edges = iet.p + 1
    chi = n_vertices - n_edges + 1
    if chi % 2 != 0:
        raise AssertionError(f"odd Euler characteristic {chi}")
    genus = (2 - chi) // 2

    cone, marked = [], []
    excess = 0
    for r, q in quarter_turns.items():
        if q % 4 != 0:
            raise AssertionError(f"cone angle {q} quarter-turns is not a multiple of 2 pi")
        turns = q // 4
        side, pos = members[r][0]
        pt = ConePoint(side, pos, turns)
        if turns == 1:
            marked.append(pt)
        else:
            cone.append(pt)
            excess += turns - 1
    if excess != 2 * genus - 2:
        raise AssertionError(f"Gauss-Bonnet failure: excess {excess} vs 2g-2 = {2 * genus - 2}")

    singular_roots = {uf.find(members[r][0]) for r in quarter_turns if quarter_turns[r] != 4}
    sing_r = frozenset(y for (s, y) in verts if s == "R" and uf.find(("R", y)) in singular_roots)
    sing_l = frozenset(y for (s, y) in verts if s == "L" and uf.find(("L", y)) in singular_roots)

    return TranslationSurface(
        roof=c,
        iet=iet,
        cone_points=tuple(sorted(cone, key=lambda k: (k.side, k.position))),
        marked_points=tuple(sorted(marked, key=lambda k: (k.side, k.position))),
        genus=genus,
        singular_right=sing_r,
        singular_left=sing_l,
    )


def _is_singular(value, pool, exact: bool) -> bool:
    if exact:
        return value in pool
    return any(abs(value - s) <= HIT_TOL for s in pool)


def _exact_direction(surface: TranslationSurface, theta: float):
    """Axis-aligned unit direction as exact integers, or None."""
    if not surface.exact:
        return None
    k = theta / (math.pi / 2.0)
    kr = round(k)
    if abs(k - kr) > 1e-12:
        return None
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][kr % 4]


def straight_flow(surface: TranslationSurface, p: CoverPoint, theta: float, t) -> CoverPoint:
    """Unit-speed straight-line flow for time t; raises SingularityHit.

    In exact mode with an axis-aligned direction, all positions stay
    rational and hits are certified, not approximate.
    """
    exact_dir = _exact_direction(surface, theta)
    if exact_dir is not None:
        vx, vy = exact_dir
        tol = 0
        exact = True
    else:
        vx, vy = math.cos(theta), math.sin(theta)
        if abs(vx) < 1e-15:
            vx = 0.0
        if abs(vy) < 1e-15:
            vy = 0.0
        tol = HIT_TOL
        exact = False

    iet = surface.iet
    c, H = surface.roof, surface.height
    sheet, x, y = p.sheet, p.x, p.y
    remaining = t
    elapsed = t * 0

    while True:
        cand = []
        if vx > 0:
            cand.append((c - x) / vx)
        elif vx < 0:
            cand.append(x / -vx)
        if vy > 0:
            cand.append((H - y) / vy)
        elif vy < 0:
            cand.append(y / -vy)
        if not cand:
            raise ValueError("zero direction")
        step = min(cand)
        inside = remaining < step if exact else remaining < step - tol
        if inside:
            return CoverPoint(sheet, x + vx * remaining, y + vy * remaining)

        x2, y2 = x + vx * step, y + vy * step
        elapsed = elapsed + step
        remaining = remaining - step

        hit_right = vx > 0 and (x2 == c if exact else abs(x2 - c) <= tol)
        hit_left = vx < 0 and (x2 == 0 if exact else abs(x2) <= tol)
        hit_top = vy > 0 and (y2 == H if exact else abs(y2 - H) <= tol)
        hit_bot = vy < 0 and (y2 == 0 if exact else abs(y2) <= tol)

        # horizontal-side wrap first: a corner crossing then lands exactly
        # on the vertical edge at height 0 or H
        if hit_top:
            y2 = y2 - H
        elif hit_bot:
            y2 = y2 + H

        if hit_right:
            if _is_singular(y2, surface.singular_right, exact):
                raise SingularityHit(elapsed, ("R", y2))
            y2 = iet.apply(y2) if vy >= 0 else iet.apply_left_limit(y2)
            sheet += 1
            x2 = x2 - c
        elif hit_left:
            if _is_singular(y2, surface.singular_left, exact):
                raise SingularityHit(elapsed, ("L", y2))
            inv = iet.inverse()
            y2 = inv.apply(y2) if vy >= 0 else inv.apply_left_limit(y2)
            sheet -= 1
            x2 = x2 + c

        x, y = x2, y2
        if remaining <= 0 and (exact or remaining > -tol):
            return CoverPoint(sheet, x, y)


def first_return_vertical(surface: TranslationSurface, y):
    """Horizontal flow for time c from (0, y); lands at (0, T(y)) one sheet up."""
    iet = surface.iet
    if _is_singular(y, set(iet.discontinuities), surface.exact) or _is_singular(
        y, surface.singular_left | surface.singular_right, surface.exact
    ):
        raise SingularityHit(surface.roof, ("R", y))
    out = straight_flow(surface, CoverPoint(0, y * 0, y), 0.0, surface.roof)
    assert out.sheet == 1 and out.x == y * 0
    return out.y


NEG_INFINITY = float("-inf")
POS_INFINITY = float("inf")


@dataclass(frozen=True)
class BetaResult:
    value: float  # tau(start), or +-infinity
    decay_rate: float  # slope of tau(flow(t)) -+ t; 0 exactly on finite rays
    hit: object = None  # SingularityHit that truncated the leaf, if any
    leaves_checked: int = 0


def _at_cone_point(surface: TranslationSurface, p: CoverPoint) -> bool:
    ex = surface.exact
    on_left = p.x == 0 if ex else abs(p.x) <= HIT_TOL
    on_right = p.x == surface.roof if ex else abs(p.x - surface.roof) <= HIT_TOL
    return (on_left and _is_singular(p.y, surface.singular_left, ex)) or (
        on_right and _is_singular(p.y, surface.singular_right, ex)
    )


def _horizontal_leaf_hits(surface: TranslationSurface, ray: FlatRay, depth: int, forward: bool):
    """First singularity on the horizontal leaf through the ray start, or None."""
    iet = surface.iet
    y = ray.start.y
    x = ray.start.x
    c = surface.roof
    for n in range(depth):
        if forward:
            if _is_singular(y, surface.singular_right, surface.exact):
                t = (c - x) + n * c
                return SingularityHit(t, ("R", y))
            y = iet.apply(y)
        else:
            if _is_singular(y, surface.singular_left, surface.exact):
                return SingularityHit(x + n * c, ("L", y))
            y = iet.inverse().apply(y)
    return None


def beta_plus_flat(surface: TranslationSurface, ray: FlatRay, leaf_depth: int = 10_000) -> BetaResult:
    """tau(start) on singularity-free positively-horizontal rays, else -infinity.

    The finite value is exact: tau gains cos(theta) = 1 per unit time along
    the leaf, so tau(flow(t)) - t is constant.  Off-horizontal rays lose
    tau-credit at the reported rate cos(theta) - 1 < 0.
    """
    start = ray.start
    if _at_cone_point(surface, start):
        raise UndefinedRay("ray based at a cone point")
    ct = math.cos(ray.theta)
    rate = ct - 1.0
    if abs(rate) > HIT_TOL:
        return BetaResult(NEG_INFINITY, rate, leaves_checked=0)
    hit = _horizontal_leaf_hits(surface, ray, leaf_depth, forward=True)
    if hit is not None:
        return BetaResult(NEG_INFINITY, 0.0, hit=hit, leaves_checked=leaf_depth)
    return BetaResult(float(surface.tau(start)), 0.0, leaves_checked=leaf_depth)


def beta_minus_flat(surface: TranslationSurface, ray: FlatRay, leaf_depth: int = 10_000) -> BetaResult:
    """tau(start) on singularity-free negatively-horizontal rays, else +infinity."""
    start = ray.start
    if _at_cone_point(surface, start):
        raise UndefinedRay("ray based at a cone point")
    ct = math.cos(ray.theta)
    rate = ct + 1.0
    if abs(rate) > HIT_TOL:
        return BetaResult(POS_INFINITY, rate, leaves_checked=0)
    hit = _horizontal_leaf_hits(surface, ray, leaf_depth, forward=False)
    if hit is not None:
        return BetaResult(POS_INFINITY, 0.0, hit=hit, leaves_checked=leaf_depth)
    return BetaResult(float(surface.tau(start)), 0.0, leaves_checked=leaf_depth)


def in_beta_plus_horoball(surface: TranslationSurface, base: FlatRay, query: FlatRay, leaf_depth: int = 10_000) -> bool:
    """Membership in {beta+ >= beta+(base)}."""
    b = beta_plus_flat(surface, base, leaf_depth).value
    q = beta_plus_flat(surface, query, leaf_depth).value
    return q >= b


@dataclass(frozen=True)
class FlatLoop:
    start: CoverPoint
    theta: float
    length: object


def cylinder_phi_ratio(surface: TranslationSurface, loop: FlatLoop) -> float:
    """|phi| * c / length for a closed straight trajectory.

    phi is the signed number of vertical-side crossings (the sheet jump);
    for any straight loop in direction theta this equals |cos theta|.
    """
    end = straight_flow(surface, loop.start, loop.theta, loop.length)
    if surface.exact and _exact_direction(surface, loop.theta) is not None:
        closed = end.x == loop.start.x and end.y == loop.start.y
    else:
        closed = (
            abs(end.x - loop.start.x) <= CLOSE_TOL and abs(end.y - loop.start.y) <= CLOSE_TOL
        )
    if not closed:
        raise NotClosed(f"endpoint ({end.x!r}, {end.y!r}) != start ({loop.start.x!r}, {loop.start.y!r})")
    phi = end.sheet - loop.start.sheet
    return abs(phi) * float(surface.roof) / float(loop.length)

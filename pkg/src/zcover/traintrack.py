"""Train tracks with branch lengths, route counting and dimension estimates.

A track here is combinatorial: branches with positive lengths, switches
listing which branch ends meet on each side, and an explicit legal
transition relation.  A route is a branch sequence whose consecutive
pairs are legal; its length is the sum of traversed branch lengths and
routes are identified by their branch sequence alone.  Routes carry a
marked start branch and a forward orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .iet import IET, Reducible

BUCKET = 1e-3
OVERLAP_TOL = 1e-12


class EmptyRouteSet(ValueError):
    """No route of the requested length exists."""


class Infeasible(ValueError):
    """No lattice point within the rounding bound; carries the best found."""

    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


@dataclass(frozen=True)
class Branch:
    id: int
    length: object  # positive float or Fraction


@dataclass(frozen=True)
class Switch:
    """Branch ends on the two sides; an end is (branch_id, 'start'|'end')."""

    side_a: tuple
    side_b: tuple


@dataclass(frozen=True)
class TrainTrack:
    branches: tuple  # of Branch, ids 1..n
    switches: tuple  # of Switch
    transitions: tuple  # transitions[j-1] = tuple of branch ids legal after j

    def __post_init__(self):
        ends = [(b.id, e) for b in self.branches for e in ("start", "end")]
        attached = [e for sw in self.switches for e in sw.side_a + sw.side_b]
        if len(attached) != len(set(attached)):
            raise ValueError("a branch end attaches to more than one switch side")
        for e in attached:
            if e not in ends:
                raise ValueError(f"unknown branch end {e}")
        for b in self.branches:
            if not b.length > 0:
                raise ValueError(f"branch {b.id} has nonpositive length {b.length!r}")

    @property
    def n(self) -> int:
        return len(self.branches)

    @property
    def lengths(self) -> tuple:
        return tuple(b.length for b in self.branches)

    @property
    def exact(self) -> bool:
        return all(isinstance(b.length, Fraction) for b in self.branches)

    def successors(self, j: int) -> tuple:
        return self.transitions[j - 1]


@dataclass(frozen=True)
class WeightSystem:
    track: TrainTrack
    weights: tuple

    def __post_init__(self):
        if len(self.weights) != self.track.n:
            raise ValueError("one weight per branch required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        err = switch_condition_error(self.track, self.weights)
        tol = 0 if all(isinstance(w, Fraction) for w in self.weights) else 1e-9
        if err > tol:
            raise ValueError(f"switch conditions violated by {err!r}")


def switch_condition_matrix(track: TrainTrack) -> list:
    """Integer rows: (ends on side a) - (ends on side b), one per switch."""
    rows = []
    for sw in track.switches:
        row = [0] * track.n
        for bid, _ in sw.side_a:
            row[bid - 1] += 1
        for bid, _ in sw.side_b:
            row[bid - 1] -= 1
        rows.append(row)
    return rows


def switch_condition_error(track: TrainTrack, weights) -> float:
    worst = 0
    for row in switch_condition_matrix(track):
        worst = max(worst, abs(sum(r * w for r, w in zip(row, weights))))
    return worst


@dataclass(frozen=True)
class Route:
    branches: tuple
    length: object

    def __len__(self):
        return len(self.branches)


def validate_route(track: TrainTrack, branches) -> Route:
    if not branches:
        raise ValueError("empty route")
    for j, k in zip(branches, branches[1:]):
        if k not in track.successors(j):
            raise ValueError(f"illegal transition {j} -> {k}")
    length = sum(track.lengths[j - 1] for j in branches)
    return Route(tuple(branches), length)


# --- builders ---


def track_from_permutation(iet: IET) -> tuple:
    """One-switch track of the permutation: branch j = interval j.

    Incoming side in domain order, outgoing side in range order.  The
    legal continuations of branch j are the branches whose domain
    interval meets the image of interval j: a carried leaf leaves branch
    j through the image interval and can only enter a branch it actually
    crosses.  The interval lengths are a valid weight system.

    Returns (track, weight_system).
    """
    if not iet.permutation.is_irreducible():
        raise Reducible(f"permutation {iet.permutation.images} is reducible")
    p = iet.p
    d = iet.domain_offsets + (iet.total,)
    r = iet.range_offsets
    tol = 0 if iet.exact else OVERLAP_TOL
    trans = []
    for j in range(1, p + 1):
        lo, hi = r[j - 1], r[j - 1] + iet.lengths[j - 1]
        trans.append(
            tuple(
                k
                for k in range(1, p + 1)
                if lo < d[k] - tol and hi > d[k - 1] + tol
            )
        )
    order = sorted(range(1, p + 1), key=iet.permutation)
    switch = Switch(
        side_a=tuple((j, "end") for j in range(1, p + 1)),
        side_b=tuple((j, "start") for j in order),
    )
    track = TrainTrack(
        branches=tuple(Branch(j, iet.lengths[j - 1]) for j in range(1, p + 1)),
        switches=(switch,),
        transitions=tuple(trans),
    )
    return track, WeightSystem(track, iet.lengths)


def single_loop_track(length=1.0) -> TrainTrack:
    sw = Switch(side_a=((1, "end"),), side_b=((1, "start"),))
    return TrainTrack((Branch(1, length),), (sw,), ((1,),))


def figure_eight_track(l1=1.0, l2=1.0) -> TrainTrack:
    """Two loops through one switch with every transition legal."""
    sw = Switch(
        side_a=((1, "end"), (2, "end")),
        side_b=((1, "start"), (2, "start")),
    )
    return TrainTrack(
        (Branch(1, l1), Branch(2, l2)), (sw,), ((1, 2), (1, 2))
    )


# --- route counting ---


def enumerate_routes(track: TrainTrack, L) -> list:
    """All legal routes of length <= L, ordered by start branch then extension."""
    if L < 0:
        raise ValueError("L must be >= 0")
    lengths = track.lengths
    out = []
    stack = []

    def extend(j, remaining):
        l = lengths[j - 1]
        if l > remaining:
            return
        stack.append(j)
        out.append(Route(tuple(stack), sum(lengths[b - 1] for b in stack)))
        for k in track.successors(j):
            extend(k, remaining - l)
        stack.pop()

    for b in track.branches:
        extend(b.id, L)
    return out


def count_routes_dfs(track: TrainTrack, L) -> int:
    """Brute-force count, no memoization: the oracle for count_routes."""
    lengths = track.lengths

    def walk(j, remaining):
        l = lengths[j - 1]
        if l > remaining:
            return 0
        return 1 + sum(walk(k, remaining - l) for k in track.successors(j))

    return sum(walk(b.id, L) for b in track.branches)


def count_routes(track: TrainTrack, L) -> int:
    """N(L): legal routes of length <= L over all start branches.

    Memoized on (branch, residual length); exact residual keys when the
    lengths are Fractions, residual buckets of width 1e-3 otherwise.
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    exact = track.exact
    lengths = track.lengths
    memo = {}

    def key(rem):
        return rem if exact else round(rem / BUCKET)

    def f(j, rem):
        l = lengths[j - 1]
        if l > rem:
            return 0
        k = (j, key(rem - l))
        v = memo.get(k)
        if v is None:
            v = 1 + sum(f(s, rem - l) for s in track.successors(j))
            memo[k] = v
        return v

    return sum(f(b.id, L) for b in track.branches)


def dimension_estimate(track: TrainTrack, L) -> float:
    """Box-counting exponent estimate log N(L) / L."""
    n = count_routes(track, L)
    if n == 0:
        raise EmptyRouteSet(f"no route of length <= {L!r}")
    return math.log(n) / float(L)


def growth_exponent(track: TrainTrack, L_list) -> float:
    """Least-squares slope of log N(L) against L."""
    Ls = [float(L) for L in L_list]
    if len(Ls) < 2:
        raise ValueError("need at least two lengths to fit a slope")
    logs = []
    for L in L_list:
        n = count_routes(track, L)
        if n == 0:
            raise EmptyRouteSet(f"no route of length <= {L!r}")
        logs.append(math.log(n))
    return float(np.polyfit(Ls, logs, 1)[0])


# --- rational approximation in the switch-condition lattice ---


def _kernel_basis(rows, n):
    """Integer basis of the kernel of the integer matrix, via Fraction RREF."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        m[r] = [x / m[r][c] for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                m[i] = [a - m[i][c] * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    free = [c for c in range(n) if c not in pivots]
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        lcm = 1
        for x in v:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        basis.append([int(x * lcm) for x in v])
    return basis


def rational_approximation(w: WeightSystem, q: int) -> WeightSystem:
    """Nearest weight system with entries in (1/q)Z and exact switch conditions.

    Rounds q*w to integers, then repairs any switch-condition residue by a
    bounded search along small integer moves; the result stays within p/q
    of w in max norm (p = branch count) or Infeasible reports the best
    candidate found.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    track = w.track
    n = track.n
    rows = switch_condition_matrix(track)
    target = [float(x) * q for x in w.weights]
    n0 = [round(t) for t in target]

    def residual(vec):
        return [sum(r * v for r, v in zip(row, vec)) for row in rows]

    def feasible(vec):
        return all(x == 0 for x in residual(vec)) and all(v >= 0 for v in vec)

    best = n0
    if not feasible(n0):
        # bounded search over combined small moves; switch rows have tiny
        # integer entries so unit adjustments reach any nearby lattice point
        found = None
        frontier = [tuple(n0)]
        seen = {tuple(n0)}
        for _ in range(4 * n):
            nxt = []
            for vec in frontier:
                for i in range(n):
                    for dv in (-1, 1):
                        cand = list(vec)
                        cand[i] += dv
                        tc = tuple(cand)
                        if tc in seen or abs(cand[i] - target[i]) > n:
                            continue
                        seen.add(tc)
                        if feasible(cand):
                            found = cand
                            break
                        nxt.append(tc)
                    if found:
                        break
                if found:
                    break
            if found:
                break
            frontier = nxt
        if found is None:
            raise Infeasible(
                f"no lattice point within {n}/{q} of the weights",
                best=WeightSystem._bypass(track, tuple(Fraction(v, q) for v in best)),
            )
        best = found

    out = tuple(Fraction(v, q) for v in best)
    if max(abs(float(o) - float(x)) for o, x in zip(out, w.weights)) > n / q + 1e-12:
        raise Infeasible(
            f"best lattice point exceeds the {n}/{q} bound",
            best=WeightSystem._bypass(track, out),
        )
    return WeightSystem(track, out)


def _bypass(track, weights):
    ws = object.__new__(WeightSystem)
    object.__setattr__(ws, "track", track)
    object.__setattr__(ws, "weights", weights)
    return ws


WeightSystem._bypass = staticmethod(_bypass)


# --- recurrence ---


def is_recurrent(track: TrainTrack) -> bool:
    """True iff every branch lies on a legal closed route."""
    for b in track.branches:
        frontier = list(track.successors(b.id))
        seen = set(frontier)
        hit = b.id in seen
        while frontier and not hit:
            j = frontier.pop()
            for k in track.successors(j):
                if k == b.id:
                    hit = True
                    break
                if k not in seen:
                    seen.add(k)
                    frontier.append(k)
        if not hit:
            return False
    return True


# --- serialization ---


def format_track(track: TrainTrack) -> str:
    from .iet import format_length

    lines = ["branches"]
    for b in track.branches:
        lines.append(f"{b.id} {format_length(b.length)}")
    lines.append("switches")
    for sw in track.switches:
        a = " ".join(f"{bid}.{end}" for bid, end in sw.side_a)
        b = " ".join(f"{bid}.{end}" for bid, end in sw.side_b)
        lines.append(f"{a} | {b}")
    lines.append("transitions")
    for j, succ in enumerate(track.transitions, start=1):
        lines.append(f"{j} -> {' '.join(str(k) for k in succ)}")
    return "\n".join(lines)


def route_csv_row(route: Route) -> str:
    body = " ".join(str(j) for j in route.branches)
    return f"{route.branches[0]},{body},{format(float(route.length), '.17g')}"

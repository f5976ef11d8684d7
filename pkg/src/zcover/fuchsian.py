"""A genus-2 surface group in PSL(2,R) and its Z-cover diagnostics.

The group comes from the regular hyperbolic octagon with vertex angle
pi/4 (circumradius cosh r = 3 + 2*sqrt(2)), centered at i in the upper
half-plane.  Side pairings are computed from closed-form frame maps at
import time and the defining relator is re-verified on every
construction, so there are no hard-coded matrix constants to go stale.

Labels: generators "a1", "b1", "a2", "b2"; capitalized labels are the
inverses.  phi is the exponent-sum homomorphism weighted per generator,
default weights (1, 0, 0, 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .psl2 import (
    BruhatFactors,
    Cell,
    GroupElement,
    HPoint,
    IDENTITY,
    a_t,
    bruhat_decompose,
    entrywise_error,
    hyp_distance,
    make_element,
    mobius_act,
)

GENERATOR_LABELS = ("a1", "b1", "a2", "b2")
ALL_LABELS = GENERATOR_LABELS + tuple(l.upper() for l in GENERATOR_LABELS)
RELATOR_TOL = 1e-9
DEDUP_TOL = 1e-7
HYPERBOLIC_MARGIN = 1e-9


class NoHyperbolicElement(ValueError):
    """The enumerated ball contains no hyperbolic element."""


def _inverse_label(label: str) -> str:
    return label.lower() if label.isupper() else label.upper()


@dataclass(frozen=True)
class GroupWord:
    labels: tuple
    matrix: GroupElement
    phi: int

    @property
    def translation_length(self) -> float:
        return self.matrix.translation_length()

    def __str__(self):
        return ".".join(self.labels) if self.labels else "e"


@dataclass(frozen=True)
class SurfaceGroup:
    generators: tuple  # ((label, GroupElement) for the four positive generators)
    relator: tuple  # word in labels
    phi_weights: tuple  # integer weight per positive generator

    def __post_init__(self):
        if tuple(l for l, _ in self.generators) != GENERATOR_LABELS:
            raise ValueError(f"generators must be labeled {GENERATOR_LABELS}")
        rel = self.evaluate(self.relator)
        err = entrywise_error(rel, IDENTITY)
        if err > RELATOR_TOL:
            raise ValueError(f"relator misses the identity by {err!r}")
        for label, m in self.generators:
            if not m.is_hyperbolic(HYPERBOLIC_MARGIN):
                raise ValueError(f"generator {label} is not hyperbolic: trace {m.trace!r}")
        if self.phi_of(self.relator) != 0:
            raise ValueError("phi does not vanish on the relator")

    def matrix_of(self, label: str) -> GroupElement:
        base = dict(self.generators)
        if label in base:
            return base[label]
        return base[label.lower()].inv()

    def phi_of_label(self, label: str) -> int:
        w = dict(zip(GENERATOR_LABELS, self.phi_weights))
        return w[label] if label in w else -w[label.lower()]

    def phi_of(self, labels) -> int:
        return sum(self.phi_of_label(l) for l in labels)

    def evaluate(self, labels) -> GroupElement:
        m = IDENTITY
        for l in labels:
            m = m @ self.matrix_of(l)
        return m

    def word(self, labels) -> GroupWord:
        return GroupWord(tuple(labels), self.evaluate(labels), self.phi_of(labels))

    def identity_word(self) -> GroupWord:
        return GroupWord((), IDENTITY, 0)


def _frame(p: complex, q: complex) -> np.ndarray:
    """Matrix sending p to i and q onto the standard outgoing direction at i."""
    m1 = np.array([[1.0, -p.real], [0.0, 1.0]])
    s = math.sqrt(p.imag)
    m2 = np.array([[1.0 / s, 0.0], [0.0, s]])
    q2 = _apply(m2 @ m1, q)
    # the rotation k_phi about i multiplies the Cayley coordinate by e^{2 i phi}
    phi = -cmath.phase((q2 - 1j) / (q2 + 1j)) / 2.0
    rot = np.array([[math.cos(phi), math.sin(phi)], [-math.sin(phi), math.cos(phi)]])
    return rot @ m2 @ m1


def _apply(m: np.ndarray, z: complex) -> complex:
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def octagon_group(phi_weights=(1, 0, 0, 0)) -> SurfaceGroup:
    """Genus-2 group of the regular octagon, relator [a1,b1][a2,b2].

    The side pairing carrying the oriented edge (v_{j+1} -> v_j) of one
    side onto its partner is F(target)^-1 F(source); walking the single
    vertex cycle of the octagon yields the relator, which fixes the
    naming below.
    """
    cosh_r = 3.0 + 2.0 * math.sqrt(2.0)
    rho = math.sqrt((cosh_r - 1.0) / (cosh_r + 1.0))
    disk = [rho * cmath.exp(1j * k * math.pi / 4.0) for k in range(8)]
    v = [1j * (1 + w) / (1 - w) for w in disk]  # Cayley to the half-plane

    def pairing(src_p, src_q, dst_p, dst_q):
        m = np.linalg.inv(_frame(v[dst_p], v[dst_q])) @ _frame(v[src_p], v[src_q])
        return make_element(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    # boundary word a b a^-1 b^-1 c d c^-1 d^-1 on edges e_0..e_7;
    # the pairing for a letter maps its inverse edge, reversed, onto it
    pa = pairing(3, 2, 0, 1)
    pb = pairing(4, 3, 1, 2)
    pc = pairing(7, 6, 4, 5)
    pd = pairing(0, 7, 5, 6)
    # vertex cycle v0 -> v3 -> v2 -> v1 -> v4 -> v7 -> v6 -> v5 -> v0 gives
    # pd^-1 pc pd pc^-1 pb^-1 pa pb pa^-1 = 1, i.e. [pb^-1,pa][pd^-1,pc] = 1
    gens = (("a1", pb.inv()), ("b1", pa), ("a2", pd.inv()), ("b2", pc))
    relator = ("a1", "b1", "A1", "B1", "a2", "b2", "A2", "B2")
    return SurfaceGroup(gens, relator, tuple(phi_weights))


# --- enumeration ---


def _dedup_key(m: GroupElement) -> tuple:
    return tuple(round(x / DEDUP_TOL) for x in m.entries())


def enumerate_elements(group: SurfaceGroup, R: int, kernel_only: bool = False) -> list:
    """All distinct elements with a reduced word of length <= R.

    One GroupWord per matrix class (dedup tolerance 1e-7); the identity
    is included.  kernel_only keeps only phi = 0.
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    seen = {_dedup_key(IDENTITY): group.identity_word()}
    frontier = [group.identity_word()]
    for _ in range(R):
        nxt = []
        for w in frontier:
            last = w.labels[-1] if w.labels else None
            for l in ALL_LABELS:
                if last is not None and l == _inverse_label(last):
                    continue
                m = w.matrix @ group.matrix_of(l)
                key = _dedup_key(m)
                if key in seen:
                    continue
                nw = GroupWord(w.labels + (l,), m, w.phi + group.phi_of_label(l))
                seen[key] = nw
                nxt.append(nw)
        frontier = nxt
    out = list(seen.values())
    if kernel_only:
        out = [w for w in out if w.phi == 0]
    return out


def _letter_matrices(group: SurfaceGroup) -> np.ndarray:
    return np.array([group.matrix_of(l).entries() for l in ALL_LABELS])


def _mat_mul(rows: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(N,4) x (4,) batched 2x2 product, entries ordered (a,b,c,d)."""
    a, b, c, d = rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3]
    return np.stack(
        [
            a * g[0] + b * g[2],
            a * g[1] + b * g[3],
            c * g[0] + d * g[2],
            c * g[1] + d * g[3],
        ],
        axis=1,
    )


def kappa_estimate(group: SurfaceGroup, R: int):
    """(kappa_R, witness): max of |phi| / translation length, word length <= R.

    Level-by-level array sweep over all reduced words; no deduplication
    is needed since duplicates cannot change a maximum.
    """
    if R < 1:
        raise NoHyperbolicElement("R = 0 enumerates only the identity")
    gen = _letter_matrices(group)
    phi_letter = np.array([group.phi_of_label(l) for l in ALL_LABELS])
    inv_idx = np.array([ALL_LABELS.index(_inverse_label(l)) for l in ALL_LABELS])

    mats = gen.copy()
    phi = phi_letter.copy()
    last = np.arange(8)
    parents = []  # (parent index array, letter array) per level
    parents.append((np.full(8, -1), np.arange(8)))

    best = (-1.0, None)  # (ratio, (level, index))
    for level in range(1, R + 1):
        tr = np.abs(mats[:, 0] + mats[:, 3])
        hyp = tr > 2.0 + HYPERBOLIC_MARGIN
        if hyp.any():
            ell = 2.0 * np.arccosh(np.minimum(tr[hyp] / 2.0, np.finfo(float).max))
            ratio = np.abs(phi[hyp]) / ell
            i = int(np.argmax(ratio))
            if ratio[i] > best[0]:
                best = (float(ratio[i]), (level, int(np.flatnonzero(hyp)[i])))
        if level == R:
            break
        idx_parts, letter_parts, mat_parts = [], [], []
        for l in range(8):
            mask = last != inv_idx[l]
            idx = np.flatnonzero(mask)
            idx_parts.append(idx)
            letter_parts.append(np.full(len(idx), l))
            mat_parts.append(_mat_mul(mats[idx], gen[l]))
        parent = np.concatenate(idx_parts)
        letter = np.concatenate(letter_parts)
        mats = np.concatenate(mat_parts)
        phi = phi[parent] + phi_letter[letter]
        last = letter
        parents.append((parent, letter))

    if best[1] is None:
        raise NoHyperbolicElement(f"no hyperbolic element at radius {R}")
    level, index = best[1]
    labels = []
    for lv in range(level - 1, -1, -1):
        parent, letter = parents[lv]
        labels.append(ALL_LABELS[int(letter[index])])
        index = int(parent[index])
    witness = group.word(tuple(reversed(labels)))
    return best[0], witness


# --- quasi-minimizing defect ---


@dataclass(frozen=True)
class DefectSample:
    t: float
    defect: float
    radius_limited: bool
    minimizer: GroupWord


def qm_defect(
    group: SurfaceGroup,
    x: GroupElement,
    t_grid,
    R: int,
    kernel_only: bool = False,
    prune: float = 8.0,
) -> list:
    """Defect samples D(t) = t - min_gamma d(a_t x o, x gamma o), o = i.

    The minimum runs over group elements of word length <= R whose orbit
    point stays within `prune` of the sampled flow segment (a geometric
    cut that can only overestimate the minimum distance, hence
    underestimate D).  radius_limited flags samples whose minimizer sits
    at word length exactly R.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    if any(t < 0 for t in t_grid):
        raise ValueError("t_grid must be nonnegative")
    o = HPoint(0.0, 1.0)
    xinv = x.inv()
    targets = [mobius_act(xinv @ a_t(float(t)) @ x, o) for t in t_grid]

    def seg_dist(p: HPoint) -> float:
        return min(hyp_distance(p, u) for u in targets)

    keep = [group.identity_word()]
    frontier = [group.identity_word()]
    seen = {_dedup_key(IDENTITY)}
    for _ in range(R):
        nxt = []
        for w in frontier:
            last = w.labels[-1] if w.labels else None
            for l in ALL_LABELS:
                if last is not None and l == _inverse_label(last):
                    continue
                m = w.matrix @ group.matrix_of(l)
                key = _dedup_key(m)
                if key in seen:
                    continue
                seen.add(key)
                if seg_dist(mobius_act(m, o)) > prune:
                    continue
                nw = GroupWord(w.labels + (l,), m, w.phi + group.phi_of_label(l))
                nxt.append(nw)
                keep.append(nw)
        frontier = nxt

    candidates = [w for w in keep if not kernel_only or w.phi == 0]
    if not candidates:
        candidates = [group.identity_word()]
    out = []
    for t, u in zip(t_grid, targets):
        dist, argmin = min(
            ((hyp_distance(u, mobius_act(w.matrix, o)), w) for w in candidates),
            key=lambda pair: pair[0],
        )
        out.append(
            DefectSample(
                t=float(t),
                defect=float(t) - dist,
                radius_limited=len(argmin.labels) >= R,
                minimizer=argmin,
            )
        )
    return out


# --- delta spectrum ---


@dataclass(frozen=True)
class DeltaSpectrum:
    values: tuple  # sorted r values
    witnesses: tuple  # (GroupWord, BruhatFactors) aligned with values
    basepoint: GroupElement
    radius: int
    omega_count: int  # conjugates that landed in the omega cell


def delta_spectrum(group: SurfaceGroup, h: GroupElement, R: int) -> DeltaSpectrum:
    """A-parameters of h gamma h^-1 over the nontrivial phi-kernel ball."""
    if R < 1:
        raise ValueError("R must be >= 1")
    hinv = h.inv()
    pairs = []
    omega = 0
    for w in enumerate_elements(group, R, kernel_only=True):
        if not w.labels:
            continue
        f = bruhat_decompose(h @ w.matrix @ hinv)
        if f.cell is Cell.OMEGA_CELL:
            omega += 1
            continue
        pairs.append((f.t, (w, f)))
    pairs.sort(key=lambda p: p[0])
    return DeltaSpectrum(
        values=tuple(r for r, _ in pairs),
        witnesses=tuple(wf for _, wf in pairs),
        basepoint=h,
        radius=R,
        omega_count=omega,
    )


# --- proximality ---


@dataclass(frozen=True)
class ProximalityResult:
    inf_dist: float
    ell: float  # A-parameter of the discrepancy at the minimizing sample
    t_star: float
    word: GroupWord
    omega_skipped: int


def proximality_scan(
    x: GroupElement, y: GroupElement, group: SurfaceGroup, t_grid, R: int
) -> ProximalityResult:
    """Minimize the frame distance between a_t x and a_t y gamma over t, gamma.

    The distance of a configuration is the rep-distance of its discrepancy
    h = (a_t x)(a_t y gamma)^-1 from the identity, so that a near-match
    means h is near the identity regardless of how large a_t itself is.
    At each non-skipped sample h is Bruhat-decomposed; the result reports
    the A-parameter at the overall minimizing sample.  Samples whose
    discrepancy falls in the omega cell are skipped and counted.
    """
    if len(t_grid) == 0:
        raise ValueError("empty t_grid")
    words = enumerate_elements(group, R)
    mats = np.array([(y @ w.matrix).entries() for w in words])
    best = None
    omega_skipped = 0
    for t in t_grid:
        at = a_t(float(t))
        left = np.array((at @ x).entries())
        e = math.exp(float(t) / 2.0)
        scaled = np.empty_like(mats)
        scaled[:, 0] = mats[:, 0] * e
        scaled[:, 1] = mats[:, 1] * e
        scaled[:, 2] = mats[:, 2] / e
        scaled[:, 3] = mats[:, 3] / e
        # h = left @ scaled^-1, with scaled^-1 = (d, -b, -c, a) at det 1
        h00 = left[0] * scaled[:, 3] - left[1] * scaled[:, 2]
        h01 = -left[0] * scaled[:, 1] + left[1] * scaled[:, 0]
        h10 = left[2] * scaled[:, 3] - left[3] * scaled[:, 2]
        h11 = -left[2] * scaled[:, 1] + left[3] * scaled[:, 0]
        ident = np.array([1.0, 0.0, 0.0, 1.0])
        hs = np.stack([h00, h01, h10, h11], axis=1)
        plus = np.sqrt(((hs - ident) ** 2).sum(axis=1))
        minus = np.sqrt(((hs + ident) ** 2).sum(axis=1))
        dists = np.minimum(plus, minus)
        i = int(np.argmin(dists))
        h = (at @ x) @ ((at @ y) @ words[i].matrix).inv()
        f = bruhat_decompose(h)
        if f.cell is Cell.OMEGA_CELL:
            omega_skipped += 1
            continue
        if best is None or dists[i] < best[0]:
            best = (float(dists[i]), f.t, float(t), words[i])
    if best is None:
        raise ValueError("every sample fell in the omega cell")
    return ProximalityResult(
        inf_dist=best[0],
        ell=best[1],
        t_star=best[2],
        word=best[3],
        omega_skipped=omega_skipped,
    )


# --- serialization ---


def format_group(group: SurfaceGroup) -> str:
    lines = []
    for label, m in group.generators:
        row = " ".join(format(v, ".17g") for v in m.entries())
        lines.append(f"{label} {row}")
    lines.append("relator " + ".".join(group.relator))
    lines.append("phi " + " ".join(str(w) for w in group.phi_weights))
    return "\n".join(lines)

"""Interval exchange transformations.

Intervals are half-open [x, y); the map is defined at left endpoints and
is a genuine bijection of [0, |I|).  Interval j is placed at range
position pi(j): its image starts after the images of all intervals k
with pi(k) < pi(j).

Lengths may be floats or exact Fractions; with Fraction lengths every
orbit computation is exact, which is what collision certification in
`keane_check` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Sequence

import numpy as np

FLOAT_TOL = 1e-12


class OutOfDomain(ValueError):
    """Point outside [0, |I|)."""


class Reducible(ValueError):
    """The permutation maps a proper prefix {1..j} to itself."""


@dataclass(frozen=True)
class Permutation:
    """Permutation of {1..p} given by its image list: pi(j) = images[j-1]."""

    images: tuple

    def __post_init__(self):
        p = len(self.images)
        if sorted(self.images) != list(range(1, p + 1)):
            raise ValueError(f"not a permutation of 1..{p}: {self.images}")

    def __len__(self):
        return len(self.images)

    def __call__(self, j: int) -> int:
        return self.images[j - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for j, i in enumerate(self.images, start=1):
            inv[i - 1] = j
        return Permutation(tuple(inv))

    def is_irreducible(self) -> bool:
        top = 0
        for j, i in enumerate(self.images[:-1], start=1):
            top = max(top, i)
            if top == j:
                return False
        return True


@dataclass(frozen=True)
class IET:
    lengths: tuple
    permutation: Permutation

    def __post_init__(self):
        if len(self.lengths) != len(self.permutation):
            raise ValueError("length/permutation size mismatch")
        if any(l <= 0 for l in self.lengths):
            raise ValueError("lengths must be positive")

    @property
    def p(self) -> int:
        return len(self.lengths)

    @property
    def exact(self) -> bool:
        return all(isinstance(l, Fraction) for l in self.lengths)

    @property
    def total(self):
        return sum(self.lengths)

    @cached_property
    def domain_offsets(self) -> tuple:
        out, acc = [], self.lengths[0] * 0
        for l in self.lengths:
            out.append(acc)
            acc = acc + l
        return tuple(out)

    @cached_property
    def range_offsets(self) -> tuple:
        """Left endpoint of the image of each interval."""
        pi = self.permutation
        order = sorted(range(1, self.p + 1), key=pi)
        out = [None] * self.p
        acc = self.lengths[0] * 0
        for j in order:
            out[j - 1] = acc
            acc = acc + self.lengths[j - 1]
        return tuple(out)

    @cached_property
    def shifts(self) -> tuple:
        return tuple(r - d for r, d in zip(self.range_offsets, self.domain_offsets))

    @cached_property
    def discontinuities(self) -> tuple:
        """Interior division points of the domain partition."""
        return self.domain_offsets[1:]

    @cached_property
    def range_discontinuities(self) -> tuple:
        """Interior division points of the range partition."""
        return tuple(sorted(self.range_offsets))[1:]

    def interval_of(self, x) -> int:
        if not (0 <= x < self.total):
            raise OutOfDomain(f"{x!r} outside [0, {self.total!r})")
        j = self.p
        for k, off in enumerate(self.domain_offsets[1:], start=1):
            if x < off:
                j = k
                break
        return j

    def apply(self, x):
        return x + self.shifts[self.interval_of(x) - 1]

    def apply_left_limit(self, x):
        """lim_{z -> x^-} T(z).  Differs from apply(x) only at division points."""
        if not (0 < x <= self.total):
            raise OutOfDomain(f"{x!r} outside (0, {self.total!r}]")
        j = self.p
        for k, off in enumerate(self.domain_offsets[1:], start=1):
            if x <= off:
                j = k
                break
        return x + self.shifts[j - 1]

    @cached_property
    def _inverse(self) -> "IET":
        pi_inv = self.permutation.inverse()
        lengths = tuple(self.lengths[pi_inv(k) - 1] for k in range(1, self.p + 1))
        return IET(lengths, pi_inv)

    def inverse(self) -> "IET":
        return self._inverse

    def inverse_apply(self, y):
        if not (0 <= y < self.total):
            raise OutOfDomain(f"{y!r} outside [0, {self.total!r})")
        for j in range(self.p):
            r = self.range_offsets[j]
            if r <= y < r + self.lengths[j]:
                return y - self.shifts[j]
        raise AssertionError("range intervals do not cover the domain")

    def orbit(self, x, n: int) -> list:
        out = [x]
        for _ in range(n):
            x = self.apply(x)
            out.append(x)
        return out


@dataclass(frozen=True)
class KeaneVerdict:
    status: str  # PASS | COLLISION | REDUCIBLE
    n: int = 0
    i: int = 0
    j: int = 0

    def __bool__(self):
        return self.status == "PASS"


def keane_check(iet: IET, depth: int, tol: float = FLOAT_TOL) -> KeaneVerdict:
    """Search for forward collisions between discontinuity orbits.

    COLLISION(n, i, j) means T^n(d_i) = d_j.  In exact mode coincidence is
    literal equality; in float mode it is |difference| <= tol, so a float
    COLLISION is evidence, not a certificate.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not iet.permutation.is_irreducible():
        return KeaneVerdict("REDUCIBLE")
    discs = iet.discontinuities
    for i, d in enumerate(discs, start=1):
        x = d
        for n in range(1, depth + 1):
            x = iet.apply(x)
            for j, e in enumerate(discs, start=1):
                hit = (x == e) if iet.exact else abs(x - e) <= tol
                if hit:
                    return KeaneVerdict("COLLISION", n=n, i=i, j=j)
    return KeaneVerdict("PASS")


def weak_mix_statistic(iet: IET, theta_grid: Sequence[float], N: int, x0):
    """Eigenvalue-scan statistic S(theta) = |(1/N) sum_n e^{-2 pi i theta n} e^{2 pi i T^n(x0)/|I|}|.

    Returns (numpy array of S values in [0,1], max over the grid).  A value
    near 1 at some theta flags a measurable eigenvalue candidate (rotations
    peak at their rotation number); uniformly small values across a fine
    grid are consistent with weak mixing but never a proof of it.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    total = float(iet.total)
    x = x0
    orbit = np.empty(N)
    for n in range(N):
        orbit[n] = float(x)
        x = iet.apply(x)
    z = np.exp(2j * np.pi * orbit / total)

    thetas = np.asarray(theta_grid, dtype=float)
    M = len(thetas)
    uniform = (
        M > 1
        and thetas[0] == 0.0
        and np.allclose(np.diff(thetas), 1.0 / M, rtol=0.0, atol=1e-15)
    )
    if uniform:
        # theta_k = k/M: fold the orbit mod M and take one DFT
        folded = np.zeros(M, dtype=complex)
        np.add.at(folded, np.arange(N) % M, z)
        S = np.abs(np.fft.fft(folded)) / N
    else:
        S = np.empty(M)
        n = np.arange(N)
        chunk = max(1, int(2e6) // max(N, 1))
        for lo in range(0, M, chunk):
            th = thetas[lo : lo + chunk]
            phase = np.exp(-2j * np.pi * np.outer(th, n))
            S[lo : lo + chunk] = np.abs(phase @ z) / N
    return S, float(S.max())


def uniform_theta_grid(M: int) -> np.ndarray:
    return np.arange(M) / M


# --- serialization: "p; lengths; images", lengths decimal or num/den ---


def format_length(l) -> str:
    if isinstance(l, Fraction):
        return f"{l.numerator}/{l.denominator}"
    return format(float(l), ".17g")


def format_iet_record(iet: IET) -> str:
    lengths = " ".join(format_length(l) for l in iet.lengths)
    images = " ".join(str(i) for i in iet.permutation.images)
    return f"{iet.p}; {lengths}; {images}"


def parse_length(tok: str):
    if "/" in tok:
        num, den = tok.split("/")
        return Fraction(int(num), int(den))
    return float(tok)


def parse_iet_record(text: str) -> IET:
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 3:
        raise ValueError(f"expected 'p; lengths; images', got {text!r}")
    p = int(parts[0])
    lengths = tuple(parse_length(t) for t in parts[1].split())
    images = tuple(int(t) for t in parts[2].split())
    if len(lengths) != p or len(images) != p:
        raise ValueError(f"record announces p={p} but carries {len(lengths)} lengths, {len(images)} images")
    if any(isinstance(l, Fraction) for l in lengths) and not all(
        isinstance(l, Fraction) for l in lengths
    ):
        raise ValueError("mixed rational and decimal lengths in one record")
    return IET(lengths, Permutation(images))

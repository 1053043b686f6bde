"""Exact combinatorics behind the occupation-time moment formulas.

Set partitions of ``{1, ..., m}``, their block-size profiles, Stirling and
Bell numbers/polynomials, cyclic shifts and Baxter's combinatorial lemma.
Everything here works with plain integers or :class:`fractions.Fraction`
whenever the inputs allow it, so identities can be checked with zero
tolerance.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

#: Rational numbers are ``fractions.Fraction`` throughout the package.
Rational = Fraction

DEFAULT_PARTITION_CAP = 12


class PartitionCapError(ValueError):
    """Raised when an enumeration over all set partitions would explode."""


class DegeneracyError(ArithmeticError):
    """Baxter's lemma did not single out exactly one cyclic shift.

    This signals non-skew input or a floating-point boundary hit.
    """

    def __init__(self, count: int, message: str | None = None):
        self.count = count
        super().__init__(message or f"expected exactly one admissible cyclic shift, found {count}")


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{1, ..., m}`` into nonempty disjoint blocks."""

    m: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = [x for b in self.blocks for x in b]
        if any(len(b) == 0 for b in self.blocks):
            raise ValueError("empty block")
        if sorted(seen) != list(range(1, self.m + 1)):
            raise ValueError(f"blocks do not partition {{1..{self.m}}}: {self.blocks}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(sorted((len(b) for b in self.blocks), reverse=True))

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class BlockProfile:
    """Multiset of block sizes together with the number of set partitions sharing it."""

    m: int
    sizes: tuple[int, ...]
    weight: int

    @property
    def n_blocks(self) -> int:
        return len(self.sizes)


def enumerate_set_partitions(m: int, cap: int = DEFAULT_PARTITION_CAP) -> Iterator[SetPartition]:
    """Yield every set partition of ``{1, ..., m}`` exactly once.

    Iterates over restricted-growth strings ``a`` with ``a[0] = 0`` and
    ``a[i] <= 1 + max(a[:i])``; element ``i + 1`` goes to block ``a[i]``.

    Raises
    ------
    PartitionCapError
        If ``m`` exceeds ``cap`` (the Bell numbers grow super-exponentially).
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if m > cap:
        raise PartitionCapError(
            f"refusing to enumerate the partitions of {m} elements (cap {cap}); "
            "raise the cap explicitly or use block_profiles()"
        )
    a = [0] * m
    # prefix_max[i] = max(a[:i+1])
    prefix_max = [0] * m
    while True:
        blocks: list[list[int]] = [[] for _ in range(prefix_max[-1] + 1)]
        for i, label in enumerate(a):
            blocks[label].append(i + 1)
        yield SetPartition(m, tuple(tuple(b) for b in blocks))

        i = m - 1
        while i > 0 and a[i] > prefix_max[i - 1]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], a[i])
        for j in range(i + 1, m):
            a[j] = 0
            prefix_max[j] = prefix_max[i]


def integer_partitions(m: int) -> Iterator[tuple[int, ...]]:
    """Integer partitions of ``m`` as nonincreasing tuples."""

    def rec(rest: int, largest: int):
        if rest == 0:
            yield ()
            return
        for k in range(min(rest, largest), 0, -1):
            for tail in rec(rest - k, k):
                yield (k,) + tail

    yield from rec(m, m)


def profile_weight(sizes: Sequence[int]) -> int:
    """Number of set partitions of ``sum(sizes)`` with this block-size multiset."""
    m = sum(sizes)
    denom = 1
    for size, mult in Counter(sizes).items():
        denom *= math.factorial(size) ** mult * math.factorial(mult)
    return math.factorial(m) // denom


@lru_cache(maxsize=None)
def _profiles(m: int) -> tuple[BlockProfile, ...]:
    return tuple(BlockProfile(m, sizes, profile_weight(sizes)) for sizes in integer_partitions(m))


def block_profiles(m: int) -> list[BlockProfile]:
    """One :class:`BlockProfile` per integer partition of ``m``.

    The weights sum to the Bell number ``B_m``. Any sum over set partitions
    whose summand depends only on block sizes collapses onto these profiles.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    return list(_profiles(m))


def bell_number(m: int) -> int:
    """Bell number ``B_m`` via the Bell triangle."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def stirling_second(m: int, k: int) -> int:
    """Stirling number of the second kind: partitions of ``m`` elements into ``k`` blocks."""
    if m == k:
        return 1
    if k == 0 or k > m:
        return 0
    return k * stirling_second(m - 1, k) + stirling_second(m - 1, k - 1)


@lru_cache(maxsize=None)
def unsigned_stirling_first(m: int, b: int) -> int:
    """Unsigned Stirling number of the first kind.

    Counts permutations of ``m`` elements with exactly ``b`` cycles, which
    equals the sum over partitions with ``b`` blocks of ``prod (|B| - 1)!``.
    ``b > m`` gives 0.
    """
    if m < 0 or b < 0:
        raise ValueError("arguments must be nonnegative")
    if b > m:
        return 0
    if m == b:
        return 1
    if b == 0:
        return 0
    return unsigned_stirling_first(m - 1, b - 1) + (m - 1) * unsigned_stirling_first(m - 1, b)


def rising_factorial(x, m: int):
    """Rising factorial ``x (x + 1) ... (x + m - 1)``; the empty product is 1.

    The result has the type of ``x`` (``Fraction`` in, ``Fraction`` out).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    out = x * 0 + 1
    for i in range(m):
        out = out * (x + i)
    return out


def partial_bell(k: int, l: int, w: Sequence):
    """Partial Bell polynomial ``B_{k,l}(w)``.

    ``w[i - 1]`` holds ``w_i``. Evaluated with the recurrence
    ``B_{n,j} = sum_i C(n-1, i-1) w_i B_{n-i, j-1}``, which is exact for
    rational ``w``.
    """
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    if l > k:
        return 0
    if len(w) < k - l + 1:
        raise ValueError(f"need at least {k - l + 1} entries of w, got {len(w)}")
    zero = w[0] * 0
    # table[n][j] = B_{n,j}, n <= k, j <= l
    table = [[zero] * (l + 1) for _ in range(k + 1)]
    table[0][0] = zero + 1
    for n in range(1, k + 1):
        for j in range(1, min(n, l) + 1):
            acc = zero
            for i in range(1, n - j + 2):
                if table[n - i][j - 1] != 0:
                    acc = acc + math.comb(n - 1, i - 1) * w[i - 1] * table[n - i][j - 1]
            table[n][j] = acc
    return table[k][l]


def complete_bell(k: int, v: Sequence, w: Sequence):
    """Complete Bell polynomial ``B_k(v, w) = sum_l v_l B_{k,l}(w)`` (1-based ``v``, ``w``)."""
    if len(v) < k or len(w) < k:
        raise ValueError("v and w need at least k entries")
    return sum((v[l - 1] * partial_bell(k, l, w) for l in range(1, k + 1)), w[0] * 0)


def arcsine_walk_moment(m: int) -> Fraction:
    """``4**-m * C(2m, m)``: arcsine moments and symmetric-walk persistence."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return Fraction(math.comb(2 * m, m), 4**m)


def persistence_recursion_check(m: int) -> bool:
    """Check ``sum_{j=0}^{m} p_j p_{m-j} == 1`` exactly, ``p_j = arcsine_walk_moment(j)``."""
    if m < 1:
        raise ValueError("m must be positive")
    total = sum(arcsine_walk_moment(j) * arcsine_walk_moment(m - j) for j in range(m + 1))
    return total == 1


def cyclic_shifts(n: int) -> list[tuple[int, ...]]:
    """The ``n`` rotations of ``range(n)``; shift ``j`` maps position ``i`` to ``(i + j) % n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return [tuple((i + j) % n for i in range(n)) for j in range(n)]


def apply_permutation(perm: Sequence[int], seq: Sequence) -> list:
    return [seq[i] for i in perm]


def _cross(z, p) -> float:
    return z[0] * p[1] - z[1] * p[0]


def left_half_space_contains(z, p) -> bool:
    """Whether ``p`` lies in the closed left half plane induced by ``z``."""
    if z[0] == 0 and z[1] == 0:
        raise ValueError("z = 0 does not induce a half space")
    return _cross(z, p) >= 0


def admissible_shifts(points) -> list[int]:
    """Cyclic shifts whose partial sums all lie in ``H(s_n)``.

    The final partial sum equals ``s_n`` for every shift and sits on the
    boundary line, so only ``s_1 .. s_{n-1}`` are tested; this keeps
    rounding in the last sum from excluding a valid shift.
    """
    z = np.asarray(points, dtype=float)
    if z.ndim != 2 or z.shape[1] != 2 or len(z) < 1:
        raise ValueError("points must be a nonempty list of planar pairs")
    n = len(z)
    total = z.sum(axis=0)
    if not total.any():
        raise DegeneracyError(0, "total sum is zero, half space undefined")
    out = []
    for j in range(n):
        partial = np.cumsum(np.roll(z, -j, axis=0), axis=0)[: n - 1]
        if np.all(total[0] * partial[:, 1] - total[1] * partial[:, 0] >= 0):
            out.append(j)
    return out


def baxter_unique_shift(points) -> int:
    """Index of the unique cyclic shift keeping all partial sums in ``H(s_n)``.

    Raises
    ------
    DegeneracyError
        If the number of admissible shifts is not exactly one.
    """
    shifts = admissible_shifts(points)
    if len(shifts) != 1:
        raise DegeneracyError(len(shifts))
    return shifts[0]


def baxter_shift_counts(points: np.ndarray) -> np.ndarray:
    """Number of admissible cyclic shifts for a batch of point lists.

    ``points`` has shape ``(trials, n, 2)``; returns an integer array of
    shape ``(trials,)``. Same boundary convention as :func:`admissible_shifts`.
    """
    z = np.asarray(points, dtype=float)
    trials, n, _ = z.shape
    total = z.sum(axis=1)
    counts = np.zeros(trials, dtype=np.int64)
    for j in range(n):
        partial = np.cumsum(np.roll(z, -j, axis=1), axis=1)[:, : n - 1]
        cross = total[:, None, 0] * partial[..., 1] - total[:, None, 1] * partial[..., 0]
        counts += np.all(cross >= 0, axis=1)
    return counts

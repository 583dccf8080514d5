"""Subshifts of finite type: admissibility, primitivity, word and
periodic-orbit enumeration, and specification padding.

Symbols are 0-based integers ``0..N-1``.  A word is a tuple of symbols; a
periodic orbit is represented by its necklace, the lexicographically minimal
rotation of a primitive (aperiodic) cyclically admissible word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InadmissibleWord, NotPrimitive

Word = tuple[int, ...]


@dataclass(eq=False)
class SubshiftOfFiniteType:
    """Bi-infinite sequences over ``{0..N-1}`` with transitions allowed by a
    0/1 adjacency matrix: ``x`` is admissible iff ``adjacency[x_k, x_{k+1}] == 1``
    for all k."""

    alphabet_size: int
    adjacency: np.ndarray

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=np.int8)
        n = self.alphabet_size
        if self.adjacency.shape != (n, n):
            raise ValueError(f"adjacency must be {n}x{n}, got {self.adjacency.shape}")
        if not np.isin(self.adjacency, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if (self.adjacency.sum(axis=1) == 0).any() or (self.adjacency.sum(axis=0) == 0).any():
            raise ValueError("every symbol must have at least one successor and one predecessor")

    @classmethod
    def full_shift(cls, n: int) -> "SubshiftOfFiniteType":
        return cls(alphabet_size=n, adjacency=np.ones((n, n), dtype=np.int8))

    @classmethod
    def golden_mean(cls) -> "SubshiftOfFiniteType":
        """Two symbols, the word (1, 1) forbidden."""
        return cls(alphabet_size=2, adjacency=np.array([[1, 1], [1, 0]], dtype=np.int8))

    def is_admissible(self, word) -> bool:
        w = tuple(word)
        if any(not 0 <= s < self.alphabet_size for s in w):
            return False
        a = self.adjacency
        return all(a[w[t], w[t + 1]] for t in range(len(w) - 1))

    def is_cyclically_admissible(self, word) -> bool:
        w = tuple(word)
        if not w:
            return False
        return self.is_admissible(w) and bool(self.adjacency[w[-1], w[0]])

    def require_admissible(self, word) -> Word:
        w = tuple(int(s) for s in word)
        if not self.is_admissible(w):
            raise InadmissibleWord(f"word {w} is not admissible")
        return w

    def to_json_dict(self) -> dict:
        return {
            "alphabet_size": self.alphabet_size,
            "adjacency": self.adjacency.astype(int).tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SubshiftOfFiniteType":
        return cls(alphabet_size=int(data["alphabet_size"]), adjacency=np.array(data["adjacency"]))


@dataclass(frozen=True)
class PeriodicOrbit:
    """A periodic orbit, canonicalized as the lexicographically minimal
    rotation of its primitive (aperiodic) period word."""

    necklace: Word

    @property
    def period(self) -> int:
        return len(self.necklace)

    def __lt__(self, other: "PeriodicOrbit"):
        return (self.period, self.necklace) < (other.period, other.necklace)


def minimal_rotation(word) -> Word:
    """Lexicographically minimal rotation, by Booth's two-pointer scan."""
    s = tuple(word)
    n = len(s)
    if n == 0:
        return s
    ss = s + s
    i, j, k = 0, 1, 0
    while i < n and j < n and k < n:
        a, b = ss[i + k], ss[j + k]
        if a == b:
            k += 1
        elif a > b:
            i = i + k + 1
            if i <= j:
                i = j + 1
            k = 0
        else:
            j = j + k + 1
            if j <= i:
                j = i + 1
            k = 0
    start = min(i, j)
    return ss[start:start + n]


def primitive_period(word) -> int:
    """Length of the smallest period of the word under cyclic repetition."""
    w = tuple(word)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and all(w[t] == w[t % p] for t in range(n)):
            return p
    return n


def _int_matrix_power_sum(adjacency: np.ndarray, n: int) -> int:
    """Sum of all entries of adjacency^n, in exact integer arithmetic."""
    return int(np.sum(_int_matrix_power(adjacency, n)))


def _int_matrix_power(adjacency: np.ndarray, n: int):
    a = [[int(x) for x in row] for row in adjacency]
    size = len(a)
    result = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    base = a
    e = n
    while e > 0:
        if e & 1:
            result = _int_matmul(result, base)
        base = _int_matmul(base, base)
        e >>= 1
    return result


def _int_matmul(a, b):
    size = len(a)
    return [
        [sum(a[i][k] * b[k][j] for k in range(size)) for j in range(size)]
        for i in range(size)
    ]


def count_admissible_words(sft: SubshiftOfFiniteType, n: int) -> int:
    """Number of admissible words of length n (sum of entries of A^(n-1))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _int_matrix_power_sum(sft.adjacency, n - 1)


def count_periodic_points(sft: SubshiftOfFiniteType, n: int) -> int:
    """Number of points fixed by the n-th shift power (trace of A^n)."""
    power = _int_matrix_power(sft.adjacency, n)
    return sum(power[i][i] for i in range(sft.alphabet_size))


def primitivity(sft: SubshiftOfFiniteType) -> tuple[bool, int | None]:
    """Least n0 such that A^n has all entries positive for every n >= n0.

    The search is bounded by the Wielandt bound (N-1)^2 + 1; beyond it the
    matrix is not primitive and (False, None) is returned.  Once some power
    is all-positive every larger power is too (each column contains a 1), so
    the first all-positive exponent is the least one.
    """
    n = sft.alphabet_size
    bound = (n - 1) ** 2 + 1
    power = np.eye(n, dtype=np.int8)
    adjacency = sft.adjacency
    for exponent in range(1, bound + 1):
        power = ((power.astype(np.int64) @ adjacency) > 0).astype(np.int8)
        if power.all():
            return True, exponent
    return False, None


def admissible_words(sft: SubshiftOfFiniteType, n: int) -> Iterator[Word]:
    """All admissible words of length n, streamed in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    adjacency = sft.adjacency
    alphabet = range(sft.alphabet_size)
    word = [0] * n

    def extend(pos: int) -> Iterator[Word]:
        if pos == n:
            yield tuple(word)
            return
        if pos == 0:
            choices = alphabet
        else:
            prev = word[pos - 1]
            choices = (s for s in alphabet if adjacency[prev, s])
        for s in choices:
            word[pos] = s
            yield from extend(pos + 1)

    yield from extend(0)


def periodic_orbits(sft: SubshiftOfFiniteType, p_max: int) -> list[PeriodicOrbit]:
    """All periodic orbits of period <= p_max, one canonical necklace each,
    sorted by (period, necklace).

    Candidate necklaces are generated as Lyndon words (aperiodic, minimal
    rotations) by Duval's algorithm and filtered by cyclic admissibility.
    """
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    adjacency = sft.adjacency
    top = sft.alphabet_size - 1
    orbits = []
    w = [0]
    while w:
        if _cyclically_admissible(adjacency, w):
            orbits.append(PeriodicOrbit(necklace=tuple(w)))
        m = len(w)
        while len(w) < p_max:
            w.append(w[len(w) - m])
        while w and w[-1] == top:
            w.pop()
        if w:
            w[-1] += 1
    orbits.sort()
    return orbits


def _cyclically_admissible(adjacency: np.ndarray, w) -> bool:
    n = len(w)
    return all(adjacency[w[t], w[(t + 1) % n]] for t in range(n))


def specification_extension(sft: SubshiftOfFiniteType, word, j: int) -> PeriodicOrbit:
    """Embed an admissible word in a periodic orbit of period exactly
    ``len(word) + 2*n0`` whose symbol at position 0 is ``j`` and whose
    symbols at positions n0..n0+k-1 reproduce the word.

    Among all valid paddings the lexicographically least one is chosen, and
    completions whose primitive period is shorter than the prescribed length
    are skipped (the period must be exact).  Requires a primitive subshift.
    """
    is_primitive, n0 = primitivity(sft)
    if not is_primitive:
        raise NotPrimitive("specification padding requires a primitive adjacency matrix")
    w = sft.require_admissible(word)
    if not 0 <= j < sft.alphabet_size:
        raise ValueError(f"symbol {j} outside alphabet")
    k = len(w)
    total = k + 2 * n0

    adjacency = sft.adjacency
    # reach[r][a][b]: a path of exactly r transitions from a to b exists
    reach = [np.eye(sft.alphabet_size, dtype=bool)]
    for _ in range(total):
        reach.append((reach[-1].astype(np.int64) @ adjacency) > 0)

    y = [-1] * total
    y[0] = j
    for t in range(k):
        y[n0 + t] = w[t]
    free = list(range(1, n0)) + list(range(n0 + k, total))

    def target_of(pos: int) -> tuple[int, int]:
        # next fixed position after pos (cyclically) and the distance to it
        if pos < n0:
            return (w[0] if k else j), (n0 - pos) if k else (total - pos)
        return j, total - pos

    def fill(idx: int) -> PeriodicOrbit | None:
        if idx == len(free):
            if primitive_period(y) != total:
                return None
            return PeriodicOrbit(necklace=minimal_rotation(y))
        pos = free[idx]
        prev = y[pos - 1]
        goal, distance = target_of(pos)
        for s in range(sft.alphabet_size):
            if adjacency[prev, s] and reach[distance][s, goal]:
                y[pos] = s
                result = fill(idx + 1)
                if result is not None:
                    return result
                y[pos] = -1
        return None

    # With k >= 1 the wrap constraint from the last fixed symbol back to j is
    # enforced through target_of on the trailing free block; when that block
    # is empty (n0 == 0 cannot happen: n0 >= 1) nothing is left to check.
    result = fill(0)
    if result is None:
        raise NotPrimitive("no exact-period completion exists (unexpected for a primitive subshift)")
    return result


def geodesic_sft_free_group(rank: int) -> SubshiftOfFiniteType:
    """Subshift of reduced bi-infinite words in the free group of the given
    rank: 2*rank symbols, where symbol 2t is the t-th generator and 2t+1 its
    inverse, and a transition f -> g is allowed iff g is not the inverse of f.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    n = 2 * rank
    adjacency = np.ones((n, n), dtype=np.int8)
    for f in range(n):
        adjacency[f, f ^ 1] = 0
    return SubshiftOfFiniteType(alphabet_size=n, adjacency=adjacency)


def free_group_symbol_inverse(symbol: int) -> int:
    """Inverse symbol under the encoding of :func:`geodesic_sft_free_group`."""
    return symbol ^ 1

"""Exact sparse linear algebra over prime fields and the rationals.

Rank, kernel and column-space membership never touch floating point.  Over
F_p the elimination runs on dense int64 arrays when the block is small and
on a Markowitz-pivoted sparse representation otherwise.  Over the rationals
two policies exist: fraction-free integer elimination (certified, slower)
and max-rank over a seeded set of random word-sized primes (a certified
lower bound that equals the rational rank unless every sampled prime is
bad).  Smith normal form is available behind a size guard for locating the
characteristics where ranks can jump.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# Dense mod-p elimination below this many cells, sparse Markowitz above.
DENSE_CELL_LIMIT = 1 << 22
# Smith normal form refuses matrices above this many cells.
SNF_CELL_GUARD = 250_000
# Fraction-free elimination aborts when a pivot outgrows this bit length.
EXACT_PIVOT_BIT_GUARD = 100_000

# Random primes are drawn from [2^29, 2^30) so products of two reduced
# values stay far below the int64 limit during vectorized elimination.
_PRIME_LOW = 1 << 29
_PRIME_HIGH = 1 << 30

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class UnsupportedPolicyError(ValueError):
    """Operation not available under the requested rational policy."""


class SizeGuardError(RuntimeError):
    """Input exceeds a configured size guard; the message names the flag."""


class ExactEliminationError(OverflowError):
    """Fraction-free elimination outgrew the entry-size guard."""


def is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin, valid far beyond word size."""
    if m < 2:
        return False
    for p in _MR_BASES:
        if m % p == 0:
            return m == p
    d = m - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def multiprime_primes(seed: int, k: int) -> tuple[int, ...]:
    """The first k distinct random word-sized primes drawn from seed.

    Extending k keeps the earlier primes, so escalation reuses prior work.
    """
    rng = random.Random(seed)
    primes: list[int] = []
    while len(primes) < k:
        cand = rng.randrange(_PRIME_LOW, _PRIME_HIGH) | 1
        while not is_prime(cand):
            cand += 2
        if cand < _PRIME_HIGH and cand not in primes:
            primes.append(cand)
    return tuple(primes)


@dataclass(frozen=True)
class FieldSpec:
    """Coefficient field: F_p, or the rationals under a rank policy."""

    kind: str  # "prime" | "rational"
    p: int = 0
    policy: str = "multiprime"  # rational only: "multiprime" | "fraction_free"
    num_primes: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind == "prime":
            if self.p >= _PRIME_HIGH * 2 or not is_prime(self.p):
                raise ValueError(f"p={self.p} is not a word-sized prime")
        elif self.kind == "rational":
            if self.policy not in ("multiprime", "fraction_free"):
                raise ValueError(f"unknown rational policy {self.policy!r}")
            if self.policy == "multiprime" and self.num_primes < 1:
                raise ValueError("need at least one prime")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @staticmethod
    def prime(p: int) -> "FieldSpec":
        return FieldSpec(kind="prime", p=p)

    @staticmethod
    def rational(policy: str = "multiprime", num_primes: int = 2, seed: int = 0) -> "FieldSpec":
        return FieldSpec(kind="rational", policy=policy, num_primes=num_primes, seed=seed)

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "prime" else 0

    @property
    def certified(self) -> bool:
        """Whether ranks and memberships under this spec are exact proofs."""
        return self.kind == "prime" or self.policy == "fraction_free"

    def describe(self) -> str:
        if self.kind == "prime":
            return f"prime({self.p})"
        if self.policy == "fraction_free":
            return "fraction_free"
        return f"multiprime(k={self.num_primes}, seed={self.seed})"


@dataclass
class SparseIntMatrix:
    """Integer matrix in triplet form; at most one triplet per cell."""

    nrows: int
    ncols: int
    triplets: list[tuple[int, int, int]]
    dense_threshold: int = DENSE_CELL_LIMIT

    @classmethod
    def from_triplets(
        cls, nrows: int, ncols: int, triplets: Iterable[tuple[int, int, int]]
    ) -> "SparseIntMatrix":
        """Merge duplicate cells and drop zeros."""
        acc: dict[tuple[int, int], int] = {}
        for r, c, v in triplets:
            if not (0 <= r < nrows and 0 <= c < ncols):
                raise ValueError(f"triplet ({r},{c}) outside {nrows}x{ncols}")
            acc[r, c] = acc.get((r, c), 0) + v
        merged = sorted((r, c, v) for (r, c), v in acc.items() if v != 0)
        return cls(nrows, ncols, merged)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "SparseIntMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if nrows else 0
        trips = [
            (i, j, int(v))
            for i, row in enumerate(rows)
            for j, v in enumerate(row)
            if v
        ]
        return cls(nrows, ncols, trips)

    @property
    def cells(self) -> int:
        return self.nrows * self.ncols

    def to_dense(self) -> list[list[int]]:
        A = [[0] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.triplets:
            A[r][c] = v
        return A

    def to_numpy_mod(self, p: int) -> np.ndarray:
        A = np.zeros((self.nrows, self.ncols), dtype=np.int64)
        for r, c, v in self.triplets:
            A[r, c] = v % p
        return A

    def columns(self) -> list[list[int]]:
        cols = [[0] * self.nrows for _ in range(self.ncols)]
        for r, c, v in self.triplets:
            cols[c][r] = v
        return cols

    def augmented(self, b: Sequence[int]) -> "SparseIntMatrix":
        if len(b) != self.nrows:
            raise ValueError(f"vector length {len(b)} != nrows {self.nrows}")
        trips = list(self.triplets) + [
            (i, self.ncols, int(v)) for i, v in enumerate(b) if v
        ]
        return SparseIntMatrix(self.nrows, self.ncols + 1, trips, self.dense_threshold)


# ---------------------------------------------------------------------------
# rank


def rank(m: SparseIntMatrix, f: FieldSpec) -> int:
    """Exact rank over F_p; over the rationals, exact (fraction-free) or the
    max over the policy's sampled primes (certified lower bound)."""
    if f.kind == "prime":
        return rank_mod_p(m, f.p)
    if f.policy == "fraction_free":
        return rank_fraction_free(m)
    r, _, _ = rank_multiprime(m, f)
    return r


def rank_mod_p(m: SparseIntMatrix, p: int) -> int:
    if not m.triplets or m.nrows == 0 or m.ncols == 0:
        return 0
    if m.cells <= m.dense_threshold:
        return _rank_dense_mod_p(m.to_numpy_mod(p), p)
    return _rank_sparse_mod_p(m, p)


def rank_multiprime(m: SparseIntMatrix, f: FieldSpec) -> tuple[int, dict[int, int], bool]:
    """(max rank, per-prime ranks, agreement flag); escalates by one prime
    when the initial set disagrees."""
    primes = list(multiprime_primes(f.seed, f.num_primes))
    ranks = {p: rank_mod_p(m, p) for p in primes}
    if len(set(ranks.values())) > 1:
        extra = multiprime_primes(f.seed, f.num_primes + 1)[-1]
        ranks[extra] = rank_mod_p(m, extra)
    values = set(ranks.values())
    return max(values), ranks, len(values) == 1


def _rank_dense_mod_p(A: np.ndarray, p: int) -> int:
    nr, nc = A.shape
    r = 0
    for col in range(nc):
        nz = np.flatnonzero(A[r:, col])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, col]), -1, p)
        A[r] = A[r] * inv % p
        below = r + 1 + np.flatnonzero(A[r + 1 :, col])
        if below.size:
            A[below] = (A[below] - np.outer(A[below, col], A[r])) % p
        r += 1
        if r == nr:
            break
    return r


def _rank_sparse_mod_p(m: SparseIntMatrix, p: int) -> int:
    rows: dict[int, dict[int, int]] = {}
    for r, c, v in m.triplets:
        v %= p
        if v:
            rows.setdefault(r, {})[c] = v
    col_rows: dict[int, set[int]] = {}
    for r, row in rows.items():
        for c in row:
            col_rows.setdefault(c, set()).add(r)

    rank_ = 0
    while rows:
        # Markowitz: minimize fill estimate (nnz(row)-1)*(nnz(col)-1),
        # deterministic tie-break on indices.
        best = None
        for ri in sorted(rows):
            rlen = len(rows[ri]) - 1
            for cj in sorted(rows[ri]):
                cost = rlen * (len(col_rows[cj]) - 1)
                if best is None or cost < best[0]:
                    best = (cost, ri, cj)
            if best is not None and best[0] == 0 and len(rows[ri]) == 1:
                break
        _, ri, cj = best
        piv_row = rows.pop(ri)
        inv = pow(piv_row[cj], -1, p)
        for c in piv_row:
            col_rows[c].discard(ri)
        for ri2 in sorted(col_rows[cj]):
            row2 = rows[ri2]
            f = row2[cj] * inv % p
            for c, v in piv_row.items():
                nv = (row2.get(c, 0) - f * v) % p
                if nv:
                    row2[c] = nv
                    col_rows[c].add(ri2)
                else:
                    row2.pop(c, None)
                    col_rows[c].discard(ri2)
            if not row2:
                del rows[ri2]
        rank_ += 1
    return rank_


def rank_fraction_free(m: SparseIntMatrix, bit_guard: int = EXACT_PIVOT_BIT_GUARD) -> int:
    """Exact rational rank via Bareiss one-step fraction-free elimination."""
    if not m.triplets or m.nrows == 0 or m.ncols == 0:
        return 0
    A = m.to_dense()
    nr, nc = m.nrows, m.ncols
    r = 0
    prev = 1
    for col in range(nc):
        piv = None
        for i in range(r, nr):
            v = A[i][col]
            if v and (piv is None or abs(v) < abs(A[piv][col])):
                piv = i
        if piv is None:
            continue
        if piv != r:
            A[r], A[piv] = A[piv], A[r]
        pivot = A[r][col]
        if abs(pivot).bit_length() > bit_guard:
            raise ExactEliminationError(
                "fraction-free pivot exceeded the entry-size guard; "
                "retry with the multiprime policy or a smaller block"
            )
        row_r = A[r]
        for i in range(r + 1, nr):
            row_i = A[i]
            aic = row_i[col]
            for j in range(col + 1, nc):
                num = pivot * row_i[j] - aic * row_r[j]
                q, rem = divmod(num, prev)
                if rem:
                    raise ArithmeticError("fraction-free division was inexact")
                row_i[j] = q
            row_i[col] = 0
        prev = pivot
        r += 1
        if r == nr:
            break
    return r


# ---------------------------------------------------------------------------
# kernels


def kernel_basis(m: SparseIntMatrix, f: FieldSpec) -> list[list[int]]:
    """Vectors spanning the null space; count is ncols - rank.

    Over F_p the entries are reduced residues; over the rationals
    (fraction-free policy only) the vectors are primitive integer vectors.
    """
    if f.kind == "rational" and f.policy == "multiprime":
        raise UnsupportedPolicyError(
            "multiprime rank sampling cannot certify a kernel basis; "
            "use fraction_free or a prime field"
        )
    if m.ncols == 0:
        return []
    if f.kind == "prime":
        return _kernel_mod_p(m, f.p)
    return _kernel_rational(m)


def _kernel_mod_p(m: SparseIntMatrix, p: int) -> list[list[int]]:
    A = m.to_numpy_mod(p)
    nr, nc = A.shape
    pivots: list[tuple[int, int]] = []  # (row, col)
    r = 0
    for col in range(nc):
        if r < nr:
            nz = np.flatnonzero(A[r:, col])
        else:
            nz = np.array([], dtype=np.int64)
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, col]), -1, p)
        A[r] = A[r] * inv % p
        others = np.flatnonzero(A[:, col])
        others = others[others != r]
        if others.size:
            A[others] = (A[others] - np.outer(A[others, col], A[r])) % p
        pivots.append((r, col))
        r += 1
    pivot_cols = {c for _, c in pivots}
    basis: list[list[int]] = []
    for free in range(nc):
        if free in pivot_cols:
            continue
        v = [0] * nc
        v[free] = 1
        for row, col in pivots:
            v[col] = int(-A[row, free]) % p
        basis.append(v)
    return basis


def _kernel_rational(m: SparseIntMatrix) -> list[list[int]]:
    A = [[Fraction(v) for v in row] for row in m.to_dense()]
    nr, nc = m.nrows, m.ncols
    pivots: list[tuple[int, int]] = []
    r = 0
    for col in range(nc):
        piv = next((i for i in range(r, nr) if A[i][col]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][col]
        A[r] = [x * inv for x in A[r]]
        for i in range(nr):
            if i != r and A[i][col]:
                f_ = A[i][col]
                A[i] = [x - f_ * y for x, y in zip(A[i], A[r])]
        pivots.append((r, col))
        r += 1
    pivot_cols = {c for _, c in pivots}
    basis: list[list[int]] = []
    for free in range(nc):
        if free in pivot_cols:
            continue
        v = [Fraction(0)] * nc
        v[free] = Fraction(1)
        for row, col in pivots:
            v[col] = -A[row][free]
        scale = math.lcm(*(x.denominator for x in v))
        ints = [int(x * scale) for x in v]
        g = math.gcd(*ints)
        basis.append([x // g for x in ints])
    return basis


# ---------------------------------------------------------------------------
# spans and membership


class VectorSpan:
    """Incrementally grown span of integer vectors with exact membership.

    Over F_p the reduction runs on int64 arrays.  Over the rationals
    (fraction-free) rows are primitive integer vectors and incoming vectors
    are reduced by cross-multiplication, so no Fraction arithmetic occurs.
    Under the multiprime policy one span per sampled prime is maintained:
    rank is the max and membership the conjunction, a flagged heuristic.
    """

    def __init__(self, length: int, f: FieldSpec):
        self.length = length
        self.field = f
        if f.kind == "rational" and f.policy == "multiprime":
            self._subs = [
                VectorSpan(length, FieldSpec.prime(p))
                for p in multiprime_primes(f.seed, f.num_primes)
            ]
        else:
            self._subs = None
            self._rows: list[tuple[int, object]] = []  # (pivot, row) sorted by pivot

    @property
    def rank(self) -> int:
        if self._subs is not None:
            return max(s.rank for s in self._subs)
        return len(self._rows)

    def add(self, vec: Sequence[int]) -> bool:
        """Insert vec; True when the span grew."""
        if self._subs is not None:
            return any([s.add(vec) for s in self._subs])
        reduced = self._reduce(vec)
        piv = next((i for i, v in enumerate(reduced) if v), None)
        if piv is None:
            return False
        if self.field.kind == "prime":
            p = self.field.p
            inv = pow(int(reduced[piv]), -1, p)
            reduced = reduced * inv % p
        else:
            g = 0
            for v in reduced:
                g = math.gcd(g, v)
            if reduced[piv] < 0:
                g = -g
            reduced = [v // g for v in reduced]
        self._rows.append((piv, reduced))
        self._rows.sort(key=lambda pr: pr[0])
        return True

    def contains(self, vec: Sequence[int]) -> bool:
        if self._subs is not None:
            return all(s.contains(vec) for s in self._subs)
        reduced = self._reduce(vec)
        if self.field.kind == "prime":
            return not np.any(reduced)
        return not any(reduced)

    def _reduce(self, vec: Sequence[int]):
        if self.field.kind == "prime":
            p = self.field.p
            out = np.array([int(v) % p for v in vec], dtype=np.int64)
            for piv, row in self._rows:
                v = int(out[piv])
                if v:
                    out = (out - v * row) % p
            return out
        out = [int(v) for v in vec]
        for piv, row in self._rows:
            v = out[piv]
            if v:
                rp = row[piv]
                out = [rp * x - v * y for x, y in zip(out, row)]
                g = 0
                for x in out:
                    g = math.gcd(g, x)
                if g > 1:
                    out = [x // g for x in out]
        return out


class ColumnSpace:
    """Echelonized column span of a matrix, reusable for many membership tests."""

    def __init__(self, m: SparseIntMatrix, f: FieldSpec):
        self.nrows = m.nrows
        self._span = VectorSpan(m.nrows, f)
        for col in m.columns():
            self._span.add(col)

    @property
    def rank(self) -> int:
        return self._span.rank

    def contains(self, b: Sequence[int]) -> bool:
        if len(b) != self.nrows:
            raise ValueError(f"vector length {len(b)} != nrows {self.nrows}")
        return self._span.contains(b)


def in_column_space(m: SparseIntMatrix, b: Sequence[int], f: FieldSpec) -> bool:
    """True iff appending b to the columns of m leaves the rank unchanged.

    Under the multiprime policy this tests membership modulo every sampled
    prime, a flagged heuristic; the certified policies are exact.
    """
    return ColumnSpace(m, f).contains(b)


# ---------------------------------------------------------------------------
# Smith normal form


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x, nx, y, ny, g, ng = 1, 0, 0, 1, a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def elementary_divisors(m: SparseIntMatrix, max_cells: int = SNF_CELL_GUARD) -> list[int]:
    """Nonzero Smith normal form diagonal entries, ascending.

    The rank over F_p equals the number of divisors coprime to p.  Guarded:
    refuse oversized inputs instead of grinding.
    """
    if m.cells > max_cells:
        raise SizeGuardError(
            f"matrix has {m.cells} cells, over the Smith normal form guard "
            f"{max_cells} (--snf-guard)"
        )
    A = m.to_dense()
    nr, nc = m.nrows, m.ncols

    def row_op(i1: int, i2: int, j: int) -> None:
        a, b = A[i1][j], A[i2][j]
        if b == 0:
            return
        if a == 0:
            A[i1], A[i2] = A[i2], A[i1]
            return
        if b % a == 0:
            q = -(b // a)
            A[i2] = [x + q * y for x, y in zip(A[i2], A[i1])]
            return
        x, y, g = _xgcd(a, b)
        mbg, ag = -(b // g), a // g
        A[i1], A[i2] = (
            [x * u + y * v for u, v in zip(A[i1], A[i2])],
            [mbg * u + ag * v for u, v in zip(A[i1], A[i2])],
        )

    def col_op(j1: int, j2: int, i: int) -> None:
        a, b = A[i][j1], A[i][j2]
        if b == 0:
            return
        if a == 0:
            for row in A:
                row[j1], row[j2] = row[j2], row[j1]
            return
        if b % a == 0:
            q = -(b // a)
            for row in A:
                row[j2] += q * row[j1]
            return
        x, y, g = _xgcd(a, b)
        mbg, ag = -(b // g), a // g
        for row in A:
            u, v = row[j1], row[j2]
            row[j1] = x * u + y * v
            row[j2] = mbg * u + ag * v

    diag: list[int] = []
    k = 0
    while k < min(nr, nc):
        # move a minimal-magnitude nonzero entry to the pivot slot
        best = None
        for i in range(k, nr):
            for j in range(k, nc):
                v = A[i][j]
                if v and (best is None or abs(v) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        if bi != k:
            A[k], A[bi] = A[bi], A[k]
        if bj != k:
            for row in A:
                row[k], row[bj] = row[bj], row[k]
        while True:
            for i in range(k + 1, nr):
                if A[i][k]:
                    row_op(k, i, k)
            if any(A[k][j] for j in range(k + 1, nc)):
                for j in range(k + 1, nc):
                    if A[k][j]:
                        col_op(k, j, k)
            if not any(A[i][k] for i in range(k + 1, nr)) and not any(
                A[k][j] for j in range(k + 1, nc)
            ):
                # enforce divisibility of the remaining block by the pivot
                pivot = A[k][k]
                culprit = None
                for i in range(k + 1, nr):
                    for j in range(k + 1, nc):
                        if A[i][j] % pivot:
                            culprit = i
                            break
                    if culprit is not None:
                        break
                if culprit is None:
                    break
                A[k] = [x + y for x, y in zip(A[k], A[culprit])]
        diag.append(abs(A[k][k]))
        k += 1
    return sorted(diag)

"""Homology dimensions assembled from block ranks, and everything downstream:
Betti tables of Veronese modules, the duality check, the syzygy-linearity
(Green-Lazarsfeld) index scan, Green-type degree bounds, and minimal
generator profiles of the cycle modules Z_t.

Throughout, dim H_t in internal degree d is computed multidegree by
multidegree: each orbit of multidegrees under variable permutation
contributes orbit_size * (cols - rank d_t - rank d_{t+1}) from a single
representative block.  The duality dim H_t(d) = dim H_{N-n-t}(Nc-n-d) lets
every query be served from whichever side has smaller blocks; it can be
switched off to force direct computation (the duality and vanishing suites
do exactly that).
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from . import exactla
from .combinatorics import (
    ExponentVec,
    RingParams,
    compositions,
    enumerate_monomials,
    monomial_count,
    orbit_size,
    partitions_into,
    unit_vector,
    vec_add,
    vec_sub,
)
from .complex import block_basis, differential_block, graded_dim
from .exactla import FieldSpec, SizeGuardError, SparseIntMatrix, UnsupportedPolicyError

# Generator profiles build every block kernel up to degree t(c+1); factorial
# growth in t makes large t pointless.
Z_PROFILE_T_GUARD = 4


@dataclass
class HomologyTable:
    """Map (homological degree t, internal degree d) -> dimension."""

    params: RingParams
    field: FieldSpec
    entries: dict[tuple[int, int], int]
    orbit_breakdown: dict[tuple[int, ExponentVec], int] | None = None
    computed_directly: bool = False

    def dim(self, t: int, d: int) -> int:
        return self.entries.get((t, d), 0)

    def nonzero(self) -> dict[tuple[int, int], int]:
        return {key: v for key, v in self.entries.items() if v}


@dataclass
class BettiTable:
    """Graded Betti numbers of the Veronese module V(c,k); entry (i,j) is
    the homology dimension in internal degree j*c + k, never recomputed
    independently."""

    params: RingParams
    k: int
    field: FieldSpec
    entries: dict[tuple[int, int], int]

    def beta(self, i: int, j: int) -> int:
        return self.entries.get((i, j), 0)

    def max_degrees(self) -> dict[int, int | None]:
        """Per column i, the largest j with a nonzero entry (t_i)."""
        out: dict[int, int | None] = {}
        for (i, j), v in self.entries.items():
            if v:
                cur = out.get(i)
                out[i] = j if cur is None else max(cur, j)
            else:
                out.setdefault(i, None)
        return out


def duality_partner(params: RingParams, i: int, j: int) -> tuple[int, int]:
    """Mirror position of (homological degree i, internal degree j)."""
    return params.N - params.n - i, params.N * params.c - params.n - j


class HomologyEngine:
    """Shared context for a run: ring, field, cache, and reduction options."""

    def __init__(
        self,
        params: RingParams,
        field: FieldSpec,
        cache=None,
        use_orbits: bool = True,
        use_duality: bool = True,
        threads: int = 1,
    ):
        self.params = params
        self.field = field
        self.cache = cache
        self.use_orbits = use_orbits
        self.use_duality = use_duality
        self.threads = max(1, threads)
        self.stats = {"eliminations": 0, "cache_hits": 0}
        self._lock = threading.Lock()

    # -- block level --------------------------------------------------------

    def _matrix(self, t: int, alpha: ExponentVec) -> SparseIntMatrix:
        blk = differential_block(self.params, t, alpha)
        return SparseIntMatrix(blk.nrows, blk.ncols, blk.entries)

    def _cache_get(self, t: int, alpha: ExponentVec, p: int) -> int | None:
        if self.cache is None:
            return None
        rep = tuple(sorted(alpha, reverse=True))
        got = self.cache.get(self.params.n, self.params.c, t, rep, p)
        if got is not None:
            with self._lock:
                self.stats["cache_hits"] += 1
        return got

    def _cache_put(self, t: int, alpha: ExponentVec, p: int, r: int) -> None:
        if self.cache is not None:
            rep = tuple(sorted(alpha, reverse=True))
            self.cache.put(self.params.n, self.params.c, t, rep, p, r)

    def _rank_mod_p(
        self, t: int, alpha: ExponentVec, p: int, matrix: Callable[[], SparseIntMatrix]
    ) -> int:
        got = self._cache_get(t, alpha, p)
        if got is not None:
            return got
        r = exactla.rank_mod_p(matrix(), p)
        with self._lock:
            self.stats["eliminations"] += 1
        self._cache_put(t, alpha, p, r)
        return r

    def block_rank(self, t: int, alpha: ExponentVec) -> int:
        """Rank of the t-th differential block at alpha over the engine field.

        Results are cached per prime; a certified rational rank is stored
        under p=0 (fraction-free runs, or agreement of three or more primes).
        """
        if t < 1 or t > self.params.N:
            return 0
        matrix_cache: list[SparseIntMatrix | None] = [None]

        def matrix() -> SparseIntMatrix:
            if matrix_cache[0] is None:
                matrix_cache[0] = self._matrix(t, alpha)
            return matrix_cache[0]

        f = self.field
        if f.kind == "prime":
            return self._rank_mod_p(t, alpha, f.p, matrix)
        if f.policy == "fraction_free":
            got = self._cache_get(t, alpha, 0)
            if got is not None:
                return got
            r = exactla.rank_fraction_free(matrix())
            with self._lock:
                self.stats["eliminations"] += 1
            self._cache_put(t, alpha, 0, r)
            return r
        # multiprime: max over the seeded prime set, one escalation step on
        # disagreement
        got = self._cache_get(t, alpha, 0)
        if got is not None:
            return got
        primes = list(exactla.multiprime_primes(f.seed, f.num_primes))
        ranks = [self._rank_mod_p(t, alpha, p, matrix) for p in primes]
        if len(set(ranks)) > 1:
            extra = exactla.multiprime_primes(f.seed, f.num_primes + 1)[-1]
            primes.append(extra)
            ranks.append(self._rank_mod_p(t, alpha, extra, matrix))
        best = max(ranks)
        if len(ranks) >= 3 and len(set(ranks)) == 1:
            self._cache_put(t, alpha, 0, best)
        return best

    def block_dim(self, t: int, alpha: ExponentVec) -> int:
        """Homology dimension of the single multidegree-alpha block."""
        cols = len(block_basis(self.params, t, alpha))
        if cols == 0:
            return 0
        dim = cols - self.block_rank(t, alpha) - self.block_rank(t + 1, alpha)
        if dim < 0:
            raise ArithmeticError(
                f"negative block dimension at t={t}, alpha={alpha}; "
                f"rank inconsistency over {self.field.describe()}"
            )
        return dim

    # -- degree level --------------------------------------------------------

    def estimated_cost(self, t: int, d: int) -> int:
        """Work proxy for computing dim H_t in degree d directly."""
        return graded_dim(self.params, t, d) + graded_dim(self.params, t + 1, d)

    def homology_dim(self, t: int, d: int, breakdown: bool = False):
        """dim H_t in internal degree d; with breakdown=True also a map
        orbit representative -> contribution (forces direct computation)."""
        if (
            self.use_duality
            and not breakdown
            and 0 < t <= self.params.N - self.params.n  # t = 0 has a closed form
        ):
            td, dd = duality_partner(self.params, t, d)
            if self.estimated_cost(td, dd) < self.estimated_cost(t, d):
                return self._dim_direct(td, dd, False)
        return self._dim_direct(t, d, breakdown)

    def homology_dim_direct(self, t: int, d: int, breakdown: bool = False):
        """dim H_t in degree d without the duality shortcut."""
        return self._dim_direct(t, d, breakdown)

    def _dim_direct(self, t: int, d: int, breakdown: bool):
        params = self.params
        zero = (0, {}) if breakdown else 0
        if t < 0 or d < t * params.c:
            return zero
        if t > params.N - params.n:
            # depth sensitivity of the complex over the polynomial ring
            return zero
        if self.use_duality and d > params.N * params.c - params.n:
            return zero
        if t == 0:
            # H_0 is the quotient by the degree-c power: every monomial of
            # degree >= c is divisible by one of the generators
            dim = monomial_count(params.n, d) if d < params.c else 0
            if not breakdown:
                return dim
            if dim == 0:
                return 0, {}
            parts = {
                rep: orbit_size(rep) for rep in partitions_into(d, params.n)
            }
            return dim, parts

        if self.use_orbits:
            jobs = [(rep, orbit_size(rep)) for rep in partitions_into(d, params.n)]
        else:
            jobs = [(alpha, 1) for alpha in compositions(params.n, d)]

        def work(job: tuple[ExponentVec, int]) -> tuple[ExponentVec, int]:
            alpha, weight = job
            return alpha, weight * self.block_dim(t, alpha)

        if self.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(work, jobs))
        else:
            results = [work(job) for job in jobs]

        total = 0
        parts: dict[ExponentVec, int] = {}
        for alpha, contribution in sorted(results):
            total += contribution
            if contribution:
                rep = tuple(sorted(alpha, reverse=True))
                parts[rep] = parts.get(rep, 0) + contribution
        if breakdown:
            return total, parts
        return total

    def homology_table(
        self, t_max: int, d_max: int, breakdown: bool = False
    ) -> HomologyTable:
        """All dims for t <= t_max and t*c <= d <= d_max."""
        entries: dict[tuple[int, int], int] = {}
        orbits: dict[tuple[int, ExponentVec], int] | None = {} if breakdown else None
        for t in range(t_max + 1):
            for d in range(t * self.params.c, d_max + 1):
                if breakdown:
                    dim, parts = self.homology_dim(t, d, breakdown=True)
                    for rep, v in parts.items():
                        orbits[(t, rep)] = v
                else:
                    dim = self.homology_dim(t, d)
                entries[(t, d)] = dim
        return HomologyTable(
            self.params,
            self.field,
            entries,
            orbit_breakdown=orbits,
            computed_directly=not self.use_duality,
        )

    # -- Betti tables ---------------------------------------------------------

    def betti(self, k: int, i: int, j: int) -> int:
        """beta_{i,j} of the Veronese module V(c,k)."""
        if not 0 <= k < self.params.c:
            raise ValueError(f"need 0 <= k < c, got k={k}")
        return self.homology_dim(i, j * self.params.c + k)

    def betti_window(self, k: int, i: int) -> range:
        """Structurally feasible column degrees j for beta_{i,.}: the degree
        must reach i*c and stay within the dual window."""
        c, structural_top = self.params.c, self.params.N * self.params.c - self.params.n
        j_lo = max(0, -((k - i * c) // c))  # ceil((i*c - k) / c)
        j_hi = (structural_top - k) // c
        return range(j_lo, j_hi + 1)

    def betti_table(self, k: int, i_max: int) -> BettiTable:
        entries: dict[tuple[int, int], int] = {}
        for i in range(i_max + 1):
            for j in self.betti_window(k, i):
                entries[(i, j)] = self.betti(k, i, j)
        return BettiTable(self.params, k, self.field, entries)

    # -- index scan -----------------------------------------------------------

    def gl_index(self, i_max: int | None = None) -> "GLIndexResult":
        """Largest p such that beta_{i,j}(V(c,0)) = 0 for all j > i+1, i <= p.

        For each i only finitely many j need checking: nonzero entries force
        j*c < i*c + i + c (degree bound on cycle generators) and
        j*c <= N*c - n (dual window), so a clean scan is a certificate.
        """
        params = self.params
        hard_top = params.N - params.n
        i_max = hard_top if i_max is None else min(i_max, hard_top)
        for i in range(1, i_max + 1):
            degree_top = min(i * params.c + i + params.c - 1, params.N * params.c - params.n)
            j = i + 2
            while j * params.c <= degree_top:
                beta = self.betti(0, i, j)
                if beta:
                    return GLIndexResult(params, self.field, i_max, i - 1, (i, j, beta))
                j += 1
        return GLIndexResult(params, self.field, i_max, None, None)

    # -- structural checks ------------------------------------------------------

    def euler_characteristic(self, d: int) -> tuple[int, int]:
        """(alternating homology sum, alternating chain-dimension sum) at
        degree d; the two must agree."""
        params = self.params
        lhs = sum(
            (-1) ** t * self.homology_dim(t, d)
            for t in range(params.N - params.n + 1)
        )
        rhs = sum(
            (-1) ** t * graded_dim(params, t, d) for t in range(d // params.c + 1)
        )
        return lhs, rhs

    # -- Z_t generator profile ---------------------------------------------------

    def z_generator_profile(self, t: int, extra_degrees: int = 2) -> "ZGeneratorProfile":
        """Minimal generator counts of the cycle module Z_t by degree.

        In each degree d the count is dim Z_{t,d} minus the dimension of the
        image of multiplication S_1 (x) Z_{t,d-1} -> Z_{t,d}, computed per
        multidegree from kernel bases.  The scan runs through t(c+1) plus a
        margin so the absence of higher generators is observed, and tests
        whether the degree-t(c+1) layer is spanned by wedge products of the
        two-term generators of Z_1 modulo the multiplication image.
        """
        params, field = self.params, self.field
        if t == 0:
            return ZGeneratorProfile(params, 0, field, {0: 1}, 0, extra_degrees, None)
        if not field.certified:
            raise UnsupportedPolicyError(
                "generator profiles need a certified field "
                "(prime or fraction_free), not multiprime sampling"
            )
        if t > Z_PROFILE_T_GUARD:
            raise SizeGuardError(
                f"generator profile guarded to t <= {Z_PROFILE_T_GUARD} (--zgen-guard)"
            )
        n, c = params.n, params.c
        top = t * (c + 1)
        counts: dict[int, int] = {}
        top_spanned = True
        prev_kernels: dict[ExponentVec, tuple[list, list]] = {}
        for d in range(t * c, top + extra_degrees + 1):
            cur_kernels: dict[ExponentVec, tuple[list, list]] = {}
            new_gens = 0
            for alpha in compositions(n, d):
                basis = block_basis(params, t, alpha)
                if not basis:
                    continue
                mat = self._matrix(t, alpha)
                kern = exactla.kernel_basis(mat, field)
                index = {e.gens: pos for pos, e in enumerate(basis)}
                cur_kernels[alpha] = (basis, kern)
                if not kern:
                    continue
                span = exactla.VectorSpan(len(basis), field)
                for var in range(n):
                    if alpha[var] == 0:
                        continue
                    beta = tuple(
                        a - (1 if idx == var else 0) for idx, a in enumerate(alpha)
                    )
                    prev = prev_kernels.get(beta)
                    if prev is None:
                        continue
                    b_basis, b_kern = prev
                    for vec in b_kern:
                        mapped = [0] * len(basis)
                        for pos, value in enumerate(vec):
                            if value:
                                mapped[index[b_basis[pos].gens]] = value
                        span.add(mapped)
                new_gens += len(kern) - span.rank
                if d == top:
                    for wedge_vec in self._z1_wedge_vectors(t, alpha, index, len(basis)):
                        span.add(wedge_vec)
                    if not all(span.contains(v) for v in kern):
                        top_spanned = False
            counts[d] = new_gens
            prev_kernels = cur_kernels
        return ZGeneratorProfile(
            params, t, field, counts, top, extra_degrees, top_spanned
        )

    def _z1_wedge_vectors(
        self, t: int, alpha: ExponentVec, index: dict, length: int
    ) -> Iterable[list[int]]:
        """Coordinate vectors of t-fold wedge products of the two-term Z_1
        generators whose multidegrees sum to alpha."""
        from . import cycles

        params = self.params
        gens = []
        for b in enumerate_monomials(params, params.c - 1):
            for i in range(params.n):
                for j in range(i + 1, params.n):
                    degree = vec_add(b, vec_add(unit_vector(params.n, i), unit_vector(params.n, j)))
                    if all(x <= a for x, a in zip(degree, alpha)):
                        gens.append((degree, cycles.z1_generator(params, b, i, j)))

        out: list[list[int]] = []

        def rec(start: int, residual: ExponentVec, chosen: list) -> None:
            if len(chosen) == t:
                if any(residual):
                    return
                w = chosen[0]
                for z in chosen[1:]:
                    w = cycles.wedge(w, z)
                if w.is_zero():
                    return
                vec = [0] * length
                for elem, coeff in w.terms.items():
                    vec[index[elem.gens]] = coeff
                out.append(vec)
                return
            for pos in range(start, len(gens)):
                degree, z = gens[pos]
                if all(x <= r for x, r in zip(degree, residual)):
                    chosen.append(z)
                    rec(pos + 1, vec_sub(residual, degree), chosen)
                    chosen.pop()

        rec(0, tuple(alpha), [])
        return out


@dataclass
class GLIndexResult:
    """Outcome of an index scan: the exact value, or a certified lower bound
    when no linearity failure occurs up to i_max."""

    params: RingParams
    field: FieldSpec
    i_max: int
    value: int | None
    witness: tuple[int, int, int] | None  # (i, j, beta) of the first failure

    def __str__(self) -> str:
        if self.value is None:
            return f"ind >= {self.i_max} (certified up to i_max = {self.i_max})"
        i, j, beta = self.witness
        return f"ind = {self.value} (N_{self.value} holds; N_{i} fails: beta[{i},{j}] = {beta})"


@dataclass
class ZGeneratorProfile:
    params: RingParams
    t: int
    field: FieldSpec
    counts: dict[int, int]
    top_degree: int
    extra_degrees: int
    top_layer_in_z1_span: bool | None  # None when t = 0

    def generator_degrees(self) -> list[int]:
        return sorted(d for d, v in self.counts.items() if v)


@dataclass
class DualityReport:
    checked: int
    direct: int
    mirrored: int
    mismatches: list[tuple[int, int, int, int]]  # (t, d, dim, partner_dim)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_duality(
    table: HomologyTable,
    engine: HomologyEngine | None = None,
    direct_cost_limit: int = 500_000,
) -> DualityReport:
    """Verify dim(t,d) == dim(partner) for every table entry.

    Partners already in a directly-computed table count as independent
    confirmations; missing partners are recomputed directly when the block
    work fits the limit, otherwise through the mirrored fast path (flagged,
    since that path restates the identity being checked).
    """
    if engine is None:
        engine = HomologyEngine(table.params, table.field)
    checked = direct = mirrored = 0
    mismatches = []
    for (t, d), dim in sorted(table.entries.items()):
        td, dd = duality_partner(table.params, t, d)
        partner = table.entries.get((td, dd)) if table.computed_directly else None
        if partner is not None:
            direct += 1
        elif (
            td <= table.params.N - table.params.n
            and engine.estimated_cost(td, dd) <= direct_cost_limit
        ):
            partner = engine.homology_dim_direct(td, dd)
            direct += 1
        else:
            partner = engine.homology_dim(td, dd)
            mirrored += 1
        checked += 1
        if partner != dim:
            mismatches.append((t, d, dim, partner))
    return DualityReport(checked, direct, mirrored, mismatches)


@dataclass
class GreenBoundViolation:
    i: int
    t_i: int
    bound: Fraction
    sharpened: bool


@dataclass
class GreenBoundReport:
    params: RingParams
    k: int
    field: FieldSpec
    columns_checked: int
    violations: list[GreenBoundViolation]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_green_bound(btable: BettiTable) -> GreenBoundReport:
    """Assert every t_i of the table satisfies t_i < 1 + i + (i-k)/c, with the
    sharper (i-k-1)/c version when the characteristic is 0 or > c+1 and
    i >= c.  A violation is a build-stopping bug, reported not raised."""
    c = btable.params.c
    char = btable.field.characteristic
    sharp_ok = char == 0 or char > c + 1
    violations: list[GreenBoundViolation] = []
    columns = 0
    for i, t_i in sorted(btable.max_degrees().items()):
        columns += 1
        if t_i is None:
            continue
        bound = 1 + i + Fraction(i - btable.k, c)
        if not t_i < bound:
            violations.append(GreenBoundViolation(i, t_i, bound, False))
        if sharp_ok and i >= c:
            sharp = 1 + i + Fraction(i - btable.k - 1, c)
            if not t_i < sharp:
                violations.append(GreenBoundViolation(i, t_i, sharp, True))
    return GreenBoundReport(btable.params, btable.k, btable.field, columns, violations)


@dataclass
class VanishingReport:
    params: RingParams
    field: FieldSpec
    checked: int
    failures: list[tuple[int, int, int]]  # (t, d, dim)
    sharp_checked: int
    sharp_failures: list[tuple[int, int, int]]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.sharp_failures


def verify_vanishing(
    params: RingParams,
    field: FieldSpec,
    margin: int | None = None,
    cache=None,
    threads: int = 1,
) -> VanishingReport:
    """Directly compute H_t(tc+j) for all t <= N-n and j >= t+c and confirm
    the zeros.  The scan covers the degrees where chains exist on both
    sides of the dual window plus a margin; beyond it the dual-degree basis
    is empty.  The sharper char-0 statement (j = t+c-1 for t >= c) is
    included when the characteristic allows."""
    engine = HomologyEngine(
        params, field, cache=cache, use_orbits=True, use_duality=False, threads=threads
    )
    margin = params.c if margin is None else margin
    structural_top = params.N * params.c - params.n
    checked = 0
    failures = []
    for t in range(params.N - params.n + 1):
        j = t + params.c
        while t * params.c + j <= structural_top + margin:
            d = t * params.c + j
            dim = engine.homology_dim(t, d)
            checked += 1
            if dim:
                failures.append((t, d, dim))
            j += 1
    sharp_checked = 0
    sharp_failures = []
    if field.characteristic == 0 or field.characteristic > params.c + 1:
        for t in range(params.c, params.N - params.n + 1):
            d = t * params.c + t + params.c - 1
            dim = engine.homology_dim(t, d)
            sharp_checked += 1
            if dim:
                sharp_failures.append((t, d, dim))
    return VanishingReport(params, field, checked, failures, sharp_checked, sharp_failures)


# -- functional wrappers -------------------------------------------------------


def homology_dim(params: RingParams, t: int, d: int, field: FieldSpec, **opts):
    return HomologyEngine(params, field, **opts).homology_dim(t, d)


def homology_table(
    params: RingParams, t_max: int, d_max: int, field: FieldSpec, **opts
) -> HomologyTable:
    return HomologyEngine(params, field, **opts).homology_table(t_max, d_max)


def betti(params: RingParams, k: int, i: int, j: int, field: FieldSpec, **opts) -> int:
    return HomologyEngine(params, field, **opts).betti(k, i, j)


def betti_table(
    params: RingParams, k: int, i_max: int, field: FieldSpec, **opts
) -> BettiTable:
    return HomologyEngine(params, field, **opts).betti_table(k, i_max)


def gl_index(
    params: RingParams, field: FieldSpec, i_max: int | None = None, **opts
) -> GLIndexResult:
    return HomologyEngine(params, field, **opts).gl_index(i_max)


def z_generator_profile(
    params: RingParams, t: int, field: FieldSpec, **opts
) -> ZGeneratorProfile:
    return HomologyEngine(params, field, **opts).z_generator_profile(t)

"""Conditional row resampling and anti-concentration experiments.

Given a matrix M in M(n, d), a row index u, and a random subset I0 of J of
cardinality floor(n^{1/4}), the resampling distribution X re-draws row u from
the set of matrices that agree with M outside the rows I0 union {u} (all row
and column sums stay d).  Tiny instances are sampled exactly by enumeration;
larger ones run a switch chain restricted to the freed rows and are labeled
approximate.

Also here: the i.i.d.-index coupling of the resampled row, small-ball
frequency measurements of <y, X> against the anti-concentration ceiling
(8|Jt|/n)^d + 144 delta + n^{-1/10}, distance-to-prefix-span experiments for
shifted adjacency rows, and the deterministic distances-to-singular-value
implication s_{m - floor(2 L delta m)} >= rho sqrt(L delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .digraph import (
    RESTRICTED_MAX_FREE_CELLS,
    RegularDigraph,
    enumerate_restricted,
    sample,
)
from .hermitization import bz_matrix
from .linalg import distance_to_span, row_distances, singular_values
from .normals import GAMMA, level_count
from .rng import generator, trial_generator


def resample_subset_size(n: int) -> int:
    """Cardinality of the random resampling subset: floor(n^{1/4})."""
    return int(math.floor(n ** 0.25))


def sample_I(J, n, seed) -> np.ndarray:
    """Uniform random floor(n^{1/4})-subset of J, sorted ascending.

    The ambient dimension n sets the subset size and is passed explicitly
    (it is not recoverable from J).
    """
    J = np.asarray(sorted(set(int(j) for j in J)), dtype=np.int64)
    k = resample_subset_size(n)
    if J.size < k:
        raise ValueError(f"|J| = {J.size} below the subset size {k}")
    rng = generator(seed)
    return np.sort(rng.choice(J, size=k, replace=False))


def support_union(M: RegularDigraph, T) -> np.ndarray:
    """S = union of supp R_i(M) over i in T, sorted ascending."""
    T = sorted(set(int(t) for t in T))
    if not T:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.nonzero(np.asarray(M.adjacency)[T])[1])


def supports_disjoint(M: RegularDigraph, T) -> bool:
    """Whether the rows indexed by T have pairwise disjoint supports."""
    T = sorted(set(int(t) for t in T))
    return support_union(M, T).size == M.d * len(T)


def disjointness_frequency(M: RegularDigraph, J, u, trials, master_seed) -> float:
    """Empirical frequency that the rows I0 union {u} (I0 resampled each
    trial) have pairwise disjoint supports."""
    u = int(u)
    if u in set(int(j) for j in J):
        raise ValueError("u must lie outside J")
    hits = 0
    for t in range(trials):
        I0 = sample_I(J, M.n, trial_generator(master_seed, t))
        if supports_disjoint(M, list(I0) + [u]):
            hits += 1
    return hits / trials


# ---------------------------------------------------------------------------
# The resampling distribution X
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResamplerSpec:
    """Inputs of the row-resampling distribution.

    I0 = None means the subset is drawn fresh on every sample; otherwise it
    is a fixed floor(n^{1/4})-subset of J and sampling conditions on it.
    lemma_scale reports (never enforces) the asymptotic-regime guards
    |J| >= n/2 and d <= n^{1/8}.
    """

    M: RegularDigraph
    J: tuple
    u: int
    I0: tuple = None

    def __post_init__(self):
        J = tuple(sorted(set(int(j) for j in self.J)))
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "u", int(self.u))
        n = self.M.n
        if not all(0 <= j < n for j in J):
            raise ValueError("J contains out-of-range indices")
        if not 0 <= self.u < n:
            raise ValueError(f"u = {self.u} out of range")
        if self.u in J:
            raise ValueError("u must lie outside J")
        if self.I0 is not None:
            I0 = tuple(sorted(set(int(i) for i in self.I0)))
            object.__setattr__(self, "I0", I0)
            if not set(I0) <= set(J):
                raise ValueError("I0 must be a subset of J")
            if len(I0) != resample_subset_size(n):
                raise ValueError(
                    f"|I0| = {len(I0)} != floor(n^(1/4)) = {resample_subset_size(n)}")

    @property
    def lemma_scale(self) -> bool:
        n = self.M.n
        return len(self.J) >= n / 2 and self.M.d <= n ** 0.125

    def freed_rows(self, I0) -> list:
        return sorted(set(I0) | {self.u})


def _switch_chain_restricted(M: RegularDigraph, rows, rng, accepted_target) -> RegularDigraph:
    """Switch chain over the matrices agreeing with M outside ``rows``.

    Proposals pick two distinct freed rows and one support slot in each and
    apply the switch when admissible — the restricted analogue of the global
    chain, symmetric, so the stationary law is uniform on the fiber.  The
    proposal budget is capped so rigid fibers (no admissible move at all,
    e.g. freed rows forced by the column sums) terminate with the start
    state, which always lies in the fiber.
    """
    g = M.copy()
    rows = np.asarray(sorted(rows), dtype=np.int64)
    if rows.size < 2:
        return g
    A = g.adjacency
    supports = {int(r): list(np.nonzero(A[r])[0]) for r in rows}
    d = g.d
    accepted = 0
    budget = max(10_000, 200 * accepted_target)
    while accepted < accepted_target and budget > 0:
        budget -= 1
        r1, r2 = rows[rng.choice(rows.size, size=2, replace=False)]
        r1, r2 = int(r1), int(r2)
        s1, s2 = int(rng.integers(d)), int(rng.integers(d))
        j1 = supports[r1][s1]
        j2 = supports[r2][s2]
        if j1 == j2 or A[r1, j2] or A[r2, j1]:
            continue
        A[r1, j1] = 0
        A[r2, j2] = 0
        A[r1, j2] = 1
        A[r2, j1] = 1
        supports[r1][s1] = j2
        supports[r2][s2] = j1
        accepted += 1
    return g


#: accepted switch moves per freed cell before the restricted chain is read out
RESTRICTED_BURNIN_FACTOR = 20


def sample_X(spec: ResamplerSpec, seed):
    """One draw of the resampled row u; returns (x, method).

    x is the 0/1 row as a uint8 vector.  method is "exact-enumeration" when
    the freed instance fits the enumeration guard (the draw then follows the
    exact conditional law) and "switch-chain" otherwise (approximate; the
    chain runs RESTRICTED_BURNIN_FACTOR accepted moves per freed cell).
    """
    rng = generator(seed)
    M, u = spec.M, spec.u
    I0 = spec.I0 if spec.I0 is not None else tuple(sample_I(spec.J, M.n, rng))
    T = spec.freed_rows(I0)
    if M.d * len(T) <= RESTRICTED_MAX_FREE_CELLS:
        fiber = enumerate_restricted(M, T)
        pick = fiber[int(rng.integers(len(fiber)))]
        return pick.adjacency[u].copy(), "exact-enumeration"
    out = _switch_chain_restricted(
        M, T, rng, accepted_target=RESTRICTED_BURNIN_FACTOR * M.d * len(T))
    return out.adjacency[u].copy(), "switch-chain"


@dataclass(frozen=True)
class SupportCheck:
    """Exact equinumerosity audit of the resampled row's support law."""

    disjoint: bool          # hypothesis: freed rows pairwise disjoint in M
    fiber_size: int         # |{M' agreeing outside the freed rows}|
    support_size: int       # |S|
    subsets_seen: int       # distinct supports realized for row u
    subsets_possible: int   # C(|S|, d)
    uniform: bool           # every d-subset of S realized equally often
    count_per_subset: int   # the common count when uniform (else 0)


def uniform_support_check(spec: ResamplerSpec) -> SupportCheck:
    """Count, for every matrix in the freed fiber, which support row u takes,
    and verify each d-subset of S appears for exactly the same integer number
    of matrices.  Exact; requires an explicit I0 and an enumerable instance.
    """
    if spec.I0 is None:
        raise ValueError("uniform_support_check needs an explicit I0")
    M, u = spec.M, spec.u
    T = spec.freed_rows(spec.I0)
    disjoint = supports_disjoint(M, T)
    S = support_union(M, T)
    fiber = enumerate_restricted(M, T)
    counts = {}
    for Mp in fiber:
        key = tuple(np.nonzero(Mp.adjacency[u])[0])
        counts[key] = counts.get(key, 0) + 1
    possible = math.comb(S.size, M.d)
    values = set(counts.values())
    uniform = len(counts) == possible and len(values) == 1
    return SupportCheck(
        disjoint=disjoint, fiber_size=len(fiber), support_size=int(S.size),
        subsets_seen=len(counts), subsets_possible=possible, uniform=uniform,
        count_per_subset=values.pop() if uniform else 0,
    )


# ---------------------------------------------------------------------------
# The i.i.d.-index coupling
# ---------------------------------------------------------------------------

def coupling_sampler(S, d, seed, *, n=None):
    """Y = sum of e_{xi_i} for xi_1..xi_d i.i.d. uniform on S.

    Returns (counts, collision): counts is the integer coordinate vector of Y
    (0/1 exactly when collision is False) and collision flags a repeated
    index.  Conditioned on no collision, supp Y is a uniform d-subset of S.
    """
    S = np.asarray(sorted(set(int(s) for s in S)), dtype=np.int64)
    if S.size < 1 or d < 1:
        raise ValueError("need a nonempty index set and d >= 1")
    if n is None:
        n = int(S.max()) + 1
    rng = generator(seed)
    xi = S[rng.integers(S.size, size=d)]
    counts = np.zeros(n, dtype=np.int64)
    np.add.at(counts, xi, 1)
    return counts, bool((counts > 1).any())


def collision_frequency(S, d, trials, master_seed) -> float:
    """Empirical collision rate of the coupling (ceiling d^2/|S|)."""
    hits = 0
    for t in range(trials):
        _, collided = coupling_sampler(S, d, trial_generator(master_seed, t))
        hits += collided
    return hits / trials


# ---------------------------------------------------------------------------
# Small-ball frequency of <y, X>
# ---------------------------------------------------------------------------

@dataclass
class SmallBallRecord:
    """Monte Carlo small-ball frequency against the proposition ceiling."""

    rho: float
    lam: complex
    delta: float
    jtilde_size: int
    n: int
    d: int
    trials: int
    empirical_freq: float
    stderr: float
    ceiling: float
    hypothesis: str          # certified | violated | undecided
    level_at_rho: int
    level_at_2rho: int
    method: str              # sampling path reported by sample_X

    def as_record(self, seed) -> dict:
        return {
            "experiment_id": "smallball",
            "params": {"rho": self.rho, "lambda": [self.lam.real, self.lam.imag],
                       "delta": self.delta, "jtilde_size": self.jtilde_size,
                       "n": self.n, "d": self.d, "trials": self.trials},
            "seed": int(seed),
            "outcome": {"empirical_freq": self.empirical_freq,
                        "stderr": self.stderr, "ceiling": self.ceiling,
                        "under_ceiling": self.empirical_freq <= self.ceiling},
            "derived_quantities": {"hypothesis": self.hypothesis,
                                   "level_at_rho": self.level_at_rho,
                                   "level_at_2rho": self.level_at_2rho,
                                   "method": self.method},
        }


def smallball_experiment(y, spec: ResamplerSpec, rho, lam, trials, master_seed, *,
                         jtilde=(), delta=None) -> SmallBallRecord:
    """Frequency of |<y, X> - lambda| <= rho/4 against the ceiling
    (8|Jt|/n)^d + 144 delta + n^{-1/10}.

    The level hypothesis — every complex disk of radius rho captures at most
    delta*n coordinates of y outside Jt — is checked with the candidate-center
    bracket: certified when even the 2*rho count fits, violated when already
    the rho count does not.  When delta is omitted it is set to the smallest
    certifiable value count_2rho/n.
    """
    y = np.asarray(y, dtype=np.complex128)
    n = spec.M.n
    if y.shape != (n,):
        raise ValueError("y must have one coordinate per column")
    jtilde = sorted(set(int(j) for j in jtilde))
    outside = np.setdiff1d(np.arange(n), np.asarray(jtilde, dtype=np.int64))
    prof = level_count(y[outside], rho) if outside.size else None
    if delta is None:
        delta = (prof.count_2rho / n) if prof is not None else 0.0
    if prof is None:
        hypothesis = "certified"
        at_rho = at_2rho = 0
    elif prof.count_2rho <= delta * n:
        hypothesis, at_rho, at_2rho = "certified", prof.count, prof.count_2rho
    elif prof.count > delta * n:
        hypothesis, at_rho, at_2rho = "violated", prof.count, prof.count_2rho
    else:
        hypothesis, at_rho, at_2rho = "undecided", prof.count, prof.count_2rho

    lam = complex(lam)
    hits = 0
    method = ""
    for t in range(trials):
        x, method = sample_X(spec, trial_generator(master_seed, t))
        if abs(y @ x - lam) <= rho / 4.0:
            hits += 1
    freq = hits / trials
    stderr = math.sqrt(max(freq * (1.0 - freq), 1.0 / trials) / trials)
    ceiling = (8.0 * len(jtilde) / n) ** spec.M.d + 144.0 * delta + n ** (-0.1)
    return SmallBallRecord(
        rho=float(rho), lam=lam, delta=float(delta), jtilde_size=len(jtilde),
        n=n, d=spec.M.d, trials=trials, empirical_freq=freq, stderr=stderr,
        ceiling=float(ceiling), hypothesis=hypothesis,
        level_at_rho=at_rho, level_at_2rho=at_2rho, method=method,
    )


# ---------------------------------------------------------------------------
# Distances of shifted rows to prefix spans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceRecord:
    """One prefix-distance measurement under a uniform row permutation."""

    i: int                  # 1-based position in the permuted order
    distance: float
    threshold: float        # exp(-C (n/(n-i))^gamma)
    violated: bool          # distance < threshold
    in_range: bool          # lemma index window (reported, not enforced)
    n: int
    d: int
    gamma: float
    C: float
    trial: int

    def as_record(self, seed) -> dict:
        return {
            "experiment_id": "row-distance",
            "params": {"n": self.n, "d": self.d, "i": self.i,
                       "gamma": self.gamma, "C": self.C, "trial": self.trial},
            "seed": int(seed),
            "outcome": {"distance": self.distance, "threshold": self.threshold,
                        "violated": self.violated},
            "derived_quantities": {"in_range": self.in_range},
        }


def _step_index_range(n, d, gamma) -> tuple:
    """Lemma index window [n - n/d^3, n - 2n/ln^{1/gamma} n] at desk scale.

    The upper subtracted term underflows to 0 for any feasible n, so the
    window's right edge is n (capped below at 0 for degenerate n).
    """
    lo = n - n / d ** 3
    if n >= 3:
        log_term = (1.0 / gamma) * math.log(math.log(n))
        sub = 2.0 * n * math.exp(-min(log_term, 745.0))
    else:
        sub = float(n)
    return lo, n - sub


def row_distance_experiment(n, d, z, i, trials, master_seed, *,
                            C=1.0, gamma=GAMMA, method="auto") -> list:
    """Distance of the i-th permuted row of B_z to the span of its
    predecessors, across independently sampled digraphs and permutations."""
    if not 1 <= i <= n:
        raise ValueError(f"row position i={i} outside [1, {n}]")
    lo, hi = _step_index_range(n, d, gamma)
    threshold = math.exp(-C * (n / (n - i)) ** gamma) if i < n else 0.0
    records = []
    for t in range(trials):
        rng = trial_generator(master_seed, t)
        g = sample(n, d, rng, method=method)
        sigma = rng.permutation(n)
        B = bz_matrix(g, z, d)
        target = B[sigma[i - 1]]
        prefix = B[sigma[: i - 1]]
        dist = distance_to_span(target, prefix) if i > 1 else float(
            np.linalg.norm(target))
        records.append(DistanceRecord(
            i=i, distance=float(dist), threshold=threshold,
            violated=bool(dist < threshold), in_range=bool(lo <= i <= hi),
            n=n, d=d, gamma=gamma, C=C, trial=t,
        ))
    return records


# ---------------------------------------------------------------------------
# Distances to intermediate singular values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImplicationVerdict:
    """Instance check of: at most L*delta*m distance violations implies
    s_k >= rho*sqrt(L*delta) with k = m - floor(2*L*delta*m)."""

    applicable: bool        # violations within allowance and window nondegenerate
    holds: bool             # the singular-value bound (vacuous if inapplicable)
    k: int
    s_k: float
    threshold: float
    violations: int
    allowance: float        # L*delta*m

    @property
    def violated_implication(self) -> bool:
        return self.applicable and not self.holds


def sv_from_distances(rho, delta, L, m, svals, *, violations=0) -> ImplicationVerdict:
    """Deterministic implication of the distance-to-singular-value step.

    The caller supplies the count of rows whose distance to the span of the
    other rows is below rho (default 0 = all distances certified >= rho).
    Integer safety: with v <= L*delta*m violations the kept-row count is
    m - v and floor(2*L*delta*m) - L*delta*m + 1 > L*delta*m/m * ... >= the
    pigeonhole count needed, so k = m - floor(2*L*delta*m) is always a valid
    (1-based) index of the conclusion.
    """
    if not (rho > 0.0 and delta > 0.0):
        raise ValueError("rho and delta must be positive")
    if not 1.0 <= L <= 1.0 / (2.0 * delta):
        raise ValueError(f"L = {L} outside [1, 1/(2 delta) = {1.0/(2.0*delta):.4g}]")
    s = np.asarray(svals, dtype=np.float64)
    if not 1 <= m <= s.size:
        raise ValueError(f"m = {m} outside [1, {s.size}]")
    allowance = L * delta * m
    k = m - int(math.floor(2.0 * L * delta * m))
    if k < 1:
        return ImplicationVerdict(applicable=False, holds=True, k=k, s_k=math.nan,
                                  threshold=rho * math.sqrt(L * delta),
                                  violations=int(violations), allowance=allowance)
    threshold = rho * math.sqrt(L * delta)
    s_k = float(s[k - 1])
    applicable = violations <= allowance
    holds = (not applicable) or bool(s_k >= threshold)
    return ImplicationVerdict(applicable=applicable, holds=holds, k=k, s_k=s_k,
                              threshold=threshold, violations=int(violations),
                              allowance=allowance)


def distance_implication_experiment(n, d, z, rho, delta, L, trials, master_seed, *,
                                    method="auto") -> list:
    """Per-instance audit of sv_from_distances on sampled digraphs.

    For each trial: sample A, form B_z, measure every row's distance to the
    span of the others (inverse-column route, with a per-row projection
    fallback when B_z is singular), count violations, and check the
    implication against the actual singular values.
    """
    verdicts = []
    for t in range(trials):
        rng = trial_generator(master_seed, t)
        g = sample(n, d, rng, method=method)
        B = bz_matrix(g, z, d)
        try:
            dists = row_distances(B)
        except ArithmeticError:
            dists = np.array([
                distance_to_span(B[i], np.delete(B, i, axis=0)) for i in range(n)])
        violations = int((dists < rho).sum())
        s = singular_values(B)
        verdicts.append(sv_from_distances(rho, delta, L, n, s, violations=violations))
    return verdicts


def default_L(delta, C=1.0) -> float:
    """The step-II aggregation default L = 1/(2 sqrt(C delta))."""
    if not delta > 0.0:
        raise ValueError("delta must be positive")
    return 1.0 / (2.0 * math.sqrt(C * delta))
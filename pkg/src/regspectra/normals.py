"""Random normals to row spans and their coordinate structure.

The standard complex Gaussian used throughout has i.i.d. coordinates
g = xi1 + i*xi2 with xi1, xi2 ~ N(0, 1/2), so E|g|^2 = 1 and
P{|g| <= t} = 1 - exp(-t^2).  A "random normal" to a subspace E spanned by
given rows is the projection of such a Gaussian onto the orthogonal
complement of E.

Also here: exact pairwise correlation parameters sigma_ij (no sampling),
the greedy strongly-correlated cluster construction, the nine-layer plane
partition into radius-rho cells, approximate level counting, and the
steep/sloping-with-many-levels structure classification of a vector's
nonincreasing modulus rearrangement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import orthonormal_rows, project_complement
from .rng import generator, trial_generator

#: structure exponent used by the classification dichotomy
GAMMA = 1.0 / 288.0

#: the nine layer anchors of the plane partition (layer order matters:
#: earlier layers carve their balls out of later ones)
PARTITION_ANCHORS = (
    (0, 0), (1, 0), (2, 0),
    (0, 1), (0, 2), (1, 1),
    (2, 1), (1, 2), (2, 2),
)


def sample_gaussian(n, seed) -> np.ndarray:
    """Standard complex Gaussian vector: coordinates xi1 + i*xi2,
    xi ~ N(0, 1/2) i.i.d., so E|g_j|^2 = 1."""
    rng = generator(seed)
    parts = rng.normal(0.0, math.sqrt(0.5), size=(int(n), 2))
    return parts[:, 0] + 1j * parts[:, 1]


def random_normal(row_basis, gauss, *, orthonormal=False) -> np.ndarray:
    """Uniform random normal to E = span(rows): the projection of the given
    standard complex Gaussian vector onto the orthogonal complement of E."""
    Q = np.atleast_2d(np.asarray(row_basis))
    g = np.asarray(gauss, dtype=np.complex128)
    if Q.shape[0] == 0:
        return g.copy()
    if g.shape != (Q.shape[1],):
        raise ValueError("Gaussian vector dimension does not match the rows")
    return project_complement(Q, g, orthonormal=orthonormal)


def order_statistics(x) -> np.ndarray:
    """Nonincreasing rearrangement of coordinate moduli: x*_1 >= x*_2 >= ..."""
    return np.sort(np.abs(np.asarray(x)))[::-1]


# ---------------------------------------------------------------------------
# Pairwise correlation structure
# ---------------------------------------------------------------------------

def complement_projector(row_basis) -> np.ndarray:
    """Hermitian projector onto span(rows)^perp as a dense matrix."""
    Q = orthonormal_rows(row_basis)
    n = Q.shape[1]
    P = np.eye(n, dtype=np.complex128)
    if Q.shape[0]:
        P -= Q.T @ Q.conj()
    return P


def pair_sigma(row_basis, i, j, *, orthonormal=False) -> float:
    """sigma_ij = ||P_perp(e_i - e_j)||_2 for the span of the given rows.

    The difference Y_i - Y_j of random-normal coordinates is a complex
    Gaussian scaled by this sigma: P{|Y_i - Y_j| > alpha} = exp(-alpha^2/sigma^2).
    Computed exactly from the projector, no sampling involved.
    """
    if i == j:
        raise ValueError("pair_sigma needs two distinct indices")
    Q = np.atleast_2d(np.asarray(row_basis, dtype=np.complex128))
    if not orthonormal:
        Q = orthonormal_rows(Q)
    n = Q.shape[1]
    v = np.zeros(n, dtype=np.complex128)
    v[i] = 1.0
    v[j] -= 1.0
    w = v - Q.T @ (Q.conj() @ v)
    return float(np.linalg.norm(w))


def sigma_squared_matrix(row_basis) -> np.ndarray:
    """All pairwise sigma_ij^2 at once via the complement projector P:
    sigma_ij^2 = P_ii + P_jj - 2 Re P_ij (P is Hermitian idempotent)."""
    P = complement_projector(row_basis)
    diag = np.real(np.diagonal(P))
    s2 = diag[:, None] + diag[None, :] - 2.0 * np.real(P)
    np.fill_diagonal(s2, 0.0)
    return np.maximum(s2, 0.0)


def strongly_correlated_threshold(alpha: float, beta: float) -> float:
    """sigma^2 threshold: (i, j) is (alpha, beta)-strongly correlated iff
    exp(-alpha^2 / sigma_ij^2) <= beta, i.e. sigma_ij^2 <= alpha^2 / ln(1/beta)."""
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    return alpha * alpha / math.log(1.0 / beta)


@dataclass
class CorrelationClusters:
    """Greedy strongly-correlated clusters: disjoint, nonincreasing sizes."""

    alpha: float
    beta: float
    clusters: list  # list of np.ndarray of indices (each sorted ascending)
    anchors: list   # anchor index of each cluster

    def sizes(self):
        return [len(c) for c in self.clusters]


def build_clusters(row_basis, alpha, beta) -> CorrelationClusters:
    """Greedy cluster sequence U_1, U_2, ... of strongly correlated pairs.

    At each step every remaining index u is a candidate anchor whose
    candidate cluster is the set of remaining j with (u, j) strongly
    correlated (u itself included; sigma_uu = 0).  The largest candidate
    cluster is taken, ties broken by the smaller anchor index (which pins
    the set, so the lexicographic tie-break on the set never fires).  Sizes
    are automatically nonincreasing since the pool only shrinks, and
    removing the first clusters and rerunning reproduces the rest.
    """
    if not 0.0 < beta <= 0.5:
        raise ValueError("beta must lie in (0, 1/2]")
    s2 = sigma_squared_matrix(row_basis)
    thr = strongly_correlated_threshold(alpha, beta)
    corr = s2 <= thr
    n = corr.shape[0]
    alive = np.ones(n, dtype=bool)
    clusters = []
    anchors = []
    while alive.any():
        counts = np.where(alive, (corr & alive[None, :]).sum(axis=1), -1)
        u = int(np.argmax(counts))  # argmax returns the smallest maximizer
        members = np.flatnonzero(corr[u] & alive)
        clusters.append(members)
        anchors.append(u)
        alive[members] = False
    return CorrelationClusters(alpha=alpha, beta=beta, clusters=clusters, anchors=anchors)


# ---------------------------------------------------------------------------
# Plane partition into radius-rho cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneCell:
    """One cell of the nine-layer partition: ball(rho*(anchor + 3k), rho)
    minus the balls of all earlier layers.  layer in 1..9; layer 0 marks the
    distinguished 'uncovered' cell (unreachable for finite inputs: the nine
    shifted grids jointly cover rho*Z^2 whose covering radius is
    rho/sqrt(2) < rho)."""

    layer: int
    lattice: tuple
    center: complex


UNCOVERED = PlaneCell(layer=0, lattice=(0, 0), center=complex("nan"))


def plane_partition_cell(w, rho) -> PlaneCell:
    """Cell of the point w (complex) in the radius-rho plane partition.

    Layer l has open ball centers rho*(a_l + 3k), k in Z^2; within a layer
    the centers are 3*rho apart so at most one ball can contain w, and the
    first layer whose ball contains w wins (earlier layers carve out later
    ones).  Balls are open, so a boundary point falls through to a later
    layer whose center is strictly closer.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    w = complex(w)
    x, y = w.real / rho, w.imag / rho
    for layer, (ax, ay) in enumerate(PARTITION_ANCHORS, start=1):
        kx = round((x - ax) / 3.0)
        ky = round((y - ay) / 3.0)
        cx, cy = ax + 3.0 * kx, ay + 3.0 * ky
        if math.hypot(x - cx, y - cy) < 1.0:
            return PlaneCell(layer=layer, lattice=(int(kx), int(ky)),
                             center=complex(rho * cx, rho * cy))
    return UNCOVERED


def plane_partition_cells(ws, rho):
    """Vectorized cell assignment: returns (layers, kx, ky) integer arrays;
    layer 0 marks uncovered points (see plane_partition_cell)."""
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    ws = np.asarray(ws, dtype=np.complex128)
    x = ws.real / rho
    y = ws.imag / rho
    layers = np.zeros(ws.shape, dtype=np.int64)
    kxs = np.zeros(ws.shape, dtype=np.int64)
    kys = np.zeros(ws.shape, dtype=np.int64)
    todo = np.ones(ws.shape, dtype=bool)
    for layer, (ax, ay) in enumerate(PARTITION_ANCHORS, start=1):
        if not todo.any():
            break
        kx = np.rint((x - ax) / 3.0)
        ky = np.rint((y - ay) / 3.0)
        inside = todo & (np.hypot(x - (ax + 3 * kx), y - (ay + 3 * ky)) < 1.0)
        layers[inside] = layer
        kxs[inside] = kx[inside]
        kys[inside] = ky[inside]
        todo &= ~inside
    return layers, kxs, kys


# ---------------------------------------------------------------------------
# Level counting and the structure dichotomy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelProfile:
    """Candidate-center bracket of the densest level count of a vector.

    count = max over coordinate-centered disks of radius rho; count_2rho =
    the same at radius 2*rho.  The true optimum over all complex centers
    lambda satisfies count <= sup_lambda count(lambda, rho) <= count_2rho:
    any coordinate within rho of the optimal lambda sees all of lambda's
    rho-neighbors within 2*rho of itself (2-approximation in the radius)."""

    rho: float
    best_center: complex
    count: int
    count_2rho: int
    method: str = "candidate-centers"


def level_count(x, rho, *, chunk=512) -> LevelProfile:
    """Densest-level bracket for the coordinates of x (see LevelProfile).

    Candidate centers are the coordinates themselves; ties on the count are
    resolved toward the smallest coordinate index.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if n == 0:
        raise ValueError("empty coordinate vector")
    best_r = 0
    best_r_idx = 0
    best_2r = 0
    for start in range(0, n, chunk):
        block = x[start : start + chunk]
        dist = np.abs(block[:, None] - x[None, :])
        counts_r = (dist <= rho).sum(axis=1)
        counts_2r = (dist <= 2.0 * rho).sum(axis=1)
        i = int(np.argmax(counts_r))
        if counts_r[i] > best_r:
            best_r = int(counts_r[i])
            best_r_idx = start + i
        best_2r = max(best_2r, int(counts_2r.max()))
    return LevelProfile(rho=float(rho), best_center=complex(x[best_r_idx]),
                        count=best_r, count_2rho=best_2r)


VERY_STEEP = "very-steep"
SLOPING_MANY_LEVELS = "sloping-many-levels"
NEITHER = "neither"


@dataclass
class StructureLabel:
    """Outcome of the steep/sloping dichotomy for one coordinate vector.

    For a very-steep verdict, steep_witness is the (1-based) order-statistic
    index violating the decay bound.  Otherwise decay_margin records the
    worst slack min_i bound_i / x*_i (>= 1 means decay holds; the bound at
    index i is 0.9 (n/i)^3 x*_k).  The level condition is certified through
    the two-sided bracket of level_count: pass when the 2*rho count is under
    the cap, refuted when already the rho count exceeds it, and otherwise
    Neither with undecided=True (the 2-approximation cannot tell).
    """

    label: str
    k: int                    # pivot order-statistic index (1-based)
    pivot: float              # x*_k
    steep_witness: int = 0
    decay_margin: float = math.inf
    level_radius: float = 0.0
    level_cap: float = 0.0
    level_counts: LevelProfile = None
    undecided: bool = False   # level bracket straddled the cap


def classify_normal(x, ic_size, a=0.5, *, gamma=GAMMA) -> StructureLabel:
    """Classify x as very-steep / sloping-with-many-levels / neither.

    ``ic_size`` plays the role of the freed-row count |I^c| (the codimension
    scale of the subspace x is normal to); the pivot index is k = floor(a *
    ic_size).  Very steep: some i <= k has x*_i > 0.9 (n/i)^3 x*_k.  Sloping
    with many levels: the decay bound holds for every i <= k AND no complex
    level of radius exp(-2 (n/ic_size)^gamma) * x*_k captures more than
    (ic_size/n)^(gamma/2) * n coordinates.
    """
    x = np.asarray(x)
    n = x.size
    k = int(math.floor(a * ic_size))
    if not 1 <= k <= n:
        raise ValueError(f"pivot index a*ic_size = {a * ic_size:.3g} outside [1, {n}]")
    xs = order_statistics(x)
    if xs[0] == 0.0:
        raise ValueError("zero vector cannot be classified")
    pivot = float(xs[k - 1])
    i_arr = np.arange(1, k + 1, dtype=np.float64)
    bounds = 0.9 * (n / i_arr) ** 3 * pivot
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(xs[:k] > 0.0, bounds / np.maximum(xs[:k], 1e-300), math.inf)
    worst = int(np.argmin(ratios))
    decay_margin = float(ratios[worst])
    if decay_margin < 1.0:
        return StructureLabel(label=VERY_STEEP, k=k, pivot=pivot,
                              steep_witness=worst + 1, decay_margin=decay_margin)
    # decay with a zero pivot would force the zero vector (rejected above),
    # so the radius is strictly positive here
    level_radius = math.exp(-2.0 * (n / ic_size) ** gamma) * pivot
    level_cap = (ic_size / n) ** (gamma / 2.0) * n
    prof = level_count(x, level_radius)
    if prof.count_2rho <= level_cap:
        label, undecided = SLOPING_MANY_LEVELS, False
    elif prof.count > level_cap:
        label, undecided = NEITHER, False
    else:
        label, undecided = NEITHER, True
    return StructureLabel(
        label=label, k=k, pivot=pivot, decay_margin=decay_margin,
        level_radius=level_radius, level_cap=level_cap,
        level_counts=prof, undecided=undecided,
    )


# ---------------------------------------------------------------------------
# Monte Carlo order-statistics experiments
# ---------------------------------------------------------------------------

@dataclass
class LemmaRecord:
    """One empirical-frequency-vs-ceiling comparison."""

    lemma_id: str
    params: dict
    empirical_freq: float
    bound_value: float
    n_trials: int
    stderr: float

    def as_dict(self):
        return {
            "lemma_id": self.lemma_id,
            "params": self.params,
            "empirical_freq": self.empirical_freq,
            "bound_value": self.bound_value,
            "n_trials": self.n_trials,
            "stderr": self.stderr,
        }


def _freq_record(lemma_id, params, hits, trials):
    freq = hits / trials
    stderr = math.sqrt(max(freq * (1.0 - freq), 1.0 / trials) / trials)
    return lemma_id, params, freq, stderr


def orderstat_smallball_experiment(row_basis, c, trials, master_seed) -> LemmaRecord:
    """Frequency of {Y*_ceil(c*m) <= c*m/n} for the random normal Y to
    span(rows), m = n - rank: ceiling exp(-c*m)."""
    Q = orthonormal_rows(row_basis)
    n = Q.shape[1]
    m = n - Q.shape[0]
    k = max(1, math.ceil(c * m))
    if k > n:
        raise ValueError(f"order statistic index {k} exceeds n={n}")
    thr = c * m / n
    hits = 0
    for t in range(trials):
        g = sample_gaussian(n, trial_generator(master_seed, t))
        y = project_complement(Q, g, orthonormal=True)
        if order_statistics(y)[k - 1] <= thr:
            hits += 1
    lemma_id, params, freq, stderr = _freq_record(
        "orderstat-smallball", {"n": n, "m": m, "c": c, "k": k}, hits, trials)
    return LemmaRecord(lemma_id, params, freq, math.exp(-c * m), trials, stderr)


def orderstat_deviation_experiment(row_basis, i, big_c, trials, master_seed) -> LemmaRecord:
    """Frequency of {Y*_i >= C*sqrt(ln(n/i))} (i <= n/2): ceiling (i/n)^i."""
    Q = orthonormal_rows(row_basis)
    n = Q.shape[1]
    if not 1 <= i <= n // 2:
        raise ValueError(f"need 1 <= i <= n/2, got i={i}, n={n}")
    thr = big_c * math.sqrt(math.log(n / i))
    hits = 0
    for t in range(trials):
        g = sample_gaussian(n, trial_generator(master_seed, t))
        y = project_complement(Q, g, orthonormal=True)
        if order_statistics(y)[i - 1] >= thr:
            hits += 1
    lemma_id, params, freq, stderr = _freq_record(
        "orderstat-deviation", {"n": n, "i": i, "C": big_c}, hits, trials)
    return LemmaRecord(lemma_id, params, freq, (i / n) ** i, trials, stderr)


def min_modulus_cdf(n: int, t: float) -> float:
    """Exact law of the smallest coordinate modulus of a standard complex
    Gaussian in C^n (the E = {0} random normal): P{Y*_n <= t} = 1 - e^{-n t^2}."""
    return 1.0 - math.exp(-n * t * t)


def min_modulus_experiment(n, t, trials, master_seed) -> LemmaRecord:
    """Empirical frequency of {min_j |g_j| <= t} against its exact value.

    Unlike the two ceiling experiments this compares to an exact law, so the
    recorded bound is the probability itself and the empirical frequency
    should land within a few stderr of it (not merely below it).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if t < 0.0:
        raise ValueError("threshold t must be nonnegative")
    rng = generator(master_seed)
    hits = 0
    for _ in range(trials):
        hits += int(np.abs(sample_gaussian(n, rng)).min() <= t)
    lemma_id, params, freq, stderr = _freq_record(
        "min-modulus", {"n": int(n), "t": float(t)}, hits, trials)
    return LemmaRecord(lemma_id, params, freq, min_modulus_cdf(n, t),
                       trials, stderr)


def orderstat_experiments(row_basis, trials, master_seed, *,
                          c_grid=(0.25, 0.5, 1.0),
                          deviation_indices=None,
                          big_c_grid=(0.5, 1.0, 2.0),
                          t_grid=(0.5, 1.0, 2.0)) -> list:
    """All three order-statistics experiments over calibration grids.

    Runs the small-ball frequency at each c in c_grid, the large-deviation
    frequency at each (i, C) pair, and the exact min-modulus law at each
    t/sqrt(n) threshold, reusing one Gaussian stream per record so records
    stay independently reproducible.  The default deviation indices are
    {1, n//8, n//2} clipped to the lemma's i <= n/2 range.
    """
    Q = orthonormal_rows(row_basis)
    n = Q.shape[1]
    if deviation_indices is None:
        deviation_indices = sorted({1, max(1, n // 8), max(1, n // 2)})
    records = []
    for c in c_grid:
        records.append(orderstat_smallball_experiment(Q, c, trials, master_seed))
    for i in deviation_indices:
        for big_c in big_c_grid:
            records.append(
                orderstat_deviation_experiment(Q, i, big_c, trials, master_seed))
    for t in t_grid:
        records.append(
            min_modulus_experiment(n, t / math.sqrt(n), trials, master_seed))
    return records

"""d-regular digraph adjacency matrices: the ensemble M(n, d).

M(n, d) is the set of n x n 0/1 matrices whose every row sum and column sum
equals d.  Loops (diagonal ones) are allowed; multiple edges are not (entries
stay 0/1).  The module provides an exact uniform sampler (stub pairing with
rejection), a switch-chain MCMC fallback for degrees where rejection is
hopeless, exhaustive enumeration at tiny sizes, restricted enumeration with a
subset of rows freed, and a plain-text serialization.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .rng import generator

#: exhaustive enumeration refuses n beyond this
ENUMERATION_MAX_N = 7

#: restricted enumeration refuses instances with more free cells than this
#: (free cells = d * number of freed rows = total column deficit to fill)
RESTRICTED_MAX_FREE_CELLS = 12

#: default rejection budget for the exact sampler
DEFAULT_MAX_ATTEMPTS = 20_000

#: burn-in heuristic for the switch chain: accepted moves before a sample
#: is treated as (approximately) uniform
def default_burnin(n: int, d: int) -> int:
    return 20 * n * d


class SamplingError(RuntimeError):
    """Rejection budget exhausted -- d too large relative to n for rejection
    sampling; callers should use the switch chain instead."""


@dataclass(eq=False)
class RegularDigraph:
    """Adjacency matrix in M(n, d) plus its parameters.

    ``adjacency`` is an (n, n) uint8 array with entries in {0, 1}.
    """

    n: int
    d: int
    adjacency: np.ndarray

    def __eq__(self, other):
        return (
            isinstance(other, RegularDigraph)
            and self.n == other.n
            and self.d == other.d
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def row_supports(self) -> np.ndarray:
        """(n, d) int array: sorted column indices of the ones in each row."""
        _, cols = np.nonzero(self.adjacency)
        return cols.reshape(self.n, self.d)

    def col_supports(self) -> np.ndarray:
        """(n, d) int array: sorted row indices of the ones in each column."""
        _, rows = np.nonzero(self.adjacency.T)
        return rows.reshape(self.n, self.d)

    def copy(self) -> "RegularDigraph":
        return RegularDigraph(self.n, self.d, self.adjacency.copy())


def validate(g: RegularDigraph) -> None:
    """Raise ValueError unless g is a well-formed element of M(n, d)."""
    A = np.asarray(g.adjacency)
    if A.shape != (g.n, g.n):
        raise ValueError(f"adjacency shape {A.shape} != ({g.n}, {g.n})")
    if not (0 <= g.d <= g.n):
        raise ValueError(f"degree d={g.d} outside [0, n={g.n}]")
    if A.size and not np.isin(A, (0, 1)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    rs = A.sum(axis=1)
    cs = A.sum(axis=0)
    if not (rs == g.d).all():
        bad = int(np.argmax(rs != g.d))
        raise ValueError(f"row {bad} sums to {int(rs[bad])}, expected {g.d}")
    if not (cs == g.d).all():
        bad = int(np.argmax(cs != g.d))
        raise ValueError(f"column {bad} sums to {int(cs[bad])}, expected {g.d}")


def circulant(n: int, d: int) -> RegularDigraph:
    """Canonical start state: row i has ones in columns i, i+1, ..., i+d-1 mod n."""
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got n={n}, d={d}")
    A = np.zeros((n, n), dtype=np.uint8)
    for k in range(d):
        idx = np.arange(n)
        A[idx, (idx + k) % n] = 1
    return RegularDigraph(n, d, A)


# ---------------------------------------------------------------------------
# Exact sampler: stub pairing + rejection
# ---------------------------------------------------------------------------

def sample_configuration(n, d, seed, *, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Exactly uniform sample from M(n, d) by rejection.

    Pairs the n*d out-stubs with the n*d in-stubs through one uniform
    permutation and rejects any pairing with a repeated (row, col) edge.
    Every simple outcome corresponds to exactly (d!)^(2n) pairings, so
    accepted matrices are uniform on M(n, d).  Acceptance decays roughly
    like exp(-(d-1)^2 / 2): raises SamplingError once the budget is spent
    (use the switch chain for larger d).
    """
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got n={n}, d={d}")
    if d in (0, n):
        # single element: the all-zeros / all-ones matrix
        A = np.full((n, n), 1 if d == n else 0, dtype=np.uint8)
        return RegularDigraph(n, d, A)
    rng = generator(seed)
    owners = np.repeat(np.arange(n), d)
    for _ in range(max_attempts):
        targets = owners[rng.permutation(n * d)]
        codes = owners * n + targets
        if np.unique(codes).size == n * d:
            A = np.zeros((n, n), dtype=np.uint8)
            A[owners, targets] = 1
            return RegularDigraph(n, d, A)
    raise SamplingError(
        f"no simple pairing in {max_attempts} attempts at (n={n}, d={d}); "
        "degree too large for rejection sampling -- use sample_switch_chain"
    )


# ---------------------------------------------------------------------------
# Switch chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchMove:
    """A 2x2 alternating-rectangle switch: rows (i1, i2), columns (j1, j2).

    Flips entries (i1,j1), (i2,j2) against (i1,j2), (i2,j1).  Valid on M when
    one diagonal of the rectangle holds ones and the other holds zeros.
    """

    i1: int
    i2: int
    j1: int
    j2: int

    def __post_init__(self):
        if self.i1 == self.i2 or self.j1 == self.j2:
            raise ValueError("switch move needs distinct rows and distinct columns")


def admissible(g: RegularDigraph, mv: SwitchMove) -> bool:
    """True when applying mv keeps the matrix inside M(n, d)
    (ones on (i1,j1),(i2,j2) and zeros on the opposite diagonal)."""
    A = g.adjacency
    return bool(
        A[mv.i1, mv.j1] and A[mv.i2, mv.j2] and not A[mv.i1, mv.j2] and not A[mv.i2, mv.j1]
    )


def apply_switch(g: RegularDigraph, mv: SwitchMove) -> RegularDigraph:
    """Apply a switch (in either orientation), returning a new matrix.

    The four rectangle entries are flipped, which preserves all row and
    column sums; requiring one diagonal full and the other empty keeps the
    entries 0/1.  Applying the same move twice returns the original matrix.
    """
    A = g.adjacency
    diag = (A[mv.i1, mv.j1], A[mv.i2, mv.j2])
    anti = (A[mv.i1, mv.j2], A[mv.i2, mv.j1])
    if not (diag == (1, 1) and anti == (0, 0)) and not (diag == (0, 0) and anti == (1, 1)):
        raise ValueError(f"{mv} is not admissible in either orientation")
    B = A.copy()
    for i, j in ((mv.i1, mv.j1), (mv.i2, mv.j2), (mv.i1, mv.j2), (mv.i2, mv.j1)):
        B[i, j] ^= 1
    return RegularDigraph(g.n, g.d, B)


def _run_chain(A, supports, n, d, rng, *, proposals=None, target_accepted=None):
    """Shared switch-chain core, mutating A and supports in place.

    Each iteration proposes a candidate move by drawing two distinct rows
    uniformly and one support entry of each uniformly, then applies it iff
    admissible.  The proposal law is symmetric on the move space, so the
    walk is Metropolis with uniform stationary distribution on M(n, d).
    Returns (proposal_count, accepted_count).
    """
    done_p = 0
    done_a = 0
    chunk = 8192
    while True:
        if proposals is not None and done_p >= proposals:
            break
        if target_accepted is not None and done_a >= target_accepted:
            break
        rows = rng.integers(0, n, size=(chunk, 2))
        slots = rng.integers(0, d, size=(chunk, 2))
        for t in range(chunk):
            if proposals is not None and done_p >= proposals:
                break
            if target_accepted is not None and done_a >= target_accepted:
                break
            done_p += 1
            i1, i2 = rows[t]
            if i1 == i2:
                continue
            j1 = supports[i1, slots[t, 0]]
            j2 = supports[i2, slots[t, 1]]
            if j1 == j2 or A[i1, j2] or A[i2, j1]:
                continue
            A[i1, j1] = 0
            A[i2, j2] = 0
            A[i1, j2] = 1
            A[i2, j1] = 1
            supports[i1, slots[t, 0]] = j2
            supports[i2, slots[t, 1]] = j1
            done_a += 1
    return done_p, done_a


def sample_switch_chain(start: RegularDigraph, steps: int, seed) -> RegularDigraph:
    """Run `steps` proposal iterations of the switch chain from `start`.

    Deterministic given (start, steps, seed).  The chain is approximate:
    the sample is uniform only in the steps -> infinity limit.
    """
    g = start.copy()
    if g.d in (0, g.n) or steps <= 0:
        return g
    supports = g.row_supports().astype(np.int64)
    _run_chain(g.adjacency, supports, g.n, g.d, generator(seed), proposals=steps)
    return g


def sample_switch_burnin(n, d, seed, *, accepted=None, start=None):
    """Approximate uniform sample: switch chain from the circulant start,
    run until the burn-in heuristic of ``accepted`` moves (default 20*n*d)."""
    g = (start.copy() if start is not None else circulant(n, d))
    if accepted is None:
        accepted = default_burnin(n, d)
    if d in (0, n) or accepted <= 0:
        return g
    supports = g.row_supports().astype(np.int64)
    _run_chain(g.adjacency, supports, n, d, generator(seed), target_accepted=accepted)
    return g


def sample(n, d, seed, *, method="auto", accepted=None, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """Sample from M(n, d): exact rejection when feasible, else switch chain.

    method: "rejection" (exact, may raise SamplingError), "switch"
    (approximate), or "auto" (rejection for d <= 4, else switch chain --
    rejection acceptance decays like exp(-(d-1)^2/2) and is hopeless beyond).
    """
    if method not in ("auto", "rejection", "switch"):
        raise ValueError(f"unknown sampling method {method!r}")
    if method == "rejection" or (method == "auto" and d <= 4):
        try:
            return sample_configuration(n, d, seed, max_attempts=max_attempts)
        except SamplingError:
            if method == "rejection":
                raise
    return sample_switch_burnin(n, d, seed, accepted=accepted)


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def iter_all(n, d):
    """Yield every element of M(n, d) in ascending row-major lexicographic
    order of the flattened 0/1 entries."""
    if n > ENUMERATION_MAX_N:
        raise ValueError(f"enumerate_all limited to n <= {ENUMERATION_MAX_N}, got {n}")
    if not 0 <= d <= n:
        raise ValueError(f"need 0 <= d <= n, got n={n}, d={d}")
    counts = [0] * n
    chosen = []
    # rightmost supports first = smallest flattened 0/1 row pattern first
    candidates = list(itertools.combinations(range(n), d))[::-1]

    def rec(row):
        if row == n:
            A = np.zeros((n, n), dtype=np.uint8)
            for i, sup in enumerate(chosen):
                A[i, list(sup)] = 1
            yield RegularDigraph(n, d, A)
            return
        remaining = n - row - 1
        for sup in candidates:
            ok = True
            for j in sup:
                if counts[j] == d:
                    ok = False
                    break
            if not ok:
                continue
            for j in sup:
                counts[j] += 1
            # every column must still be fillable by the remaining rows
            if all(d - counts[j] <= remaining for j in range(n)):
                chosen.append(sup)
                yield from rec(row + 1)
                chosen.pop()
            for j in sup:
                counts[j] -= 1

    yield from rec(0)


def enumerate_all(n, d):
    """All of M(n, d) as a list (n <= 7; see iter_all for the order)."""
    return list(iter_all(n, d))


def enumerate_restricted(g: RegularDigraph, rows):
    """All matrices of M(n, d) agreeing with g on every row outside ``rows``.

    The freed rows are re-chosen so each column j receives exactly its
    deficit (d minus the fixed rows' contribution).  Guard: at most
    RESTRICTED_MAX_FREE_CELLS free cells (= d * len(rows)), keeping the
    search space tiny.  Output order is lexicographic on the freed rows'
    supports, freed rows taken in increasing index order.
    """
    T = sorted(set(int(r) for r in rows))
    n, d = g.n, g.d
    if any(not 0 <= r < n for r in T):
        raise ValueError(f"row indices out of range: {T}")
    free_cells = d * len(T)
    if free_cells > RESTRICTED_MAX_FREE_CELLS:
        raise ValueError(
            f"{free_cells} free cells exceeds the enumeration guard "
            f"({RESTRICTED_MAX_FREE_CELLS}); instance too large to enumerate"
        )
    A = np.asarray(g.adjacency)
    fixed = np.delete(A, T, axis=0) if T else A
    deficits = (d - fixed.sum(axis=0)).astype(int)
    if deficits.min() < 0 or deficits.sum() != free_cells:
        raise ValueError("fixed rows are inconsistent with column sums d")

    out = []
    counts = deficits.copy()
    chosen = []

    def rec(t):
        if t == len(T):
            B = A.copy()
            for r, sup in zip(T, chosen):
                B[r, :] = 0
                B[r, list(sup)] = 1
            out.append(RegularDigraph(n, d, B))
            return
        remaining = len(T) - t - 1
        candidates = [j for j in range(n) if counts[j] > 0]
        if len(candidates) < d:
            return
        for sup in itertools.combinations(candidates, d):
            for j in sup:
                counts[j] -= 1
            if all(counts[j] <= remaining for j in range(n)):
                chosen.append(sup)
                rec(t + 1)
                chosen.pop()
            for j in sup:
                counts[j] += 1

    rec(0)
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def to_text(g: RegularDigraph) -> str:
    """Serialize: header "n d", then n lines of d ascending column indices."""
    lines = [f"{g.n} {g.d}"]
    sups = g.row_supports() if g.d else np.empty((g.n, 0), dtype=int)
    for i in range(g.n):
        lines.append(" ".join(str(int(j)) for j in sups[i]))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> RegularDigraph:
    """Parse the to_text format; validates membership in M(n, d)."""
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty matrix text")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError(f"malformed header {lines[0]!r}, expected 'n d'")
    n, d = int(head[0]), int(head[1])
    body = lines[1 : n + 1]
    if len(body) != n:
        raise ValueError(f"expected {n} support lines, found {len(body)}")
    A = np.zeros((n, n), dtype=np.uint8)
    for i, line in enumerate(body):
        cols = [int(tok) for tok in line.split()]
        if len(cols) != d:
            raise ValueError(f"row {i} lists {len(cols)} columns, expected {d}")
        if cols != sorted(set(cols)):
            raise ValueError(f"row {i} columns must be strictly increasing")
        A[i, cols] = 1
    g = RegularDigraph(n, d, A)
    validate(g)
    return g


def write_matrix(path, g: RegularDigraph) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(to_text(g))


def read_matrix(path) -> RegularDigraph:
    with open(path, "r", encoding="ascii") as fh:
        return from_text(fh.read())

"""Shifted matrices, spectral measures, log potentials, and reference laws.

The measurement pipeline works with the shifted, rescaled matrix
B_z = A/sqrt(d) - z*Id of a d-regular digraph adjacency A.  Its singular
values feed the empirical log potential

    U(z) = -(1/n) * sum_i ln s_i(B_z),

which is compared against the closed form for the uniform law on the unit
disk.  Also here: the oriented Kesten-McKay density for the unscaled
spectrum, radial/angular Kolmogorov distances, the four-regime tail
decomposition of the log sum, and the three lower-bound checks on the
singular-value profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .digraph import RegularDigraph

#: hard floor applied inside logarithms of singular values
LOG_FLOOR = 1e-30


# ---------------------------------------------------------------------------
# Shifted matrices and empirical measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftSpec:
    """Shift-and-scale recipe: the matrix sent to the dense kernels is
    scale*A - z*Id.  The rescaled pipeline uses scale = 1/sqrt(d)."""

    z: complex
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")

    @classmethod
    def rescaled(cls, z, d) -> "ShiftSpec":
        return cls(z=complex(z), scale=1.0 / math.sqrt(d))


def build_shifted(A, spec: ShiftSpec) -> np.ndarray:
    """Dense complex matrix scale*A - z*Id for A a digraph or square array."""
    if isinstance(A, RegularDigraph):
        A = A.adjacency
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    B = spec.scale * A.astype(np.complex128)
    idx = np.arange(A.shape[0])
    B[idx, idx] -= spec.z
    return B


def bz_matrix(A, z, d) -> np.ndarray:
    """The rescaled shifted matrix A/sqrt(d) - z*Id."""
    return build_shifted(A, ShiftSpec.rescaled(z, d))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniform atomic measure (1/n) * sum_i delta_{atoms[i]} — the container
    for both the eigenvalue measure (complex atoms) and the singular-value
    measure (nonnegative real atoms)."""

    atoms: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "atoms", np.atleast_1d(np.asarray(self.atoms)))
        if self.atoms.size == 0:
            raise ValueError("empirical measure needs at least one atom")

    @property
    def n(self) -> int:
        return self.atoms.size

    @property
    def weight(self) -> float:
        return 1.0 / self.atoms.size

    def radii(self) -> np.ndarray:
        """Sorted moduli of the atoms (the radial empirical CDF support)."""
        return np.sort(np.abs(self.atoms))


def esd(eigs) -> EmpiricalMeasure:
    """Empirical spectral distribution of a list of eigenvalues."""
    return EmpiricalMeasure(np.asarray(eigs, dtype=np.complex128))


def singular_measure(svals) -> EmpiricalMeasure:
    """Empirical singular-value distribution (nonnegative real atoms)."""
    atoms = np.asarray(svals, dtype=np.float64)
    if (atoms < 0).any():
        raise ValueError("singular values must be nonnegative")
    return EmpiricalMeasure(atoms)


# ---------------------------------------------------------------------------
# Log potentials
# ---------------------------------------------------------------------------

class LogPotential(NamedTuple):
    """Empirical log potential together with the number of floored values
    (values below the floor are clamped inside the log, never silently)."""

    value: float
    floored: int


def log_potential_empirical(svals, floor: float = LOG_FLOOR) -> LogPotential:
    """-(1/n) * sum ln(max(s_i, floor)) over a nonincreasing singular-value
    profile, reporting how many values hit the floor."""
    if not floor > 0.0:
        raise ValueError("floor must be positive")
    s = np.asarray(svals, dtype=np.float64)
    if s.size == 0:
        raise ValueError("empty singular-value list")
    if (np.diff(s) > 0).any():
        raise ValueError("singular values must be nonincreasing")
    floored = int((s < floor).sum())
    return LogPotential(value=float(-np.mean(np.log(np.maximum(s, floor)))),
                        floored=floored)


def log_potential_circular(z) -> float:
    """Log potential of the uniform law on the unit disk:
    (1 - |z|^2)/2 inside, -ln|z| outside (both branches vanish on |z|=1)."""
    r = abs(complex(z))
    if r < 1.0:
        return 0.5 * (1.0 - r * r)
    return -math.log(r)


# ---------------------------------------------------------------------------
# Reference laws
# ---------------------------------------------------------------------------

def km_density(z, d: int) -> float:
    """Oriented Kesten-McKay density (1/pi) d^2 (d-1) / (d^2 - |z|^2)^2 on
    |z| < sqrt(d) — the bulk law of the *unscaled* adjacency spectrum."""
    if d < 2:
        raise ValueError("oriented Kesten-McKay law needs d >= 2")
    r2 = abs(complex(z)) ** 2
    if r2 >= d:
        return 0.0
    return d * d * (d - 1) / (math.pi * (d * d - r2) ** 2)


@dataclass(frozen=True)
class CircularLaw:
    """Uniform law on the unit disk."""

    kind: str = field(default="circular", init=False)

    def density(self, z) -> float:
        return 1.0 / math.pi if abs(complex(z)) < 1.0 else 0.0

    def radial_cdf(self, r) -> float:
        r = float(r)
        if r <= 0.0:
            return 0.0
        return min(r * r, 1.0)

    def log_potential(self, z) -> float:
        return log_potential_circular(z)


@dataclass(frozen=True)
class OrientedKestenMcKay:
    """Oriented Kesten-McKay law of degree d.

    With rescaled=False the support is |z| < sqrt(d) (unscaled adjacency
    spectrum, density km_density); with rescaled=True the law is pushed
    forward under z -> z/sqrt(d) onto the unit disk, where its radial CDF
    (d-1) r^2 / (d - r^2) converges to the circular r^2 as d grows.
    """

    d: int
    rescaled: bool = False
    kind: str = field(default="oriented-kesten-mckay", init=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("oriented Kesten-McKay law needs d >= 2")

    @property
    def support_radius(self) -> float:
        return 1.0 if self.rescaled else math.sqrt(self.d)

    def density(self, z) -> float:
        if self.rescaled:
            d = self.d
            r2 = abs(complex(z)) ** 2
            if r2 >= 1.0:
                return 0.0
            return d * (d - 1) / (math.pi * (d - r2) ** 2)
        return km_density(z, self.d)

    def radial_cdf(self, r) -> float:
        r = float(r)
        if r <= 0.0:
            return 0.0
        d = self.d
        r2 = r * r
        if self.rescaled:
            return min((d - 1) * r2 / (d - r2), 1.0) if r2 < d else 1.0
        return min((d - 1) * r2 / (d * d - r2), 1.0) if r2 < d * d else 1.0


def radial_cdf_distance(mu: EmpiricalMeasure, law) -> float:
    """Exact Kolmogorov distance between the empirical CDF of |atom| and the
    law's radial CDF: the sup is attained at a staircase jump, so it equals
    max_i max(|F(r_(i)) - i/n|, |F(r_(i)) - (i-1)/n|)."""
    radii = mu.radii()
    n = radii.size
    F = np.array([law.radial_cdf(r) for r in radii])
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(F - upper), np.abs(F - lower))))


def angular_cdf_distance(mu: EmpiricalMeasure) -> float:
    """Kolmogorov distance between the empirical CDF of arg(atom) (mapped to
    [0, 2*pi)) and the uniform law on [0, 2*pi) — a companion to the radial
    test, since the radial CDF alone cannot tell rotation-invariant laws
    apart from the circular law."""
    theta = np.sort(np.mod(np.angle(mu.atoms.astype(np.complex128)), 2.0 * math.pi))
    n = theta.size
    F = theta / (2.0 * math.pi)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(F - upper), np.abs(F - lower))))


# ---------------------------------------------------------------------------
# Four-regime tail decomposition of the log sum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailReport:
    """Decomposition of sum_{|ln s_i| >= T} |ln s_i| over index regimes.

    The small-value side (s_i <= e^{-T}) is split over four index windows
    whose right edges derive from the boundaries n - C n d^{-1/48},
    n - 2n/d^{3/2}, n - n/ln^2 n (floored, clamped monotone so the windows
    always partition 1..n; empty windows contribute 0).  The large-value
    side (s_i >= e^T) is reported separately.  tail_sum is exactly the sum
    of all five components.
    """

    T: float
    n: int
    d: int
    C: float
    boundaries: tuple          # raw real-valued boundaries (b1, b2, b3)
    windows: tuple             # four 1-based inclusive (first, last) windows
    regime_sums: tuple         # small-value |ln s| mass per window
    regime_counts: tuple       # number of contributing indices per window
    large_sum: float           # |ln s| mass over s_i >= e^T
    large_count: int
    tail_sum: float
    floored: int               # singular values clamped at the floor


def tail_log_sum(svals, T: float, d: int, *, C: float = 1.0,
                 floor: float = LOG_FLOOR) -> TailReport:
    """Tail mass of the log sum at threshold T with its regime decomposition
    (see TailReport).  The profile must be nonincreasing; T must be positive.
    """
    if not T > 0.0:
        raise ValueError("threshold T must be positive")
    if d < 1:
        raise ValueError("degree d must be >= 1")
    s = np.asarray(svals, dtype=np.float64)
    n = s.size
    if n == 0:
        raise ValueError("empty singular-value list")
    if (np.diff(s) > 0).any():
        raise ValueError("singular values must be nonincreasing")

    floored = int((s < floor).sum())
    logs = np.log(np.maximum(s, floor))

    b1 = n - C * n * d ** (-1.0 / 48.0)
    b2 = n - 2.0 * n * d ** (-1.5)
    b3 = n - n / math.log(n) ** 2 if n >= 2 else 0.0
    k1 = min(max(int(math.floor(b1)), 0), n)
    k2 = min(max(int(math.floor(b2)), k1), n)
    k3 = min(max(int(math.floor(b3)), k2), n)
    edges = (0, k1, k2, k3, n)

    small = logs <= -T
    large = logs >= T
    regime_sums = []
    regime_counts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = small[lo:hi]
        regime_sums.append(float(-logs[lo:hi][mask].sum() + 0.0))
        regime_counts.append(int(mask.sum()))
    large_sum = float(logs[large].sum())

    return TailReport(
        T=float(T), n=n, d=int(d), C=float(C),
        boundaries=(b1, b2, b3),
        windows=tuple((lo + 1, hi) for lo, hi in zip(edges[:-1], edges[1:])),
        regime_sums=tuple(regime_sums),
        regime_counts=tuple(regime_counts),
        large_sum=large_sum,
        large_count=int(large.sum()),
        tail_sum=float(sum(regime_sums) + large_sum),
        floored=floored,
    )


# ---------------------------------------------------------------------------
# Singular-value lower-bound checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    """One lower-bound check over a k-range of the singular-value profile.

    margin is the worst ratio value/bound over the checked indices (>= 1
    means the bound holds everywhere); tightest_k is the 1-based index
    attaining it.  Checks whose hypotheses fail are reported inapplicable
    and hold vacuously.
    """

    name: str
    applicable: bool
    holds: bool
    checked: int
    tightest_k: int = 0
    margin: float = math.inf
    value_at_tightest: float = math.nan
    bound_at_tightest: float = math.nan


@dataclass(frozen=True)
class SvBoundReport:
    z: complex
    n: int
    d: int
    smallest: BoundCheck
    bulk: BoundCheck
    intermediate: BoundCheck
    C_bulk: float = 1.0
    c_bulk: float = 0.1
    C_inter: float = 1.0

    def all_hold(self) -> bool:
        return self.smallest.holds and self.bulk.holds and self.intermediate.holds


def bulk_window(n: int, d: int, C: float = 1.0) -> int:
    """Largest index of the bulk lower-bound range: floor(n - C n d^{-1/48})."""
    return min(int(math.floor(n - C * n * d ** (-1.0 / 48.0))), n)


def intermediate_window(n: int, d: int) -> tuple:
    """Index range [lo, hi] of the intermediate bound,
    ceil(n - 2n/d^{3/2}) .. floor(n - 3n/ln^{144} n); empty when lo > hi.

    Integer k <= n - 3n/ln^{144} n excludes k = n whenever the subtracted
    term is positive, so capping at n - 1 is exact, not a fudge.
    """
    lo = max(1, int(math.ceil(n - 2.0 * n * d ** (-1.5))))
    if n >= 3:
        hi = min(int(math.floor(n - 3.0 * n / math.log(n) ** 144)), n - 1)
    else:
        hi = 0
    return lo, hi


def _range_check(name, values, bounds, offset) -> BoundCheck:
    """Worst value/bound ratio over a contiguous k-range (1-based offset)."""
    if values.size == 0:
        return BoundCheck(name=name, applicable=False, holds=True, checked=0)
    with np.errstate(divide="ignore"):
        ratios = np.where(bounds > 0.0, values / np.maximum(bounds, 1e-300), math.inf)
    i = int(np.argmin(ratios))
    margin = float(ratios[i])
    return BoundCheck(
        name=name, applicable=True, holds=bool(margin >= 1.0),
        checked=int(values.size), tightest_k=offset + i, margin=margin,
        value_at_tightest=float(values[i]), bound_at_tightest=float(bounds[i]),
    )


def sv_bound_check(svals, d: int, z, *, C_bulk: float = 1.0, c_bulk: float = 0.1,
                   C_inter: float = 1.0) -> SvBoundReport:
    """Three lower-bound checks on the singular values of B_z = A/sqrt(d) - z*Id.

    Input is the nonincreasing profile of B_z; bounds stated for the
    unscaled shift A - w*Id (w = sqrt(d)*z) use s(A - w*Id) = sqrt(d)*s(B_z).

    - smallest: s_min(A - w*Id) >= n^{-6}, hypothesis |w| <= d/6 (otherwise
      inapplicable).
    - bulk:     s_k(B_z) >= c_bulk*(n-k)/n for all k <= n - C_bulk*n*d^{-1/48}.
    - intermediate: s_k(A - w*Id) >= exp(-C_inter*(n/(n-k))^{1/144}) for
      n - 2n/d^{3/2} <= k <= n - 3n/ln^{144} n.

    The slope and range constants are calibration knobs, not asserted values.
    """
    s = np.asarray(svals, dtype=np.float64)
    n = s.size
    if n == 0:
        raise ValueError("empty singular-value list")
    if (np.diff(s) > 0).any():
        raise ValueError("singular values must be nonincreasing")
    if d < 1:
        raise ValueError("degree d must be >= 1")
    z = complex(z)
    root_d = math.sqrt(d)

    # smallest singular value of the unscaled shift
    w_abs = root_d * abs(z)
    if w_abs <= d / 6.0:
        value = root_d * s[-1]
        bound = float(n) ** (-6.0)
        margin = value / bound
        smallest = BoundCheck(
            name="smallest", applicable=True, holds=bool(margin >= 1.0),
            checked=1, tightest_k=n, margin=float(margin),
            value_at_tightest=float(value), bound_at_tightest=bound,
        )
    else:
        smallest = BoundCheck(name="smallest", applicable=False, holds=True, checked=0)

    # bulk decay on the rescaled profile
    k1 = bulk_window(n, d, C_bulk)
    if k1 >= 1:
        ks = np.arange(1, k1 + 1, dtype=np.float64)
        bulk = _range_check("bulk", s[:k1], c_bulk * (n - ks) / n, offset=1)
    else:
        bulk = BoundCheck(name="bulk", applicable=False, holds=True, checked=0)

    # intermediate window on the unscaled profile
    lo, hi = intermediate_window(n, d)
    if lo <= hi:
        ks = np.arange(lo, hi + 1, dtype=np.float64)
        bounds = np.exp(-C_inter * (n / (n - ks)) ** (1.0 / 144.0))
        intermediate = _range_check("intermediate", root_d * s[lo - 1 : hi],
                                    bounds, offset=lo)
    else:
        intermediate = BoundCheck(name="intermediate", applicable=False,
                                  holds=True, checked=0)

    return SvBoundReport(z=z, n=n, d=int(d), smallest=smallest, bulk=bulk,
                         intermediate=intermediate, C_bulk=float(C_bulk),
                         c_bulk=float(c_bulk), C_inter=float(C_inter))

import math

import numpy as np
import pytest

from regspectra import anticonc, digraph
from regspectra.digraph import RegularDigraph
from regspectra.rng import generator


def crafted_disjoint_instance():
    """n=6, d=2 with rows 0,1,2 on pairwise disjoint column pairs."""
    A = np.zeros((6, 6), dtype=np.uint8)
    pairs = [(0, 1), (2, 3), (4, 5), (0, 1), (2, 3), (4, 5)]
    for i, (a, b) in enumerate(pairs):
        A[i, a] = A[i, b] = 1
    return RegularDigraph(6, 2, A)


# --- resampling index set -----------------------------------------------------

def test_resample_subset_size():
    assert anticonc.resample_subset_size(16) == 2
    assert anticonc.resample_subset_size(81) == 3
    assert anticonc.resample_subset_size(100) == 3


def test_sample_i_properties():
    J = tuple(range(0, 40, 2))
    got = anticonc.sample_I(J, 80, generator(1))
    assert len(got) == anticonc.resample_subset_size(80)
    assert list(got) == sorted(got)
    assert set(got) <= set(J)
    again = anticonc.sample_I(J, 80, generator(1))
    assert list(got) == list(again)


def test_resampler_spec_validation():
    g = crafted_disjoint_instance()
    anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(0,))
    with pytest.raises(ValueError):
        anticonc.ResamplerSpec(g, (0, 1, 2), 2, I0=(0,))  # u inside J
    with pytest.raises(ValueError):
        anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(5,))  # I0 not inside J
    with pytest.raises(ValueError):
        anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(0, 1))  # wrong size


# --- support disjointness --------------------------------------------------------

def test_supports_disjoint_crafted():
    g = crafted_disjoint_instance()
    assert anticonc.supports_disjoint(g, [0, 1, 2])
    assert not anticonc.supports_disjoint(g, [0, 3])
    S = anticonc.support_union(g, [0, 4])
    assert sorted(S) == [0, 1, 2, 3]


def test_disjointness_frequency_bound():
    """Disjoint-support frequency should be near 1 at moderate n (the
    lemma gives 1 - 2 n^{-1/4} asymptotically)."""
    g = digraph.sample(60, 3, generator(5))
    freq = anticonc.disjointness_frequency(g, tuple(range(30)), 59, 200, 7)
    assert freq >= 1 - 2 * 60 ** (-0.25) - 0.1


# --- exact fiber checks ------------------------------------------------------------

def test_uniform_support_check_equinumerosity():
    g = crafted_disjoint_instance()
    spec = anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(0,))
    chk = anticonc.uniform_support_check(spec)
    assert chk.disjoint
    assert chk.fiber_size == 6
    assert chk.support_size == 4
    assert chk.subsets_possible == math.comb(4, 2)
    assert chk.subsets_seen == 6
    assert chk.uniform
    assert chk.count_per_subset == 1
    # the closed-form equinumerosity count (d|T| - d)! / (d!)^{|T|-1}
    want = math.factorial(2 * 2 - 2) // math.factorial(2) ** 1
    assert chk.count_per_subset == want


def test_uniform_support_check_requires_explicit_subset():
    g = crafted_disjoint_instance()
    spec = anticonc.ResamplerSpec(g, (0, 1, 2), 4)
    with pytest.raises(ValueError):
        anticonc.uniform_support_check(spec)


# --- resampled row ------------------------------------------------------------------

def test_sample_x_exact_path():
    g = crafted_disjoint_instance()
    spec = anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(0,))
    fiber_rows = {tuple(h.adjacency[4])
                  for h in digraph.enumerate_restricted(g, (0, 4))}
    rng = generator(11)
    for _ in range(20):
        x, method = anticonc.sample_X(spec, rng)
        assert method == "exact-enumeration"
        assert x.sum() == 2
        assert tuple(x) in fiber_rows


def test_sample_x_switch_path():
    g = digraph.sample(90, 5, generator(12))
    J = tuple(range(45))
    spec = anticonc.ResamplerSpec(g, J, 89, I0=tuple(anticonc.sample_I(J, 90, generator(13))))
    x, method = anticonc.sample_X(spec, generator(14))
    assert method == "switch-chain"
    assert x.sum() == 5
    assert x.shape == (90,)


def test_sample_x_deterministic():
    g = crafted_disjoint_instance()
    spec = anticonc.ResamplerSpec(g, (0, 1, 2), 4, I0=(0,))
    a, _ = anticonc.sample_X(spec, generator(15))
    b, _ = anticonc.sample_X(spec, generator(15))
    assert np.array_equal(a, b)


# --- coupling --------------------------------------------------------------------

def test_coupling_sampler_shape():
    S = np.arange(10, 26)
    counts, collided = anticonc.coupling_sampler(S, 4, generator(16), n=40)
    assert counts.shape == (40,)
    assert counts.sum() == 4
    assert counts[:10].sum() == 0 and counts[26:].sum() == 0
    assert collided == bool((counts >= 2).any())


def test_collision_frequency_under_bound():
    S = np.arange(64)
    freq = anticonc.collision_frequency(S, 4, 5000, 17)
    se = math.sqrt(freq * (1 - freq) / 5000) if freq > 0 else math.sqrt(1 / 5000)
    assert freq <= 16 / 64 + 3 * se
    # exact birthday probability 1 - prod(1 - k/64): sanity corridor
    exact = 1.0 - np.prod([1 - k / 64 for k in range(4)])
    assert abs(freq - exact) < 5 * math.sqrt(exact * (1 - exact) / 5000) + 1e-3


# --- small-ball experiment ----------------------------------------------------------

def _separated_y(n):
    j = np.arange(n)
    return (j + 1) / n + 1j * ((j + 1) ** 2) / n ** 2


def test_smallball_separated_hypothesis_certified():
    n, d = 24, 3
    g = digraph.sample(n, d, generator(18))
    J = tuple(range(13))
    spec = anticonc.ResamplerSpec(g, J, 23, I0=tuple(anticonc.sample_I(J, n, generator(19))))
    y = _separated_y(n)
    lam = complex(np.sum(y[:d]))
    rec = anticonc.smallball_experiment(y, spec, 1 / (3 * n), lam, 400, 20)
    assert rec.hypothesis == "certified"
    assert rec.level_at_rho <= rec.level_at_2rho
    assert 0.0 <= rec.empirical_freq <= 1.0
    assert rec.ceiling > 0.0
    assert rec.empirical_freq <= rec.ceiling + 3 * rec.stderr
    payload = rec.as_record(99)
    assert payload["experiment_id"] == "smallball"
    assert payload["seed"] == 99


def test_smallball_zero_vector_violates_hypothesis():
    n, d = 24, 3
    g = digraph.sample(n, d, generator(21))
    J = tuple(range(13))
    spec = anticonc.ResamplerSpec(g, J, 23, I0=tuple(anticonc.sample_I(J, n, generator(22))))
    # all coordinates share one level, so any delta below 1 is violated
    rec = anticonc.smallball_experiment(np.zeros(n, dtype=complex), spec,
                                        0.01, 0.0, 50, 23, delta=0.2)
    assert rec.hypothesis == "violated"
    assert rec.level_at_rho == n


# --- prefix distances ----------------------------------------------------------------

def test_step_index_range_no_overflow():
    lo, hi = anticonc._step_index_range(10 ** 9, 8, anticonc.GAMMA)
    assert 1 <= lo <= hi <= 10 ** 9


def test_row_distance_experiment_records():
    n, d, i = 40, 3, 39
    recs = anticonc.row_distance_experiment(n, d, 0.4, i, 5, 24)
    assert len(recs) == 5
    for t, r in enumerate(recs):
        assert r.trial == t
        assert r.i == i and r.n == n and r.d == d
        want_thr = math.exp(-1.0 * (n / (n - i)) ** anticonc.GAMMA)
        assert np.isclose(r.threshold, want_thr)
        assert r.violated == (r.distance < r.threshold)
        assert r.distance >= 0.0
        payload = r.as_record(7)
        assert payload["experiment_id"] == "row-distance"


def test_row_distance_final_index_threshold_zero():
    recs = anticonc.row_distance_experiment(30, 3, 0.4, 30, 2, 25)
    for r in recs:
        assert r.threshold == 0.0
        assert not r.violated


# --- distance-to-singular-value implication --------------------------------------------

def test_sv_from_distances_validation():
    s = np.linspace(2.0, 0.1, 20)
    with pytest.raises(ValueError):
        anticonc.sv_from_distances(0.0, 0.1, 1.5, 20, s)
    with pytest.raises(ValueError):
        anticonc.sv_from_distances(0.1, 0.0, 1.5, 20, s)
    with pytest.raises(ValueError):
        anticonc.sv_from_distances(0.1, 0.1, 0.5, 20, s)   # L < 1
    with pytest.raises(ValueError):
        anticonc.sv_from_distances(0.1, 0.1, 6.0, 20, s)   # L > 1/(2 delta)
    with pytest.raises(ValueError):
        anticonc.sv_from_distances(0.1, 0.1, 1.5, 0, s)


def test_sv_from_distances_holds_case():
    m = 100
    s = np.linspace(5.0, 1.0, m)
    v = anticonc.sv_from_distances(0.5, 0.05, 2.0, m, s)
    assert v.applicable and v.holds and not v.violated_implication
    assert v.k == m - math.floor(2 * 2.0 * 0.05 * m)
    assert np.isclose(v.threshold, 0.5 * math.sqrt(2.0 * 0.05))
    assert v.s_k >= v.threshold


def test_sv_from_distances_violation_detected():
    m = 100
    s = np.full(m, 1e-9)
    v = anticonc.sv_from_distances(0.5, 0.05, 2.0, m, s, violations=0)
    assert v.applicable and not v.holds and v.violated_implication


def test_sv_from_distances_excess_violations_inapplicable():
    m = 100
    s = np.linspace(5.0, 1.0, m)
    v = anticonc.sv_from_distances(0.5, 0.05, 2.0, m, s, violations=50)
    assert not v.applicable
    assert not v.violated_implication


def test_sv_from_distances_degenerate_window():
    # 2*L*delta = 1 wipes out the whole window: k = 0 -> inapplicable
    m = 10
    s = np.linspace(2.0, 1.0, m)
    v = anticonc.sv_from_distances(0.5, 0.4, 1.25, m, s)
    assert not v.applicable


def test_default_l_formula():
    assert np.isclose(anticonc.default_L(0.05), 1 / (2 * math.sqrt(0.05)))
    assert np.isclose(anticonc.default_L(0.01, 4.0), 1 / (2 * math.sqrt(0.04)))


def test_distance_implication_experiment_runs_clean():
    verdicts = anticonc.distance_implication_experiment(
        40, 4, 0.3, 0.05, 0.05, anticonc.default_L(0.05), 5, 26)
    assert len(verdicts) == 5
    assert not any(v.violated_implication for v in verdicts)

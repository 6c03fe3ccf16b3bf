import numpy as np
import pytest

from regspectra import hermitization as hz
from regspectra import linalg, svg
from regspectra.rng import generator


def _wellformed(doc):
    assert doc.startswith("<svg")
    assert doc.rstrip().endswith("</svg>")
    assert doc.count("<svg") == 1
    # cheap structural parse
    import xml.etree.ElementTree as ET
    ET.fromstring(doc)


def test_render_scatter():
    atoms = generator(1).standard_normal(50) + 1j * generator(2).standard_normal(50)
    doc = svg.render_scatter(atoms, overlay_radius=1.0, title="t")
    _wellformed(doc)
    assert doc.count("<circle") >= 51  # 50 points + overlay circle


def test_render_scatter_deterministic():
    atoms = np.array([0.5 + 0.5j, -0.25j])
    assert svg.render_scatter(atoms) == svg.render_scatter(atoms)


def test_render_sv_profile_with_bounds(medium_digraph):
    s = linalg.singular_values(hz.bz_matrix(medium_digraph, 0.3, 8))
    rep = hz.sv_bound_check(s, 8, 0.3)
    doc = svg.render_sv_profile(s, bound_report=rep, title="profile")
    _wellformed(doc)
    assert doc.count("<polyline") >= 2  # profile + at least one bound curve


def test_render_radial_cdf(medium_digraph):
    eigs = linalg.eigenvalues(hz.bz_matrix(medium_digraph, 0.0, 8))
    doc = svg.render_radial_cdf(eigs, hz.CircularLaw(), title="cdf")
    _wellformed(doc)


def test_render_series_logy():
    xs = np.arange(1, 30)
    doc = svg.render_series([(xs, 1.0 / xs)], title="series", logy=True,
                            labels=("decay",))
    _wellformed(doc)


def test_render_series_rejects_empty():
    with pytest.raises(ValueError):
        svg.render_series([], title="empty")

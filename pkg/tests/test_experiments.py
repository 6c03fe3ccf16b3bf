import hashlib
import json
from pathlib import Path

import pytest

from regspectra import experiments as ex

BASE = """
schema_version = 1
n = 24
d = 3
trials = 2
master_seed = 11
"""


def _cfg(kind, **overrides):
    cfg = ex.parse_config(BASE)
    cfg.kind = kind
    for k, v in overrides.items():
        setattr(cfg, k, v)
    return cfg


# --- config parsing -----------------------------------------------------------

def test_parse_config_values_and_comments():
    cfg = ex.parse_config("""
# comment line
schema_version = 1
n = 50          # trailing comment
z_grid = 0.3, 0.8+0.1j
method = switch
rho = 0.25
""")
    assert cfg.n == 50
    assert cfg.z_grid == (0.3 + 0j, 0.8 + 0.1j)
    assert cfg.method == "switch"
    assert cfg.rho == 0.25


def test_parse_config_requires_schema_version():
    with pytest.raises(ex.ConfigError):
        ex.parse_config("n = 10\n")
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 2\nn = 10\n")


def test_parse_config_unknown_and_duplicate_keys():
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 1\nnn = 10\n")
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 1\nn = 10\nn = 11\n")


def test_parse_config_bad_values():
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 1\nn = ten\n")
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 1\nz_grid = nope\n")
    with pytest.raises(ex.ConfigError):
        ex.parse_config("schema_version = 1\njust a line\n")


def test_validate_config_rejections():
    bad = [
        _cfg("unknown-kind"),
        _cfg("sample", n=0),
        _cfg("sample", d=25),
        _cfg("sample", trials=0),
        _cfg("sample", method="magic"),
        _cfg("sample", T=0.0),
        _cfg("sample", beta=0.9),
        _cfg("sample", a=1.5),
        _cfg("report", input=""),
    ]
    for cfg in bad:
        with pytest.raises(ex.ConfigError):
            ex.validate_config(cfg)


def test_config_hash_sensitivity():
    a, b = _cfg("sample"), _cfg("sample")
    assert ex.config_hash(a) == ex.config_hash(b)
    b.master_seed = 12
    assert ex.config_hash(a) != ex.config_hash(b)


def test_resolved_defaults():
    cfg = _cfg("normals", n=400, d=10, ic_size=0)
    assert cfg.resolved_ic() == 2  # 400/1000 rounds to 0 -> floor of 2
    cfg2 = _cfg("normals", n=512, d=4, ic_size=0)
    assert cfg2.resolved_ic() == 8
    assert _cfg("anticonc", delta=0.04).resolved_L() == 1 / (2 * 0.2)
    assert _cfg("anticonc", n=100).resolved_row_index() == 95


# --- running kinds ---------------------------------------------------------------

def _run(tmp_path, kind, **over):
    cfg = _cfg(kind, **over)
    rec = ex.run(cfg, tmp_path / kind)
    return cfg, rec, tmp_path / kind


def _payload(out):
    return json.loads((out / "run.json").read_text())


@pytest.mark.parametrize("kind,over", [
    ("sample", {}),
    ("spectrum", {"trials": 1}),
    ("circular-law", {"z_grid": (0.3 + 0j, 1.5 + 0j)}),
    ("sv-regimes", {"z_grid": (0.5 + 0j,)}),
    ("normals", {"n": 36, "ic_size": 4}),
    ("anticonc", {}),
])
def test_run_kinds_artifact_contract(tmp_path, kind, over):
    cfg, rec, out = _run(tmp_path, kind, **over)
    payload = _payload(out)
    # recorded artifact list matches the directory (timing.log excluded)
    on_disk = sorted(p.name for p in out.iterdir() if p.name != "timing.log")
    assert payload["artifacts"] == on_disk == rec.artifacts
    assert payload["config_hash"] == ex.config_hash(cfg)
    assert payload["kind"] == kind
    assert len(payload["trial_seeds"]) == cfg.trials
    # recorded digests match the bytes on disk
    for name, digest in payload["artifact_sha256"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    # every plot ships its exact data as a CSV twin
    for name in on_disk:
        if name.endswith(".svg"):
            assert name[:-4] + ".csv" in on_disk


@pytest.mark.parametrize("kind,over", [
    ("sample", {}),
    ("spectrum", {"trials": 1}),
    ("circular-law", {"z_grid": (0.3 + 0j,)}),
    ("sv-regimes", {"z_grid": (0.5 + 0j,)}),
    ("normals", {"n": 36, "ic_size": 4}),
    ("anticonc", {}),
])
def test_rerun_bit_identical(tmp_path, kind, over):
    cfg = _cfg(kind, **over)
    ex.run(cfg, tmp_path / "a")
    ex.run(cfg, tmp_path / "b")
    names = sorted(p.name for p in (tmp_path / "a").iterdir()
                   if p.name != "timing.log")
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_threaded_run_merges_in_trial_order(tmp_path):
    cfg = _cfg("sample", trials=4)
    ex.run(cfg, tmp_path / "serial", threads=1)
    ex.run(cfg, tmp_path / "pool", threads=4)
    for name in sorted(p.name for p in (tmp_path / "serial").iterdir()):
        if name == "timing.log":
            continue
        assert (tmp_path / "serial" / name).read_bytes() == \
            (tmp_path / "pool" / name).read_bytes()


def test_sample_kind_matrices_parse(tmp_path):
    from regspectra import digraph
    _, rec, out = _run(tmp_path, "sample")
    g = digraph.read_matrix(out / "matrix_000.txt")
    assert g.n == 24 and g.d == 3


def test_report_kind_aggregates(tmp_path):
    _run(tmp_path, "sample")
    _run(tmp_path, "anticonc")
    cfg = _cfg("report", input=str(tmp_path))
    rec = ex.run(cfg, tmp_path / "rep")
    rows = (tmp_path / "rep" / "report.csv").read_text().strip().splitlines()
    assert rows[0].startswith("run,kind,config_hash")
    kinds = {line.split(",")[1] for line in rows[1:]}
    assert {"sample", "anticonc"} <= kinds


def test_kernel_error_leaves_no_artifacts(tmp_path, monkeypatch):
    cfg = _cfg("sample")

    def boom(cfg, threads):
        raise ex.KernelError("synthetic failure")

    monkeypatch.setitem(ex._DISPATCH, "sample", boom)
    out = tmp_path / "failed"
    with pytest.raises(ex.KernelError):
        ex.run(cfg, out)
    assert not out.exists() or not any(out.iterdir())


def test_spectrum_reads_input_matrix(tmp_path):
    from regspectra import digraph
    from regspectra.rng import generator
    g = digraph.sample(12, 3, generator(5))
    path = tmp_path / "input.txt"
    digraph.write_matrix(path, g)
    cfg = _cfg("spectrum", input=str(path), trials=1)
    ex.run(cfg, tmp_path / "sp")
    rows = (tmp_path / "sp" / "spectrum.csv").read_text().strip().splitlines()
    assert len(rows) == 13  # header + 12 eigenvalue rows
    # regular digraph: leading eigenvalue equals d
    first = rows[1].split(",")
    assert abs(float(first[1]) - 3.0) < 1e-8 and abs(float(first[2])) < 1e-8


def test_spectrum_missing_input_is_config_error(tmp_path):
    cfg = _cfg("spectrum", input=str(tmp_path / "absent.txt"))
    with pytest.raises(ex.ConfigError):
        ex.run(cfg, tmp_path / "out")

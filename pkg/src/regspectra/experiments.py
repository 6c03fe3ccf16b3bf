"""Experiment orchestration: configs, kind dispatch, artifact persistence.

Configs are flat key=value text with an explicit schema version; unknown
keys are a hard error.  Every run writes its artifacts atomically (temp +
rename) into one output directory: a deterministic ``run.json`` (config,
config hash, per-trial seeds, artifact names and digests, library version)
plus kind-specific CSV/JSON/SVG files.  Rerunning the same config yields
bit-identical payloads; wall-clock time therefore goes to a ``timing.log``
sidecar excluded from the determinism contract.

Trials are independent tasks keyed by trial index; with ``threads > 1`` they
run on a thread pool and results merge in trial order regardless of
completion order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, anticonc, digraph, svg
from . import hermitization as hz
from . import linalg, normals
from .rng import trial_generator, trial_seed

SCHEMA_VERSION = 1

KINDS = ("sample", "spectrum", "circular-law", "sv-regimes", "normals",
         "anticonc", "report")


class ConfigError(ValueError):
    """Malformed or out-of-range configuration (CLI exit code 2)."""


class KernelError(RuntimeError):
    """Numerical kernel failure during a run (CLI exit code 3)."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Flat experiment configuration; one dataclass covers every kind, and
    each kind reads the knobs it documents (the rest keep their defaults)."""

    kind: str = ""
    n: int = 100
    d: int = 4
    trials: int = 1
    master_seed: int = 0
    z_grid: tuple = ((0.3 + 0.0j), (0.8 + 0.0j), (1.5 + 0.0j))
    method: str = "auto"          # digraph sampler: auto | rejection | switch
    input: str = ""               # matrix path (spectrum) or run dir (report)
    T: float = 1.0                # tail threshold
    C_bulk: float = 1.0
    c_bulk: float = 0.1
    C_inter: float = 1.0
    C_dist: float = 1.0           # prefix-distance threshold constant
    alpha: float = 1.0            # strong-correlation alpha
    beta: float = 0.25            # strong-correlation beta
    gamma: float = normals.GAMMA
    a: float = 0.5                # structure pivot fraction
    rho: float = 0.05
    delta: float = 0.05
    L: float = 0.0                # 0 = use the default 1/(2 sqrt(C delta))
    floor: float = hz.LOG_FLOOR
    ic_size: int = 0              # 0 = max(2, round(n/d^3))
    row_index: int = 0            # 0 = n - max(1, n // 20)

    def resolved_ic(self) -> int:
        return self.ic_size if self.ic_size else max(2, round(self.n / self.d ** 3))

    def resolved_L(self) -> float:
        return self.L if self.L else anticonc.default_L(self.delta)

    def resolved_row_index(self) -> int:
        return self.row_index if self.row_index else self.n - max(1, self.n // 20)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    f = _FIELDS[key]
    raw = raw.strip()
    try:
        if f.type in ("int",):
            return int(raw)
        if f.type in ("float",):
            return float(raw)
        if f.type in ("tuple",):
            return tuple(complex(tok.strip()) for tok in raw.split(",") if tok.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse key=value config text (comments with #, blank lines ignored)."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        if key == "schema_version":
            if raw.strip() != str(SCHEMA_VERSION):
                raise ConfigError(
                    f"unsupported schema_version {raw.strip()!r} (expected {SCHEMA_VERSION})")
            continue
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw)
    if "schema_version" not in text:
        raise ConfigError("config must declare schema_version")
    return ExperimentConfig(**values)


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown kind {cfg.kind!r} (expected one of {KINDS})")
    if cfg.kind == "report":
        if not cfg.input:
            raise ConfigError("report kind needs input=<directory of runs>")
        return
    checks = [
        (cfg.n >= 1, "n must be >= 1"),
        (0 <= cfg.d <= cfg.n, "need 0 <= d <= n"),
        (cfg.trials >= 1, "trials must be >= 1"),
        (0 <= cfg.master_seed < 2 ** 64, "master_seed must fit in 64 bits"),
        (cfg.method in ("auto", "rejection", "switch"), "unknown sampler method"),
        (cfg.T > 0, "T must be positive"),
        (cfg.floor > 0, "floor must be positive"),
        (cfg.alpha > 0, "alpha must be positive"),
        (0 < cfg.beta <= 0.5, "beta must lie in (0, 1/2]"),
        (0 < cfg.a < 1, "a must lie in (0, 1)"),
        (cfg.gamma > 0, "gamma must be positive"),
        (cfg.rho > 0, "rho must be positive"),
        (cfg.delta > 0, "delta must be positive"),
        (cfg.L >= 0, "L must be nonnegative"),
        (cfg.C_bulk > 0 and cfg.C_inter > 0 and cfg.C_dist > 0 and cfg.c_bulk > 0,
         "bound constants must be positive"),
        (cfg.ic_size >= 0, "ic_size must be nonnegative"),
        (0 <= cfg.row_index <= cfg.n, "row_index outside [0, n]"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def canonical_config(cfg: ExperimentConfig) -> str:
    """Canonical serialized form used for hashing and run.json embedding."""
    lines = [f"schema_version={SCHEMA_VERSION}"]
    for name in sorted(_FIELDS):
        lines.append(f"{name}={getattr(cfg, name)!r}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_config(cfg).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Artifact plumbing
# ---------------------------------------------------------------------------

def _num(x) -> str:
    """Deterministic CSV cell: shortest round-trip repr for floats."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _jsonl(records) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


@dataclass
class RunRecord:
    """Result of one orchestrated run (run.json mirrors all but out_dir and
    wall_clock; wall-clock lives in the timing.log sidecar so payloads stay
    bit-identical across reruns)."""

    kind: str
    config_hash: str
    out_dir: str
    artifacts: list
    trial_seeds: list
    library_version: str
    wall_clock: float


def _run_payload(cfg: ExperimentConfig, artifacts: dict, seeds: list) -> str:
    digests = {name: hashlib.sha256(text.encode()).hexdigest()
               for name, text in artifacts.items()}
    cfg_json = {}
    for name in sorted(_FIELDS):
        v = getattr(cfg, name)
        cfg_json[name] = [[z.real, z.imag] for z in v] if name == "z_grid" else v
    return _json({
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.kind,
        "config": cfg_json,
        "config_hash": config_hash(cfg),
        "trial_seeds": [int(s) for s in seeds],
        "artifacts": sorted([*artifacts, "run.json"]),
        "artifact_sha256": digests,
        "library_version": __version__,
    })


def _map_trials(worker, trials: int, threads: int) -> list:
    """Run trial workers, merging results by trial index."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, range(trials)))
    return [worker(t) for t in range(trials)]


def _wrap_kernel_errors(fn):
    try:
        return fn()
    except (linalg.ConvergenceError, ArithmeticError) as exc:
        raise KernelError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------

def _kind_sample(cfg, threads):
    def worker(t):
        g = digraph.sample(cfg.n, cfg.d, trial_generator(cfg.master_seed, t),
                           method=cfg.method)
        return digraph.to_text(g)

    texts = _map_trials(worker, cfg.trials, threads)
    arts = {f"matrix_{t:03d}.txt": text for t, text in enumerate(texts)}
    resolved = cfg.method if cfg.method != "auto" else (
        "rejection" if cfg.d <= 4 else "switch")
    arts["samples.csv"] = _csv(
        ("trial", "seed", "n", "d", "method"),
        [(t, trial_seed(cfg.master_seed, t), cfg.n, cfg.d, resolved)
         for t in range(cfg.trials)])
    return arts


def _spectrum_input(cfg) -> digraph.RegularDigraph:
    if cfg.input:
        try:
            return digraph.read_matrix(cfg.input)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read matrix {cfg.input!r}: {exc}") from exc
    return digraph.sample(cfg.n, cfg.d, trial_generator(cfg.master_seed, 0),
                          method=cfg.method)


def _kind_spectrum(cfg, threads):
    g = _spectrum_input(cfg)
    summary = linalg.spectral_summary(g.adjacency)
    rows = [(k, ev.real, ev.imag, s, be) for k, (ev, s, be) in enumerate(
        zip(summary.eigenvalues, summary.singular_values, summary.backward_errors))]
    arts = {
        "spectrum.csv": _csv(("index", "re", "im", "s", "backward_error"), rows),
        "scatter.svg": svg.render_scatter(
            summary.eigenvalues, overlay_radius=max(math.sqrt(g.d), 1.0),
            title=f"spectrum n={g.n} d={g.d}"),
        "scatter.csv": _csv(("re", "im"), [(ev.real, ev.imag)
                                           for ev in summary.eigenvalues]),
    }
    return arts


def _kind_circular_law(cfg, threads):
    law = hz.CircularLaw()

    def worker(t):
        g = digraph.sample(cfg.n, cfg.d, trial_generator(cfg.master_seed, t),
                           method=cfg.method)
        B0 = hz.bz_matrix(g, 0.0, cfg.d)
        eigs = linalg.eigenvalues(B0)
        mu = hz.esd(eigs)
        radial = hz.radial_cdf_distance(mu, law)
        angular = hz.angular_cdf_distance(mu)
        inside = float(np.mean(np.abs(eigs) <= 1.1))
        pots = []
        for z in cfg.z_grid:
            s = linalg.singular_values(hz.build_shifted(
                g.adjacency, hz.ShiftSpec(z=z, scale=1.0 / math.sqrt(cfg.d))))
            lp = hz.log_potential_empirical(s, cfg.floor)
            pots.append((z, lp.value, hz.log_potential_circular(z), lp.floored))
        return eigs, radial, angular, inside, pots

    results = _wrap_kernel_errors(
        lambda: _map_trials(worker, cfg.trials, threads))
    radial_rows = [(t, trial_seed(cfg.master_seed, t), r, a, frac)
                   for t, (_, r, a, frac, _) in enumerate(results)]
    pot_rows = [(z.real, z.imag, u_emp, u_circ, floored, t)
                for t, (_, _, _, _, pots) in enumerate(results)
                for (z, u_emp, u_circ, floored) in pots]
    last_eigs = results[-1][0]
    radii = np.sort(np.abs(last_eigs))
    cdf_rows = [(float(r), (i + 1) / radii.size, law.radial_cdf(float(r)))
                for i, r in enumerate(radii)]
    return {
        "radial.csv": _csv(("trial", "seed", "radial_distance",
                            "angular_distance", "frac_inside_1p1"), radial_rows),
        "potentials.csv": _csv(("re_z", "im_z", "U_empirical", "U_circular",
                                "floored_count", "trial"), pot_rows),
        "scatter.svg": svg.render_scatter(
            last_eigs, overlay_radius=1.0,
            title=f"rescaled spectrum n={cfg.n} d={cfg.d}"),
        "scatter.csv": _csv(("re", "im"),
                            [(ev.real, ev.imag) for ev in last_eigs]),
        "radial_cdf.svg": svg.render_radial_cdf(
            last_eigs, law, title=f"radial cdf n={cfg.n} d={cfg.d}"),
        "radial_cdf.csv": _csv(("r", "F_empirical", "F_law"), cdf_rows),
    }


def _kind_sv_regimes(cfg, threads):
    def worker(t):
        g = digraph.sample(cfg.n, cfg.d, trial_generator(cfg.master_seed, t),
                           method=cfg.method)
        out = []
        for z in cfg.z_grid:
            s = linalg.singular_values(hz.bz_matrix(g, z, cfg.d))
            tail = hz.tail_log_sum(s, cfg.T, cfg.d, C=cfg.C_bulk, floor=cfg.floor)
            rpt = hz.sv_bound_check(s, cfg.d, z, C_bulk=cfg.C_bulk,
                                    c_bulk=cfg.c_bulk, C_inter=cfg.C_inter)
            out.append((z, s, tail, rpt))
        return out

    results = _wrap_kernel_errors(
        lambda: _map_trials(worker, cfg.trials, threads))
    sv_rows, tail_rows, bound_rows = [], [], []
    for t, per_z in enumerate(results):
        for z, s, tail, rpt in per_z:
            sv_rows.extend((t, z.real, z.imag, k + 1, v) for k, v in enumerate(s))
            tail_rows.append((t, z.real, z.imag, tail.T, *tail.regime_sums,
                              tail.large_sum, tail.tail_sum, tail.floored,
                              *tail.boundaries))
            for chk in (rpt.smallest, rpt.bulk, rpt.intermediate):
                bound_rows.append((t, z.real, z.imag, chk.name, chk.applicable,
                                   chk.holds, chk.checked, chk.tightest_k,
                                   chk.margin))
    z0, s0, _, rpt0 = results[0][0]
    lo, hi = hz.intermediate_window(cfg.n, cfg.d)
    k1 = hz.bulk_window(cfg.n, cfg.d, cfg.C_bulk)
    root_d = math.sqrt(cfg.d)
    prof_rows = []
    for k, v in enumerate(s0, start=1):
        b_bulk = cfg.c_bulk * (cfg.n - k) / cfg.n if k <= k1 else ""
        b_inter = (math.exp(-cfg.C_inter * (cfg.n / (cfg.n - k)) ** (1 / 144))
                   / root_d if lo <= k <= hi else "")
        b_small = cfg.n ** (-6.0) / root_d if rpt0.smallest.applicable else ""
        prof_rows.append((k, v, b_small, b_bulk, b_inter))
    return {
        "svprofile.csv": _csv(("trial", "re_z", "im_z", "k", "s"), sv_rows),
        "tails.csv": _csv(("trial", "re_z", "im_z", "T", "I1", "I2", "I3", "I4",
                           "large_sum", "tail_sum", "floored", "b1", "b2", "b3"),
                          tail_rows),
        "bounds.csv": _csv(("trial", "re_z", "im_z", "check", "applicable",
                            "holds", "checked", "tightest_k", "margin"),
                           bound_rows),
        "profile.svg": svg.render_sv_profile(
            s0, bound_report=rpt0, floor=cfg.floor,
            title=f"sv profile n={cfg.n} d={cfg.d} z={z0.real:g}{z0.imag:+g}i"),
        "profile.csv": _csv(("k", "s", "bound_smallest", "bound_bulk",
                             "bound_intermediate"), prof_rows),
    }


def _kind_normals(cfg, threads):
    ic = cfg.resolved_ic()
    z = cfg.z_grid[0] if cfg.z_grid else 0.3 + 0.0j

    def worker(t):
        rng = trial_generator(cfg.master_seed, t)
        g = digraph.sample(cfg.n, cfg.d, rng, method=cfg.method)
        B = hz.bz_matrix(g, z, cfg.d)
        keep = np.sort(rng.choice(cfg.n, size=cfg.n - ic, replace=False))
        Q = linalg.orthonormal_rows(B[keep])
        gauss = normals.sample_gaussian(cfg.n, rng)
        y = normals.random_normal(Q, gauss, orthonormal=True)
        lab = normals.classify_normal(y, ic, cfg.a, gamma=cfg.gamma)
        return keep, Q, lab

    results = _wrap_kernel_errors(
        lambda: _map_trials(worker, cfg.trials, threads))
    struct_rows = []
    for t, (_, _, lab) in enumerate(results):
        prof = lab.level_counts
        struct_rows.append((
            t, trial_seed(cfg.master_seed, t), lab.label, lab.undecided, lab.k,
            lab.pivot, lab.steep_witness, lab.decay_margin, lab.level_radius,
            lab.level_cap, prof.count if prof else "", prof.count_2rho if prof else ""))
    Q0 = results[0][1]
    records = normals.orderstat_experiments(Q0, cfg.trials * 20, cfg.master_seed)
    clusters = normals.build_clusters(Q0, cfg.alpha, cfg.beta)
    cluster_rows = [(i, len(c), int(a)) for i, (c, a) in enumerate(
        zip(clusters.clusters, clusters.anchors))]
    return {
        "structure.csv": _csv(
            ("trial", "seed", "label", "undecided", "k", "pivot", "steep_witness",
             "decay_margin", "level_radius", "level_cap", "level_count",
             "level_count_2rho"), struct_rows),
        "orderstat.json": _json([r.as_dict() for r in records]),
        "clusters.csv": _csv(("cluster", "size", "anchor"), cluster_rows),
    }


def _kind_anticonc(cfg, threads):
    J = tuple(range(cfg.n // 2 + 1))
    u = cfg.n - 1
    if u in J:
        raise ConfigError("n too small for the default J, u split")
    L = cfg.resolved_L()
    if not 1.0 <= L <= 1.0 / (2.0 * cfg.delta):
        raise ConfigError(f"resolved L = {L:.4g} outside [1, 1/(2 delta)]")

    def worker(t):
        rng = trial_generator(cfg.master_seed, t)
        g = digraph.sample(cfg.n, cfg.d, rng, method=cfg.method)
        I0 = anticonc.sample_I(J, cfg.n, rng)
        T = sorted(set(int(i) for i in I0) | {u})
        disjoint = anticonc.supports_disjoint(g, T)
        S = anticonc.support_union(g, T)
        counts, collided = anticonc.coupling_sampler(S, cfg.d, rng, n=cfg.n)
        spec = anticonc.ResamplerSpec(g, J, u, I0=tuple(int(i) for i in I0))
        x, method = anticonc.sample_X(spec, rng)
        return g, disjoint, int(S.size), collided, method, x

    results = _wrap_kernel_errors(
        lambda: _map_trials(worker, cfg.trials, threads))
    records = []
    for t, (gr, disjoint, s_size, collided, method, x) in enumerate(results):
        seed = int(trial_seed(cfg.master_seed, t))
        records.append({
            "experiment_id": "disjointness", "seed": seed,
            "params": {"n": cfg.n, "d": cfg.d, "J_size": len(J), "u": u, "trial": t},
            "outcome": {"disjoint": bool(disjoint)},
            "derived_quantities": {"support_union": s_size},
        })
        records.append({
            "experiment_id": "coupling", "seed": seed,
            "params": {"n": cfg.n, "d": cfg.d, "S_size": s_size, "trial": t},
            "outcome": {"collision": bool(collided)},
            "derived_quantities": {"ceiling": cfg.d ** 2 / max(s_size, 1)},
        })
        records.append({
            "experiment_id": "resample-x", "seed": seed,
            "params": {"n": cfg.n, "d": cfg.d, "trial": t},
            "outcome": {"support": [int(j) for j in np.nonzero(x)[0]]},
            "derived_quantities": {"method": method},
        })
    verdicts = _wrap_kernel_errors(lambda: anticonc.distance_implication_experiment(
        cfg.n, cfg.d, cfg.z_grid[0] if cfg.z_grid else 0.3, cfg.rho, cfg.delta,
        L, cfg.trials, cfg.master_seed, method=cfg.method))
    for t, v in enumerate(verdicts):
        records.append({
            "experiment_id": "sv-implication",
            "seed": int(trial_seed(cfg.master_seed, t)),
            "params": {"n": cfg.n, "d": cfg.d, "rho": cfg.rho, "delta": cfg.delta,
                       "L": L, "trial": t},
            "outcome": {"applicable": v.applicable, "holds": v.holds,
                        "violated_implication": v.violated_implication},
            "derived_quantities": {"k": v.k, "s_k": None if math.isnan(v.s_k) else v.s_k,
                                   "threshold": v.threshold,
                                   "violations": v.violations,
                                   "allowance": v.allowance},
        })
    summary_rows = [
        ("disjointness_freq", np.mean([r[1] for r in results])),
        ("collision_freq", np.mean([r[3] for r in results])),
        ("implication_violations", sum(v.violated_implication for v in verdicts)),
        ("implication_applicable", sum(v.applicable for v in verdicts)),
    ]
    return {
        "records.jsonl": _jsonl(records),
        "summary.csv": _csv(("metric", "value"), summary_rows),
    }


def _kind_report(cfg, threads):
    root = Path(cfg.input)
    if not root.is_dir():
        raise ConfigError(f"report input {cfg.input!r} is not a directory")
    run_files = sorted(root.glob("*/run.json")) + (
        [root / "run.json"] if (root / "run.json").is_file() else [])
    rows = []
    for rf in sorted(run_files):
        try:
            payload = json.loads(rf.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"unreadable run file {rf}: {exc}") from exc
        rows.append((rf.parent.name, payload.get("kind", ""),
                     payload.get("config_hash", ""),
                     len(payload.get("artifacts", [])),
                     payload.get("library_version", "")))
    return {"report.csv": _csv(
        ("run", "kind", "config_hash", "artifacts", "library_version"), rows)}


_DISPATCH = {
    "sample": _kind_sample,
    "spectrum": _kind_spectrum,
    "circular-law": _kind_circular_law,
    "sv-regimes": _kind_sv_regimes,
    "normals": _kind_normals,
    "anticonc": _kind_anticonc,
    "report": _kind_report,
}


def run(cfg: ExperimentConfig, out_dir, *, threads: int = 1) -> RunRecord:
    """Execute one experiment and persist its artifacts.

    Artifacts are computed fully before anything is written, then written
    atomically one by one; a kernel failure therefore leaves no partial
    artifacts (any files already written are removed on a late failure).
    """
    validate_config(cfg)
    out = Path(out_dir)
    started = time.monotonic()
    artifacts = _DISPATCH[cfg.kind](cfg, max(int(threads), 1))
    seeds = [trial_seed(cfg.master_seed, t) for t in range(cfg.trials)]
    artifacts["run.json"] = _run_payload(cfg, artifacts, seeds)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name in sorted(artifacts):
            _atomic_write(out / name, artifacts[name])
            written.append(out / name)
    except OSError:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    wall = time.monotonic() - started
    (out / "timing.log").write_text(f"wall_clock_seconds={wall:.3f}\n")
    return RunRecord(
        kind=cfg.kind, config_hash=config_hash(cfg), out_dir=str(out),
        artifacts=sorted(artifacts), trial_seeds=[int(s) for s in seeds],
        library_version=__version__, wall_clock=wall)
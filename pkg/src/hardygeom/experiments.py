"""Experiment orchestration: configs in, result records out.

A run is: parse + validate a TOML config, dispatch on the experiment kind,
collect scalar metrics and named tables, persist everything atomically
(result.json plus tables/*.csv, optionally plots/*.svg).  Tables never
contain timestamps and all randomness flows through one seeded generator,
so re-running a config byte-reproduces every table; the worker-pool fanout
only maps pure functions with order-preserving collection, so the output
is parallelism-invariant.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .constructions import (
    DyadicExampleSpec,
    counterexample_build,
    counterexample_grid,
    counterexample_verify,
    dyadic_report,
    mjn_asymptotic,
)
from .disc import BlaschkeProduct, DiscGrid, leave_one_out_delta
from .interpolation import (
    InterpolationProblem,
    interpolation_dashboard,
    min_multiplier_norm,
    separation_report,
)
from .kernels import KernelVector, kernel_inner, kernel_inner_series
from .nodes import JordanSpec, model_space_basis
from .subspaces import (
    Subspace,
    SubspaceSystem,
    bessel_detail,
    riesz_bounds,
    sin_angle,
    sin_angle_to_span,
)

__all__ = [
    "EXPERIMENT_KINDS",
    "RANDOMIZED_KINDS",
    "ConfigError",
    "NumericalError",
    "ExperimentConfig",
    "Table",
    "ResultRecord",
    "parse_config",
    "config_from_mapping",
    "run",
    "write_record",
    "emit_plot",
    "default_plots",
    "ENV_OUT",
]

EXPERIMENT_KINDS = (
    "delta",
    "bessel",
    "riesz",
    "interp",
    "dyadic",
    "counterexample",
    "kernel-selftest",
)
RANDOMIZED_KINDS = ("bessel", "counterexample", "kernel-selftest")
ENV_OUT = "HARDYGEOM_OUT"

# config section for kernel-selftest (bare TOML key, no hyphen)
_SECTION_NAME = {"kernel-selftest": "selftest"}


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Computation failed; message names the responsible module (exit 3)."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    kind: str
    seed: int | None
    grid_k: int
    grid_base: int
    jobs: int
    out_dir: str | None
    plot: bool
    params: dict

    def echo(self) -> dict:
        """JSON-safe copy of everything that determines the run."""
        return {
            "kind": self.kind,
            "seed": self.seed,
            "grid": {"k": self.grid_k, "base": self.grid_base},
            "jobs": self.jobs,
            "plot": self.plot,
            "params": self.params,
        }


@dataclass(frozen=True, eq=False)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def column(self, name: str) -> list:
        try:
            i = self.columns.index(name)
        except ValueError:
            raise ConfigError(f"unknown column {name!r}") from None
        return [row[i] for row in self.rows]


@dataclass(frozen=True, eq=False)
class ResultRecord:
    config: dict
    metrics: dict
    tables: dict[str, Table]
    provenance: dict

    def table(self, name: str) -> Table:
        try:
            return self.tables[name]
        except KeyError:
            raise ConfigError(
                f"unknown table {name!r}; have {sorted(self.tables)}"
            ) from None


# ------------------------------------------------------------- config


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _as_int(value, name: str, lo=None, hi=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{name} must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{name} must be <= {hi}, got {value}")
    return value


def _as_real(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    return v


def _as_complex(value, name: str) -> complex:
    # [re, im] pairs in config files
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(v, bool) for v in value)
        or not all(isinstance(v, (int, float)) for v in value)
    ):
        raise ConfigError(f"{name} must be a [re, im] pair, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _parse_nodes(entries, name: str) -> list[JordanSpec]:
    _require(
        isinstance(entries, list) and entries,
        f"{name} must be a nonempty array of node tables",
    )
    nodes = []
    for i, entry in enumerate(entries):
        _require(isinstance(entry, Mapping), f"{name}[{i}] must be a table")
        eigs = entry.get("eigenvalues")
        _require(
            isinstance(eigs, list) and eigs,
            f"{name}[{i}].eigenvalues must be a nonempty array",
        )
        lam = [_as_complex(e, f"{name}[{i}].eigenvalues") for e in eigs]
        sizes = entry.get("block_sizes")
        if sizes is None:
            sizes = [1] * len(lam)
        _require(
            isinstance(sizes, list) and len(sizes) == len(lam),
            f"{name}[{i}].block_sizes must match eigenvalues",
        )
        sizes = [_as_int(s, f"{name}[{i}].block_sizes", lo=1) for s in sizes]
        try:
            nodes.append(JordanSpec(tuple(zip(lam, sizes))))
        except ValueError as e:
            raise ConfigError(f"{name}[{i}]: {e}") from None
    return nodes


def _parse_products(entries, name: str) -> list[BlaschkeProduct]:
    _require(
        isinstance(entries, list) and entries,
        f"{name} must be a nonempty array of product tables",
    )
    out = []
    for i, entry in enumerate(entries):
        _require(isinstance(entry, Mapping), f"{name}[{i}] must be a table")
        zeros = entry.get("zeros")
        _require(
            isinstance(zeros, list) and zeros,
            f"{name}[{i}].zeros must be a nonempty array",
        )
        pts = [_as_complex(z, f"{name}[{i}].zeros") for z in zeros]
        mults = entry.get("multiplicities")
        if mults is None:
            mults = [1] * len(pts)
        _require(
            isinstance(mults, list) and len(mults) == len(pts),
            f"{name}[{i}].multiplicities must match zeros",
        )
        mults = [
            _as_int(m, f"{name}[{i}].multiplicities", lo=1) for m in mults
        ]
        try:
            out.append(BlaschkeProduct.from_pairs(zip(pts, mults)))
        except ValueError as e:
            raise ConfigError(f"{name}[{i}]: {e}") from None
    return out


_ALPHA_RULES = {
    "2^-n": lambda n: 2.0**-n,
    "1/n": lambda n: 1.0 / n,
    "const": None,  # uses alpha_const
}


def config_from_mapping(data: Mapping, defaults: Mapping | None = None):
    """Validate a raw mapping (parsed TOML) into an ExperimentConfig.

    `defaults` supplies command-line overrides: any of kind, seed, grid_k,
    jobs, out, plot.  Everything is checked before any computation runs.
    """
    defaults = dict(defaults or {})
    _require(isinstance(data, Mapping), "config root must be a table")
    data = dict(data)

    kind = defaults.get("kind") or data.get("kind")
    _require(kind is not None, "config needs a 'kind'")
    _require(
        kind in EXPERIMENT_KINDS,
        f"unknown kind {kind!r}; expected one of {EXPERIMENT_KINDS}",
    )
    if data.get("kind") is not None:
        _require(
            data["kind"] in EXPERIMENT_KINDS,
            f"unknown kind {data['kind']!r}",
        )
        _require(
            data["kind"] == kind,
            f"config kind {data['kind']!r} does not match requested {kind!r}",
        )

    seed = defaults.get("seed", data.get("seed"))
    if seed is not None:
        seed = _as_int(seed, "seed", lo=0, hi=2**64 - 1)
    _require(
        seed is not None or kind not in RANDOMIZED_KINDS,
        f"kind {kind!r} is randomized; a seed is mandatory",
    )

    grid = data.get("grid", {})
    _require(isinstance(grid, Mapping), "[grid] must be a table")
    grid_k = defaults.get("grid_k", grid.get("k", 10))
    grid_k = _as_int(grid_k, "grid.k", lo=0, hi=24)
    grid_base = _as_int(grid.get("base", 16), "grid.base", lo=1, hi=4096)

    run_tbl = data.get("run", {})
    _require(isinstance(run_tbl, Mapping), "[run] must be a table")
    jobs = defaults.get("jobs", run_tbl.get("jobs", 0))
    jobs = _as_int(jobs, "jobs", lo=0, hi=1024)
    if jobs == 0:
        jobs = os.cpu_count() or 1

    out_dir = defaults.get("out") or data.get("out")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError("out must be a path string")

    plot = bool(defaults.get("plot", data.get("plot", False)))

    section = _SECTION_NAME.get(kind, kind)
    raw = data.get(section, {})
    _require(isinstance(raw, Mapping), f"[{section}] must be a table")
    params = _validate_params(kind, dict(raw))

    return ExperimentConfig(
        kind=kind,
        seed=seed,
        grid_k=grid_k,
        grid_base=grid_base,
        jobs=jobs,
        out_dir=out_dir,
        plot=plot,
        params=params,
    )


def _validate_params(kind: str, raw: dict) -> dict:
    if kind == "delta":
        products = _parse_products(raw.get("products"), "delta.products")
        refinements = _as_int(raw.get("refinements", 1), "refinements", 0, 6)
        return {
            "products": [
                {
                    "zeros": [[z.real, z.imag] for z in p.zeros],
                    "multiplicities": list(p.multiplicities),
                }
                for p in products
            ],
            "refinements": refinements,
        }
    if kind in ("bessel", "riesz"):
        nodes = _parse_nodes(raw.get("nodes"), f"{kind}.nodes")
        out = {"nodes": _echo_nodes(nodes)}
        if kind == "bessel":
            out["samples"] = _as_int(
                raw.get("samples", 100), "samples", 1, 10**6
            )
        return out
    if kind == "interp":
        nodes = _parse_nodes(raw.get("nodes"), "interp.nodes")
        targets = raw.get("targets")
        _require(
            isinstance(targets, list) and len(targets) == len(nodes),
            "interp.targets must be an array matching nodes",
        )
        targets = [_as_complex(t, "interp.targets") for t in targets]
        return {
            "nodes": _echo_nodes(nodes),
            "targets": [[t.real, t.imag] for t in targets],
        }
    if kind == "dyadic":
        alphas = raw.get("alphas")
        if alphas is None:
            rule = raw.get("alpha_rule", "2^-n")
            _require(
                rule in _ALPHA_RULES,
                f"alpha_rule must be one of {sorted(_ALPHA_RULES)}",
            )
            n_max = _as_int(raw.get("n_max", 6), "n_max", 1, 10)
            if rule == "const":
                c = _as_real(raw.get("alpha_const", 0.5), "alpha_const")
                alphas = [c] * n_max
            else:
                alphas = [_ALPHA_RULES[rule](n) for n in range(1, n_max + 1)]
        else:
            _require(isinstance(alphas, list), "alphas must be an array")
            alphas = [_as_real(a, "alphas") for a in alphas]
        try:
            spec = DyadicExampleSpec(alphas)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return {"alphas": list(spec.alphas)}
    if kind == "counterexample":
        counts = raw.get("block_counts")
        if counts is None:
            n_max = _as_int(raw.get("n_max", 4), "n_max", 1, 12)
            counts = [n + 3 for n in range(1, n_max + 1)]
        else:
            _require(isinstance(counts, list), "block_counts must be an array")
            counts = [_as_int(m, "block_counts", lo=2) for m in counts]
        return {
            "block_counts": counts,
            "bessel_target": _as_real(
                raw.get("bessel_target", 1.0), "bessel_target"
            ),
            "riesz_cap": _as_real(raw.get("riesz_cap", 2.0), "riesz_cap"),
            "colorings": _as_int(
                raw.get("colorings", 200), "colorings", 1, 10**6
            ),
        }
    if kind == "kernel-selftest":
        return {
            "samples": _as_int(raw.get("samples", 50), "samples", 1, 10**4),
            "max_order": _as_int(raw.get("max_order", 6), "max_order", 0, 32),
            "max_radius": _as_real(raw.get("max_radius", 0.95), "max_radius"),
        }
    raise ConfigError(f"unknown kind {kind!r}")


def _echo_nodes(nodes: Sequence[JordanSpec]) -> list[dict]:
    return [
        {
            "eigenvalues": [[lam.real, lam.imag] for lam, _ in n.blocks],
            "block_sizes": [size for _, size in n.blocks],
        }
        for n in nodes
    ]


def parse_config(path, defaults: Mapping | None = None) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config parse error in {path}: {e}") from None
    return config_from_mapping(data, defaults)


# --------------------------------------------------------------- running


def _map_jobs(fn: Callable, items: Sequence, jobs: int) -> list:
    # order-preserving map; results are independent of the worker count
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _rebuild_nodes(echo: list[dict]) -> list[JordanSpec]:
    return [
        JordanSpec(
            tuple(
                (complex(re, im), size)
                for (re, im), size in zip(
                    entry["eigenvalues"], entry["block_sizes"]
                )
            )
        )
        for entry in echo
    ]


def run(config: ExperimentConfig) -> ResultRecord:
    """Execute one experiment; deterministic for fixed config + seed."""
    grid = DiscGrid.dyadic(k=config.grid_k, base=config.grid_base)
    dispatch = {
        "delta": (_run_delta, "disc"),
        "bessel": (_run_bessel, "subspaces"),
        "riesz": (_run_riesz, "subspaces"),
        "interp": (_run_interp, "interpolation"),
        "dyadic": (_run_dyadic, "constructions"),
        "counterexample": (_run_counterexample, "constructions"),
        "kernel-selftest": (_run_selftest, "kernels"),
    }
    fn, module = dispatch[config.kind]
    try:
        metrics, tables, resolution = fn(config, grid)
    except (ConfigError, NumericalError):
        raise
    except (
        ValueError,
        ArithmeticError,
        np.linalg.LinAlgError,
    ) as e:
        raise NumericalError(f"{module}: {e}") from e
    provenance = {
        "artifact": "hardygeom",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "grid": resolution,
    }
    return ResultRecord(
        config=config.echo(),
        metrics=metrics,
        tables=tables,
        provenance=provenance,
    )


def _run_delta(config, grid):
    products = [
        BlaschkeProduct.from_pairs(
            zip(
                [complex(re, im) for re, im in p["zeros"]],
                p["multiplicities"],
            )
        )
        for p in config.params["products"]
    ]
    grids = [grid]
    for _ in range(config.params["refinements"]):
        grids.append(grids[-1].refined())
    estimates = _map_jobs(
        lambda g: leave_one_out_delta(products, g), grids, config.jobs
    )
    rows = tuple(
        (
            i,
            g.total_points,
            g.radii[-1],
            est.delta,
            est.argmin.real,
            est.argmin.imag,
        )
        for i, (g, est) in enumerate(zip(grids, estimates))
    )
    final = estimates[-1]
    metrics = {
        "delta": final.delta,
        "argmin_re": final.argmin.real,
        "argmin_im": final.argmin.imag,
        "products": len(products),
    }
    tables = {
        "delta_convergence": Table(
            ("refinement", "total_points", "max_radius", "delta",
             "argmin_re", "argmin_im"),
            rows,
        )
    }
    return metrics, tables, grids[-1].resolution()


def _model_system(nodes):
    subs = [Subspace.from_basis(model_space_basis(n)) for n in nodes]
    return subs, SubspaceSystem.build(subs)


def _run_bessel(config, grid):
    nodes = _rebuild_nodes(config.params["nodes"])
    subs, system = _model_system(nodes)
    detail = bessel_detail(system)
    rng = np.random.default_rng(config.seed)
    rank = detail.top_vector.shape[0]
    count = config.params["samples"]
    # sample 0 is the top eigenvector; the rest are random in the span
    coeffs = [detail.top_vector]
    for _ in range(count):
        v = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
        coeffs.append(v / np.linalg.norm(v))
    def projection_sum(c):
        return float(
            sum(
                np.linalg.norm(corr.conj().T @ c) ** 2
                for corr in detail.member_corrs
            )
        )
    sums = _map_jobs(projection_sum, coeffs, config.jobs)
    rows = tuple(
        (i, s, s / detail.bound if detail.bound > 0 else math.nan)
        for i, s in enumerate(sums)
    )
    metrics = {
        "bessel_bound": detail.bound,
        "members": len(subs),
        "total_dim": system.total_dim,
        "joint_rank": rank,
        "max_projection_sum": max(sums),
    }
    tables = {
        "member_norms": Table(
            ("member", "dim", "corr_norm"),
            tuple(
                (i, subs[i].dim, float(np.linalg.norm(c, 2)))
                for i, c in enumerate(detail.member_corrs)
            ),
        ),
        "samples": Table(("sample", "projection_sum", "ratio"), rows),
    }
    return metrics, tables, grid.resolution()


def _run_riesz(config, grid):
    nodes = _rebuild_nodes(config.params["nodes"])
    subs, system = _model_system(nodes)
    bounds = riesz_bounds(system)
    rows = []
    for i, sub in enumerate(subs):
        others = subs[:i] + subs[i + 1 :]
        s = (
            sin_angle_to_span(sub, others).sin
            if others
            else 1.0
        )
        rows.append((i, sub.dim, s))
    metrics = {
        "lower": bounds.lower,
        "upper": bounds.upper,
        "constant": bounds.constant,
        "riesz_at_tol": int(bounds.riesz_at_tol),
    }
    tables = {
        "members": Table(("member", "dim", "sin_to_others"), tuple(rows))
    }
    return metrics, tables, grid.resolution()


def _run_interp(config, grid):
    nodes = _rebuild_nodes(config.params["nodes"])
    targets = [complex(re, im) for re, im in config.params["targets"]]
    problem = InterpolationProblem(nodes, targets)
    norm = min_multiplier_norm(problem)
    sep = separation_report(nodes)
    dash = interpolation_dashboard(nodes, grid=grid)
    metrics = {
        "min_multiplier_norm": norm,
        "weak_constant": sep.weak_constant,
        "strong_constant": sep.strong_constant,
        "delta": dash.delta,
        "bessel": dash.bessel,
        "riesz_constant": dash.riesz.constant,
        "min_pseudo_hyperbolic": dash.min_pseudo_hyperbolic,
    }
    node_rows = tuple(
        (
            i,
            nodes[i].dim,
            max(abs(lam) for lam in nodes[i].eigenvalues()),
            targets[i].real,
            targets[i].imag,
        )
        for i in range(len(nodes))
    )
    subs = [Subspace.from_basis(model_space_basis(n)) for n in nodes]
    pair_rows = tuple(
        (i, j, sin_angle(subs[i], subs[j]).sin)
        for i in range(len(subs))
        for j in range(i + 1, len(subs))
    )
    tables = {
        "nodes": Table(
            ("node", "dim", "max_abs_eig", "target_re", "target_im"),
            node_rows,
        ),
        "pairwise_sin": Table(("i", "j", "sin"), pair_rows),
    }
    return metrics, tables, grid.resolution()


def _run_dyadic(config, grid):
    spec = DyadicExampleSpec(config.params["alphas"])
    report = dyadic_report(spec, grid=grid)
    level_rows = tuple(
        (
            n,
            spec.alphas[n - 1],
            spec.radius(n),
            report.level_riesz[n - 1],
            report.loo_products[n - 1],
            report.coherence_row_sums[n - 1],
        )
        for n in range(1, spec.n_max + 1)
    )
    coh_rows = []
    ratios = []
    for n in range(1, spec.n_max + 1):
        for j in range(1, spec.n_max + 1):
            exact = report.coherence_rows[n - 1, j - 1]
            approx = mjn_asymptotic(j, n, spec)
            ratio = exact / approx
            ratios.append(ratio)
            coh_rows.append((n, j, exact, approx, ratio))
    dash = report.dashboard
    metrics = {
        "alpha_sum": report.alpha_sum,
        "summable_proxy": int(report.summable_proxy),
        "ratio_min": min(ratios),
        "ratio_max": max(ratios),
        "envelope": max(max(ratios), 1.0 / min(ratios)),
        "loo_min": min(report.loo_products),
        "riesz_lower": dash.riesz.lower,
        "riesz_constant": dash.riesz.constant,
        "bessel": dash.bessel,
        "delta": dash.delta,
    }
    tables = {
        "levels": Table(
            ("level", "alpha", "radius", "gamma", "loo_product", "row_sum"),
            level_rows,
        ),
        "coherence": Table(
            ("n", "j", "exact", "asymptotic", "ratio"), tuple(coh_rows)
        ),
    }
    return metrics, tables, grid.resolution()


def _run_counterexample(config, grid):
    p = config.params
    inst = counterexample_build(
        p["block_counts"],
        bessel_target=p["bessel_target"],
        riesz_cap=p["riesz_cap"],
    )
    cgrid = counterexample_grid(
        inst, k=config.grid_k, base=config.grid_base
    )
    report = counterexample_verify(
        inst,
        grid=cgrid,
        seed=config.seed,
        colorings=p["colorings"],
    )
    level_rows = tuple(
        (
            lv.level,
            lv.m,
            lv.close_pairs,
            inst.spec.radius_gaps[lv.level - 1][0],
            inst.spec.radius_gaps[lv.level - 1][1],
            lv.pair_sin_bound,
            lv.sin_threshold,
            lv.rho_residual,
            int(lv.gram_checked),
            lv.gram_sin_max,
            lv.riesz_c_max,
            int(lv.pigeonhole_tested),
            lv.pigeonhole_failures,
        )
        for lv in report.levels
    )
    search_rows = tuple(
        (
            e["level"],
            e["first_pass_exponent"],
            e["bisection_iters"],
            e["gap_r"],
            e["gap_s"],
            e.get("gap_t", math.nan),
            e["matrix_riesz"],
        )
        for e in inst.search_log
    )
    rel = abs(report.defect_sup_refined - report.defect_sup) / max(
        report.defect_sup, 1e-30
    )
    metrics = {
        "riesz_c": report.riesz_c,
        "line_bessel": report.line_bessel,
        "model_bessel": report.model_bessel,
        "lemma_bound_ok": int(report.lemma_bound_ok),
        "defect_sup": report.defect_sup,
        "defect_sup_refined": report.defect_sup_refined,
        "defect_rel_change": rel,
        "coloring_classes": report.coloring_classes,
        "all_ok": int(report.all_ok),
    }
    tables = {
        "levels": Table(
            (
                "level", "m", "close_pairs", "gap_r", "gap_s",
                "pair_sin_bound", "threshold", "rho_residual",
                "gram_checked", "gram_sin_max", "riesz_c", "pigeonhole",
                "failures",
            ),
            level_rows,
        ),
        "search_log": Table(
            (
                "level", "first_pass_exponent", "bisection_iters",
                "gap_r", "gap_s", "gap_t", "matrix_riesz",
            ),
            search_rows,
        ),
    }
    return metrics, tables, cgrid.resolution()


def _run_selftest(config, grid):
    p = config.params
    rng = np.random.default_rng(config.seed)
    cases = []
    for i in range(p["samples"]):
        a = int(rng.integers(0, p["max_order"] + 1))
        b = int(rng.integers(0, p["max_order"] + 1))
        r1, r2 = rng.uniform(0.0, p["max_radius"], size=2)
        t1, t2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
        lam = r1 * complex(math.cos(t1), math.sin(t1))
        mu = r2 * complex(math.cos(t2), math.sin(t2))
        cases.append((i, KernelVector(lam, a), KernelVector(mu, b)))

    def check(case):
        i, u, v = case
        closed = kernel_inner(u, v)
        series = kernel_inner_series(u, v)
        err = abs(closed - series)
        hybrid = err / max(1.0, abs(series))
        return (
            i,
            u.point.real, u.point.imag, u.order,
            v.point.real, v.point.imag, v.order,
            closed.real, closed.imag,
            series.real, series.imag,
            hybrid,
        )

    rows = _map_jobs(check, cases, config.jobs)
    sym = 0.0
    for _, u, v in cases:
        d = kernel_inner(u, v) - kernel_inner(v, u).conjugate()
        sym = max(sym, abs(d))
    hybrid_errs = [row[-1] for row in rows]
    metrics = {
        "samples": p["samples"],
        "max_hybrid_err": max(hybrid_errs),
        "conjugate_symmetry_max": sym,
    }
    tables = {
        "samples": Table(
            (
                "case", "lam_re", "lam_im", "a", "mu_re", "mu_im", "b",
                "closed_re", "closed_im", "series_re", "series_im",
                "hybrid_err",
            ),
            tuple(rows),
        )
    }
    return metrics, tables, grid.resolution()


# ------------------------------------------------------------ persistence


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_record(record: ResultRecord, out_dir) -> Path:
    """Persist result.json and tables/*.csv under out_dir, atomically."""
    out = Path(out_dir)
    summary = {
        "config": record.config,
        "metrics": record.metrics,
        "tables": sorted(record.tables),
        "provenance": record.provenance,
    }
    _atomic_write(
        out / "result.json",
        (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode(),
    )
    for name, table in record.tables.items():
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(v) for v in row])
        _atomic_write(out / "tables" / f"{name}.csv", buf.getvalue().encode())
    return out


# ----------------------------------------------------------------- plots


def _plot_backend():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "hardygeom"
    return plt


def emit_plot(record: ResultRecord, plot_spec: Mapping, out_dir) -> Path:
    """Render one table to an SVG under out_dir/plots.

    plot_spec: name (file stem), table, x (column), y (column or list of
    columns), and optional style ("line" | "semilogy" | "heatmap"), title,
    and for heatmaps a `value` column gridded over (x, y).
    Unknown table or column names raise ConfigError.
    """
    plt = _plot_backend()
    name = plot_spec.get("name") or plot_spec["table"]
    table = record.table(plot_spec["table"])
    style = plot_spec.get("style", "line")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        if style == "heatmap":
            xs = sorted(set(table.column(plot_spec["x"])))
            ys = sorted(set(table.column(plot_spec["y"])))
            vals = np.full((len(ys), len(xs)), np.nan)
            value_col = table.column(plot_spec["value"])
            for (xv, yv, v) in zip(
                table.column(plot_spec["x"]),
                table.column(plot_spec["y"]),
                value_col,
            ):
                vals[ys.index(yv), xs.index(xv)] = v
            im = ax.imshow(vals, origin="lower", aspect="auto")
            ax.set_xticks(range(len(xs)), [str(x) for x in xs])
            ax.set_yticks(range(len(ys)), [str(y) for y in ys])
            fig.colorbar(im, ax=ax)
        else:
            ycols = plot_spec["y"]
            if isinstance(ycols, str):
                ycols = [ycols]
            x = table.column(plot_spec["x"])
            for yc in ycols:
                ax.plot(x, table.column(yc), marker="o", label=yc)
            if style == "semilogy":
                ax.set_yscale("log")
            if len(ycols) > 1:
                ax.legend()
        ax.set_xlabel(plot_spec["x"])
        if style != "heatmap":
            ax.set_ylabel(", ".join(
                [plot_spec["y"]] if isinstance(plot_spec["y"], str)
                else plot_spec["y"]
            ))
        ax.set_title(plot_spec.get("title", name))
        path = Path(out_dir) / "plots" / f"{name}.svg"
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(
            path,
            format="svg",
            metadata={
                "Description": json.dumps(record.config, sort_keys=True),
                "Date": None,
            },
        )
    finally:
        plt.close(fig)
    return path


def default_plots(kind: str) -> list[dict]:
    """Plot specs emitted by --plot for each experiment kind."""
    if kind == "delta":
        return [
            {
                "name": "delta_convergence",
                "table": "delta_convergence",
                "x": "refinement",
                "y": "delta",
                "title": "leave-one-out infimum vs grid refinement",
            }
        ]
    if kind == "bessel":
        return [
            {
                "name": "projection_sums",
                "table": "samples",
                "x": "sample",
                "y": "projection_sum",
                "title": "projection sums vs Bessel bound",
            }
        ]
    if kind == "riesz":
        return [
            {
                "name": "member_angles",
                "table": "members",
                "x": "member",
                "y": "sin_to_others",
                "title": "one-vs-rest angles",
            }
        ]
    if kind == "interp":
        return [
            {
                "name": "pairwise_sin",
                "table": "pairwise_sin",
                "x": "i",
                "y": "sin",
                "title": "pairwise model-space angles",
            }
        ]
    if kind == "dyadic":
        return [
            {
                "name": "coherence_ratio",
                "table": "coherence",
                "x": "j",
                "y": "n",
                "value": "ratio",
                "style": "heatmap",
                "title": "exact/asymptotic coherence ratio",
            },
            {
                "name": "loo_products",
                "table": "levels",
                "x": "level",
                "y": "loo_product",
                "title": "leave-one-out products",
            },
        ]
    if kind == "counterexample":
        return [
            {
                "name": "level_angles",
                "table": "levels",
                "x": "level",
                "y": ["pair_sin_bound", "threshold"],
                "style": "semilogy",
                "title": "intra-level angle bound vs 1/(n+1)",
            }
        ]
    if kind == "kernel-selftest":
        return [
            {
                "name": "selftest_err",
                "table": "samples",
                "x": "case",
                "y": "hybrid_err",
                "style": "semilogy",
                "title": "closed form vs series deviation",
            }
        ]
    return []

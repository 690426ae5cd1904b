import json
from pathlib import Path

import pytest

from hardygeom.cli import main
from hardygeom.experiments import (
    ConfigError,
    NumericalError,
    Table,
    config_from_mapping,
    default_plots,
    emit_plot,
    parse_config,
    run,
    write_record,
)

DELTA_CFG = {
    "kind": "delta",
    "delta": {
        "products": [
            {"zeros": [[0.0, 0.0]]},
            {"zeros": [[0.9, 0.0]]},
        ],
        "refinements": 1,
    },
}

BESSEL_CFG = {
    "kind": "bessel",
    "seed": 5,
    "bessel": {
        "nodes": [
            {"eigenvalues": [[0.0, 0.0]]},
            {"eigenvalues": [[0.5, 0.0]], "block_sizes": [2]},
            {"eigenvalues": [[-0.3, 0.4]]},
        ],
        "samples": 64,
    },
}


def cfg(mapping, **defaults):
    return config_from_mapping(mapping, defaults)


def test_config_requires_kind_and_valid_kind():
    with pytest.raises(ConfigError, match="needs a 'kind'"):
        config_from_mapping({})
    with pytest.raises(ConfigError, match="unknown kind"):
        config_from_mapping({"kind": "frobnicate"})
    with pytest.raises(ConfigError, match="does not match"):
        config_from_mapping({"kind": "delta"}, {"kind": "bessel"})


def test_randomized_kinds_demand_seed():
    with pytest.raises(ConfigError, match="seed is mandatory"):
        config_from_mapping(
            {"kind": "bessel", "bessel": BESSEL_CFG["bessel"]}
        )
    # deterministic kinds run without one
    c = config_from_mapping(DELTA_CFG)
    assert c.seed is None


def test_grid_bounds_checked():
    bad = dict(DELTA_CFG, grid={"k": 99})
    with pytest.raises(ConfigError, match="grid.k"):
        config_from_mapping(bad)


def test_param_validation_messages():
    with pytest.raises(ConfigError, match="delta.products"):
        config_from_mapping({"kind": "delta"})
    with pytest.raises(ConfigError, match="alpha_1"):
        config_from_mapping({"kind": "dyadic", "dyadic": {"alphas": [5.0]}})
    with pytest.raises(ConfigError, match="targets"):
        config_from_mapping(
            {
                "kind": "interp",
                "interp": {
                    "nodes": [{"eigenvalues": [[0.0, 0.0]]}],
                    "targets": [[1.0, 0.0], [0.0, 0.0]],
                },
            }
        )
    with pytest.raises(ConfigError, match="re, im"):
        config_from_mapping(
            {"kind": "delta", "delta": {"products": [{"zeros": [0.5]}]}}
        )


def test_parse_config_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("kind = delta\n")  # unquoted string
    with pytest.raises(ConfigError, match="parse error"):
        parse_config(bad)


def test_selftest_section_name(tmp_path):
    p = tmp_path / "self.toml"
    p.write_text(
        'kind = "kernel-selftest"\nseed = 7\n[selftest]\nsamples = 10\n'
    )
    c = parse_config(p)
    assert c.kind == "kernel-selftest"
    assert c.params["samples"] == 10


def test_table_and_record_lookups_raise_config_error():
    t = Table(("a", "b"), ((1, 2),))
    assert t.column("b") == [2]
    with pytest.raises(ConfigError, match="unknown column"):
        t.column("c")
    rec = run(config_from_mapping(DELTA_CFG, {"grid_k": 4}))
    with pytest.raises(ConfigError, match="unknown table"):
        rec.table("nope")


def test_delta_run_frozen_and_monotone():
    rec = run(config_from_mapping(DELTA_CFG, {"grid_k": 6}))
    assert rec.metrics["delta"] == pytest.approx(8.0 / 11.0, abs=1e-15)
    deltas = rec.table("delta_convergence").column("delta")
    assert len(deltas) == 2
    assert deltas[1] <= deltas[0]
    assert rec.provenance["artifact"] == "hardygeom"


def test_numerical_failure_wraps_value_errors():
    config = config_from_mapping(
        {
            "kind": "interp",
            "interp": {
                "nodes": [
                    {"eigenvalues": [[0.2, 0.0]]},
                    {"eigenvalues": [[0.2, 0.0]]},
                ],
                "targets": [[1.0, 0.0], [0.0, 0.0]],
            },
        }
    )
    with pytest.raises(NumericalError, match="overlap"):
        run(config)


def test_write_record_layout(tmp_path):
    rec = run(config_from_mapping(DELTA_CFG, {"grid_k": 4}))
    out = write_record(rec, tmp_path / "runA")
    summary = json.loads((out / "result.json").read_text())
    assert set(summary) == {"config", "metrics", "provenance", "tables"}
    csv_path = out / "tables" / "delta_convergence.csv"
    data = csv_path.read_bytes()
    assert data.startswith(b"refinement,")
    assert b"\r\n" in data


def test_same_seed_reproduces_csv_bytes(tmp_path):
    for jobs in (1, 4):
        c = config_from_mapping(BESSEL_CFG, {"grid_k": 4, "jobs": jobs})
        write_record(run(c), tmp_path / f"jobs{jobs}")
    a = (tmp_path / "jobs1" / "tables" / "samples.csv").read_bytes()
    b = (tmp_path / "jobs4" / "tables" / "samples.csv").read_bytes()
    assert a == b
    c2 = config_from_mapping(BESSEL_CFG, {"grid_k": 4, "jobs": 1})
    write_record(run(c2), tmp_path / "again")
    assert (tmp_path / "again" / "tables" / "samples.csv").read_bytes() == a


def test_selftest_metrics():
    c = config_from_mapping(
        {"kind": "kernel-selftest", "seed": 7, "selftest": {"samples": 20}}
    )
    rec = run(c)
    assert rec.metrics["conjugate_symmetry_max"] == 0.0
    assert rec.metrics["max_hybrid_err"] < 1e-10


def test_emit_plot_and_determinism(tmp_path):
    rec = run(config_from_mapping(DELTA_CFG, {"grid_k": 4}))
    spec = default_plots("delta")[0]
    p1 = emit_plot(rec, spec, tmp_path / "a")
    p2 = emit_plot(rec, spec, tmp_path / "b")
    assert p1.suffix == ".svg"
    assert p1.read_bytes() == p2.read_bytes()
    with pytest.raises(ConfigError, match="unknown column"):
        emit_plot(rec, dict(spec, y="missing"), tmp_path / "c")
    with pytest.raises(ConfigError, match="unknown table"):
        emit_plot(rec, dict(spec, table="missing"), tmp_path / "d")


def _write_delta_toml(path: Path) -> Path:
    path.write_text(
        "kind = \"delta\"\n"
        "[delta]\n"
        "products = [\n"
        "  { zeros = [[0.0, 0.0]] },\n"
        "  { zeros = [[0.9, 0.0]] },\n"
        "]\n"
    )
    return path


def test_cli_happy_path(tmp_path, capsys):
    cfg_path = _write_delta_toml(tmp_path / "delta.toml")
    out = tmp_path / "out"
    code = main(["delta", "--config", str(cfg_path), "--out", str(out),
                 "--grid-k", "4"])
    assert code == 0
    assert (out / "result.json").exists()
    assert (out / "tables" / "delta_convergence.csv").exists()
    assert f"wrote {out}" in capsys.readouterr().err


def test_cli_plot_flag(tmp_path):
    cfg_path = _write_delta_toml(tmp_path / "delta.toml")
    out = tmp_path / "out"
    code = main(["delta", "--config", str(cfg_path), "--out", str(out),
                 "--grid-k", "4", "--plot"])
    assert code == 0
    assert (out / "plots" / "delta_convergence.svg").exists()


def test_cli_config_error_exit(tmp_path, capsys):
    p = tmp_path / "b.toml"
    p.write_text(
        'kind = "bessel"\n[bessel]\nnodes = [{ eigenvalues = [[0.0, 0.0]] }]\n'
    )
    assert main(["bessel", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert "seed is mandatory" in capsys.readouterr().err


def test_cli_numerical_error_exit(tmp_path, capsys):
    p = tmp_path / "i.toml"
    p.write_text(
        'kind = "interp"\n[interp]\n'
        "nodes = [{ eigenvalues = [[0.2, 0.0]] }, { eigenvalues = [[0.2, 0.0]] }]\n"
        "targets = [[1.0, 0.0], [0.0, 0.0]]\n"
    )
    assert main(["interp", "--config", str(p), "--out", str(tmp_path / "o")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_io_error_exit(tmp_path, capsys):
    cfg_path = _write_delta_toml(tmp_path / "delta.toml")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    out = blocker / "nested"  # parent is a regular file
    assert main(["delta", "--config", str(cfg_path), "--grid-k", "3",
                 "--out", str(out)]) == 4
    assert "i/o failure" in capsys.readouterr().err


def test_cli_env_out(tmp_path, monkeypatch):
    cfg_path = _write_delta_toml(tmp_path / "delta.toml")
    monkeypatch.setenv("HARDYGEOM_OUT", str(tmp_path / "envroot"))
    code = main(["delta", "--config", str(cfg_path), "--grid-k", "3"])
    assert code == 0
    assert (tmp_path / "envroot" / "delta" / "result.json").exists()


def test_cli_seed_override(tmp_path):
    p = tmp_path / "s.toml"
    p.write_text('kind = "kernel-selftest"\nseed = 1\n[selftest]\nsamples = 5\n')
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["selftest", "--config", str(p), "--out", str(out1)]) == 0
    assert main(["selftest", "--config", str(p), "--seed", "1",
                 "--out", str(out2)]) == 0
    a = (out1 / "tables").glob("*.csv")
    for f in sorted(a):
        twin = out2 / "tables" / f.name
        assert f.read_bytes() == twin.read_bytes()

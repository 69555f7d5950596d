import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from obstacle_mcf import cli, io
from obstacle_mcf.config import parse_config, parse_config_text, serialize
from obstacle_mcf.errors import ConfigError
from obstacle_mcf.grid import Grid
from obstacle_mcf.initial_data import Annulus, Sphere, TwoSpheres
from obstacle_mcf.solver import PROJECTION, YOSIDA, PhaseState, SolverConfig, stability_limit

BASE = """\
dim = 2
nodes = 81
extent = 2.0
shape.kind = sphere
shape.center = 0.0, 0.0
shape.radius = 0.5
epsilon = 0.1
delta = 0.01
scheme = yosida
dt = auto
t_end = 0.004
snapshot_every = 10
diagnostics_every = 10
"""


def _cfg_text(out, **over):
    lines = []
    for line in BASE.splitlines():
        key = line.split("=")[0].strip()
        if key in over:
            if over[key] is None:
                continue
            line = f"{key} = {over[key]}"
        lines.append(line)
    lines.append(f"output_dir = {out}")
    return "\n".join(lines) + "\n"


def test_parse_reference_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\n" + _cfg_text(tmp_path / "out"))
    cfg = parse_config(p)
    assert cfg.grid == Grid((81, 81), (2.0, 2.0))
    assert cfg.shape == Sphere((0.0, 0.0), 0.5)
    assert cfg.dt == "auto"
    assert cfg.time_step == 0.9 * stability_limit(cfg)


@pytest.mark.parametrize(
    "over,key",
    [
        ({"delta": 0.7}, "delta"),
        ({"delta": 0.0}, "delta"),
        ({"scheme": "projection"}, "delta"),
        ({"delta": None}, "delta"),
        ({"epsilon": -1}, "epsilon"),
        ({"nodes": 8}, "nodes"),
        ({"scheme": "implicit"}, "scheme"),
        ({"dt": 1.0}, "dt"),
        ({"dt": "fast"}, "dt"),
        ({"t_end": -0.1}, "t_end"),
        ({"shape.kind": "torus"}, "shape.kind"),
        ({"shape.radius": None}, "shape.radius"),
        ({"shape.center": "0, 0, 0"}, "shape.center"),
    ],
)
def test_config_errors_name_the_key(tmp_path, over, key):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(_cfg_text(tmp_path, **over))
    assert exc.value.key == key


def test_unknown_and_duplicate_keys(tmp_path):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(_cfg_text(tmp_path) + "seed = 3\n")
    assert exc.value.key == "seed"
    with pytest.raises(ConfigError):
        parse_config_text(_cfg_text(tmp_path) + "epsilon = 0.1\n")
    with pytest.raises(ConfigError):
        parse_config_text("just words\n")
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.cfg")


shapes = st.one_of(
    st.builds(Sphere, st.tuples(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2)), st.floats(0.1, 0.5)),
    st.builds(lambda c, a, b: Annulus(c, a, a + b),
              st.tuples(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1)), st.floats(0.1, 0.3), st.floats(0.05, 0.2)),
    st.builds(TwoSpheres, st.tuples(st.floats(-0.5, -0.3), st.just(0.0)), st.floats(0.05, 0.2),
              st.tuples(st.floats(0.3, 0.5), st.just(0.0)), st.floats(0.05, 0.2)),
)


@given(shapes, st.sampled_from([YOSIDA, PROJECTION]), st.floats(0.01, 0.1), st.floats(1e-3, 0.49),
       st.integers(17, 200), st.one_of(st.just("auto"), st.floats(0.1, 0.9)), st.floats(0.0, 0.1))
@settings(max_examples=60, deadline=None)
def test_serialize_round_trip(shape, scheme, eps, delta, nodes, dtf, t_end):
    g = Grid.cube(2, nodes, 2.0)
    cfg = SolverConfig(g, shape, eps, delta if scheme == YOSIDA else None, scheme, "auto", t_end, 3, 4, "out/x")
    if dtf != "auto":
        cfg = SolverConfig(g, shape, eps, cfg.delta, scheme, dtf * stability_limit(cfg), t_end, 3, 4, "out/x")
    assert parse_config_text(serialize(cfg)) == cfg


@given(st.integers(0, 2**32 - 1), st.sampled_from([(20,), (17, 23), (16, 17, 18)]))
@settings(max_examples=20, deadline=None)
def test_snapshot_round_trip_bit_exact(tmp_path_factory, seed, nodes):
    rng = np.random.default_rng(seed)
    h = 0.01
    g = Grid(nodes, tuple(h * (n - 1) for n in nodes))
    field = rng.standard_normal(nodes) * 10.0 ** rng.integers(-300, 300, nodes)
    st_ = PhaseState(field, g, 0.05, None, float(rng.uniform()), PROJECTION)
    d = io.save_snapshot(st_, tmp_path_factory.mktemp("snap"), {"dissipation_accum": 0.25})
    back, meta = io.load_snapshot(d)
    assert back.field.tobytes() == field.tobytes()
    assert back.t == st_.t and back.grid == g and back.delta is None
    assert meta["format-version"] == "1" and meta["dissipation_accum"] == 0.25
    raw = (d / io.FIELD_NAME).read_bytes()
    assert raw == field.astype("<f8").tobytes()


def test_csv_format(tmp_path):
    from obstacle_mcf.measures import DiagnosticsRecord

    rec = DiagnosticsRecord(0.1, 1 / 3, -2e-300, 5.0, math.pi, 1.0, 0.0, 7.0)
    io.write_records(tmp_path / "d.csv", [rec])
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "t,total_energy,xi_sup,xi_mass,huisken,density_ratio_max,dissipation_accum,lambda_mass"
    assert lines[1].split(",")[1] == "0.33333333333333331"
    assert io.read_records(tmp_path / "d.csv") == [rec]


def test_cmd_run_manifest_and_diagnose(tmp_path):
    cfg = parse_config_text(_cfg_text(tmp_path / "out"))
    m = cli.cmd_run(cfg)
    n = cfg.n_steps
    expected = n // cfg.snapshot_every + 1 + (n % cfg.snapshot_every != 0)
    assert m["snapshots"] == expected
    assert len(m["files"]) == 2 * expected + 2  # + run.json and the CSV
    for f in m["files"]:
        p = tmp_path / "out" / f["path"]
        assert p.stat().st_size == f["bytes"] and io.sha256(p) == f["sha256"]
    out_csv = cli.cmd_diagnose(tmp_path / "out")
    assert out_csv.read_bytes() == (tmp_path / "out" / io.CSV_NAME).read_bytes()
    with pytest.raises(ConfigError):
        cli.cmd_run(cfg)  # refuses to overwrite


def test_main_exit_codes(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text(_cfg_text(tmp_path / "o", delta=0.7))
    assert cli.main(["run", str(p)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and err["key"] == "delta"
    assert cli.main(["diagnose", str(tmp_path / "nowhere")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "io"
    assert cli.main(["profile-check"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["pass"] and len(rep["rows"]) == 4


def test_main_run(tmp_path, capsys):
    p = tmp_path / "ok.cfg"
    p.write_text(_cfg_text(tmp_path / "o"))
    assert cli.main(["run", str(p)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["snapshots"] >= 2


def test_sweep_configs_scaling(tmp_path):
    cfg = parse_config_text(_cfg_text(tmp_path / "sw", epsilon=0.1, delta=0.01, nodes=81))
    members = cli.sweep_configs(cfg, [0.1, 0.05])
    assert [m.grid.nodes for m in members] == [(81, 81), (161, 161)]
    assert members[1].delta == pytest.approx(0.0025)
    assert members[1].grid.h / members[1].epsilon == pytest.approx(cfg.grid.h / cfg.epsilon)


def test_cmd_sweep_small(tmp_path, monkeypatch):
    monkeypatch.setenv("OBSTACLE_MCF_THREADS", "2")
    cfg = parse_config_text(_cfg_text(tmp_path / "sw", t_end=0.002, nodes=41, epsilon=0.1))
    res = cli.cmd_sweep(cfg, [0.1, 0.08])
    assert res["workers"] == 2
    assert [row[0] for row in res["xi_table"]] == [0.1, 0.08]
    table = (tmp_path / "sw" / cli.XI_TABLE).read_text().splitlines()
    assert table[0] == "epsilon,max_xi_mass" and len(table) == 3


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("OBSTACLE_MCF_THREADS", "3")
    assert cli.worker_count(10) == 3
    assert cli.worker_count(2) == 2
    monkeypatch.setenv("OBSTACLE_MCF_THREADS", "zero")
    with pytest.raises(ConfigError):
        cli.worker_count(2)

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from betadyn.errors import ConfigError
from betadyn.experiments import (
    RunConfig,
    SweepReport,
    curve_rows_csv,
    emit_plotdata,
    load_config,
    parse_config,
    random_pairs,
    random_point,
    run_curve_fibration,
    run_separation_audit,
    run_sweep,
    separation_rows_csv,
    worker_count,
)
from betadyn.interval_maps import Params
from betadyn.measures import parry_density
from betadyn.normality import default_suite, density_integrals
from betadyn.numerics import golden_ratio
from betadyn.symbolic import EventuallyPeriodic

F = Fraction


def test_parse_config_comments_and_types(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# a sweep\nmode = sweep   # inline\nalpha_steps = 3\nbeta-min = 3/2\n\nn = 1_000\n", encoding="utf-8")
    cfg = load_config(str(path))
    assert cfg.mode == "sweep" and cfg.alpha_steps == 3 and cfg.beta_min == "3/2" and cfg.n == 1000


@pytest.mark.parametrize("text", [
    "colour = red",
    "n = many",
    "beta_min = 3\nbeta_max = 2",
    "beta_min = 1\nbeta_max = 2",
    "alpha_steps = 0",
    "mode = dance",
    "seed = -1",
    "just words",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        RunConfig(**parse_config(text))


def test_grid_is_exact_and_ordered():
    cfg = RunConfig(alpha_min="0", alpha_max="0.95", beta_min="1.2", beta_max="3")
    grid = cfg.grid()
    assert len(grid) == 400
    assert grid[0] == (0, F(6, 5)) and grid[-1] == (F(19, 20), 3)
    assert grid[1][1] - grid[0][1] == F(9, 95) and grid[20][0] == F(1, 20)


def test_random_point_is_seeded():
    a = random_point(3, 7, 1000, 2)
    assert a == random_point(3, 7, 1000, 2)
    assert a != random_point(3, 8, 1000, 2) and a != random_point(4, 7, 1000, 2)
    assert 0 <= a < 1 and a.denominator.bit_length() > 1000


def test_single_point_sweep_matches_exact_value():
    cfg = RunConfig(alpha_min="1/3", alpha_max="1/3", alpha_steps=1, beta_min="2", beta_max="2", beta_steps=1,
                    n=1000, x0="0", suite="id")
    r = run_sweep(cfg)
    assert len(r.rows) == 1
    assert r.rows[0]["defect_random"] == pytest.approx(1 / 6, abs=1e-12)
    assert r.rows[0]["defect_zero"] == pytest.approx(1 / 6, abs=1e-12)


def _small_cfg(out, **kw):
    base = dict(alpha_min="0.1", alpha_max="0.7", alpha_steps=3, beta_min="1.5", beta_max="2.5", beta_steps=3,
                n=1500, seed=11, out=str(out))
    base.update(kw)
    return RunConfig(**base)


def test_sweep_determinism_and_header(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    a = run_sweep(_small_cfg(tmp_path / "a.csv"))
    b = run_sweep(_small_cfg(tmp_path / "b.csv"))
    ta, tb = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert ta == tb
    text = ta.decode()
    assert "artifact-level acceptance knobs" in text
    assert len(a.rows) == len(b.rows) == 9 and [r["index"] for r in a.rows] == list(range(9))
    data = [l for l in text.splitlines() if not l.startswith("#")]
    assert data[0].split(",")[:3] == ["index", "alpha", "beta"]
    assert data[1].split(",")[1] == "0.10000000000000001"  # 17 significant digits


def test_sweep_parallel_matches_serial(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    run_sweep(_small_cfg(tmp_path / "serial.csv"))
    monkeypatch.setenv("BETADYN_THREADS", "3")
    assert worker_count() == 3
    run_sweep(_small_cfg(tmp_path / "parallel.csv"))
    assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "parallel.csv").read_bytes()


def test_sweep_resume_reproduces_rows(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    full = tmp_path / "full.csv"
    run_sweep(_small_cfg(full))
    lines = full.read_text(encoding="utf-8").splitlines(keepends=True)
    header = sum(1 for l in lines if l.startswith("#")) + 1
    part = tmp_path / "part.csv"
    # keep four rows and a torn fifth, as a crash mid-write would leave
    part.write_text("".join(lines[:header + 4]) + lines[header + 4][:9], encoding="utf-8")
    Path(str(part) + ".exclusions").write_text("index,alpha,beta,step\n", encoding="utf-8")
    r = run_sweep(_small_cfg(part, resume=True))
    assert part.read_bytes() == full.read_bytes()
    assert len(r.rows) == 9


def test_resume_ignores_file_from_other_config(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    out = tmp_path / "s.csv"
    run_sweep(_small_cfg(out, seed=1))
    run_sweep(_small_cfg(out, seed=2, resume=True))
    fresh = tmp_path / "fresh.csv"
    run_sweep(_small_cfg(fresh, seed=2))
    assert out.read_text().replace("s.csv", "") == fresh.read_text().replace("fresh.csv", "")


def test_generalized_sweep_lists_breakpoint_exclusions(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    out = tmp_path / "gen.csv"
    cfg = RunConfig(family="gen", signs="+-", alpha_min="0", alpha_max="0", alpha_steps=1,
                    beta_min="(1+sqrt(5))/2", beta_max="2", beta_steps=2, n=500, out=str(out), bins=64)
    r = run_sweep(cfg)
    # the tent orbit of 1 at the golden slope reaches 1/beta at step 2
    assert len(r.excluded) == 1 and r.excluded[0]["step"] == 2
    assert len(r.rows) == 1 and r.rows[0]["beta"] == 2
    excl = Path(str(out) + ".exclusions").read_text().splitlines()
    assert excl[0] == "index,alpha,beta,step" and excl[1].endswith(",2")


def test_sweep_row_errors_do_not_abort(tmp_path, monkeypatch):
    monkeypatch.setenv("BETADYN_THREADS", "1")
    cfg = RunConfig(alpha_min="0", alpha_max="0.5", alpha_steps=2, beta_min="1.5", beta_max="1.5", beta_steps=1,
                    n=200, n_terms=1, out=str(tmp_path / "e.csv"))
    r = run_sweep(cfg)
    assert len(r.rows) == 2


def test_sweep_report_summary():
    rows = [{"defect_random": d, "status": "ok"} for d in np.linspace(0, 0.1, 11)]
    s = SweepReport(rows).summary()
    assert s["median"] == pytest.approx(0.05) and s["below_0.05"] == pytest.approx(5 / 11)


def test_curve_fibration_rows():
    cfg = RunConfig(mode="curve", n=2000, epsilon="0.001")
    rows = run_curve_fibration([EventuallyPeriodic.parse("0:0,1"), EventuallyPeriodic.periodic("10")], [F(2)], cfg)
    assert len(rows) == 2
    zero, bad = rows
    suite = default_suite()
    d = parry_density(Params(0, 2))
    ints = density_integrals(suite, d)
    expected = max(abs(float(f(np.array([0.0]))[0]) - i) / 2 for f, i in zip(suite.functions, ints))
    assert zero["alpha"] == 0 and zero["valid"] and zero["defect"] == pytest.approx(expected)
    assert not bad["valid"] and bad["note"].startswith("not attainable")
    text = curve_rows_csv(rows, cfg)
    assert "u,beta,alpha,valid,defect" in text


@pytest.mark.slow
def test_curve_fibration_on_and_off_curve():
    cfg = RunConfig(mode="curve", n=100_000, epsilon="0.001")
    us = [EventuallyPeriodic.parse("0:0,1"), EventuallyPeriodic.periodic("01"), EventuallyPeriodic.periodic("001")]
    betas = [F(3, 2) + F(j, 20) for j in range(31)]
    rows = run_curve_fibration(us, betas, cfg)
    valid = [r for r in rows if r["valid"]]
    assert len(valid) >= 80
    for r in valid:
        assert r["defect"] >= r["asymptotic_defect"] - 1e-3
        assert r["asymptotic_defect"] > 0.01
    off = [r["defect_off"] for r in rows if r["defect_off"] is not None]
    assert np.mean(np.array(off) < 0.05) >= 0.8


def test_separation_audit_examples():
    rows = run_separation_audit("tab", random_pairs(5, F(3, 2), F(5, 2), 50), F(1, 2))
    assert len(rows) == 50 and all(r["ok"] for r in rows)
    rows = run_separation_audit("+-", random_pairs(5, F(11, 10), F(2), 50))
    assert all(r["ok"] and r["k_tight"] is not None for r in rows)
    rows = run_separation_audit("--", random_pairs(5, F(11, 10), F(152, 100), 10))
    assert not any(r["in_hypothesis"] for r in rows)
    text = separation_rows_csv(rows)
    assert text.splitlines()[0] == "beta1,beta2,l,bound,ok,k_used,k_tight,in_hypothesis,truncated"


def test_random_pairs_are_seeded_and_ordered():
    a = random_pairs(9, F(3, 2), F(5, 2), 20)
    assert a == random_pairs(9, F(3, 2), F(5, 2), 20)
    assert all(F(3, 2) <= b1 < b2 <= F(5, 2) and b2 - b1 <= F(1, 20) for b1, b2 in a)


def test_plotdata_density(tmp_path):
    d = parry_density(Params(0, golden_ratio()))
    paths = emit_plotdata(d, "density", tmp_path / "golden")
    lines = paths[0].read_text().splitlines()
    assert len(lines) == 4
    assert lines[0].split()[0] == "0" and lines[1].split()[1] == lines[0].split()[1]
    assert Path(str(paths[0]) + ".legend").exists()
    again = emit_plotdata(d, "density", tmp_path / "golden2")
    assert again[0].read_bytes() == paths[0].read_bytes()


def test_plotdata_heatmap_and_curves(tmp_path):
    rows = [{"alpha": F(i, 20), "beta": F(114 + 9 * j, 95), "defect_random": 0.01} for i in range(20) for j in range(20)]
    (p,) = emit_plotdata(SweepReport(rows), "sweep-heatmap", tmp_path / "heat")
    body = [l for l in p.read_text().splitlines() if l]
    assert len(body) == 400 and len(body[0].split()) == 3
    curve_rows = [{"u": "01:0,2", "beta": F(2), "alpha": F(1, 3), "valid": True, "defect": 0.2},
                  {"u": "0:0,1", "beta": F(2), "alpha": F(0), "valid": True, "defect": 0.3}]
    files = emit_plotdata(curve_rows, "curve", tmp_path / "curve")
    assert len(files) == 2
    with pytest.raises(Exception):
        emit_plotdata(curve_rows, "pie", tmp_path / "x")

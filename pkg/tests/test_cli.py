import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

import qbm_steering.measure as measure_mod
from qbm_steering import __version__
from qbm_steering.cli import RunConfig, main, parse_config

LN_COSH4 = math.log(math.cosh(4.0))


def read_csv(path):
    text = path.read_text(encoding="utf-8") if hasattr(path, "read_text") else path
    lines = text.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return comments, rows[0], rows[1:]


def run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out


class TestConfig:
    def test_defaults(self):
        cmd, cfg = parse_config(["coefficients"])
        assert cmd == "coefficients"
        assert (cfg.omega_c, cfg.omega0, cfg.r, cfg.temperature, cfg.s) == (1.0, 7.0, 2.0, 1.5, "ohmic")
        assert cfg.effective_t_max == 5.0
        assert parse_config(["coefficients", "--s", "subohmic"])[1].effective_t_max == 8.0

    def test_negative_temperature(self, capsys):
        assert main(["coefficients", "--temperature", "-1"]) == 2
        assert "temperature" in capsys.readouterr().err

    def test_negative_temperature_in_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("temperature=-1\n")
        assert main(["coefficients", "--config", str(cfg)]) == 2
        assert "temperature" in capsys.readouterr().err

    def test_precedence(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep setup\ntemperature = 100\nomega-c=2.0\nappendix_verbatim=yes\n")
        _, eff = parse_config(["nonmarkov", "--config", str(cfg), "--temperature", "1.5"])
        assert eff.temperature == 1.5 and eff.omega_c == 2.0 and eff.appendix_verbatim is True

    @pytest.mark.parametrize("text,field", [
        ("bogus=1\n", "bogus"), ("r\n", "key=value"), ("alpha_count=x\n", "alpha_count"),
        ("split=maybe\n", "split"),
    ])
    def test_bad_file(self, tmp_path, capsys, text, field):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        assert main(["coefficients", "--config", str(cfg)]) == 2
        assert field in capsys.readouterr().err

    @pytest.mark.parametrize("argv,field", [
        (["--alpha-min", "0.3", "--alpha-max", "0.1"], "alpha_max"),
        (["--alpha-count", "1", "--alpha-min", "0.1", "--alpha-max", "0.2"], "alpha_count"),
        (["--t-max", "1.0005", "--dt", "0.001"], "t_max"),
        (["--omega0", "0"], "omega0"),
        (["--workers", "0"], "workers"),
    ])
    def test_validation(self, capsys, argv, field):
        assert main(["nonmarkov", *argv]) == 2
        assert field in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["coefficients", "--config", "/nonexistent/run.cfg"]) == 2

    def test_alpha_grid(self):
        assert RunConfig().alphas() == [0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
        assert RunConfig(alpha_min=0.0, alpha_max=0.0, alpha_count=1).alphas() == [0.0]


class TestCoefficients:
    def test_default_file(self, tmp_path):
        code, out = run(["coefficients"], tmp_path)
        assert code == 0
        comments, head, rows = read_csv(out)
        assert head == ["t", "gamma", "delta", "big_gamma", "delta_gamma", "method_gamma", "method_delta"]
        assert len(rows) == 5001
        assert comments[0] == f"# qbm-steering {__version__} coefficients"
        for item in ("omega_c=1.0", "omega0=7.0", "r=2.0", "temperature=1.5", "s=ohmic", "t_max=5.0"):
            assert f"# {item}" in comments
        assert rows[1000][0] == "1.0"
        assert {r[5] for r in rows} == {"closed-form"} and {r[6] for r in rows} == {"closed-form"}

    def test_zero_coupling(self, tmp_path):
        _, out = run(["coefficients", "--alpha", "0", "--t-max", "1"], tmp_path)
        _, _, rows = read_csv(out)
        assert all(float(x) == 0.0 for r in rows for x in r[1:5])

    def test_subohmic_methods(self, tmp_path):
        _, out = run(["coefficients", "--s", "subohmic", "--t-max", "0.05"], tmp_path)
        _, _, rows = read_csv(out)
        assert {r[5] for r in rows} == {"closed-form"} and {r[6] for r in rows} == {"quadrature"}

    def test_round_trip_floats(self, tmp_path):
        _, out = run(["coefficients", "--t-max", "0.2"], tmp_path)
        _, _, rows = read_csv(out)
        assert all(repr(float(x)) == x for r in rows for x in r[:5])

    def test_stdout(self, capsys):
        assert main(["coefficients", "--t-max", "0.01"]) == 0
        assert capsys.readouterr().out.splitlines()[-1].startswith("0.01,")


class TestSteerability:
    def test_initial_value_all_scenarios(self, tmp_path):
        code, out = run(["steerability", "--t-max", "1"], tmp_path)
        assert code == 0
        _, head, rows = read_csv(out)
        assert head == ["t", "a", "b", "c", "S", "scenario"]
        starts = {r[5]: float(r[4]) for r in rows if r[0] == "0.0"}
        assert set(starts) == {"right", "left", "both"}
        assert all(v == pytest.approx(LN_COSH4, abs=1e-10) for v in starts.values())

    def test_vacuum_probe(self, tmp_path):
        _, out = run(["steerability", "--r", "0", "--scenario", "both", "--t-max", "1"], tmp_path)
        _, _, rows = read_csv(out)
        assert all(float(r[4]) == 0.0 for r in rows)

    def test_split(self, tmp_path):
        code, out = run(["steerability", "--split", "--t-max", "0.5"], tmp_path, "st.csv")
        assert code == 0
        for sc in ("right", "left", "both"):
            _, _, rows = read_csv(tmp_path / f"st_{sc}.csv")
            assert len(rows) == 501 and {r[5] for r in rows} == {sc}

    def test_split_needs_out(self, capsys):
        assert main(["steerability", "--split"]) == 2

    def test_subohmic_cyclic_arcs(self, tmp_path):
        _, out = run(["steerability", "--s", "subohmic", "--scenario", "both"], tmp_path)
        _, _, rows = read_csv(out)
        s = np.array([float(r[4]) for r in rows])
        rising = (np.diff(s) > 1e-9) & (s[1:] > 0)
        arcs = np.count_nonzero(np.diff(np.concatenate([[0], rising.astype(int)])) == 1)
        assert arcs >= 3

    def test_verbatim_flag(self, tmp_path):
        code, out = run(["steerability", "--appendix-verbatim", "--scenario", "both", "--t-max", "0.1"], tmp_path)
        assert code == 0
        comments, _, rows = read_csv(out)
        assert "# appendix_verbatim=true" in comments
        assert rows[0][4] == "inf"


class TestNonMarkov:
    def test_single_zero_point(self, tmp_path):
        code, out = run(["nonmarkov", "--alpha-min", "0", "--alpha-max", "0", "--alpha-count", "1"], tmp_path)
        assert code == 0
        _, head, rows = read_csv(out)
        assert head == ["alpha", "N_right", "N_left", "N_both", "error"]
        assert rows == [["0.0", "0.0", "0.0", "0.0", ""]]

    def test_sweep_and_sidecar(self, tmp_path, capsys):
        code, out = run(["nonmarkov"], tmp_path, "n.csv")
        assert code == 0
        _, _, rows = read_csv(out)
        table = np.array([[float(x) for x in r[:4]] for r in rows])
        assert np.all(table[:, 1] <= table[:, 2]) and np.all(table[:, 2] <= table[:, 3])
        _, head, ivs = read_csv(tmp_path / "n.intervals.csv")
        assert head == ["alpha", "scenario", "t_start", "t_end", "rise"]
        assert len(ivs) == 18
        for row in rows:
            for col, sc in ((1, "right"), (2, "left"), (3, "both")):
                rises = [float(i[4]) for i in ivs if i[0] == row[0] and i[1] == sc]
                assert math.fsum(rises) == pytest.approx(float(row[col]), rel=1e-12)
        summary = capsys.readouterr().out
        assert "N_both: max" in summary and "alpha=0.3" in summary

    def test_single_scenario_columns(self, tmp_path):
        _, out = run(["nonmarkov", "--scenario", "left", "--alpha-count", "2"], tmp_path)
        _, _, rows = read_csv(out)
        assert all(r[1] == "" and r[2] != "" and r[3] == "" for r in rows)

    def test_cell_failure_exit_status(self, tmp_path, monkeypatch):
        real = measure_mod.steerability_trace

        def flaky(probe, env_, sc, *args, **kw):
            if env_.alpha == 0.1:
                raise ArithmeticError("forced")
            return real(probe, env_, sc, *args, **kw)

        monkeypatch.setattr(measure_mod, "steerability_trace", flaky)
        code, out = run(["nonmarkov", "--alpha-count", "6"], tmp_path)
        assert code == 1
        _, _, rows = read_csv(out)
        assert "forced" in rows[1][4] and rows[1][1] == ""
        assert rows[0][4] == ""


@pytest.mark.parametrize("argv", [
    ["coefficients", "--t-max", "1"],
    ["steerability", "--t-max", "1"],
    ["nonmarkov", "--alpha-count", "3", "--alpha-max", "0.2"],
])
def test_byte_identical_reruns(tmp_path, argv):
    _, first = run(argv, tmp_path, "a.csv")
    _, second = run(argv, tmp_path, "b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qbm_steering", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout

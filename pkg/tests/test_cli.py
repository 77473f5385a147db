import json

import numpy as np
import pytest

from mixedent import cli, fileio
from mixedent.states import mems


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestMeasure:
    def test_mems_branch_point(self, capsys):
        code, out, err = run(capsys, "measure", "--family", "mems", "--x", "0.6666666667")
        assert code == 0
        rec = json.loads(out)["record"]
        assert rec["R"] == pytest.approx(1.8, abs=1e-9)
        assert rec["C"] == pytest.approx(2 / 3, abs=1e-9)
        assert rec["cond_renyi_inf"] == pytest.approx(0.0, abs=1e-9)
        assert "wall time" in err

    def test_ih_and_bell(self, capsys):
        code, out, _ = run(capsys, "measure", "--family", "ih", "--p", "0.5,0.25,0.15,0.1")
        assert code == 0 and json.loads(out)["record"]["C"] == pytest.approx(0.033772, abs=1e-6)
        code, out, _ = run(capsys, "measure", "--family", "bell-diag", "--w", "1,0,0,0", "--q", "2,inf")
        rec = json.loads(out)["record"]
        assert code == 0 and rec["C"] == pytest.approx(1.0) and "2.0" in rec["tsallis"]

    def test_state_file(self, capsys, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps(fileio.density_to_json(mems(0.9))))
        code, out, _ = run(capsys, "measure", "--state", str(p))
        assert code == 0 and json.loads(out)["record"]["C"] == pytest.approx(0.9)

    def test_bad_trace(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(fileio.density_to_json(np.diag([0.3, 0.3, 0.25, 0.25]))))
        code, out, err = run(capsys, "measure", "--state", str(p))
        assert code == 2 and out == ""
        assert "trace" in err

    def test_missing_parameter(self, capsys):
        assert run(capsys, "measure", "--family", "mems")[0] == 2

    def test_out_of_range(self, capsys):
        assert run(capsys, "measure", "--family", "mems", "--x", "1.5")[0] == 2

    def test_unsorted_ih(self, capsys):
        assert run(capsys, "measure", "--family", "ih", "--p", "0.1,0.2,0.3,0.4")[0] == 2


class TestUsage:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.run(["sample", "--bogus"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.run(["frobnicate"])
        assert exc.value.code == 2

    def test_bad_q(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.run(["measure", "--family", "mems", "--x", "0.5", "--q", "-1"])
        assert exc.value.code == 2


class TestSample:
    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run(capsys, "sample", "--ensemble", "zhsl", "--n", "100", "--seed", "7", "--out", str(p))[0] == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[1] == ",".join(cli.RECORD_COLUMNS)
        assert len(lines) == 102

    def test_stdout_matches_file(self, tmp_path, capsys):
        p = tmp_path / "a.csv"
        run(capsys, "sample", "--n", "20", "--seed", "7", "--out", str(p))
        _, out, _ = run(capsys, "sample", "--n", "20", "--seed", "7")
        assert out == p.read_text()

    def test_json(self, capsys):
        code, out, _ = run(capsys, "sample", "--ensemble", "ih", "--n", "10", "--seed", "1", "--format", "json")
        d = json.loads(out)
        assert code == 0 and len(d["records"]) == 10
        assert d["manifest"]["seed"] == {"master_seed": 1, "stream_index": 0}

    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "7")
        _, env_out, _ = run(capsys, "sample", "--n", "5")
        monkeypatch.delenv(cli.SEED_ENV)
        _, flag_out, _ = run(capsys, "sample", "--n", "5", "--seed", "7")
        assert env_out.splitlines()[1:] == flag_out.splitlines()[1:]
        assert '"seed_source": "env"' in env_out.splitlines()[0]

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "seven")
        assert run(capsys, "sample", "--n", "5")[0] == 2

    def test_stream_changes_output(self, capsys):
        _, a, _ = run(capsys, "sample", "--n", "5", "--seed", "7")
        _, b, _ = run(capsys, "sample", "--n", "5", "--seed", "7", "--stream", "1")
        assert a.splitlines()[2:] != b.splitlines()[2:]


class TestSweeps:
    def test_escre_worker_independent(self, tmp_path, capsys):
        outs = []
        for w in ("1", "2"):
            p = tmp_path / f"w{w}.json"
            code, _, _ = run(capsys, "sweep-escre", "--n", "20000", "--bins", "10", "--seed", "3",
                             "--workers", w, "--format", "json", "--out", str(p))
            assert code == 0
            outs.append(p.read_bytes())
        assert outs[0] == outs[1]
        d = json.loads(outs[0])
        assert len(d["series"]["max_C"]) == 10 and "summary" in d

    def test_escre_q_grid(self, capsys):
        code, out, _ = run(capsys, "sweep-escre", "--n", "5000", "--bins", "8", "--q", "0.5,1,2,5,inf")
        assert code == 0 and out.splitlines()[1].startswith("bin_center")

    def test_escre_requires_inf(self, capsys):
        assert run(capsys, "sweep-escre", "--n", "100", "--q", "2")[0] == 2

    @pytest.mark.parametrize("by", ["r", "lambda"])
    def test_band(self, capsys, by):
        code, out, _ = run(capsys, "band", "--by", by, "--n", "5000", "--bins", "10", "--format", "json")
        d = json.loads(out)
        assert code == 0 and len(d["series"]["bin_center"]) == 10
        if by == "lambda":
            assert d["meta"]["report"]["passed"]
        else:
            assert "floor_C" in d["series"] and "mems_C" in d["series"]


class TestVerify:
    @pytest.mark.parametrize("check,extra", [("eq8", []), ("mems-slope", []),
                                             ("contours", ["--n", "5000"]),
                                             ("ppt-vs-concurrence", ["--n", "2000"]),
                                             ("eq7", ["--n", "2000"])])
    def test_passes(self, capsys, check, extra):
        code, out, err = run(capsys, "verify", "--check", check, "--workers", "1", *extra)
        assert code == 0, err
        assert json.loads(out)["report"]["passed"] and "PASS" in err

    def test_failure_exit_code(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "mems_slope_check", lambda q: {"passed": False, "matched": None})
        assert run(capsys, "verify", "--check", "eq8")[0] == 1

    def test_numeric_error_exit_code(self, capsys, monkeypatch):
        from mixedent.errors import NumericError

        def boom(*a, **k):
            raise NumericError("did not converge")

        monkeypatch.setattr(cli, "mems_slope_check", boom)
        assert run(capsys, "verify", "--check", "eq8")[0] == 3

    def test_eq8_note(self, capsys):
        _, out, _ = run(capsys, "verify", "--check", "eq8")
        assert json.loads(out)["report"]["matched"] == "direct"

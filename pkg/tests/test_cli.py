"""Tests for the scenario runner command."""

import json

import pytest

from qdesk import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def strip_time(payload: dict) -> dict:
    d = dict(payload)
    d.pop("wall_time_ms")
    return d


FAST_ARGS = {
    "inin": (),
    "entropic": (),
    "wigner": ("--grid-n", "256", "--grid-length", "24"),
    "fk": ("--paths", "2000"),
    "hv": ("--paths", "20000"),
    "bell": (),
    "mermin": (),
    "gleason": (),
}


class TestScenarios:
    @pytest.mark.parametrize("scenario", sorted(FAST_ARGS))
    def test_scenario_passes(self, capsys, scenario):
        code, out = run_cli(capsys, "--scenario", scenario, *FAST_ARGS[scenario])
        assert code == 0
        payload = json.loads(out)
        assert payload["scenario"] == scenario
        assert all(payload["checks"].values())
        assert payload["wall_time_ms"] >= 0

    def test_bell_fig1_value(self, capsys):
        code, out = run_cli(capsys, "--scenario", "bell")
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["results"]["chsh_value"] + 2 * 2 ** 0.5) < 1e-12

    def test_mermin_search_empty(self, capsys):
        code, out = run_cli(capsys, "--scenario", "mermin")
        payload = json.loads(out)
        assert payload["results"]["satisfying_assignments"] == 0
        assert payload["results"]["control_assignments"] > 0

    def test_fk_bounds(self, capsys):
        code, out = run_cli(capsys, "--scenario", "fk", "--paths", "2000")
        payload = json.loads(out)
        res = payload["results"]
        assert res["z_lower"] <= res["spectral_reference"] <= res["z_upper"]


class TestDeterminism:
    def test_json_identical_modulo_wall_time(self, capsys):
        _, out_a = run_cli(capsys, "--scenario", "inin", "--seed", "42")
        _, out_b = run_cli(capsys, "--scenario", "inin", "--seed", "42")
        assert strip_time(json.loads(out_a)) == strip_time(json.loads(out_b))

    def test_seed_changes_results(self, capsys):
        _, out_a = run_cli(capsys, "--scenario", "inin", "--seed", "1")
        _, out_b = run_cli(capsys, "--scenario", "inin", "--seed", "2")
        assert json.loads(out_a)["results"] != json.loads(out_b)["results"]


class TestOutputs:
    def test_json_file_output(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        code, _ = run_cli(capsys, "--scenario", "bell", "--out", str(path))
        assert code == 0
        payload = json.loads(path.read_text())
        assert payload["scenario"] == "bell"

    def test_refuses_overwrite_without_force(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        path.write_text("{}")
        code, _ = run_cli(capsys, "--scenario", "bell", "--out", str(path))
        assert code == 2
        assert path.read_text() == "{}"

    def test_force_overwrites(self, capsys, tmp_path):
        path = tmp_path / "report.json"
        path.write_text("{}")
        code, _ = run_cli(capsys, "--scenario", "bell", "--out", str(path),
                          "--force")
        assert code == 0
        assert json.loads(path.read_text())["scenario"] == "bell"

    def test_csv_report_two_lines(self, capsys):
        code, out = run_cli(capsys, "--scenario", "mermin", "--format", "csv")
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 2
        assert len(lines[0].split(",")) == len(lines[1].split(","))

    def test_wigner_csv_field(self, capsys, tmp_path):
        path = tmp_path / "field.csv"
        code, _ = run_cli(capsys, "--scenario", "wigner", "--grid-n", "128",
                          "--grid-length", "24", "--format", "csv",
                          "--out", str(path))
        assert code == 0
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 128 ** 2 + 1


class TestExitCodes:
    def test_bad_scenario_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--scenario", "nonsense"])
        assert exc.value.code == 2

    def test_bad_grid_n_exits_2(self, capsys):
        code, _ = run_cli(capsys, "--scenario", "wigner", "--grid-n", "100")
        assert code == 2

    def test_negative_beta_exits_2(self, capsys):
        code, _ = run_cli(capsys, "--scenario", "fk", "--beta", "-1")
        assert code == 2

    def test_bad_vectors_exits_2(self, capsys):
        code, _ = run_cli(capsys, "--scenario", "bell", "--vectors", "1,0,0")
        assert code == 2

    def test_bad_state_exits_2(self, capsys):
        code, _ = run_cli(capsys, "--scenario", "bell", "--state", "ghz")
        assert code == 2

    def test_check_failure_exits_1(self, capsys, monkeypatch):
        def failing(cfg):
            return {"value": 0.0}, {"always_fails": False}

        monkeypatch.setitem(cli.__dict__, "_run_mermin", failing)
        code, out = run_cli(capsys, "--scenario", "mermin")
        assert code == 1

    def test_runtime_error_exits_3(self, capsys, monkeypatch):
        def broken(cfg):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.__dict__, "_run_mermin", broken)
        code, _ = run_cli(capsys, "--scenario", "mermin")
        assert code == 3

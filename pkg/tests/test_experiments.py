import numpy as np
import pytest

from main import main
from modules.error_handler.errors import ConfigError
from modules.experiments.grid_runner import GridRunner, run_fig4
from modules.experiments.reports import CSV_COLUMNS, ReportGenerator, read_csv, write_csv
from modules.experiments.scenarios import Cell, ScenarioConfig, build_cells, gen_data, run_cell, run_demo
from modules.storage.operations import DesignStore


def small_fig1(out=None, **overrides):
    params = dict(n_values=[3], k_values=[1, 2], items=8, restarts=2, seed=1,
                  methods=["kmeanspp", "self_decodable"], out=out)
    params.update(overrides)
    return ScenarioConfig.defaults("fig1", **params)


class TestScenarioData:
    def test_gen_data_deterministic(self):
        a, b = gen_data(4, 10, seed=3), gen_data(4, 10, seed=3)
        assert np.array_equal(a.spvs, b.spvs)
        assert np.allclose(a.probs, 0.1)
        assert not np.array_equal(a.spvs, gen_data(4, 10, seed=4).spvs)

    def test_single_item(self):
        assert gen_data(3, 1, seed=0).j == 1

    def test_no_items(self):
        with pytest.raises(ConfigError):
            gen_data(3, 0, seed=0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig.defaults("fig4", alphas=[1.5])
        with pytest.raises(ValueError):
            ScenarioConfig.defaults("fig1", k_values=[])

    def test_cells(self):
        cfg = ScenarioConfig.defaults("continuous", preferences=["uniform", "radial"])
        assert [c.scenario for c in build_cells(cfg)] == ["continuous-uniform", "continuous-radial"]
        assert len(build_cells(ScenarioConfig.defaults("fig4"))) == 3 * 11

    def test_designs_dir(self, tmp_path):
        assert small_fig1(tmp_path / "fig1.csv").designs_dir == tmp_path / "fig1_designs"


class TestFig1:
    def test_rows(self):
        rows = GridRunner(small_fig1()).run()
        assert [(r["k_or_alpha"], r["method"]) for r in rows] == [
            (1, "kmeanspp"), (1, "self_decodable"), (2, "kmeanspp"), (2, "self_decodable"),
        ]
        assert all(r["runtime_ms"] == 0 for r in rows)
        assert rows[2]["expected_bits"] <= rows[0]["expected_bits"] + 1e-9

    def test_designs_beat_baseline(self):
        rows = GridRunner(small_fig1()).run()
        bits = {(r["k_or_alpha"], r["method"]): r["expected_bits"] for r in rows}
        assert bits[(2, "kmeanspp")] < bits[(2, "self_decodable")]

    def test_csv_byte_identical(self, tmp_path):
        GridRunner(small_fig1(tmp_path / "a.csv")).run()
        GridRunner(small_fig1(tmp_path / "b.csv")).run()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        header = (tmp_path / "a.csv").read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_design_files_written(self, tmp_path):
        GridRunner(small_fig1(tmp_path / "fig1.csv")).run()
        design = DesignStore(tmp_path / "fig1_designs").load_design("fig1_n3_k2_kmeanspp.json")
        assert design.k == 2 and design.seed == 1

    def test_workers_do_not_change_rows(self):
        assert GridRunner(small_fig1(jobs=2)).run() == GridRunner(small_fig1()).run()

    def test_timing_flag(self):
        rows = GridRunner(small_fig1(timing=True, k_values=[1], methods=["kmeanspp"])).run()
        assert rows[0]["runtime_ms"] >= 0

    def test_unknown_method(self):
        with pytest.raises(ConfigError):
            run_cell(Cell("fig1", 3, 1), small_fig1(methods=["annealing"]))


class TestOtherScenarios:
    def test_fig4_cell(self):
        cfg = ScenarioConfig.defaults("fig4", n_values=[3], alphas=[0.0, 1.0], items=6, budget=(2, 2),
                                      twouser_restarts=2, seed=2, methods=["kmeanspp2u", "self_decodable"])
        rows = run_fig4(cfg)
        assert [r["k_or_alpha"] for r in rows] == [0.0, 0.0, 1.0, 1.0]
        bits = {(r["k_or_alpha"], r["method"]): r["expected_bits"] for r in rows}
        assert bits[(1.0, "kmeanspp2u")] < bits[(0.0, "kmeanspp2u")]
        assert bits[(1.0, "self_decodable")] == pytest.approx(bits[(0.0, "self_decodable")] / 2)

    def test_continuous_cell(self):
        cfg = ScenarioConfig.defaults("continuous", preferences=["uniform"], sample_size=200,
                                      eval_sample_size=2000, restarts=2, seed=0,
                                      methods=["saa", "self_decodable"])
        rows = run_cell(build_cells(cfg)[0], cfg)
        bits = {r["method"]: r["expected_bits"] for r in rows}
        assert bits["saa"] < bits["self_decodable"]


class TestReports:
    ROWS = [
        {"scenario": "fig1", "n": 3, "k_or_alpha": 2, "method": "dca", "expected_bits": 30.0},
        {"scenario": "fig1", "n": 3, "k_or_alpha": 2, "method": "self_decodable", "expected_bits": 40.0},
        {"scenario": "fig1", "n": 3, "k_or_alpha": 2, "method": "self_decodable_int", "expected_bits": 42.0},
    ]

    def test_savings(self):
        entries = ReportGenerator().savings(self.ROWS, "fig1")["entries"]
        assert len(entries) == 1
        assert entries[0]["savings"] == pytest.approx(0.25)
        assert entries[0]["label"] == "K=2"

    def test_best_savings(self):
        assert ReportGenerator().best_savings(self.ROWS, "fig1") == {"dca": pytest.approx(0.25)}

    def test_csv_floats_round_trip(self, tmp_path):
        row = {c: 0 for c in CSV_COLUMNS}
        row.update(scenario="fig1", method="dca", expected_bits=0.1 + 0.2)
        write_csv([row], tmp_path / "r.csv")
        assert float(read_csv(tmp_path / "r.csv")[0]["expected_bits"]) == 0.1 + 0.2


class TestDemo:
    def test_report(self):
        report = run_demo(L=20, seed=0)
        prefs = {p["name"]: p for p in report["preferences"]}
        assert np.allclose(prefs["Pref 1"]["single_codebook"], [0.5, 0.5, 0.0, 0.0])
        assert prefs["Pref 1"]["single_bits"] == pytest.approx(20.0)
        assert prefs["Pref 3"]["single_bits"] == pytest.approx(40.0)
        assert prefs["Pref 3"]["design_bits"] == pytest.approx(20.0)

    def test_round_trip(self):
        trip = run_demo(L=20, seed=0)["round_trip"]
        assert trip["ok"]
        assert trip["payload_bits"] == 20
        assert set(trip["symbols"]) <= {0, 1}


class TestCli:
    def test_design_encode_decode(self, tmp_path):
        pref, design = tmp_path / "pref.json", tmp_path / "design.json"
        assert main(["gen-data", "--n", "4", "--j", "12", "--seed", "5", "--out", str(pref)]) == 0
        assert main(["design-discrete", "--pref", str(pref), "--k", "2", "--restarts", "2",
                     "--out", str(design)]) == 0
        (tmp_path / "item.txt").write_text("0 1 2 3 3 2 1 0\n")
        assert main(["encode", "--codebooks", str(design), "--item", str(tmp_path / "item.txt"),
                     "--out", str(tmp_path / "item.esc")]) == 0
        assert main(["decode", "--codebooks", str(design), "--stream", str(tmp_path / "item.esc"),
                     "--out", str(tmp_path / "back.txt")]) == 0
        assert (tmp_path / "back.txt").read_text().split() == "0 1 2 3 3 2 1 0".split()

    def test_self_decodable_round_trip(self, tmp_path):
        (tmp_path / "item.txt").write_text("2 2 0 1\n")
        assert main(["encode", "--self-decodable", "--item", str(tmp_path / "item.txt"),
                     "--out", str(tmp_path / "item.esd")]) == 0
        assert main(["decode", "--self-decodable", "--stream", str(tmp_path / "item.esd"),
                     "--out", str(tmp_path / "back.txt")]) == 0
        assert (tmp_path / "back.txt").read_text().split() == ["2", "2", "0", "1"]

    def test_codebooks_required(self, tmp_path):
        assert main(["encode", "--item", str(tmp_path / "x.txt"), "--out", str(tmp_path / "x.esc")]) == 2

    def test_missing_preference(self, tmp_path):
        assert main(["design-discrete", "--pref", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "d.json")]) == 2

    def test_budget_exceeded(self, tmp_path):
        pref = tmp_path / "pref.json"
        assert main(["gen-data", "--n", "3", "--j", "4", "--seed", "0", "--out", str(pref)]) == 0
        assert main(["design-discrete", "--pref", str(pref), "--method", "exhaustive", "--k", "3",
                     "--grid-step", "0.02", "--out", str(tmp_path / "d.json")]) == 3

    def test_demo(self, tmp_path, capsys):
        out = tmp_path / "demo.txt"
        assert main(["experiment", "demo", "--seed", "0", "--L", "20", "--out", str(out)]) == 0
        assert "Decoded OK: True" in out.read_text()
        assert "Pref 1" in capsys.readouterr().out


@pytest.mark.slow
def test_full_fig1_grid(tmp_path):
    rows = GridRunner(ScenarioConfig.defaults("fig1", seed=0, methods=["kmeanspp", "self_decodable"],
                                              out=tmp_path / "fig1.csv")).run()
    assert len(rows) == 3 * 10 * 2
    best = ReportGenerator().best_savings(rows, "fig1")
    assert best["kmeanspp"] > 0.1

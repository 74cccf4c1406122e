import csv
import json

import numpy as np
import pytest

from cocogen import cli
from cocogen.model import ScalingLaw, save_scenario, scenario_to_dict
from cocogen.scaling import heterogeneity_presets
from cocogen.scenario import GammaLevel, SweepCell, default_sweep_grid, sample_scenario

from helpers import table1_scenario


def write_scenario(tmp_path, s, name="scenario.json"):
    path = tmp_path / name
    save_scenario(s, path)
    return str(path)


def write_small_sweep(tmp_path, reps=2, radg=5, seed=11):
    payload = {
        "gamma_levels": [{"lo": 0.0, "hi": 0.5}, {"lo": 0.5, "hi": 1.0}],
        "alpha_d_levels": [0.1, 0.9],
        "repetitions": reps,
        "base_seed": seed,
        "n_orgs": 4,
        "xi": 20.0,
        "org_defaults": {"eta": 1.79e20, "mu": 1.79e20},
        "economy": {"eps0_mode": "fixed", "eps0_value": 1.0},
        "bounds": {"d_min": 0, "d_max": 3000},
        "radg_repetitions": radg,
    }
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def example_scenario(seed=7):
    grid = default_sweep_grid()
    cell = SweepCell(
        gamma=GammaLevel(0.0, 1.0), alpha_d=0.5, law=heterogeneity_presets()[0.5]
    )
    return sample_scenario(grid, cell, seed)


class TestFitCommand:
    def test_fit_round_trip(self, tmp_path):
        law = ScalingLaw(5.0, 0.4, 0.08)
        curve = tmp_path / "curve.csv"
        rows = ["d,eps"] + [f"{d},{law.error_at(d)!r}" for d in (500, 1000, 2000, 4000, 8000)]
        curve.write_text("\n".join(rows) + "\n", encoding="utf-8")
        out = tmp_path / "fit.json"
        assert cli.main(["fit", str(curve), "-o", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["law"]["alpha"] == pytest.approx(5.0, rel=1e-6)
        assert payload["law"]["beta"] == pytest.approx(0.4, rel=1e-6)
        assert payload["manifest"]["command"] == "fit"
        assert payload["manifest"]["prng_id"]

    def test_empty_file_is_input_error(self, tmp_path):
        curve = tmp_path / "empty.csv"
        curve.write_text("", encoding="utf-8")
        assert cli.main(["fit", str(curve), "-o", str(tmp_path / "o.json")]) == 2

    def test_two_points_is_fit_error(self, tmp_path):
        curve = tmp_path / "two.csv"
        curve.write_text("d,eps\n500,0.3\n1000,0.2\n", encoding="utf-8")
        assert cli.main(["fit", str(curve), "-o", str(tmp_path / "o.json")]) == 3

    def test_missing_file_is_input_error(self, tmp_path):
        assert cli.main(["fit", str(tmp_path / "nope.csv"), "-o", str(tmp_path / "o.json")]) == 2


class TestSolveCommand:
    def test_shipped_example_solves_and_certifies(self, tmp_path):
        from importlib import resources

        src = resources.files("cocogen").joinpath("data/scenario_example.json")
        scenario_path = tmp_path / "example.json"
        scenario_path.write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
        out = tmp_path / "report.json"
        trace = tmp_path / "trace.csv"
        code = cli.main(
            ["solve", str(scenario_path), "-o", str(out), "--trace", str(trace), "--verify-ne"]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["converged"] is True
        assert payload["ne_certificate"]["is_ne"] is True
        assert len(payload["profile"]) == 10
        assert payload["manifest"]["command"] == "solve"
        with open(trace, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "F"]
        assert len(rows) == len(payload["potential_trace"]) + 1

    def test_golden_profile_for_shipped_example(self, tmp_path):
        from importlib import resources

        src = resources.files("cocogen").joinpath("data/scenario_example.json")
        p = tmp_path / "example.json"
        p.write_text(src.read_text(encoding="utf-8"), encoding="utf-8")
        out = tmp_path / "report.json"
        assert cli.main(["solve", str(p), "-o", str(out)]) == 0
        payload = json.loads(out.read_text())
        golden = [3000.0, 1278.0, 3000.0, 3000.0, 1343.0, 1139.0, 90.0, 1198.0, 305.0, 1874.0]
        assert payload["profile"] == golden
        assert payload["welfare"] == pytest.approx(302.2988, rel=1e-4)

    def test_malformed_scenario_is_input_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        assert cli.main(["solve", str(bad)]) == 2

    def test_invalid_scenario_is_input_error(self, tmp_path):
        payload = scenario_to_dict(example_scenario())
        payload["market"]["xi"] = 1e9
        bad = tmp_path / "invalid.json"
        bad.write_text(json.dumps(payload), encoding="utf-8")
        assert cli.main(["solve", str(bad)]) == 2

    def test_loose_tolerance_uses_fewer_iterations(self, tmp_path, capsys):
        path = write_scenario(tmp_path, example_scenario())
        iters = {}
        for tol in ("1e-3", "1e-9"):
            out = tmp_path / f"r{tol}.json"
            assert cli.main(
                ["solve", path, "-o", str(out), "--tol", tol, "--init", "midpoint"]
            ) == 0
            iters[tol] = json.loads(out.read_text())["iterations"]
        assert iters["1e-3"] < iters["1e-9"]

    def test_nonconvergence_exit_code_and_override(self, tmp_path):
        path = write_scenario(tmp_path, example_scenario())
        args = ["solve", path, "-o", str(tmp_path / "r.json"), "--max-iters", "1",
                "--tol", "1e-16", "--init", "midpoint"]
        assert cli.main(args) == 4
        assert cli.main(args + ["--allow-nonconverged"]) == 0

    def test_payoff_mode_flag_changes_bb(self, tmp_path):
        rng = np.random.Generator(np.random.Philox(key=np.array([1, 1], dtype=np.uint64)))
        g = rng.uniform(0, 1, size=(10, 10))
        g = (g + g.T) / 2
        np.fill_diagonal(g, 0.0)
        s = example_scenario()
        from dataclasses import replace
        from cocogen.model import Market

        s = replace(s, market=Market(gamma=g, xi=s.market.xi, phi=s.market.phi))
        path = write_scenario(tmp_path, s)
        out_l = tmp_path / "lit.json"
        out_a = tmp_path / "anti.json"
        assert cli.main(["solve", path, "-o", str(out_l), "--payoff-mode", "literal"]) == 0
        assert cli.main(["solve", path, "-o", str(out_a), "--payoff-mode", "antisymmetric"]) == 0
        lit = json.loads(out_l.read_text())
        anti = json.loads(out_a.read_text())
        assert not lit["bb"]["balanced"]
        assert anti["bb"]["balanced"]

    def test_case_mode_printed_is_available(self, tmp_path):
        path = write_scenario(tmp_path, example_scenario())
        code = cli.main(
            ["solve", path, "-o", str(tmp_path / "r.json"), "--case-mode", "printed",
             "--allow-nonconverged"]
        )
        assert code in (0, 4)


class TestSweepCommand:
    def test_row_counts_and_schema(self, tmp_path):
        sweep = write_small_sweep(tmp_path)
        out_dir = tmp_path / "out"
        assert cli.main(["sweep", sweep, "-o", str(out_dir), "--jobs", "1"]) == 0
        with open(out_dir / "results.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 2 * 2 * 4
        assert set(rows[0]) == set(cli.SWEEP_COLUMNS)
        assert {r["scheme"] for r in rows} == {"CoCoGen", "VCFL", "WCO", "RaDG"}
        assert all(r["status"] == "ok" for r in rows)
        # per-figure aggregates exist and carry the manifest sidecars
        for name in ("aggregate.csv", "fig3_cocogen.csv", "fig4_schemes.csv"):
            assert (out_dir / name).exists()
            manifest = json.loads((out_dir / (name + ".manifest.json")).read_text())
            assert manifest["manifest"]["command"] == "sweep"
            assert manifest["manifest"]["prng_id"]

    def test_csv_is_rfc4180_parseable_with_17_digit_floats(self, tmp_path):
        sweep = write_small_sweep(tmp_path, reps=1, radg=3)
        out_dir = tmp_path / "out"
        assert cli.main(["sweep", sweep, "-o", str(out_dir), "--jobs", "1"]) == 0
        with open(out_dir / "results.csv", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            widths = {len(row) for row in reader}
        assert widths == {len(header)}
        with open(out_dir / "results.csv", newline="") as fh:
            row = next(csv.DictReader(fh))
        assert float(row["welfare"]) == float(repr(float(row["welfare"])))

    def test_byte_identical_reruns(self, tmp_path):
        sweep = write_small_sweep(tmp_path)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert cli.main(["sweep", sweep, "-o", str(out1), "--jobs", "2"]) == 0
        assert cli.main(["sweep", sweep, "-o", str(out2), "--jobs", "1"]) == 0
        b1 = (out1 / "results.csv").read_bytes()
        b2 = (out2 / "results.csv").read_bytes()
        assert b1 == b2

    def test_seed_flag_overrides_base_seed(self, tmp_path):
        sweep = write_small_sweep(tmp_path)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert cli.main(["sweep", sweep, "-o", str(out1), "--jobs", "1", "--seed", "123"]) == 0
        assert cli.main(["sweep", sweep, "-o", str(out2), "--jobs", "1", "--seed", "124"]) == 0
        assert (out1 / "results.csv").read_bytes() != (out2 / "results.csv").read_bytes()


class TestCompareCommand:
    def test_zero_gamma_makes_cocogen_equal_wco(self, tmp_path, capsys):
        s = table1_scenario(seed=81, gamma_range=(0.0, 0.0))
        path = write_scenario(tmp_path, s)
        out = tmp_path / "cmp.csv"
        assert cli.main(["compare", path, "-o", str(out), "--radg-reps", "5"]) == 0
        with open(out, newline="") as fh:
            rows = {r["scheme"]: r for r in csv.DictReader(fh)}
        assert rows["CoCoGen"]["welfare"] == rows["WCO"]["welfare"]
        assert rows["CoCoGen"]["mean_d_gen"] == rows["WCO"]["mean_d_gen"]

    def test_free_generation_beats_vcfl(self, tmp_path):
        s = table1_scenario(seed=82, cost_scale=1e-6)
        path = write_scenario(tmp_path, s)
        out = tmp_path / "cmp.csv"
        assert cli.main(["compare", path, "-o", str(out), "--radg-reps", "5"]) == 0
        with open(out, newline="") as fh:
            rows = {r["scheme"]: r for r in csv.DictReader(fh)}
        assert float(rows["CoCoGen"]["welfare"]) > float(rows["VCFL"]["welfare"])

    def test_default_scenario_ranking_matches_sweep_ordering(self, tmp_path, capsys):
        path = write_scenario(tmp_path, example_scenario(seed=83))
        assert cli.main(["compare", path, "--radg-reps", "40"]) == 0
        table = capsys.readouterr().out
        out = tmp_path / "cmp.csv"
        assert cli.main(["compare", path, "-o", str(out), "--radg-reps", "40"]) == 0
        with open(out, newline="") as fh:
            rows = {r["scheme"]: float(r["welfare"]) for r in csv.DictReader(fh)}
        assert rows["CoCoGen"] >= rows["RaDG"] >= rows["WCO"] >= rows["VCFL"]
        assert "CoCoGen" in table

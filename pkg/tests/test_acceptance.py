import argparse
from pathlib import Path

from eval import acceptance


def test_default_script_runs_every_decided_check():
    script = Path(__file__).resolve().parents[1] / "scripts" / "run_acceptance.sh"
    line = next(l for l in script.read_text(encoding="utf-8").splitlines() if "CHECKS:-" in l)
    defaults = line.split("CHECKS:-", 1)[1].split("}", 1)[0].split(",")
    assert set(defaults) <= set(acceptance.CHECKS)
    for name in ("conservatism", "pilot_trend", "benchmark_gap", "perfect_csi", "worst_case_oracle"):
        assert name in defaults


def test_worst_case_oracle_check():
    result = acceptance.check_worst_case_oracle(argparse.Namespace(seed=0))
    assert result["passed"]
    assert result["instances"] == 100
    assert result["min_sample_minus_bound"] >= -1e-9


def test_perfect_csi_check():
    args = argparse.Namespace(config=None, seed=0, scenarios=2)
    result = acceptance.check_perfect_csi(args)
    assert result["seeds"] == 2
    for case in result["cases"]:
        assert case["feasible"]
        assert -1e-6 <= case["power_over_closed_form_db"] <= 0.2


def test_summarize_separates_informative_checks():
    results = {
        "benchmark_gap": {"passed": False, "median_gap_db": 0.445, "target_gap_db": 0.5},
        "fixed_channel": {"passed": None},
        "gpd_recovery": {"passed": True},
    }
    summary = acceptance.summarize(results)
    assert summary["decided"] == 2
    assert summary["failed"] == ["benchmark_gap"]

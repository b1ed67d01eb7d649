"""
実行設定の検証・レポート出力・CLIのユニットテスト
"""

import json

import numpy as np
import pytest
import sys
import yaml
from jsonschema import validate
from pathlib import Path

# プロジェクトルートをパスに追加
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli import (
    CHECK_MAX_DIMENSION,
    CHECKS,
    REAL_ORDER_CHECKS,
    _applicable_checks,
    _z_values,
    build_parser,
    build_run_config,
    main,
)
from src.data.loader import CalibrationStore, load_defaults, merge_config
from src.data.validator import RunConfig, RunConfigValidator, parse_R_grid
from src.errors import ConfigError
from src.reporting.bound_report import ConvergenceReport, stability_report
from src.reporting.envelope import CalibrationEntry, ProfileEntry, ReportEnvelope

SCHEMA_PATH = project_root / "config" / "report_schema.json"


@pytest.fixture
def schema():
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def small_config(tmp_path):
    """較正ストアを一時ディレクトリに置き、格子を小さくした設定"""
    path = tmp_path / "small.yaml"
    config = {
        "calibration": {"store_path": str(tmp_path / "calibration.yaml")},
        "grids": {"r_max": 4.0, "r_points": 9, "R_points": 16},
    }
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


class TestParseRGrid:
    """R-格子指定の解釈のテスト"""

    def test_log_default(self):
        """尺度の省略時は log"""
        assert parse_R_grid("2:100:5") == (2.0, 100.0, 5, True)

    def test_linear(self):
        assert parse_R_grid("2:100:5:lin") == (2.0, 100.0, 5, False)

    @pytest.mark.parametrize("spec", ["2:100", "a:b:c", "2:100:5:cubic"])
    def test_invalid(self, spec):
        """形式違反は ConfigError"""
        with pytest.raises(ConfigError):
            parse_R_grid(spec)


class TestRunConfigValidator:
    """実行設定の検証のテスト"""

    def test_valid_defaults(self):
        """既定値は妥当"""
        validator = RunConfigValidator(CHECKS)
        results = validator.validate(RunConfig("verify", checks=["phi0"]))
        assert results["is_valid"]
        assert "VALID" in validator.generate_report()

    @pytest.mark.parametrize(
        "kwargs,failed",
        [
            ({"n": 1}, "dimension"),
            ({"p": 3.0}, "exponent"),
            ({"z_re": -1.0}, "riesz_order"),
            ({"R": 0.5}, "spectral_scale"),
            ({"t": 0.0}, "heat_time"),
            ({"rel_tol": 0.0}, "tolerances"),
            ({"checks": ["nonsense"]}, "check_names"),
            ({"fmt": "xml"}, "output_format"),
            ({"checks": ["sobolev-growth"], "n": 6}, "check_scope"),
            ({"checks": ["bessel-deriv"], "z_im": 1.0}, "check_scope"),
        ],
    )
    def test_violations(self, kwargs, failed):
        """各事前条件の違反を検出する"""
        validator = RunConfigValidator(CHECKS, REAL_ORDER_CHECKS, CHECK_MAX_DIMENSION)
        results = validator.validate(RunConfig("verify", **kwargs))
        assert not results["is_valid"]
        assert not results["checks"][failed]["passed"]

    def test_require_valid_lists_known_checks(self):
        """未知の検証項目名は有効な名前を列挙した ConfigError"""
        with pytest.raises(ConfigError, match="alexo7"):
            RunConfigValidator(CHECKS).require_valid(RunConfig("verify", checks=["nonsense"]))

    def test_R_values(self):
        """R-格子の展開"""
        run = RunConfig("converge", R_grid=(2.0, 200.0, 3, True))
        assert np.allclose(run.R_values(), [2.0, 20.0, 200.0])
        assert RunConfig("converge").R_values() is None

    def test_R_offset_range_from_config(self):
        """最大関数の R 格子は grids の設定から読む"""
        assert RunConfig("converge", settings=load_defaults()).R_offset_range() == (1.0, 10000.0, 32)
        settings = {"grids": {"R_offset_min": 2.0, "R_offset_max": 50.0, "R_points": 5}}
        assert RunConfig("converge", settings=settings).R_offset_range() == (2.0, 50.0, 5)

    def test_z_values_carry_imaginary_part(self):
        """--z-im は既定の z の列にも付く"""
        run = RunConfig("verify", z_im=1.5)
        assert _z_values(run, (1.0, 2.5)) == [complex(1.0, 1.5), complex(2.5, 1.5)]
        run = RunConfig("verify", z_re=3.0, z_im=-0.5)
        assert _z_values(run, (1.0, 2.5)) == [complex(3.0, -0.5)]

    def test_applicable_checks(self):
        """--all は適用できない検証項目を理由つきで飛ばす"""
        checks, skipped = _applicable_checks(3, 0.0)
        assert checks == list(CHECKS) and skipped == {}
        checks, skipped = _applicable_checks(6, 0.0)
        assert "sobolev-growth" not in checks
        assert skipped == {"sobolev-growth": "supports n <= 5"}
        checks, skipped = _applicable_checks(3, 1.0)
        assert skipped == {"bessel-deriv": "needs real z"}
        assert len(checks) == len(CHECKS) - 1

    def test_all_in_high_dimension_is_valid(self):
        """n = 6 の --all は設定として妥当で、飛ばした項目を記録する"""
        run = build_run_config(build_parser().parse_args(["verify", "--all", "--n", "6"]))
        assert "sobolev-growth" not in run.checks
        assert run.echo()["skipped"] == {"sobolev-growth": "supports n <= 5"}

    def test_check_registry(self):
        """検証項目は18個"""
        assert len(CHECKS) == 18
        assert {"phi0", "alexo6", "alexo7", "hhat", "mellin", "lq-infinity"} <= set(CHECKS)


class TestConfigAndStore:
    """設定ファイルと較正ストアのテスト"""

    def test_defaults_load(self):
        """既定の設定ファイルが読める"""
        config = load_defaults()
        assert config["quadrature"]["order"] == 16
        assert config["convergence"]["z"] == 2.6

    def test_merge_is_nested(self):
        """入れ子の辞書は部分的に上書きされる"""
        merged = merge_config({"a": {"x": 1, "y": 2}, "b": 3}, {"a": {"y": 5}})
        assert merged == {"a": {"x": 1, "y": 5}, "b": 3}

    def test_missing_file(self, tmp_path):
        """存在しないファイルは ConfigError"""
        with pytest.raises(ConfigError):
            load_defaults(tmp_path / "missing.yaml")

    def test_store_version_mismatch(self, tmp_path):
        """バージョンが違う項目は古いものとして無視する"""
        path = tmp_path / "calibration.yaml"
        CalibrationStore(path, version="0.9").put(3, 0.05, 1e-9)
        assert CalibrationStore(path, version="0.9").get(3)["constant"] == 0.05
        assert CalibrationStore(path, version="1.0").get(3) is None


class TestReportEnvelope:
    """レポート出力のテスト"""

    def _envelope(self) -> ReportEnvelope:
        envelope = ReportEnvelope("heat", {"n": 3, "t": 1.0})
        envelope.add(ProfileEntry("heat", np.array([0.0, 1.0]), np.array([0.5, 0.25]), np.array([1e-15, 1e-15]), {"t": 1.0}))
        envelope.add(stability_report("phi0", 1.0, 1.01, 0.05, rows=[{"r": 0.5, "ratio": 1.0}], details={"n": 3}))
        envelope.add(CalibrationEntry(3, 0.05066, 1e-9, 1e-6))
        return envelope

    def test_json_matches_schema(self, schema):
        """JSON要約はスキーマに従う"""
        validate(json.loads(self._envelope().to_json()), schema)

    def test_json_handles_non_finite(self, schema):
        """NaN と無限大もJSONで表せる"""
        envelope = ReportEnvelope("verify")
        envelope.add(stability_report("kappa-inf", float("inf"), float("nan"), 0.05))
        data = json.loads(envelope.to_json())
        validate(data, schema)
        assert data["entries"][0]["sup_ratio"] == "inf"
        assert data["entries"][0]["refined_sup_ratio"] is None
        assert not data["passed"]

    def test_csv_columns(self):
        """CSVは check 列から始まり全エントリの行を含む"""
        lines = self._envelope().to_csv().splitlines()
        header = lines[0].split(",")
        assert header[0] == "check"
        assert {"r", "value", "floor", "ratio"} <= set(header)
        assert len(lines) == 1 + 2 + 1 + 1

    def test_write_formats(self, tmp_path):
        """csv 形式はCSVとJSON、json 形式はJSONのみ"""
        written = self._envelope().write(tmp_path / "both", "csv")
        assert sorted(p.suffix for p in written) == [".csv", ".json"]
        written = self._envelope().write(tmp_path / "only", "json")
        assert [p.name for p in written] == ["only.json"]
        assert not (tmp_path / "only.csv").exists()

    def _convergence(self, **kwargs) -> ConvergenceReport:
        xs = np.linspace(0.0, 1.0, 3)
        return ConvergenceReport(
            test_function="heat",
            p=1.0,
            z=complex(2.6, 0.0),
            R_grid=np.array([10.0, 100.0]),
            sup_errors=np.array([1e-2, 1e-4]),
            point_errors=np.array([[1e-2, 1e-3, 1e-4], [1e-4, 1e-5, 1e-6]]),
            xs=xs,
            maximal=np.array([0.1, 0.05, 0.01]),
            critical_index=2.5,
            monotone_ratio=0.01,
            final_error=1e-4,
            floor=1e-12,
            verdict="converging",
            **kwargs,
        )

    def test_convergence_needs_stable_maximal(self, schema):
        """最大関数が R 格子の倍化で動くと収束判定は不合格"""
        assert self._convergence().passed
        assert self._convergence().maximal_stable is None
        assert self._convergence(maximal_change=0.001).passed
        unstable = self._convergence(maximal_change=0.05, maximal_tolerance=0.02)
        assert not unstable.passed
        envelope = ReportEnvelope("converge")
        envelope.add(unstable)
        data = json.loads(envelope.to_json())
        validate(data, schema)
        entry = data["entries"][0]
        assert entry["maximal_stable"] is False
        assert entry["maximal"] == [0.1, 0.05, 0.01]
        assert entry["xs"] == [0.0, 0.5, 1.0]
        assert not data["passed"]

    def test_failures(self):
        """失敗したエントリの名前"""
        envelope = self._envelope()
        envelope.add(CalibrationEntry(2, 0.1, 1e-3, 1e-6))
        assert envelope.failures() == ["calibration-n2"]
        assert not envelope.passed


class TestMain:
    """CLIエントリポイントのテスト"""

    def test_list_checks(self, capsys):
        """verify --list は検証項目名を表示して0で終わる"""
        assert main(["verify", "--list"]) == 0
        assert capsys.readouterr().out.split() == list(CHECKS)

    def test_bad_exponent_exit_code(self):
        """p = 3 は終了コード2"""
        assert main(["converge", "--p", "3"]) == 2

    def test_unknown_check_exit_code(self):
        """未知の検証項目名は終了コード2"""
        assert main(["verify", "--check", "nonsense"]) == 2

    def test_bad_R_grid_exit_code(self):
        """R-格子の形式違反は終了コード2"""
        assert main(["converge", "--R-grid", "1:2"]) == 2

    def test_calibrate_writes_store_and_report(self, tmp_path, small_config, schema):
        """calibrate は較正ストアとJSONレポートを書く"""
        out = tmp_path / "calibrate"
        assert main(["calibrate", "--config", str(small_config), "--out", str(out), "--format", "json"]) == 0
        store = CalibrationStore(tmp_path / "calibration.yaml")
        assert store.get(3)["constant"] == pytest.approx(1.0 / (2.0 * np.pi ** 2), rel=1e-6)
        data = json.loads((tmp_path / "calibrate.json").read_text(encoding="utf-8"))
        validate(data, schema)
        assert data["entries"][0]["kind"] == "calibration"

    def test_heat_profile_is_deterministic(self, tmp_path, small_config):
        """同じ設定の2回の実行は同一のファイルを書く"""
        first, second = tmp_path / "first", tmp_path / "second"
        for out in (first, second):
            assert main(["heat", "--config", str(small_config), "--t", "1.0", "--out", str(out)]) == 0
        for suffix in (".csv", ".json"):
            assert first.with_suffix(suffix).read_bytes() == second.with_suffix(suffix).read_bytes()
        header = first.with_suffix(".csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == "check,r,value,floor"

    def test_converge_writes_verdict(self, tmp_path, small_config, schema):
        """converge は既定の R 格子で収束を判定する"""
        out = tmp_path / "converge"
        assert main(["converge", "--config", str(small_config), "--out", str(out)]) == 0
        data = json.loads(out.with_suffix(".json").read_text(encoding="utf-8"))
        validate(data, schema)
        entry = data["entries"][0]
        assert entry["kind"] == "convergence"
        assert entry["verdict"] == "converging"
        assert entry["critical_index"] == 2.5
        assert entry["maximal_stable"] is True
        assert entry["maximal_change"] < 0.02
        assert len(entry["maximal"]) == len(entry["xs"]) == 13

    def test_out_of_scope_check_exit_code(self):
        """複素 z の bessel-deriv と n = 6 の sobolev-growth は終了コード2"""
        assert main(["verify", "--check", "bessel-deriv", "--z-im", "1"]) == 2
        assert main(["verify", "--check", "sobolev-growth", "--n", "6"]) == 2

    def test_verify_is_deterministic(self, tmp_path, small_config):
        """同じ検証項目の2回の実行は同一のファイルを書く"""
        first, second = tmp_path / "first", tmp_path / "second"
        for out in (first, second):
            args = ["verify", "--check", "phi0", "--check", "modular", "--config", str(small_config), "--out", str(out)]
            assert main(args) == 0
        for suffix in (".csv", ".json"):
            assert first.with_suffix(suffix).read_bytes() == second.with_suffix(suffix).read_bytes()
        data = json.loads(first.with_suffix(".json").read_text(encoding="utf-8"))
        assert [e["name"] for e in data["entries"]] == ["phi0", "modular"]

    def test_verify_single_check_to_stdout(self, capsys, small_config, schema):
        """--out なしではJSONを標準出力に書く"""
        assert main(["verify", "--check", "modular", "--config", str(small_config)]) == 0
        data = json.loads(capsys.readouterr().out)
        validate(data, schema)
        assert data["command"] == "verify"
        assert [e["name"] for e in data["entries"]] == ["modular"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])

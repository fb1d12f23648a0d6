import contextlib
import io
import json
import logging
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
from numpy.testing import assert_allclose, assert_array_equal

import main as app
from baker_core import quantum_baker, save_custom_unitary
from errors import ConfigError, NumericalFailureError


def _read_csv_with_metadata(path: Path) -> tuple[dict, pd.DataFrame]:
    meta = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(": ")
        meta[key] = value
    return meta, pd.read_csv(path, comment="#")


class _TempDirCase(unittest.TestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp(prefix="qmb-cli-"))
        self.addCleanup(lambda: shutil.rmtree(self.tmp, ignore_errors=True))


class OutputTimesTests(unittest.TestCase):
    def test_dense_up_to_one_thousand(self):
        assert_array_equal(app.output_times(10), np.arange(11))
        assert_array_equal(app.output_times(1000), np.arange(1001))

    def test_log_thinned_above_one_thousand(self):
        axis = app.output_times(100_000)
        assert_array_equal(axis[:1001], np.arange(1001))
        self.assertEqual(axis[-1], 100_000)
        self.assertTrue(np.all(np.diff(axis) > 0))
        self.assertLess(axis.size, 1001 + 3 * app.THIN_POINTS_PER_DECADE)


class RunConfigTests(_TempDirCase):
    def test_odd_dimension_names_the_field(self):
        with self.assertRaises(ConfigError) as ctx:
            app.RunConfig(mode="exact", n=7).validate()
        self.assertEqual(ctx.exception.field, "n")

    def test_dimension_is_required_outside_classical_mode(self):
        with self.assertRaises(ConfigError) as ctx:
            app.RunConfig(mode="rmt-closed").validate()
        self.assertEqual(ctx.exception.field, "n")
        app.RunConfig(mode="classical", cells=64, t_max=20).validate()

    def test_chain_horizon_is_checked_up_front(self):
        with self.assertRaises(ConfigError) as ctx:
            app.RunConfig(mode="chain", n=2, cells=4, t_max=17).validate()
        self.assertEqual(ctx.exception.field, "t_max")

    def test_monte_carlo_needs_two_samples(self):
        with self.assertRaises(ConfigError):
            app.RunConfig(mode="rmt-mc", n=4, samples=1).validate()

    def test_custom_local_needs_a_file(self):
        with self.assertRaises(ConfigError) as ctx:
            app.RunConfig(mode="exact", local="custom").validate()
        self.assertEqual(ctx.exception.field, "unitary_file")

    def test_flags_override_config_file(self):
        cfg_path = self.tmp / "run.json"
        cfg_path.write_text(json.dumps({"mode": "exact", "n": 8, "t-max": 50, "phi_q": 0.5}), encoding="utf-8")
        args = app.build_parser().parse_args(["--config", str(cfg_path), "--t-max", "20"])

        config = app.config_from_args(args)

        self.assertEqual(config.n, 8)
        self.assertEqual(config.t_max, 20)
        self.assertEqual(config.phi_q, 0.5)

    def test_unknown_config_key_is_rejected(self):
        cfg_path = self.tmp / "run.json"
        cfg_path.write_text(json.dumps({"mode": "exact", "dimension": 8}), encoding="utf-8")
        with self.assertRaises(ConfigError) as ctx:
            app.load_config_file(cfg_path)
        self.assertEqual(ctx.exception.field, "dimension")

    def test_null_value_is_rejected(self):
        cfg_path = self.tmp / "run.json"
        cfg_path.write_text(json.dumps({"mode": "exact", "n": 4, "t-max": None}), encoding="utf-8")
        with self.assertRaises(ConfigError) as ctx:
            app.load_config_file(cfg_path)
        self.assertEqual(ctx.exception.field, "t-max")
        self.assertEqual(ctx.exception.reason, "must not be null")

    def test_parser_errors_raise_config_error_for_the_flag(self):
        with self.assertRaises(ConfigError) as ctx:
            app.build_parser().parse_args(["--workers", "many"])
        self.assertEqual(ctx.exception.field, "workers")

    def test_non_integer_value_is_rejected(self):
        cfg_path = self.tmp / "run.json"
        cfg_path.write_text(json.dumps({"n": 2.5}), encoding="utf-8")
        with self.assertRaises(ConfigError) as ctx:
            app.load_config_file(cfg_path)
        self.assertEqual(ctx.exception.field, "n")


class RunOutputTests(_TempDirCase):
    def test_exact_csv_has_metadata_block_and_columns(self):
        out = self.tmp / "exact.csv"
        code, path = app.run(app.RunConfig(mode="exact", n=8, t_max=30, out=str(out)))

        self.assertEqual(code, app.EXIT_OK)
        self.assertEqual(path, out)
        meta, frame = _read_csv_with_metadata(out)
        self.assertEqual(list(frame.columns), ["t", "msd"])
        self.assertEqual(len(frame), 31)
        self.assertAlmostEqual(frame["msd"].iloc[1], 1.0, delta=1e-12)
        for key in ("version", "mode", "n", "deg_tol", "reconstruction_residual", "ballistic_coefficient", "generated_at"):
            self.assertIn(key, meta)
        self.assertEqual(meta["version"], app.APP_VERSION)

    def test_output_directory_gets_default_file_name(self):
        code, path = app.run(app.RunConfig(mode="rmt-closed", n=16, t_max=40, out=str(self.tmp) + "/"))
        self.assertEqual(code, 0)
        self.assertEqual(path, self.tmp / "msd_rmt-closed_N16.csv")
        self.assertTrue(path.exists())

    def test_compare_on_two_cells_matches_exact_and_chain(self):
        out = self.tmp / "compare.json"
        app.run(app.RunConfig(mode="compare", n=2, cells=2, t_max=8, format="json", out=str(out)))

        payload = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(payload["columns"], ["t", "exact", "chain", "rmt_cue", "rmt_coe", "classical"])
        frame = pd.DataFrame(payload["data"])
        assert_allclose(frame["exact"], frame["chain"], atol=1e-8)
        assert_allclose(frame["classical"], frame["t"])
        self.assertEqual(payload["metadata"]["chain_column"], "present")

    def test_compare_beyond_horizon_omits_chain_column(self):
        out = self.tmp / "compare.csv"
        with self.assertLogs(app.APP_LOGGER_NAME, level=logging.WARNING):
            app.run(app.RunConfig(mode="compare", n=4, cells=2, t_max=20, out=str(out)))

        meta, frame = _read_csv_with_metadata(out)
        self.assertEqual(list(frame.columns), ["t", "exact", "rmt_cue", "rmt_coe", "classical"])
        self.assertTrue(meta["chain_column"].startswith("omitted"))

    def test_monte_carlo_json_has_stderr(self):
        out = self.tmp / "mc.json"
        app.run(app.RunConfig(mode="rmt-mc", n=4, samples=4, seed=3, t_max=10, format="json", out=str(out)))

        payload = json.loads(out.read_text(encoding="utf-8"))
        self.assertEqual(payload["columns"], ["t", "msd", "stderr"])
        self.assertEqual(payload["metadata"]["seed"], 3)
        self.assertEqual(len(payload["data"]), 11)

    def test_repeated_runs_differ_only_in_timestamp(self):
        first, second = self.tmp / "a.csv", self.tmp / "b.csv"
        for out in (first, second):
            app.run(app.RunConfig(mode="rmt-mc", n=4, samples=3, seed=9, t_max=12, out=str(out)))

        def strip(path):
            return [ln for ln in path.read_text(encoding="utf-8").splitlines() if not ln.startswith("# generated_at")]

        self.assertEqual(strip(first), strip(second))

    def test_xlsx_has_data_and_metadata_sheets(self):
        out = self.tmp / "exact.xlsx"
        app.run(app.RunConfig(mode="exact", n=4, t_max=5, format="xlsx", out=str(out)))

        sheets = pd.read_excel(out, sheet_name=None)
        self.assertEqual(set(sheets), {"msd", "metadata"})
        self.assertEqual(list(sheets["msd"].columns), ["t", "msd"])
        self.assertIn("mode", set(sheets["metadata"]["key"]))

    def test_custom_unitary_file_sets_dimension(self):
        unitary = save_custom_unitary(quantum_baker(4), self.tmp / "u4.txt")
        code, path = app.run(
            app.RunConfig(mode="exact", local="custom", unitary_file=str(unitary), t_max=6, out=str(self.tmp) + "/")
        )
        self.assertEqual(code, 0)
        self.assertEqual(path.name, "msd_exact_N4.csv")

    def test_classical_mode(self):
        out = self.tmp / "classical.csv"
        app.run(app.RunConfig(mode="classical", cells=32, points=2000, t_max=10, seed=4, out=str(out)))

        _, frame = _read_csv_with_metadata(out)
        self.assertEqual(list(frame.columns), ["t", "msd", "stderr"])
        self.assertEqual(frame["msd"].iloc[1], 1.0)


class MainExitCodeTests(_TempDirCase):
    def setUp(self):
        super().setUp()
        self.logger = logging.getLogger(app.APP_LOGGER_NAME)
        self._handlers = list(self.logger.handlers)
        self._data_dir = app.DATA_DIR
        app._set_data_dir(str(self.tmp))
        self.addCleanup(self._restore_logging)

    def _restore_logging(self):
        for handler in list(self.logger.handlers):
            if handler not in self._handlers:
                self.logger.removeHandler(handler)
                handler.close()
        for handler in self._handlers:
            if handler not in self.logger.handlers:
                self.logger.addHandler(handler)
        app.DATA_DIR = self._data_dir
        app.LOG_DIR = str(Path(self._data_dir) / "logs")
        app.LOG_FILE_PATH = str(Path(app.LOG_DIR) / f"{app.APP_NAME}.log")

    def _main(self, argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = app.main([*argv, "--lang", "en"])
        return code, stdout.getvalue(), stderr.getvalue()

    def test_success_prints_output_path(self):
        out = self.tmp / "ok.csv"
        code, stdout, _ = self._main(["--mode", "exact", "--n", "4", "--t-max", "5", "--out", str(out)])
        self.assertEqual(code, app.EXIT_OK)
        self.assertIn(str(out), stdout)

    def test_default_output_goes_to_data_dir(self):
        code, _, _ = self._main(["--mode", "rmt-closed", "--n", "6", "--t-max", "5"])
        self.assertEqual(code, 0)
        self.assertTrue((self.tmp / "generated_reports" / "msd_rmt-closed_N6.csv").exists())

    def test_invalid_dimension_exits_one_with_single_line(self):
        code, _, stderr = self._main(["--mode", "exact", "--n", "3", "--out", str(self.tmp / "x.csv")])
        self.assertEqual(code, app.EXIT_CONFIG)
        lines = stderr.strip().splitlines()
        self.assertEqual(len(lines), 1)
        self.assertIn("'n'", lines[0])

    def test_usage_error_exits_one(self):
        code, _, stderr = self._main(["--mode", "nonsense"])
        self.assertEqual(code, app.EXIT_CONFIG)
        self.assertEqual(len(stderr.strip().splitlines()), 1)
        self.assertIn("'mode'", stderr)

    def test_malformed_flag_value_is_a_single_line_naming_the_flag(self):
        code, _, stderr = self._main(["--mode", "exact", "--n", "abc"])
        self.assertEqual(code, app.EXIT_CONFIG)
        lines = stderr.strip().splitlines()
        self.assertEqual(len(lines), 1)
        self.assertIn("'n'", lines[0])
        self.assertNotIn("usage:", stderr)

    def test_dashed_flag_is_reported_by_field_name(self):
        code, _, stderr = self._main(["--t-max", "soon"])
        self.assertEqual(code, app.EXIT_CONFIG)
        self.assertIn("'t_max'", stderr)

    def test_null_config_value_exits_one_naming_the_key(self):
        cfg_path = self.tmp / "run.json"
        cfg_path.write_text('{"mode": "exact", "n": 4, "t-max": null}', encoding="utf-8")
        code, _, stderr = self._main(["--config", str(cfg_path)])
        self.assertEqual(code, app.EXIT_CONFIG)
        self.assertEqual(len(stderr.strip().splitlines()), 1)
        self.assertIn("t-max", stderr)

    def test_numerical_failure_exits_two(self):
        with patch.object(app, "decompose", side_effect=NumericalFailureError("no convergence", residual=1.0)):
            code, _, stderr = self._main(["--mode", "exact", "--n", "4", "--out", str(self.tmp / "x.csv")])
        self.assertEqual(code, app.EXIT_NUMERICAL)
        self.assertIn("no convergence", stderr)

    def test_missing_config_file_exits_three(self):
        code, _, _ = self._main(["--config", str(self.tmp / "missing.json")])
        self.assertEqual(code, app.EXIT_IO)

    def test_unexpected_error_exits_four(self):
        with patch.object(app, "write_table", side_effect=RuntimeError("boom")):
            code, _, stderr = self._main(["--mode", "rmt-closed", "--n", "4", "--t-max", "3"])
        self.assertEqual(code, app.EXIT_UNKNOWN)
        self.assertEqual(stderr.strip(), app.I18N["en"]["ERR_GENERIC"])

    def test_polish_diagnostics(self):
        stderr = io.StringIO()
        with contextlib.redirect_stderr(stderr):
            code = app.main(["--mode", "exact", "--n", "3", "--lang", "pl"])
        app.set_lang("en")
        self.assertEqual(code, app.EXIT_CONFIG)
        self.assertIn("Nieprawidłowe pole konfiguracji", stderr.getvalue())

    def test_self_test_passes(self):
        code, stdout, _ = self._main(["--self-test"])
        self.assertEqual(code, app.EXIT_OK)
        self.assertIn("Self-test OK", stdout)


if __name__ == "__main__":
    unittest.main()

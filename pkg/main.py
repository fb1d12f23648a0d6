import argparse
import json
import logging
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np
import pandas as pd

from baker_core import (
    QuantizationPhases,
    exchange_unitary,
    identity_unitary,
    load_custom_unitary,
    quantum_baker,
)
from chain import (
    HORIZON_FACTOR,
    bloch_autocorrelation,
    build_chain,
    chain_autocorrelation,
    chain_msd,
)
from classical import classical_msd
from errors import (
    APP_LOGGER_NAME,
    ConfigError,
    NoCrossoverError,
    UndefinedPlateauError,
    classify_run_error,
)
from rmt import Ensemble, EnsembleSpec, msd_closed_form, msd_monte_carlo
from spectral import (
    DEGENERACY_TOL,
    autocorrelation,
    ballistic_coefficient,
    crossover_time,
    decompose,
    msd_exact,
    plateau_value,
)

APP_NAME = "quantum-multibaker"
APP_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3
EXIT_UNKNOWN = 4

MODES = ("exact", "chain", "rmt-closed", "rmt-mc", "classical", "compare")
LOCALS = ("baker", "exchange", "identity", "custom")
FORMATS = ("csv", "json", "xlsx")

DENSE_TIME_LIMIT = 1000
THIN_POINTS_PER_DECADE = 200
CSV_FLOAT_FORMAT = "%.15g"

COMPARE_COLUMNS = ("t", "exact", "chain", "rmt_cue", "rmt_coe", "classical")

BASE_DIR = Path(__file__).resolve().parent
DATA_DIR = os.environ.get("QMB_DATA_DIR") or str(BASE_DIR)
LOG_DIR = os.path.join(DATA_DIR, "logs")
LOG_FILE_PATH = os.path.join(LOG_DIR, f"{APP_NAME}.log")
OUTPUT_SUBDIR = "generated_reports"

LOGGER = logging.getLogger(APP_LOGGER_NAME)
LOGGER.setLevel(logging.INFO)


def _install_fallback_handler() -> None:
    if any(getattr(h, "_qmb_fallback", False) for h in LOGGER.handlers):
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(logging.WARNING)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    setattr(handler, "_qmb_fallback", True)
    LOGGER.addHandler(handler)


def _attach_logger_file_handler(log_dir: str) -> bool:
    log_path = os.path.join(log_dir, f"{APP_NAME}.log")
    try:
        os.makedirs(log_dir, exist_ok=True)
        for h in LOGGER.handlers:
            if isinstance(h, RotatingFileHandler) and os.path.abspath(h.baseFilename) == os.path.abspath(log_path):
                return True
        handler = RotatingFileHandler(log_path, maxBytes=1_000_000, backupCount=3, encoding="utf-8")
    except Exception as exc:  # noqa: BLE001
        LOGGER.warning("Cannot write log file in %s: %s", log_dir, exc)
        return False
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    for h in list(LOGGER.handlers):
        if isinstance(h, RotatingFileHandler) or getattr(h, "_qmb_fallback", False):
            LOGGER.removeHandler(h)
            h.close()
    LOGGER.addHandler(handler)
    return True


def _set_data_dir(path: str) -> None:
    global DATA_DIR, LOG_DIR, LOG_FILE_PATH
    DATA_DIR = str(path)
    LOG_DIR = os.path.join(DATA_DIR, "logs")
    LOG_FILE_PATH = os.path.join(LOG_DIR, f"{APP_NAME}.log")
    _attach_logger_file_handler(LOG_DIR)


_install_fallback_handler()


I18N: dict[str, dict[str, str]] = {
    "en": {
        "ERR_CONFIG": "Invalid configuration field '{field}': {reason}",
        "ERR_INVALID_ARGUMENT": "Invalid argument: {detail}",
        "ERR_NUMERICAL": "Numerical failure: {detail}",
        "ERR_IO": "Could not read or write a file: {detail}",
        "ERR_GENERIC": "Run failed with an unexpected error (see log file).",
        "INFO_WROTE": "Wrote {path}",
        "INFO_SELF_TEST_OK": "Self-test OK",
        "ERR_SELF_TEST": "Self-test failed: {detail}",
        "WARN_CHAIN_SKIPPED": "chain column skipped: t_max={t_max} exceeds the chain horizon {horizon}",
        "HELP_DESCRIPTION": "Mean square displacement of quantum multi-baker chains: exact, chain oracle, RMT and classical.",
    },
    "pl": {
        "ERR_CONFIG": "Nieprawidłowe pole konfiguracji '{field}': {reason}",
        "ERR_INVALID_ARGUMENT": "Nieprawidłowy argument: {detail}",
        "ERR_NUMERICAL": "Błąd numeryczny: {detail}",
        "ERR_IO": "Nie udało się odczytać lub zapisać pliku: {detail}",
        "ERR_GENERIC": "Obliczenia przerwane nieoczekiwanym błędem (szczegóły w logu).",
        "INFO_WROTE": "Zapisano {path}",
        "INFO_SELF_TEST_OK": "Autotest OK",
        "ERR_SELF_TEST": "Autotest nie powiódł się: {detail}",
        "WARN_CHAIN_SKIPPED": "pominięto kolumnę chain: t_max={t_max} przekracza horyzont łańcucha {horizon}",
        "HELP_DESCRIPTION": "Średnie przesunięcie kwadratowe kwantowych łańcuchów multi-baker: dokładne, wyrocznia łańcuchowa, RMT i klasyczne.",
    },
}

_CURRENT_LANG = "en"


def _normalize_lang(lang: str | None) -> str | None:
    normalized = (lang or "").strip().lower()
    return normalized if normalized in I18N else None


def set_lang(lang: str | None) -> None:
    global _CURRENT_LANG
    _CURRENT_LANG = _normalize_lang(lang) or "en"


def t(key: str, **kwargs) -> str:
    s = I18N.get(_CURRENT_LANG, {}).get(key) or I18N["en"].get(key) or key
    return s.format(**kwargs) if kwargs else s


@dataclass(frozen=True)
class RunConfig:
    mode: str = "exact"
    n: int | None = None
    phi_q: float = 0.0
    phi_p: float = 0.0
    local: str = "baker"
    unitary_file: str | None = None
    cells: int = 16
    t_max: int = 100
    ensemble: str = "CUE"
    samples: int = 200
    seed: int = 12345
    deg_tol: float = DEGENERACY_TOL
    points: int = 100_000
    workers: int = 1
    out: str | None = None
    format: str = "csv"

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"expected one of {', '.join(FORMATS)}, got {self.format!r}")
        if self.t_max < 1:
            raise ConfigError("t_max", f"must be >= 1, got {self.t_max}")
        if self.mode != "classical":
            if self.local == "custom" and self.mode in ("exact", "chain", "compare"):
                if not self.unitary_file:
                    raise ConfigError("unitary_file", "required when local=custom")
            elif self.n is None:
                raise ConfigError("n", f"required for mode {self.mode}")
            if self.n is not None and (self.n < 2 or self.n % 2):
                raise ConfigError("n", f"must be an even integer >= 2, got {self.n}")
        if self.local not in LOCALS:
            raise ConfigError("local", f"expected one of {', '.join(LOCALS)}, got {self.local!r}")
        for name in ("phi_q", "phi_p"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigError(name, f"must lie in [0, 1), got {value}")
        if self.mode in ("chain", "classical", "compare") and self.cells < 2:
            raise ConfigError("cells", f"must be >= 2, got {self.cells}")
        if self.mode == "chain" and self.t_max > HORIZON_FACTOR * self.cells:
            raise ConfigError(
                "t_max", f"chain mode is limited to t_max <= {HORIZON_FACTOR}*cells = {HORIZON_FACTOR * self.cells}"
            )
        if self.mode == "classical" and 2 * self.t_max >= self.cells:
            raise ConfigError("t_max", f"classical mode needs t_max < cells/2 = {self.cells / 2:g}")
        if self.mode in ("rmt-closed", "rmt-mc"):
            try:
                Ensemble.parse(self.ensemble)
            except ValueError as exc:
                raise ConfigError("ensemble", str(exc)) from exc
        if self.mode == "rmt-mc" and self.samples < 2:
            raise ConfigError("samples", f"Monte-Carlo needs at least 2 samples, got {self.samples}")
        if self.deg_tol <= 0:
            raise ConfigError("deg_tol", f"must be positive, got {self.deg_tol}")
        if self.points < 1:
            raise ConfigError("points", f"must be positive, got {self.points}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be positive, got {self.workers}")
        return self


_FIELD_NAMES = tuple(f.name for f in fields(RunConfig))
_INT_FIELDS = {"n", "cells", "t_max", "samples", "seed", "points", "workers"}
_FLOAT_FIELDS = {"phi_q", "phi_p", "deg_tol"}


def _coerce(field_name: str, value):  # noqa: ANN001, ANN202
    if value is None:
        return None
    try:
        if field_name in _INT_FIELDS:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(f"expected an integer, got {value!r}")
            return int(value)
        if field_name in _FLOAT_FIELDS:
            if isinstance(value, bool):
                raise ValueError(f"expected a number, got {value!r}")
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(field_name, str(exc)) from exc


def load_config_file(path: str | os.PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ConfigError("config", "config file must hold a flat JSON object")
    out = {}
    for key, value in data.items():
        name = str(key).strip().lstrip("-").replace("-", "_")
        if name not in _FIELD_NAMES:
            raise ConfigError(str(key), "unknown configuration key")
        if isinstance(value, dict | list):
            raise ConfigError(str(key), "nested values are not allowed")
        if value is None:
            raise ConfigError(str(key), "must not be null")
        out[name] = _coerce(name, value)
    return out


_ARGUMENT_RE = re.compile(r"argument ([^\s:/]+)")


class RunArgumentParser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they get the one-line diagnostic."""

    def error(self, message: str):  # noqa: ANN201
        match = _ARGUMENT_RE.match(message)
        field = match.group(1).lstrip("-").replace("-", "_") if match else "arguments"
        raise ConfigError(field, message)


def build_parser() -> argparse.ArgumentParser:
    parser = RunArgumentParser(prog="main.py", description=t("HELP_DESCRIPTION"))
    sup = argparse.SUPPRESS
    parser.add_argument("--config", help="flat JSON config file; flags override it")
    parser.add_argument("--mode", choices=MODES, default=sup)
    parser.add_argument("--n", type=int, default=sup, help="local Hilbert dimension N (even)")
    parser.add_argument("--phi-q", dest="phi_q", type=float, default=sup)
    parser.add_argument("--phi-p", dest="phi_p", type=float, default=sup)
    parser.add_argument("--local", choices=LOCALS, default=sup)
    parser.add_argument("--unitary-file", dest="unitary_file", default=sup)
    parser.add_argument("--cells", type=int, default=sup, help="chain length L")
    parser.add_argument("--t-max", dest="t_max", type=int, default=sup)
    parser.add_argument("--ensemble", choices=("CUE", "COE"), type=str.upper, default=sup)
    parser.add_argument("--samples", type=int, default=sup)
    parser.add_argument("--seed", type=int, default=sup)
    parser.add_argument("--deg-tol", dest="deg_tol", type=float, default=sup)
    parser.add_argument("--points", type=int, default=sup, help="classical ensemble size")
    parser.add_argument("--workers", type=int, default=sup, help="Monte-Carlo threads")
    parser.add_argument("--out", default=sup, help="output file or directory")
    parser.add_argument("--format", choices=FORMATS, default=sup)
    parser.add_argument("--lang", help="diagnostic language: en or pl")
    parser.add_argument("--self-test", dest="self_test", action="store_true")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in _FIELD_NAMES:
        if hasattr(args, name):
            values[name] = getattr(args, name)
    return RunConfig(**values).validate()


def output_times(t_max: int) -> np.ndarray:
    """Dense up to 1000, logarithmically thinned above."""
    dense = np.arange(min(t_max, DENSE_TIME_LIMIT) + 1, dtype=np.int64)
    if t_max <= DENSE_TIME_LIMIT:
        return dense
    decades = math.log10(t_max / DENSE_TIME_LIMIT)
    count = max(2, int(math.ceil(decades * THIN_POINTS_PER_DECADE)) + 1)
    sparse_part = np.unique(np.rint(np.geomspace(DENSE_TIME_LIMIT, t_max, count)).astype(np.int64))
    return np.unique(np.concatenate([dense, sparse_part, [t_max]]))


def _build_local(config: RunConfig):  # noqa: ANN202
    if config.local == "custom":
        local = load_custom_unitary(config.unitary_file)
        if config.n is not None and config.n != local.dim:
            raise ConfigError("n", f"--n {config.n} does not match the unitary file dimension {local.dim}")
        return local
    if config.local == "exchange":
        return exchange_unitary(config.n)
    if config.local == "identity":
        return identity_unitary(config.n)
    return quantum_baker(config.n, QuantizationPhases(config.phi_q, config.phi_p))


def _spectral_metadata(spec) -> dict:  # noqa: ANN001
    meta = {"ballistic_coefficient": ballistic_coefficient(spec)}
    try:
        meta["crossover_time"] = crossover_time(spec)
    except NoCrossoverError:
        meta["crossover_time"] = "none"
    try:
        meta["plateau_value"] = plateau_value(spec)
    except UndefinedPlateauError:
        meta["plateau_value"] = "undefined"
    return meta


def _run_exact(config: RunConfig, meta: dict) -> pd.DataFrame:
    local = _build_local(config)
    spec = decompose(local, config.deg_tol)
    series = msd_exact(spec, config.t_max, times=output_times(config.t_max))
    meta.update(
        N=local.dim,
        local=local.label,
        unitarity_residual=local.residual,
        reconstruction_residual=spec.residual,
    )
    meta.update(_spectral_metadata(spec))
    return series.to_frame()


def _run_chain(config: RunConfig, meta: dict) -> pd.DataFrame:
    local = _build_local(config)
    series = chain_msd(build_chain(local, config.cells), config.t_max)
    meta.update(N=local.dim, local=local.label, unitarity_residual=local.residual)
    return series.to_frame()


def _ensemble_spec(config: RunConfig, kind: str | None = None, dim: int | None = None) -> EnsembleSpec:
    return EnsembleSpec(
        kind=Ensemble.parse(kind or config.ensemble),
        dim=dim or config.n,
        seed=config.seed,
        samples=config.samples,
    )


def _run_rmt_closed(config: RunConfig, meta: dict) -> pd.DataFrame:
    spec = _ensemble_spec(config)
    meta.update(k=spec.k)
    return msd_closed_form(spec, config.t_max, times=output_times(config.t_max)).to_frame()


def _run_rmt_mc(config: RunConfig, meta: dict) -> pd.DataFrame:
    spec = _ensemble_spec(config)
    series = msd_monte_carlo(
        spec,
        config.t_max,
        degeneracy_tol=config.deg_tol,
        times=output_times(config.t_max),
        workers=config.workers,
    )
    meta.update(k=spec.k)
    return series.to_frame()


def _run_classical(config: RunConfig, meta: dict) -> pd.DataFrame:
    series = classical_msd(config.cells, config.points, config.t_max, seed=config.seed)
    return series.to_frame()


def _run_compare(config: RunConfig, meta: dict) -> pd.DataFrame:
    local = _build_local(config)
    axis = output_times(config.t_max)
    spec = decompose(local, config.deg_tol)
    frame = pd.DataFrame({"t": axis})
    frame["exact"] = msd_exact(spec, config.t_max, times=axis).values

    horizon = HORIZON_FACTOR * config.cells
    if config.t_max <= horizon:
        chain_values = chain_msd(build_chain(local, config.cells), config.t_max).values
        frame["chain"] = chain_values[axis]
        meta["chain_column"] = "present"
    else:
        LOGGER.warning(t("WARN_CHAIN_SKIPPED", t_max=config.t_max, horizon=horizon))
        meta["chain_column"] = f"omitted (t_max > {horizon})"

    for kind, column in (("CUE", "rmt_cue"), ("COE", "rmt_coe")):
        ens = _ensemble_spec(config, kind, dim=local.dim)
        frame[column] = msd_closed_form(ens, config.t_max, times=axis).values
    frame["classical"] = axis.astype(np.float64)
    meta.update(
        N=local.dim,
        local=local.label,
        unitarity_residual=local.residual,
        reconstruction_residual=spec.residual,
    )
    meta.update(_spectral_metadata(spec))
    return frame[[c for c in COMPARE_COLUMNS if c in frame.columns]]


_RUNNERS = {
    "exact": _run_exact,
    "chain": _run_chain,
    "rmt-closed": _run_rmt_closed,
    "rmt-mc": _run_rmt_mc,
    "classical": _run_classical,
    "compare": _run_compare,
}


def _mode_parameters(config: RunConfig) -> dict:
    used = {"mode", "t_max", "deg_tol", "format"}
    if config.mode in ("exact", "chain", "compare"):
        used |= {"n", "local"}
        used |= {"phi_q", "phi_p"} if config.local == "baker" else set()
        used |= {"unitary_file"} if config.local == "custom" else set()
    if config.mode in ("chain", "compare", "classical"):
        used.add("cells")
    if config.mode in ("rmt-closed", "rmt-mc"):
        used |= {"n", "ensemble"}
    if config.mode == "rmt-mc":
        used |= {"samples", "seed", "workers"}
    if config.mode == "classical":
        used |= {"points", "seed"}
    return {k: v for k, v in asdict(config).items() if k in used}


def default_output_path(config: RunConfig, dim: int | None = None) -> Path:
    if config.mode == "classical":
        name = f"msd_{config.mode}_L{config.cells}.{config.format}"
    else:
        name = f"msd_{config.mode}_N{dim or config.n}.{config.format}"
    if config.out:
        out = Path(config.out)
        if out.is_dir() or str(config.out).endswith(("/", os.sep)):
            return out / name
        return out
    return Path(DATA_DIR) / OUTPUT_SUBDIR / name


def _json_default(value):  # noqa: ANN001, ANN202
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def write_table(frame: pd.DataFrame, metadata: dict, path: Path, fmt: str) -> Path:
    """Write atomically: temp file in the target directory, then os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(f".{path.stem}.tmp{path.suffix}")
    try:
        if fmt == "csv":
            with tmp_path.open("w", encoding="utf-8", newline="") as f:
                for key, value in metadata.items():
                    f.write(f"# {key}: {value}\n")
                frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        elif fmt == "json":
            payload = {
                "metadata": metadata,
                "columns": list(frame.columns),
                "data": frame.to_dict(orient="records"),
            }
            with tmp_path.open("w", encoding="utf-8") as f:
                json.dump(payload, f, ensure_ascii=False, indent=2, default=_json_default, allow_nan=False)
                f.write("\n")
        elif fmt == "xlsx":
            meta_frame = pd.DataFrame(
                [(k, str(v)) for k, v in metadata.items()], columns=["key", "value"]
            )
            with pd.ExcelWriter(tmp_path, engine="openpyxl") as writer:
                frame.to_excel(writer, sheet_name="msd", index=False)
                meta_frame.to_excel(writer, sheet_name="metadata", index=False)
        else:
            raise ConfigError("format", f"unsupported output format {fmt!r}")
        os.replace(tmp_path, path)
    finally:
        if tmp_path.exists():
            try:
                tmp_path.unlink()
            except OSError:
                pass
    return path


def run(config: RunConfig) -> tuple[int, Path]:
    config.validate()
    LOGGER.info("Run started: %s", asdict(config))
    metadata: dict = {"app": APP_NAME, "version": APP_VERSION}
    metadata.update(_mode_parameters(config))
    frame = _RUNNERS[config.mode](config, metadata)
    metadata["columns"] = ",".join(frame.columns)
    metadata["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    path = write_table(frame, metadata, default_output_path(config, metadata.get("N")), config.format)
    LOGGER.info("Run finished: %d rows -> %s", len(frame), path)
    return EXIT_OK, path


def _build_run_error_message(exc: BaseException) -> str:
    try:
        kind, params = classify_run_error(exc)
        if kind == "config":
            return t("ERR_CONFIG", field=params.get("field"), reason=params.get("reason"))
        if kind == "invalid_argument":
            return t("ERR_INVALID_ARGUMENT", detail=params.get("detail"))
        if kind == "numerical":
            return t("ERR_NUMERICAL", detail=params.get("detail"))
        if kind == "io":
            return t("ERR_IO", detail=params.get("detail"))
    except Exception:  # noqa: BLE001
        pass
    return t("ERR_GENERIC")


def _exit_code_for(exc: BaseException) -> int:
    kind, _ = classify_run_error(exc)
    return {
        "config": EXIT_CONFIG,
        "invalid_argument": EXIT_CONFIG,
        "numerical": EXIT_NUMERICAL,
        "io": EXIT_IO,
    }.get(kind, EXIT_UNKNOWN)


def run_self_test() -> int:
    """Hadamard reduction, chain traces vs single-cell and sector sums, exchange oscillation."""
    hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)
    baker = quantum_baker(2)
    if np.max(np.abs(baker.matrix - hadamard)) > 1e-15:
        raise AssertionError("U_2 at zero phases is not the Hadamard coin")
    local = quantum_baker(8)
    two_cells = build_chain(local, 2)
    six_cells = build_chain(local, 6)
    spec = decompose(local)
    for n in range(0, 13):
        gap = abs(chain_autocorrelation(two_cells, n) - autocorrelation(spec, n))
        if gap > 1e-10:
            raise AssertionError(f"C_{n}: two-cell trace and spectral value differ by {gap:.3e}")
        gap = abs(chain_autocorrelation(six_cells, n) - bloch_autocorrelation(local, 6, n))
        if gap > 1e-10:
            raise AssertionError(f"C_{n}: ring trace and sector sum differ by {gap:.3e}")
    values = msd_exact(decompose(exchange_unitary(2)), 6).values
    if np.max(np.abs(values - np.array([0, 1, 0, 1, 0, 1, 0]))) > 1e-10:
        raise AssertionError("exchange map does not oscillate between 0 and 1")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    set_lang(os.environ.get("QMB_LANG"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(" ".join(_build_run_error_message(exc).split()), file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        # --help and --version
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    set_lang(args.lang or os.environ.get("QMB_LANG"))
    _attach_logger_file_handler(LOG_DIR)

    if args.self_test:
        try:
            run_self_test()
        except Exception as exc:  # noqa: BLE001
            LOGGER.error("Self-test failed: %s", exc, exc_info=exc)
            print(t("ERR_SELF_TEST", detail=str(exc)), file=sys.stderr)
            return EXIT_NUMERICAL
        print(t("INFO_SELF_TEST_OK"))
        return EXIT_OK

    try:
        config = config_from_args(args)
        code, path = run(config)
    except Exception as exc:  # noqa: BLE001
        LOGGER.error("Run failed: %s", exc, exc_info=exc)
        message = " ".join(_build_run_error_message(exc).split())
        print(message, file=sys.stderr)
        return _exit_code_for(exc)
    print(t("INFO_WROTE", path=path))
    return code


if __name__ == "__main__":
    sys.exit(main())

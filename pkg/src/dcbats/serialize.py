"""CSV and JSON persistence for draws, barycenters, series, and reports.

Floats are written with repr(), so every emitted file round-trips to the
exact same doubles it came from. All CSVs use a bare "\\n" terminator to
keep output byte-stable across platforms.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .combine import BarycenterResult
from .core import DrawSet, TimeSeries
from .errors import LengthMismatchError, MissingValueError, ParseError

_MISSING = {"", "na", "nan", "null"}


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, obj):
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with Path(path).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def meta_path(csv_path) -> Path:
    """Sidecar path: draws.csv -> draws.meta.json."""
    return Path(csv_path).with_suffix(".meta.json")


def write_draws(path, draw_set: DrawSet, names) -> None:
    """DrawSet to CSV (header = flattened parameter names) plus sidecar."""
    names = tuple(str(n) for n in names)
    if len(names) != draw_set.d:
        raise LengthMismatchError(
            f"{len(names)} names for {draw_set.d} parameter columns"
        )
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in draw_set.draws:
            writer.writerow([_fmt(v) for v in row])
    write_json(meta_path(path), {
        "seed": int(draw_set.seed),
        "acceptance_rate": float(draw_set.acceptance_rate),
        "burn_in": int(draw_set.burn_in),
        "target_label": draw_set.target_label,
    })


def _parse_cell(raw: str, row: int, col: str, path):
    token = raw.strip()
    if token.lower() in _MISSING:
        raise MissingValueError(
            f"{path}: missing value at row {row}, column '{col}'"
        )
    try:
        return float(token)
    except ValueError:
        raise ParseError(
            f"{path}: non-numeric cell '{raw}' at row {row}, column '{col}'"
        ) from None


def _read_table(path):
    """Header plus float matrix. Row numbers in errors are 1-based data rows."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {i} has {len(row)} cells, header has "
                    f"{len(header)}"
                )
            rows.append([_parse_cell(c, i, header[j], path)
                         for j, c in enumerate(row)])
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float)


def read_draws(path) -> tuple[DrawSet, tuple[str, ...]]:
    """Inverse of write_draws. A missing sidecar degrades to neutral metadata
    so plain numeric CSVs with a header remain ingestible."""
    header, values = _read_table(path)
    mp = meta_path(path)
    if mp.exists():
        meta = read_json(mp)
        try:
            ds = DrawSet(draws=values, burn_in=int(meta["burn_in"]),
                         acceptance_rate=float(meta["acceptance_rate"]),
                         seed=int(meta["seed"]),
                         target_label=str(meta["target_label"]))
        except KeyError as exc:
            raise ParseError(f"{mp}: sidecar missing field {exc}") from None
    else:
        ds = DrawSet(draws=values, burn_in=0, acceptance_rate=0.0, seed=0,
                     target_label=Path(path).stem)
    return ds, tuple(header)


def write_barycenter(path, result: BarycenterResult) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "q_bar"])
        for u, q in zip(result.u_grid, result.q_bar):
            writer.writerow([_fmt(u), _fmt(q)])


def read_barycenter(path) -> BarycenterResult:
    header, values = _read_table(path)
    if header != ["u", "q_bar"]:
        raise ParseError(f"{path}: expected header u,q_bar, got {header}")
    return BarycenterResult(u_grid=values[:, 0], q_bar=values[:, 1],
                            pseudo_draws=None)


def write_series(path, series: TimeSeries) -> None:
    """TimeSeries to CSV: observation columns, then covariate columns."""
    path = Path(path)
    labels = series.labels or tuple(f"x{j + 1}" for j in range(series.obs_dim))
    header = list(labels) + [f"z{j + 1}" for j in range(series.cov_dim)]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(series.T):
            row = [_fmt(v) for v in series.obs[t]]
            if series.covariates is not None:
                row += [_fmt(v) for v in series.covariates[t]]
            writer.writerow(row)


def ingest_csv(path, schema: dict, log_transform: bool = False) -> TimeSeries:
    """Build a TimeSeries from a headed numeric CSV.

    schema maps "obs" and "covariates" to lists of header names. Any
    missing-value marker (empty, NA, NaN, null) is an error; there is no
    imputation. log_transform applies x -> log(0.1 + x) to the
    observation columns only.
    """
    unknown = set(schema) - {"obs", "covariates"}
    if unknown:
        raise ParseError(f"unknown schema keys: {sorted(unknown)}")
    obs_cols = list(schema.get("obs", []))
    cov_cols = list(schema.get("covariates", []))
    if not obs_cols:
        raise ParseError("schema selects no observation columns")
    header, values = _read_table(path)
    index = {name: j for j, name in enumerate(header)}
    for name in obs_cols + cov_cols:
        if name not in index:
            raise ParseError(
                f"{path}: schema column '{name}' not in header {header}"
            )
    obs = values[:, [index[n] for n in obs_cols]]
    if log_transform:
        obs = np.log(0.1 + obs)
    cov = values[:, [index[n] for n in cov_cols]] if cov_cols else None
    return TimeSeries(obs=obs, covariates=cov, labels=tuple(obs_cols))


def write_intervals(path, names, intervals) -> None:
    names = list(names)
    intervals = list(intervals)
    if len(names) != len(intervals):
        raise LengthMismatchError(
            f"{len(names)} names for {len(intervals)} intervals"
        )
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param", "lo", "hi"])
        for name, (lo, hi) in zip(names, intervals):
            writer.writerow([str(name), _fmt(lo), _fmt(hi)])


def report_to_dict(report) -> dict:
    """ComparisonReport as a JSON-ready dict. Wall-times are deliberately
    left out; they go to a separate timings file so report bytes depend
    only on config and seeds."""
    records = []
    for rec in report.records:
        records.append({
            "replicate": rec.replicate,
            "K": rec.K,
            "param": rec.param,
            "dcbats": {"lo": rec.dcbats_lo, "hi": rec.dcbats_hi,
                       "mean": rec.dcbats_mean, "var": rec.dcbats_var,
                       "covered": bool(rec.dcbats_covered)},
            "full": {"lo": rec.full_lo, "hi": rec.full_hi,
                     "mean": rec.full_mean, "var": rec.full_var,
                     "covered": bool(rec.full_covered)},
            "w2_marginal": rec.w2,
        })
    return {
        "model_type": report.model_type,
        "param_names": list(report.param_names),
        "true_theta": list(report.true_theta),
        "T": report.T,
        "K_list": list(report.K_list),
        "n_replicates": report.n_replicates,
        "level": report.level,
        "records": records,
        "coverage": report.coverage,
        "failures": list(report.failures),
    }


def write_report_json(path, report) -> None:
    write_json(path, report_to_dict(report))


def write_report_csv(path, report) -> None:
    """Flat per-parameter table, two rows (dcbats/full) per record."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "K", "param", "method", "lo", "hi",
                         "mean", "var", "w2", "covered"])
        for rec in report.records:
            writer.writerow([rec.replicate, rec.K, rec.param, "dcbats",
                             _fmt(rec.dcbats_lo), _fmt(rec.dcbats_hi),
                             _fmt(rec.dcbats_mean), _fmt(rec.dcbats_var),
                             _fmt(rec.w2), int(rec.dcbats_covered)])
            writer.writerow([rec.replicate, rec.K, rec.param, "full",
                             _fmt(rec.full_lo), _fmt(rec.full_hi),
                             _fmt(rec.full_mean), _fmt(rec.full_var),
                             _fmt(rec.w2), int(rec.full_covered)])


def read_report_csv(path):
    """Rows of the flat report table as dicts with typed values."""
    path = Path(path)
    out = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append({
                "replicate": int(row["replicate"]),
                "K": int(row["K"]),
                "param": row["param"],
                "method": row["method"],
                "lo": float(row["lo"]),
                "hi": float(row["hi"]),
                "mean": float(row["mean"]),
                "var": float(row["var"]),
                "w2": float(row["w2"]),
                "covered": bool(int(row["covered"])),
            })
    return out

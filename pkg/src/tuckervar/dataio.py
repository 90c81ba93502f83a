"""File formats for the batch interface: per-subject CSVs, flat key-value
configs, posterior summary tables, adjacency/probability tables, DOT graphs,
and npz checkpoints. Every writer has a matching reader that round-trips
exactly."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

import numpy as np

from .var import PanelData

CHECKPOINT_VERSION = 1


class DataError(ValueError):
    """Malformed input files or inconsistent panel structure."""


# ---------------------------------------------------------------------------
# panel CSVs: one file per subject, header row of series names


def write_panel(data: PanelData, out_dir, prefix: str = "subject") -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = data.series_names or [f"series_{j + 1}" for j in range(data.n_series)]
    paths = []
    for i in range(data.n_subjects):
        path = out_dir / f"{prefix}_{i + 1:03d}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for row in data.y[i]:
                writer.writerow([repr(float(v)) for v in row])
        paths.append(path)
    return paths


def read_panel(paths, holdout: int = 0) -> PanelData:
    """Load one CSV per subject; all files must share the header and length."""
    paths = [Path(p) for p in paths]
    if not paths:
        raise DataError("no subject files given")
    header: Optional[list] = None
    series = []
    first_path: Optional[Path] = None
    for path in paths:
        if not path.exists():
            raise DataError(f"missing data file: {path}")
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
        if len(rows) < 2:
            raise DataError(f"{path}: need a header row plus data rows")
        this_header = rows[0]
        if header is None:
            header, first_path = this_header, path
        elif this_header != header:
            raise DataError(
                f"header mismatch between {first_path} and {path}: "
                f"{header} vs {this_header}"
            )
        values = np.empty((len(rows) - 1, len(header)))
        for r, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
            for c, cell in enumerate(row):
                try:
                    values[r - 2, c] = float(cell)
                except ValueError as exc:
                    raise DataError(
                        f"{path}: non-numeric cell at row {r}, column '{header[c]}': {cell!r}"
                    ) from exc
        series.append(values)
    lengths = {s.shape[0] for s in series}
    if len(lengths) != 1:
        raise DataError(f"subjects disagree on series length: {sorted(lengths)}")
    return PanelData(y=np.stack(series), holdout=holdout, series_names=list(header))


def find_subject_files(data_dir, prefix: str = "subject") -> list:
    files = sorted(Path(data_dir).glob(f"{prefix}_*.csv"))
    if not files:
        raise DataError(f"no {prefix}_*.csv files found in {data_dir}")
    return files


# ---------------------------------------------------------------------------
# generic matrix tables


def write_matrix(path, matrix, row_labels=None, col_labels=None, fmt=repr):
    matrix = np.asarray(matrix)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if col_labels is not None:
            writer.writerow(([""] if row_labels is not None else []) + list(col_labels))
        for i, row in enumerate(matrix):
            head = [row_labels[i]] if row_labels is not None else []
            writer.writerow(head + [fmt(float(v)) for v in row])


def read_matrix(path, has_row_labels=False, has_col_labels=False) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if has_col_labels:
        rows = rows[1:]
    start = 1 if has_row_labels else 0
    return np.array([[float(c) for c in row[start:]] for row in rows])


def write_table(path, columns: dict):
    """Columnar CSV from a name -> sequence mapping."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    length = len(next(iter(columns.values())))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(length):
            writer.writerow([_cell(columns[n][i]) for n in names])


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def read_table(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [row[i] for row in body] for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# flat key-value config files


def read_config(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment; keys are unique."""
    out: dict = {}
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing config file: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise DataError(f"{path}:{lineno}: empty key")
        if key in out:
            raise DataError(f"{path}:{lineno}: duplicate key '{key}'")
        out[key] = value
    return out


def write_config(path, values: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key} = {value}" for key, value in values.items()]
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# DOT graph export


def write_dot(path, adjacency, node_labels=None, graph_name: str = "gc"):
    """Directed graph: edge k -> j for every true cell (j, k) of the adjacency."""
    adjacency = np.asarray(adjacency, dtype=bool)
    k = adjacency.shape[0]
    labels = node_labels or [f"series_{j + 1}" for j in range(k)]
    lines = [f"digraph {graph_name} {{"]
    for name in labels:
        lines.append(f'  "{name}";')
    for j in range(k):
        for src in range(k):
            if adjacency[j, src]:
                lines.append(f'  "{labels[src]}" -> "{labels[j]}";')
    lines.append("}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# checkpoints


def write_checkpoint(path, payload: dict, config_echo: dict):
    """Versioned npz container: sampler snapshot arrays plus the config echo."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "checkpoint_version": np.array([CHECKPOINT_VERSION], dtype=np.int64),
        "config_keys": np.array(sorted(config_echo), dtype="U64"),
        "config_values": np.array([str(config_echo[k]) for k in sorted(config_echo)], dtype="U256"),
    }
    np.savez(path, **meta, **payload)


def read_checkpoint(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing checkpoint: {path}")
    with np.load(path, allow_pickle=False) as bundle:
        version = int(bundle["checkpoint_version"][0])
        if version != CHECKPOINT_VERSION:
            raise DataError(f"unsupported checkpoint version {version}")
        config_echo = dict(zip(bundle["config_keys"].tolist(), bundle["config_values"].tolist()))
        payload = {
            key: bundle[key]
            for key in bundle.files
            if key not in ("checkpoint_version", "config_keys", "config_values")
        }
    return payload, config_echo

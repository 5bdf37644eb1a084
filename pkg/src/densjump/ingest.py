"""CSV ingestion: column selection, transforms, drop rules, export.

Dialect is fixed: comma separator, required header row, UTF-8, '.'
decimal point.  An empty cell means missing; cells parsing to NaN or
infinity count as missing too.  Rows missing any used value, or with a
response outside (0,1), are dropped with counts recorded in metadata.
Exported files hold the retained raw rows printed with %.17g, so
re-ingesting an export reproduces the Dataset bit for bit.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline

from .errors import ConfigError, DataError
from .model import Dataset, build_dataset

IDENTITY = "identity"
LOG1P = "log1p"
BSPLINE = "bspline"

# cubic basis with the constant-absorbing first function dropped: df
# columns require df+1 basis functions, i.e. df-3 interior knots, so
# anything below 3 cannot be realized at cubic degree
MIN_BSPLINE_DF = 3


def _parse_transform(text: str):
    if text == IDENTITY or text == LOG1P:
        return (text, None)
    kind, _, arg = text.partition(":")
    if kind == BSPLINE:
        try:
            df = int(arg)
        except ValueError:
            raise ConfigError(f"bspline transform needs an integer df, got {text!r}")
        if df < MIN_BSPLINE_DF:
            raise ConfigError(f"bspline df must be at least {MIN_BSPLINE_DF}")
        return (BSPLINE, df)
    raise ConfigError(f"unknown transform {text!r}")


@dataclass(frozen=True)
class IngestSpec:
    """What to read from a CSV file and how to turn it into a Dataset."""

    path: str
    response_column: str
    covariate_columns: tuple
    threshold: float
    transforms: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = tuple(self.covariate_columns)
        object.__setattr__(self, "covariate_columns", cols)
        if len(set(cols)) != len(cols):
            raise ConfigError("covariate columns must be distinct")
        if self.response_column in cols:
            raise ConfigError("response column cannot double as a covariate")
        if not cols:
            raise ConfigError("need at least one covariate column")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("threshold must lie in (0,1)")
        unknown = set(self.transforms) - set(cols)
        if unknown:
            raise ConfigError(f"transforms name unused columns: {sorted(unknown)}")
        for text in self.transforms.values():
            _parse_transform(text)

    def transform_of(self, name: str):
        return _parse_transform(self.transforms.get(name, IDENTITY))


def bspline_basis(column, df: int, full: bool = False) -> np.ndarray:
    """Cubic B-spline basis with df columns.

    Interior knots sit at equally spaced quantiles of the column,
    boundary knots at its min and max.  The raw basis of df+1 functions
    sums to 1 at every point; its first column is dropped (absorbed by
    the model intercept) unless full=True.
    """
    col = np.asarray(column, dtype=np.float64)
    if df < MIN_BSPLINE_DF:
        raise ConfigError(f"bspline df must be at least {MIN_BSPLINE_DF}")
    if np.unique(col).size < df:
        raise DataError(f"bspline needs at least {df} distinct values")
    n_interior = df - 3
    if n_interior > 0:
        levels = np.arange(1, n_interior + 1) / (n_interior + 1)
        interior = np.quantile(col, levels)
    else:
        interior = np.empty(0)
    lo, hi = col.min(), col.max()
    knots = np.concatenate([[lo] * 4, interior, [hi] * 4])
    basis = BSpline.design_matrix(col, knots, 3, extrapolate=False).toarray()
    return basis if full else basis[:, 1:]


def _read_rows(spec: IngestSpec):
    """Parse the used columns, applying the drop rules.

    Returns (usable raw row matrix [y | covariates], n_read,
    n_dropped_missing, n_dropped_boundary).
    """
    names = [spec.response_column, *spec.covariate_columns]
    rows = []
    n_missing = 0
    n_boundary = 0
    n_read = 0
    with open(spec.path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{spec.path} has no header row")
        absent = [c for c in names if c not in reader.fieldnames]
        if absent:
            raise DataError(f"{spec.path} lacks columns {absent}")
        for line_no, row in enumerate(reader, start=2):
            n_read += 1
            values = np.empty(len(names))
            missing = False
            for k, name in enumerate(names):
                cell = row[name]
                if cell is None or cell == "":
                    missing = True
                    break
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"non-numeric value {cell!r} at row {line_no}, "
                        f"column {name!r}"
                    )
                if not np.isfinite(v):
                    missing = True
                    break
                values[k] = v
            if missing:
                n_missing += 1
                continue
            if not 0.0 < values[0] < 1.0:
                n_boundary += 1
                continue
            rows.append(values)
    if not rows:
        raise DataError("no usable rows after applying the drop rules")
    return np.array(rows), n_read, n_missing, n_boundary


def ingest(spec: IngestSpec) -> Dataset:
    """Read, drop, transform, and standardize one CSV file."""
    raw, n_read, n_missing, n_boundary = _read_rows(spec)
    y = raw[:, 0]
    blocks = [np.ones((raw.shape[0], 1))]
    expanded = ["intercept"]
    for k, name in enumerate(spec.covariate_columns):
        col = raw[:, k + 1]
        kind, df = spec.transform_of(name)
        if kind == IDENTITY:
            blocks.append(col[:, None])
            expanded.append(name)
        elif kind == LOG1P:
            if np.min(col) <= -1.0:
                raise DataError(f"log1p transform undefined for column {name!r}")
            blocks.append(np.log1p(col)[:, None])
            expanded.append(f"log1p({name})")
        else:
            blocks.append(bspline_basis(col, df))
            expanded.extend(f"{name}_bs{i}" for i in range(1, df + 1))
    X = np.hstack(blocks)
    n, p = X.shape
    if n < 3 * p:
        raise DataError(f"need at least {3 * p} usable rows, found {n}")
    meta = {
        "source": spec.path,
        "response": spec.response_column,
        "covariates": list(spec.covariate_columns),
        "transforms": {c: spec.transforms.get(c, IDENTITY)
                       for c in spec.covariate_columns},
        "expanded_columns": expanded,
        "n_rows_read": n_read,
        "n_dropped_missing": n_missing,
        "n_dropped_boundary": n_boundary,
        "raw_header": [spec.response_column, *spec.covariate_columns],
        "raw_values": raw,
    }
    return build_dataset(y, X, spec.threshold, meta=meta)


def dump_dataset(data: Dataset, path) -> None:
    """Write the dataset's raw rows back out as CSV.

    Prefers the retained pre-transform rows from ingestion or synthesis;
    otherwise falls back to de-standardizing the design matrix, which
    reproduces the same fitted model but not necessarily the same bits.
    """
    if "raw_values" in data.meta:
        header = data.meta["raw_header"]
        values = np.asarray(data.meta["raw_values"])
    else:
        header = ["y"] + [f"x{k}" for k in range(1, data.p)]
        raw_X = data.X[:, 1:] * data.column_sds[1:] + data.column_means[1:]
        values = np.column_stack([data.y, raw_X])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in values:
            writer.writerow([format(v, ".17g") for v in row])

"""Reading benchmark CSV files and configs, writing report files.

Input CSV: UTF-8, comma separated, header row with ``dataset``,
``classifier`` and one column per declared metric. Raw metric values may
have any sign or scale; :func:`ingest` maps them into ``[0, 1]`` with
higher meaning better.
"""

from __future__ import annotations

import csv
import io as _io
import json
import logging
import math
import socket
import time
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import yaml

from gsdfront import __version__
from gsdfront.core import DataError, MetricSpec, PerformanceTable, Scale, ScaleSpec, validate_table

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
DEFAULT_MAX_BYTES = 64 * 2**20


class ConfigError(DataError):
    """The analysis config is malformed or inconsistent with the data."""


class Orientation(str, Enum):
    HIGHER = "higher"
    LOWER = "lower"


class Transform(str, Enum):
    NONE = "none"
    DECILE = "decile"
    MINMAX = "minmax"


@dataclass(frozen=True)
class MetricDecl:
    name: str
    scale: Scale = Scale.CARDINAL
    orientation: Orientation = Orientation.HIGHER
    transform: Transform = Transform.NONE
    bins: int = 10

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "scale", Scale(self.scale))
            object.__setattr__(self, "orientation", Orientation(self.orientation))
            object.__setattr__(self, "transform", Transform(self.transform))
        except ValueError as exc:
            raise ConfigError(f"metric {self.name!r}: {exc}") from None
        if self.bins < 2:
            raise ConfigError(f"metric {self.name!r}: bins must be at least 2")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything an analysis run needs besides the data.

    ``decile_scope`` is ``pooled`` (bin a metric over the whole column) or
    ``per_dataset`` (bin within each dataset's row of classifiers).
    """

    metrics: tuple[MetricDecl, ...]
    alpha: float = 0.05
    n_resamples: int = 1000
    delta: float = 0.0
    epsilon: float = 0.0
    seed: int = 0
    k_max: int | None = None
    decimals: int = 6
    decile_scope: str = "pooled"
    exhaustive: bool = False

    def __post_init__(self) -> None:
        if not self.metrics:
            raise ConfigError("config declares no metrics")
        names = [m.name for m in self.metrics]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate metric names in config")
        if not 0 <= self.decimals <= 12:
            raise ConfigError("decimals must lie in [0, 12]")
        if self.decile_scope not in ("pooled", "per_dataset"):
            raise ConfigError("decile_scope must be 'pooled' or 'per_dataset'")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.n_resamples < 1:
            raise ConfigError("n_resamples must be positive")
        if not 0 <= self.delta <= 1 or not 0 <= self.epsilon <= 1:
            raise ConfigError("delta and epsilon must lie in [0, 1]")

    @property
    def scale(self) -> ScaleSpec:
        return ScaleSpec(tuple(MetricSpec(m.name, m.scale) for m in self.metrics))

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Any]) -> "AnalysisConfig":
        if not isinstance(raw, Mapping):
            raise ConfigError("config must be a mapping")
        version = raw.get("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version!r}; expected {CONFIG_VERSION}")
        known = {"version", "metrics", "alpha", "n_resamples", "delta", "epsilon", "seed",
                 "k_max", "decimals", "decile_scope", "exhaustive"}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        metrics = []
        for entry in raw.get("metrics") or []:
            if not isinstance(entry, Mapping) or "name" not in entry:
                raise ConfigError("each metric needs at least a name")
            extra = sorted(set(entry) - {"name", "scale", "orientation", "transform", "bins"})
            if extra:
                raise ConfigError(f"metric {entry['name']!r}: unknown keys {extra}")
            metrics.append(MetricDecl(**{k: entry[k] for k in entry}))
        kwargs = {k: raw[k] for k in known - {"version", "metrics"} if k in raw}
        try:
            return cls(tuple(metrics), **kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "AnalysisConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        return cls.from_mapping(raw or {})

    @classmethod
    def default_for(cls, columns: Sequence[str]) -> "AnalysisConfig":
        """All metric columns cardinal, higher is better, no transform."""
        return cls(tuple(MetricDecl(c) for c in columns))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["metrics"] = [
            {"name": m.name, "scale": m.scale.value, "orientation": m.orientation.value,
             "transform": m.transform.value, "bins": m.bins}
            for m in self.metrics
        ]
        out["version"] = CONFIG_VERSION
        return out


@dataclass(frozen=True)
class RawRecord:
    dataset: str
    classifier: str
    values: dict[str, float] = field(hash=False)


def _text(source: str | bytes | Path) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8-sig")
    if source and "\n" not in source and "," not in source:
        # a bare token is a path, never CSV text
        if not Path(source).is_file():
            raise DataError(f"no such file: {source}")
        return Path(source).read_text(encoding="utf-8-sig")
    return source


def read_raw(source: str | bytes | Path, metrics: Sequence[str] | None = None) -> list[RawRecord]:
    """Parse the CSV into records. ``metrics`` restricts and orders the metric columns."""
    reader = csv.reader(_io.StringIO(_text(source)))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("empty CSV input") from None
    for col in ("dataset", "classifier"):
        if col not in header:
            raise DataError(f"CSV header lacks a {col!r} column")
    available = [h for h in header if h not in ("dataset", "classifier")]
    metrics = list(available if metrics is None else metrics)
    missing = [m for m in metrics if m not in header]
    if missing:
        raise DataError(f"declared metrics missing from CSV header: {missing}")
    pos = {h: i for i, h in enumerate(header)}
    records, seen, errors = [], set(), []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            errors.append(f"line {line_no}: expected {len(header)} fields, got {len(row)}")
            continue
        ds, clf = row[pos["dataset"]].strip(), row[pos["classifier"]].strip()
        key = (ds, clf)
        if key in seen:
            errors.append(f"line {line_no}: duplicate record ({clf}, {ds})")
            continue
        seen.add(key)
        vals = {}
        for m in metrics:
            cell = row[pos[m]].strip()
            if not cell:
                errors.append(f"line {line_no}: missing value for {m}")
                continue
            try:
                vals[m] = float(cell)
            except ValueError:
                errors.append(f"line {line_no}: cannot parse {cell!r} as a number for {m}")
                continue
            if not math.isfinite(vals[m]):
                errors.append(f"line {line_no}: non-finite value for {m}")
        records.append(RawRecord(ds, clf, vals))
    if errors:
        raise DataError("; ".join(errors))
    return records


def decile_bins(values: np.ndarray, bins: int = 10) -> np.ndarray:
    """Embedded category of each value: ``(2j + 1) / (2 bins)`` for bin ``j``.

    A value's bin is ``floor(bins * #{strictly smaller values} / N)``, so
    equal values always share a bin and the smallest land in bin 0.
    """
    v = np.asarray(values, dtype=float)
    less = np.searchsorted(np.sort(v), v, side="left")
    j = np.minimum((bins * less) // len(v), bins - 1)
    return (2 * j + 1) / (2.0 * bins)


def _minmax(values: np.ndarray, name: str) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        log.warning("metric %s is constant; min-max maps it to 0.5", name)
        return np.full_like(values, 0.5)
    return (values - lo) / (hi - lo)


def ingest(source: str | bytes | Path, config: AnalysisConfig | None = None) -> PerformanceTable:
    """Raw CSV to a validated :class:`PerformanceTable`.

    Lower-is-better metrics are negated before decile or min-max
    transforms and mapped ``x -> 1 - x`` under ``transform: none``.
    Metrics are reordered cardinal first.

    Raises:
        DataError: malformed CSV, missing cells or values outside ``[0, 1]``.
    """
    if config is None:
        records = read_raw(source)
        config = AnalysisConfig.default_for(list(records[0].values) if records else [])
    else:
        records = read_raw(source, [m.name for m in config.metrics])
    classifiers = list(dict.fromkeys(r.classifier for r in records))
    datasets = list(dict.fromkeys(r.dataset for r in records))
    ci = {c: i for i, c in enumerate(classifiers)}
    di = {d: i for i, d in enumerate(datasets)}
    n = len(config.metrics)
    raw = np.full((len(datasets), len(classifiers), n), np.nan)
    for r in records:
        raw[di[r.dataset], ci[r.classifier]] = [r.values[m.name] for m in config.metrics]
    missing = [f"missing evaluation ({c}, {d})" for d in datasets for c in classifiers
               if np.isnan(raw[di[d], ci[c]]).all()]
    if missing:
        raise DataError("; ".join(missing))

    out = np.empty_like(raw)
    for j, m in enumerate(config.metrics):
        col = raw[:, :, j]
        lower = m.orientation is Orientation.LOWER
        if m.transform is Transform.NONE:
            out[:, :, j] = 1.0 - col if lower else col
            continue
        col = -col if lower else col
        if m.transform is Transform.MINMAX:
            out[:, :, j] = _minmax(col, m.name)
        elif config.decile_scope == "per_dataset":
            out[:, :, j] = np.vstack([decile_bins(row, m.bins) for row in col])
        else:
            out[:, :, j] = decile_bins(col.ravel(), m.bins).reshape(col.shape)
    out = np.round(out, config.decimals)

    scale, order = config.scale.cardinal_first()
    table = PerformanceTable(tuple(classifiers), tuple(datasets), scale, out[:, :, order])
    return table.check()


def validate_source(source: str | bytes | Path, config: AnalysisConfig | None = None) -> list[str]:
    """Ingestion dry run: every problem as one line; empty when the input is usable."""
    try:
        table = ingest(source, config)
    except DataError as exc:
        return [p.strip() for p in str(exc).split(";") if p.strip()]
    return validate_table(table)


def table_to_csv(table: PerformanceTable) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "classifier", *table.scale.names])
    for i, ds in enumerate(table.datasets):
        for c, clf in enumerate(table.classifiers):
            w.writerow([ds, clf, *(repr(float(v)) for v in table.values[i, c])])
    return buf.getvalue()


def table_from_csv(text: str, scale: ScaleSpec) -> PerformanceTable:
    """Inverse of :func:`table_to_csv` for already normalised values."""
    records = read_raw(text, list(scale.names))
    return PerformanceTable.from_records(
        ((r.classifier, r.dataset, [r.values[m] for m in scale.names]) for r in records), scale
    )


# ---------------------------------------------------------------------------
# remote fetch


class FetchError(DataError):
    """Base class for remote acquisition failures."""


class NotFound(FetchError):
    pass


class HTTPStatusError(FetchError):
    def __init__(self, status: int, url: str) -> None:
        super().__init__(f"HTTP {status} for {url}")
        self.status = status


class FetchTimeout(FetchError):
    pass


class CapExceeded(FetchError):
    pass


def fetch_csv(
    url: str,
    *,
    timeout: float = 30.0,
    max_bytes: int = DEFAULT_MAX_BYTES,
    retries: int = 0,
    backoff: float = 0.5,
) -> bytes:
    """GET ``url`` and return the body of a 200 response.

    Timeouts and 5xx responses are retried up to ``retries`` times; 404
    and other statuses fail immediately.
    """
    if not url.startswith(("http://", "https://")):
        raise FetchError(f"not an http(s) URL: {url}")
    attempt = 0
    while True:
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                status = resp.status
                if status != 200:
                    raise HTTPStatusError(status, url)
                declared = resp.headers.get("Content-Length")
                if declared is not None and int(declared) > max_bytes:
                    raise CapExceeded(f"{url}: body of {declared} bytes exceeds cap of {max_bytes}")
                body = resp.read(max_bytes + 1)
                if len(body) > max_bytes:
                    raise CapExceeded(f"{url}: body exceeds cap of {max_bytes} bytes")
                return body
        except urllib.error.HTTPError as exc:
            if exc.code == 404:
                raise NotFound(f"404 for {url}") from None
            err: FetchError = HTTPStatusError(exc.code, url)
            retryable = exc.code >= 500
        except (socket.timeout, TimeoutError):
            err, retryable = FetchTimeout(f"timed out after {timeout}s fetching {url}"), True
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, (socket.timeout, TimeoutError)):
                err, retryable = FetchTimeout(f"timed out after {timeout}s fetching {url}"), True
            else:
                err, retryable = FetchError(f"cannot reach {url}: {exc.reason}"), True
        if not retryable or attempt >= retries:
            raise err
        attempt += 1
        log.info("retrying %s (%d/%d)", url, attempt, retries)
        time.sleep(backoff * attempt)


# ---------------------------------------------------------------------------
# reports


def _clean(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Enum):
        return obj.value
    return obj


def report_json(report: Mapping[str, Any]) -> str:
    """Stable JSON text: sorted keys, fixed indentation, tool version included."""
    payload = dict(report)
    payload.setdefault("version", __version__)
    payload.setdefault("tool", f"gsdfront {__version__}")
    return json.dumps(_clean(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def rows_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"# gsdfront {__version__}"])
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def dot_text(dot: str) -> str:
    return f"// gsdfront {__version__}\n{dot}"


def render(results: Any, fmt: str) -> str:
    """Render ``results`` as ``json`` (a mapping), ``csv`` (``(header, rows)``) or ``dot``."""
    if fmt == "json":
        return report_json(results)
    if fmt == "csv":
        header, rows = results
        return rows_csv(header, rows)
    if fmt == "dot":
        return dot_text(results if isinstance(results, str) else results.to_dot())
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(results: Any, path: str | Path, fmt: str | None = None) -> Path:
    """Render and write one report file; the format defaults to the file suffix.

    Raises:
        OSError: the path is not writable.
    """
    target = Path(path)
    text = render(results, fmt or target.suffix.lstrip("."))
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return target

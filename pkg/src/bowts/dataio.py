"""Datasets, synthetic corpora, random-window extraction and file formats.

Two input layouts are understood:

* a directory with one subdirectory per class, each holding plain-text files
  with one sample per line;
* a single delimited table (comma or tab), one series per row, label first.
  Rows may have different lengths.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bow import BowConfig, BowHistogram, Codebook, TrainingStats
from .errors import FormatError, InvalidInputError
from .signal import TimeSeries, as_array


CODEBOOK_MAGIC = "BOWTS-CODEBOOK"
CODEBOOK_VERSION = 1


def _class_order(labels) -> list:
    uniq = list(dict.fromkeys(labels))
    try:
        return sorted(uniq)
    except TypeError:
        return sorted(uniq, key=str)


@dataclass(frozen=True)
class Dataset:
    series: tuple
    name: str = "dataset"
    notes: str = ""
    classes: tuple = field(default=())

    def __post_init__(self):
        series = tuple(self.series)
        if not series:
            raise InvalidInputError(f"dataset {self.name!r} has no series")
        for s in series:
            if not isinstance(s, TimeSeries):
                raise InvalidInputError("dataset entries must be TimeSeries")
            if s.label is None:
                raise InvalidInputError(f"series {s.id!r} in {self.name!r} has no label")
        classes = tuple(self.classes) or tuple(_class_order(s.label for s in series))
        missing = {s.label for s in series} - set(classes)
        if missing:
            raise InvalidInputError(f"labels {sorted(map(str, missing))} not in class set")
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "classes", classes)

    def __len__(self) -> int:
        return len(self.series)

    @property
    def labels(self) -> list:
        return [s.label for s in self.series]

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.series])

    def map_series(self, fn, name: Optional[str] = None) -> "Dataset":
        return Dataset(
            tuple(fn(s) for s in self.series), name=name or self.name, notes=self.notes,
            classes=self.classes,
        )


# --- loading -------------------------------------------------------------------


def _parse_float(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InvalidInputError(f"{where}: cannot parse {token.strip()!r} as a number") from None
    if not math.isfinite(value):
        raise InvalidInputError(f"{where}: non-finite sample {token.strip()!r}")
    return value


def _read_series_file(path: Path) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            values.append(_parse_float(text, f"{path}, line {lineno}"))
    if not values:
        raise InvalidInputError(f"{path}: file contains no samples")
    return np.array(values)


def _load_directory(root: Path) -> Dataset:
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith("."))
    if not class_dirs:
        raise InvalidInputError(f"{root}: no class subdirectories found")
    series = []
    for cdir in class_dirs:
        files = sorted(p for p in cdir.iterdir() if p.is_file() and not p.name.startswith("."))
        for f in files:
            series.append(
                TimeSeries(_read_series_file(f), label=cdir.name, id=f"{cdir.name}/{f.name}")
            )
    if not series:
        raise InvalidInputError(f"{root}: class directories contain no files")
    return Dataset(tuple(series), name=root.name, notes=f"directory layout from {root}")


def _load_table(path: Path, delimiter: Optional[str] = None) -> Dataset:
    text = path.read_text(encoding="utf-8")
    if delimiter is None:
        first = next((ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
        delimiter = "\t" if "\t" in first else ","
    series = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter), start=1):
        if not row or not "".join(row).strip() or row[0].startswith("#"):
            continue
        cells = [c for c in row[1:] if c.strip()]
        if not cells:
            raise InvalidInputError(f"{path}, line {lineno}: row has a label but no samples")
        values = [
            _parse_float(c, f"{path}, line {lineno}, column {col}")
            for col, c in enumerate(cells, start=2)
        ]
        series.append(TimeSeries(values, label=row[0].strip(), id=f"row{lineno}"))
    if not series:
        raise InvalidInputError(f"{path}: table contains no rows")
    return Dataset(tuple(series), name=path.stem, notes=f"table layout from {path}")


def load_dataset(path, fmt: Optional[str] = None) -> Dataset:
    """Load a dataset from a class-directory tree (``fmt="dir"``) or a table (``"table"``).

    The layout is inferred from the path when ``fmt`` is omitted.
    """
    p = Path(path)
    if not p.exists():
        raise InvalidInputError(f"{p}: no such file or directory")
    if fmt is None:
        fmt = "dir" if p.is_dir() else "table"
    if fmt == "dir":
        if not p.is_dir():
            raise InvalidInputError(f"{p}: expected a directory")
        return _load_directory(p)
    if fmt in ("table", "csv", "tsv"):
        delim = {"csv": ",", "tsv": "\t"}.get(fmt)
        return _load_table(p, delim)
    raise InvalidInputError(f"unknown dataset format {fmt!r}")


def save_dataset(dataset: Dataset, path, fmt: str = "dir") -> None:
    p = Path(path)
    if fmt == "dir":
        p.mkdir(parents=True, exist_ok=True)
        counters: dict = {}
        for s in dataset.series:
            cdir = p / str(s.label)
            cdir.mkdir(exist_ok=True)
            counters[s.label] = counters.get(s.label, 0) + 1
            name = f"{counters[s.label]:04d}.txt"
            (cdir / name).write_text("".join(f"{v!r}\n" for v in s.values.tolist()))
    elif fmt in ("table", "csv"):
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            for s in dataset.series:
                w.writerow([s.label, *map(repr, s.values.tolist())])
    else:
        raise InvalidInputError(f"unknown dataset format {fmt!r}")


# --- window extraction and synthetic data ------------------------------------------------


def extract_random_windows(
    long_signal: TimeSeries, count: int, len_min: int, len_max: int, seed
) -> list:
    """Cut ``count`` windows at uniform random starts, lengths uniform in ``[len_min, len_max]``."""
    arr = as_array(long_signal)
    if len_min < 1 or len_min > len_max:
        raise InvalidInputError(f"invalid length range [{len_min}, {len_max}]")
    if arr.size < len_max:
        raise InvalidInputError(
            f"source of length {arr.size} is shorter than the maximum window {len_max}"
        )
    rng = np.random.default_rng(seed)
    label = getattr(long_signal, "label", None)
    src = getattr(long_signal, "id", None) or "signal"
    out = []
    for i in range(count):
        length = int(rng.integers(len_min, len_max + 1))
        start = int(rng.integers(0, arr.size - length + 1))
        out.append(TimeSeries(arr[start : start + length], label=label, id=f"{src}@{start}+{length}"))
    return out


def sinusoid_burst(length: int, cycles: float, shape: str = "sine", phase: float = 0.0) -> np.ndarray:
    """A Hann-tapered oscillation; the building block of the synthetic motifs."""
    t = np.arange(length) / length
    arg = 2 * np.pi * cycles * t + phase
    if shape == "sine":
        wave = np.sin(arg)
    elif shape == "square":
        wave = np.tanh(4.0 * np.sin(arg))
    elif shape == "sawtooth":
        wave = 2.0 * ((cycles * t + phase / (2 * np.pi)) % 1.0) - 1.0
    elif shape == "chirp":
        wave = np.sin(2 * np.pi * cycles * t * (0.5 + t) + phase)
    else:
        raise InvalidInputError(f"unknown burst shape {shape!r}")
    return wave * np.hanning(length)


def default_motifs(n_classes: int = 3, motifs_per_class: int = 3, spacing: float = 0.5) -> list:
    """Class dictionaries of sinusoid bursts.

    Motif ``m`` of every class has the same shape and length; classes differ
    only by ``spacing`` cycles per burst, so a coarse codebook cannot tell
    them apart.
    """
    shapes = ("sine", "square", "sawtooth", "chirp")
    dictionaries = []
    for c in range(n_classes):
        motifs = []
        for m in range(motifs_per_class):
            cycles = 2.0 + 2.0 * m + spacing * c
            motifs.append(sinusoid_burst(64 + 16 * m, cycles, shapes[m % len(shapes)]))
        dictionaries.append(motifs)
    return dictionaries


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic corpus.

    Each series is a stream of motifs from its class dictionary in random
    order, separated by silent gaps of up to ``gap_max`` samples, entered at a
    random offset when ``random_offset`` is set, with Gaussian noise on top.
    """

    n_classes: int = 3
    series_per_class: int = 100
    length_min: int = 1024
    length_max: int = 1024
    motifs: Optional[Sequence] = None
    noise_sigma: float = 0.1
    gap_max: int = 32
    random_offset: bool = True
    amplitude_jitter: float = 0.0
    seed: int = 0

    def dictionaries(self) -> list:
        return list(self.motifs) if self.motifs is not None else default_motifs(self.n_classes)


def gen_synthetic(spec: SyntheticSpec) -> Dataset:
    """Build the corpus described by ``spec``; deterministic in ``spec.seed``."""
    dictionaries = spec.dictionaries()
    if len(dictionaries) != spec.n_classes:
        raise InvalidInputError(
            f"{len(dictionaries)} motif dictionaries for {spec.n_classes} classes"
        )
    if spec.length_min < 1 or spec.length_min > spec.length_max:
        raise InvalidInputError("invalid synthetic length range")
    if spec.gap_max < 0:
        raise InvalidInputError("gap_max must be non-negative")
    for c, d in enumerate(dictionaries):
        if len(d) == 0:
            raise InvalidInputError(f"class {c} has an empty motif dictionary")
    rng = np.random.default_rng(spec.seed)
    series = []
    for c, motifs in enumerate(dictionaries):
        motifs = [np.asarray(m, dtype=np.float64) for m in motifs]
        longest = max(m.size for m in motifs) + spec.gap_max
        for i in range(spec.series_per_class):
            length = int(rng.integers(spec.length_min, spec.length_max + 1))
            skip = int(rng.integers(longest)) if spec.random_offset else 0
            parts, total = [], 0
            while total < length + skip:
                m = motifs[int(rng.integers(len(motifs)))]
                if spec.amplitude_jitter:
                    m = m * (1.0 + spec.amplitude_jitter * rng.uniform(-1, 1))
                gap = int(rng.integers(spec.gap_max + 1)) if spec.gap_max else 0
                parts += [m, np.zeros(gap)]
                total += m.size + gap
            x = np.concatenate(parts)[skip : skip + length]
            if spec.noise_sigma > 0:
                x = x + rng.normal(0.0, spec.noise_sigma, size=length)
            series.append(TimeSeries(x, label=f"c{c}", id=f"c{c}_{i:04d}"))
    return Dataset(tuple(series), name="synthetic", notes=f"synthetic motifs, seed={spec.seed}")


# --- codebook persistence ------------------------------------------------------------

_CONFIG_KEYS = ("window_len", "stride", "codebook_size", "wavelet", "max_train_segments", "max_iter", "seed")


def save_codebook(cb: Codebook, path) -> None:
    """Write a versioned text codebook; floats use 17 significant digits."""
    lines = [CODEBOOK_MAGIC, f"version {CODEBOOK_VERSION}", f"K {cb.size}", f"d {cb.dim}"]
    if cb.config is None:
        lines.append("config none")
    else:
        lines.append("config present")
        lines += [f"{k} {getattr(cb.config, k)}" for k in _CONFIG_KEYS]
    if cb.stats is not None:
        lines.append(f"iterations {cb.stats.iterations}")
        lines.append(f"segments_used {cb.stats.segments_used}")
        lines.append(f"converged {int(cb.stats.converged)}")
        lines.append("objective_history " + " ".join(f"{v:.17g}" for v in cb.stats.objective_history))
    lines.append("centroids")
    lines += [" ".join(f"{v:.17g}" for v in row) for row in cb.centroids.tolist()]
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    p = Path(path)
    try:
        lines = p.read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"{p}: {exc}") from None
    it = iter(enumerate(lines, start=1))

    def take(key: str) -> str:
        try:
            lineno, line = next(it)
        except StopIteration:
            raise FormatError(f"{p}: truncated before {key!r}") from None
        name, _, rest = line.partition(" ")
        if name != key:
            raise FormatError(f"{p}, line {lineno}: expected {key!r}, found {line[:40]!r}")
        return rest

    try:
        lineno, magic = next(it)
    except StopIteration:
        raise FormatError(f"{p}: empty file") from None
    if magic != CODEBOOK_MAGIC:
        raise FormatError(f"{p}: not a codebook file (bad magic)")
    version = take("version")
    if version != str(CODEBOOK_VERSION):
        raise FormatError(f"{p}: unsupported codebook version {version}")
    try:
        K, d = int(take("K")), int(take("d"))
    except ValueError:
        raise FormatError(f"{p}: K and d must be integers") from None
    if K < 1 or d < 1:
        raise InvalidInputError(f"{p}: codebook must have K >= 1 and d >= 1, got K={K}, d={d}")
    config = None
    if take("config") == "present":
        raw = {k: take(k) for k in _CONFIG_KEYS}
        try:
            config = BowConfig(**{k: (v if k == "wavelet" else int(v)) for k, v in raw.items()})
        except ValueError as exc:
            raise FormatError(f"{p}: bad config field: {exc}") from None
    stats = None
    lineno, line = next(it, (None, None))
    if line is not None and line.startswith("iterations"):
        try:
            iterations = int(line.split()[1])
            used = int(take("segments_used"))
            converged = bool(int(take("converged")))
            history = tuple(float(v) for v in take("objective_history").split())
        except (ValueError, IndexError):
            raise FormatError(f"{p}: malformed training statistics") from None
        stats = TrainingStats(iterations, history, used, converged)
        lineno, line = next(it, (None, None))
    if line != "centroids":
        raise FormatError(f"{p}: missing centroid block")
    rows = []
    for _ in range(K):
        lineno, line = next(it, (None, None))
        if line is None or line == "end":
            raise FormatError(f"{p}: truncated centroid block ({len(rows)} of {K} rows)")
        parts = line.split()
        if len(parts) != d:
            raise FormatError(f"{p}, line {lineno}: expected {d} values, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise FormatError(f"{p}, line {lineno}: unparseable centroid value") from None
    if next(it, (None, None))[1] != "end":
        raise FormatError(f"{p}: missing end marker (file truncated or has extra rows)")
    return Codebook(centroids=np.array(rows), config=config, stats=stats)


# --- histogram and report persistence -------------------------------------------------


def save_histograms(path, histograms: Sequence[BowHistogram], series: Sequence[TimeSeries]) -> None:
    """CSV with columns ``id, label, total, c0 .. c{K-1}``."""
    if len(histograms) != len(series):
        raise InvalidInputError("one histogram per series is required")
    K = histograms[0].counts.size if histograms else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label", "total", *[f"c{j}" for j in range(K)]])
        for h, s in zip(histograms, series):
            w.writerow([s.id, s.label, h.total, *h.counts.tolist()])


def load_histograms(path) -> list:
    """Inverse of :func:`save_histograms`: list of ``(id, label, BowHistogram)``."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["id", "label", "total"]:
            raise FormatError(f"{path}: not a histogram file")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FormatError(f"{path}, line {lineno}: expected {len(header)} fields")
            try:
                counts = np.array([int(v) for v in row[3:]], dtype=np.int64)
                total = int(row[2])
            except ValueError:
                raise FormatError(f"{path}, line {lineno}: non-integer count") from None
            out.append((row[0], row[1], BowHistogram(counts=counts, total=total)))
    return out


def save_report_json(report, path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def load_report_json(path):
    from .evaluation import ExperimentReport

    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    return ExperimentReport.from_dict(data)


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence], config: Optional[dict] = None) -> None:
    """Plot-ready CSV. The effective configuration goes on a leading ``#`` line."""
    buf = io.StringIO()
    if config is not None:
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path is None or str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def read_csv(path) -> tuple:
    """Return ``(config, header, rows)`` from a file written by :func:`write_csv`."""
    config = None
    lines = Path(path).read_text().splitlines()
    body = []
    for line in lines:
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise FormatError(f"{path}: empty CSV")
    return config, rows[0], rows[1:]


__all__ = [
    "Dataset",
    "SyntheticSpec",
    "default_motifs",
    "extract_random_windows",
    "gen_synthetic",
    "load_codebook",
    "load_dataset",
    "load_histograms",
    "load_report_json",
    "read_csv",
    "save_codebook",
    "save_dataset",
    "save_histograms",
    "save_report_json",
    "sinusoid_burst",
    "write_csv",
]

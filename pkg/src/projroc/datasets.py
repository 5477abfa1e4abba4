"""Dataset CSV ingestion and the bundled synthetic datasets.

A dataset file has a header with ``status`` (1 = diseased, 0 = healthy),
covariate columns ``x1..xd`` and marker columns ``y1..yK``.
"""

from __future__ import annotations

import csv
import io
import re
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from . import _rng
from .errors import DataFormatError
from .simulation import ExperimentPlan, gen_study
from .study import DISEASED, HEALTHY, PopulationSample, Study

_COL = re.compile(r"^([xy])(\d+)$")


def _numbered(header: list[str], prefix: str) -> list[str]:
    cols = sorted((int(m.group(2)), h) for h in header if (m := _COL.match(h)) and m.group(1) == prefix)
    numbers = [i for i, _ in cols]
    if numbers != list(range(1, len(numbers) + 1)):
        raise DataFormatError(f"{prefix} columns must be numbered {prefix}1..{prefix}{len(numbers)}")
    return [h for _, h in cols]


def parse_dataset(text: str, x, log_cols: Iterable[str] = (), source: str = "<dataset>") -> Study:
    """Parse dataset CSV text into a :class:`Study` conditioned at ``x``.

    ``log_cols`` names columns replaced by their natural logarithm.
    Errors carry the 1-based line number of the offending row.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataFormatError(f"{source}: empty file") from None
    if "status" not in header:
        raise DataFormatError(f"{source}: missing 'status' column")
    xcols = _numbered(header, "x")
    ycols = _numbered(header, "y")
    if not xcols or not ycols:
        raise DataFormatError(f"{source}: need at least one x column and one y column")
    log_cols = list(log_cols)
    for c in log_cols:
        if c not in header:
            raise DataFormatError(f"{source}: log-transform column {c!r} not in header")
    pos = {h: i for i, h in enumerate(header)}

    status, rows = [], []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(f"{source}: line {line_no}: expected {len(header)} cells, got {len(row)}")
        cells = {h: row[pos[h]].strip() for h in header}
        for h in ["status", *xcols, *ycols]:
            if cells[h] == "":
                raise DataFormatError(f"{source}: line {line_no}: missing value in column {h!r}")
        if cells["status"] not in ("0", "1"):
            raise DataFormatError(f"{source}: line {line_no}: status must be 0 or 1, got {cells['status']!r}")
        values = {}
        for h in [*xcols, *ycols]:
            try:
                v = float(cells[h])
            except ValueError:
                raise DataFormatError(f"{source}: line {line_no}: column {h!r} is not numeric") from None
            if h in log_cols:
                if not v > 0:
                    raise DataFormatError(f"{source}: line {line_no}: cannot log-transform {h}={v:g}")
                v = float(np.log(v))
            values[h] = v
        status.append(int(cells["status"]))
        rows.append([values[h] for h in xcols] + [values[h] for h in ycols])

    status = np.array(status)
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(xcols) + len(ycols))
    if not (status == 1).any() or not (status == 0).any():
        raise DataFormatError(f"{source}: both status classes (0 and 1) must be present")
    d = len(xcols)

    def pop(mask, label):
        return PopulationSample(data[mask, :d], data[mask, d:], label)

    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return Study(pop(status == 1, DISEASED), pop(status == 0, HEALTHY), x)


def read_dataset(path, x, log_cols: Iterable[str] = ()) -> Study:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    return parse_dataset(text, x, log_cols, source=str(path))


def study_to_csv(study: Study) -> str:
    d, K = study.d, study.K
    header = ["status", *(f"x{j + 1}" for j in range(d)), *(f"y{k + 1}" for k in range(K))]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for status, pop in ((1, study.diseased), (0, study.healthy)):
        for cov, mk in zip(pop.covariates, pop.markers):
            writer.writerow([status, *(f"{v:.10g}" for v in cov), *(f"{v:.10g}" for v in mk)])
    return buf.getvalue()


def make_binormal_1d(n: int = 2000, seed: int = 20240) -> Study:
    """d=1, K=2 markers, both with ``mu_F = 1 + x``, ``mu_G = x``, unit sd, Gaussian errors.

    Every conditional ROC curve is ``Phi(1 + Phi^{-1}(p))``.
    """
    rng = _rng.stream(seed)

    def pop(shift, label):
        x = rng.uniform(size=n)
        eps = rng.standard_normal((n, 2))
        return PopulationSample(x[:, None], (x + shift)[:, None] + eps, label)

    return Study(pop(1.0, DISEASED), pop(0.0, HEALTHY), np.array([0.5]))


def make_h0_2d(seed: int = 20241) -> Study:
    """Two markers drawn from the same d=2 scenario (equal curves), n=100 per population."""
    plan = ExperimentPlan(scenarios=("ROC1", "ROC1"), rho=0.5, seed=seed, reps=1)
    return gen_study(plan, 0)


BUNDLED = {"binormal_1d.csv": make_binormal_1d, "h0_2d.csv": make_h0_2d}


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled dataset shipped with the package."""
    return Path(str(resources.files("projroc") / "data" / name))

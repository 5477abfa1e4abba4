"""Serializable test reports."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class TestReport:
    """Outcome of one bootstrap test run."""

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    B_effective: int
    psi: str
    bandwidths: dict[str, Any]
    seed: int
    bootstrap_stats: list[float]
    mode: str | None = None
    directions: dict[str, list[list[float]]] | None = None
    pair_statistics: list[float] | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        return {k: v for k, v in out.items() if v is not None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [
            f"psi        : {self.psi}",
            f"statistic  : {self.statistic:.6g}",
            f"p-value    : {self.p_value:.4g}",
            f"B effective: {self.B_effective}",
        ]
        if self.mode is not None:
            lines.insert(0, f"mode       : {self.mode}")
        return "\n".join(lines)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary sibling file, then rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

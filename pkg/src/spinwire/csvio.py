"""Self-describing CSV files: ``# key: <json>`` header lines, then a plain table.

Floats are written with ``repr`` so identical runs give byte-identical bodies.
Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .propagator import Trajectory


def _cell(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(header: Mapping[str, Any], columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [f"# {key}: {json.dumps(value, sort_keys=True)}" for key, value in header.items()]
    lines.append(",".join(columns))
    lines.extend(",".join(_cell(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(
    path: str | Path,
    header: Mapping[str, Any],
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> None:
    atomic_write_text(path, format_csv(header, columns, rows))


def read_csv(path: str | Path) -> tuple[dict[str, Any], list[str], np.ndarray]:
    """Return ``(header, column names, float table)``."""
    header: dict[str, Any] = {}
    columns: list[str] | None = None
    data = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                try:
                    header[key.strip()] = json.loads(value)
                except json.JSONDecodeError:
                    header[key.strip()] = value.strip()
                continue
            cells = [c.strip() for c in line.split(",")]
            if columns is None:
                columns = cells
                continue
            try:
                data.append([float(c) for c in cells])
            except ValueError:
                raise ConfigError(f"{path}: non-numeric row {line!r}") from None
    if columns is None:
        raise ConfigError(f"{path}: no column header")
    table = np.array(data, dtype=float).reshape(len(data), len(columns))
    return header, columns, table


def column(columns: Sequence[str], table: np.ndarray, name: str) -> np.ndarray:
    try:
        return table[:, list(columns).index(name)]
    except ValueError:
        raise ConfigError(f"missing column {name!r}") from None


def write_trajectory_csv(
    path: str | Path,
    traj: Trajectory,
    header: Mapping[str, Any] | None = None,
    *,
    amplitudes: bool = False,
) -> None:
    """Columns ``t, site_0_abs2, ...`` and, optionally, ``site_j_re, site_j_im`` pairs."""
    d = traj.states.shape[1]
    columns = ["t"] + [f"site_{j}_abs2" for j in range(d)]
    if amplitudes:
        columns += [f"site_{j}_{part}" for j in range(d) for part in ("re", "im")]
    prob = traj.probabilities

    def rows():
        for k, t in enumerate(traj.times):
            row = [float(t), *prob[k]]
            if amplitudes:
                pairs = np.empty(2 * d)
                pairs[0::2] = traj.states[k].real
                pairs[1::2] = traj.states[k].imag
                row += list(pairs)
            yield row

    write_csv(path, header or {}, columns, rows())

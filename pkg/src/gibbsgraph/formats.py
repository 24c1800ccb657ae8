"""Text file formats for point sets and configurations.

Point file: header ``x0,x1,...``, then one point per line as comma-separated
floats.  Configuration file: header ``i,j`` then one open edge per line as
zero-based indices with ``i < j``; the vertex count comes from the companion
point set.  Lines starting with ``#`` are metadata (manifest, summaries) and
are skipped by the readers.  Floats are written with ``repr`` so they re-parse
to the same double.
"""
from __future__ import annotations

import io
import os
import sys
from typing import Iterable, TextIO

from .model import Configuration, EdgeId, PointSet


class FormatError(ValueError):
    pass


def fmt_float(x: float) -> str:
    return repr(float(x))


def _data_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def points_to_text(ps: PointSet, comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(",".join(f"x{k}" for k in range(ps.dim)) + "\n")
    for row in ps.coords:
        buf.write(",".join(fmt_float(v) for v in row) + "\n")
    for c in comments:
        buf.write(f"# {c}\n")
    return buf.getvalue()


def points_from_text(text: str) -> PointSet:
    lines = _data_lines(text)
    if not lines:
        raise FormatError("point file has no header")
    lineno, header = lines[0]
    cols = header.split(",")
    if cols != [f"x{k}" for k in range(len(cols))]:
        raise FormatError(f"line {lineno}: bad point header {header!r}")
    dim = len(cols)
    rows = []
    for lineno, line in lines[1:]:
        fields = line.split(",")
        if len(fields) != dim:
            raise FormatError(f"line {lineno}: expected {dim} coordinates, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    try:
        return PointSet(rows, dim=dim)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def config_to_text(cfg: Configuration, comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    buf.write("i,j\n")
    for i, j in cfg.sorted_edges():
        buf.write(f"{i},{j}\n")
    for c in comments:
        buf.write(f"# {c}\n")
    return buf.getvalue()


def config_from_text(text: str, n: int) -> Configuration:
    lines = _data_lines(text)
    if not lines or lines[0][1] != "i,j":
        raise FormatError("configuration file must start with header 'i,j'")
    cfg = Configuration(n)
    for lineno, line in lines[1:]:
        fields = line.split(",")
        if len(fields) != 2:
            raise FormatError(f"line {lineno}: expected 'i,j'")
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            raise FormatError(f"line {lineno}: indices must be integers") from None
        if not 0 <= i < j < n:
            raise FormatError(f"line {lineno}: edge ({i},{j}) is not canonical for n={n}")
        if EdgeId(i, j) in cfg:
            raise FormatError(f"line {lineno}: duplicate edge ({i},{j})")
        cfg.open_edge(EdgeId(i, j))
    return cfg


def write_text(path: str | os.PathLike | None, text: str, stream: TextIO | None = None) -> None:
    """Write UTF-8 with LF endings; ``path=None`` writes to ``stream``."""
    if path is None:
        (stream or sys.stdout).write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_text(path: str | os.PathLike) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def read_points(path) -> PointSet:
    return points_from_text(read_text(path))


def write_points(path, ps: PointSet, comments: Iterable[str] = ()) -> None:
    write_text(path, points_to_text(ps, comments))


def read_config(path, n: int) -> Configuration:
    return config_from_text(read_text(path), n)


def write_config(path, cfg: Configuration, comments: Iterable[str] = ()) -> None:
    write_text(path, config_to_text(cfg, comments))

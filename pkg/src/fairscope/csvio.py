"""CSV formats for aggregate inputs and per-group confusion matrices.

Inputs (one row per group)::

    group,weight,true_0,...,true_{k-1},pred_0,...,pred_{k-1}

Confusions (one row per group and true label)::

    group,weight,pi_y,true_label,p_0,...,p_{k-1}

Emitted floats use 17 significant digits so parsing them back is lossless.
"""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import AggregateInputs, ConfusionSet
from .errors import ParseError


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not valid UTF-8: {e}") from None
    reader = csv.reader(io.StringIO(text))
    rows = [(i, [c.strip() for c in row]) for i, row in enumerate(reader, start=1) if any(c.strip() for c in row)]
    if not rows:
        raise ParseError("empty file", line=1)
    return rows[0][1], rows[1:]


def _number(cell: str, line: int, column: str) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"not a number: {cell!r}", line=line, column=column) from None
    if not math.isfinite(v):
        raise ParseError(f"not a finite number: {cell!r}", line=line, column=column)
    return v


def _check_header(header: list[str], fixed: list[str], prefixes: list[str]) -> int:
    """Validate a header of fixed columns followed by indexed blocks; returns k."""
    if header[: len(fixed)] != fixed:
        raise ParseError(f"header must start with {','.join(fixed)}", line=1)
    rest = header[len(fixed):]
    if not prefixes:
        return 0
    if len(rest) % len(prefixes) != 0 or not rest:
        raise ParseError(f"header needs equally many {' and '.join(p + '*' for p in prefixes)} columns", line=1)
    k = len(rest) // len(prefixes)
    expected = [f"{p}{i}" for p in prefixes for i in range(k)]
    for j, (got, want) in enumerate(zip(rest, expected)):
        if got != want:
            raise ParseError(f"expected column {want!r}, found {got!r}", line=1, column=str(len(fixed) + j + 1))
    if k < 2:
        raise ParseError("need at least 2 labels", line=1)
    return k


def parse_inputs_csv(path) -> AggregateInputs:
    header, rows = _read_rows(path)
    k = _check_header(header, ["group", "weight"], ["true_", "pred_"])
    ids, w, t, p = [], [], [], []
    for line, row in rows:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, found {len(row)}", line=line)
        ids.append(row[0])
        w.append(_number(row[1], line, "weight"))
        t.append([_number(row[2 + i], line, header[2 + i]) for i in range(k)])
        p.append([_number(row[2 + k + i], line, header[2 + k + i]) for i in range(k)])
    if not rows:
        raise ParseError("no group rows", line=2)
    return AggregateInputs.from_arrays(w, np.array(t), np.array(p), ids)


def parse_confusions_csv(path) -> ConfusionSet:
    header, rows = _read_rows(path)
    fixed = ["group", "weight", "pi_y", "true_label"]
    if header[:4] != fixed:
        raise ParseError(f"header must start with {','.join(fixed)}", line=1)
    k = len(header) - 4
    if k < 2 or header[4:] != [f"p_{i}" for i in range(k)]:
        raise ParseError("header must continue with p_0,...,p_{k-1} for k >= 2", line=1)
    groups: dict[str, dict] = {}
    for line, row in rows:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, found {len(row)}", line=line)
        gid = row[0]
        weight = _number(row[1], line, "weight")
        pi = _number(row[2], line, "pi_y")
        try:
            y = int(row[3])
        except ValueError:
            raise ParseError(f"true_label must be an integer, got {row[3]!r}", line=line, column="true_label") from None
        if not 0 <= y < k:
            raise ParseError(f"true_label {y} outside 0..{k - 1}", line=line, column="true_label")
        g = groups.setdefault(gid, {"weight": weight, "pi": {}, "rows": {}, "line": line})
        if g["weight"] != weight:
            raise ParseError(f"group {gid!r} has inconsistent weights", line=line, column="weight")
        if y in g["rows"]:
            raise ParseError(f"group {gid!r} repeats true_label {y}", line=line, column="true_label")
        g["pi"][y] = pi
        g["rows"][y] = [_number(row[4 + i], line, header[4 + i]) for i in range(k)]
    if not groups:
        raise ParseError("no group rows", line=2)
    ids, w, t, mats = [], [], [], []
    for gid, g in groups.items():
        if len(g["rows"]) != k:
            raise ParseError(f"group {gid!r} needs one row per true label 0..{k - 1}", line=g["line"])
        ids.append(gid)
        w.append(g["weight"])
        t.append([g["pi"][y] for y in range(k)])
        mats.append([g["rows"][y] for y in range(k)])
    return ConfusionSet.from_arrays(w, np.array(t), np.array(mats), None, ids)


def emit_inputs(inputs: AggregateInputs) -> str:
    k = inputs.k
    out = io.StringIO()
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(["group", "weight"] + [f"true_{i}" for i in range(k)] + [f"pred_{i}" for i in range(k)])
    for g in inputs.groups:
        wr.writerow([g.group_id, fmt(g.weight)] + [fmt(x) for x in g.true_props] + [fmt(x) for x in g.pred_props])
    return out.getvalue()


def emit_confusions(cs: ConfusionSet) -> str:
    k = cs.k
    out = io.StringIO()
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(["group", "weight", "pi_y", "true_label"] + [f"p_{i}" for i in range(k)])
    for s, m in cs.per_group:
        for y in range(k):
            wr.writerow([s.group_id, fmt(s.weight), fmt(s.true_props[y]), y] + [fmt(x) for x in m.entries[y]])
    return out.getvalue()


PARETO_COLUMNS = ["beta", "unfairness_lb", "error_lb", "mindisc"]


def emit_pareto(curve) -> str:
    out = io.StringIO()
    wr = csv.writer(out, lineterminator="\n")
    wr.writerow(PARETO_COLUMNS)
    for p in curve.points:
        wr.writerow([fmt(p.beta), fmt(p.unfairness_lb), fmt(p.error_lb), fmt(p.mindisc)])
    return out.getvalue()


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

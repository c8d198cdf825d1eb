"""Channel-spec documents, CSV tables and a minimal SVG plotter."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .channels import AffineChannel, KrausChannel
from .errors import SpecError
from .families import FamilySpec

# ---------------------------------------------------------------- channel-spec documents


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SpecError(f"{where}: expected a number, got {x!r}")
    if not math.isfinite(x):
        raise SpecError(f"{where}: non-finite number")
    return float(x)


def _vector3(v, where):
    if not isinstance(v, list) or len(v) != 3:
        raise SpecError(f"{where}: expected a list of 3 numbers")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]


def _kraus(doc):
    if not isinstance(doc, list) or not doc:
        raise SpecError("kraus: expected a non-empty list of 2x2 matrices")
    ops = []
    for k, m in enumerate(doc):
        if not isinstance(m, list) or len(m) != 2 or any(not isinstance(row, list) or len(row) != 2 for row in m):
            raise SpecError(f"kraus[{k}]: expected a 2x2 matrix of [re, im] pairs")
        mat = np.empty((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                z = m[i][j]
                if not isinstance(z, list) or len(z) != 2:
                    raise SpecError(f"kraus[{k}][{i}][{j}]: expected [re, im]")
                mat[i, j] = complex(_number(z[0], f"kraus[{k}][{i}][{j}]"), _number(z[1], f"kraus[{k}][{i}][{j}]"))
        ops.append(mat)
    return ops


def parse_spec(doc):
    """Validate a channel-spec document.

    Returns ``("kraus", [2x2 arrays])``, ``("affine", AffineChannel)`` or
    ``("family", FamilySpec)``. Trace preservation and complete positivity
    are checked later, by the consumer.
    """
    if not isinstance(doc, dict):
        raise SpecError("channel spec must be a JSON object")
    keys = set(doc) & {"kraus", "affine", "family"}
    if len(keys) != 1 or len(doc) != 1:
        raise SpecError("channel spec needs exactly one of 'kraus', 'affine', 'family'")
    kind = keys.pop()
    body = doc[kind]
    if kind == "kraus":
        return kind, _kraus(body)
    if kind == "affine":
        if not isinstance(body, dict) or set(body) - {"lambda", "tau"} or "lambda" not in body:
            raise SpecError("affine: expected {'lambda': [x, y, z], 'tau': [x, y, z]}")
        lam = _vector3(body["lambda"], "affine.lambda")
        tau = _vector3(body.get("tau", [0, 0, 0]), "affine.tau")
        return kind, AffineChannel(lam, tau)
    if not isinstance(body, dict) or not isinstance(body.get("name"), str) or set(body) - {"name", "params"}:
        raise SpecError("family: expected {'name': string, 'params': {key: number}}")
    params = body.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("family.params must be an object")
    return kind, FamilySpec(body["name"], {k: _number(v, f"family.params.{k}") for k, v in params.items()})


def load_spec(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_spec(doc)


def kraus_doc(ch: KrausChannel):
    return {"kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in k] for k in ch.ops]}


# ---------------------------------------------------------------- CSV


def fmt(x) -> str:
    """17 significant digits, locale independent."""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_atomic(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def samples_csv(samples) -> str:
    header = ["family", "purity", "c_l1", "c_rel", *samples.keys]
    cols = np.column_stack([samples.purity, samples.c_l1, samples.c_rel, samples.params])
    return csv_text(header, ([samples.family, *row] for row in cols))


def boundary_csv(rows) -> str:
    return csv_text(["purity", "c_min", "c_max"], rows)


def read_series(path):
    """Read a sample or boundary CSV into ``("points"|"curve", columns)``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise SpecError(f"{path}: empty CSV")
    header, body = rows[0], rows[1:]
    if header[:4] == ["family", "purity", "c_l1", "c_rel"]:
        kind, cols = "points", ("purity", "c_l1")
    elif header == ["purity", "c_min", "c_max"]:
        kind, cols = "curve", ("purity", "c_min", "c_max")
    else:
        raise SpecError(f"{path}: unrecognized header {header}")
    idx = [header.index(c) for c in cols]
    try:
        data = np.array([[float(r[i]) for i in idx] for r in body], dtype=float).reshape(-1, len(idx))
    except (ValueError, IndexError) as exc:
        raise SpecError(f"{path}: malformed row") from exc
    return kind, data


# ---------------------------------------------------------------- SVG

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=70, right=170, top=30, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
MAX_POINTS = 20_000


def svg_plot(series, title="") -> str:
    """Scatter/curve plot of coherence against purity.

    ``series`` is a list of ``(label, kind, data)`` as returned by
    :func:`read_series`. Large scatters are thinned to every k-th point.
    """
    x0, x1 = 0.25, 1.0
    ymax = 1.0
    for _, _, data in series:
        finite = data[:, 1:][np.isfinite(data[:, 1:])]
        if finite.size:
            ymax = max(ymax, float(finite.max()))
    ymax = math.ceil(ymax * 2 + 1e-9) / 2
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return MARGIN["top"] + (1 - y / ymax) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(4):
        x = x0 + i * 0.25
        out.append(f'<line x1="{sx(x):.2f}" y1="{sy(0):.2f}" x2="{sx(x):.2f}" y2="{sy(0) + 5:.2f}" stroke="black"/>')
        out.append(f'<text x="{sx(x):.2f}" y="{sy(0) + 20:.2f}" text-anchor="middle">{x:g}</text>')
    steps = int(round(ymax / 0.5))
    for i in range(steps + 1):
        y = i * 0.5
        out.append(f'<line x1="{sx(x0) - 5:.2f}" y1="{sy(y):.2f}" x2="{sx(x0):.2f}" y2="{sy(y):.2f}" stroke="black"/>')
        out.append(f'<text x="{sx(x0) - 8:.2f}" y="{sy(y) + 4:.2f}" text-anchor="end">{y:g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">purity P</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.2f})">l1 coherence C</text>')
    if title:
        out.append(f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="20" text-anchor="middle">{escape(title)}</text>')
    for k, (label, kind, data) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<g fill="{color}" stroke="{color}">')
        if kind == "points":
            step = max(1, math.ceil(len(data) / MAX_POINTS))
            for x, y in data[::step]:
                if np.isfinite(x) and np.isfinite(y):
                    out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.2" stroke="none"/>')
        else:
            for col in (1, 2):
                pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data[:, [0, col]] if np.isfinite(y))
                out.append(f'<polyline points="{pts}" fill="none" stroke-width="1.5"/>')
        out.append("</g>")
        ly = MARGIN["top"] + 15 + 18 * k
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<rect x="{lx}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{lx + 16}" y="{ly}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Point CSV files, pipeline and report JSON, boundary and grid output."""
import csv
import json
import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from complex_core import INF, ExtendedComplex, Polyline
from config import Config
from errors import FileFormatError, PreconditionError
from map_builder import MapPipeline, pipeline_from_dict, pipeline_to_dict

logger = logging.getLogger(__name__)

INF_TOKEN = "inf"
ERROR_TOKEN = "error"
SVG_SIZE = 800


def format_number(x: float) -> str:
    return f"{x:.17g}"


def format_point(z: Optional[ExtendedComplex]) -> List[str]:
    if z is None:
        return [ERROR_TOKEN]
    if z is INF:
        return [INF_TOKEN]
    z = complex(z)
    return [format_number(z.real), format_number(z.imag)]


def parse_point(fields: Sequence[str], line: int, path: Optional[str] = None) -> ExtendedComplex:
    values = [f.strip() for f in fields]
    if len(values) == 1 and values[0].lower() == INF_TOKEN:
        return INF
    if len(values) != 2:
        raise FileFormatError(f"expected 're,im' or '{INF_TOKEN}', got {','.join(fields)!r}", line, path)
    try:
        re_part, im_part = float(values[0]), float(values[1])
    except ValueError:
        raise FileFormatError(f"not a number in {','.join(fields)!r}", line, path)
    if not (math.isfinite(re_part) and math.isfinite(im_part)):
        raise FileFormatError(f"non-finite coordinate in {','.join(fields)!r}; write '{INF_TOKEN}' for infinity", line, path)
    return complex(re_part, im_part)


def read_points(path: str, minimum: int = 2) -> List[ExtendedComplex]:
    """Points of a CSV file, one per row; '#' lines and blank lines are skipped."""
    points = []
    try:
        with open(path, mode='r', encoding='utf-8', newline='') as csvfile:
            for line, row in enumerate(csv.reader(csvfile), start=1):
                if not row or not any(f.strip() for f in row) or row[0].lstrip().startswith('#'):
                    continue
                points.append(parse_point(row, line, path))
    except OSError as e:
        raise FileFormatError(f"cannot read point file: {e}", path=path)
    if len(points) < minimum:
        raise FileFormatError(f"need at least {minimum} points, found {len(points)}", path=path)
    logger.debug(f"read {len(points)} points from {path}")
    return points


def write_points(path: str, points: Iterable[Optional[ExtendedComplex]], header: Optional[str] = None):
    with open(path, mode='w', encoding='utf-8', newline='') as csvfile:
        if header:
            csvfile.write(f"# {header}\n")
        writer = csv.writer(csvfile)
        for z in points:
            writer.writerow(format_point(z))


def write_boundary(path: str, curve: Polyline, data_points: Sequence[ExtendedComplex]):
    """re,im,is_datapoint rows of a sampled boundary."""
    data = {complex(z) for z in data_points if z is not INF}
    with open(path, mode='w', encoding='utf-8', newline='') as csvfile:
        csvfile.write("# re,im,is_datapoint\n")
        writer = csv.writer(csvfile)
        for z in curve.points:
            if z is INF:
                continue
            writer.writerow(format_point(z) + [1 if complex(z) in data else 0])


# --------------------------- JSON --------------------------- #

def save_json(path: str, document: dict):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, ensure_ascii=False, indent=4)


def load_json(path: str) -> dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except OSError as e:
        raise FileFormatError(f"cannot read file: {e}", path=path)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"invalid JSON: {e.msg}", e.lineno, path)


def save_pipeline(path: str, pipeline: MapPipeline):
    save_json(path, pipeline_to_dict(pipeline))
    logger.info(f"pipeline with {len(pipeline)} data points saved to {path}")


def load_pipeline(path: str, config: Optional[Config] = None) -> MapPipeline:
    document = load_json(path)
    try:
        return pipeline_from_dict(document, config)
    except PreconditionError as e:
        raise FileFormatError(str(e), path=path)


# --------------------------- Grids --------------------------- #

Curve = Tuple[str, np.ndarray]


def write_grid_csv(path: str, curves: Sequence[Curve]):
    with open(path, mode='w', encoding='utf-8', newline='') as csvfile:
        csvfile.write("# curve,kind,re,im\n")
        writer = csv.writer(csvfile)
        for index, (kind, values) in enumerate(curves):
            for z in values:
                if np.isfinite(z):
                    writer.writerow([index, kind] + format_point(complex(z)))


def _svg_path(values: np.ndarray, to_svg, closed: bool = False) -> str:
    finite = [to_svg(z) for z in values if np.isfinite(z)]
    if len(finite) < 2:
        return ""
    parts = [f"M {finite[0][0]:.3f} {finite[0][1]:.3f}"]
    parts.extend(f"L {x:.3f} {y:.3f}" for x, y in finite[1:])
    if closed:
        parts.append("Z")
    return " ".join(parts)


def grid_svg(curves: Sequence[Curve], boundary: Optional[np.ndarray] = None, size: int = SVG_SIZE) -> str:
    """One <path> per grid curve plus the boundary, y axis pointing up."""
    everything = [values[np.isfinite(values)] for _, values in curves]
    if boundary is not None:
        everything.append(boundary[np.isfinite(boundary)])
    pts = np.concatenate(everything) if everything else np.zeros(0, dtype=complex)
    if pts.size == 0:
        raise PreconditionError("nothing to draw")
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-300)
    margin = 0.05 * span
    factor = size / (span + 2 * margin)

    def to_svg(z):
        return (z.real - x0 + margin) * factor, (y1 - z.imag + margin) * factor

    width = (x1 - x0 + 2 * margin) * factor
    height = (y1 - y0 + 2 * margin) * factor
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
             f'viewBox="0 0 {width:.3f} {height:.3f}">']
    colours = {"ring": "#1f77b4", "ray": "#d62728"}
    for kind, values in curves:
        d = _svg_path(values, to_svg)
        if d:
            lines.append(f'  <path class="{kind}" d="{d}" fill="none" stroke="{colours.get(kind, "#555555")}" '
                         f'stroke-width="0.8"/>')
    if boundary is not None:
        d = _svg_path(boundary, to_svg, closed=True)
        if d:
            lines.append(f'  <path class="boundary" d="{d}" fill="none" stroke="black" stroke-width="1.5"/>')
    lines.append('</svg>')
    return "\n".join(lines) + "\n"


def write_grid_svg(path: str, curves: Sequence[Curve], boundary: Optional[np.ndarray] = None):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(grid_svg(curves, boundary))

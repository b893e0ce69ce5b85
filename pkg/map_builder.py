"""Pipelines of the geodesic, slit and zipper algorithms, their evaluation,
boundary sampling, disc normalization and conformal welding."""
import cmath
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from complex_core import (INF, ExtendedComplex, Mobius, Polyline, as_extended, data_scale, decode_point,
                          encode_point, winding_sign)
from config import Config
from elementary_maps import (InitialGeodesic, InitialUnbounded, InitialZipper, MapStep, TerminalGeodesic,
                             TerminalZipper, step_from_dict)
from errors import AmbiguousBranchError, DegenerateInputError, OutOfOrderError, PreconditionError, ZipmapError
from map_steps import CircularSlit, GeodesicSlit, MobiusNormalize, SquareRoot, StraightSlit, WeldingSlit

logger = logging.getLogger(__name__)

VARIANTS = ("geodesic", "slit", "zipper")
MODES = ("interior", "exterior", "extension")
EXTENSION_SUBSTEPS = 64
# tiny negative imaginary parts between inverse steps are rounding, not geometry
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class BranchPolicy:
    mode: str = "interior"
    seed: Optional[complex] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise PreconditionError(f"unknown branch mode {self.mode!r}")


@dataclass(frozen=True)
class WeldingSpec:
    """Increasing positive x_1 < ... < x_n welded to decreasing negative y_1 > ... > y_n."""
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))

    def validate(self):
        if not self.x or len(self.x) != len(self.y):
            raise PreconditionError("welding needs two non-empty lists of equal length")
        if self.x[0] <= 0 or self.y[0] >= 0:
            raise PreconditionError("welding points must satisfy y_1 < 0 < x_1")
        for j in range(1, len(self.x)):
            if not self.x[j] > self.x[j - 1]:
                raise PreconditionError(f"x is not strictly increasing at index {j}")
            if not self.y[j] < self.y[j - 1]:
                raise PreconditionError(f"y is not strictly decreasing at index {j}")


@dataclass(frozen=True)
class MapPipeline:
    """The composed map, its data and the boundary correspondence.

    ``prevertices[j]`` is the real point (or INF) where data point j lands after the
    full composition, taken on the interior side; ``exterior_prevertices`` the one on
    the exterior side. Both are stored before disc normalization.
    """
    variant: str
    steps: Tuple[MapStep, ...]
    data_points: Tuple[ExtendedComplex, ...]
    prevertices: Tuple[ExtendedComplex, ...]
    exterior_prevertices: Tuple[ExtendedComplex, ...]
    orientation: int
    bounded: bool
    normalized: bool = False
    interior: Optional[complex] = None
    boundary_fix: Optional[int] = None

    @property
    def halfplane_steps(self) -> Tuple[MapStep, ...]:
        if self.normalized:
            return self.steps[:-1]
        return self.steps

    @property
    def normalization(self) -> Optional[MapStep]:
        return self.steps[-1] if self.normalized else None

    def halfplane(self) -> "MapPipeline":
        if not self.normalized:
            return self
        return replace(self, steps=self.steps[:-1], normalized=False, interior=None, boundary_fix=None)

    def output_prevertices(self, exterior: bool = False) -> List[ExtendedComplex]:
        """Prevertices in the output plane (on the unit circle when normalized)."""
        values = self.exterior_prevertices if exterior else self.prevertices
        if not self.normalized:
            return list(values)
        return [self.normalization.forward(v) for v in values]

    def data_index(self, z: ExtendedComplex, tol: float = 0.0) -> Optional[int]:
        z = as_extended(z)
        for j, point in enumerate(self.data_points):
            if point == z:
                return j
        if tol > 0 and z is not INF:
            finite = [(j, p) for j, p in enumerate(self.data_points) if p is not INF]
            if finite:
                j, p = min(finite, key=lambda item: abs(item[1] - z))
                if abs(p - z) <= tol:
                    return j
        return None

    def __len__(self):
        return len(self.data_points)


# --------------------------- Building --------------------------- #

def _prepare_points(points: Sequence, minimum: int) -> List[ExtendedComplex]:
    pts = [as_extended(p) for p in points]
    if len(pts) < minimum:
        raise PreconditionError(f"at least {minimum} data points are needed, got {len(pts)}")
    if any(p is INF for p in pts[1:]):
        raise PreconditionError("only the first data point may be the point at infinity")
    finite = [complex(p) for p in pts if p is not INF]
    if len(set(finite)) != len(finite):
        raise DegenerateInputError("data points must be distinct")
    return pts


def _check_order(zeta: complex, index: int, tol: float):
    zeta = complex(zeta)
    if not (math.isfinite(zeta.real) and math.isfinite(zeta.imag)) or zeta.imag <= tol * abs(zeta):
        raise OutOfOrderError(index, zeta)


class _Unzipper:
    """State of a build: the steps so far, the two real images of every welded
    point, and the images of infinity and of z0."""

    def __init__(self, first: MapStep, bounded: bool):
        self.steps: List[MapStep] = [first]
        self.side_a = np.zeros(0)
        self.side_b = np.zeros(0)
        self.w_inf = first.forward(INF) if bounded else None
        self.x0: ExtendedComplex = INF

    def add_sides(self, a: float, b: float):
        self.side_a = np.append(self.side_a, a)
        self.side_b = np.append(self.side_b, b)

    def push(self, step: MapStep, rest: np.ndarray, splits: Sequence[Tuple[float, float]]) -> np.ndarray:
        step.index = len(self.steps)
        self.steps.append(step)
        if self.side_a.size:
            self.side_a = step.forward_array(self.side_a + 0j).real
            self.side_b = step.forward_array(self.side_b + 0j).real
        for a, b in splits:
            self.add_sides(a, b)
        if self.w_inf is not None:
            self.w_inf = step.forward(self.w_inf)
        self.x0 = step.forward(self.x0)
        if self.x0 is not INF:
            self.x0 = complex(self.x0.real, 0.0)
        return step.forward_array(rest)

    def terminal_end(self) -> ExtendedComplex:
        if self.x0 is not INF and self.x0 == 0:
            raise DegenerateInputError("the closing arc collapsed: z0 maps to 0")
        return self.x0

    def interior_sector(self, zeta: ExtendedComplex, theta: float) -> int:
        """+1 when the interior is the sector next to the positive axis."""
        if self.w_inf is None:
            # unbounded data: the region on the left of the traversal
            return -1
        u = Mobius.pole_at(zeta)(self.w_inf)
        exterior_first = u is not INF and cmath.phase(u) < theta
        return -1 if exterior_first else 1


def _finish(unz: _Unzipper, terminal, variant: str, pts, bounded: bool, tail: Sequence[ExtendedComplex] = ()):
    unz.steps.append(terminal)
    sector = terminal.sector
    inner_sides = unz.side_a if sector == 1 else unz.side_b
    outer_sides = unz.side_b if sector == 1 else unz.side_a
    inner = terminal.forward_array(inner_sides + 0j, "interior").real
    outer = terminal.forward_array(outer_sides + 0j, "exterior").real
    prevertices = [INF] + [float(v) + 0j for v in inner] + [0j]
    exterior = [INF] + [float(v) + 0j for v in outer] + [0j]
    for point in tail:
        prevertices.append(complex(terminal.forward(point, "interior").real, 0.0))
        exterior.append(complex(terminal.forward(point, "exterior").real, 0.0))
    pipeline = MapPipeline(variant, tuple(unz.steps), tuple(pts), tuple(prevertices), tuple(exterior),
                           orientation=-sector, bounded=bounded)
    if bounded:
        winding = data_winding(pipeline)
        if winding is not None and winding != pipeline.orientation:
            logger.warning(f"{variant} map: data winds {winding:+d} about the image of i, "
                           f"orientation recorded as {pipeline.orientation:+d}")
    return pipeline


def data_winding(p: MapPipeline) -> Optional[int]:
    """Winding of the finite data polygon about phi^-1(i); None when the polygon misses that point."""
    finite = [z for z in p.data_points if z is not INF]
    try:
        center = eval_inverse(p, 1j)
        if center is INF:
            return None
        return winding_sign(finite, center)
    except ZipmapError as e:
        logger.debug(f"no winding for {p.variant} data: {e}")
        return None


def _build_chain(points: Sequence, variant: str, config: Optional[Config]) -> MapPipeline:
    config = config or Config()
    started = time.perf_counter()
    pts = _prepare_points(points, 3)
    bounded = pts[0] is not INF
    if bounded:
        first = InitialGeodesic(pts[0], pts[1])
    else:
        first = InitialUnbounded(pts[1], pts[2])
    unz = _Unzipper(first, bounded)
    rest = first.forward_array(np.array(pts[2:], dtype=complex))
    for k in range(2, len(pts)):
        zeta = complex(rest[0])
        _check_order(zeta, k, config.out_of_order_tol)
        if variant == "geodesic":
            step = GeodesicSlit(zeta)
        else:
            step = StraightSlit(zeta, config.newton)
        rest = unz.push(step, rest[1:], [step.seam_values()])
        logger.debug(f"{variant} step {k}: zeta={zeta}")
    zeta_end = unz.terminal_end()
    terminal = TerminalGeodesic(zeta_end, unz.interior_sector(zeta_end, math.pi / 2))
    pipeline = _finish(unz, terminal, variant, pts, bounded)
    logger.info(f"built {variant} map through {len(pts)} points in {time.perf_counter() - started:.3f}s")
    return pipeline


def build_geodesic(points: Sequence, config: Optional[Config] = None) -> MapPipeline:
    return _build_chain(points, "geodesic", config)


def build_slit(points: Sequence, config: Optional[Config] = None) -> MapPipeline:
    return _build_chain(points, "slit", config)


def build_zipper(points: Sequence, config: Optional[Config] = None) -> MapPipeline:
    """Circular arcs through consecutive point pairs; needs an even number (>= 4) of finite points."""
    config = config or Config()
    started = time.perf_counter()
    pts = _prepare_points(points, 4)
    if pts[0] is INF:
        raise PreconditionError("the zipper algorithm needs a closed curve of finite points")
    if len(pts) % 2:
        raise PreconditionError(f"the zipper algorithm needs an even number of points, got {len(pts)}")
    first = InitialZipper(pts[0], pts[1], pts[2])
    unz = _Unzipper(first, True)
    unz.add_sides(1.0, -1.0)
    rest = first.forward_array(np.array(pts[3:], dtype=complex))
    k = 3
    while rest.size >= 3:
        c_img, a_img = complex(rest[0]), complex(rest[1])
        _check_order(c_img, k, config.out_of_order_tol)
        _check_order(a_img, k + 1, config.out_of_order_tol)
        step = CircularSlit(a_img, c_img, config.newton)
        rest = unz.push(step, rest[2:], [step.seam_values(), step.seam_preimages(c_img)])
        logger.debug(f"zipper step {k}-{k + 1}: c={c_img}, a={a_img}")
        k += 2
    last = complex(rest[0])
    _check_order(last, len(pts) - 1, config.out_of_order_tol)
    zeta_end = unz.terminal_end()
    theta = cmath.phase(Mobius.pole_at(zeta_end)(last))
    terminal = TerminalZipper(zeta_end, last, unz.interior_sector(zeta_end, theta))
    pipeline = _finish(unz, terminal, "zipper", pts, True, tail=[last])
    logger.info(f"built zipper map through {len(pts)} points in {time.perf_counter() - started:.3f}s")
    return pipeline


def build(points: Sequence, variant: str = "geodesic", config: Optional[Config] = None) -> MapPipeline:
    builders = {"geodesic": build_geodesic, "slit": build_slit, "zipper": build_zipper}
    if variant not in builders:
        raise PreconditionError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    return builders[variant](points, config)


# --------------------------- Evaluation --------------------------- #

def _clamp_upper(value: ExtendedComplex) -> ExtendedComplex:
    if value is INF:
        return INF
    if -CLAMP_TOL * max(1.0, abs(value)) <= value.imag < 0:
        return complex(value.real, 0.0)
    return value


def _clamp_upper_array(values: np.ndarray) -> np.ndarray:
    bound = -CLAMP_TOL * np.maximum(1.0, np.abs(values))
    return np.where((values.imag < 0) & (values.imag >= bound), values.real + 0j, values)


def _lookup_prevertex(p: MapPipeline, z: ExtendedComplex, mode: str) -> Optional[ExtendedComplex]:
    j = p.data_index(z)
    if j is None:
        return None
    values = p.exterior_prevertices if mode == "exterior" else p.prevertices
    value = values[j]
    return p.normalization.forward(value) if p.normalized else value


def _forward_steps(steps, z: ExtendedComplex, mode: str) -> ExtendedComplex:
    value = z
    for step in steps:
        value = step.forward(value, mode)
    return value


def _trace(steps, z: ExtendedComplex) -> List[ExtendedComplex]:
    values = []
    value = z
    for step in steps:
        value = step.forward(value, "interior")
        values.append(value)
    return values


def _eval_extension(p: MapPipeline, z: ExtendedComplex, seed) -> ExtendedComplex:
    if z is INF:
        return _forward_steps(p.steps, z, "interior")
    if seed is None:
        value = z
        for index, step in enumerate(p.steps):
            if step.near_cut(value):
                raise AmbiguousBranchError(f"{z} is close to a branch cut of step {index}; give a seed point")
            value = step.forward(value, "interior")
        return value
    seed = complex(seed)
    chain = _trace(p.steps, seed)
    for t in np.linspace(0.0, 1.0, EXTENSION_SUBSTEPS + 1)[1:]:
        value = seed + t * (complex(z) - seed)
        following = []
        for step, previous in zip(p.steps, chain):
            value = step.continue_from(value, previous)
            following.append(value)
        chain = following
    return chain[-1]


def eval_forward(p: MapPipeline, z, policy: Optional[BranchPolicy] = None) -> ExtendedComplex:
    """phi(z): interior points land in the closed upper half-plane (the disc when normalized)."""
    policy = policy or BranchPolicy()
    z = as_extended(z)
    hit = _lookup_prevertex(p, z, policy.mode)
    if hit is not None:
        return hit
    if policy.mode == "extension":
        return _eval_extension(p, z, policy.seed)
    return _forward_steps(p.steps, z, policy.mode)


def _lookup_data(p: MapPipeline, w: ExtendedComplex) -> Optional[ExtendedComplex]:
    for values in (p.output_prevertices(), p.output_prevertices(exterior=True)):
        for j, value in enumerate(values):
            if value == w:
                return p.data_points[j]
    return None


def eval_inverse(p: MapPipeline, w) -> ExtendedComplex:
    """phi^-1(w) for w in the closed upper half-plane (closed disc when normalized)."""
    w = as_extended(w)
    hit = _lookup_data(p, w)
    if hit is not None:
        return hit
    value = w
    steps = p.steps
    for index, step in enumerate(reversed(steps)):
        value = step.inverse(value)
        if index < len(steps) - 1:
            value = _clamp_upper(value)
    return value


def _forward_chunk(p: MapPipeline, zs: np.ndarray, mode: str) -> np.ndarray:
    values = np.asarray(zs, dtype=complex)
    for step in p.steps:
        values = step.forward_array(values, mode)
    return values


def _inverse_chunk(steps, ws: np.ndarray) -> np.ndarray:
    values = np.asarray(ws, dtype=complex)
    for index, step in enumerate(reversed(steps)):
        values = step.inverse_array(values)
        if index < len(steps) - 1:
            values = _clamp_upper_array(values)
    return values


def _run_chunks(func, values: np.ndarray, config: Config) -> np.ndarray:
    size = max(1, config.chunk_size)
    chunks = [values[i:i + size] for i in range(0, len(values), size)]
    if len(chunks) <= 1 or config.workers <= 1:
        results = [func(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(func, chunks))
    return np.concatenate(results) if results else np.zeros(0, dtype=complex)


def _to_extended(values: np.ndarray) -> List[ExtendedComplex]:
    return [complex(v) if np.isfinite(v) else INF for v in values]


def eval_forward_many(p: MapPipeline, zs: Sequence, policy: Optional[BranchPolicy] = None,
                      config: Optional[Config] = None) -> List[ExtendedComplex]:
    """eval_forward over many points, chunked over a thread pool; order is preserved."""
    policy = policy or BranchPolicy()
    config = config or Config()
    points = [as_extended(z) for z in zs]
    out: List[ExtendedComplex] = [None] * len(points)
    batch = []
    for i, z in enumerate(points):
        if policy.mode == "extension" or z is INF or p.data_index(z) is not None:
            out[i] = eval_forward(p, z, policy)
        else:
            batch.append(i)
    if batch:
        values = np.array([points[i] for i in batch], dtype=complex)
        mapped = _run_chunks(lambda chunk: _forward_chunk(p, chunk, policy.mode), values, config)
        for i, value in zip(batch, _to_extended(mapped)):
            out[i] = value
    return out


def eval_inverse_many(p: MapPipeline, ws: Sequence, config: Optional[Config] = None) -> List[ExtendedComplex]:
    config = config or Config()
    points = [as_extended(w) for w in ws]
    out: List[ExtendedComplex] = [None] * len(points)
    known = {}
    for values in (p.output_prevertices(), p.output_prevertices(exterior=True)):
        for j, value in enumerate(values):
            known.setdefault(value, p.data_points[j])
    batch = []
    for i, w in enumerate(points):
        if w is INF or w in known:
            out[i] = known[w] if w in known else eval_inverse(p, w)
        else:
            batch.append(i)
    if batch:
        values = np.array([points[i] for i in batch], dtype=complex)
        mapped = _run_chunks(lambda chunk: _inverse_chunk(p.steps, chunk), values, config)
        for i, value in zip(batch, _to_extended(mapped)):
            out[i] = value
    return out


# --------------------------- Boundary --------------------------- #

def _ray(x: float, neighbor: Optional[ExtendedComplex], t: np.ndarray) -> np.ndarray:
    """Points x + s*scale*tan(pi t / 2), heading away from the neighbouring prevertex."""
    if neighbor is None or neighbor is INF or complex(neighbor).real == x:
        direction, scale = 1.0, max(1.0, abs(x))
    else:
        gap = x - complex(neighbor).real
        direction, scale = math.copysign(1.0, gap), abs(gap)
    return x + direction * scale * np.tan(0.5 * math.pi * t)


def _arc_parameters(prev: List[ExtendedComplex], j: int, m: int) -> np.ndarray:
    n = len(prev)
    start, end = prev[j], prev[(j + 1) % n]
    t = np.arange(1, m) / m
    if start is not INF and end is not INF:
        a, b = complex(start).real, complex(end).real
        return a + t * (b - a)
    if start is INF and end is not INF:
        neighbor = prev[(j + 2) % n] if n > 2 else None
        return _ray(complex(end).real, neighbor, 1 - t)
    if end is INF and start is not INF:
        neighbor = prev[(j - 1) % n] if n > 2 else None
        return _ray(complex(start).real, neighbor, t)
    return np.zeros(0)


def boundary_sample(p: MapPipeline, samples_per_arc: int, config: Optional[Config] = None) -> Polyline:
    """The computed boundary through every data point, samples_per_arc - 1 points between neighbours."""
    if samples_per_arc < 1:
        raise PreconditionError("samples_per_arc must be at least 1")
    if p.variant == "welding":
        raise PreconditionError("a welded curve has no closed boundary to sample; evaluate the inverse map instead")
    config = config or Config()
    steps = p.halfplane_steps
    prev = list(p.prevertices)
    n = len(prev)
    arcs = []
    for j in range(n):
        params = _arc_parameters(prev, j, samples_per_arc)
        curve = _run_chunks(lambda chunk: _inverse_chunk(steps, chunk), params + 0j, config) if params.size else []
        arcs.append((p.data_points[j], list(curve)))
    points: List[ExtendedComplex] = []
    for vertex, curve in arcs:
        if vertex is not INF:
            points.append(vertex)
        points.extend(complex(v) for v in curve if np.isfinite(v))
    deduped = [points[0]]
    for point in points[1:]:
        if point != deduped[-1]:
            deduped.append(point)
    if p.bounded and len(deduped) > 1 and deduped[-1] == deduped[0]:
        deduped.pop()
    # unbounded curves start right after infinity and end on the closing arc
    return Polyline(tuple(deduped), closed=p.bounded)


# --------------------------- Normalization --------------------------- #

def normalize_to_disc(p: MapPipeline, interior, boundary_fix, config: Optional[Config] = None) -> MapPipeline:
    """Append the Möbius step sending phi(interior) to 0 and the prevertex of boundary_fix to 1."""
    base = p.halfplane()
    interior = as_extended(interior)
    if interior is INF:
        raise PreconditionError("the interior point must be finite")
    w0 = eval_forward(base, interior)
    if w0 is INF or not w0.imag > 0:
        raise PreconditionError(f"{interior} does not map into the upper half-plane (image {w0})")
    if isinstance(boundary_fix, int) and not isinstance(boundary_fix, bool):
        index = boundary_fix
        if not 0 <= index < len(base.data_points):
            raise PreconditionError(f"boundary index {index} out of range")
    else:
        tol = 1e-12 * max(1.0, data_scale([z for z in base.data_points if z is not INF]))
        index = base.data_index(boundary_fix, tol)
        if index is None:
            raise PreconditionError(f"{boundary_fix} is not a data point")
    step = MobiusNormalize.disc_map(w0, base.prevertices[index])
    logger.debug(f"normalized to the disc: phi({interior}) = {w0}, fixed data point {index}")
    return replace(base, steps=base.steps + (step,), normalized=True, interior=complex(interior),
                   boundary_fix=index)


def _disc_grid(kind: str, rings: int, rays: int, samples: int, geometric: bool) -> List[Tuple[str, np.ndarray]]:
    if kind == "cartesian":
        curves = []
        for k in range(1, rings):
            c = -1 + 2 * k / rings
            half = math.sqrt(1 - c * c)
            s = np.linspace(-half, half, samples)
            curves.append(("vertical", c + 1j * s))
            curves.append(("horizontal", s + 1j * c))
        return curves
    if kind != "polar":
        raise PreconditionError(f"unknown grid kind {kind!r}")
    if geometric:
        radii = [1 - 2.0 ** -k for k in range(1, rings + 1)]
    else:
        radii = [k / rings for k in range(1, rings)]
    circle = np.exp(2j * math.pi * np.arange(samples + 1) / samples)
    curves = [("ring", r * circle) for r in radii]
    t = np.linspace(0.0, 1.0, samples)
    curves.extend(("ray", t * np.exp(2j * math.pi * j / rays)) for j in range(rays))
    return curves


def grid_curves(p: MapPipeline, kind: str = "polar", rings: int = 8, rays: int = 16, samples: int = 128,
                geometric: bool = False, config: Optional[Config] = None) -> List[Tuple[str, np.ndarray]]:
    """Images under phi^-1 of a grid on the unit disc."""
    if not p.normalized:
        raise PreconditionError("the pipeline is not normalized to the disc; run normalize first")
    if rings < 1 or rays < 1 or samples < 2:
        raise PreconditionError("rings and rays must be positive and samples at least 2")
    config = config or Config()
    images = []
    for name, curve in _disc_grid(kind, rings, rays, samples, geometric):
        mapped = _run_chunks(lambda chunk: _inverse_chunk(p.steps, chunk), curve, config)
        images.append((name, mapped))
    logger.debug(f"{kind} grid: {len(images)} curves of {samples} samples")
    return images


# --------------------------- Welding --------------------------- #

def weld_build(spec: WeldingSpec, config: Optional[Config] = None) -> MapPipeline:
    """phi: H -> C minus a curve, with phi(x_j) = phi(y_j) for every pair."""
    config = config or Config()
    spec.validate()
    xs = np.array(spec.x, dtype=float)
    ys = np.array(spec.y, dtype=float)
    welds: List[WeldingSlit] = []
    for j in range(len(xs)):
        step = WeldingSlit(xs[j], ys[j], config.newton)
        xs[j + 1:] = step.inverse_array(xs[j + 1:] + 0j).real
        ys[j + 1:] = step.inverse_array(ys[j + 1:] + 0j).real
        welds.append(step)
    steps: List[MapStep] = [SquareRoot()] + list(reversed(welds))
    for index, step in enumerate(steps):
        step.index = index
    welded = []
    for j in range(len(welds)):
        value = 0j
        for step in welds[j + 1:]:
            value = step.inverse(value)
        welded.append(value * value)
    logger.info(f"welded {len(welds)} pairs")
    return MapPipeline("welding", tuple(steps), tuple(welded), tuple(complex(v) for v in spec.x),
                       tuple(complex(v) for v in spec.y), orientation=1, bounded=False)


def welded_map(p: MapPipeline, x) -> ExtendedComplex:
    return eval_inverse(p, x)


# --------------------------- Self-test data --------------------------- #

def inverted_ellipse_points(n: int, r: float = 0.95) -> List[complex]:
    """f(e^(2 pi i j/n)) for f(z) = rz/(1 + (rz)^2), counter-clockwise around 0."""
    z = r * np.exp(2j * math.pi * np.arange(n) / n)
    return [complex(v) for v in z / (1 + z * z)]


def prevertex_angle_error(variant: str, n: int, r: float = 0.95, config: Optional[Config] = None) -> float:
    """Largest angular distance between the computed prevertices and e^(2 pi i j/n)."""
    points = inverted_ellipse_points(n, r)
    if variant == "zipper" and n % 2:
        raise PreconditionError("the zipper self-test needs an even n")
    pipeline = normalize_to_disc(build(points, variant, config), 0j, 0)
    angles = np.array([cmath.phase(v) for v in pipeline.output_prevertices()])
    expected = 2 * math.pi * np.arange(n) / n
    gaps = np.angle(np.exp(1j * (angles - expected)))
    return float(np.abs(gaps).max())


# --------------------------- Serialization --------------------------- #

def pipeline_to_dict(p: MapPipeline) -> dict:
    return {
        "variant": p.variant,
        "bounded": p.bounded,
        "orientation": p.orientation,
        "normalized": p.normalized,
        "interior": None if p.interior is None else encode_point(p.interior),
        "boundary_fix": p.boundary_fix,
        "points": [encode_point(z) for z in p.data_points],
        "prevertices": [encode_point(z) for z in p.prevertices],
        "exterior_prevertices": [encode_point(z) for z in p.exterior_prevertices],
        "steps": [step.to_dict() for step in p.steps],
    }


def pipeline_from_dict(data: dict, config: Optional[Config] = None) -> MapPipeline:
    config = config or Config()
    try:
        steps = [step_from_dict(item) for item in data["steps"]]
        for index, step in enumerate(steps):
            step.index = index
            if hasattr(step, "newton"):
                step.newton = config.newton
        interior = data.get("interior")
        return MapPipeline(
            variant=data["variant"],
            steps=tuple(steps),
            data_points=tuple(decode_point(z) for z in data["points"]),
            prevertices=tuple(decode_point(z) for z in data["prevertices"]),
            exterior_prevertices=tuple(decode_point(z) for z in data.get("exterior_prevertices", data["prevertices"])),
            orientation=int(data["orientation"]),
            bounded=bool(data["bounded"]),
            normalized=bool(data.get("normalized", False)),
            interior=None if interior is None else complex(decode_point(interior)),
            boundary_fix=data.get("boundary_fix"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise PreconditionError(f"malformed pipeline document: {e}")


def data_image_residual(p: MapPipeline) -> float:
    """Largest |Im| of a data point pushed through the steps; zero up to rounding for a good build."""
    finite = np.array([z for z in p.data_points if z is not INF], dtype=complex)
    if not finite.size or p.variant == "welding":
        return 0.0
    values = _forward_chunk(p.halfplane(), finite, "interior")
    values = values[np.isfinite(values)]
    return float(np.abs(values.imag).max()) if values.size else 0.0

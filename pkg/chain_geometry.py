"""Disc-chains, diamond-chains and the geometric checks on data points.

Every validator returns a ChainReport instead of raising, so the command line
can print the whole list of failures at once.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage
from shapely.geometry import LineString, LinearRing, Point, Polygon, box
from shapely.ops import linemerge, unary_union
from shapely.prepared import prep

from complex_core import INF, ExtendedComplex, Polyline, as_extended, data_scale, encode_point, point_segment_distance
from errors import DegenerateInputError, InfeasibleChainError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_C1 = 8.0
PACMAN_ARC_SAMPLES = 256
MIN_SAMPLES_PER_ARC = 8
# open sets: a point this close (relative) to a diamond edge counts as outside
ANGLE_SLACK = 1e-12
QUASICIRCLE_POLES = 8


# --------------------------- Types --------------------------- #

@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise DegenerateInputError(f"disc radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class DiscChain:
    discs: Tuple[Disc, ...]
    closed: bool = False
    tolerance: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "discs", tuple(self.discs))

    def __len__(self):
        return len(self.discs)

    @property
    def centers(self) -> np.ndarray:
        return np.array([d.center for d in self.discs], dtype=complex)

    @property
    def radii(self) -> np.ndarray:
        return np.array([d.radius for d in self.discs], dtype=float)

    @property
    def scale(self) -> float:
        return data_scale(self.centers) + 2 * float(self.radii.max())

    def consecutive_pairs(self) -> List[Tuple[int, int]]:
        n = len(self.discs)
        pairs = [(j, j + 1) for j in range(n - 1)]
        if self.closed and n > 2:
            pairs.append((n - 1, 0))
        return pairs


@dataclass(frozen=True)
class Diamond:
    """Open rhombus with opposite vertices a and b and angle 2*half_angle at both.

    With b at infinity it is the sector of half-opening half_angle at a around
    the unit direction.
    """
    a: complex
    b: ExtendedComplex
    half_angle: float
    direction: Optional[complex] = None

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", as_extended(self.b))
        if not 0 < self.half_angle < math.pi / 2:
            raise PreconditionError(f"diamond half angle must be in (0, pi/2), got {self.half_angle}")
        if self.b is INF:
            if self.direction is None or self.direction == 0:
                raise PreconditionError("a sector diamond needs a direction")
            object.__setattr__(self, "direction", complex(self.direction) / abs(self.direction))
        elif self.b == self.a:
            raise DegenerateInputError("diamond vertices coincide")

    @property
    def is_sector(self) -> bool:
        return self.b is INF

    def to_polygon(self, reach: Optional[float] = None) -> Polygon:
        """Shapely polygon of the diamond; a sector is cut off at distance reach from a."""
        t = math.tan(self.half_angle)
        if self.is_sector:
            if reach is None:
                raise PreconditionError("a sector diamond needs a reach to become a polygon")
            u = self.direction
            corners = [self.a, self.a + reach * u * complex(1, t), self.a + reach * u * complex(1, -t)]
        else:
            half = (self.b - self.a) / 2
            mid = self.a + half
            corners = [self.a, mid + 1j * t * half, self.b, mid - 1j * t * half]
        return Polygon([(z.real, z.imag) for z in corners])


@dataclass(frozen=True)
class Pacman:
    """B(center, radius) minus the closed sector |arg(conj(rotation)(z - center))| <= half_angle."""
    center: complex
    radius: float
    half_angle: float
    rotation: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise PreconditionError(f"pacman radius must be positive, got {self.radius}")
        if not 0 < self.half_angle < math.pi / 2:
            raise PreconditionError(f"pacman half angle must be in (0, pi/2), got {self.half_angle}")
        rotation = complex(self.rotation)
        if abs(abs(rotation) - 1) > 1e-12:
            raise PreconditionError(f"pacman rotation must be unimodular, got {rotation}")
        object.__setattr__(self, "rotation", rotation)

    def contains(self, z: ExtendedComplex) -> bool:
        if z is INF:
            return False
        rel = complex(z) - self.center
        if rel == 0:
            return False
        return abs(rel) < self.radius and abs(np.angle(self.rotation.conjugate() * rel)) > self.half_angle

    def to_polygon(self, samples: int = PACMAN_ARC_SAMPLES) -> Polygon:
        angles = np.linspace(self.half_angle, 2 * math.pi - self.half_angle, samples)
        arc = self.center + self.radius * self.rotation * np.exp(1j * angles)
        ring = [self.center] + list(arc)
        return Polygon([(z.real, z.imag) for z in ring])


@dataclass(frozen=True)
class Violation:
    kind: str
    indices: Tuple[int, ...]
    magnitude: float
    location: Optional[complex] = None

    def to_dict(self) -> dict:
        data = {"kind": self.kind, "indices": list(self.indices), "magnitude": self.magnitude}
        if self.location is not None:
            data["location"] = encode_point(self.location)
        return data


@dataclass
class ChainReport:
    violations: List[Violation] = field(default_factory=list)
    check: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, indices, magnitude: float, location=None):
        self.violations.append(Violation(kind, tuple(int(i) for i in indices), float(magnitude), location))

    def to_dict(self) -> dict:
        return {"check": self.check, "ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def _finite_points(points: Sequence, minimum: int, what: str) -> np.ndarray:
    pts = [as_extended(p) for p in points]
    if any(p is INF for p in pts):
        raise PreconditionError(f"{what} needs finite points")
    if len(pts) < minimum:
        raise PreconditionError(f"{what} needs at least {minimum} points, got {len(pts)}")
    return np.array(pts, dtype=complex)


# --------------------------- Disc-chains --------------------------- #

def validate_disc_chain(chain: DiscChain) -> ChainReport:
    """Disjoint interiors for every pair, tangency for neighbours (signed gaps as magnitudes)."""
    if len(chain) < 2:
        raise PreconditionError("a disc-chain needs at least 2 discs")
    report = ChainReport(check="disc-chain")
    centers, radii = chain.centers, chain.radii
    slack = chain.tolerance * chain.scale
    gaps = np.abs(centers[:, None] - centers[None, :]) - (radii[:, None] + radii[None, :])
    n = len(chain)
    rows, cols = np.triu_indices(n, k=1)
    pair_gaps = gaps[rows, cols]
    neighbours = (cols - rows == 1) | (chain.closed and n > 2) & (rows == 0) & (cols == n - 1)
    overlap = pair_gaps < -slack
    loose = neighbours & ~overlap & (pair_gaps > slack)
    for index in np.nonzero(overlap | loose)[0]:
        kind = "overlap" if overlap[index] else "tangency"
        report.add(kind, (rows[index], cols[index]), pair_gaps[index])
    logger.debug(f"disc-chain of {n} discs: {len(report.violations)} violations")
    return report


def tangency_points(chain: DiscChain) -> List[complex]:
    report = validate_disc_chain(chain)
    if not report.ok:
        raise PreconditionError(f"not a disc-chain: {report.violations[0].kind} at discs {report.violations[0].indices}")
    points = []
    for i, j in chain.consecutive_pairs():
        c_i, c_j = chain.discs[i].center, chain.discs[j].center
        points.append(c_i + chain.discs[i].radius * (c_j - c_i) / abs(c_j - c_i))
    return points


def _vertex_radii(vertices: np.ndarray, eps: float) -> np.ndarray:
    n = len(vertices)
    starts, ends = vertices, np.roll(vertices, -1)
    radii = np.empty(n)
    for k in range(n):
        others = np.abs(vertices - vertices[k])
        others[k] = np.inf
        far_edges = [e for e in range(n) if e != k and (e + 1) % n != k]
        edge_gap = point_segment_distance(vertices[k], starts[far_edges], ends[far_edges]).min() if far_edges else np.inf
        radii[k] = min(eps, others.min() / 3, edge_gap / 3)
    return radii


def _corner_caps(vertices: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Largest edge-disc radius next to each vertex disc.

    A disc of radius r tangent to the vertex disc stays within half the corner
    angle of its edge when r / (rho + r) <= sin(angle / 2).
    """
    n = len(vertices)
    caps = np.full(n, np.inf)
    for k in range(n):
        back = vertices[k - 1] - vertices[k]
        ahead = vertices[(k + 1) % n] - vertices[k]
        s = math.sin(abs(float(np.angle(ahead / back))) / 2)
        if s < 1:
            caps[k] = rho[k] * s / (1 - s)
    return caps


def polygon_disc_chain(polygon: Polyline, eps: float) -> DiscChain:
    """Closed disc-chain centred on a simple polygon: a disc at every vertex, equal discs along the edges."""
    if not polygon.closed:
        raise PreconditionError("polygon_disc_chain needs a closed polygon")
    if not eps > 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    vertices = polygon.finite_array()
    n = len(vertices)
    if n < 3 or not Polygon([(z.real, z.imag) for z in vertices]).is_valid:
        raise PreconditionError("polygon is not simple")
    rho = _vertex_radii(vertices, eps)
    caps = _corner_caps(vertices, rho)
    # trimmed edges: the part of every edge outside its two vertex discs
    units = [(vertices[(k + 1) % n] - vertices[k]) / abs(vertices[(k + 1) % n] - vertices[k]) for k in range(n)]
    t_starts = np.array([vertices[k] + rho[k] * units[k] for k in range(n)])
    t_ends = np.array([vertices[(k + 1) % n] - rho[(k + 1) % n] * units[k] for k in range(n)])
    discs: List[Disc] = []
    for k in range(n):
        discs.append(Disc(vertices[k], rho[k]))
        length = abs(t_ends[k] - t_starts[k])
        if length <= 0:
            raise InfeasibleChainError(f"edge {k} is swallowed by its vertex discs")
        others = [e for e in range(n) if e != k]
        gaps = [segment_gap(t_starts[k], t_ends[k], t_starts[e], t_ends[e]) for e in others]
        far_vertices = [v for v in range(n) if v not in (k, (k + 1) % n)]
        gaps.extend(point_segment_distance(vertices[far_vertices], t_starts[k], t_ends[k]))
        r_max = min(eps, min(gaps) / 3, caps[k], caps[(k + 1) % n])
        if not r_max > 0:
            raise InfeasibleChainError(f"no room for discs along edge {k}")
        count = math.ceil(length / (2 * r_max))
        r = length / (2 * count)
        for i in range(count):
            discs.append(Disc(t_starts[k] + (2 * i + 1) * r * units[k], r))
    logger.debug(f"polygon disc-chain: {n} vertices, {len(discs)} discs")
    return DiscChain(tuple(discs), closed=True)


def segment_gap(a: complex, b: complex, c: complex, d: complex) -> float:
    return float(LineString([(a.real, a.imag), (b.real, b.imag)]).distance(
        LineString([(c.real, c.imag), (d.real, d.imag)])))


def _whitney_mask(region, n: int) -> np.ndarray:
    """Level-n cells covered by dyadic squares Q with 2Q inside the region."""
    size = 2 ** n
    mask = np.zeros((size, size), dtype=bool)
    stack = [(0, 0, 0)]
    while stack:
        level, i, j = stack.pop()
        side = 2.0 ** -level
        x0, y0 = i * side, j * side
        doubled = box(x0 - side / 2, y0 - side / 2, x0 + 1.5 * side, y0 + 1.5 * side)
        if region.contains(doubled):
            block = 2 ** (n - level)
            mask[i * block:(i + 1) * block, j * block:(j + 1) * block] = True
        elif level < n and region.intersects(box(x0, y0, x0 + side, y0 + side)):
            for di in (0, 1):
                for dj in (0, 1):
                    stack.append((level + 1, 2 * i + di, 2 * j + dj))
    return mask


def _drop_pinches(component: np.ndarray, keep: Tuple[int, int]) -> np.ndarray:
    """Remove cells until no lattice point is shared by two diagonal-only cells; keeps the piece holding keep."""
    component = component.copy()
    dropped = 0
    while True:
        a, b = component[:-1, :-1], component[1:, :-1]
        c, d = component[:-1, 1:], component[1:, 1:]
        falling = np.argwhere(a & d & ~b & ~c)
        rising = np.argwhere(b & c & ~a & ~d)
        if falling.size:
            i, j = (int(v) for v in falling[0])
            pair = [(i, j), (i + 1, j + 1)]
        elif rising.size:
            i, j = (int(v) for v in rising[0])
            pair = [(i + 1, j), (i, j + 1)]
        else:
            break
        cell = pair[1] if pair[0] == keep else pair[0]
        component[cell] = False
        dropped += 1
        labels, _ = ndimage.label(component)
        component = labels == labels[keep]
    if dropped:
        logger.debug(f"Whitney component: dropped {dropped} cell(s) at pinched lattice points")
    return component


def _outer_lattice_loop(component: np.ndarray) -> List[Tuple[int, int]]:
    """Counter-clockwise lattice boundary of a 4-connected set of cells."""
    size_x, size_y = component.shape
    padded = np.pad(component, 1)
    outgoing = {}

    def add(start, end):
        if start in outgoing:
            raise InfeasibleChainError(f"the boundary of the Whitney component is pinched at lattice point {start}")
        outgoing[start] = end

    for i, j in zip(*np.nonzero(component)):
        i, j = int(i), int(j)
        if not padded[i + 1, j]:
            add((i, j), (i + 1, j))
        if not padded[i + 2, j + 1]:
            add((i + 1, j), (i + 1, j + 1))
        if not padded[i + 1, j + 2]:
            add((i + 1, j + 1), (i, j + 1))
        if not padded[i, j + 1]:
            add((i, j + 1), (i, j))
    loops = []
    while outgoing:
        start, end = outgoing.popitem()
        loop = [start]
        while end != start:
            loop.append(end)
            end = outgoing.pop(end)
        loops.append(loop)

    def area(loop):
        xs = np.array([p[0] for p in loop], dtype=float)
        ys = np.array([p[1] for p in loop], dtype=float)
        return 0.5 * float(np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys))

    return max(loops, key=area)


def whitney_disc_chain(domain: Polyline, n: int, z0: complex) -> DiscChain:
    """Discs of radius 2^-n / 2 at the lattice vertices of the boundary of the Whitney component of z0."""
    if not domain.closed:
        raise PreconditionError("the Whitney construction needs a closed polygon")
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    vertices = domain.finite_array()
    if vertices.real.min() < 0 or vertices.imag.min() < 0 or vertices.real.max() > 1 or vertices.imag.max() > 1:
        raise PreconditionError("the polygon must lie in the unit square; rescale it first")
    shape = Polygon([(z.real, z.imag) for z in vertices])
    if not shape.is_valid:
        raise PreconditionError("polygon is not simple")
    z0 = complex(z0)
    if not shape.contains(Point(z0.real, z0.imag)):
        raise PreconditionError(f"{z0} is not inside the polygon")
    mask = _whitney_mask(prep(shape), n)
    if not mask.any():
        raise InfeasibleChainError(f"no dyadic square of level <= {n} has its double inside the polygon")
    h = 2.0 ** -n
    cell = (min(int(z0.real / h), mask.shape[0] - 1), min(int(z0.imag / h), mask.shape[1] - 1))
    labels, count = ndimage.label(mask)
    if not labels[cell]:
        raise InfeasibleChainError(f"{z0} is not covered at level {n}; increase n")
    loop = _outer_lattice_loop(_drop_pinches(labels == labels[cell], cell))
    logger.debug(f"Whitney level {n}: {count} components, boundary of {len(loop)} lattice points")
    return DiscChain(tuple(Disc(complex(i * h, j * h), h / 2) for i, j in loop), closed=True)


# --------------------------- Diamond-chains --------------------------- #

def diamond_contains(d: Diamond, z: ExtendedComplex) -> bool:
    if z is INF:
        return False
    z = complex(z)
    limit = d.half_angle * (1 - ANGLE_SLACK)
    if d.is_sector:
        rel = (z - d.a) / d.direction
        return rel != 0 and abs(np.angle(rel)) < limit
    za, zb = z - d.a, z - d.b
    if za == 0 or zb == 0:
        return False
    return abs(np.angle(za / (d.b - d.a))) < limit and abs(np.angle(zb / (d.a - d.b))) < limit


def diamond_chain(points: Sequence, eps: float) -> List[Diamond]:
    """D(z_j, z_{j+1}) for consecutive points; a leading infinity gives the sector at z_1."""
    pts = [as_extended(p) for p in points]
    if len(pts) < 2:
        raise PreconditionError("a diamond-chain needs at least 2 points")
    diamonds = []
    if pts[0] is INF:
        if len(pts) < 3:
            raise PreconditionError("an unbounded diamond-chain needs 2 finite points")
        diamonds.append(Diamond(pts[1], INF, eps, direction=pts[1] - pts[2]))
        pts_finite = pts[1:]
    else:
        pts_finite = pts
    if any(p is INF for p in pts_finite):
        raise PreconditionError("only the first point may be infinity")
    diamonds.extend(Diamond(a, b, eps) for a, b in zip(pts_finite[:-1], pts_finite[1:]))
    return diamonds


def pacman_condition(points: Sequence, eps: float, c1: float = DEFAULT_C1) -> ChainReport:
    """Check that the pacman at every z_k misses the diamonds D(z_j, z_{j+1}), j <= k - 2.

    The pacman at z_k has radius c1 |z_{k+1} - z_k| / eps^2 and its mouth of
    half-opening eps points back along z_k - z_{k+1}.
    """
    report = ChainReport(check="pacman")
    pts = [as_extended(p) for p in points]
    if len(pts) < 3:
        return report
    diamonds = diamond_chain(pts, eps)
    finite = np.array([p for p in pts if p is not INF], dtype=complex)
    steps = np.abs(np.diff(finite))
    reach = data_scale(finite) + 2 * c1 * float(steps.max()) / eps ** 2 + 1.0
    cache = {}
    for k in range(1, len(pts) - 1):
        zk, znext = complex(pts[k]), complex(pts[k + 1])
        step = znext - zk
        radius = c1 * abs(step) / eps ** 2
        pacman = None
        for j in range(k - 1):
            d = diamonds[j]
            if not d.is_sector:
                half = abs(d.b - d.a) / 2
                bound = half * max(1.0, math.tan(eps))
                if abs(d.a + (d.b - d.a) / 2 - zk) - bound >= radius:
                    continue
            if pacman is None:
                pacman = Pacman(zk, radius, eps, rotation=-step / abs(step)).to_polygon()
            if j not in cache:
                cache[j] = d.to_polygon(reach=reach if d.is_sector else None)
            overlap = pacman.intersection(cache[j]).area
            if overlap > 1e-12 * radius * radius:
                report.add("pacman", (k, j), overlap, location=zk)
    logger.debug(f"pacman condition at eps={eps}, C1={c1}: {len(report.violations)} violations")
    return report


# --------------------------- Point statistics --------------------------- #

def turning_angle_check(points: Sequence, eps: float) -> ChainReport:
    """Every turning angle below eps / 10."""
    pts = [as_extended(p) for p in points]
    if pts and pts[0] is INF:
        pts = pts[1:]
    z = _finite_points(pts, 3, "turning_angle_check")
    steps = np.diff(z)
    if np.any(steps == 0):
        raise DegenerateInputError("consecutive points coincide")
    angles = np.abs(np.angle(steps[1:] / steps[:-1]))
    report = ChainReport(check="turning")
    for k in np.nonzero(angles >= eps / 10)[0]:
        report.add("turning", (k + 1,), angles[k], location=z[k + 1])
    return report


def spacing_constant(points: Sequence) -> float:
    z = _finite_points(points, 3, "spacing_constant")
    steps = np.abs(np.diff(z))
    if np.any(steps == 0):
        raise DegenerateInputError("consecutive points coincide")
    ratios = steps[:-1] / steps[1:]
    return float(max(ratios.max(), (1 / ratios).max()))


def mesh_size(points: Sequence, closed: bool = False) -> float:
    z = _finite_points(points, 2, "mesh_size")
    if closed:
        z = np.append(z, z[0])
    return float(np.abs(np.diff(z)).max())


def _worst_three_point_ratio(pts: np.ndarray, inner: np.ndarray) -> float:
    """Largest (|w1 - w| + |w - w2|) / |w1 - w2|; inner[i, j] picks the arc i..j over its complement."""
    n = len(pts)
    distances = np.abs(pts[:, None] - pts[None, :])
    index = np.arange(n)
    worst = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(n - 1):
            js = index[i + 1:]
            # ratio[j, w] for the pairs (i, j)
            ratio = (distances[i][None, :] + distances[js]) / distances[i, js][:, None]
            between = (index[None, :] > i) & (index[None, :] < js[:, None])
            on_arc = np.where(inner[i, js][:, None], between, ~between & (index[None, :] != i)
                              & (index[None, :] != js[:, None]))
            values = np.where(on_arc, ratio, 1.0)
            if values.size:
                worst = max(worst, float(np.nanmax(values)))
    return worst


def quasicircle_constant(curve: Polyline, max_triples: int = 2_000_000, poles: int = QUASICIRCLE_POLES) -> float:
    """Smallest three-point constant K found over a few placements of the vertices.

    One placement is the curve itself, with w on the subarc of smaller arc length.
    The others are the images under 1/(z - v) for up to ``poles`` evenly spread
    vertices v; there the curve runs through infinity and w stays on the finite
    subarc. Circles become lines in those placements, so they give K = 1.
    Above max_triples the vertices are thinned evenly before the search.
    """
    if not curve.closed:
        raise PreconditionError("quasicircle_constant needs a closed curve")
    pts = curve.finite_array()
    n = len(pts)
    arclength = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(np.append(pts, pts[0]))))])
    total = arclength[-1]
    arclength = arclength[:-1]
    if n ** 3 / 8 > max_triples:
        m = max(3, int((8 * max_triples) ** (1 / 3)))
        keep = np.linspace(0, n, m, endpoint=False).astype(int)
        logger.debug(f"quasicircle constant: thinning {n} vertices to {m}")
        pts, arclength, n = pts[keep], arclength[keep], m
    best = _worst_three_point_ratio(pts, (arclength[None, :] - arclength[:, None]) <= total / 2)
    finite_arc = np.ones((n - 1, n - 1), dtype=bool)
    for v in np.unique(np.linspace(0, n, min(poles, n), endpoint=False).astype(int)):
        order = (v + 1 + np.arange(n - 1)) % n
        best = min(best, _worst_three_point_ratio(1 / (pts[order] - pts[v]), finite_arc))
    return best


def _slack(scale: float) -> float:
    return 1e-9 * max(scale, 1e-300)


def curve_in_chain(curve: Polyline, chain: Union[DiscChain, Sequence[Diamond]], per_segment: int = 8) -> ChainReport:
    """Every sampled curve point inside the closed union of the chain (up to 1e-9 of its size)."""
    report = ChainReport(check="containment")
    samples = curve.sample(per_segment)
    if isinstance(chain, DiscChain):
        slack = _slack(chain.scale)
        centers, radii = chain.centers, chain.radii
        for begin in range(0, len(samples), 1024):
            block = samples[begin:begin + 1024]
            excess = (np.abs(block[:, None] - centers[None, :]) - radii[None, :]).min(axis=1)
            for offset in np.nonzero(excess > slack)[0]:
                report.add("escape", (begin + offset,), excess[offset], location=block[offset])
        return report
    diamonds = list(chain)
    vertices = [d.a for d in diamonds] + [d.b for d in diamonds if not d.is_sector]
    scale = data_scale(np.concatenate([np.asarray(vertices, dtype=complex), samples]))
    slack = _slack(scale)
    union = unary_union([d.to_polygon(reach=2 * scale + 1) for d in diamonds])
    grown = prep(union.buffer(slack))
    for index, z in enumerate(samples):
        point = Point(z.real, z.imag)
        if not grown.covers(point):
            report.add("escape", (index,), union.distance(point), location=z)
    return report


def _split_arcs(curve_points: np.ndarray, data_points: np.ndarray, closed: bool) -> List[np.ndarray]:
    positions = []
    for z in data_points:
        hits = np.nonzero(curve_points == z)[0]
        if not hits.size:
            raise PreconditionError(f"data point {z} is not a vertex of the curve")
        positions.append(int(hits[0]))
    if closed:
        positions.append(positions[0] + len(curve_points))
        curve_points = np.concatenate([curve_points, curve_points])
    return [curve_points[a:b + 1] for a, b in zip(positions[:-1], positions[1:])]


def tangent_deviation(curve: Polyline, data_points: Sequence, reference_directions: Optional[Sequence] = None) -> float:
    """Largest angle between a discrete tangent of an arc and the arc's reference direction.

    The curve is cut into arcs at the data points (which must be curve
    vertices). Without references the chord z_{k+1} - z_k of each arc is used.
    """
    pts = curve.finite_array()
    data = _finite_points(data_points, 2, "tangent_deviation")
    arcs = _split_arcs(pts, data, curve.closed)
    if reference_directions is None:
        references = [arc[-1] - arc[0] for arc in arcs]
    else:
        references = [complex(r) for r in reference_directions]
        if len(references) != len(arcs):
            raise PreconditionError(f"{len(references)} reference directions for {len(arcs)} arcs")
    worst = 0.0
    for k, (arc, ref) in enumerate(zip(arcs, references)):
        if len(arc) - 1 < MIN_SAMPLES_PER_ARC:
            raise PreconditionError(f"arc {k} has {len(arc) - 1} segments; sample at least {MIN_SAMPLES_PER_ARC} per arc")
        worst = max(worst, float(np.abs(np.angle(np.diff(arc) / ref)).max()))
    return worst


def neighborhood_separation_check(points: Sequence, factor: float = 5.0) -> ChainReport:
    """The closed polygon through the points meets every B(z_k, factor |z_{k+1} - z_k|) in one piece."""
    report = ChainReport(check="separation")
    z = _finite_points(points, 3, "neighborhood_separation_check")
    if factor <= 0:
        return report
    ring = LinearRing([(p.real, p.imag) for p in z])
    n = len(z)
    for k in range(n):
        radius = factor * abs(z[(k + 1) % n] - z[k])
        piece = ring.intersection(Point(z[k].real, z[k].imag).buffer(radius, 64))
        lines = [g for g in getattr(piece, "geoms", [piece]) if g.geom_type in ("LineString", "LinearRing")]
        if len(lines) > 1:
            merged = linemerge(lines)
            count = len(getattr(merged, "geoms", [merged]))
            if count > 1:
                report.add("fold", (k,), count, location=z[k])
    return report

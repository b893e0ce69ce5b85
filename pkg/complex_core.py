"""Extended complex arithmetic, Möbius transforms, branch-managed roots and powers,
and the polyline geometry used by the map builders and the chain validators.

Every function here is pure. The point at infinity is the singleton ``INF``; it
never enters IEEE arithmetic, every operation checks for it explicitly.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from errors import DegenerateInputError, DomainError, InvalidTransformError, PreconditionError

# Collinearity / tangency tolerance, relative to the data diameter
REL_TOL = 1e-12
DET_TOL = 1e-14

TWO_PI = 2 * math.pi

# lower bound (exclusive) of the argument range of each log branch
BRANCH_LOWER_ARG = {
    "right": -math.pi,          # (-pi, pi]
    "upper": -math.pi / 2,      # (-pi/2, 3pi/2], continuous on the closed upper half-plane
    "lower": -3 * math.pi / 2,  # (-3pi/2, pi/2], continuous on the closed lower half-plane
}


class _Infinity:
    """The point at infinity of the Riemann sphere."""
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("zipmap-infinity")

    def __reduce__(self):
        return (_Infinity, ())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


INF = _Infinity()
ExtendedComplex = Union[complex, _Infinity]


def is_inf(z) -> bool:
    return z is INF


def as_extended(value) -> ExtendedComplex:
    """Coerce numbers, ``"inf"`` tokens and ``INF`` into an ExtendedComplex."""
    if value is INF:
        return INF
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ("inf", "infinity", "∞"):
            return INF
        value = complex(token.replace(" ", ""))
    z = complex(value)
    if math.isnan(z.real) or math.isnan(z.imag):
        raise DegenerateInputError("NaN is not a point of the sphere")
    if math.isinf(z.real) or math.isinf(z.imag):
        return INF
    return z


def _clean_zero(z: complex) -> complex:
    # a signed zero imaginary part would flip the principal branch on the negative axis
    if z.imag == 0:
        return complex(z.real, 0.0)
    return z


def _finite_or_inf(z: complex) -> ExtendedComplex:
    if math.isinf(z.real) or math.isinf(z.imag) or math.isnan(z.real) or math.isnan(z.imag):
        return INF
    return z


# --------------------------- Möbius transforms --------------------------- #

@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d)."""
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        # conditioning of ad - bc, unchanged by rescaling the coefficients or the plane
        size = abs(self.a * self.d) + abs(self.b * self.c)
        if size == 0 or abs(self.determinant) <= DET_TOL * size:
            raise InvalidTransformError(f"degenerate Möbius transform {self}")

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1, 0, 0, 1)

    @classmethod
    def pole_at(cls, b: ExtendedComplex) -> "Mobius":
        """z / (1 - z/b), the normalized step that sends b to infinity."""
        if b is INF:
            return cls.identity()
        return cls(1, 0, -1 / complex(b), 1)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __call__(self, z: ExtendedComplex) -> ExtendedComplex:
        return mobius_apply(self, z)

    def inverse(self) -> "Mobius":
        return mobius_inverse(self)

    def compose(self, other: "Mobius") -> "Mobius":
        """self ∘ other."""
        return Mobius(self.a * other.a + self.b * other.c,
                      self.a * other.b + self.b * other.d,
                      self.c * other.a + self.d * other.c,
                      self.c * other.b + self.d * other.d)

    def apply_array(self, zs: np.ndarray) -> np.ndarray:
        """Finite inputs only; a point sent to the pole comes back as an IEEE inf."""
        zs = np.asarray(zs, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * zs + self.b) / (self.c * zs + self.d)


def mobius_apply(m: Mobius, z: ExtendedComplex) -> ExtendedComplex:
    if z is INF:
        if m.c == 0:
            return INF
        return m.a / m.c
    z = complex(z)
    den = m.c * z + m.d
    if den == 0:
        return INF
    return _finite_or_inf((m.a * z + m.b) / den)


def mobius_inverse(m: Mobius) -> Mobius:
    return Mobius(m.d, -m.b, -m.c, m.a)


# --------------------------- Roots and powers --------------------------- #

def sqrt_right(z: complex) -> complex:
    """Square root with argument in (-pi/2, pi/2]."""
    return cmath.sqrt(_clean_zero(complex(z)))


def sqrt_right_array(zs) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    zs = np.where(zs.imag == 0, zs.real + 0j, zs)
    return np.sqrt(zs)


def arg_branch(z: complex, branch: str = "upper") -> float:
    low = BRANCH_LOWER_ARG[branch]
    theta = cmath.phase(_clean_zero(complex(z)))
    if theta <= low:
        theta += TWO_PI
    elif theta > low + TWO_PI:
        theta -= TWO_PI
    return theta


def log_branch(z: complex, branch: str = "upper") -> complex:
    z = complex(z)
    if z == 0:
        raise DomainError("logarithm of 0")
    return complex(math.log(abs(z)), arg_branch(z, branch))


def pow_branch(z: complex, q: float, branch: str = "upper") -> complex:
    """exp(q log z) with the log branch continuous on the selected half-plane.

    Exponents above 2 are accepted (the terminal zipper map needs pi/alpha).
    """
    z = complex(z)
    if z == 0:
        if q <= 0:
            raise DomainError(f"0 raised to the non-positive power {q}")
        return 0j
    return cmath.exp(q * log_branch(z, branch))


def arg_branch_array(zs, branch: str = "upper") -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    zs = np.where(zs.imag == 0, zs.real + 0j, zs)
    low = BRANCH_LOWER_ARG[branch]
    theta = np.angle(zs)
    theta = np.where(theta <= low, theta + TWO_PI, theta)
    theta = np.where(theta > low + TWO_PI, theta - TWO_PI, theta)
    return theta


def log_branch_array(zs, branch: str = "upper") -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(zs)) + 1j * arg_branch_array(zs, branch)


def pow_branch_array(zs, q: float, branch: str = "upper") -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    zero = zs == 0
    safe = np.where(zero, 1.0 + 0j, zs)
    out = np.exp(q * log_branch_array(safe, branch))
    return np.where(zero, 0j, out)


# --------------------------- Circles and lines --------------------------- #

@dataclass(frozen=True)
class CircleOrLine:
    kind: str
    center: complex = 0j
    radius: float = 0.0
    point: complex = 0j
    direction: complex = 1 + 0j

    def __post_init__(self):
        if self.kind == "circle":
            if not self.radius > 0:
                raise DegenerateInputError(f"circle radius must be positive, got {self.radius}")
        elif self.kind == "line":
            if abs(abs(self.direction) - 1) > 1e-12:
                raise DegenerateInputError("line direction must be unimodular")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def circle(cls, center: complex, radius: float) -> "CircleOrLine":
        return cls("circle", center=complex(center), radius=float(radius))

    @classmethod
    def line(cls, point: complex, direction: complex) -> "CircleOrLine":
        direction = complex(direction)
        return cls("line", point=complex(point), direction=direction / abs(direction))

    @property
    def is_line(self) -> bool:
        return self.kind == "line"

    def distance(self, z: complex) -> float:
        z = complex(z)
        if self.is_line:
            return abs(cross(self.direction, z - self.point))
        return abs(abs(z - self.center) - self.radius)

    def tangent_at(self, z: complex) -> complex:
        """Unit tangent at z (counter-clockwise for circles)."""
        if self.is_line:
            return self.direction
        radial = complex(z) - self.center
        return 1j * radial / abs(radial)


def cross(u, v):
    """Im(conj(u) v), the signed area of the parallelogram on u and v."""
    return (np.conj(u) * v).imag


def circle_through(p1: complex, p2: complex, p3: complex) -> CircleOrLine:
    p1, p2, p3 = complex(p1), complex(p2), complex(p3)
    diameter = max(abs(p1 - p2), abs(p2 - p3), abs(p1 - p3))
    if diameter == 0 or min(abs(p1 - p2), abs(p2 - p3), abs(p1 - p3)) <= DET_TOL * diameter:
        raise DegenerateInputError(f"coincident points {p1}, {p2}, {p3}")
    u = p2 - p1
    v = p3 - p1
    area = float(cross(u, v))
    if abs(area) <= REL_TOL * diameter * diameter:
        return CircleOrLine.line(p1, u)
    offset = 1j * (abs(v) ** 2 * u - abs(u) ** 2 * v) / (2 * area)
    return CircleOrLine.circle(p1 + offset, abs(offset))


def real_axis_second_intersection(c: CircleOrLine, tol: float = 1e-9) -> ExtendedComplex:
    """The intersection with R other than 0 of a circle or line through 0."""
    if c.is_line:
        if abs(cross(c.direction, -c.point)) > tol * max(1.0, abs(c.point)):
            raise PreconditionError("line does not pass through 0")
        if abs(c.direction.imag) <= REL_TOL:
            raise DegenerateInputError("the line is the real axis itself")
        return INF
    if abs(abs(c.center) - c.radius) > tol * c.radius:
        raise PreconditionError("circle does not pass through 0")
    x = 2 * c.center.real
    if abs(x) <= REL_TOL * c.radius:
        # tangent to R at 0
        return INF
    return complex(x, 0.0)


# --------------------------- Distances --------------------------- #

def spherical_distance(z: ExtendedComplex, w: ExtendedComplex) -> float:
    """Chordal distance on the Riemann sphere of diameter 2."""
    if z is INF and w is INF:
        return 0.0
    if z is INF:
        return 2 / math.hypot(1, abs(w))
    if w is INF:
        return 2 / math.hypot(1, abs(z))
    z, w = complex(z), complex(w)
    return 2 * abs(z - w) / (math.hypot(1, abs(z)) * math.hypot(1, abs(w)))


def chordal_distance_array(zs, ws) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    ws = np.asarray(ws, dtype=complex)
    return 2 * np.abs(zs - ws) / (np.hypot(1, np.abs(zs)) * np.hypot(1, np.abs(ws)))


def point_segment_distance(z, a, b) -> np.ndarray:
    """Distance from z to the segment [a, b]; broadcasts over numpy arrays."""
    z = np.asarray(z, dtype=complex)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    d = b - a
    length2 = np.abs(d) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(length2 > 0, ((z - a) * np.conj(d)).real / np.where(length2 > 0, length2, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z - (a + t * d))


# --------------------------- Polylines --------------------------- #

@dataclass(frozen=True)
class Polyline:
    points: Tuple[ExtendedComplex, ...]
    closed: bool = False

    def __post_init__(self):
        points = tuple(as_extended(p) for p in self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 2:
            raise DegenerateInputError("a polyline needs at least 2 points")
        pairs = list(zip(points[:-1], points[1:]))
        if self.closed:
            pairs.append((points[-1], points[0]))
        for index, (p, q) in enumerate(pairs):
            if p == q:
                raise DegenerateInputError(f"consecutive points {index} and {index + 1} coincide")

    def __len__(self):
        return len(self.points)

    def finite_array(self) -> np.ndarray:
        if any(p is INF for p in self.points):
            raise PreconditionError("polyline contains the point at infinity")
        return np.array(self.points, dtype=complex)

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        pts = self.finite_array()
        if self.closed:
            return pts, np.roll(pts, -1)
        return pts[:-1], pts[1:]

    def sample(self, per_segment: int) -> np.ndarray:
        """Vertices plus per_segment - 1 equally spaced interior points on every segment."""
        starts, ends = self.segments()
        t = np.arange(per_segment) / per_segment
        pts = (starts[:, None] + t[None, :] * (ends - starts)[:, None]).ravel()
        if not self.closed:
            pts = np.append(pts, ends[-1])
        return pts


def _directed_to_segments(samples: np.ndarray, starts: np.ndarray, ends: np.ndarray, chunk: int = 2048) -> float:
    worst = 0.0
    for begin in range(0, len(samples), chunk):
        block = samples[begin:begin + chunk]
        distances = point_segment_distance(block[:, None], starts[None, :], ends[None, :])
        worst = max(worst, float(distances.min(axis=1).max()))
    return worst


def _directed_chordal(samples: np.ndarray, targets: np.ndarray, chunk: int = 1024) -> float:
    worst = 0.0
    for begin in range(0, len(samples), chunk):
        block = samples[begin:begin + chunk]
        distances = chordal_distance_array(block[:, None], targets[None, :])
        worst = max(worst, float(distances.min(axis=1).max()))
    return worst


def hausdorff_distance(A: Polyline, B: Polyline, metric: str = "euclidean", per_segment: int = 16) -> float:
    """Symmetric Hausdorff distance of two polylines as point sets.

    Euclidean: points sampled along A are projected onto the segments of B.
    Spherical: both polylines are sampled and compared with the chordal metric.
    """
    if metric == "euclidean":
        a_starts, a_ends = A.segments()
        b_starts, b_ends = B.segments()
        return max(_directed_to_segments(A.sample(per_segment), b_starts, b_ends),
                   _directed_to_segments(B.sample(per_segment), a_starts, a_ends))
    if metric == "spherical":
        a_samples = A.sample(per_segment)
        b_samples = B.sample(per_segment)
        return max(_directed_chordal(a_samples, b_samples), _directed_chordal(b_samples, a_samples))
    raise ValueError(f"unknown metric {metric!r}")


def data_scale(points) -> float:
    """Bounding-box diagonal, a cheap stand-in for the diameter."""
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        return 0.0
    return float(math.hypot(np.ptp(pts.real), np.ptp(pts.imag)))


def _argument_sum(points: np.ndarray, z: complex) -> float:
    rel = points - z
    return float(np.angle(np.roll(rel, -1) / rel).sum())


def winding_sign(points: Sequence[complex], interior: complex) -> int:
    """+1 for counter-clockwise winding about the interior point, -1 for clockwise."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 3:
        raise DegenerateInputError("a closed polygon needs at least 3 points")
    interior = complex(interior)
    gap = point_segment_distance(interior, pts, np.roll(pts, -1)).min()
    if gap <= REL_TOL * max(data_scale(pts), 1e-300):
        raise DegenerateInputError(f"interior point {interior} lies on the polygon")
    total = _argument_sum(pts, interior)
    if abs(total) < math.pi:
        raise DegenerateInputError(f"polygon does not wind around {interior}")
    return 1 if total > 0 else -1


def encode_point(z: ExtendedComplex):
    """JSON form of a point: ``[re, im]`` or ``"inf"`` (floats keep their repr, so they round-trip)."""
    if z is INF:
        return "inf"
    z = complex(z)
    return [z.real, z.imag]


def decode_point(value) -> ExtendedComplex:
    if isinstance(value, str):
        return as_extended(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return as_extended(complex(float(value[0]), float(value[1])))
    return as_extended(value)

"""Closed-form building blocks: the geodesic slit map, the straight slit map,
the circular slit composition and the initial / terminal maps.

Each map has a scalar form taking an ExtendedComplex and an ``*_array`` form on
numpy arrays of finite points. The step objects (``MapStep`` subclasses) wrap
them for the pipelines.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from complex_core import (INF, ExtendedComplex, Mobius, _finite_or_inf, as_extended, circle_through,
                          decode_point, encode_point, log_branch_array, mobius_apply, pow_branch_array,
                          real_axis_second_intersection, sqrt_right_array)
from errors import DegenerateInputError, PreconditionError, TangentArcError

# |b| below this fraction of |a| means the arc is tangent to the real axis at 0
TANGENT_TOL = 1e-10


def _one(z: complex) -> np.ndarray:
    return np.array([complex(z)], dtype=complex)


def _clean_array(zs) -> np.ndarray:
    zs = np.asarray(zs, dtype=complex)
    return np.where(zs.imag == 0, zs.real + 0j, zs)


# --------------------------- Parameters --------------------------- #

@dataclass(frozen=True)
class GeodesicParams:
    """Tip a of the arc orthogonal to the real axis, b its second foot, c = |a|^2 / Im a."""
    a: complex
    b: ExtendedComplex
    c: float

    @classmethod
    def from_tip(cls, a: complex) -> "GeodesicParams":
        a = complex(a)
        if not a.imag > 0:
            raise PreconditionError(f"geodesic tip must lie in the upper half-plane, got {a}")
        mod2 = a.real * a.real + a.imag * a.imag
        b = INF if a.real == 0 else mod2 / a.real
        return cls(a, b, mod2 / a.imag)

    @property
    def mobius(self) -> Mobius:
        return Mobius.pole_at(self.b)


@dataclass(frozen=True)
class SlitParams:
    """Straight slit from 0 to a: g(z) = C (z - p)^p (z + 1 - p)^(1 - p)."""
    a: complex
    p: float
    C: float
    slit_length: float

    @classmethod
    def from_tip(cls, a: complex) -> "SlitParams":
        a = complex(a)
        if not a.imag > 0:
            raise PreconditionError(f"slit tip must lie in the upper half-plane, got {a}")
        p = cmath.phase(a) / math.pi
        log_length = _log_length(p)
        C = math.exp(math.log(abs(a)) - log_length)
        return cls(a, p, C, math.exp(log_length))

    @classmethod
    def from_angle(cls, p: float, length: Optional[float] = None) -> "SlitParams":
        """Unnormalized parameters (C = 1) unless a slit length is given."""
        if not 0 < p < 1:
            raise PreconditionError(f"slit angle parameter must be in (0, 1), got {p}")
        log_length = _log_length(p)
        modulus = math.exp(log_length) if length is None else float(length)
        a = cmath.rect(modulus, math.pi * p)
        return cls(a, float(p), math.exp(math.log(modulus) - log_length), math.exp(log_length))

    @property
    def w_tip(self) -> complex:
        return self.a

    @property
    def log_C(self) -> float:
        return math.log(self.C)

    @property
    def unnormalized_tip(self) -> complex:
        return cmath.rect(self.slit_length, math.pi * self.p)


def _log_length(p: float) -> float:
    return p * math.log(p) + (1 - p) * math.log(1 - p)


@dataclass(frozen=True)
class CircularSlitParams:
    """Arc from 0 through c to the tip a; ell = z/(1 - z/b) straightens it to the slit [0, d]."""
    a: complex
    c: complex
    b: ExtendedComplex
    d: complex
    inner: SlitParams

    @classmethod
    def from_points(cls, a: complex, c: complex) -> "CircularSlitParams":
        a, c = complex(a), complex(c)
        if not (a.imag > 0 and c.imag > 0):
            raise PreconditionError(f"circular slit points must lie in the upper half-plane: a={a}, c={c}")
        if a == c:
            raise DegenerateInputError(f"circular slit through coincident points {a}")
        circle = circle_through(0j, c, a)
        b = real_axis_second_intersection(circle)
        if not circle.is_line and (b is INF or abs(b) <= TANGENT_TOL * abs(a)):
            raise TangentArcError(f"the arc through 0, {c}, {a} is tangent to the real axis at 0")
        ell = Mobius.pole_at(b)
        d = ell(a)
        if d is INF or not d.imag > 0:
            raise TangentArcError(f"the arc through 0, {c}, {a} does not straighten into the upper half-plane")
        return cls(a, c, b, d, SlitParams.from_tip(d))

    @property
    def mobius(self) -> Mobius:
        return Mobius.pole_at(self.b)


# --------------------------- Geodesic slit map --------------------------- #

def _geodesic_root_array(ms: np.ndarray, c: float) -> np.ndarray:
    """sqrt(m^2 + c^2) continued across the real axis by reflection."""
    ms = _clean_array(ms)
    big = np.abs(ms) >= c
    safe = np.where(big & (ms != 0), ms, 1.0 + 0j)
    with np.errstate(invalid="ignore", over="ignore"):
        outer = ms * sqrt_right_array(1 + (c / safe) ** 2)
        inner = sqrt_right_array(ms * ms + c * c)
    # points of the slit itself keep the side given by the sign of the zero
    inner = np.where(np.signbit(ms.real), -inner, inner)
    return np.where(big, outer, inner)


def geodesic_forward_array(gp: GeodesicParams, zs) -> np.ndarray:
    ms = gp.mobius.apply_array(zs)
    return _geodesic_root_array(ms, gp.c)


def geodesic_forward(gp: GeodesicParams, z: ExtendedComplex) -> ExtendedComplex:
    m = mobius_apply(gp.mobius, z)
    if m is INF:
        return INF
    return _finite_or_inf(complex(_geodesic_root_array(_one(m), gp.c)[0]))


def _geodesic_u_array(ws: np.ndarray, c: float) -> np.ndarray:
    ws = _clean_array(ws)
    small = np.abs(ws) < c
    safe = np.where(~small & (ws != 0), ws, 1.0 + 0j)
    with np.errstate(invalid="ignore", over="ignore"):
        outer = ws * sqrt_right_array(1 - (c / safe) ** 2)
        inner = 1j * sqrt_right_array(c * c - ws * ws)
    inner = np.where(ws.imag < 0, -inner, inner)
    return np.where(small, inner, outer)


def geodesic_inverse_array(gp: GeodesicParams, ws, branch: str = "standard") -> np.ndarray:
    us = _geodesic_u_array(ws, gp.c)
    if branch == "reflected":
        us = -us
    elif branch != "standard":
        raise PreconditionError(f"unknown geodesic branch {branch!r}")
    return gp.mobius.inverse().apply_array(us)


def geodesic_inverse(gp: GeodesicParams, w: ExtendedComplex, branch: str = "standard") -> ExtendedComplex:
    if w is INF:
        u = INF
    else:
        u = complex(_geodesic_u_array(_one(w), gp.c)[0])
        if branch == "reflected":
            u = -u
        elif branch != "standard":
            raise PreconditionError(f"unknown geodesic branch {branch!r}")
    return mobius_apply(gp.mobius.inverse(), u)


# --------------------------- Straight slit map --------------------------- #

def slit_log_unnormalized(zs, p: float) -> np.ndarray:
    """log f(z) for f(z) = (z - p)^p (z + 1 - p)^(1 - p), upper branch; -inf real part at p and p - 1."""
    zs = _clean_array(zs)
    u = zs - p
    v = zs + (1 - p)
    zero = (u == 0) | (v == 0)
    logs = p * log_branch_array(np.where(zero, 1.0, u)) + (1 - p) * log_branch_array(np.where(zero, 1.0, v))
    return np.where(zero, complex(-np.inf, 0.0), logs)


def slit_unnormalized_array(zs, p: float) -> np.ndarray:
    zs = _clean_array(zs)
    lower = zs.imag < 0
    upper = np.where(lower, np.conj(zs), zs)
    with np.errstate(under="ignore"):
        out = np.exp(slit_log_unnormalized(upper, p))
    return np.where(lower, np.conj(out), out)


def slit_forward_array(sp: SlitParams, zs) -> np.ndarray:
    """Normalized slit map; the lower half-plane is served by reflection."""
    zs = _clean_array(zs)
    lower = zs.imag < 0
    upper = np.where(lower, np.conj(zs), zs)
    with np.errstate(under="ignore", over="ignore"):
        out = np.exp(sp.log_C + slit_log_unnormalized(upper, sp.p))
    return np.where(lower, np.conj(out), out)


def slit_forward(sp: SlitParams, z: ExtendedComplex) -> ExtendedComplex:
    if z is INF:
        return INF
    return _finite_or_inf(complex(slit_forward_array(sp, _one(z))[0]))


def slit_derivative_ratio(zs, p: float) -> np.ndarray:
    """f'(z) / f(z) = z / ((z - p)(z + 1 - p))."""
    zs = np.asarray(zs, dtype=complex)
    return zs / ((zs - p) * (zs + (1 - p)))


# --------------------------- Circular slit map --------------------------- #

def circular_slit_forward_array(cp: CircularSlitParams, zs, config=None) -> np.ndarray:
    from newton_inverse import slit_inverse_array

    return slit_inverse_array(cp.mobius.apply_array(zs), cp.inner, config)


def circular_slit_forward(cp: CircularSlitParams, z: ExtendedComplex, config=None) -> ExtendedComplex:
    from newton_inverse import slit_inverse

    return slit_inverse(mobius_apply(cp.mobius, z), cp.inner, config)


def circular_slit_inverse_array(cp: CircularSlitParams, ws) -> np.ndarray:
    return cp.mobius.inverse().apply_array(slit_forward_array(cp.inner, ws))


def circular_slit_inverse(cp: CircularSlitParams, w: ExtendedComplex) -> ExtendedComplex:
    return mobius_apply(cp.mobius.inverse(), slit_forward(cp.inner, w))


# --------------------------- Map steps --------------------------- #

STEP_KINDS: Dict[str, type] = {}


def register_step(cls):
    STEP_KINDS[cls.kind] = cls
    return cls


class MapStep:
    """One conformal map of a pipeline.

    ``forward`` carries the current domain onto the upper half-plane, ``inverse``
    goes back. Subclasses implement the array forms and the images of infinity.
    """
    kind = "abstract"

    def forward_array(self, zs, mode: str = "interior") -> np.ndarray:
        raise NotImplementedError

    def inverse_array(self, ws) -> np.ndarray:
        raise NotImplementedError

    def forward_infinity(self, mode: str = "interior") -> ExtendedComplex:
        raise NotImplementedError

    def inverse_infinity(self) -> ExtendedComplex:
        raise NotImplementedError

    def forward(self, z: ExtendedComplex, mode: str = "interior") -> ExtendedComplex:
        if z is INF:
            return self.forward_infinity(mode)
        return _finite_or_inf(complex(self.forward_array(_one(z), mode)[0]))

    def inverse(self, w: ExtendedComplex) -> ExtendedComplex:
        if w is INF:
            return self.inverse_infinity()
        return _finite_or_inf(complex(self.inverse_array(_one(w))[0]))

    def forward_candidates(self, z: complex) -> List[ExtendedComplex]:
        """Every value of the multivalued continuation at z."""
        return [self.forward(z)]

    def continue_from(self, z: ExtendedComplex, previous: ExtendedComplex) -> ExtendedComplex:
        """Branch of the forward map at z closest to the value at a nearby point."""
        if z is INF or previous is INF:
            return self.forward(z)
        candidates = [c for c in self.forward_candidates(z) if c is not INF]
        if not candidates:
            return INF
        return min(candidates, key=lambda c: abs(c - previous))

    def near_cut(self, z: ExtendedComplex, tol: float = 1e-8) -> bool:
        return False

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}

    @classmethod
    def from_params(cls, data: dict) -> "MapStep":
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


def step_from_dict(data: dict) -> MapStep:
    kind = data.get("kind")
    if kind not in STEP_KINDS:
        raise PreconditionError(f"unknown map step kind {kind!r}")
    return STEP_KINDS[kind].from_params(data)


def _signed_sqrt_candidates(value: ExtendedComplex) -> List[ExtendedComplex]:
    if value is INF:
        return [INF]
    return [value, -value]


def _near_nonnegative_axis(ts: complex, tol: float) -> bool:
    # the cut of i*sqrt(-t) is t in [0, inf)
    return ts.real >= -tol * max(1.0, abs(ts)) and abs(ts.imag) <= tol * max(1.0, abs(ts))


@register_step
class InitialGeodesic(MapStep):
    """i sqrt((z - z1)/(z - z0)): the complement of the segment [z0, z1] onto the upper half-plane."""
    kind = "InitialGeodesic"

    def __init__(self, z0: complex, z1: complex):
        z0, z1 = as_extended(z0), as_extended(z1)
        if z0 is INF or z1 is INF:
            raise PreconditionError("initial geodesic step needs two finite points")
        if z0 == z1:
            raise DegenerateInputError(f"coincident points {z0}")
        self.z0, self.z1 = complex(z0), complex(z1)

    def _ratio(self, zs):
        zs = np.asarray(zs, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (zs - self.z1) / (zs - self.z0)

    def forward_array(self, zs, mode="interior"):
        with np.errstate(invalid="ignore"):
            return 1j * sqrt_right_array(self._ratio(zs))

    def forward_infinity(self, mode="interior"):
        return 1j

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        r = ws * ws
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.z1 + r * self.z0) / (1 + r)

    def inverse_infinity(self):
        return self.z0

    def forward_candidates(self, z):
        return _signed_sqrt_candidates(self.forward(z))

    def near_cut(self, z, tol=1e-8):
        if z is INF:
            return False
        return _near_nonnegative_axis(-complex(self._ratio(_one(z))[0]), tol)

    def params(self):
        return {"z0": encode_point(self.z0), "z1": encode_point(self.z1)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["z0"]), decode_point(data["z1"]))


@register_step
class InitialUnbounded(MapStep):
    """lam sqrt(z - z1), computed as i sqrt(-(z - z1)/e) with e the unit vector from z2 to z1."""
    kind = "InitialUnbounded"

    def __init__(self, z1: complex, z2: complex):
        z1, z2 = as_extended(z1), as_extended(z2)
        if z1 is INF or z2 is INF:
            raise PreconditionError("initial unbounded step needs two finite points")
        if z1 == z2:
            raise DegenerateInputError(f"coincident points {z1}")
        self.z1, self.z2 = complex(z1), complex(z2)
        self.direction = (self.z1 - self.z2) / abs(self.z1 - self.z2)

    @property
    def lam(self) -> complex:
        return 1j / cmath.sqrt(-self.direction)

    def forward_array(self, zs, mode="interior"):
        zs = np.asarray(zs, dtype=complex)
        return 1j * sqrt_right_array(-(zs - self.z1) / self.direction)

    def forward_infinity(self, mode="interior"):
        return INF

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        return self.z1 + self.direction * ws * ws

    def inverse_infinity(self):
        return INF

    def forward_candidates(self, z):
        return _signed_sqrt_candidates(self.forward(z))

    def near_cut(self, z, tol=1e-8):
        if z is INF:
            return False
        return _near_nonnegative_axis((complex(z) - self.z1) / self.direction, tol)

    def params(self):
        return {"z1": encode_point(self.z1), "z2": encode_point(self.z2)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["z1"]), decode_point(data["z2"]))


@register_step
class InitialZipper(MapStep):
    """Complement of the circular arc z0 -> z1 -> z2 onto the upper half-plane; z1 goes to -1."""
    kind = "InitialZipper"

    def __init__(self, z0: complex, z1: complex, z2: complex):
        pts = [as_extended(z) for z in (z0, z1, z2)]
        if any(z is INF for z in pts):
            raise PreconditionError("initial zipper step needs three finite points")
        z0, z1, z2 = (complex(z) for z in pts)
        if z0 == z1 or z1 == z2 or z0 == z2:
            raise DegenerateInputError(f"coincident points among {z0}, {z1}, {z2}")
        self.z0, self.z1, self.z2 = z0, z1, z2
        # T(z) = (z - z2)(z1 - z0) / ((z - z0)(z1 - z2)); T(z2) = 0, T(z0) = inf, T(z1) = 1
        self.mobius = Mobius(z1 - z0, -z2 * (z1 - z0), z1 - z2, -z0 * (z1 - z2))

    def forward_array(self, zs, mode="interior"):
        with np.errstate(invalid="ignore"):
            return 1j * sqrt_right_array(-self.mobius.apply_array(zs))

    def forward_infinity(self, mode="interior"):
        return 1j * cmath.sqrt(-complex(self.mobius(INF)))

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        return self.mobius.inverse().apply_array(ws * ws)

    def inverse_infinity(self):
        return self.z0

    def forward_candidates(self, z):
        return _signed_sqrt_candidates(self.forward(z))

    def near_cut(self, z, tol=1e-8):
        t = self.mobius(as_extended(z))
        if t is INF:
            return False
        return _near_nonnegative_axis(t, tol)

    def params(self):
        return {"z0": encode_point(self.z0), "z1": encode_point(self.z1), "z2": encode_point(self.z2)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["z0"]), decode_point(data["z1"]), decode_point(data["z2"]))


class _TerminalBase(MapStep):
    """Opens the sector between the real axis and the closing arc at 0.

    After m(z) = z/(1 - z/zeta) the closing arc is the ray of angle theta; S1 is the
    sector 0 < arg < theta (adjacent to the positive axis), S2 the sector theta < arg < pi.
    ``sector`` +1 makes S1 the interior, -1 makes S2 the interior. The exterior sector
    goes onto the lower half-plane.
    """

    def _setup(self, zeta: ExtendedComplex, theta: float, sector: int):
        if sector not in (1, -1):
            raise PreconditionError(f"terminal sign must be +1 or -1, got {sector}")
        if zeta is not INF and complex(zeta) == 0:
            raise DegenerateInputError("terminal step needs zeta != 0")
        if not 0 < theta < math.pi:
            raise TangentArcError(f"closing arc meets the real axis at angle {theta}")
        self.zeta = INF if zeta is INF else complex(complex(zeta).real, 0.0)
        self.theta = theta
        self.sector = sector
        self.mobius = Mobius.pole_at(self.zeta)

    @property
    def alpha(self) -> float:
        """Opening angle of the interior sector."""
        return self.theta if self.sector == 1 else math.pi - self.theta

    def _open_s1(self, us):
        return pow_branch_array(us, math.pi / self.theta)

    def _open_s2(self, us):
        return pow_branch_array(us * cmath.exp(-1j * self.theta), math.pi / (math.pi - self.theta))

    def _open(self, us, mode):
        interior_s1 = self.sector == 1
        if mode == "exterior":
            interior_s1 = not interior_s1
            sign = -1.0
        else:
            sign = 1.0
        return sign * (self._open_s1(us) if interior_s1 else self._open_s2(us))

    def forward_array(self, zs, mode="interior"):
        return self._open(self.mobius.apply_array(zs), mode)

    def forward_infinity(self, mode="interior"):
        u = self.mobius(INF)
        if u is INF:
            return INF
        return complex(self._open(_one(u), mode)[0])

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        if self.sector == 1:
            us = pow_branch_array(ws, self.theta / math.pi)
        else:
            us = cmath.exp(1j * self.theta) * pow_branch_array(ws, (math.pi - self.theta) / math.pi)
        return self.mobius.inverse().apply_array(us)

    def inverse_infinity(self):
        return self.zeta if self.zeta is not INF else INF

    def forward_candidates(self, z):
        return [self.forward(z, "interior"), self.forward(z, "exterior")]


@register_step
class TerminalGeodesic(_TerminalBase):
    """sign * (z/(1 - z/zeta))^2."""
    kind = "TerminalGeodesic"

    def __init__(self, zeta: ExtendedComplex, sign: int):
        self._setup(as_extended(zeta), math.pi / 2, int(sign))

    @property
    def sign(self) -> int:
        return self.sector

    def forward_array(self, zs, mode="interior"):
        us = self.mobius.apply_array(zs)
        # both sectors open with the same polynomial, so the mode does not matter
        return self.sector * us * us

    def forward_infinity(self, mode="interior"):
        u = self.mobius(INF)
        if u is INF:
            return INF
        return self.sector * u * u

    def forward_candidates(self, z):
        return [self.forward(z)]

    def params(self):
        return {"zeta": encode_point(self.zeta), "sign": self.sector}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["zeta"]), data["sign"])


@register_step
class TerminalZipper(_TerminalBase):
    """(z/(1 - z/zeta))^(pi/alpha) onto the upper half-plane, alpha the interior angle at 0."""
    kind = "TerminalZipper"

    def __init__(self, zeta: ExtendedComplex, zeta_prev: complex, sign: int):
        zeta = as_extended(zeta)
        zeta_prev = complex(zeta_prev)
        if zeta is not INF and complex(zeta) == 0:
            raise DegenerateInputError("terminal step needs zeta != 0")
        u = Mobius.pole_at(zeta)(zeta_prev)
        if u is INF or u == 0:
            raise DegenerateInputError(f"closing arc through {zeta_prev} is degenerate")
        self.zeta_prev = zeta_prev
        self._setup(zeta, cmath.phase(u), int(sign))

    def params(self):
        return {"zeta": encode_point(self.zeta), "zeta_prev": encode_point(self.zeta_prev),
                "sign": self.sector}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["zeta"]), decode_point(data["zeta_prev"]), data["sign"])


def initial_geodesic(z0, z1) -> InitialGeodesic:
    return InitialGeodesic(z0, z1)


def initial_zipper(z0, z1, z2) -> InitialZipper:
    return InitialZipper(z0, z1, z2)


def initial_unbounded(z1, z2) -> InitialUnbounded:
    return InitialUnbounded(z1, z2)


def terminal_geodesic(zeta, sign: int) -> TerminalGeodesic:
    return TerminalGeodesic(zeta, sign)


def terminal_zipper(zeta, zeta_prev, sign: int) -> TerminalZipper:
    return TerminalZipper(zeta, zeta_prev, sign)

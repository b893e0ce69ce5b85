"""The slit-opening steps of the pipelines, the welding steps, and the disc
normalization. Initial and terminal steps live in elementary_maps."""
from typing import Optional, Tuple

import numpy as np

from complex_core import (INF, ExtendedComplex, Mobius, decode_point, encode_point, log_branch_array, mobius_apply,
                          sqrt_right_array)
from config import NewtonConfig
from errors import PreconditionError
from elementary_maps import (STEP_KINDS, CircularSlitParams, GeodesicParams, MapStep, SlitParams,
                             _near_nonnegative_axis, _signed_sqrt_candidates, geodesic_forward,
                             geodesic_forward_array, geodesic_inverse_array, register_step,
                             slit_forward_array, step_from_dict)
from newton_inverse import newton_continue, slit_inverse, slit_inverse_array, slit_seam_preimages

__all__ = ["GeodesicSlit", "StraightSlit", "CircularSlit", "WeldingSlit", "SquareRoot", "MobiusNormalize",
           "STEP_KINDS", "step_from_dict"]

# relative distance at which a welding input counts as lying on the axis or on the pair
SEAM_SNAP = 1e-13


@register_step
class GeodesicSlit(MapStep):
    """Opens the arc from 0 to zeta orthogonal to the real axis."""
    kind = "GeodesicSlit"

    def __init__(self, zeta: complex):
        self.params_ = GeodesicParams.from_tip(zeta)

    @property
    def zeta(self) -> complex:
        return self.params_.a

    def seam_values(self) -> Tuple[float, float]:
        """Images of the two sides of the arc's base point (positive side first)."""
        return self.params_.c, -self.params_.c

    def forward_array(self, zs, mode="interior"):
        return geodesic_forward_array(self.params_, zs)

    def forward_infinity(self, mode="interior"):
        return geodesic_forward(self.params_, INF)

    def inverse_array(self, ws):
        return geodesic_inverse_array(self.params_, ws)

    def inverse_infinity(self):
        return self.params_.b

    def forward_candidates(self, z):
        return _signed_sqrt_candidates(self.forward(z))

    def near_cut(self, z, tol=1e-8):
        m = mobius_apply(self.params_.mobius, z)
        if m is INF:
            return False
        c = self.params_.c
        return abs(m.real) <= tol * c and abs(m.imag) <= c * (1 + tol)

    def params(self):
        return {"zeta": encode_point(self.zeta)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["zeta"]))


class _NewtonStep(MapStep):
    """Steps whose forward map is a slit-map inverse."""
    newton: NewtonConfig
    index: Optional[int] = None

    def _slit_forward(self, ws):
        return slit_inverse_array(ws, self.slit, self.newton, step=self.index)

    def seam_values(self) -> Tuple[float, float]:
        return self.slit.p, self.slit.p - 1


@register_step
class StraightSlit(_NewtonStep):
    """Opens the segment from 0 to zeta (inverse of the slit map)."""
    kind = "StraightSlit"

    def __init__(self, zeta: complex, newton: Optional[NewtonConfig] = None):
        self.slit = SlitParams.from_tip(zeta)
        self.newton = newton or NewtonConfig()

    @property
    def zeta(self) -> complex:
        return self.slit.a

    def forward_array(self, zs, mode="interior"):
        return self._slit_forward(zs)

    def forward_infinity(self, mode="interior"):
        return INF

    def inverse_array(self, ws):
        return slit_forward_array(self.slit, ws)

    def inverse_infinity(self):
        return INF

    def continue_from(self, z, previous):
        if z is INF or previous is INF:
            return self.forward(z)
        return newton_continue(self.slit, z, previous, self.newton)

    def near_cut(self, z, tol=1e-8):
        if z is INF:
            return False
        w = complex(z) / self.slit.a
        return abs(w.imag) <= tol and -tol <= w.real <= 1 + tol

    def params(self):
        return {"zeta": encode_point(self.zeta)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["zeta"]))


@register_step
class CircularSlit(_NewtonStep):
    """Opens the arc 0 -> c -> a: the slit inverse after straightening the arc."""
    kind = "CircularSlit"

    def __init__(self, a: complex, c: complex, newton: Optional[NewtonConfig] = None):
        self.params_ = CircularSlitParams.from_points(a, c)
        self.slit = self.params_.inner
        self.newton = newton or NewtonConfig()

    def seam_preimages(self, point: complex) -> Tuple[float, float]:
        """Both real images of a point of the arc (positive side first)."""
        return slit_seam_preimages(self.slit, self.params_.mobius(complex(point)))

    def forward_array(self, zs, mode="interior"):
        return self._slit_forward(self.params_.mobius.apply_array(zs))

    def forward_infinity(self, mode="interior"):
        return slit_inverse(self.params_.mobius(INF), self.slit, self.newton, step=self.index)

    def inverse_array(self, ws):
        return self.params_.mobius.inverse().apply_array(slit_forward_array(self.slit, ws))

    def inverse_infinity(self):
        return self.params_.b

    def continue_from(self, z, previous):
        if z is INF or previous is INF:
            return self.forward(z)
        w = self.params_.mobius(z)
        if w is INF:
            return INF
        return newton_continue(self.slit, w, previous, self.newton)

    def near_cut(self, z, tol=1e-8):
        w = mobius_apply(self.params_.mobius, z)
        if w is INF:
            return False
        w = w / self.slit.a
        return abs(w.imag) <= tol and -tol <= w.real <= 1 + tol

    def params(self):
        return {"a": encode_point(self.params_.a), "c": encode_point(self.params_.c)}

    @classmethod
    def from_params(cls, data):
        return cls(decode_point(data["a"]), decode_point(data["c"]))


@register_step
class WeldingSlit(MapStep):
    """Inverse of G(z) = ((z - x)/s)^p ((z - y)/s)^(1 - p), s = x - y, p = x/s.

    G collapses x and y to 0 and opens [y, x] onto a straight slit of angle p*pi.
    """
    kind = "WeldingSlit"

    def __init__(self, x: float, y: float, newton: Optional[NewtonConfig] = None):
        x, y = float(x), float(y)
        if not y < 0 < x:
            raise PreconditionError(f"welding pair must straddle 0, got x={x}, y={y}")
        self.x, self.y = x, y
        self.scale = x - y
        self.p = x / self.scale
        self.slit = SlitParams.from_angle(self.p)
        self.newton = newton or NewtonConfig()

    def forward_array(self, zs, mode="interior"):
        zs = np.asarray(zs, dtype=complex)
        out = self.scale * slit_inverse_array(zs, self.slit, self.newton)
        # the base of the slit reopens at the pair itself
        return np.where(zs == 0, self.x + 0j, out)

    def forward_infinity(self, mode="interior"):
        return INF

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        # images of earlier welds come back real only up to rounding
        on_axis = np.abs(ws.imag) <= SEAM_SNAP * np.maximum(self.scale, np.abs(ws.real))
        ws = np.where(on_axis, ws.real + 0j, ws)
        lower = ws.imag < 0
        upper = np.where(lower, np.conj(ws), ws)
        u = (upper - self.x) / self.scale
        v = (upper - self.y) / self.scale
        # the pair lands on 0 exactly, also when it arrives a few ulps off
        zero = (np.abs(u) <= SEAM_SNAP) | (np.abs(v) <= SEAM_SNAP)
        logs = (self.p * log_branch_array(np.where(zero, 1.0, u))
                + (1 - self.p) * log_branch_array(np.where(zero, 1.0, v)))
        out = np.where(zero, 0j, np.exp(logs))
        return np.where(lower, np.conj(out), out)

    def inverse_infinity(self):
        return INF

    def continue_from(self, z, previous):
        if z is INF or previous is INF:
            return self.forward(z)
        return self.scale * newton_continue(self.slit, z, previous / self.scale, self.newton)

    def params(self):
        return {"x": self.x, "y": self.y}

    @classmethod
    def from_params(cls, data):
        return cls(data["x"], data["y"])


@register_step
class SquareRoot(MapStep):
    """i sqrt(-z): the plane slit along [0, inf) onto the upper half-plane; inverse z^2."""
    kind = "SquareRoot"

    def forward_array(self, zs, mode="interior"):
        zs = np.asarray(zs, dtype=complex)
        return 1j * sqrt_right_array(-zs)

    def forward_infinity(self, mode="interior"):
        return INF

    def inverse_array(self, ws):
        ws = np.asarray(ws, dtype=complex)
        return ws * ws

    def inverse_infinity(self):
        return INF

    def forward_candidates(self, z):
        return _signed_sqrt_candidates(self.forward(z))

    def near_cut(self, z, tol=1e-8):
        return z is not INF and _near_nonnegative_axis(complex(z), tol)

    def params(self):
        return {}

    @classmethod
    def from_params(cls, data):
        return cls()


@register_step
class MobiusNormalize(MapStep):
    """Upper half-plane onto the unit disc."""
    kind = "MobiusNormalize"

    def __init__(self, mobius: Mobius):
        self.mobius = mobius

    @classmethod
    def disc_map(cls, w0: complex, x_fix: ExtendedComplex) -> "MobiusNormalize":
        """lam (w - w0)/(w - conj w0) with the rotation sending x_fix to 1."""
        w0 = complex(w0)
        if x_fix is INF:
            lam = 1 + 0j
        else:
            x_fix = complex(x_fix)
            lam = (x_fix - w0.conjugate()) / (x_fix - w0)
        return cls(Mobius(lam, -lam * w0, 1, -w0.conjugate()))

    def forward_array(self, zs, mode="interior"):
        return self.mobius.apply_array(zs)

    def forward_infinity(self, mode="interior"):
        return self.mobius(INF)

    def inverse_array(self, ws):
        return self.mobius.inverse().apply_array(ws)

    def inverse_infinity(self):
        return self.mobius.inverse()(INF)

    def forward(self, z, mode="interior"):
        return self.mobius(z)

    def inverse(self, w):
        return self.mobius.inverse()(w)

    def params(self):
        m = self.mobius
        return {"a": encode_point(m.a), "b": encode_point(m.b), "c": encode_point(m.c), "d": encode_point(m.d)}

    @classmethod
    def from_params(cls, data):
        return cls(Mobius(*(decode_point(data[k]) for k in ("a", "b", "c", "d"))))

"""Inverse of the straight slit map by Newton's method.

The target plane is split into four regions (far field, tip disc and the two
sectors at the slit base); each region iterates on a preliminary map that makes
the equation well conditioned there. Points are processed as numpy arrays with
masks, and a point that fails in its own region is retried in the others.
All iterations run on the unnormalized map f(z) = (z - p)^p (z + 1 - p)^(1 - p).
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from complex_core import INF, ExtendedComplex, log_branch_array, sqrt_right_array
from config import NewtonConfig
from elementary_maps import SlitParams, slit_derivative_ratio, slit_log_unnormalized
from errors import BasePointError, NewtonConvergenceError, PreconditionError

logger = logging.getLogger(__name__)

# results below the real axis by less than this (relative) are put back on it
IMAG_CLAMP = 1e-12
# results further below than this count as a wrong branch
IMAG_REJECT = 1e-8


class RegionLabel(Enum):
    FAR = "FAR"
    TIP = "TIP"
    SECTOR_P = "SECTOR_P"
    SECTOR_Q = "SECTOR_Q"

    def __str__(self):
        return self.value


LADDER = (RegionLabel.FAR, RegionLabel.TIP, RegionLabel.SECTOR_P, RegionLabel.SECTOR_Q)


@dataclass
class NewtonResult:
    z: complex
    region: RegionLabel
    iterations: int
    history: List[float] = field(default_factory=list)

    @property
    def residual(self) -> float:
        return self.history[-1] if self.history else math.inf


def _newton_config(config) -> NewtonConfig:
    if config is None:
        return NewtonConfig()
    if isinstance(config, NewtonConfig):
        return config
    return config.newton


# --------------------------- Classification --------------------------- #

def _classify_unnormalized(w_u: np.ndarray, sp: SlitParams, cfg: NewtonConfig) -> np.ndarray:
    """Region codes (indices into LADDER) for points of the closed upper half-plane."""
    tip = sp.unnormalized_tip
    codes = np.full(w_u.size, 2)
    args = np.angle(np.where(w_u.imag == 0, w_u.real + 0j, w_u))
    args = np.where(args < -math.pi / 2, args + 2 * math.pi, args)
    codes = np.where(args > math.pi * sp.p, 3, codes)
    codes = np.where(np.abs(w_u - tip) < cfg.tip_fraction * tip.imag, 1, codes)
    codes = np.where(np.abs(w_u) >= cfg.far_threshold * sp.slit_length, 0, codes)
    return codes


def classify_region(w: complex, sp: SlitParams, config=None) -> RegionLabel:
    """Region of a (normalized) point of the closed upper half-plane."""
    cfg = _newton_config(config)
    w = complex(w)
    if w == 0:
        raise BasePointError("w = 0 is the base of the slit; its preimages are p and p - 1")
    w_u = w / sp.C
    if w_u.imag < 0:
        w_u = w_u.conjugate()
    return LADDER[int(_classify_unnormalized(np.array([w_u]), sp, cfg)[0])]


# --------------------------- Region iterations --------------------------- #

class _Iteration:
    """Target, start and Newton step of one preliminary map."""

    def __init__(self, p: float, w_u: np.ndarray):
        self.p = p
        self.w_u = w_u

    def start(self) -> np.ndarray:
        raise NotImplementedError

    def step(self, z: np.ndarray, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class _FarIteration(_Iteration):
    def __init__(self, p, w_u, start="series"):
        super().__init__(p, w_u)
        self.log_w = log_branch_array(w_u)
        self.start_kind = start

    def start(self):
        p, w = self.p, self.w_u
        z0 = w + 2 * p - 1
        if self.start_kind == "series":
            z0 = z0 + p * (1 - p) / (2 * w) + (1 - 2 * p) * p * (1 - p) / (3 * w * w)
        elif self.start_kind != "linear":
            raise PreconditionError(f"unknown far-field start {self.start_kind!r}")
        return z0

    def step(self, z, idx):
        p = self.p
        # ratio f(z)/w; the update is Newton for f(z) = w written with the scale-free residual
        ratio = np.exp(slit_log_unnormalized(z, p) - self.log_w[idx])
        return (ratio - 1) / ratio * (z - p) * (z + 1 - p) / z


class _TipIteration(_Iteration):
    def __init__(self, p, w_u, tip):
        super().__init__(p, w_u)
        self.tip = tip
        alpha2 = -tip / (2 * p * (1 - p))
        self.alpha = complex(sqrt_right_array(np.array([alpha2]))[0])
        self.alpha2 = alpha2
        t = sqrt_right_array(w_u - tip)
        flip = (t / self.alpha).imag < 0
        self.target = np.where(flip, -t, t)

    def _k(self, z, fz):
        zero = z == 0
        safe = np.where(zero, 1.0 + 0j, z)
        k = self.alpha * safe * sqrt_right_array((fz - self.tip) / (self.alpha2 * safe * safe))
        return np.where(zero, 0j, k)

    def start(self):
        return self.target / self.alpha

    def step(self, z, idx):
        fz = np.exp(slit_log_unnormalized(z, self.p))
        k = self._k(z, fz)
        dfz = fz * slit_derivative_ratio(z, self.p)
        dk = np.where(k == 0, self.alpha, dfz / (2 * np.where(k == 0, 1.0, k)))
        return (k - self.target[idx]) / dk


class _SectorIteration(_Iteration):
    """k_p(f(z)) = (z - p)(z + 1 - p)^((1-p)/p) near p, or the mirror form near p - 1."""

    def __init__(self, p, w_u, which):
        super().__init__(p, w_u)
        self.which = which
        log_w = log_branch_array(w_u)
        if which == RegionLabel.SECTOR_P:
            self.expo = (1 - p) / p
            self.target = np.exp(log_w / p)
            self.root, self.other = p, p - 1
        else:
            self.expo = p / (1 - p)
            self.target = np.exp(log_w / (1 - p))
            self.root, self.other = p - 1, p

    def start(self):
        if self.which == RegionLabel.SECTOR_P:
            return self.p + self.target
        return self.p - 1 + self.target * cmath.exp(-1j * math.pi * self.p / (1 - self.p))

    def step(self, z, idx):
        near = z - self.root
        far = z - self.other
        power = np.exp(self.expo * log_branch_array(far))
        k = near * power
        dk = power * (1 + self.expo * near / far)
        return (k - self.target[idx]) / dk


def _residual(z: np.ndarray, w_u: np.ndarray, scale: np.ndarray, p: float) -> np.ndarray:
    with np.errstate(all="ignore"):
        fz = np.exp(slit_log_unnormalized(z, p))
        res = np.abs(fz - w_u) / scale
    return np.where(np.isfinite(res) & np.isfinite(z), res, np.inf)


def _iterate(iteration: _Iteration, w_u: np.ndarray, scale: np.ndarray, p: float, cfg: NewtonConfig,
             damp_first: bool, history: Optional[list] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    with np.errstate(all="ignore"):
        z = np.asarray(iteration.start(), dtype=complex).copy()
    res = _residual(z, w_u, scale, p)
    iterations = np.zeros(z.size, dtype=int)
    active = res > cfg.tol
    if history is not None:
        history.append(res.copy())
    for it in range(cfg.max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        with np.errstate(all="ignore"):
            dz = iteration.step(z[idx], idx)
            if damp_first and it == 0:
                size = np.abs(dz)
                dz = np.where(size > cfg.damping, dz * (cfg.damping / np.where(size > 0, size, 1.0)), dz)
            z[idx] = z[idx] - dz
        res[idx] = _residual(z[idx], w_u[idx], scale[idx], p)
        iterations[idx] += 1
        if history is not None:
            history.append(res.copy())
        active = res > cfg.tol
    # the preimage lives in the closed upper half-plane
    bound = np.maximum(1.0, np.abs(z))
    wrong_side = z.imag < -IMAG_REJECT * bound
    z = np.where((z.imag < 0) & (z.imag >= -IMAG_CLAMP * bound), z.real + 0j, z)
    converged = (res <= cfg.tol) & ~wrong_side
    return z, res, converged


def _make_iteration(region: RegionLabel, p: float, w_u: np.ndarray, sp: SlitParams, start: str = "series"):
    if region == RegionLabel.FAR:
        return _FarIteration(p, w_u, start)
    if region == RegionLabel.TIP:
        return _TipIteration(p, w_u, sp.unnormalized_tip)
    return _SectorIteration(p, w_u, region)


def _solve_region(region: RegionLabel, w_u: np.ndarray, sp: SlitParams, cfg: NewtonConfig,
                  start: str = "series", history: Optional[list] = None):
    scale = np.maximum(np.abs(w_u), sp.slit_length)
    iteration = _make_iteration(region, sp.p, w_u, sp, start)
    damp = region in (RegionLabel.SECTOR_P, RegionLabel.SECTOR_Q)
    return _iterate(iteration, w_u, scale, sp.p, cfg, damp, history)


def _single(region: RegionLabel, w: complex, sp: SlitParams, config, start="series") -> NewtonResult:
    cfg = _newton_config(config)
    w_u = np.array([complex(w)], dtype=complex)
    lower = w_u.imag[0] < 0
    if lower:
        w_u = np.conj(w_u)
    history = []
    z, res, ok = _solve_region(region, w_u, sp, cfg, start, history)
    if not ok[0]:
        raise NewtonConvergenceError("Newton iteration did not converge", region=str(region),
                                     residual=float(res[0]), iterations=len(history) - 1)
    z0 = complex(z[0])
    return NewtonResult(z0.conjugate() if lower else z0, region, len(history) - 1,
                        [float(h[0]) for h in history])


def newton_far_result(w: complex, sp: SlitParams, config=None, start: str = "series") -> NewtonResult:
    return _single(RegionLabel.FAR, w, sp, config, start)


def newton_far(w: complex, sp: SlitParams, config=None, start: str = "series") -> complex:
    """Far-field solve of f(z) = w, w in unnormalized coordinates."""
    return newton_far_result(w, sp, config, start).z


def newton_tip_result(w: complex, sp: SlitParams, config=None) -> NewtonResult:
    return _single(RegionLabel.TIP, w, sp, config)


def newton_tip(w: complex, sp: SlitParams, config=None) -> complex:
    """Solve near the slit tip through sqrt(w - w_tip)."""
    return newton_tip_result(w, sp, config).z


def newton_sector_result(w: complex, sp: SlitParams, config=None, which="P") -> NewtonResult:
    region = {"P": RegionLabel.SECTOR_P, "Q": RegionLabel.SECTOR_Q}.get(which, which)
    if region not in (RegionLabel.SECTOR_P, RegionLabel.SECTOR_Q):
        raise PreconditionError(f"unknown sector {which!r}")
    return _single(region, w, sp, config)


def newton_sector(w: complex, sp: SlitParams, config=None, which="P") -> complex:
    return newton_sector_result(w, sp, config, which).z


# --------------------------- Dispatch --------------------------- #

def _solve_unnormalized(w_u: np.ndarray, sp: SlitParams, cfg: NewtonConfig, step=None) -> np.ndarray:
    """Preimages of finite nonzero points of the closed upper half-plane."""
    out = np.empty(w_u.size, dtype=complex)
    if w_u.size == 0:
        return out
    codes = _classify_unnormalized(w_u, sp, cfg)
    pending = np.ones(w_u.size, dtype=bool)
    last_res = np.full(w_u.size, np.inf)
    for code, region in enumerate(LADDER):
        idx = np.nonzero(pending & (codes == code))[0]
        if idx.size:
            z, res, ok = _solve_region(region, w_u[idx], sp, cfg)
            out[idx[ok]] = z[ok]
            pending[idx[ok]] = False
            last_res[idx] = res
    if pending.any():
        logger.warning(f"slit inverse: {int(pending.sum())} point(s) fell back to other regions"
                       f" (p={sp.p:.6g})")
        for region in LADDER:
            idx = np.nonzero(pending)[0]
            if not idx.size:
                break
            z, res, ok = _solve_region(region, w_u[idx], sp, cfg)
            out[idx[ok]] = z[ok]
            pending[idx[ok]] = False
            last_res[idx] = np.minimum(last_res[idx], res)
    if pending.any():
        worst = int(np.nonzero(pending)[0][0])
        raise NewtonConvergenceError(
            f"slit inverse failed at w={complex(w_u[worst] * sp.C)}",
            region=str(LADDER[int(codes[worst])]), residual=float(last_res[worst]),
            iterations=cfg.max_iter, step=step)
    return out


def slit_inverse_array(ws, sp: SlitParams, config=None, step=None, side: str = "right") -> np.ndarray:
    """Vectorised inverse of the normalized slit map; IEEE inf maps to inf."""
    cfg = _newton_config(config)
    ws = np.asarray(ws, dtype=complex)
    flat = ws.ravel()
    out = np.empty(flat.size, dtype=complex)
    infinite = ~np.isfinite(flat)
    zero = flat == 0
    out[infinite] = complex(np.inf, 0)
    out[zero] = sp.p if side == "right" else sp.p - 1
    rest = np.nonzero(~infinite & ~zero)[0]
    if rest.size:
        w_u = flat[rest] / sp.C
        lower = w_u.imag < 0
        w_u = np.where(lower, np.conj(w_u), w_u)
        z = _solve_unnormalized(w_u, sp, cfg, step)
        out[rest] = np.where(lower, np.conj(z), z)
    return out.reshape(ws.shape)


def slit_inverse(w: ExtendedComplex, sp: SlitParams, config=None, side: str = "right", step=None) -> ExtendedComplex:
    """Preimage under the normalized slit map; w = 0 goes to p (right) or p - 1 (left)."""
    if w is INF:
        return INF
    w = complex(w)
    if w == 0:
        return complex(sp.p if side == "right" else sp.p - 1)
    return complex(slit_inverse_array(np.array([w]), sp, config, step)[0])


def slit_seam_preimages(sp: SlitParams, s: complex) -> Tuple[float, float]:
    """Real preimages (right of 0, left of 0) of a point s of the slit."""
    s = complex(s)
    if s == 0:
        return sp.p, sp.p - 1
    p = sp.p
    log_s = math.log(abs(s)) - sp.log_C

    def modulus_gap(x):
        return p * math.log(p - x) + (1 - p) * math.log(x + 1 - p) - log_s

    if modulus_gap(0.0) <= 0:
        return 0.0, 0.0

    delta = 0.5 * math.exp(log_s / p)
    hi = p - delta
    right = p if hi >= p else brentq(modulus_gap, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)

    delta = 0.5 * math.exp(log_s / (1 - p))
    lo = p - 1 + delta
    left = p - 1 if lo <= p - 1 else brentq(modulus_gap, lo, 0.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return right, left


def newton_continue(sp: SlitParams, w: complex, z_start: complex, config=None) -> complex:
    """Plain Newton on g(z) = w from a caller-provided start (branch tracking)."""
    cfg = _newton_config(config)
    w = complex(w)
    z = complex(z_start)
    p = sp.p
    w_u = w / sp.C
    scale = max(abs(w_u), sp.slit_length)
    residual = math.inf
    for _ in range(cfg.max_iter):
        fz = _f_scalar(z, p)
        residual = abs(fz - w_u) / scale
        if residual <= cfg.tol:
            return z
        d = fz * z / ((z - p) * (z + 1 - p))
        if d == 0 or not math.isfinite(abs(d)):
            break
        z = z - (fz - w_u) / d
    if abs(_f_scalar(z, p) - w_u) / scale <= cfg.tol:
        return z
    raise NewtonConvergenceError("continuation Newton did not converge", residual=residual,
                                 iterations=cfg.max_iter)


def _f_scalar(z: complex, p: float) -> complex:
    # the continuation follows the branch of the starting point, so the power is
    # evaluated with the lower branch below the real axis
    if z.imag < 0:
        return _f_scalar(z.conjugate(), p).conjugate()
    return complex(np.exp(slit_log_unnormalized(np.array([z]), p))[0])

import os
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from errors import PreconditionError

# --------------------------- Console colors --------------------------- #

# קודי צבע ANSI עבור פלט מסוף
class colors:
    RED = '\033[91m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    BLUE = '\033[94m'
    MAGENTA = '\033[95m'
    CYAN = '\033[96m'
    RESET = '\033[0m'


TOL_ENV_VAR = "ZIPMAP_NEWTON_TOL"
LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

# --------------------------- Configurations and Constants --------------------------- #

@dataclass(frozen=True)
class NewtonConfig:
    """Settings of the slit-map inversion.

    far_threshold and tip_fraction are the multipliers of |L| and Im w_tip
    that delimit the far field and the tip disc (unnormalized coordinates).
    """
    tol: float = 1e-13
    max_iter: int = 30
    far_threshold: float = 9 / 8
    tip_fraction: float = 1 / 4
    damping: float = 0.5

    def __post_init__(self):
        if not 0 < self.tol < 1e-6:
            raise PreconditionError(f"Newton tolerance must be in (0, 1e-6), got {self.tol}")
        if self.max_iter < 8:
            raise PreconditionError(f"Newton max_iter must be at least 8, got {self.max_iter}")
        if self.far_threshold <= 0 or self.tip_fraction <= 0:
            raise PreconditionError("region multipliers must be positive")


def _default_thresholds() -> Dict[str, List[Tuple[int, float]]]:
    # (largest N covered, max prevertex angular error)
    return {
        "geodesic": [(1000, 1e-3), (4000, 1e-4), (10 ** 9, 5e-6)],
        "slit": [(1000, 1e-3), (4000, 1e-4), (10 ** 9, 5e-6)],
        "zipper": [(1000, 1e-3), (4000, 1e-4), (10 ** 9, 1e-6)],
    }


@dataclass
class Config:
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    # Chains and validators
    chain_tolerance: float = 1e-9
    c1: float = 8.0  # not a canonical value, only a usable default
    eps0: float = 0.1
    separation_factor: float = 5.0

    # Builders
    out_of_order_tol: float = 1e-10

    # Concurrent evaluation
    workers: int = 4
    chunk_size: int = 2048

    selftest_thresholds: Dict[str, List[Tuple[int, float]]] = field(default_factory=_default_thresholds)

    @classmethod
    def from_env(cls, environ: Optional[Dict[str, str]] = None) -> "Config":
        """Default settings with the environment overrides applied."""
        environ = os.environ if environ is None else environ
        config = cls()
        raw = environ.get(TOL_ENV_VAR)
        if raw:
            try:
                tol = float(raw)
            except ValueError:
                raise PreconditionError(f"{TOL_ENV_VAR} is not a number: {raw!r}")
            config.newton = replace(config.newton, tol=tol)
        return config

    def selftest_threshold(self, algo: str, n: int) -> float:
        for max_n, threshold in self.selftest_thresholds[algo]:
            if n <= max_n:
                return threshold
        return self.selftest_thresholds[algo][-1][1]


def setup_logging(verbose: bool = False, log_file: Optional[str] = None):
    """Configure the root logger once for the command line run."""
    level = logging.DEBUG if verbose else logging.INFO
    kwargs = {"level": level, "format": LOG_FORMAT, "force": True}
    if log_file:
        kwargs["filename"] = log_file
    logging.basicConfig(**kwargs)

"""Parameter records, grids, and RNG stream management.

All ensemble scales derive from three inputs: the matrix size N, the
rectangularity nu (nu/N -> alpha), and the non-Hermiticity tau in [0, 1].
Derived constants that require tau strictly inside (0, 1) (or alpha > 0) are
stored as None outside their domain rather than as infinities.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "EnsembleParams",
    "make_params",
    "Grid2D",
    "SeedSpec",
    "params_to_json",
    "params_from_json",
]

_REL_TOL = 1e-12


@dataclass(frozen=True)
class EnsembleParams:
    """Validated ensemble parameters with derived constants.

    A = 2/(1-tau^2), B = 2 tau/(1-tau^2), c = (A^2-B^2) N/(2B) (= N/tau),
    a = (1-tau^2) sqrt(nu)/tau, delta = 1/((1-tau^2)^2 alpha_N),
    tau_c = 1/sqrt(1+alpha_N).  Fields outside their domain are None:
    A, B at tau=1; c, a at tau in {0, 1}; delta at alpha_N=0 or tau=1.
    """

    N: int
    nu: float
    tau: float
    alpha_N: float
    A: float | None
    B: float | None
    c: float | None
    a: float | None
    delta: float | None
    tau_c: float

    @property
    def nu_is_integral(self) -> bool:
        return self.nu >= 0 and float(self.nu).is_integer()


def make_params(N, nu, tau) -> EnsembleParams:
    """Build a validated EnsembleParams from (N, nu, tau)."""
    if not float(N).is_integer() or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    nu = float(nu)
    tau = float(tau)
    if not nu > -1:
        raise ValueError(f"nu must exceed -1, got {nu}")
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"tau must lie in [0, 1], got {tau}")

    alpha = nu / N
    if tau < 1.0:
        A = 2.0 / (1.0 - tau * tau)
        B = 2.0 * tau / (1.0 - tau * tau)
    else:
        A = B = None

    if 0.0 < tau < 1.0:
        c = (A * A - B * B) * N / (2.0 * B)
        # algebraic identity c = N/tau from A,B above
        assert abs(c * tau - N) <= _REL_TOL * N
        a = (1.0 - tau * tau) * math.sqrt(nu) / tau if nu >= 0 else None
    else:
        c = a = None

    delta = 1.0 / ((1.0 - tau * tau) ** 2 * alpha) if (alpha > 0 and tau < 1.0) else None
    tau_c = 1.0 / math.sqrt(1.0 + alpha)

    return EnsembleParams(N=N, nu=nu, tau=tau, alpha_N=alpha, A=A, B=B, c=c, a=a, delta=delta, tau_c=tau_c)


def params_to_json(params: EnsembleParams) -> str:
    return json.dumps(asdict(params))


def params_from_json(text: str) -> EnsembleParams:
    """Load params, recomputing every derived field; stored values are only
    cross-checked, never trusted."""
    data = json.loads(text)
    fresh = make_params(data["N"], data["nu"], data["tau"])
    for name in ("alpha_N", "A", "B", "c", "a", "delta", "tau_c"):
        stored = data.get(name)
        expected = getattr(fresh, name)
        if stored is None and expected is None:
            continue
        if stored is None or expected is None:
            raise ValueError(f"field {name!r} availability mismatch on load")
        scale = max(1.0, abs(expected))
        if abs(stored - expected) > 1e-9 * scale:
            raise ValueError(f"field {name!r} inconsistent with (N, nu, tau): {stored} != {expected}")
    return fresh


@dataclass(frozen=True)
class Grid2D:
    """Rectangular binning grid, nx-by-ny cells over [x_min,x_max]x[y_min,y_max]."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("grid extents must be increasing")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must have positive cell counts")

    @property
    def cell_area(self) -> float:
        """Lebesgue area of one cell."""
        return ((self.x_max - self.x_min) / self.nx) * ((self.y_max - self.y_min) / self.ny)

    @property
    def cell_area_dA(self) -> float:
        """Cell area in the paper's dA = d^2 zeta / pi units."""
        return self.cell_area / math.pi

    def centers(self):
        """Complex array (nx, ny) of cell centers."""
        dx = (self.x_max - self.x_min) / self.nx
        dy = (self.y_max - self.y_min) / self.ny
        xs = self.x_min + dx * (np.arange(self.nx) + 0.5)
        ys = self.y_min + dy * (np.arange(self.ny) + 0.5)
        return xs[:, None] + 1j * ys[None, :]


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Counter-based RNG stream identity: (master_seed, stream_id).

    Distinct pairs give independent Philox streams; sampling output is a pure
    function of (params, SeedSpec) regardless of how trials are scheduled.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, trial: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_id + trial)

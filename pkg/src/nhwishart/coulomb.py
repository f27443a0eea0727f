"""Discrete Coulomb-gas energy minimization: an independent oracle for the
analytic droplet.

The energy is the weighted logarithmic energy of n point charges in the limit
potential Q_tilde_alpha (the O(log N / N) difference to the finite-N
potential is irrelevant at this accuracy):

    E = sum_{j != k} log 1/|z_j - z_k| + n sum_j Q_tilde_alpha(z_j).

Minimizers are weighted Fekete configurations; they fill the analytic
ellipse, which is exactly what the acceptance run checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .globallaw import DropletGeometry, ellipse_form

__all__ = ["GasConfig", "CoincidentPointsError", "gas_energy", "gas_gradient", "gas_minimize", "coverage_metric"]

MIN_SEPARATION = 1e-12


class CoincidentPointsError(ValueError):
    """Two gas points collided; names the offending pair."""

    def __init__(self, i, j):
        super().__init__(f"points {i} and {j} coincide (within {MIN_SEPARATION})")
        self.pair = (i, j)


@dataclass(frozen=True)
class GasConfig:
    """A gas configuration with cached energy/gradient-norm diagnostics."""

    points: np.ndarray
    alpha: float
    tau: float
    energy: float = math.nan
    grad_norm: float = math.nan
    converged: bool = False
    iterations: int = 0


def _check_pairs(z):
    diff = z[:, None] - z[None, :]
    dist = np.abs(diff)
    np.fill_diagonal(dist, np.inf)
    if dist.min() <= MIN_SEPARATION:
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        raise CoincidentPointsError(int(i), int(j))
    return diff, dist


def _q_tilde(z, alpha, tau):
    A = 2.0 / (1.0 - tau * tau)
    B = 2.0 * tau / (1.0 - tau * tau)
    root = np.sqrt(A * A * np.abs(z) ** 2 + alpha * alpha)
    logterm = 0.0 if alpha == 0.0 else alpha * np.log(root + alpha)
    return root - B * z.real - logterm


def _grad_q_tilde(z, alpha, tau):
    """Gradient of Q_tilde as a vector field dQ/dx + i dQ/dy = 2 conj(dQ/dz)."""
    A = 2.0 / (1.0 - tau * tau)
    B = 2.0 * tau / (1.0 - tau * tau)
    root = np.sqrt(A * A * np.abs(z) ** 2 + alpha * alpha)
    dz = (root - alpha) / (2.0 * z) - B / 2.0
    return 2.0 * np.conj(dz)


def gas_energy(config: GasConfig) -> float:
    z = np.asarray(config.points, dtype=complex)
    _, dist = _check_pairs(z)
    interaction = -np.sum(np.log(np.where(np.isinf(dist), 1.0, dist)))
    potential = len(z) * np.sum(_q_tilde(z, config.alpha, config.tau))
    return float(interaction + potential)


def gas_gradient(config: GasConfig) -> np.ndarray:
    """Energy gradient per point, as complex dE/dx_j + i dE/dy_j."""
    z = np.asarray(config.points, dtype=complex)
    diff, dist = _check_pairs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(np.isinf(dist), 0.0, diff / dist**2)
    interaction = -2.0 * inv.sum(axis=1)
    return interaction + len(z) * _grad_q_tilde(z, config.alpha, config.tau)


def gas_minimize(initial: GasConfig, max_iters: int = 50000, grad_tol: float = 1e-8, min_sep: float = 1e-8) -> GasConfig:
    """Gradient descent with Armijo backtracking (halving) and a
    minimum-separation safeguard; accepted energies are non-increasing.

    Each line search starts from a Barzilai-Borwein spectral step, which
    removes the flat tail of plain steepest descent while keeping the
    monotone Armijo contract.
    """
    z = np.asarray(initial.points, dtype=complex).copy()
    n = len(z)
    energy = gas_energy(replace(initial, points=z))
    grad = gas_gradient(GasConfig(z, initial.alpha, initial.tau))
    step = 1.0 / n
    z_prev = grad_prev = None

    for it in range(max_iters):
        gnorm = float(np.max(np.abs(grad)))
        if gnorm <= grad_tol:
            return GasConfig(z, initial.alpha, initial.tau, energy, gnorm, True, it)

        if z_prev is not None:
            s = z - z_prev
            y = grad - grad_prev
            sy = float(np.real(np.vdot(s, y)))
            if sy > 0:
                # alternate the two spectral (BB) steps; the long BB1 step
                # alone stalls under the monotone Armijo guard
                if it % 2:
                    step = float(np.real(np.vdot(s, s))) / sy
                else:
                    step = sy / float(np.real(np.vdot(y, y)))
        step = float(np.clip(step, 1e-12, 1e3))

        accepted = False
        trial_step = step
        g2 = float(np.sum(np.abs(grad) ** 2))
        for _ in range(80):
            z_new = z - trial_step * grad
            d = np.abs(z_new[:, None] - z_new[None, :])
            np.fill_diagonal(d, np.inf)
            if d.min() < min_sep:
                trial_step *= 0.5  # safeguard: collision, halve
                continue
            e_new = gas_energy(GasConfig(z_new, initial.alpha, initial.tau))
            if e_new <= energy - 1e-6 * trial_step * g2:  # Armijo decrease
                accepted = True
                break
            trial_step *= 0.5
        if not accepted:
            return GasConfig(z, initial.alpha, initial.tau, energy, gnorm, False, it)

        z_prev, grad_prev = z, grad
        z, energy = z_new, e_new
        grad = gas_gradient(GasConfig(z, initial.alpha, initial.tau))
        step = trial_step

    gnorm = float(np.max(np.abs(grad)))
    return GasConfig(z, initial.alpha, initial.tau, energy, gnorm, gnorm <= grad_tol, max_iters)


def coverage_metric(config: GasConfig, geometry: DropletGeometry, tol: float = 0.05):
    """How well the configuration fills the analytic droplet.

    inside_fraction: share of points with ellipse form <= (1+tol)^2-ish
    dilation; hausdorff_proxy: max over boundary samples of the distance to
    the nearest gas point.
    """
    z = np.asarray(config.points, dtype=complex)
    form = ellipse_form(geometry, z)
    inside = float(np.mean(form <= (1.0 + tol)))

    theta = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
    boundary = (
        geometry.x0
        + geometry.semi_major * np.cos(theta)
        + 1j * geometry.semi_minor * np.sin(theta)
    )
    dists = np.abs(boundary[:, None] - z[None, :]).min(axis=1)
    return {"inside_fraction": inside, "hausdorff_proxy": float(dists.max())}

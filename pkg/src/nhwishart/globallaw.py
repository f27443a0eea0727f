"""Closed-form macroscopic laws and their quadrature checks.

Conventions: all planar densities are per dA = d^2 zeta / pi; the droplet is
closed (boundary points belong to the support, membership tolerance 1e-12 on
the ellipse form); the A-normalisation A = 2/(1-tau^2) is applied throughout
so the ellipse data reduce to x0 = tau(2+alpha), semi-axes
(1+tau^2) sqrt(1+alpha) and (1-tau^2) sqrt(1+alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DropletGeometry",
    "QuadratureError",
    "droplet_geometry",
    "ellipse_form",
    "droplet_contains",
    "wishart_density",
    "dirac_law",
    "quartic_residual",
    "classical_density",
    "edge_points",
    "potential",
    "conformal_map",
    "cauchy_transform",
    "cauchy_transform_numeric",
    "mass_integral",
    "effective_potential",
]

MEMBERSHIP_TOL = 1e-12


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach tolerance; carries the last value
    and the achieved error estimate."""

    def __init__(self, message, value, estimate):
        super().__init__(f"{message} (value={value}, error estimate={estimate:.3e})")
        self.value = value
        self.estimate = estimate


@dataclass(frozen=True)
class DropletGeometry:
    """Analytic support descriptors of the Wishart droplet (A-normalised)."""

    alpha: float
    tau: float
    x0: float
    semi_major: float
    semi_minor: float
    conformal_R: float
    quartic_rhs: float
    foci: tuple


def droplet_geometry(alpha: float, tau: float) -> DropletGeometry:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if not (0.0 <= tau < 1.0):
        raise ValueError("droplet geometry requires tau in [0, 1)")
    s = math.sqrt(1.0 + alpha)
    lam_minus = (s - 1.0) ** 2
    lam_plus = (s + 1.0) ** 2
    return DropletGeometry(
        alpha=alpha,
        tau=tau,
        x0=tau * (2.0 + alpha),
        semi_major=(1.0 + tau * tau) * s,
        semi_minor=(1.0 - tau * tau) * s,
        conformal_R=s,
        quartic_rhs=(1.0 + alpha - tau * tau) * (1.0 - (1.0 + alpha) * tau * tau),
        foci=(tau * lam_minus, tau * lam_plus),
    )


def ellipse_form(geom: DropletGeometry, zeta):
    """((x-x0)/a)^2 + (y/b)^2; <= 1 on the closed droplet."""
    z = np.asarray(zeta, dtype=complex)
    return ((z.real - geom.x0) / geom.semi_major) ** 2 + (z.imag / geom.semi_minor) ** 2


def droplet_contains(geom: DropletGeometry, zeta, tol=MEMBERSHIP_TOL):
    return ellipse_form(geom, zeta) <= 1.0 + tol


def wishart_density(zeta, alpha: float, tau: float):
    """Limiting Wishart eigenvalue density per dA.

    (1/(1-tau^2)) (4|zeta|^2 + (1-tau^2)^2 alpha^2)^{-1/2} on the closed
    ellipse, 0 outside; at alpha=0 the zeta=0 value is the +inf sentinel.
    """
    geom = droplet_geometry(alpha, tau)
    z = np.asarray(zeta, dtype=complex)
    r2 = 4.0 * (z.real**2 + z.imag**2) + (1.0 - tau * tau) ** 2 * alpha**2
    with np.errstate(divide="ignore"):
        dens = np.where(r2 > 0.0, 1.0 / ((1.0 - tau * tau) * np.sqrt(np.where(r2 > 0, r2, 1.0))), np.inf)
    out = np.where(droplet_contains(geom, z), dens, 0.0)
    return float(out) if out.ndim == 0 else out


def quartic_residual(zeta, alpha: float, tau: float):
    """LHS - RHS of the Dirac droplet quartic; <= 0 inside or on the boundary."""
    if not (0.0 <= tau < 1.0):
        raise ValueError("quartic_residual requires tau in [0, 1)")
    z = np.asarray(zeta, dtype=complex)
    x2 = z.real**2
    y2 = z.imag**2
    cross = 0.0 if tau == 0.0 else (16.0 * tau * tau / (1.0 - tau * tau) ** 2) * x2 * y2
    lhs = (x2 + y2) ** 2 + cross - 2.0 * tau * (2.0 + alpha) * (x2 - y2)
    rhs = (1.0 + alpha - tau * tau) * (1.0 - (1.0 + alpha) * tau * tau)
    out = lhs - rhs
    return float(out) if out.ndim == 0 else out


def dirac_law(zeta, alpha: float, tau: float):
    """(atom_mass, density) of the limiting Dirac spectral measure.

    atom_mass = alpha/(2+alpha) at 0; the absolutely continuous part has
    density (2/(2+alpha)) (1/(1-tau^2)) |z|^2 / sqrt(|z|^4 +
    alpha^2 (1-tau^2)^2/4) inside the quartic region.
    """
    z = np.asarray(zeta, dtype=complex)
    atom = alpha / (2.0 + alpha)
    mod2 = z.real**2 + z.imag**2
    denom = np.sqrt(mod2**2 + alpha**2 * (1.0 - tau * tau) ** 2 / 4.0)
    flat = 1.0 / (1.0 - tau * tau)  # alpha=0, zeta=0 limit of the flat law
    dens = np.where(
        denom > 0.0,
        (2.0 / (2.0 + alpha)) / (1.0 - tau * tau) * mod2 / np.where(denom > 0, denom, 1.0),
        flat,
    )
    inside = quartic_residual(z, alpha, tau) <= MEMBERSHIP_TOL
    dens = np.where(inside, dens, 0.0)
    return (atom, float(dens) if dens.ndim == 0 else dens)


def classical_density(kind: str, x, *, alpha=None, M=None):
    """Classical limit laws.

    'mp': Marchenko-Pastur density in x on [lam_-, lam_+] (per dx);
    'mp_squared': its squared-variable version on +/-[sqrt(lam_-), sqrt(lam_+)];
    'product_M': the M-fold product law 1/(M |zeta|^{2-2/M}) on the unit disc
    (per dA).
    """
    if kind in ("mp", "mp_squared"):
        if alpha is None or alpha < 0:
            raise ValueError(f"{kind} requires alpha >= 0")
        s = math.sqrt(1.0 + alpha)
        lam_minus = (s - 1.0) ** 2
        lam_plus = (s + 1.0) ** 2
        xv = np.asarray(x, dtype=float)
        if kind == "mp":
            inside = (xv >= lam_minus) & (xv <= lam_plus) & (xv > 0)
            with np.errstate(invalid="ignore", divide="ignore"):
                val = np.sqrt(np.clip((lam_plus - xv) * (xv - lam_minus), 0, None)) / (
                    2.0 * math.pi * np.where(xv != 0, xv, 1.0)
                )
            out = np.where(inside, val, 0.0)
        else:
            x2 = xv * xv
            inside = (x2 >= lam_minus) & (x2 <= lam_plus) & (np.abs(xv) > 0)
            with np.errstate(invalid="ignore", divide="ignore"):
                val = np.sqrt(np.clip((lam_plus - x2) * (x2 - lam_minus), 0, None)) / (
                    math.pi * np.where(xv != 0, np.abs(xv), 1.0)
                )
            out = np.where(inside, val, 0.0)
        return float(out) if out.ndim == 0 else out

    if kind == "product_M":
        if M is None or int(M) != M or M < 1:
            raise ValueError("product_M requires integer M >= 1")
        M = int(M)
        z = np.asarray(x, dtype=complex)
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            val = np.where(r > 0.0, 1.0 / (M * np.where(r > 0, r, 1.0) ** (2.0 - 2.0 / M)), np.inf if M > 1 else 1.0)
        out = np.where(r <= 1.0, val, 0.0)
        return float(out) if out.ndim == 0 else out

    raise ValueError(f"unknown classical law {kind!r}")


def edge_points(alpha: float, tau: float):
    """Real-axis edge points of the Dirac droplet, as positive representatives.

    Returns (outer, inner): the droplet is symmetric, so the edges sit at
    +/-outer (and +/-inner once tau >= tau_c; inner degenerates to 0 exactly
    at tau_c, and is None below it).
    """
    if alpha < 0 or not (0.0 <= tau <= 1.0):
        raise ValueError("edge_points requires alpha >= 0, tau in [0, 1]")
    s = math.sqrt(1.0 + alpha)
    outer = math.sqrt((1.0 + tau * s) * (s + tau))
    tau_c = 1.0 / s
    if tau < tau_c - 1e-15:
        inner = None
    else:
        inner = math.sqrt(max(tau * s - 1.0, 0.0) * max(s - tau, 0.0))
    return outer, inner


def potential(zeta, params, variant: str, limit_form: bool = False):
    """Limit potentials and their Laplacians (Delta = d d-bar).

    variants: 'Q_tilde', 'V_tilde' (the 2/N log term is dropped when
    limit_form=True), 'Q_tilde_0', 'laplacian_Q', 'laplacian_V'.
    """
    if params.A is None:
        raise ValueError("potential requires tau < 1")
    A, B, alpha = params.A, params.B, params.alpha_N
    z = complex(zeta)
    mod = abs(z)

    if variant == "Q_tilde":
        root = math.sqrt(A * A * mod * mod + alpha * alpha)
        logterm = 0.0 if alpha == 0.0 else alpha * math.log(root + alpha)
        return root - B * z.real - logterm

    if variant == "V_tilde":
        root = math.sqrt(A * A * mod**4 + alpha * alpha)
        logterm = 0.0 if alpha == 0.0 else alpha * math.log(root + alpha)
        val = root - B * (z * z).real - logterm
        if not limit_form:
            if mod == 0.0:
                return math.inf
            val -= (2.0 / params.N) * math.log(mod)
        return val

    if variant == "Q_tilde_0":
        return A * mod - B * z.real

    if variant == "laplacian_Q":
        denom = math.sqrt(A * A * mod * mod + alpha * alpha)
        return math.inf if denom == 0.0 else (A * A / 4.0) / denom

    if variant == "laplacian_V":
        denom = math.sqrt(A * A * mod**4 + alpha * alpha)
        return math.inf if denom == 0.0 else A * A * mod * mod / denom

    raise ValueError(f"unknown potential variant {variant!r}")


def conformal_map(z, geom: DropletGeometry, tau: float):
    """Translated Joukowsky map f(z) = R (z + tau^2/z) + x0; the unit circle
    goes to the droplet boundary."""
    zv = np.asarray(z, dtype=complex)
    if np.any(zv == 0):
        raise ValueError("conformal_map requires z != 0")
    out = geom.conformal_R * (zv + tau * tau / zv) + geom.x0
    return complex(out) if out.ndim == 0 else out


def _branch_sqrt(u, c):
    """sqrt(u^2 - c^2) analytic off the segment [-c, c], ~ u at infinity."""
    return np.sqrt(u - c) * np.sqrt(u + c)


def cauchy_transform(zeta, alpha: float, tau: float):
    """Cauchy transform of the equilibrium measure.

    Interior (closed droplet): (sqrt(A^2|z|^2 + alpha^2) - alpha)/(2z) - B/2.
    Exterior: -alpha/(2z) + (A/4)((1-tau^2)/tau)(z - sqrt((z-x0)^2 -
    4 R^2 tau^2))/z with the branch fixed by C ~ 1/z at infinity; the tau=0
    exterior limit is exactly 1/z.
    """
    z = complex(zeta)
    if z == 0:
        raise ValueError("cauchy_transform requires zeta != 0 (alpha atom limit)")
    geom = droplet_geometry(alpha, tau)
    A = 2.0 / (1.0 - tau * tau)
    B = 2.0 * tau / (1.0 - tau * tau)
    if droplet_contains(geom, z):
        return (math.sqrt(A * A * abs(z) ** 2 + alpha * alpha) - alpha) / (2.0 * z) - B / 2.0
    if tau == 0.0:
        return 1.0 / z
    s = complex(_branch_sqrt(np.complex128(z - geom.x0), 2.0 * geom.conformal_R * tau))
    return -alpha / (2.0 * z) + (A / 4.0) * ((1.0 - tau * tau) / tau) * (z - s) / z


# ---------------------------------------------------------------------------
# droplet quadrature (polar rules; adaptive node doubling)
# ---------------------------------------------------------------------------

def _radial_intervals(geom, center, cos_t, sin_t):
    """Per-direction intersection [r_lo, r_hi] of the ray center + r e^{i t}
    with the closed ellipse (length 0 when the ray misses)."""
    a2 = geom.semi_major**2
    b2 = geom.semi_minor**2
    dx = center.real - geom.x0
    dy = center.imag
    q2 = cos_t**2 / a2 + sin_t**2 / b2
    q1 = 2.0 * (dx * cos_t / a2 + dy * sin_t / b2)
    q0 = dx * dx / a2 + dy * dy / b2 - 1.0
    disc = q1 * q1 - 4.0 * q2 * q0
    hit = disc > 0.0
    root = np.sqrt(np.where(hit, disc, 0.0))
    r_minus = (-q1 - root) / (2.0 * q2)
    r_plus = (-q1 + root) / (2.0 * q2)
    r_lo = np.clip(r_minus, 0.0, None)
    r_hi = np.clip(r_plus, 0.0, None)
    r_hi = np.where(hit, r_hi, 0.0)
    r_lo = np.where(hit, r_lo, 0.0)
    return r_lo, r_hi


def _theta_window(geom, center):
    """Angular interval (relative bracket around the centre direction) of rays
    from an exterior/boundary point that meet the ellipse.

    Located by bisection between hit and miss directions; the window is a
    single arc because the ellipse is convex.
    """
    t0 = math.atan2(-center.imag, geom.x0 - center.real)

    def hits(t):
        r_lo, r_hi = _radial_intervals(geom, center, np.cos(t), np.sin(t))
        return r_hi > r_lo + 1e-300

    probe = t0 + np.linspace(-math.pi, math.pi, 4097)[:-1]
    mask = hits(probe)
    if mask.all():
        return None  # interior after all
    if not mask.any():
        raise ValueError("quadrature centre sees no part of the droplet")

    def bisect(t_hit, t_miss):
        for _ in range(60):
            mid = 0.5 * (t_hit + t_miss)
            if hits(np.asarray([mid]))[0]:
                t_hit = mid
            else:
                t_miss = mid
        return 0.5 * (t_hit + t_miss)

    idx = np.where(mask)[0]
    # contiguous arc in the probe ordering (probe is centred on t0)
    lo_i, hi_i = idx[0], idx[-1]
    lo = probe[lo_i] if lo_i == 0 else bisect(probe[lo_i], probe[lo_i - 1])
    hi = probe[hi_i] if hi_i == len(probe) - 1 else bisect(probe[hi_i], probe[hi_i + 1])
    return lo, hi


def _polar_pass(func, geom, center, n_theta, n_r, window, log_weight):
    """One quadrature pass of (1/pi) iint func(z) r dr dtheta over the droplet.

    window None: center lies strictly inside, full-circle trapezoid in theta;
    otherwise Gauss-Legendre over the visible angular window (sin-graded, so
    the square-root tangency behaviour at the window edges is softened).
    log_weight: include an extra log(1/r) radial factor via an r = h u^2
    substitution (for the effective-potential kernel centred at `center`).
    """
    if window is None:
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        w_theta = np.full(n_theta, 2.0 * math.pi / n_theta)
    else:
        lo, hi = window
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        phi, w_phi = np.polynomial.legendre.leggauss(n_theta)
        theta = mid + half * np.sin(phi * math.pi / 2.0)
        w_theta = half * (math.pi / 2.0) * np.cos(phi * math.pi / 2.0) * w_phi

    cos_t, sin_t = np.cos(theta), np.sin(theta)
    r_lo, r_hi = _radial_intervals(geom, center, cos_t, sin_t)

    x_gl, w_gl = np.polynomial.legendre.leggauss(n_r)
    if log_weight:
        # r = h u^2, u in [0,1]: integrand r log(1/r) dr -> 2 h^2 u^3 (log(1/h) - 2 log u) du
        u = 0.5 * (x_gl + 1.0)
        wu = 0.5 * w_gl
        h = r_hi[:, None]
        r = h * u[None, :] ** 2
        z = center + r * (cos_t + 1j * sin_t)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(h > 0, -np.log(np.where(h > 0, h, 1.0)), 0.0) - 2.0 * np.log(u)[None, :]
        vals = func(z) * 2.0 * h**2 * u[None, :] ** 3 * logs
        radial = vals @ wu
    else:
        mid = 0.5 * (r_lo + r_hi)
        half = 0.5 * (r_hi - r_lo)
        r = mid[:, None] + half[:, None] * x_gl[None, :]
        z = center + r * (cos_t + 1j * sin_t)[:, None]
        vals = func(z) * r
        radial = (vals @ w_gl) * half
    return (w_theta @ radial) / math.pi


def _adaptive_polar(func, geom, center, tol, log_weight=False, max_level=10):
    """Double (n_theta, n_r) until successive passes agree within tol."""
    center = complex(center)
    if float(ellipse_form(geom, center)) < 1.0 - 1e-12:
        window = None
    else:
        window = _theta_window(geom, center)
    n_theta, n_r = 64, 32
    prev = None
    est = math.inf
    for _ in range(max_level):
        val = _polar_pass(func, geom, center, n_theta, n_r, window, log_weight)
        if prev is not None:
            est = abs(val - prev)
            if est <= 0.5 * tol * max(1.0, abs(val)):
                return val, est
        prev = val
        n_theta = min(2 * n_theta, 16384)
        n_r = min(2 * n_r, 512)
    raise QuadratureError("droplet quadrature did not converge", prev, est)


def mass_integral(alpha: float, tau: float, tol: float = 1e-8) -> float:
    """(A^2/4) int_droplet (A^2|z|^2 + alpha^2)^{-1/2} dA(z); must be 1.

    Integrated in polar coordinates about the origin so the alpha=0
    integrable singularity cancels against the radial Jacobian.
    """
    if tol < 1e-10:
        raise ValueError("tol below 1e-10 is not supported")
    geom = droplet_geometry(alpha, tau)
    A = 2.0 / (1.0 - tau * tau)

    def integrand(z):
        # at alpha=0 this is (A/4)/|z|; the rule's radial Jacobian cancels it
        mod2 = np.abs(z) ** 2
        return (A * A / 4.0) / np.sqrt(A * A * mod2 + alpha * alpha)

    val, _ = _adaptive_polar(integrand, geom, 0j, tol)
    return val


def effective_potential(zeta, alpha: float, tau: float, tol: float = 1e-6) -> float:
    """H(zeta) = int log(1/|zeta - z|) dmu(z) + Q_tilde(zeta)/2.

    Constant (the modified Robin constant) on the droplet, >= it outside.
    The logarithmic singularity is absorbed by a graded radial rule centred
    at zeta when zeta lies in the droplet.
    """
    geom = droplet_geometry(alpha, tau)
    A = 2.0 / (1.0 - tau * tau)
    z0 = complex(zeta)

    def dens(z):
        mod = np.abs(z)
        return (A * A / 4.0) / np.sqrt(A * A * mod * mod + alpha * alpha)

    if droplet_contains(geom, z0, tol=1e-9):
        log_part, _ = _adaptive_polar(dens, geom, z0, tol, log_weight=True)
    else:
        def integrand(z):
            return dens(z) * np.log(1.0 / np.abs(z0 - z))

        log_part, _ = _adaptive_polar(integrand, geom, 0j, tol)

    root = math.sqrt(A * A * abs(z0) ** 2 + alpha * alpha)
    B = 2.0 * tau / (1.0 - tau * tau)
    logterm = 0.0 if alpha == 0.0 else alpha * math.log(root + alpha)
    q_tilde = root - B * z0.real - logterm
    return log_part + q_tilde / 2.0


def cauchy_transform_numeric(zeta, alpha: float, tau: float, tol: float = 1e-5) -> complex:
    """Quadrature oracle for cauchy_transform: int dmu(z)/(zeta - z).

    Centred at zeta when inside (the 1/(zeta-z) pole cancels against the
    radial Jacobian), at the origin otherwise.
    """
    geom = droplet_geometry(alpha, tau)
    A = 2.0 / (1.0 - tau * tau)
    z0 = complex(zeta)

    def dens(z):
        mod = np.abs(z)
        return (A * A / 4.0) / np.sqrt(A * A * mod * mod + alpha * alpha)

    if droplet_contains(geom, z0, tol=1e-9):
        # z = z0 + r e^{i t}: 1/(z0 - z) = -e^{-i t}/r cancels against the
        # rule's radial Jacobian
        def integrand(z):
            diff = z - z0
            r = np.abs(diff)
            safe = np.where(r > 0, r, 1.0)
            return dens(z) * np.where(r > 0, -np.conj(diff) / safe**2, 0.0)

        center = z0
    else:
        def integrand(z):
            return dens(z) / (z0 - z)

        center = 0j

    val, _ = _adaptive_polar(integrand, geom, center, tol)
    return complex(val)

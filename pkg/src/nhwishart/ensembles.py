"""Sampling of the correlated Gaussian pair, the Wishart product, and the
chiral Dirac matrix; complex spectra extraction.

Entry convention: P, Q are N x (N+nu) with entries (xi_1 + i xi_2)/(2 sqrt(N))
(independent standard normals per component, E|entry|^2 = 1/(2N)), so that
X_1 = sqrt(1+tau) P + sqrt(1-tau) Q has E|entry|^2 = 1/N and the tau=0,
alpha=0 spectrum fills the unit disc.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EnsembleParams, SeedSpec

__all__ = [
    "MatrixPair",
    "SpectrumSample",
    "EigensolverError",
    "sample_ginibre_pair",
    "wishart_eigs",
    "dirac_eigs",
    "dirac_eigs_direct",
    "spectrum_to_csv",
]


class EigensolverError(RuntimeError):
    """Dense eigensolver failed to converge; carries the offending seed."""

    def __init__(self, message, seed: SeedSpec):
        super().__init__(f"{message} (seed={seed})")
        self.seed = seed


@dataclass(frozen=True)
class MatrixPair:
    """The correlated pair X1 = sqrt(1+tau) P + sqrt(1-tau) Q,
    X2 = sqrt(1+tau) P - sqrt(1-tau) Q."""

    X1: np.ndarray
    X2: np.ndarray


@dataclass(frozen=True)
class SpectrumSample:
    """One draw of complex eigenvalues with provenance.

    kind 'wishart': N eigenvalues of X = X1 X2^*, zero_mode_count 0.
    kind 'dirac': the 2N nonzero Dirac eigenvalues (+/- pairs), zero modes
    counted but not listed.  kind 'dirac_direct': all 2N+nu raw eigenvalues
    of the explicit Dirac matrix (small-N oracle).
    """

    kind: str
    eigenvalues: np.ndarray
    zero_mode_count: int
    seed: SeedSpec
    params_snapshot: EnsembleParams


def _require_sampling_nu(params: EnsembleParams):
    if not params.nu_is_integral:
        raise ValueError(f"sampling requires integer nu >= 0, got nu={params.nu}")


def sample_ginibre_pair(params: EnsembleParams, seed: SeedSpec) -> MatrixPair:
    """Draw (X1, X2); deterministic given (params, seed)."""
    _require_sampling_nu(params)
    N = params.N
    M = N + int(params.nu)
    rng = seed.generator()
    sigma = 0.5 / np.sqrt(N)  # per-component std, E|entry|^2 = 1/(2N)
    blocks = rng.standard_normal((4, N, M))
    P = sigma * (blocks[0] + 1j * blocks[1])
    Q = sigma * (blocks[2] + 1j * blocks[3])
    sp = np.sqrt(1.0 + params.tau)
    sq = np.sqrt(1.0 - params.tau)
    return MatrixPair(X1=sp * P + sq * Q, X2=sp * P - sq * Q)


def _eigvals(mat, seed):
    try:
        return np.linalg.eigvals(mat)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}", seed) from exc


def wishart_eigs(params: EnsembleParams, seed: SeedSpec) -> SpectrumSample:
    """Spectrum of the N x N product X = X1 X2^*."""
    pair = sample_ginibre_pair(params, seed)
    X = pair.X1 @ pair.X2.conj().T
    eigs = _eigvals(X, seed)
    return SpectrumSample("wishart", eigs, 0, seed, params)


def dirac_eigs(params: EnsembleParams, seed: SeedSpec) -> SpectrumSample:
    """Nonzero Dirac eigenvalues via the square-root map.

    The 2N nonzero eigenvalues are +/- sqrt of the Wishart eigenvalues
    (principal branch for the + representative); the (2N+nu) matrix is never
    formed.  The nu zero modes are reported in zero_mode_count.
    """
    ws = wishart_eigs(params, seed)
    roots = np.sqrt(ws.eigenvalues.astype(complex))
    eigs = np.concatenate([roots, -roots])
    return SpectrumSample("dirac", eigs, int(params.nu), seed, params)


def dirac_eigs_direct(params: EnsembleParams, seed: SeedSpec) -> SpectrumSample:
    """Full eigendecomposition of the explicit (2N+nu) Dirac matrix.

    Small-N oracle for the square-root map; N is capped to keep the cube
    affordable.
    """
    _require_sampling_nu(params)
    if params.N > 400:
        raise ValueError("dirac_eigs_direct is an oracle for N <= 400")
    pair = sample_ginibre_pair(params, seed)
    N = params.N
    M = N + int(params.nu)
    D = np.zeros((N + M, N + M), dtype=complex)
    D[:N, N:] = pair.X1
    D[N:, :N] = pair.X2.conj().T
    eigs = _eigvals(D, seed)
    return SpectrumSample("dirac_direct", eigs, int(params.nu), seed, params)


def spectrum_to_csv(samples, path, include_zero_modes=False, float_format="%.17g"):
    """Write samples as CSV rows `re,im,kind,trial`.

    Zero modes are emitted as literal (0,0) rows only on request.
    """
    with open(path, "w") as fh:
        fh.write("re,im,kind,trial\n")
        for trial, sample in enumerate(samples):
            for z in sample.eigenvalues:
                fh.write(
                    f"{float_format % z.real},{float_format % z.imag},{sample.kind},{trial}\n"
                )
            if include_zero_modes and sample.kind == "dirac":
                for _ in range(sample.zero_mode_count):
                    fh.write(f"0,0,{sample.kind},{trial}\n")

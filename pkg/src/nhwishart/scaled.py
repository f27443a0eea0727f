"""Complex values stored as (log magnitude, phase).

The finite-N kernels pair factors like nu^{nu/2+1} against Bessel values of
size e^{-c nu}; neither end survives float64 on its own, so every such factor
is carried as (log|w|, arg w) and only O(1) end results are converted back to
plain complex.  Fields may be scalars or numpy arrays of a common shape; all
operations are elementwise.

Phase convention: wrapped to (-pi, pi].  Zero is encoded as log_mag = -inf
(phase canonically 0) and is absorbing under multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ScaledComplex", "scaled_value", "RunningSum", "scaled_sum", "wrap_phase"]

_NEG_INF = -np.inf


def wrap_phase(p):
    """Wrap angles to the canonical interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(p, dtype=float), 2.0 * np.pi)


def _as_parts(w):
    """(log_mag, phase) of a plain complex scalar/array."""
    w = np.asarray(w, dtype=complex)
    mag = np.abs(w)
    with np.errstate(divide="ignore"):
        lm = np.where(mag > 0.0, np.log(np.where(mag > 0.0, mag, 1.0)), _NEG_INF)
    ph = np.where(mag > 0.0, np.angle(w), 0.0)
    if w.ndim == 0:
        return float(lm), float(ph)
    return lm, ph


@dataclass(frozen=True)
class ScaledComplex:
    """A complex number w = exp(log_mag) * exp(i phase)."""

    log_mag: object
    phase: object

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_complex(cls, w):
        lm, ph = _as_parts(w)
        return _collapse(lm, wrap_phase(ph))

    @classmethod
    def zero(cls):
        return cls(_NEG_INF, 0.0)

    @classmethod
    def one(cls):
        return cls(0.0, 0.0)

    # -- conversions -------------------------------------------------------

    def to_complex(self):
        lm = np.asarray(self.log_mag, dtype=float)
        with np.errstate(over="ignore"):
            out = np.exp(lm + 1j * np.asarray(self.phase, dtype=float))
        out = np.where(np.isneginf(lm), 0.0 + 0.0j, out)
        if out.ndim == 0:
            return complex(out)
        return out

    @property
    def is_zero(self):
        return np.isneginf(np.asarray(self.log_mag, dtype=float))

    # -- algebra -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ScaledComplex):
            return other
        return ScaledComplex.from_complex(other)

    def __mul__(self, other):
        o = self._coerce(other)
        lm = np.asarray(self.log_mag, dtype=float) + np.asarray(o.log_mag, dtype=float)
        # -inf + inf is nan; any -inf factor makes the product zero
        zero = np.isneginf(np.asarray(self.log_mag, dtype=float)) | np.isneginf(
            np.asarray(o.log_mag, dtype=float)
        )
        lm = np.where(zero, _NEG_INF, lm)
        ph = np.where(zero, 0.0, wrap_phase(np.asarray(self.phase) + np.asarray(o.phase)))
        return _collapse(lm, ph)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if np.any(np.isneginf(np.asarray(o.log_mag, dtype=float))):
            raise ZeroDivisionError("division by scaled zero")
        lm = np.asarray(self.log_mag, dtype=float) - np.asarray(o.log_mag, dtype=float)
        zero = np.isneginf(np.asarray(self.log_mag, dtype=float))
        lm = np.where(zero, _NEG_INF, lm)
        ph = np.where(zero, 0.0, wrap_phase(np.asarray(self.phase) - np.asarray(o.phase)))
        return _collapse(lm, ph)

    def __pow__(self, p):
        """Real power using the canonical phase branch."""
        lm = np.asarray(self.log_mag, dtype=float) * p
        zero = np.isneginf(np.asarray(self.log_mag, dtype=float))
        lm = np.where(zero, _NEG_INF, lm)
        ph = np.where(zero, 0.0, wrap_phase(np.asarray(self.phase) * p))
        return _collapse(lm, ph)

    def conj(self):
        return _collapse(np.asarray(self.log_mag, dtype=float), wrap_phase(-np.asarray(self.phase)))

    def __neg__(self):
        return _collapse(
            np.asarray(self.log_mag, dtype=float),
            np.where(self.is_zero, 0.0, wrap_phase(np.asarray(self.phase) + np.pi)),
        )

    def __add__(self, other):
        o = self._coerce(other)
        la = np.asarray(self.log_mag, dtype=float)
        lb = np.asarray(o.log_mag, dtype=float)
        m = np.maximum(la, lb)
        both_zero = np.isneginf(m)
        msafe = np.where(both_zero, 0.0, m)
        ta = np.where(np.isneginf(la), 0.0, np.exp(la - msafe + 1j * np.asarray(self.phase)))
        tb = np.where(np.isneginf(lb), 0.0, np.exp(lb - msafe + 1j * np.asarray(o.phase)))
        s = ta + tb
        mag = np.abs(s)
        vanished = (mag == 0.0) | both_zero
        with np.errstate(divide="ignore"):
            lm = np.where(vanished, _NEG_INF, msafe + np.log(np.where(mag > 0, mag, 1.0)))
        ph = np.where(vanished, 0.0, np.angle(s))
        return _collapse(lm, ph)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def abs(self):
        """Modulus as a ScaledComplex (phase 0)."""
        return _collapse(np.asarray(self.log_mag, dtype=float), np.zeros_like(np.asarray(self.phase, dtype=float)))


def _collapse(lm, ph):
    """Build a ScaledComplex, demoting 0-d arrays to python floats."""
    lm = np.asarray(lm, dtype=float)
    ph = np.asarray(ph, dtype=float)
    if lm.ndim == 0:
        return ScaledComplex(float(lm), float(ph))
    return ScaledComplex(lm, ph)


def scaled_value(log_magnitude, phase) -> ScaledComplex:
    """Canonical constructor: wraps the phase to (-pi, pi].

    -inf log magnitude encodes zero (phase then ignored); otherwise the phase
    must be finite.
    """
    lm = np.asarray(log_magnitude, dtype=float)
    ph = np.asarray(phase, dtype=float)
    zero = np.isneginf(lm)
    if not np.all(np.isfinite(ph) | zero):
        raise ValueError("phase must be finite unless log_magnitude is -inf")
    if np.any(np.isposinf(lm)) or np.any(np.isnan(lm)):
        raise ValueError("log_magnitude must be finite or -inf")
    return _collapse(np.where(zero, _NEG_INF, lm), np.where(zero, 0.0, wrap_phase(ph)))


def scaled_sum(log_mag, phase, axis=None) -> ScaledComplex:
    """Max-factored sum of scaled terms exp(log_mag + i phase) along axis."""
    lm = np.asarray(log_mag, dtype=float)
    ph = np.asarray(phase, dtype=float)
    m = np.max(lm, axis=axis, keepdims=True) if lm.size else np.asarray(_NEG_INF)
    msafe = np.where(np.isneginf(m), 0.0, m)
    terms = np.where(np.isneginf(lm), 0.0, np.exp(lm - msafe + 1j * ph))
    s = np.sum(terms, axis=axis)
    mag = np.abs(s)
    mkeep = np.squeeze(msafe, axis=axis) if axis is not None else np.reshape(msafe, ())
    dead = (mag == 0.0) | np.isneginf(np.max(lm, axis=axis) if lm.size else np.asarray(_NEG_INF))
    with np.errstate(divide="ignore"):
        out_lm = np.where(dead, _NEG_INF, mkeep + np.log(np.where(mag > 0, mag, 1.0)))
    out_ph = np.where(dead, 0.0, np.angle(s))
    return _collapse(out_lm, out_ph)


class RunningSum:
    """Streaming sum of scaled terms: value = mantissa * exp(scale).

    Terms are added in caller order (no reordering); the complex mantissa is
    renormalised whenever it drifts far from O(1), so arbitrarily large or
    small term scales are safe.  Works elementwise on arrays of a fixed shape.
    """

    def __init__(self, shape=()):
        self._scale = np.full(shape, _NEG_INF, dtype=float)
        self._val = np.zeros(shape, dtype=complex)

    def add_parts(self, log_mag, phase):
        lm = np.broadcast_to(np.asarray(log_mag, dtype=float), self._scale.shape)
        ph = np.broadcast_to(np.asarray(phase, dtype=float), self._scale.shape)
        live = ~np.isneginf(lm)
        if not np.any(live):
            return
        higher = live & (lm > self._scale + 35.0)
        # term dwarfs the accumulated value: rescale accumulator first
        if np.any(higher):
            shift = np.where(higher, self._scale - lm, 0.0)
            self._val = self._val * np.exp(np.where(np.isfinite(shift), shift, -np.inf))
            self._val = np.where(np.isnan(self._val), 0.0, self._val)
            self._scale = np.where(higher, lm, self._scale)
        rel = lm - self._scale
        contrib = np.where(live & np.isfinite(rel), np.exp(np.clip(rel, -745.0, 50.0) + 1j * ph), 0.0)
        # fresh accumulator (scale still -inf) takes the term as its scale
        fresh = live & np.isneginf(self._scale)
        if np.any(fresh):
            self._scale = np.where(fresh, lm, self._scale)
            contrib = np.where(fresh, np.exp(1j * ph), contrib)
        self._val = self._val + contrib
        big = np.abs(self._val) > 1e40
        if np.any(big):
            mag = np.where(big, np.abs(self._val), 1.0)
            self._scale = self._scale + np.log(mag)
            self._val = self._val / mag

    def add(self, term: ScaledComplex):
        self.add_parts(term.log_mag, term.phase)

    def value(self) -> ScaledComplex:
        mag = np.abs(self._val)
        dead = (mag == 0.0) | np.isneginf(self._scale)
        with np.errstate(divide="ignore"):
            lm = np.where(dead, _NEG_INF, self._scale + np.log(np.where(mag > 0, mag, 1.0)))
        ph = np.where(dead, 0.0, np.angle(self._val))
        return _collapse(lm, ph)

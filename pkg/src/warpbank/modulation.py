"""Cosine modulation of a lowpass prototype into channel filters.

All channel filters derive from one real linear-phase prototype h of even
length N = 2*m*M.  Analysis filter k is

    h_k[n] = 2 h[n] cos((2k+1) pi/(2M) (n - (N-1)/2) + (-1)^k pi/4)

and the synthesis filter flips the sign of the pi/4 offset, which makes
f_k[n] = h_k[N-1-n].
"""

from dataclasses import dataclass

import numpy as np

from .allpass import allpass_phase


@dataclass
class PrototypeHalf:
    """Free half of the symmetric prototype: coeffs holds h[N/2] .. h[N-1].

    The full impulse response mirrors it, h[n] = h[N-1-n].  Length must be a
    multiple of the channel count (so N = 2*m*M for integer m >= 1).
    """

    coeffs: np.ndarray
    channels: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("prototype half must be a nonempty 1-D array")
        if int(self.channels) < 1:
            raise ValueError("channel count must be >= 1")
        self.channels = int(self.channels)
        if self.coeffs.size % self.channels != 0:
            raise ValueError(
                "half length %d is not a multiple of %d channels"
                % (self.coeffs.size, self.channels)
            )

    @property
    def order(self):
        return 2 * self.coeffs.size

    def full(self):
        """Full-length symmetric impulse response."""
        return np.concatenate([self.coeffs[::-1], self.coeffs])

    @classmethod
    def from_full(cls, h, channels):
        h = np.asarray(h, dtype=float)
        if h.ndim != 1 or h.size % 2:
            raise ValueError("full prototype must be 1-D with even length")
        scale = np.max(np.abs(h)) or 1.0
        if np.max(np.abs(h - h[::-1])) > 1e-12 * scale:
            raise ValueError("full prototype is not symmetric")
        return cls(h[h.size // 2:], channels)


@dataclass
class ChannelFilters:
    """Analysis and synthesis banks as (M, N) coefficient matrices."""

    analysis: np.ndarray
    synthesis: np.ndarray


def modulation_constants(channels, order):
    """Per-channel unit-modulus modulation constants.

    Returns (a, b, w) with a_k = exp(j*(-1)^k pi/4),
    b_k = w^((k+0.5)(N-1)/2) for w = exp(-j pi/M).
    """
    k = np.arange(channels)
    a = np.exp(1j * ((-1.0) ** k) * np.pi / 4)
    b = np.exp(-1j * np.pi * (k + 0.5) * (order - 1) / (2 * channels))
    w = np.exp(-1j * np.pi / channels)
    return a, b, w


def modulate(prototype):
    """Expand a prototype into the M analysis and synthesis filters.

    Parameters
    ----------
    prototype : PrototypeHalf

    Returns
    -------
    ChannelFilters
        Real (M, N) matrices; synthesis rows are time-reversed analysis rows.
    """
    M = prototype.channels
    h = prototype.full()
    N = prototype.order
    n = np.arange(N)
    k = np.arange(M)[:, None]
    arg = (2 * k + 1) * np.pi / (2 * M) * (n - (N - 1) / 2)
    offs = ((-1.0) ** k) * (np.pi / 4)
    return ChannelFilters(
        analysis=2.0 * h * np.cos(arg + offs),
        synthesis=2.0 * h * np.cos(arg - offs),
    )


def cosine_basis(omega, order):
    """Half-filter cosine stack [2 cos((2i+1) omega/2)], i = 0 .. N/2-1.

    With the linear-phase factor split off, the prototype response is
    exp(-j(N-1)omega/2) * cosine_basis(omega, N) @ half.  Accepts scalar or
    array omega; the basis index runs along the last axis.
    """
    order = int(order)
    if order < 2 or order % 2:
        raise ValueError("order must be even and positive")
    w = np.asarray(omega, dtype=float)
    halves = np.arange(1, order, 2) / 2.0
    return 2.0 * np.cos(np.multiply.outer(w, halves))


def _half_response(coeffs, x):
    # frequency response of the symmetric filter at angle x, any real x
    N = 2 * coeffs.size
    return np.exp(-1j * (N - 1) * np.asarray(x, float) / 2.0) * (
        cosine_basis(x, N) @ coeffs
    )


def prototype_response(prototype, omega):
    """Complex frequency response of the (unwarped) prototype at omega."""
    scalar_in = np.isscalar(omega)
    r = _half_response(prototype.coeffs, omega)
    return complex(r) if scalar_in else r


def channel_response_warped(prototype, channel, omega, alpha, synthesis=False):
    """Frequency response of warped channel filter at physical frequency omega.

    Evaluates the channel filter with every delay replaced by the warping
    allpass, i.e. sum_n h_k[n] A(e^{j omega})^n.  Equals the uniform channel
    response looked up at the warped frequency nu = warp(omega):

        a_k b_k H(e^{j(nu - c_k)}) + conj(a_k b_k) H(e^{j(nu + c_k)})

    with c_k = pi(k+0.5)/M; the synthesis filter conjugates a_k only.

    Parameters
    ----------
    prototype : PrototypeHalf
    channel : int
    omega : float or array_like
        Physical angular frequency, any real value (alias images included).
    alpha : float
    synthesis : bool
        Evaluate f_k instead of h_k.
    """
    M = prototype.channels
    if not 0 <= channel < M:
        raise ValueError("channel %d out of range for %d channels" % (channel, M))
    scalar_in = np.isscalar(omega)
    a, b, _ = modulation_constants(M, prototype.order)
    c1 = (np.conj(a[channel]) if synthesis else a[channel]) * b[channel]
    nu = -allpass_phase(omega, alpha)
    c = np.pi * (channel + 0.5) / M
    r = c1 * _half_response(prototype.coeffs, nu - c) + np.conj(c1) * _half_response(
        prototype.coeffs, nu + c
    )
    return complex(r) if scalar_in else r

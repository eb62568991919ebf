"""Sample-domain execution of the warped analysis/synthesis chain.

The analysis bank shares one tapped cascade of first-order allpass sections
(the warped delay line); channel outputs are inner products of the tap vector
with the modulated coefficients.  Synthesis runs the mirrored structure per
channel after zero-insert upsampling.  Sections realize

    (z^-1 - alpha) / (1 - alpha z^-1)

which matches the analytic warping phase; with alpha = 0 the line degenerates
to an ordinary FIR delay line.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .modulation import modulate

_BLOCK = 1 << 16


@dataclass
class SubbandFrame:
    """Decimated output of one analysis channel."""

    channel: int
    samples: np.ndarray
    ratio: int
    phase: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)


class AllpassLine:
    """Tapped cascade of n_taps-1 allpass sections for warp coefficient alpha.

    tap 0 is the current input; tap n is the input filtered through n
    sections.  Sections carry coefficient -alpha so the cascade realizes the
    warped delay line (see module docstring); state persists across calls.
    """

    def __init__(self, alpha, n_taps):
        if not abs(float(alpha)) < 1.0:
            raise ValueError("|alpha| < 1 required")
        if int(n_taps) < 1:
            raise ValueError("need at least one tap")
        self.alpha = float(alpha)
        self.n_taps = int(n_taps)
        self.state = np.zeros(self.n_taps - 1)

    def reset(self):
        self.state[:] = 0.0

    def step(self, x):
        """Advance one sample; returns the full tap vector."""
        a = -self.alpha
        taps = np.empty(self.n_taps)
        taps[0] = x
        for i in range(1, self.n_taps):
            y = a * taps[i - 1] + self.state[i - 1]
            self.state[i - 1] = taps[i - 1] - a * y
            taps[i] = y
        return taps


def _section_coeffs(alpha):
    # transfer (z^-1 - alpha)/(1 - alpha z^-1); lfilter zi equals the
    # transposed direct form II state used by AllpassLine.step
    return np.array([-alpha, 1.0]), np.array([1.0, -alpha])


def _design_filters(design):
    filters = modulate(design.prototype_half())
    return filters.analysis, filters.synthesis


def analyze(design, signal):
    """Split a signal into decimated subband frames.

    Parameters
    ----------
    design : BankDesign
    signal : array_like
        Real 1-D signal; must be nonempty.

    Returns
    -------
    list of SubbandFrame
        Frame k holds every subsampling[k]-th sample (offset 0) of the
        warped channel-k filter output, length ceil(len(signal)/S_k).
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("signal must be a nonempty 1-D array")
    ha, _ = _design_filters(design)
    M, N = ha.shape
    b, a = _section_coeffs(design.alpha)
    y = np.empty((M, x.size))
    zi = np.zeros((N - 1, 1))
    for start in range(0, x.size, _BLOCK):
        blk = x[start : start + _BLOCK]
        taps = np.empty((N, blk.size))
        taps[0] = blk
        for n in range(1, N):
            taps[n], zi[n - 1] = lfilter(b, a, taps[n - 1], zi=zi[n - 1])
        y[:, start : start + _BLOCK] = ha @ taps
    return [
        SubbandFrame(k, y[k, :: design.subsampling[k]].copy(), int(design.subsampling[k]))
        for k in range(M)
    ]


def synthesize(design, frames):
    """Rebuild a signal from subband frames.

    Frames are upsampled by zero insertion at their stated phase, scaled by
    the ratio (the decimate/upsample pair is gain 1/S otherwise), run through
    the warped synthesis filters and summed.  Output length is the largest
    upsampled channel length.
    """
    M = design.channels
    if len(frames) != M:
        raise ValueError("expected %d frames, got %d" % (M, len(frames)))
    order = sorted(frames, key=lambda f: f.channel)
    if [f.channel for f in order] != list(range(M)):
        raise ValueError("frames must cover channels 0..%d exactly once" % (M - 1))
    for f in order:
        if f.ratio != design.subsampling[f.channel]:
            raise ValueError(
                "frame %d ratio %d does not match design ratio %d"
                % (f.channel, f.ratio, design.subsampling[f.channel])
            )
        if not 0 <= f.phase < f.ratio:
            raise ValueError("frame %d phase out of range" % f.channel)
    _, fs = _design_filters(design)
    M, N = fs.shape
    b, a = _section_coeffs(design.alpha)
    length = max(f.phase + f.samples.size * f.ratio for f in order)
    out = np.zeros(length)
    zi = np.zeros((N - 1, M, 1))
    for start in range(0, length, _BLOCK):
        stop = min(start + _BLOCK, length)
        u = np.zeros((M, stop - start))
        for f in order:
            s = f.ratio
            first = f.phase if start <= f.phase else start + (-(start - f.phase)) % s
            if first >= stop:
                continue
            src = (first - f.phase) // s
            count = (stop - 1 - first) // s + 1
            count = min(count, f.samples.size - src)
            if count > 0:
                u[f.channel, first - start :: s][:count] = (
                    f.samples[src : src + count] * s
                )
        out[start:stop] = fs[:, 0] @ u
        stage = u
        for n in range(1, N):
            stage, zi[n - 1] = lfilter(b, a, stage, axis=-1, zi=zi[n - 1])
            out[start:stop] += fs[:, n] @ stage
    return out


def process_signal(design, signal, gains_db=None):
    """Full analysis-synthesis pass, output trimmed to the input length.

    gains_db applies a per-channel gain in dB between analysis and synthesis
    (-inf silences a channel).
    """
    x = np.asarray(signal, dtype=float)
    frames = analyze(design, x)
    if gains_db is not None:
        gains_db = np.asarray(gains_db, dtype=float)
        if gains_db.shape != (design.channels,):
            raise ValueError("need one gain per channel")
        for f in frames:
            f.samples = f.samples * 10.0 ** (gains_db[f.channel] / 20.0)
    y = synthesize(design, frames)
    if y.size < x.size:
        y = np.pad(y, (0, x.size - y.size))
    return y[: x.size]


def measure_response(design, probe_freqs, settle=None, window=8192):
    """Measure |T_all| at probe frequencies by running sines through the bank.

    Each probe feeds a unit sine, discards a settle transient of
    4*N*max(S) samples (default), and reads the steady-state amplitude by
    Hann-windowed quadrature correlation.  Returns magnitudes in dB.  Probes
    at (or numerically touching) 0 or pi are rejected: the correlation
    cannot separate the conjugate line there.
    """
    freqs = np.atleast_1d(np.asarray(probe_freqs, dtype=float))
    bad = [float(f) for f in freqs if f <= 1e-9 or f >= np.pi - 1e-9]
    if bad:
        raise ValueError("probe frequencies too close to 0 or pi: %r" % bad)
    if settle is None:
        settle = 4 * design.order * int(design.subsampling.max())
    settle = int(settle)
    window = int(window)
    win = np.hanning(window)
    norm = 0.5 * win.sum()
    n = np.arange(settle + window)
    out = np.empty(freqs.size)
    for i, w in enumerate(freqs):
        y = process_signal(design, np.sin(w * n))
        z = np.sum(win * y[settle:] * np.exp(-1j * w * n[settle:]))
        out[i] = 20.0 * np.log10(abs(z) / norm)
    return out

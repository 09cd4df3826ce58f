"""Orthogonal periodic discrete wavelet transform with the Symmlet-8 filter."""
import numpy as np

from ..errors import BadLength

# Least-asymmetric Daubechies scaling filter with 8 vanishing moments
# (reconstruction low-pass, sums to sqrt(2)).
SYM8 = np.array([
    0.0018899503327594609,
    -0.0003029205147213668,
    -0.01495225833704823,
    0.003808752013890615,
    0.049137179673607506,
    -0.027219029917056003,
    -0.05194583810770904,
    0.3644418948353314,
    0.7771857517005235,
    0.4813596512583722,
    -0.061273359067658524,
    -0.1432942383508097,
    0.007607487324917605,
    0.03169508781149298,
    -0.0005421323317911481,
    -0.0033824159510061256,
])


def quadrature_mirror(h):
    """Wavelet (high-pass) filter ``g_k = (-1)^k h_{L-1-k}``."""
    k = np.arange(h.size)
    return (-1.0) ** k * h[::-1]


def max_levels(length):
    """Deepest decomposition allowed for ``length``: ``log2(length) - 3``."""
    return int(np.log2(length)) - 3


def _check(length, levels):
    if length < 2 or length & (length - 1):
        raise BadLength(f"length must be a power of two, got {length}")
    if not 0 <= levels <= max_levels(length):
        raise BadLength(f"levels must lie in [0, {max_levels(length)}] for length {length}")


def _gather_index(n, taps):
    # Alignment matches the common "periodization" convention.
    shift = -(taps // 2 - 1)
    return (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :] + shift) % n


def _analysis(a, h, g):
    idx = _gather_index(a.size, h.size)
    seg = a[idx]
    return seg @ h, seg @ g


def _synthesis(approx, detail, h, g):
    n = 2 * approx.size
    idx = _gather_index(n, h.size)
    out = np.zeros(n)
    np.add.at(out, idx, approx[:, None] * h[None, :] + detail[:, None] * g[None, :])
    return out


def dwt(v, levels=None, filt=SYM8):
    """Forward transform; returns ``[a_J, d_J, d_{J-1}, ..., d_1]`` concatenated.

    ``levels`` defaults to the deepest allowed decomposition. The output
    has the input's length and norm.
    """
    v = np.asarray(v, dtype=np.float64).ravel()
    levels = max_levels(v.size) if levels is None else int(levels)
    _check(v.size, levels)
    h = np.asarray(filt, dtype=np.float64)
    g = quadrature_mirror(h)
    details = []
    a = v
    for _ in range(levels):
        a, d = _analysis(a, h, g)
        details.append(d)
    return np.concatenate([a] + details[::-1])


def idwt(coeffs, levels=None, filt=SYM8):
    """Inverse of :func:`dwt`."""
    c = np.asarray(coeffs, dtype=np.float64).ravel()
    levels = max_levels(c.size) if levels is None else int(levels)
    _check(c.size, levels)
    h = np.asarray(filt, dtype=np.float64)
    g = quadrature_mirror(h)
    size = c.size >> levels
    a = c[:size]
    while size < c.size:
        a = _synthesis(a, c[size:2 * size], h, g)
        size *= 2
    return a


def dwt_symmlet8(v, levels=None):
    return dwt(v, levels, SYM8)

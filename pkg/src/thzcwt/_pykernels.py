"""Pure numpy fallback for the correlation kernel in ``_ckernels.pyx``.

Both backends accumulate the taps in the same order, so for the same inputs
they agree to the last bit on platforms without fused multiply-add.
"""
import numpy as np


def correlate(padded, pad, n, kernels, half, norm, stride):
    """Strided correlation of padded rows with a bank of centered kernels.

    Parameters
    ----------
    padded : (m, n + 2*pad) float64
        Signals already extended at both ends by ``pad`` samples.
    kernels : (s, 2*M + 1) float64
        Kernel tables; row ``i`` holds ``psi(k / a_i)`` at column ``M + k``.
    half : (s,) intp
        Largest tap offset used by each kernel (``half[i] <= M <= pad``).
    norm : (s,) float64
        Per-scale output factor (``1 / sqrt(a)``).

    Returns
    -------
    (m, s, ceil(n / stride)) float64
    """
    m = padded.shape[0]
    s, width = kernels.shape
    centre = (width - 1) // 2
    nb = -(-n // stride)
    out = np.empty((m, s, nb))
    for si in range(s):
        h = int(half[si])
        acc = np.zeros((m, nb))
        for k in range(-h, h + 1):
            start = pad + k
            acc += kernels[si, centre + k] * padded[:, start:start + n:stride]
        out[:, si, :] = acc * norm[si]
    return out

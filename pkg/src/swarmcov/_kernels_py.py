"""Pure-numpy fallback for the hot basis-evaluation kernels.

Same signatures as the compiled module ``_kernels_cy``; selected at import
time by ``_kernels`` when the extension is unavailable or explicitly
disabled. All inputs are float64 C-contiguous arrays:

    points  (P, v)   sample positions inside the domain box
    freq    (M, v)   per-coefficient angular factors k_d * pi / L_d
    hinv    (M,)     reciprocal basis normalizations
    weights (M,)     per-coefficient scalar weights
"""

import numpy as np


def basis_block(points, freq, hinv):
    """Basis values for every coefficient at every point, shape (P, M)."""
    # (P, 1, v) * (1, M, v) -> cos -> product over v
    c = np.cos(points[:, None, :] * freq[None, :, :])
    return c.prod(axis=2) * hinv[None, :]


def basis_grad_block(points, freq, hinv):
    """Spatial gradient of every basis value, shape (P, M, v)."""
    ang = points[:, None, :] * freq[None, :, :]
    c = np.cos(ang)
    s = np.sin(ang)
    out = np.empty(ang.shape)
    for d in range(points.shape[1]):
        rest = np.delete(c, d, axis=2).prod(axis=2)
        out[:, :, d] = -freq[None, :, d] * s[:, :, d] * rest
    return out * hinv[None, :, None]


def weighted_grad_sum(points, weights, freq, hinv):
    """Weight-contracted basis gradients, shape (P, v)."""
    grads = basis_grad_block(points, freq, hinv)
    return np.einsum("pmv,m->pv", grads, weights)


def traj_coeffs(points, freq, hinv):
    """Mean basis row over the points, shape (M,)."""
    return basis_block(points, freq, hinv).mean(axis=0)

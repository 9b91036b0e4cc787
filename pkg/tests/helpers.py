"""Shared test utilities: independent oracles kept deliberately dumb."""

import numpy as np


def finite_difference(loss_fn, params: dict[str, np.ndarray], step: float = 1e-5) -> dict[str, np.ndarray]:
    """Central finite differences of ``loss_fn()`` w.r.t. every entry of the
    given parameter arrays, which are perturbed in place and restored."""
    grads = {}
    for name, arr in params.items():
        flat = arr.ravel()
        g = np.zeros(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_fn()
            flat[i] = orig - step
            down = loss_fn()
            flat[i] = orig
            g[i] = (up - down) / (2.0 * step)
        grads[name] = g.reshape(arr.shape)
    return grads


def pair_count_auc(real_scores, fake_scores) -> float:
    """Exhaustive pair counting: wins 1, ties 0.5."""
    total = 0.0
    for f in fake_scores:
        for r in real_scores:
            if f > r:
                total += 1.0
            elif f == r:
                total += 0.5
    return total / (len(real_scores) * len(fake_scores))

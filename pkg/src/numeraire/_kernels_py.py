"""Pure numpy implementations of the hot loops (fallback for the compiled core)."""

import numpy as np


def em_steps(P, q, lam, steps, tol):
    """Run up to ``steps`` multiplicative updates ``lam_i <- lam_i * r_i``.

    ``r_i = sum_j q_j P_ij / p_j`` with ``p = lam @ P``.  Stops early once
    ``max_i r_i - 1 <= tol``.  Returns ``(lam, done, residual, trace)`` where
    ``trace`` holds the objective ``sum_j q_j log(q_j / p_j)`` at every
    visited iterate.
    """
    P = np.ascontiguousarray(P, dtype=float)
    q = np.ascontiguousarray(q, dtype=float)
    lam = np.array(lam, dtype=float)
    logq = np.log(q)
    trace = np.empty(steps + 1)
    done = 0
    while True:
        p = lam @ P
        trace[done] = float(np.sum(q * (logq - np.log(p))))
        r = P @ (q / p)
        residual = float(r.max() - 1.0)
        if residual <= tol or done == steps:
            break
        lam = lam * r
        lam /= lam.sum()
        done += 1
    return lam, done, residual, trace[:done + 1].copy()


def _compositions(n, K):
    """All integer vectors of length ``n`` with nonnegative entries summing to ``K``."""
    if n == 1:
        return np.array([[K]], dtype=np.int64)
    if n == 2:
        k = np.arange(K + 1, dtype=np.int64)
        return np.stack([k, K - k], axis=1)
    blocks = []
    for first in range(K + 1):
        rest = _compositions(n - 1, K - first)
        blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
    return np.vstack(blocks)


def simplex_grid_search(P, q, K):
    """Maximize ``sum_j q_j log((lam @ P)_j)`` over ``lam`` on the grid ``{k / K}``.

    Returns ``(best_lam, best_value)``.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    n = P.shape[0]
    best_val, best_lam = -np.inf, None
    if n <= 2:
        chunks = [_compositions(n, K)]
    else:
        chunks = ((np.hstack([np.full((r.shape[0], 1), f, dtype=np.int64), r]))
                  for f in range(K + 1) for r in [_compositions(n - 1, K - f)])
    with np.errstate(divide="ignore"):
        for comp in chunks:
            lam = comp / K
            vals = np.log(lam @ P) @ q
            i = int(np.argmax(vals))
            if vals[i] > best_val or best_lam is None:
                best_val, best_lam = float(vals[i]), lam[i].copy()
    return best_lam, best_val

"""Shared simplex maximization with fixed jittered restarts."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .rng import Xoshiro256


def maximize(objective, x0, n_restarts=3, jitter_scale=0.25, seed_base=90210,
             maxiter_per_dim=400):
    """Maximize ``objective`` by Nelder-Mead from ``x0`` plus jittered restarts.

    The restart offsets are drawn from the in-package generator with fixed
    seeds, so the whole search is deterministic.  The best vertex is polished
    with a second, tighter simplex pass.  Returns ``(x, fmax, diagnostics)``;
    ``diagnostics['converged']`` is False only when every pass hit its
    iteration cap.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size

    def neg(x):
        val = objective(x)
        if not np.isfinite(val):
            return 1e12
        return -val

    starts = [x0]
    for k in range(n_restarts):
        rng = Xoshiro256(seed_base + k)
        starts.append(x0 + jitter_scale * rng.normals(n))

    runs = []
    best = None
    for xs in starts:
        res = minimize(neg, xs, method="Nelder-Mead",
                       options={"maxiter": maxiter_per_dim * n,
                                "xatol": 1e-6, "fatol": 1e-8})
        runs.append({"fun": float(res.fun), "nit": int(res.nit),
                     "success": bool(res.success)})
        if best is None or res.fun < best.fun:
            best = res

    polish = minimize(neg, best.x, method="Nelder-Mead",
                      options={"maxiter": 2 * maxiter_per_dim * n,
                               "xatol": 1e-9, "fatol": 1e-11})
    runs.append({"fun": float(polish.fun), "nit": int(polish.nit),
                 "success": bool(polish.success)})
    if polish.fun <= best.fun:
        best = polish

    diagnostics = {
        "converged": any(r["success"] for r in runs),
        "n_evaluations": sum(r["nit"] for r in runs),
        "runs": runs,
        "loglik": -float(best.fun),
    }
    return np.asarray(best.x, dtype=float), -float(best.fun), diagnostics

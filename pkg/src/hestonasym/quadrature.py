"""Globally adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands."""

from __future__ import annotations

import numpy as np

from .errors import SubdivisionExhausted

# Kronrod 15-point nodes on [0, 1] (symmetric), the last one is the centre
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# 7-point Gauss weights on the nodes _XGK[1], _XGK[3], _XGK[5], _XGK[7]
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]


def gk15(f, a, b):
    """Apply the 7/15 rule on each panel [a_i, b_i].

    ``f`` maps a 1-d array of abscissae to values of shape ``(n,)`` or
    ``(n, m)``.  Returns the Kronrod estimates and ``|K15 - G7|`` per panel
    (shape ``(panels,)`` or ``(panels, m)``).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = centre[:, None] + half[:, None] * NODES[None, :]
    vals = np.asarray(f(pts.ravel()))
    vals = vals.reshape(pts.shape + vals.shape[1:])
    kron = np.tensordot(KRONROD_WEIGHTS, vals, axes=([0], [1]))
    gauss = np.tensordot(GAUSS_WEIGHTS, vals, axes=([0], [1]))
    scale = half.reshape(half.shape + (1,) * (kron.ndim - 1))
    return kron * scale, np.abs(kron - gauss) * scale


def adaptive_integrate(f, a: float, b: float, *, abs_tol: float = 1e-10,
                       rel_tol: float = 1e-10, max_subdivisions: int = 2000,
                       initial_panels: int = 8):
    """Integrate ``f`` over [a, b] by repeated bisection of the worst panels.

    Convergence is declared per component when the summed error estimate is
    below ``max(abs_tol, rel_tol*|I|)``.  Returns ``(integral, error, panels)``.
    """
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    est, err = gk15(f, lo, hi)
    while True:
        total = est.sum(axis=0)
        tol = np.maximum(abs_tol, rel_tol * np.abs(total))
        panel_err = err / tol if err.ndim == 1 else (err / tol[None, :]).max(axis=1)
        if panel_err.sum() <= 1.0:
            return total, err.sum(axis=0), lo.size
        if lo.size >= max_subdivisions:
            raise SubdivisionExhausted(
                f"{lo.size} panels used, error/tolerance still {panel_err.sum():.3g}"
            )
        # split the worst panel and every panel above its share of the budget
        share = 1.0 / lo.size
        split = panel_err > share
        split[np.argmax(panel_err)] = True
        room = max_subdivisions - lo.size
        if split.sum() > room:
            order = np.argsort(panel_err)[::-1][:room]
            split[:] = False
            split[order] = True
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        new_est, new_err = gk15(f, new_lo, new_hi)
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        est = np.concatenate([est[keep], new_est])
        err = np.concatenate([err[keep], new_err])

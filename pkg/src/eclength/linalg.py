"""Extended-precision linear algebra for the test pipeline.

Verdicts next to a critical length hinge on quantities that vanish
quadratically while the surrounding systems approach rank deficiency, so
double precision runs out of headroom exactly where accuracy matters.  The
hot path (endpoint condition nullspaces, knot matching, expansion solves)
therefore runs in numpy's longdouble (80-bit on x86), with small
hand-rolled eliminations since LAPACK only speaks float32/float64.  On
platforms where longdouble degenerates to float64 everything still works,
just with correspondingly wider verdict dead zones.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficientError, SingularTransferError

LD = np.longdouble


def equilibrate(mat: np.ndarray, passes: int = 3):
    """Iterative row/column max-scaling.  Returns the scaled matrix and the
    column scale (row scaling is a free gauge for nullspaces and rank tests;
    column scaling must be undone on solution vectors)."""
    m = mat.copy()
    col_scale = np.ones(mat.shape[1], dtype=mat.dtype)
    for _ in range(passes):
        r = np.max(np.abs(m), axis=1)
        r[r == 0.0] = 1.0
        m /= r[:, None]
        c = np.max(np.abs(m), axis=0)
        c[c == 0.0] = 1.0
        m /= c[None, :]
        col_scale *= c
    return m, col_scale


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting and row equilibration,
    in the dtype of the inputs (float64 or longdouble)."""
    a = np.array(a, copy=True)
    b = np.atleast_2d(np.array(b, copy=True, dtype=a.dtype))
    squeeze = b.shape[0] == a.shape[0] and b.ndim == 2 and b.shape[1] == 1
    if b.shape[0] != a.shape[0]:
        b = b.T
        squeeze = True
    m = a.shape[0]
    scale = np.max(np.abs(a), axis=1)
    scale[scale == 0.0] = 1.0
    a /= scale[:, None]
    b = b / scale[:, None]
    for col in range(m):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        if a[pivot, col] == 0.0:
            raise SingularTransferError("singular system in elimination")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            b[[col, pivot]] = b[[pivot, col]]
        factors = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
        b[col + 1:] -= factors[:, None] * b[col]
    x = np.empty_like(b)
    for row in range(m - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x[:, 0] if squeeze else x


def nullspace_vector(a: np.ndarray, rank_tol: float = 0.0) -> np.ndarray:
    """Unit-norm null vector of an m x (m+1) matrix via complete-pivoting
    elimination in the input dtype.

    With ``rank_tol`` > 0, a final pivot below rank_tol times the first
    pivot reports a nullspace of dimension > 1.
    """
    a, col_scale = equilibrate(np.array(a, copy=True))
    m, ncols = a.shape
    if ncols != m + 1:
        raise ValueError("expected an m x (m+1) condition matrix")
    perm = np.arange(ncols)
    pivots = []
    for col in range(m):
        sub = np.abs(a[col:, col:])
        r_off, c_off = np.unravel_index(int(np.argmax(sub)), sub.shape)
        prow, pcol = col + r_off, col + c_off
        if a[prow, pcol] == 0.0:
            raise RankDeficientError("conditions are exactly rank deficient")
        if prow != col:
            a[[col, prow]] = a[[prow, col]]
        if pcol != col:
            a[:, [col, pcol]] = a[:, [pcol, col]]
            perm[[col, pcol]] = perm[[pcol, col]]
        pivots.append(abs(a[col, col]))
        factors = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
    if rank_tol > 0.0 and pivots and pivots[-1] <= rank_tol * pivots[0]:
        raise RankDeficientError("endpoint conditions have nullspace dimension > 1")
    # Free variable is the last permuted column; back-substitute the rest.
    x = np.zeros(ncols, dtype=a.dtype)
    x[m] = 1.0
    for row in range(m - 1, -1, -1):
        x[row] = -(a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    out = np.empty(ncols, dtype=a.dtype)
    out[perm] = x
    out /= col_scale
    return out / np.sqrt(out @ out)


def _jacobi_columns(a: np.ndarray, max_sweeps: int = 16) -> np.ndarray:
    """One-sided Jacobi sweeps orthogonalising the columns in place.

    After convergence the columns are sigma_i * u_i: singular values are
    the column norms and left singular directions the normalised columns.
    """
    m = a.shape[1]
    for _ in range(max_sweeps):
        off = LD(0.0)
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[:, p] @ a[:, q]
                if apq == 0.0:
                    continue
                app = a[:, p] @ a[:, p]
                aqq = a[:, q] @ a[:, q]
                denom = np.sqrt(app * aqq)
                if denom > 0.0:
                    off = max(off, abs(apq) / denom)
                zeta = (aqq - app) / (2.0 * apq)
                sign = LD(1.0) if zeta >= 0.0 else LD(-1.0)
                t = sign / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = LD(1.0) / np.sqrt(1.0 + t * t)
                s = c * t
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
        if off < 1e-24:
            break
    return a


def smallest_singular_ratio(mat: np.ndarray) -> float:
    """sigma_min / sigma_max of the equilibrated matrix by one-sided Jacobi
    in extended precision.

    LAPACK's SVD would floor the readable ratio at ~1e-16; the quantities
    fed to the degeneracy threshold shrink quadratically toward a critical
    length, so the extra digits translate directly into bracket accuracy.
    Far away from degeneracy the double-precision ratio is already reliable
    and is returned without the sweep.
    """
    quick_scaled, _ = equilibrate(np.asarray(mat, dtype=float))
    s = np.linalg.svd(quick_scaled, compute_uv=False)
    quick = float(s[-1] / s[0]) if s[0] > 0.0 else 0.0
    if quick > 1e-10:
        return quick
    a, _ = equilibrate(np.array(mat, dtype=LD))
    a = _jacobi_columns(a)
    norms = np.sqrt((a * a).sum(axis=0))
    top = norms.max()
    return float(norms.min() / top) if top > 0.0 else 0.0


def smallest_left_direction(mat: np.ndarray):
    """(sigma_min/sigma_max, left singular direction of sigma_min) of the
    column-normalised matrix, in extended precision.

    Row scaling is deliberately absent: a member whose every functional
    value is tiny shows up as a near-null LEFT direction, and scaling rows
    up would manufacture rank out of that evidence.
    """
    a = np.array(mat, dtype=LD)
    norms = np.sqrt((a * a).sum(axis=0))
    norms[norms == 0.0] = 1.0
    a /= norms
    a = _jacobi_columns(a)
    colnorms = np.sqrt((a * a).sum(axis=0))
    top = colnorms.max()
    if top <= 0.0:
        return 0.0, np.zeros(a.shape[0], dtype=LD)
    imin = int(np.argmin(colnorms))
    u = a[:, imin]
    scale = np.sqrt(u @ u)
    if scale > 0.0:
        u = u / scale
    return float(colnorms[imin] / top), u

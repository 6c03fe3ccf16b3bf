"""Dense spectral kernels, implemented in-repo on top of numpy array arithmetic.

No external eigen/SVD/QR routine is called anywhere in this module; the
decompositions are authored here:

* eigenvalues: balancing (Parlett-Reinsch scaling) -> Householder reduction to
  upper Hessenberg form -> shifted complex QR iteration with deflation
  (Wilkinson shift, occasional exceptional shift, 40*n sweep cap);
* singular values: Householder bidiagonalization -> Golub-Kahan implicit-shift
  QR on the real bidiagonal band (values only, no vector accumulation);
* subspace projections: modified Gram-Schmidt with one reorthogonalization
  pass, dropping numerically null directions.

Matrices are plain ``numpy.ndarray`` objects (any dtype coercible to
complex128).  Singular values are returned raw -- tiny values are never
clamped here; log-domain floors live in the callers that take logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: refuse dense O(n^3) work beyond this edge length unless overridden
DEFAULT_SIZE_GUARD = 4096

#: basis directions with post-projection norm below DROP_TOL * original norm
#: are treated as numerically null and dropped during orthonormalization
DROP_TOL = 1e-12

_EPS = float(np.finfo(np.float64).eps)


class ConvergenceError(ArithmeticError):
    """QR iteration failed to deflate within the sweep cap."""


def _as_complex_matrix(M, *, square=False, guard=DEFAULT_SIZE_GUARD, name="matrix"):
    A = np.asarray(M)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if square and A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if guard is not None and max(A.shape, default=0) > guard:
        raise ValueError(
            f"{name} edge {max(A.shape)} exceeds size guard {guard}; "
            "pass guard=None to override"
        )
    A = A.astype(np.complex128, copy=True)
    if A.size and not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


# ---------------------------------------------------------------------------
# Householder helpers
# ---------------------------------------------------------------------------

def _house(x):
    """Householder data (v, tau, beta) with (I - tau v v^H) x = beta e0.

    Returns None when x is already a multiple of e0 with zero tail (no
    reflector needed).  beta carries the phase of -x[0] so the construction
    is cancellation-free.
    """
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    if scale == 0.0:
        return None
    # Work at unit magnitude so vn2 stays in [1, 4n]; denormal tails would
    # otherwise underflow vn2 and blow tau up to inf.
    x = x / scale
    tail = np.linalg.norm(x[1:])
    if tail == 0.0:
        return None
    normx = np.linalg.norm(x)
    alpha = x[0]
    absa = abs(alpha)
    phase = alpha / absa if absa > 0.0 else 1.0 + 0.0j
    beta = -phase * normx
    v = x.copy()
    v[0] = alpha - beta
    vn2 = np.vdot(v, v).real
    tau = 2.0 / vn2
    return v, tau, complex(beta * scale)


def hessenberg(M, *, guard=DEFAULT_SIZE_GUARD):
    """Reduce a square matrix to upper Hessenberg form by unitary similarity."""
    H = _as_complex_matrix(M, square=True, guard=guard)
    n = H.shape[0]
    for k in range(n - 2):
        hv = _house(H[k + 1 :, k])
        if hv is None:
            continue
        v, tau, beta = hv
        # left: rows k+1.. of trailing columns
        block = H[k + 1 :, k + 1 :]
        w = tau * (v.conj() @ block)
        block -= np.outer(v, w)
        H[k + 1, k] = beta
        H[k + 2 :, k] = 0.0
        # right: all rows, columns k+1..
        block = H[:, k + 1 :]
        w = tau * (block @ v)
        block -= np.outer(w, v.conj())
    return H


def balance(M, *, guard=DEFAULT_SIZE_GUARD, max_passes=100):
    """Diagonal similarity scaling equalizing row/column norms (radix 2)."""
    A = _as_complex_matrix(M, square=True, guard=guard)
    n = A.shape[0]
    radix = 2.0
    sq = radix * radix
    for _ in range(max_passes):
        done = True
        for i in range(n):
            r = np.abs(A[i, :]).sum() - abs(A[i, i])
            c = np.abs(A[:, i]).sum() - abs(A[i, i])
            if c == 0.0 or r == 0.0:
                continue
            f = 1.0
            s = c + r
            g = r / radix
            while c < g:
                f *= radix
                c *= sq
            g = r * radix
            while c > g:
                f /= radix
                c /= sq
            if (c + r) / f < 0.95 * s:
                done = False
                A[i, :] /= f
                A[:, i] *= f
        if done:
            break
    return A


# ---------------------------------------------------------------------------
# Complex Hessenberg QR iteration (eigenvalues only)
# ---------------------------------------------------------------------------

def _givens_c(a, b):
    """Complex Givens pair (c real, s complex): -conj(s)*a + c*b == 0."""
    bb = abs(b)
    if bb == 0.0:
        return 1.0, 0.0 + 0.0j
    aa = abs(a)
    if aa == 0.0:
        return 0.0, 1.0 + 0.0j
    r = math.hypot(aa, bb)
    return aa / r, (a / aa) * b.conjugate() / r


def _eig2(a, b, c, d):
    """Eigenvalues of [[a, b], [c, d]], cancellation-guarded."""
    m = 0.5 * (a + d)
    disc = np.sqrt(complex(0.25 * (a - d) * (a - d) + b * c))
    r1, r2 = m + disc, m - disc
    if abs(r1) < abs(r2):
        r1, r2 = r2, r1
    if r1 != 0.0:
        r2 = (a * d - b * c) / r1
    return r1, r2


def _wilkinson(a, b, c, d):
    """Root of the trailing 2x2 closest to d."""
    r1, r2 = _eig2(a, b, c, d)
    return r1 if abs(r1 - d) < abs(r2 - d) else r2


def _qr_sweep(H, lo, hi, shift):
    """One explicit-shift QR similarity step on the active window [lo, hi]."""
    idx = np.arange(lo, hi + 1)
    H[idx, idx] -= shift
    m = hi - lo
    cs = np.empty(m, dtype=np.float64)
    ss = np.empty(m, dtype=np.complex128)
    for i in range(lo, hi):
        c, s = _givens_c(H[i, i], H[i + 1, i])
        cs[i - lo] = c
        ss[i - lo] = s
        x = H[i, i:]
        y = H[i + 1, i:]
        t = c * x + s * y
        H[i + 1, i:] = c * y - np.conj(s) * x
        H[i, i:] = t
        H[i + 1, i] = 0.0
    for i in range(lo, hi):
        c = cs[i - lo]
        s = ss[i - lo]
        top = i + 2
        u = H[:top, i]
        v = H[:top, i + 1]
        t = c * u + np.conj(s) * v
        H[:top, i + 1] = c * v - s * u
        H[:top, i] = t
    H[idx, idx] += shift


def _hessenberg_eigvals(Hin, *, sweep_cap_factor=40):
    H = np.array(Hin, dtype=np.complex128, copy=True)
    n = H.shape[0]
    w = np.empty(n, dtype=np.complex128)
    cap = sweep_cap_factor * max(n, 1)
    sweeps = 0
    its = 0
    hi = n - 1
    while hi >= 0:
        if hi == 0:
            w[0] = H[0, 0]
            break
        lo = hi
        while lo > 0:
            if abs(H[lo, lo - 1]) <= _EPS * (abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])):
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            w[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            w[lo], w[hi] = _eig2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi])
            hi -= 2
            its = 0
            continue
        if sweeps >= cap:
            raise ConvergenceError(
                f"eigenvalue QR exceeded {cap} sweeps at window [{lo}, {hi}]"
            )
        its += 1
        if its % 10 == 0:
            # exceptional shift: breaks rare shift cycles
            extra = abs(H[hi, hi - 1])
            if hi - 2 >= lo:
                extra += abs(H[hi - 1, hi - 2])
            shift = H[hi, hi] + 1.5 * extra
        else:
            shift = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        _qr_sweep(H, lo, hi, shift)
        sweeps += 1
    return w


def _sort_eigs(w):
    """Deterministic order: nonincreasing modulus, then increasing phase."""
    order = np.lexsort((np.angle(w), -np.abs(w)))
    return w[order]


def eigenvalues(M, *, with_residuals=False, guard=DEFAULT_SIZE_GUARD):
    """All eigenvalues of a square matrix (complex128 throughout).

    Pipeline: balance -> Householder Hessenberg -> shifted QR with deflation.
    Results are sorted by (-|lambda|, phase).  With ``with_residuals=True``
    also returns per-eigenvalue backward-error estimates
    ``||H v - lambda v|| / ||H||_F`` where v is an inverse-iteration vector in
    the balanced Hessenberg frame (unitarily equivalent to the balanced input).
    """
    A = _as_complex_matrix(M, square=True, guard=guard)
    n = A.shape[0]
    if n == 0:
        vals = np.empty(0, dtype=np.complex128)
        return (vals, np.empty(0)) if with_residuals else vals
    if n == 1:
        vals = A[0, :1].copy()
        return (vals, np.zeros(1)) if with_residuals else vals
    H = hessenberg(balance(A, guard=guard), guard=guard)
    vals = _sort_eigs(_hessenberg_eigvals(H))
    if not with_residuals:
        return vals
    return vals, _hessenberg_residuals(H, vals)


def _hess_solve_shifted(H, lam, b, pivot_floor):
    """Solve (H - lam I) x = b by Hessenberg GEPP; zero pivots get a floor."""
    n = H.shape[0]
    U = H.copy()
    idx = np.arange(n)
    U[idx, idx] -= lam
    x = b.astype(np.complex128, copy=True)
    for k in range(n - 1):
        if abs(U[k + 1, k]) > abs(U[k, k]):
            tmp = U[k, k:].copy()
            U[k, k:] = U[k + 1, k:]
            U[k + 1, k:] = tmp
            x[k], x[k + 1] = x[k + 1], x[k]
        p = U[k, k]
        if p == 0.0:
            U[k, k] = p = pivot_floor
        mult = U[k + 1, k] / p
        if mult != 0.0:
            U[k + 1, k + 1 :] -= mult * U[k, k + 1 :]
            x[k + 1] -= mult * x[k]
    if U[n - 1, n - 1] == 0.0:
        U[n - 1, n - 1] = pivot_floor
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - U[k, k + 1 :] @ x[k + 1 :]) / U[k, k]
    return x


def _hessenberg_residuals(H, vals):
    n = H.shape[0]
    scale = np.linalg.norm(H)
    if scale == 0.0:
        return np.zeros(len(vals))
    pivot_floor = _EPS * scale
    b = np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)
    out = np.empty(len(vals))
    for j, lam in enumerate(vals):
        x = _hess_solve_shifted(H, lam, b, pivot_floor)
        nx = np.linalg.norm(x)
        if nx == 0.0 or not np.isfinite(nx):
            out[j] = np.nan
            continue
        v = x / nx
        out[j] = np.linalg.norm(H @ v - lam * v) / scale
    return out


# ---------------------------------------------------------------------------
# Singular values: bidiagonalization + Golub-Kahan QR
# ---------------------------------------------------------------------------

def bidiagonalize(M, *, guard=DEFAULT_SIZE_GUARD):
    """Real nonnegative bidiagonal profile (d, e) unitarily equivalent to M.

    Works on M (or its adjoint when rows < cols, which leaves singular values
    unchanged) with alternating left/right Householder reflectors.  The
    complex bidiagonal produced is rephased to |.| -- a diagonal unitary
    scaling on both sides, so the singular values are exactly preserved.
    """
    A = _as_complex_matrix(M, guard=guard)
    m, n = A.shape
    if m < n:
        A = A.conj().T.copy()
        m, n = n, m
    if n == 0:
        return np.empty(0), np.empty(0)
    for k in range(n):
        hv = _house(A[k:, k])
        if hv is not None:
            v, tau, beta = hv
            block = A[k:, k + 1 :]
            w = tau * (v.conj() @ block)
            block -= np.outer(v, w)
            A[k, k] = beta
            A[k + 1 :, k] = 0.0
        if k < n - 2:
            hv = _house(A[k, k + 1 :].conj())
            if hv is not None:
                u, tau, beta = hv
                block = A[k + 1 :, k + 1 :]
                w = tau * (block @ u)
                block -= np.outer(w, u.conj())
                A[k, k + 1] = np.conj(beta)
                A[k, k + 2 :] = 0.0
    d = np.abs(np.diagonal(A)[:n]).astype(np.float64)
    e = np.abs(np.diagonal(A, offset=1)[: n - 1]).astype(np.float64)
    return d, e


def _chase_zero_diag(d, e, i, lo, hi):
    """Annihilate e[i] when d[i] == 0 (left rotations pushing the entry right),
    or e[hi-1] when d[hi] == 0 (right rotations pushing it up)."""
    if i < hi:
        f = e[i]
        e[i] = 0.0
        for j in range(i + 1, hi + 1):
            r = math.hypot(f, d[j])
            if r == 0.0:
                break
            c = d[j] / r
            s = f / r
            d[j] = r
            if j < hi:
                f = -s * e[j]
                e[j] = c * e[j]
    else:
        f = e[hi - 1]
        e[hi - 1] = 0.0
        for j in range(hi - 1, lo - 1, -1):
            r = math.hypot(d[j], f)
            if r == 0.0:
                break
            c = d[j] / r
            s = f / r
            d[j] = r
            if j > lo:
                f = -s * e[j - 1]
                e[j - 1] = c * e[j - 1]


def _gk_sweep(d, e, lo, hi, mu):
    """One implicit-shift Golub-Kahan bulge chase on the window [lo, hi]."""
    y = d[lo] * d[lo] - mu
    z = d[lo] * e[lo]
    for k in range(lo, hi):
        r = math.hypot(y, z)
        if r == 0.0:
            c, s = 1.0, 0.0
        else:
            c = y / r
            s = z / r
        if k > lo:
            e[k - 1] = r
        # right rotation on columns (k, k+1)
        dk = d[k]
        ek = e[k]
        dk1 = d[k + 1]
        d[k] = c * dk + s * ek
        e[k] = c * ek - s * dk
        beta = s * dk1
        d[k + 1] = c * dk1
        # left rotation on rows (k, k+1) zeroing the subdiagonal bulge
        r2 = math.hypot(d[k], beta)
        if r2 == 0.0:
            c2, s2 = 1.0, 0.0
        else:
            c2 = d[k] / r2
            s2 = beta / r2
        d[k] = r2
        ek = e[k]
        dk1 = d[k + 1]
        e[k] = c2 * ek + s2 * dk1
        d[k + 1] = c2 * dk1 - s2 * ek
        if k < hi - 1:
            ek1 = e[k + 1]
            y = e[k]
            z = s2 * ek1
            e[k + 1] = c2 * ek1


def _bidiag_svals(d, e, *, sweep_cap_factor=40):
    """Singular values of the real bidiagonal (d, e), descending order."""
    d = np.asarray(d, dtype=np.float64).copy()
    e = np.asarray(e, dtype=np.float64).copy()
    n = d.size
    if n == 0:
        return d
    cap = sweep_cap_factor * n
    sweeps = 0
    hi = n - 1
    while hi > 0:
        if abs(e[hi - 1]) <= _EPS * (abs(d[hi - 1]) + abs(d[hi])):
            e[hi - 1] = 0.0
            hi -= 1
            continue
        lo = hi - 1
        while lo > 0:
            if abs(e[lo - 1]) <= _EPS * (abs(d[lo - 1]) + abs(d[lo])):
                e[lo - 1] = 0.0
                break
            lo -= 1
        # split on a negligible diagonal entry (keeps shifts well defined)
        window_scale = max(np.max(np.abs(d[lo : hi + 1])), np.max(np.abs(e[lo:hi])))
        dtiny = _EPS * window_scale
        chased = False
        for i in range(lo, hi + 1):
            if abs(d[i]) <= dtiny:
                d[i] = 0.0
                _chase_zero_diag(d, e, i, lo, hi)
                chased = True
                break
        if chased:
            continue
        if sweeps >= cap:
            raise ConvergenceError(
                f"bidiagonal QR exceeded {cap} sweeps at window [{lo}, {hi}]"
            )
        # Wilkinson shift from the trailing 2x2 of B^T B
        dm = d[hi - 1]
        dn = d[hi]
        em = e[hi - 1]
        em1 = e[hi - 2] if hi - 1 > lo else 0.0
        t11 = dm * dm + em1 * em1
        t22 = dn * dn + em * em
        t12 = dm * em
        delta = 0.5 * (t11 - t22)
        if t12 == 0.0:
            mu = t22
        else:
            root = math.hypot(delta, t12)
            denom = delta + (root if delta >= 0.0 else -root)
            if denom == 0.0:
                mu = t22 - abs(t12)
            else:
                mu = t22 - t12 * t12 / denom
        _gk_sweep(d, e, lo, hi, mu)
        sweeps += 1
    return np.sort(np.abs(d))[::-1]


def singular_values(M, *, guard=DEFAULT_SIZE_GUARD):
    """All singular values of a (rectangular) matrix, nonincreasing.

    Values are returned exactly as computed: entries below any external floor
    (e.g. 1e-30) are reported as-is, never clamped.
    """
    d, e = bidiagonalize(M, guard=guard)
    return _bidiag_svals(d, e)


# ---------------------------------------------------------------------------
# Orthonormalization / projections (modified Gram-Schmidt)
# ---------------------------------------------------------------------------

def _mgs_pass(V, orig_norms, drop_tol):
    kept = []
    k = V.shape[0]
    for i in range(k):
        v = V[i]
        nv = np.linalg.norm(v)
        if nv <= drop_tol * orig_norms[i] or nv == 0.0:
            continue
        q = v / nv
        kept.append(q)
        if i + 1 < k:
            W = V[i + 1 :]
            W -= np.outer(W @ q.conj(), q)
    if not kept:
        return np.empty((0, V.shape[1]), dtype=np.complex128)
    return np.array(kept)


def orthonormal_rows(rows, *, drop_tol=DROP_TOL):
    """Orthonormal basis of the row span, via MGS run twice.

    Rows whose residual after projection drops below ``drop_tol`` times their
    original norm are treated as numerically dependent and dropped, so the
    result always has full row rank.
    """
    V = np.atleast_2d(np.asarray(rows)).astype(np.complex128, copy=True)
    if V.size == 0:
        return np.empty((0, V.shape[1] if V.ndim == 2 else 0), dtype=np.complex128)
    orig = np.linalg.norm(V, axis=1)
    Q = _mgs_pass(V, orig, drop_tol)
    if Q.shape[0] == 0:
        return Q
    # one reorthogonalization pass over the provisional basis
    Q = _mgs_pass(Q, np.ones(Q.shape[0]), drop_tol)
    return Q


def project_complement(row_basis, v, *, orthonormal=False):
    """Component of v orthogonal to span(row_basis).

    The basis is orthonormalized by modified Gram-Schmidt (skipped when
    ``orthonormal=True``), then v is projected twice -- the second pass is the
    reorthogonalization that keeps the output orthogonal to every basis row
    to ~1e-10 * ||v|| even for ill-conditioned inputs.
    """
    v = np.asarray(v, dtype=np.complex128)
    Q = np.atleast_2d(np.asarray(row_basis, dtype=np.complex128))
    if not orthonormal:
        Q = orthonormal_rows(Q)
    if Q.shape[0] == 0:
        return v.copy()
    w = v - Q.T @ (Q.conj() @ v)
    w = w - Q.T @ (Q.conj() @ w)
    return w


def distance_to_span(v, row_basis, *, orthonormal=False):
    """Euclidean distance from v to the row span of ``row_basis``."""
    return float(np.linalg.norm(project_complement(row_basis, v, orthonormal=orthonormal)))


# ---------------------------------------------------------------------------
# GEPP inverse and the all-rows distance route
# ---------------------------------------------------------------------------

def inverse(M, *, guard=DEFAULT_SIZE_GUARD):
    """Matrix inverse by Gaussian elimination with partial pivoting."""
    A = _as_complex_matrix(M, square=True, guard=guard)
    n = A.shape[0]
    X = np.eye(n, dtype=np.complex128)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0.0:
            raise ArithmeticError(f"matrix is singular at pivot {k}")
        if p != k:
            tmp = A[k, k:].copy()
            A[k, k:] = A[p, k:]
            A[p, k:] = tmp
            tmp = X[k].copy()
            X[k] = X[p]
            X[p] = tmp
        mults = A[k + 1 :, k] / A[k, k]
        if k + 1 < n:
            A[k + 1 :, k + 1 :] -= np.outer(mults, A[k, k + 1 :])
            X[k + 1 :, :] -= np.outer(mults, X[k, :])
    out = np.empty_like(X)
    for k in range(n - 1, -1, -1):
        out[k] = (X[k] - A[k, k + 1 :] @ out[k + 1 :]) / A[k, k]
    return out


def row_distances(M, *, guard=DEFAULT_SIZE_GUARD):
    """dist(R_i, span of the other rows) for every row of a square matrix.

    Uses the inverse-column identity: for nonsingular B the i-th column c_i of
    B^{-1} is orthogonal to every row but the i-th (R_j c_i = delta_ij), so
    dist(R_i, span_{j != i} R_j) = 1 / ||c_i||_2.  Summing the inverse squares
    therefore reproduces sum_j s_j(B)^{-2} (negative second moment identity).
    This is an O(n^3)-once alternative to n calls of :func:`distance_to_span`
    and is cross-checked against it in the test suite.
    """
    inv = inverse(M, guard=guard)
    return 1.0 / np.linalg.norm(inv, axis=0)


# ---------------------------------------------------------------------------
# Combined summary
# ---------------------------------------------------------------------------

@dataclass
class SpectralSummary:
    """Eigenvalues, singular values and per-value diagnostics of one matrix."""

    n: int
    eigenvalues: np.ndarray        # complex, sorted by (-|lambda|, phase)
    backward_errors: np.ndarray    # ||Hv - lambda v|| / ||H||_F per eigenvalue
    singular_values: np.ndarray    # nonincreasing, never clamped
    degenerate: np.ndarray = field(default=None)  # bool: sval numerically zero

    def __post_init__(self):
        if self.degenerate is None:
            s = self.singular_values
            top = s[0] if len(s) else 0.0
            self.degenerate = s <= (self.n * _EPS * top)


def spectral_summary(M, *, guard=DEFAULT_SIZE_GUARD):
    """Full spectral diagnostics for one square matrix."""
    A = _as_complex_matrix(M, square=True, guard=guard)
    vals, resid = eigenvalues(A, with_residuals=True, guard=guard)
    svals = singular_values(A, guard=guard)
    return SpectralSummary(
        n=A.shape[0],
        eigenvalues=vals,
        backward_errors=resid,
        singular_values=svals,
    )

"""Compiled inner loops for the Bernstein subdivision root counter.

Everything here works on raw float64 coefficient arrays in the unit-interval
Bernstein basis.  The counter is a stack-based de Casteljau subdivision with
sign-certified coefficient classification:

  * a coefficient is a certified +/- only when it clears an absolute tolerance
    band (the caller passes tol ~ 1e-13 * coefficient scale, which dominates
    the de Casteljau rounding accumulated over the ~40 levels above the width
    floor);
  * exact 0.0 coefficients are structural zeros and are skipped, so crafted
    inputs with boundary roots stay exact;
  * lskip/rskip flags mark a boundary whose function value is already counted
    as a root by the caller (region seam); the flag propagates down the edge
    of the subdivision tree and suppresses double counting;
  * a split value of exactly 0.0 is a structural seam root: counted once, and
    both children inherit a skip flag (their shared coefficient is a
    structural zero, so exact multiple roots collapse to one distinct root);
  * a node with no certified sign at all lies entirely inside the zero band
    (convex hull property), and is counted as a single root cluster — unless
    a skip flag says the adjacent seam root already covers it.

  Splits happen only at certified-nonzero points, so a zero band is never cut
  across nodes and each cluster is counted exactly once.  If the band defeats
  all three candidate split points without an exact zero, the count is not
  certifiable at this tolerance and the kernel reports precision exhaustion
  (callers route exact multiple roots through the integer Sturm path instead).

Status codes: 0 ok, 1 precision exhausted, 2 capacity exceeded.
"""
import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

WIDTH_FLOOR = 1e-12
_JIT1 = 0.578712638918253
_JIT2 = 0.421287361081747


@njit(cache=True)
def restrict(b, alpha, beta):
    """Bernstein coefficients of the same polynomial on [alpha, beta] <= [0,1]."""
    n = b.shape[0]
    out = b.copy()
    if alpha > 0.0:
        # in-place right piece of the split at alpha
        u = 1.0 - alpha
        for j in range(1, n):
            for k in range(n - j):
                out[k] = u * out[k] + alpha * out[k + 1]
    if beta < 1.0:
        t = (beta - alpha) / (1.0 - alpha)
        # in-place left piece of the split at t
        u = 1.0 - t
        for j in range(1, n):
            for k in range(n - 1, j - 1, -1):
                out[k] = u * out[k - 1] + t * out[k]
    return out


@njit(cache=True)
def value_at(b, t):
    """de Casteljau evaluation of the unit-interval Bernstein form at t."""
    n = b.shape[0]
    tmp = b.copy()
    u = 1.0 - t
    for j in range(1, n):
        for k in range(n - j):
            tmp[k] = u * tmp[k] + t * tmp[k + 1]
    return tmp[0]


@njit(cache=True)
def _split_into(b, t, left, right):
    """Split at t; fills left/right coefficient arrays, returns the value at t."""
    n = b.shape[0]
    tmp = b.copy()
    left[0] = tmp[0]
    right[n - 1] = tmp[n - 1]
    u = 1.0 - t
    for j in range(1, n):
        for k in range(n - j):
            tmp[k] = u * tmp[k] + t * tmp[k + 1]
        left[j] = tmp[0]
        right[n - 1 - j] = tmp[n - 1 - j]
    return left[n - 1]


@njit(cache=True)
def count_open_unit(b0, u_lo, u_hi, lskip0, rskip0, tol, out_iv):
    """Count distinct roots in the open interval (u_lo, u_hi) of the piece whose
    unit-interval Bernstein coefficients are b0.

    out_iv receives one (lo, hi) row per counted root (global u coordinates).
    Returns (count, n_intervals, status).
    """
    n = b0.shape[0]
    cap = out_iv.shape[0]
    # depth-first: stack height is bounded by subdivision depth (~50 at the
    # width floor with jittered splits), not by the number of roots
    maxstack = 160
    S_b = np.empty((maxstack, n))
    S_lo = np.empty(maxstack)
    S_hi = np.empty(maxstack)
    S_ls = np.empty(maxstack, dtype=np.int64)
    S_rs = np.empty(maxstack, dtype=np.int64)
    S_b[0] = b0
    S_lo[0] = u_lo
    S_hi[0] = u_hi
    S_ls[0] = lskip0
    S_rs[0] = rskip0
    top = 1
    count = 0
    niv = 0
    left = np.empty(n)
    right = np.empty(n)
    while top > 0:
        top -= 1
        b = S_b[top].copy()
        lo = S_lo[top]
        hi = S_hi[top]
        lsk = S_ls[top]
        rsk = S_rs[top]

        # classify coefficient signs
        v = 0
        last = 0
        uncertain = False
        certified = False
        for k in range(n):
            if (k == 0 and lsk == 1) or (k == n - 1 and rsk == 1):
                continue
            c = b[k]
            if c == 0.0:
                continue
            if c > tol:
                s = 1
            elif c < -tol:
                s = -1
            else:
                uncertain = True
                continue
            certified = True
            if s * last < 0:
                v += 1
            last = s

        if not uncertain:
            if v == 0:
                continue
            if v == 1:
                if niv >= cap:
                    return count, niv, 2
                out_iv[niv, 0] = lo
                out_iv[niv, 1] = hi
                niv += 1
                count += 1
                continue
        elif not certified:
            # every coefficient sits in the tolerance band, so the whole node
            # lies in the zero band: one root cluster (or the tail of a seam
            # root the caller/an ancestor already counted)
            if lsk == 0 and rsk == 0:
                if niv >= cap:
                    return count, niv, 2
                out_iv[niv, 0] = lo
                out_iv[niv, 1] = hi
                niv += 1
                count += 1
            continue

        if hi - lo < WIDTH_FLOOR:
            val = value_at(b, 0.5)
            if abs(val) <= tol:
                if niv >= cap:
                    return count, niv, 2
                out_iv[niv, 0] = lo
                out_iv[niv, 1] = hi
                niv += 1
                count += 1
                continue
            return count, niv, 1  # cannot certify at this tolerance

        # split; jitter away from a root sitting near the split point
        t = 0.5
        val = _split_into(b, t, left, right)
        seam = val == 0.0
        if not seam and abs(val) <= tol:
            v2 = value_at(b, _JIT1)
            v3 = value_at(b, _JIT2)
            if abs(v2) > tol:
                t = _JIT1
                _split_into(b, t, left, right)
            elif abs(v3) > tol:
                t = _JIT2
                _split_into(b, t, left, right)
            elif v2 == 0.0:
                t = _JIT1
                _split_into(b, t, left, right)
                seam = True
            elif v3 == 0.0:
                t = _JIT2
                _split_into(b, t, left, right)
                seam = True
            else:
                # a near-zero band (not exactly zero) blocks every candidate:
                # the distinct-root count is not certifiable at this tolerance
                return count, niv, 1

        if top + 2 > maxstack:
            return count, niv, 2
        mid = lo + (hi - lo) * t
        if seam:
            if niv >= cap:
                return count, niv, 2
            out_iv[niv, 0] = mid - WIDTH_FLOOR
            out_iv[niv, 1] = mid + WIDTH_FLOOR
            niv += 1
            count += 1
        S_b[top] = right
        S_lo[top] = mid
        S_hi[top] = hi
        S_ls[top] = 1 if seam else 0
        S_rs[top] = rsk
        top += 1
        S_b[top] = left
        S_lo[top] = lo
        S_hi[top] = mid
        S_ls[top] = lsk
        S_rs[top] = 1 if seam else 0
        top += 1
    return count, niv, 0

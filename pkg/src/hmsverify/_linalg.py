"""Small numerical helpers shared by the A- and B-side code."""

import math

import numpy as np

from .errors import IllConditionedError

# a singular value within this factor of the cutoff is treated as ambiguous
GAP_RATIO = 10.0


def svd_rank(M, tol, check_gap=True):
    """Numerical rank with cutoff ``tol * sigma_max``.

    Raises IllConditionedError when some singular value sits within a factor
    GAP_RATIO of the cutoff, since the rank is then not meaningful.
    """
    M = np.asarray(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    cut = tol * s[0]
    if check_gap and cut > 0:
        near = (s > cut / GAP_RATIO) & (s < cut * GAP_RATIO)
        if near.any():
            raise IllConditionedError(
                f"singular values {s[near]} cluster at cutoff {cut:.3e}")
    return int(np.sum(s > cut))


def shell_tail(a, b, s0):
    """Upper bound for sum_{s >= s0} 8 s exp(-a s^2 + b s).

    8s counts the integer points with sup-norm s. The terms decrease
    geometrically past s0 once their ratio drops below one; the bound is the
    first term over (1 - ratio). Returns inf when that has not happened yet.
    """
    s0 = max(int(s0), 1)
    ratio = (s0 + 1) / s0 * math.exp(-a * (2 * s0 + 1) + b)
    if ratio >= 1.0:
        return math.inf
    return 8 * s0 * math.exp(-a * s0 * s0 + b * s0) / (1.0 - ratio)


def lex_cokernel_basis(M, n_rows, cutoff=1e-6):
    """Indices of the lexicographically first coordinate vectors that span
    a complement of the column space of M.

    The classes of the selected unit vectors form the distinguished basis of
    the cokernel on both sides of the comparison.
    """
    if M is None or np.asarray(M).size == 0:
        return list(range(n_rows))
    M = np.asarray(M, dtype=complex)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > 1e-9 * s[0])) if s.size and s[0] > 0 else 0
    span = [u[:, i] for i in range(r)]
    picked = []
    for c in range(n_rows):
        v = np.zeros(n_rows, dtype=complex)
        v[c] = 1.0
        for w in span:
            v = v - np.vdot(w, v) * w
        nv = np.linalg.norm(v)
        if nv > cutoff:
            span.append(v / nv)
            picked.append(c)
        if len(picked) == n_rows - r:
            break
    return picked

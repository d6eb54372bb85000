"""Pure-Python reference kernels over the ring Z[sqrt 2].

Every value handled here is an integer pair ``(p, q)`` standing for
``p + q*sqrt(2)``, optionally over a shared positive denominator ``d``.
The compiled twin in ``_speedups.pyx`` exposes the same functions with the
same signatures; ``spfsim._kernels`` picks one at import time.
"""

from math import isqrt


def surd_sign(p, q):
    """Sign of ``p + q*sqrt(2)`` as -1, 0 or 1."""
    if p >= 0 and q >= 0:
        return 0 if (p == 0 and q == 0) else 1
    if p <= 0 and q <= 0:
        return -1
    # mixed signs: compare p**2 against 2*q**2
    lhs = p * p
    rhs = 2 * q * q
    if p > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def surd_floor(p, q, d):
    """``floor((p + q*sqrt(2)) / d)`` for ``d > 0``, exactly."""
    if q == 0:
        return p // d
    m = isqrt(2 * q * q)
    # q*sqrt(2) is irrational, so it lies strictly between two integers
    if q > 0:
        return (p + m) // d
    return (p - m - 1) // d


def _cmp(p1, q1, p2, q2):
    return surd_sign(p1 - p2, q1 - q2)


def orbit_point(a, b, d, k):
    """Numerators of ``frac(k*alpha)`` over ``d`` with ``alpha = (a + b*sqrt2)/d``."""
    p = k * a
    q = k * b
    m = surd_floor(p, q, d)
    return p - m * d, q


def _insert_sorted(ps, qs, p, q):
    lo, hi = 0, len(ps)
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp(ps[mid], qs[mid], p, q) < 0:
            lo = mid + 1
        else:
            hi = mid
    ps.insert(lo, p)
    qs.insert(lo, q)
    return lo


def max_gap_search(a, b, d, tp, tq, td, budget):
    """Least ``K`` such that the circular gaps of ``{frac(k*alpha): 0 <= k <= K}``
    are all at most ``(tp + tq*sqrt2)/td``; ``-1`` when ``K`` would exceed ``budget``.
    """
    ps = [0]
    qs = [0]
    k = 0
    while True:
        # largest circular gap, scaled by d; wrap gap is d - last + first
        n = len(ps)
        gp, gq = d - ps[n - 1] + ps[0], -qs[n - 1] + qs[0]
        for j in range(n - 1):
            hp, hq = ps[j + 1] - ps[j], qs[j + 1] - qs[j]
            if _cmp(hp, hq, gp, gq) > 0:
                gp, gq = hp, hq
        # gap/d <= t/td  <=>  gap*td - t*d <= 0
        if surd_sign(gp * td - tp * d, gq * td - tq * d) <= 0:
            return k
        k += 1
        if k > budget:
            return -1
        p, q = orbit_point(a, b, d, k)
        _insert_sorted(ps, qs, p, q)


def sorted_orbit(a, b, d, n):
    """Sorted numerators of ``frac(k*alpha)`` for ``k = 1..n`` mapped into ``(0, 1]``."""
    ps, qs = [], []
    for k in range(1, n + 1):
        p, q = orbit_point(a, b, d, k)
        if p == 0 and q == 0:
            p = d
        _insert_sorted(ps, qs, p, q)
    return ps, qs


def discrepancy_scan(ps, qs, d, n):
    """Extremal deviation of the counting function over sorted points in ``(0, 1]``.

    Scans ``g(u) = #{points <= u} - n*u`` at the critical positions
    ``0, q1-, q1, q2-, q2, ..., 1`` (``q-`` is a left limit).  Returns
    ``(vp, vq, x_idx, y_idx, x_lim, y_lim, over)``: the supremum scaled by ``d``
    is ``vp + vq*sqrt2``; ``x_idx``/``y_idx`` index the positions (``-1`` is 0,
    ``len`` is 1); ``*_lim`` flag left limits; ``over`` tells whether the
    interval holds too many points rather than too few.
    """
    # positions: (gp, gq, idx, is_limit); idx -1 stands for u = 0
    best = None
    # running extremes of g over earlier positions
    lo_p, lo_q, lo_pos = 0, 0, (-1, False)
    hi_p, hi_q, hi_pos = 0, 0, (-1, False)
    count = 0
    m = len(ps)
    j = 0
    while j <= m:
        if j < m:
            mult = 1
            while j + mult < m and ps[j + mult] == ps[j] and qs[j + mult] == qs[j]:
                mult += 1
            base_p = -n * ps[j]
            base_q = -n * qs[j]
            cand = (
                (base_p + d * count, base_q, (j, True)),
                (base_p + d * (count + mult), base_q, (j, False)),
            )
            count += mult
            step = mult
        else:
            if m and ps[m - 1] == d and qs[m - 1] == 0:
                break
            cand = ((d * count - n * d, 0, (m, False)),)
            step = 1
        for gp, gq, pos in cand:
            up_p, up_q = gp - lo_p, gq - lo_q
            if best is None or _cmp(up_p, up_q, best[0], best[1]) > 0:
                best = (up_p, up_q, lo_pos, pos, True)
            dn_p, dn_q = hi_p - gp, hi_q - gq
            if _cmp(dn_p, dn_q, best[0], best[1]) > 0:
                best = (dn_p, dn_q, hi_pos, pos, False)
            if _cmp(gp, gq, lo_p, lo_q) < 0:
                lo_p, lo_q, lo_pos = gp, gq, pos
            if _cmp(gp, gq, hi_p, hi_q) > 0:
                hi_p, hi_q, hi_pos = gp, gq, pos
        j += step
    vp, vq, xpos, ypos, over = best
    return vp, vq, xpos[0], ypos[0], xpos[1], ypos[1], over


def discrepancy_threshold_search(a, b, d, tp, tq, td, budget):
    """Least ``N`` with ``D_N(alpha)/N < t`` where ``t = (tp + tq*sqrt2)/td``.

    Returns ``(N, vp, vq)`` with ``D_N = (vp + vq*sqrt2)/d``, or ``(-1, 0, 0)``
    once ``N`` passes ``budget``.
    """
    ps, qs = [], []
    for n in range(1, budget + 1):
        p, q = orbit_point(a, b, d, n)
        if p == 0 and q == 0:
            p = d
        _insert_sorted(ps, qs, p, q)
        vp, vq = discrepancy_scan(ps, qs, d, n)[:2]
        # D/(d*n) < t/td  <=>  D*td - t*d*n < 0
        if surd_sign(vp * td - tp * d * n, vq * td - tq * d * n) < 0:
            return n, vp, vq
    return -1, 0, 0

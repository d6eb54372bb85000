# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled kernels over Z[sqrt 2] with 64-bit integers.

Same signatures and results as ``_purekernels``.  Any intermediate that would
leave the int64 range raises ``OverflowError``; the dispatcher in
``spfsim._kernels`` then reruns the call on the pure-Python path.
"""

from libc.math cimport sqrt
from libcpp.vector cimport vector

cdef extern from *:
    """
    static inline int spf_mul(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int spf_add(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    static inline int spf_sub(long long a, long long b, long long *r) {
        return __builtin_sub_overflow(a, b, r);
    }
    """
    int spf_mul(long long a, long long b, long long *r) nogil
    int spf_add(long long a, long long b, long long *r) nogil
    int spf_sub(long long a, long long b, long long *r) nogil


cdef inline long long _mul(long long a, long long b) except? -1:
    cdef long long r
    if spf_mul(a, b, &r):
        raise OverflowError("int64 overflow")
    return r


cdef inline long long _add(long long a, long long b) except? -1:
    cdef long long r
    if spf_add(a, b, &r):
        raise OverflowError("int64 overflow")
    return r


cdef inline long long _sub(long long a, long long b) except? -1:
    cdef long long r
    if spf_sub(a, b, &r):
        raise OverflowError("int64 overflow")
    return r


cdef int _sign(long long p, long long q) except -2:
    cdef long long lhs, rhs
    if p >= 0 and q >= 0:
        return 0 if (p == 0 and q == 0) else 1
    if p <= 0 and q <= 0:
        return -1
    lhs = _mul(p, p)
    rhs = _mul(2, _mul(q, q))
    if p > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


cdef inline int _cmp(long long p1, long long q1, long long p2, long long q2) except -2:
    return _sign(_sub(p1, p2), _sub(q1, q2))


cdef long long _isqrt(long long n) except -1:
    cdef long long r = <long long>sqrt(<double>n)
    while r > 0 and _mul(r, r) > n:
        r -= 1
    while _mul(r + 1, r + 1) <= n:
        r += 1
    return r


cdef inline long long _floordiv(long long a, long long d):
    cdef long long qt = a / d
    if (a % d != 0) and (a < 0):
        qt -= 1
    return qt


cdef long long _floor(long long p, long long q, long long d) except? -1:
    cdef long long m
    if q == 0:
        return _floordiv(p, d)
    m = _isqrt(_mul(2, _mul(q, q)))
    if q > 0:
        return _floordiv(_add(p, m), d)
    return _floordiv(_sub(_sub(p, m), 1), d)


def surd_sign(p, q):
    return _sign(p, q)


def surd_floor(p, q, d):
    return _floor(p, q, d)


cdef inline void _orbit(long long a, long long b, long long d, long long k,
                        long long *op, long long *oq) except *:
    cdef long long p = _mul(k, a)
    cdef long long q = _mul(k, b)
    cdef long long m = _floor(p, q, d)
    op[0] = _sub(p, _mul(m, d))
    oq[0] = q


def orbit_point(a, b, d, k):
    cdef long long p, q
    _orbit(a, b, d, k, &p, &q)
    return p, q


cdef Py_ssize_t _insert(vector[long long] &ps, vector[long long] &qs,
                        long long p, long long q) except -1:
    cdef Py_ssize_t lo = 0, hi = ps.size(), mid
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp(ps[mid], qs[mid], p, q) < 0:
            lo = mid + 1
        else:
            hi = mid
    ps.insert(ps.begin() + lo, p)
    qs.insert(qs.begin() + lo, q)
    return lo


def max_gap_search(long long a, long long b, long long d,
                   long long tp, long long tq, long long td, long long budget):
    cdef vector[long long] ps, qs
    cdef long long k = 0, gp, gq, hp, hq, p, q
    cdef Py_ssize_t n, j
    ps.push_back(0)
    qs.push_back(0)
    while True:
        n = ps.size()
        gp = _add(_sub(d, ps[n - 1]), ps[0])
        gq = _add(-qs[n - 1], qs[0])
        for j in range(n - 1):
            hp = ps[j + 1] - ps[j]
            hq = qs[j + 1] - qs[j]
            if _cmp(hp, hq, gp, gq) > 0:
                gp = hp
                gq = hq
        if _sign(_sub(_mul(gp, td), _mul(tp, d)), _sub(_mul(gq, td), _mul(tq, d))) <= 0:
            return k
        k += 1
        if k > budget:
            return -1
        _orbit(a, b, d, k, &p, &q)
        _insert(ps, qs, p, q)


def sorted_orbit(long long a, long long b, long long d, long long n):
    cdef vector[long long] ps, qs
    cdef long long k, p, q
    for k in range(1, n + 1):
        _orbit(a, b, d, k, &p, &q)
        if p == 0 and q == 0:
            p = d
        _insert(ps, qs, p, q)
    return [ps[j] for j in range(ps.size())], [qs[j] for j in range(qs.size())]


cdef tuple _scan(vector[long long] &ps, vector[long long] &qs, long long d, long long n):
    cdef Py_ssize_t m = ps.size(), j = 0, mult, step, c, ncand
    cdef long long count = 0, base_p, base_q
    cdef long long lo_p = 0, lo_q = 0, hi_p = 0, hi_q = 0
    cdef Py_ssize_t lo_idx = -1, hi_idx = -1
    cdef bint lo_lim = False, hi_lim = False
    cdef long long bp = 0, bq = 0
    cdef Py_ssize_t bx = -1, by = -1
    cdef bint bxl = False, byl = False, bover = True, have = False
    cdef long long gp[2]
    cdef long long gq[2]
    cdef bint glim[2]
    cdef long long up_p, up_q, dn_p, dn_q
    while j <= m:
        if j < m:
            mult = 1
            while j + mult < m and ps[j + mult] == ps[j] and qs[j + mult] == qs[j]:
                mult += 1
            base_p = _mul(-n, ps[j])
            base_q = _mul(-n, qs[j])
            gp[0] = _add(base_p, _mul(d, count))
            gq[0] = base_q
            glim[0] = True
            gp[1] = _add(base_p, _mul(d, count + mult))
            gq[1] = base_q
            glim[1] = False
            ncand = 2
            count += mult
            step = mult
        else:
            if m > 0 and ps[m - 1] == d and qs[m - 1] == 0:
                break
            gp[0] = _sub(_mul(d, count), _mul(n, d))
            gq[0] = 0
            glim[0] = False
            ncand = 1
            step = 1
        for c in range(ncand):
            up_p = _sub(gp[c], lo_p)
            up_q = _sub(gq[c], lo_q)
            if (not have) or _cmp(up_p, up_q, bp, bq) > 0:
                bp = up_p; bq = up_q
                bx = lo_idx; bxl = lo_lim; by = j; byl = glim[c]; bover = True
                have = True
            dn_p = _sub(hi_p, gp[c])
            dn_q = _sub(hi_q, gq[c])
            if _cmp(dn_p, dn_q, bp, bq) > 0:
                bp = dn_p; bq = dn_q
                bx = hi_idx; bxl = hi_lim; by = j; byl = glim[c]; bover = False
            if _cmp(gp[c], gq[c], lo_p, lo_q) < 0:
                lo_p = gp[c]; lo_q = gq[c]; lo_idx = j; lo_lim = glim[c]
            if _cmp(gp[c], gq[c], hi_p, hi_q) > 0:
                hi_p = gp[c]; hi_q = gq[c]; hi_idx = j; hi_lim = glim[c]
        j += step
    return bp, bq, bx, by, bxl, byl, bover


def discrepancy_scan(ps, qs, long long d, long long n):
    cdef vector[long long] vp, vq
    for p in ps:
        vp.push_back(p)
    for q in qs:
        vq.push_back(q)
    return _scan(vp, vq, d, n)


def discrepancy_threshold_search(long long a, long long b, long long d,
                                 long long tp, long long tq, long long td,
                                 long long budget):
    cdef vector[long long] ps, qs
    cdef long long n, p, q, vp, vq, dn
    cdef tuple res
    for n in range(1, budget + 1):
        _orbit(a, b, d, n, &p, &q)
        if p == 0 and q == 0:
            p = d
        _insert(ps, qs, p, q)
        res = _scan(ps, qs, d, n)
        vp = res[0]
        vq = res[1]
        dn = _mul(d, n)
        if _sign(_sub(_mul(vp, td), _mul(tp, dn)), _sub(_mul(vq, td), _mul(tq, dn))) < 0:
            return n, vp, vq
    return -1, 0, 0

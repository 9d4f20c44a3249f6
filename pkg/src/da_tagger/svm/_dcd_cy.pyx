# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled coordinate-descent epoch for the linear SVM dual.

Must stay arithmetically identical to the fallback in ``_dcd``: same
operations in the same order on the same doubles, so both backends
produce bit-identical weights. Keep the two files in sync.
"""


def epoch(double[::1] w, double[::1] alpha,
          long long[::1] indptr, int[::1] indices, double[::1] data,
          double[:, ::1] dense, double[::1] y, double[::1] qii,
          double c_upper, long long[::1] perm):
    """One pass over the permuted examples; returns max |projected gradient|.

    Mutates ``w`` and ``alpha`` in place. ``w`` layout: sparse weights,
    then dense-block weights, then the bias weight last.
    """
    cdef Py_ssize_t n = perm.shape[0]
    cdef Py_ssize_t d = dense.shape[1]
    cdef Py_ssize_t nw = w.shape[0]
    cdef Py_ssize_t nsp = nw - d - 1
    cdef Py_ssize_t t, i, j
    cdef long long k
    cdef double s, g, pg, apg, a, anew, delta, mpg
    mpg = 0.0
    with nogil:
        for t in range(n):
            i = <Py_ssize_t> perm[t]
            s = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                s += w[indices[k]] * data[k]
            for j in range(d):
                s += w[nsp + j] * dense[i, j]
            s += w[nw - 1]
            g = y[i] * s - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = g if g < 0.0 else 0.0
            elif a == c_upper:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            apg = -pg if pg < 0.0 else pg
            if apg > mpg:
                mpg = apg
            if pg != 0.0:
                anew = a - g / qii[i]
                if anew < 0.0:
                    anew = 0.0
                elif anew > c_upper:
                    anew = c_upper
                alpha[i] = anew
                delta = (anew - a) * y[i]
                if delta != 0.0:
                    for k in range(indptr[i], indptr[i + 1]):
                        w[indices[k]] += delta * data[k]
                    for j in range(d):
                        w[nsp + j] += delta * dense[i, j]
                    w[nw - 1] += delta
    return mpg

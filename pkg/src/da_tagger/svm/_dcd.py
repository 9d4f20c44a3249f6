"""Pure-Python coordinate-descent epoch, the fallback backend.

Must stay arithmetically identical to ``_dcd_cy.pyx``: same operations in
the same order on the same doubles, so both backends produce bit-identical
weights. Operates on plain Python floats (lists) for speed and converts
back at the end; the conversion is exact.
"""

from __future__ import annotations


def epoch(w, alpha, indptr, indices, data, dense, y, qii, c_upper, perm):
    """One pass over the permuted examples; returns max |projected gradient|.

    Mutates ``w`` and ``alpha`` in place. ``w`` layout: sparse weights,
    then dense-block weights, then the bias weight last.
    """
    n = perm.shape[0]
    d = dense.shape[1]
    nw = w.shape[0]
    nsp = nw - d - 1
    wl = w.tolist()
    al = alpha.tolist()
    ip = indptr.tolist()
    cols = indices.tolist()
    vals = data.tolist()
    dl = dense.tolist()
    yl = y.tolist()
    ql = qii.tolist()
    mpg = 0.0
    for i in perm.tolist():
        s = 0.0
        for k in range(ip[i], ip[i + 1]):
            s += wl[cols[k]] * vals[k]
        row = dl[i]
        for j in range(d):
            s += wl[nsp + j] * row[j]
        s += wl[nw - 1]
        g = yl[i] * s - 1.0
        a = al[i]
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
            anew = a - g / ql[i]
            if anew < 0.0:
                anew = 0.0
            elif anew > c_upper:
                anew = c_upper
            al[i] = anew
            delta = (anew - a) * yl[i]
            if delta != 0.0:
                for k in range(ip[i], ip[i + 1]):
                    wl[cols[k]] += delta * vals[k]
                for j in range(d):
                    wl[nsp + j] += delta * row[j]
                wl[nw - 1] += delta
    w[:] = wl
    alpha[:] = al
    return mpg

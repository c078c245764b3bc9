# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of emobench.kernels.pykernels.

Keep the two backends in lockstep: any semantic change must land in both.
The tree kernels replicate the python twin's arithmetic step for step
(sort by value with gather-order tie-break, sequential cumulative sums,
group sums as cumulative differences), so fitted trees are bit-identical
across backends. The per-sample update kernels reduce dot products with
plain loops where the python twin uses BLAS, so those agree only to float
rounding.
"""

import numpy as np

from libc.math cimport exp, log


# --- sorting: value ascending, gather order breaking ties ----------------------

cdef inline bint _lt(double va, long long oa, double vb, long long ob) noexcept:
    return va < vb or (va == vb and oa < ob)


cdef void _sort_entries(double[:] v, int[:] r, long long[:] o,
                        Py_ssize_t lo0, Py_ssize_t hi0) noexcept:
    # iterative quicksort; (value, original position) keys are all distinct
    cdef Py_ssize_t stack_lo[128]
    cdef Py_ssize_t stack_hi[128]
    cdef int top = 0
    cdef Py_ssize_t lo, hi, i, j, mid
    cdef double pv, tv
    cdef long long po, to_
    cdef int tr
    stack_lo[0] = lo0
    stack_hi[0] = hi0
    while top >= 0:
        lo = stack_lo[top]
        hi = stack_hi[top]
        top -= 1
        while hi - lo > 16:
            mid = lo + (hi - lo) // 2
            # median of three to the middle, then pivot there
            if _lt(v[mid], o[mid], v[lo], o[lo]):
                tv = v[lo]; v[lo] = v[mid]; v[mid] = tv
                tr = r[lo]; r[lo] = r[mid]; r[mid] = tr
                to_ = o[lo]; o[lo] = o[mid]; o[mid] = to_
            if _lt(v[hi], o[hi], v[lo], o[lo]):
                tv = v[lo]; v[lo] = v[hi]; v[hi] = tv
                tr = r[lo]; r[lo] = r[hi]; r[hi] = tr
                to_ = o[lo]; o[lo] = o[hi]; o[hi] = to_
            if _lt(v[hi], o[hi], v[mid], o[mid]):
                tv = v[mid]; v[mid] = v[hi]; v[hi] = tv
                tr = r[mid]; r[mid] = r[hi]; r[hi] = tr
                to_ = o[mid]; o[mid] = o[hi]; o[hi] = to_
            pv = v[mid]
            po = o[mid]
            i = lo
            j = hi
            while i <= j:
                while _lt(v[i], o[i], pv, po):
                    i += 1
                while _lt(pv, po, v[j], o[j]):
                    j -= 1
                if i <= j:
                    tv = v[i]; v[i] = v[j]; v[j] = tv
                    tr = r[i]; r[i] = r[j]; r[j] = tr
                    to_ = o[i]; o[i] = o[j]; o[j] = to_
                    i += 1
                    j -= 1
            # recurse into the smaller side, loop on the larger
            if j - lo < hi - i:
                if i < hi:
                    top += 1
                    stack_lo[top] = i
                    stack_hi[top] = hi
                hi = j
            else:
                if lo < j:
                    top += 1
                    stack_lo[top] = lo
                    stack_hi[top] = j
                lo = i
        # insertion sort for the short remainder
        for i in range(lo + 1, hi + 1):
            tv = v[i]
            tr = r[i]
            to_ = o[i]
            j = i - 1
            while j >= lo and _lt(tv, to_, v[j], o[j]):
                v[j + 1] = v[j]
                r[j + 1] = r[j]
                o[j + 1] = o[j]
                j -= 1
            v[j + 1] = tv
            r[j + 1] = tr
            o[j + 1] = to_


cdef inline Py_ssize_t _gather(long long[:] col_indptr, int[:] col_rows,
                               double[:] col_vals, int[:] pos,
                               long long start, long long end, long long feature,
                               double[:] bufv, int[:] bufr) noexcept:
    """Node members holding `feature`, ascending-row order; returns count."""
    cdef Py_ssize_t s = col_indptr[feature]
    cdef Py_ssize_t e = col_indptr[feature + 1]
    cdef Py_ssize_t jj, m = 0
    cdef int row, p
    for jj in range(s, e):
        row = col_rows[jj]
        p = pos[row]
        if p >= start and p < end:
            bufv[m] = col_vals[jj]
            bufr[m] = row
            m += 1
    return m


cdef inline double _midpoint(double lo, double hi) noexcept:
    cdef double thr = (lo + hi) / 2.0
    # never let rounding push the threshold onto the right group's value
    return lo if thr == hi else thr


def gini_best_split(long long[:] col_indptr, int[:] col_rows, double[:] col_vals,
                    int[:] pos, long long start, long long end,
                    double[:] weight, int[:] labels, double[:] node_counts,
                    long long[:] features):
    """Best (feature, threshold, gain) for a classification node.

    Same contract as the python twin: weights must be integral for
    cross-backend bit equality; feature -1 means no positive-gain split.
    """
    cdef Py_ssize_t k = node_counts.shape[0]
    cdef Py_ssize_t nmax = end - start
    cdef double total_w = 0.0, parent = 0.0
    cdef Py_ssize_t c
    for c in range(k):
        total_w += node_counts[c]
    for c in range(k):
        parent += node_counts[c] * node_counts[c]
    parent /= total_w

    bufv_a = np.empty(nmax, dtype=np.float64)
    bufr_a = np.empty(nmax, dtype=np.int32)
    bufo_a = np.empty(nmax, dtype=np.int64)
    ends_a = np.empty(nmax, dtype=np.int64)
    gcls_a = np.empty((nmax, k), dtype=np.float64)
    cum_a = np.empty(k, dtype=np.float64)
    zero_a = np.empty(k, dtype=np.float64)
    cdef double[:] bufv = bufv_a
    cdef int[:] bufr = bufr_a
    cdef long long[:] bufo = bufo_a
    cdef long long[:] ends = ends_a
    cdef double[:, :] gcls = gcls_a
    cdef double[:] cum = cum_a
    cdef double[:] zero_cls = zero_a

    cdef long long best_feat = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    cdef Py_ssize_t fi, m, j, g, ng, t_groups, kpos, b, best_b
    cdef long long f
    cdef double zero_w, wl, wr, sl2, sr2, gain, local_best, gv_b, gv_b1, nz
    cdef bint has_zero

    for fi in range(features.shape[0]):
        f = features[fi]
        m = _gather(col_indptr, col_rows, col_vals, pos, start, end, f, bufv, bufr)
        if m == 0:
            continue
        for j in range(m):
            bufo[j] = j
        _sort_entries(bufv, bufr, bufo, 0, m - 1)

        ng = 0
        for j in range(m - 1):
            if bufv[j + 1] != bufv[j]:
                ends[ng] = j
                ng += 1
        ends[ng] = m - 1
        ng += 1

        for g in range(ng):
            for c in range(k):
                gcls[g, c] = 0.0
        g = 0
        for j in range(m):
            if j > ends[g]:
                g += 1
            gcls[g, labels[bufr[j]]] += weight[bufr[j]]

        zero_w = 0.0
        for c in range(k):
            nz = 0.0
            for g in range(ng):
                nz += gcls[g, c]
            zero_cls[c] = node_counts[c] - nz
            zero_w += zero_cls[c]
        has_zero = zero_w > 0.0
        if has_zero:
            kpos = 0
            while kpos < ng and bufv[ends[kpos]] < 0.0:
                kpos += 1
            t_groups = ng + 1
        else:
            kpos = ng
            t_groups = ng
        if t_groups < 2:
            continue

        # boundary scan; cum accumulates groups in value order, the all-zero
        # group (if any) injected at its sorted position
        for c in range(k):
            cum[c] = 0.0
        local_best = 0.0
        best_b = -1
        for b in range(t_groups - 1):
            if has_zero and b == kpos:
                for c in range(k):
                    cum[c] += zero_cls[c]
            else:
                g = b - 1 if (has_zero and b > kpos) else b
                for c in range(k):
                    cum[c] += gcls[g, c]
            wl = 0.0
            for c in range(k):
                wl += cum[c]
            wr = total_w - wl
            sl2 = 0.0
            sr2 = 0.0
            for c in range(k):
                sl2 += cum[c] * cum[c]
                sr2 += (node_counts[c] - cum[c]) * (node_counts[c] - cum[c])
            gain = sl2 / wl + sr2 / wr - parent
            if best_b < 0 or gain > local_best:
                local_best = gain
                best_b = b
        if local_best > best_gain:
            best_gain = local_best
            best_feat = f
            b = best_b
            if has_zero and b == kpos:
                gv_b = 0.0
            else:
                gv_b = bufv[ends[b - 1 if (has_zero and b > kpos) else b]]
            b += 1
            if has_zero and b == kpos:
                gv_b1 = 0.0
            else:
                gv_b1 = bufv[ends[b - 1 if (has_zero and b > kpos) else b]]
            best_thr = _midpoint(gv_b, gv_b1)
    return int(best_feat), float(best_thr), float(best_gain)


def mse_best_split(long long[:] col_indptr, int[:] col_rows, double[:] col_vals,
                   int[:] pos, long long start, long long end,
                   double[:] target, double node_sum, double node_n,
                   long long[:] features):
    """Best variance-reducing split for a regression node (unit weights)."""
    cdef double parent = node_sum * node_sum / node_n
    cdef Py_ssize_t nmax = end - start

    bufv_a = np.empty(nmax, dtype=np.float64)
    bufr_a = np.empty(nmax, dtype=np.int32)
    bufo_a = np.empty(nmax, dtype=np.int64)
    ends_a = np.empty(nmax, dtype=np.int64)
    gsum_a = np.empty(nmax, dtype=np.float64)
    gcnt_a = np.empty(nmax, dtype=np.float64)
    cdef double[:] bufv = bufv_a
    cdef int[:] bufr = bufr_a
    cdef long long[:] bufo = bufo_a
    cdef long long[:] ends = ends_a
    cdef double[:] gsum = gsum_a
    cdef double[:] gcnt = gcnt_a

    cdef long long best_feat = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    cdef Py_ssize_t fi, m, j, g, ng, t_groups, kpos, b, best_b
    cdef long long f
    cdef double run, prev, zero_n, zero_sum, sl, nl, sr, nr, gain, local_best
    cdef double gv_b, gv_b1, bsum, bcnt
    cdef bint has_zero

    for fi in range(features.shape[0]):
        f = features[fi]
        m = _gather(col_indptr, col_rows, col_vals, pos, start, end, f, bufv, bufr)
        if m == 0:
            continue
        for j in range(m):
            bufo[j] = j
        _sort_entries(bufv, bufr, bufo, 0, m - 1)

        ng = 0
        for j in range(m - 1):
            if bufv[j + 1] != bufv[j]:
                ends[ng] = j
                ng += 1
        ends[ng] = m - 1
        ng += 1

        # sequential cumulative sum over sorted targets; group sums are the
        # differences of that cumulative at run ends
        run = 0.0
        prev = 0.0
        g = 0
        for j in range(m):
            run += target[bufr[j]]
            if j == ends[g]:
                gsum[g] = run - prev
                gcnt[g] = <double> (ends[g] - (ends[g - 1] if g > 0 else -1))
                prev = run
                g += 1

        zero_n = node_n - <double> m
        has_zero = zero_n > 0.0
        if has_zero:
            zero_sum = node_sum - run
            kpos = 0
            while kpos < ng and bufv[ends[kpos]] < 0.0:
                kpos += 1
            t_groups = ng + 1
        else:
            zero_sum = 0.0
            kpos = ng
            t_groups = ng
        if t_groups < 2:
            continue

        sl = 0.0
        nl = 0.0
        local_best = 0.0
        best_b = -1
        for b in range(t_groups - 1):
            if has_zero and b == kpos:
                bsum = zero_sum
                bcnt = zero_n
            else:
                g = b - 1 if (has_zero and b > kpos) else b
                bsum = gsum[g]
                bcnt = gcnt[g]
            sl += bsum
            nl += bcnt
            sr = node_sum - sl
            nr = node_n - nl
            gain = sl * sl / nl + sr * sr / nr - parent
            if best_b < 0 or gain > local_best:
                local_best = gain
                best_b = b
        if local_best > best_gain:
            best_gain = local_best
            best_feat = f
            b = best_b
            if has_zero and b == kpos:
                gv_b = 0.0
            else:
                gv_b = bufv[ends[b - 1 if (has_zero and b > kpos) else b]]
            b += 1
            if has_zero and b == kpos:
                gv_b1 = 0.0
            else:
                gv_b1 = bufv[ends[b - 1 if (has_zero and b > kpos) else b]]
            best_thr = _midpoint(gv_b, gv_b1)
    return int(best_feat), float(best_thr), float(best_gain)


def partition_node(long long[:] col_indptr, int[:] col_rows, double[:] col_vals,
                   int[:] pos, int[:] samples, long long start, long long end,
                   long long feature, double threshold):
    """Stable partition of samples[start:end] on x[feature] <= threshold.

    Updates `samples` and `pos` in place; returns the boundary position.
    """
    cdef Py_ssize_t n = end - start
    seg_a = np.empty(n, dtype=np.int32)
    vals_a = np.zeros(n, dtype=np.float64)
    cdef int[:] seg = seg_a
    cdef double[:] vals = vals_a
    cdef Py_ssize_t j, s, e, w
    cdef int row
    for j in range(n):
        seg[j] = samples[start + j]
    s = col_indptr[feature]
    e = col_indptr[feature + 1]
    for j in range(s, e):
        row = col_rows[j]
        if pos[row] >= start and pos[row] < end:
            vals[pos[row] - start] = col_vals[j]
    w = start
    for j in range(n):
        if vals[j] <= threshold:
            samples[w] = seg[j]
            w += 1
    cdef Py_ssize_t boundary = w
    for j in range(n):
        if not (vals[j] <= threshold):
            samples[w] = seg[j]
            w += 1
    for j in range(start, end):
        pos[samples[j]] = <int> j
    return int(boundary)


def tree_predict(int[:] children_left, int[:] children_right, int[:] feature,
                 double[:] threshold, double[:] leaf_value,
                 long long[:] indptr, int[:] indices, double[:] data,
                 long long n_cols, double[:] out):
    """Route every CSR row to its leaf; write leaf values into `out`."""
    scratch_a = np.zeros(n_cols, dtype=np.float64)
    cdef double[:] scratch = scratch_a
    cdef Py_ssize_t i, j, s, e
    cdef int node
    for i in range(out.shape[0]):
        s = indptr[i]
        e = indptr[i + 1]
        for j in range(s, e):
            scratch[indices[j]] = data[j]
        node = 0
        while children_left[node] >= 0:
            if scratch[feature[node]] <= threshold[node]:
                node = children_left[node]
            else:
                node = children_right[node]
        out[i] = leaf_value[node]
        for j in range(s, e):
            scratch[indices[j]] = 0.0


# --- per-sample update passes ---------------------------------------------------

cdef inline double _sigmoid(double z) noexcept:
    cdef double ez
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    ez = exp(z)
    return ez / (1.0 + ez)


def delta_epoch(long long[:] indptr, int[:] indices, double[:] data,
                double[:] y01, long long[:] order, double[:] w, double b0,
                double lr):
    """One delta-rule epoch for a binary sigmoid unit; returns updated bias."""
    cdef Py_ssize_t ii, j, s, e
    cdef long long i
    cdef double z, p, g
    for ii in range(order.shape[0]):
        i = order[ii]
        s = indptr[i]
        e = indptr[i + 1]
        z = b0
        for j in range(s, e):
            z += w[indices[j]] * data[j]
        p = _sigmoid(z)
        g = lr * (y01[i] - p) * p * (1.0 - p)
        for j in range(s, e):
            w[indices[j]] += g * data[j]
        b0 += g
    return b0


def softmax_delta_epoch(long long[:] indptr, int[:] indices, double[:] data,
                        int[:] ycode, long long[:] order, double[:, :] wmat,
                        double[:] bias, double lr):
    """Delta-rule epoch for a softmax layer with a fixed reference class."""
    cdef Py_ssize_t km1 = wmat.shape[0]
    cdef Py_ssize_t k = km1 + 1
    z_a = np.empty(k, dtype=np.float64)
    p_a = np.empty(k, dtype=np.float64)
    err_a = np.empty(k, dtype=np.float64)
    cdef double[:] z = z_a
    cdef double[:] p = p_a
    cdef double[:] err = err_a
    cdef Py_ssize_t ii, j, s, e, c
    cdef long long i
    cdef double zmax, psum, ep, g
    for ii in range(order.shape[0]):
        i = order[ii]
        s = indptr[i]
        e = indptr[i + 1]
        for c in range(km1):
            z[c] = bias[c]
            for j in range(s, e):
                z[c] += wmat[c, indices[j]] * data[j]
        z[km1] = 0.0
        zmax = z[0]
        for c in range(1, k):
            if z[c] > zmax:
                zmax = z[c]
        psum = 0.0
        for c in range(k):
            p[c] = exp(z[c] - zmax)
            psum += p[c]
        for c in range(k):
            p[c] /= psum
            err[c] = -p[c]
        err[ycode[i]] += 1.0
        ep = 0.0
        for c in range(k):
            ep += err[c] * p[c]
        for c in range(km1):
            g = lr * (p[c] * (err[c] - ep))
            for j in range(s, e):
                wmat[c, indices[j]] += g * data[j]
            bias[c] += g


def linear_sgd_epoch(long long[:] indptr, int[:] indices, double[:] data,
                     double[:] ysign, long long[:] order, double[:] u,
                     double scale, double b0, long long t, long long loss_code,
                     double eta0, double decay, double lam):
    """One SGD epoch over a linear model kept as w = scale * u.

    Same contract as the python twin; returns (scale, b0, t).
    """
    cdef Py_ssize_t ii, j, s, e
    cdef long long i
    cdef double eta, dot, y, p, g
    cdef bint violated
    for ii in range(order.shape[0]):
        eta = eta0 / (1.0 + decay * <double> t)
        i = order[ii]
        s = indptr[i]
        e = indptr[i + 1]
        dot = 0.0
        for j in range(s, e):
            dot += u[indices[j]] * data[j]
        dot *= scale
        y = ysign[i]
        if loss_code == 0:
            violated = y * (b0 + dot) < 1.0
            scale *= 1.0 - eta * lam
            if scale == 0.0:  # pathological eta*lam == 1 wipes the weights
                for j in range(u.shape[0]):
                    u[j] = 0.0
                scale = 1.0
            if violated:
                g = eta * y / scale
                for j in range(s, e):
                    u[indices[j]] += g * data[j]
                b0 += eta * y
        else:
            p = _sigmoid(b0 + dot)
            g = eta * ((y + 1.0) / 2.0 - p)
            for j in range(s, e):
                u[indices[j]] += (g / scale) * data[j]
            b0 += g
        t += 1
    return float(scale), float(b0), int(t)


def bpn_epoch(long long[:] indptr, int[:] indices, double[:] data,
              int[:] ycode, long long[:] order, double[:, :] w1, double[:] b1,
              double[:, :] w2, double[:] b2, double lr):
    """One epoch of per-sample backprop SGD; returns summed cross-entropy.

    Sigmoid hidden layer, softmax output; the hidden-layer gradient uses the
    pre-update output weights. exp overflow saturates the activation to 0.
    """
    cdef Py_ssize_t h_dim = w1.shape[0]
    cdef Py_ssize_t k = w2.shape[0]
    act_a = np.empty(h_dim, dtype=np.float64)
    dh_a = np.empty(h_dim, dtype=np.float64)
    z_a = np.empty(k, dtype=np.float64)
    p_a = np.empty(k, dtype=np.float64)
    cdef double[:] act = act_a
    cdef double[:] dh = dh_a
    cdef double[:] z = z_a
    cdef double[:] p = p_a
    cdef Py_ssize_t ii, j, s, e, h, c
    cdef long long i
    cdef double loss = 0.0
    cdef double zmax, psum, py, dz_c, da_h
    for ii in range(order.shape[0]):
        i = order[ii]
        s = indptr[i]
        e = indptr[i + 1]
        for h in range(h_dim):
            act[h] = b1[h]
            for j in range(s, e):
                act[h] += w1[h, indices[j]] * data[j]
            act[h] = 1.0 / (1.0 + exp(-act[h]))  # hid
        for c in range(k):
            z[c] = b2[c]
            for h in range(h_dim):
                z[c] += w2[c, h] * act[h]
        zmax = z[0]
        for c in range(1, k):
            if z[c] > zmax:
                zmax = z[c]
        psum = 0.0
        for c in range(k):
            p[c] = exp(z[c] - zmax)
            psum += p[c]
        for c in range(k):
            p[c] /= psum
        py = p[ycode[i]]
        if py < 1e-300:
            py = 1e-300
        loss -= log(py)
        p[ycode[i]] -= 1.0  # p now holds dz
        for h in range(h_dim):
            dh[h] = 0.0
            for c in range(k):
                dh[h] += w2[c, h] * p[c]
        for c in range(k):
            dz_c = p[c]
            for h in range(h_dim):
                w2[c, h] -= lr * dz_c * act[h]
            b2[c] -= lr * dz_c
        for h in range(h_dim):
            da_h = dh[h] * act[h] * (1.0 - act[h])
            for j in range(s, e):
                w1[h, indices[j]] -= lr * da_h * data[j]
            b1[h] -= lr * da_h
    return float(loss)


# --- shared dense products -------------------------------------------------------

def csr_matmat(long long[:] indptr, int[:] indices, double[:] data,
               double[:, :] dense, double[:, :] out):
    """out[i, :] = sum_j csr[i, j] * dense[j, :] for every row i."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t m = out.shape[1]
    cdef Py_ssize_t i, j, c, s, e
    cdef double d
    cdef int r
    for i in range(n):
        for c in range(m):
            out[i, c] = 0.0
    for i in range(n):
        s = indptr[i]
        e = indptr[i + 1]
        for j in range(s, e):
            d = data[j]
            r = indices[j]
            for c in range(m):
                out[i, c] += d * dense[r, c]

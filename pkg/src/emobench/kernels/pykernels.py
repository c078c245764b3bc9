"""Pure-Python/numpy twin of the compiled kernels.

Keep the two backends in lockstep: any semantic change here must land in
_ckernels.pyx as well. The tree kernels are structured so every float is
produced by the same sequence of operations in both backends (sequential
cumulative sums over entries sorted by value with gather-order tie-break,
group sums as cumulative differences), which makes fitted trees bit-identical
across backends. The update kernels reduce dot products differently (BLAS
here, plain loops in C), so those match only to float rounding.
"""

from __future__ import annotations

import math

import numpy as np


# --- decision tree splits ----------------------------------------------------

def _gather_column(col_indptr, col_rows, col_vals, pos, start, end, feature):
    """Node members holding `feature`, in ascending-row (gather) order."""
    s, e = int(col_indptr[feature]), int(col_indptr[feature + 1])
    rows_f = col_rows[s:e]
    p = pos[rows_f]
    msk = (p >= start) & (p < end)
    return rows_f[msk], col_vals[s:e][msk]


def _group_ends(sorted_vals):
    """Inclusive end index of each run of equal values."""
    if len(sorted_vals) == 0:
        return np.empty(0, dtype=np.int64)
    change = np.flatnonzero(sorted_vals[1:] != sorted_vals[:-1])
    return np.append(change, len(sorted_vals) - 1)


def _midpoint(lo: float, hi: float) -> float:
    thr = (lo + hi) / 2.0
    # never let rounding push the threshold onto the right group's value
    return lo if thr == hi else thr


def gini_best_split(col_indptr, col_rows, col_vals, pos, start, end,
                    weight, labels, node_counts, features):
    """Best (feature, threshold, gain) for a classification node.

    node_counts holds the node's per-class weighted counts. Weights must be
    integral (bootstrap multiplicities) for cross-backend bit equality.
    Returns feature -1 when no split has strictly positive gain.
    """
    k = len(node_counts)
    total_w = 0.0
    parent = 0.0
    for c in range(k):
        total_w += float(node_counts[c])
    for c in range(k):
        parent += float(node_counts[c]) * float(node_counts[c])
    parent /= total_w

    best_feat, best_thr, best_gain = -1, 0.0, 0.0
    for f in features:
        rows_nz, vals = _gather_column(col_indptr, col_rows, col_vals, pos, start, end, int(f))
        if len(rows_nz) == 0:
            continue
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        sl = labels[rows_nz[order]]
        sw = weight[rows_nz[order]]
        ends = _group_ends(sv)
        n_groups = len(ends)
        sizes = np.diff(np.concatenate(([-1], ends)))
        gid = np.repeat(np.arange(n_groups), sizes)
        gcls = np.zeros((n_groups, k))
        np.add.at(gcls, (gid, sl), sw)
        gvals = sv[ends]

        nz_cls = gcls.sum(axis=0)
        zero_cls = np.asarray(node_counts, dtype=np.float64) - nz_cls
        zero_w = float(zero_cls.sum())
        if zero_w > 0.0:
            kpos = int(np.searchsorted(gvals, 0.0))
            gvals = np.insert(gvals, kpos, 0.0)
            gcls = np.insert(gcls, kpos, zero_cls, axis=0)
            n_groups += 1
        if n_groups < 2:
            continue

        cum_cls = np.cumsum(gcls, axis=0)[:-1]          # boundaries only
        wl = cum_cls.sum(axis=1)
        wr = total_w - wl
        rest = np.asarray(node_counts, dtype=np.float64)[None, :] - cum_cls
        gains = (cum_cls * cum_cls).sum(axis=1) / wl \
            + (rest * rest).sum(axis=1) / wr - parent
        b = int(np.argmax(gains))
        if gains[b] > best_gain:
            best_gain = float(gains[b])
            best_feat = int(f)
            best_thr = _midpoint(float(gvals[b]), float(gvals[b + 1]))
    return best_feat, best_thr, best_gain


def mse_best_split(col_indptr, col_rows, col_vals, pos, start, end,
                   target, node_sum, node_n, features):
    """Best variance-reducing split for a regression node (unit weights)."""
    parent = node_sum * node_sum / node_n
    best_feat, best_thr, best_gain = -1, 0.0, 0.0
    for f in features:
        rows_nz, vals = _gather_column(col_indptr, col_rows, col_vals, pos, start, end, int(f))
        if len(rows_nz) == 0:
            continue
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        st = target[rows_nz[order]]
        cum_t = np.cumsum(st)
        ends = _group_ends(sv)
        gvals = sv[ends]
        gsum = np.diff(np.concatenate(([0.0], cum_t[ends])))
        gcnt = np.diff(np.concatenate(([-1], ends))).astype(np.float64)
        n_groups = len(ends)

        zero_n = float(node_n - len(sv))
        if zero_n > 0.0:
            zero_sum = node_sum - float(cum_t[-1])
            kpos = int(np.searchsorted(gvals, 0.0))
            gvals = np.insert(gvals, kpos, 0.0)
            gsum = np.insert(gsum, kpos, zero_sum)
            gcnt = np.insert(gcnt, kpos, zero_n)
            n_groups += 1
        if n_groups < 2:
            continue

        sl = np.cumsum(gsum)[:-1]
        nl = np.cumsum(gcnt)[:-1]
        sr = node_sum - sl
        nr = node_n - nl
        gains = sl * sl / nl + sr * sr / nr - parent
        b = int(np.argmax(gains))
        if gains[b] > best_gain:
            best_gain = float(gains[b])
            best_feat = int(f)
            best_thr = _midpoint(float(gvals[b]), float(gvals[b + 1]))
    return best_feat, best_thr, best_gain


def partition_node(col_indptr, col_rows, col_vals, pos, samples, start, end,
                   feature, threshold):
    """Stable partition of samples[start:end] on x[feature] <= threshold.

    Updates `samples` and `pos` in place; returns the boundary position.
    """
    seg = samples[start:end].copy()
    vals = np.zeros(len(seg))
    rows_nz, v = _gather_column(col_indptr, col_rows, col_vals, pos, start, end, feature)
    vals[pos[rows_nz] - start] = v
    left_mask = vals <= threshold
    n_left = int(left_mask.sum())
    samples[start:start + n_left] = seg[left_mask]
    samples[start + n_left:end] = seg[~left_mask]
    pos[samples[start:end]] = np.arange(start, end, dtype=pos.dtype)
    return start + n_left


def tree_predict(children_left, children_right, feature, threshold, leaf_value,
                 indptr, indices, data, n_cols, out):
    """Route every CSR row to its leaf; write leaf values into `out`."""
    scratch = np.zeros(n_cols)
    for i in range(len(out)):
        s, e = int(indptr[i]), int(indptr[i + 1])
        idx = indices[s:e]
        scratch[idx] = data[s:e]
        node = 0
        while children_left[node] >= 0:
            if scratch[feature[node]] <= threshold[node]:
                node = children_left[node]
            else:
                node = children_right[node]
        out[i] = leaf_value[node]
        scratch[idx] = 0.0


# --- per-sample update passes ------------------------------------------------

def _sigmoid(z: float) -> float:
    # split form avoids overflow in exp for large |z|
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def delta_epoch(indptr, indices, data, y01, order, w, b0, lr):
    """One delta-rule epoch for a binary sigmoid unit; returns updated bias.

    Per sample: p = sigmoid(b0 + w.x); g = lr*(y-p)*p*(1-p); w += g*x; b0 += g.
    """
    for i in order:
        s, e = int(indptr[i]), int(indptr[i + 1])
        idx = indices[s:e]
        vals = data[s:e]
        z = b0 + float(w[idx] @ vals)
        p = _sigmoid(z)
        g = lr * (y01[i] - p) * p * (1.0 - p)
        w[idx] += g * vals
        b0 += g
    return b0


def softmax_delta_epoch(indptr, indices, data, ycode, order, wmat, bias, lr):
    """Delta-rule epoch for a softmax layer with a fixed reference class.

    wmat is (k-1, n_features); the last class's logit is pinned to 0. The
    update is the squared-error delta rule pushed through the softmax
    Jacobian: g_i = sum_c (y_c - p_c) * p_c * ((c == i) - p_i).
    """
    km1 = wmat.shape[0]
    k = km1 + 1
    for i in order:
        s, e = int(indptr[i]), int(indptr[i + 1])
        idx = indices[s:e]
        vals = data[s:e]
        z = np.zeros(k)
        z[:km1] = wmat[:, idx] @ vals + bias
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        err = -p
        err[ycode[i]] += 1.0
        ep = float(err @ p)
        g = p[:km1] * (err[:km1] - ep)
        wmat[:, idx] += lr * np.outer(g, vals)
        bias += lr * g


def linear_sgd_epoch(indptr, indices, data, ysign, order, u, scale, b0, t,
                     loss_code, eta0, decay, lam):
    """One SGD epoch over a linear model kept as w = scale * u.

    loss_code 0 is hinge (margin < 1 triggers an update; weights decay by
    (1 - eta*lam) every step), loss_code 1 is log loss (no decay term).
    The step size is eta0 / (1 + decay*t) with t counting samples from the
    start of training. Returns (scale, b0, t).
    """
    for i in order:
        eta = eta0 / (1.0 + decay * t)
        s, e = int(indptr[i]), int(indptr[i + 1])
        idx = indices[s:e]
        vals = data[s:e]
        dot = scale * float(u[idx] @ vals)
        y = float(ysign[i])
        if loss_code == 0:
            violated = y * (b0 + dot) < 1.0
            scale *= 1.0 - eta * lam
            if scale == 0.0:  # pathological eta*lam == 1 wipes the weights
                u[:] = 0.0
                scale = 1.0
            if violated:
                u[idx] += (eta * y / scale) * vals
                b0 += eta * y
        else:
            p = _sigmoid(b0 + dot)
            g = eta * ((y + 1.0) / 2.0 - p)
            u[idx] += (g / scale) * vals
            b0 += g
        t += 1
    return scale, b0, t


def bpn_epoch(indptr, indices, data, ycode, order, w1, b1, w2, b2, lr):
    """One epoch of per-sample backprop SGD; returns summed cross-entropy.

    Architecture: sigmoid hidden layer, softmax output, one sample at a time.
    The hidden-layer gradient uses the pre-update output weights.
    """
    loss = 0.0
    # exp overflow saturates to a 0/1 activation, same as the C twin; the
    # errstate guard only silences numpy's warning about it
    with np.errstate(over="ignore"):
        return _bpn_epoch_inner(indptr, indices, data, ycode, order, w1, b1, w2, b2, lr, loss)


def _bpn_epoch_inner(indptr, indices, data, ycode, order, w1, b1, w2, b2, lr, loss):
    for i in order:
        s, e = int(indptr[i]), int(indptr[i + 1])
        idx = indices[s:e]
        vals = data[s:e]
        act = w1[:, idx] @ vals + b1
        hid = 1.0 / (1.0 + np.exp(-act))
        z = w2 @ hid + b2
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        loss -= math.log(max(float(p[ycode[i]]), 1e-300))
        dz = p.copy()
        dz[ycode[i]] -= 1.0
        dh = w2.T @ dz
        w2 -= lr * np.outer(dz, hid)
        b2 -= lr * dz
        da = dh * hid * (1.0 - hid)
        w1[:, idx] -= lr * np.outer(da, vals)
        b1 -= lr * da
    return loss


# --- shared dense products ---------------------------------------------------

def csr_matmat(indptr, indices, data, dense, out):
    """out[i, :] = sum_j csr[i, j] * dense[j, :] for every row i."""
    out[:] = 0.0
    if len(data) == 0:
        return
    nonempty = np.flatnonzero(indptr[1:] > indptr[:-1])
    prods = data[:, None] * dense[indices]
    # one reduceat segment per non-empty row: each start is that row's first
    # entry, and the next start (or the array end) is exactly the row's end
    out[nonempty] = np.add.reduceat(prods, indptr[nonempty], axis=0)

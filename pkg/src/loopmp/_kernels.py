"""Compiled inner loops shared by the solvers and oracles.

All kernels operate on flat packed arrays (CSR-style offsets) so that a whole
sweep over messages or nodes is a single compiled call. Zero factors are
tracked separately from running products so that divisions never hit 0/0.
"""

from __future__ import annotations

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# percolation: generating-function evaluation
#
# Packed layout, per target t (a message's reduced neighborhood or a node's
# full neighborhood):
#   members  local 0..K-1   K = off_mem[t+1]-off_mem[t]
#   dep[off_mem[t]+a]       index into the h source vector for member a
#   direct[..]              1 if member a shares an edge with the focal node
#   internal edges e = off_ie[t]..off_ie[t+1]-1 with member-local endpoints
#   ie_a[e], ie_b[e]
# MC targets additionally carry per-sample merge scripts (sc_keep/sc_abs,
# -1 for a no-op step) and binomial weights wts[off_w[t] .. off_w[t]+M].
# ---------------------------------------------------------------------------


@njit(cache=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def exact_g_values(hsrc, p, idx, off_mem, dep, direct, off_ie, ie_a, ie_b, max_k, out):
    """Exact G values by enumeration of internal-edge configurations.

    For each occupancy of the M internal edges the members split into
    clusters; the focal node reaches a whole cluster iff any of its direct
    spokes into that cluster is occupied, giving the per-cluster factor
    q_c + (1-q_c) x_c with q_c = (1-p)^(#direct in c) and x_c = prod of y.
    """
    y = np.empty(max_k)
    parent = np.empty(max_k, dtype=np.int64)
    qcl = np.empty(max_k)
    xcl = np.empty(max_k)
    for ti in range(idx.shape[0]):
        t = idx[ti]
        k0 = off_mem[t]
        K = off_mem[t + 1] - k0
        e0 = off_ie[t]
        M = off_ie[t + 1] - e0
        for a in range(K):
            y[a] = hsrc[dep[k0 + a]]
        total = 0.0
        for mask in range(1 << M):
            for a in range(K):
                parent[a] = a
            nocc = 0
            for e in range(M):
                if (mask >> e) & 1:
                    nocc += 1
                    ra = _uf_find(parent, ie_a[e0 + e])
                    rb = _uf_find(parent, ie_b[e0 + e])
                    if ra != rb:
                        parent[rb] = ra
            w = p**nocc * (1.0 - p) ** (M - nocc)
            for a in range(K):
                qcl[a] = 1.0
                xcl[a] = 1.0
            for a in range(K):
                r = _uf_find(parent, a)
                if direct[k0 + a]:
                    qcl[r] *= 1.0 - p
                xcl[r] *= y[a]
            val = 1.0
            for a in range(K):
                if parent[a] == a:
                    val *= qcl[a] + (1.0 - qcl[a]) * xcl[a]
            total += w * val
        out[t] = total


@njit(cache=True)
def exact_g_grads(hsrc, p, idx, off_mem, dep, direct, off_ie, ie_a, ie_b, max_k, out, gout):
    """Exact G values plus partial derivatives w.r.t. each member's y.

    d/dy_j of a cluster factor is (1-q_c) * (x_c / y_j); products are kept
    zero-aware (nonzero part + zero count) so y_j = 0 needs no special pass.
    """
    y = np.empty(max_k)
    parent = np.empty(max_k, dtype=np.int64)
    qcl = np.empty(max_k)
    xnz = np.empty(max_k)
    xzc = np.empty(max_k, dtype=np.int64)
    fcl = np.empty(max_k)
    root_of = np.empty(max_k, dtype=np.int64)
    for ti in range(idx.shape[0]):
        t = idx[ti]
        k0 = off_mem[t]
        K = off_mem[t + 1] - k0
        e0 = off_ie[t]
        M = off_ie[t + 1] - e0
        for a in range(K):
            y[a] = hsrc[dep[k0 + a]]
            gout[k0 + a] = 0.0
        total = 0.0
        for mask in range(1 << M):
            for a in range(K):
                parent[a] = a
            nocc = 0
            for e in range(M):
                if (mask >> e) & 1:
                    nocc += 1
                    ra = _uf_find(parent, ie_a[e0 + e])
                    rb = _uf_find(parent, ie_b[e0 + e])
                    if ra != rb:
                        parent[rb] = ra
            w = p**nocc * (1.0 - p) ** (M - nocc)
            for a in range(K):
                qcl[a] = 1.0
                xnz[a] = 1.0
                xzc[a] = 0
            for a in range(K):
                r = _uf_find(parent, a)
                root_of[a] = r
                if direct[k0 + a]:
                    qcl[r] *= 1.0 - p
                ya = y[a]
                if ya == 0.0:
                    xzc[r] += 1
                else:
                    xnz[r] *= ya
            unz = 1.0
            uzc = 0
            for a in range(K):
                if parent[a] == a:
                    x = xnz[a] if xzc[a] == 0 else 0.0
                    f = qcl[a] + (1.0 - qcl[a]) * x
                    fcl[a] = f
                    if f == 0.0:
                        uzc += 1
                    else:
                        unz *= f
            total += w * (unz if uzc == 0 else 0.0)
            for a in range(K):
                r = root_of[a]
                f = fcl[r]
                if uzc == 0:
                    base = unz / f
                elif uzc == 1 and f == 0.0:
                    base = unz
                else:
                    continue
                ya = y[a]
                if ya == 0.0:
                    x_over = xnz[r] if xzc[r] == 1 else 0.0
                else:
                    x_over = xnz[r] / ya if xzc[r] == 0 else 0.0
                if x_over != 0.0:
                    gout[k0 + a] += w * base * (1.0 - qcl[r]) * x_over
        out[t] = total


@njit(cache=True)
def mc_g_values(
    hsrc, p, idx, off_mem, dep, direct, ms, off_w, wts, off_script, sc_keep, sc_abs, samples, max_k, out
):
    """Monte Carlo G estimate: replay precomputed merge scripts.

    Per sample, u_m tracks the cluster-factor product as the m-th internal
    edge is occupied; the estimate is sum_m u_m * Binom(M, m; p), averaged
    over samples. Scripts are fixed, so repeated calls are deterministic.
    """
    x = np.empty(max_k)
    q = np.empty(max_k)
    f = np.empty(max_k)
    for ti in range(idx.shape[0]):
        t = idx[ti]
        k0 = off_mem[t]
        K = off_mem[t + 1] - k0
        M = ms[t]
        w0 = off_w[t]
        acc_t = 0.0
        for s in range(samples):
            unz = 1.0
            uzc = 0
            for a in range(K):
                ya = hsrc[dep[k0 + a]]
                x[a] = ya
                qa = 1.0 - p if direct[k0 + a] else 1.0
                q[a] = qa
                fa = qa + (1.0 - qa) * ya
                f[a] = fa
                if fa == 0.0:
                    uzc += 1
                else:
                    unz *= fa
            acc = wts[w0] * (unz if uzc == 0 else 0.0)
            base = off_script[t] + s * M
            for m in range(M):
                ra = sc_keep[base + m]
                if ra >= 0:
                    rb = sc_abs[base + m]
                    fa = f[ra]
                    fb = f[rb]
                    if fa == 0.0:
                        uzc -= 1
                    else:
                        unz /= fa
                    if fb == 0.0:
                        uzc -= 1
                    else:
                        unz /= fb
                    x[ra] *= x[rb]
                    q[ra] *= q[rb]
                    fn = q[ra] + (1.0 - q[ra]) * x[ra]
                    f[ra] = fn
                    if fn == 0.0:
                        uzc += 1
                    else:
                        unz *= fn
                acc += wts[w0 + 1 + m] * (unz if uzc == 0 else 0.0)
            acc_t += acc
        out[t] = acc_t / samples


@njit(cache=True)
def mc_g_grads(
    hsrc, p, idx, off_mem, dep, direct, ms, off_w, wts, off_script, sc_keep, sc_abs, samples, max_k, out, gout
):
    """Monte Carlo G estimate with exact per-sample gradients (same trace)."""
    y = np.empty(max_k)
    q = np.empty(max_k)
    xnz = np.empty(max_k)
    xzc = np.empty(max_k, dtype=np.int64)
    f = np.empty(max_k)
    root_of = np.empty(max_k, dtype=np.int64)
    for ti in range(idx.shape[0]):
        t = idx[ti]
        k0 = off_mem[t]
        K = off_mem[t + 1] - k0
        M = ms[t]
        w0 = off_w[t]
        acc_t = 0.0
        for a in range(K):
            gout[k0 + a] = 0.0
        for s in range(samples):
            unz = 1.0
            uzc = 0
            for a in range(K):
                ya = hsrc[dep[k0 + a]]
                y[a] = ya
                qa = 1.0 - p if direct[k0 + a] else 1.0
                q[a] = qa
                if ya == 0.0:
                    xnz[a] = 1.0
                    xzc[a] = 1
                else:
                    xnz[a] = ya
                    xzc[a] = 0
                fa = qa + (1.0 - qa) * ya
                f[a] = fa
                if fa == 0.0:
                    uzc += 1
                else:
                    unz *= fa
                root_of[a] = a
            base = off_script[t] + s * M
            for m in range(M + 1):
                if m > 0:
                    ra = sc_keep[base + m - 1]
                    if ra >= 0:
                        rb = sc_abs[base + m - 1]
                        fa = f[ra]
                        fb = f[rb]
                        if fa == 0.0:
                            uzc -= 1
                        else:
                            unz /= fa
                        if fb == 0.0:
                            uzc -= 1
                        else:
                            unz /= fb
                        xnz[ra] *= xnz[rb]
                        xzc[ra] += xzc[rb]
                        q[ra] *= q[rb]
                        xr = xnz[ra] if xzc[ra] == 0 else 0.0
                        fn = q[ra] + (1.0 - q[ra]) * xr
                        f[ra] = fn
                        if fn == 0.0:
                            uzc += 1
                        else:
                            unz *= fn
                        for a in range(K):
                            if root_of[a] == rb:
                                root_of[a] = ra
                w = wts[w0 + m]
                acc_t += w * (unz if uzc == 0 else 0.0)
                for a in range(K):
                    r = root_of[a]
                    fr = f[r]
                    if uzc == 0:
                        gbase = unz / fr
                    elif uzc == 1 and fr == 0.0:
                        gbase = unz
                    else:
                        continue
                    ya = y[a]
                    if ya == 0.0:
                        x_over = xnz[r] if xzc[r] == 1 else 0.0
                    else:
                        x_over = xnz[r] / ya if xzc[r] == 0 else 0.0
                    if x_over != 0.0:
                        gout[k0 + a] += w * gbase * (1.0 - q[r]) * x_over
        out[t] = acc_t / samples
        for a in range(K):
            gout[k0 + a] /= samples


# ---------------------------------------------------------------------------
# Newman-Ziff percolation simulation
# ---------------------------------------------------------------------------


@njit(cache=True)
def nz_trial(n, edges_u, edges_v, order, parent, size, out_largest, out_sumsq):
    """One Newman-Ziff trial: add edges in `order`, recording after each
    addition the largest cluster size and sum over clusters of size^2."""
    for i in range(n):
        parent[i] = i
        size[i] = 1
    largest = 1.0
    sumsq = float(n)
    out_largest[0] = largest
    out_sumsq[0] = sumsq
    m = order.shape[0]
    for step in range(m):
        e = order[step]
        ru = _uf_find(parent, edges_u[e])
        rv = _uf_find(parent, edges_v[e])
        if ru != rv:
            su = size[ru]
            sv = size[rv]
            sumsq += 2.0 * su * sv
            if su < sv:
                ru, rv = rv, ru
            parent[rv] = ru
            size[ru] = su + sv
            if size[ru] > largest:
                largest = size[ru]
        out_largest[step + 1] = largest
        out_sumsq[step + 1] = sumsq


# ---------------------------------------------------------------------------
# dense symmetric eigenvalues by cyclic Jacobi rotations
# ---------------------------------------------------------------------------


@njit(cache=True)
def jacobi_eigenvalues(a, rel_tol, max_sweeps):
    """Eigenvalues of symmetric a (destroyed) via cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below rel_tol times
    the initial Frobenius norm. Returns (diag, achieved_off_norm).
    """
    n = a.shape[0]
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j] * a[i, j]
    norm = np.sqrt(norm)
    thresh = rel_tol * norm if norm > 0.0 else 0.0

    def _off(a, n):
        s = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                s += 2.0 * a[i, j] * a[i, j]
        return np.sqrt(s)

    off = _off(a, n)
    sweeps = 0
    while off > thresh and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if np.abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] -= t * apq
                a[q, q] += t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        a[k, p] = akp - s * (akq + tau * akp)
                        a[k, q] = akq + s * (akp - tau * akq)
                        a[p, k] = a[k, p]
                        a[q, k] = a[k, q]
        off = _off(a, n)
        sweeps += 1
    d = np.empty(n)
    for i in range(n):
        d[i] = a[i, i]
    return np.sort(d), off


# ---------------------------------------------------------------------------
# spectral message/node updates: small complex linear solves
# ---------------------------------------------------------------------------


@njit(cache=True)
def spectral_sweep(hsrc, z, idx, off_mem, dep, v, off_amat, amat, jj, h_prev, max_k, out, flags):
    """One synchronous update of all targets via the neighborhood identity
    value = v^T (D - A)^{-1} v + const, D_kk = z - hsrc[dep_k].

    Singular systems leave the previous value in place and set flags[t].
    """
    mat = np.empty((max_k, max_k), dtype=np.complex128)
    rhs = np.empty(max_k, dtype=np.complex128)
    for ti in range(idx.shape[0]):
        t = idx[ti]
        k0 = off_mem[t]
        K = off_mem[t + 1] - k0
        if K == 0:
            out[t] = jj[t]
            continue
        a0 = off_amat[t]
        for r in range(K):
            for c in range(K):
                mat[r, c] = -amat[a0 + r * K + c]
            mat[r, r] = z - hsrc[dep[k0 + r]]
            rhs[r] = v[k0 + r]
        # in-place partial-pivot elimination on the K x K system
        singular = False
        for col in range(K):
            piv = col
            best = np.abs(mat[col, col])
            for r in range(col + 1, K):
                cand = np.abs(mat[r, col])
                if cand > best:
                    best = cand
                    piv = r
            if best == 0.0:
                singular = True
                break
            if piv != col:
                for c in range(col, K):
                    tmp = mat[col, c]
                    mat[col, c] = mat[piv, c]
                    mat[piv, c] = tmp
                tmpb = rhs[col]
                rhs[col] = rhs[piv]
                rhs[piv] = tmpb
            inv = 1.0 / mat[col, col]
            for r in range(col + 1, K):
                factor = mat[r, col] * inv
                if factor != 0.0:
                    for c in range(col + 1, K):
                        mat[r, c] -= factor * mat[col, c]
                    rhs[r] -= factor * rhs[col]
        if singular:
            flags[t] = 1
            out[t] = h_prev[t]
            continue
        for r in range(K - 1, -1, -1):
            acc = rhs[r]
            for c in range(r + 1, K):
                acc -= mat[r, c] * rhs[c]
            rhs[r] = acc / mat[r, r]
        total = jj[t] + 0.0j
        for r in range(K):
            total += v[k0 + r] * rhs[r]
        out[t] = total

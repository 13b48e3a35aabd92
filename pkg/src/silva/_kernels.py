"""Chart-filling kernels for beam-pruned CKY.

Both implementations fill the same chart arrays, indexed ``[i, j, rank]`` with
0-based inclusive span ends. For a cell they enumerate candidates in generation
order (split ascending, label NN/NS/SN, left rank, right rank); the position in
that order is the final tie-break, so a beam is sorted by
``(distance, height, position)``. Height stands in for the balance statistic,
which is monotone in height for a fixed span length.

Random draws per cell of length >= 2: one uniform for the exploration coin,
then, only if exploring and the candidates overflow the beam, one uniform per
candidate in generation order. Both backends consume the generator identically.
"""

import numpy as np

from ._accel import njit

OK = 0
DEGENERATE = 1

# buffer columns
_P0, _P1, _IDX, _S, _A, _D, _H, _K, _LAB, _LR, _RR = range(11)
_NCOL = 11


@njit(cache=True, nogil=True)
def _dist(gold, s, squared):
    diff = gold - s
    if squared:
        return diff * diff
    return abs(diff)


@njit(cache=True, nogil=True)
def _before(buf, r, p0, p1, idx):
    """True when key (p0, p1, idx) sorts strictly before row r of buf."""
    if p0 != buf[r, _P0]:
        return p0 < buf[r, _P0]
    if p1 != buf[r, _P1]:
        return p1 < buf[r, _P1]
    return idx < buf[r, _IDX]


@njit(cache=True, nogil=True)
def _insert(buf, count, cap, p0, p1, idx, s, a, d, h, k, lab, lr, rr):
    """Insert into a buffer kept sorted by (p0, p1, idx), bounded at cap rows."""
    if count == cap:
        if not _before(buf, cap - 1, p0, p1, idx):
            return count
        pos = cap - 1
    else:
        pos = count
        count += 1
    while pos > 0 and _before(buf, pos - 1, p0, p1, idx):
        for c in range(_NCOL):
            buf[pos, c] = buf[pos - 1, c]
        pos -= 1
    buf[pos, _P0] = p0
    buf[pos, _P1] = p1
    buf[pos, _IDX] = idx
    buf[pos, _S] = s
    buf[pos, _A] = a
    buf[pos, _D] = d
    buf[pos, _H] = h
    buf[pos, _K] = k
    buf[pos, _LAB] = lab
    buf[pos, _LR] = lr
    buf[pos, _RR] = rr
    return count


@njit(cache=True, nogil=True)
def _dtie_order(rows, count, order_sign):
    """Permutation sorting rows[:count] by (distance, height, idx)."""
    sub = rows[:count]
    order = np.argsort(sub[:, _IDX], kind="mergesort")
    by_h = np.argsort(sub[order, _H], kind="mergesort")
    order = order[by_h]
    by_d = np.argsort(order_sign * sub[order, _D], kind="mergesort")
    return order[by_d]


@njit(cache=True, nogil=True)
def fill_chart_numba(
    sent, att, gold, lam_l, lam_r, squared, beam_size, eps, tau, order_sign, rng,
    S, A, D, H, K, LAB, LR, RR, CNT,
):
    n = sent.shape[0]
    for i in range(n):
        S[i, i, 0] = sent[i]
        A[i, i, 0] = att[i]
        D[i, i, 0] = _dist(gold, sent[i], squared)
        H[i, i, 0] = 0
        K[i, i, 0] = -1
        LAB[i, i, 0] = -1
        LR[i, i, 0] = -1
        RR[i, i, 0] = -1
        CNT[i, i] = 1

    cap_max = S.shape[2]
    buf = np.empty((cap_max, _NCOL))
    alt = np.empty((cap_max, _NCOL))
    elite = np.empty((1, _NCOL))

    for L in range(2, n + 1):
        for i in range(0, n - L + 1):
            j = i + L - 1
            m = 0
            for k in range(i, j):
                m += CNT[i, k] * CNT[k + 1, j]
            m *= 3
            cap = min(beam_size, m)
            explore = rng.random() < eps[L]
            keep_all = m <= cap
            sampling = explore and not keep_all

            count = 0
            ecount = 0
            idx = 0
            for k in range(i, j):
                cl = CNT[i, k]
                cr = CNT[k + 1, j]
                for lab in range(3):
                    ll = lam_l[lab]
                    lr_ = lam_r[lab]
                    for a in range(cl):
                        sl = S[i, k, a]
                        wl = ll * A[i, k, a]
                        hl = H[i, k, a]
                        for b in range(cr):
                            sr = S[k + 1, j, b]
                            wr = lr_ * A[k + 1, j, b]
                            tot = wl + wr
                            if tot == 0.0:
                                return DEGENERATE
                            s = (wl * sl + wr * sr) / tot
                            if sl <= sr:
                                lo = sl
                                hi = sr
                            else:
                                lo = sr
                                hi = sl
                            if s < lo:
                                s = lo
                            elif s > hi:
                                s = hi
                            d = _dist(gold, s, squared)
                            hr = H[k + 1, j, b]
                            h = (hl if hl > hr else hr) + 1
                            sd = order_sign * d
                            if keep_all:
                                buf[count, _P0] = sd
                                buf[count, _P1] = h
                                buf[count, _IDX] = idx
                                buf[count, _S] = s
                                buf[count, _A] = tot
                                buf[count, _D] = d
                                buf[count, _H] = h
                                buf[count, _K] = k
                                buf[count, _LAB] = lab
                                buf[count, _LR] = a
                                buf[count, _RR] = b
                                count += 1
                            elif not sampling:
                                count = _insert(buf, count, cap, sd, h, idx, s, tot, d, h, k, lab, a, b)
                            else:
                                if ecount == 0 or _before(elite, 0, sd, h, idx):
                                    ecount = _insert(elite, 0, 1, sd, h, idx, s, tot, d, h, k, lab, a, b)
                                u = rng.random()
                                key = -(d / tau) - np.log(-np.log(u))
                                count = _insert(alt, count, cap, -key, 0.0, idx, s, tot, d, h, k, lab, a, b)
                            idx += 1

            if keep_all:
                rows = buf
                order = _dtie_order(buf, count, order_sign)
            elif not sampling:
                rows = buf
                order = np.arange(count)
            else:
                # elite plus the top cap-1 sampled non-elites
                eidx = elite[0, _IDX]
                has_elite = False
                for r in range(count):
                    if alt[r, _IDX] == eidx:
                        has_elite = True
                if not has_elite:
                    for c in range(_NCOL):
                        alt[count - 1, c] = elite[0, c]
                rows = alt
                order = _dtie_order(alt, count, order_sign)

            for r in range(count):
                row = order[r]
                S[i, j, r] = rows[row, _S]
                A[i, j, r] = rows[row, _A]
                D[i, j, r] = rows[row, _D]
                H[i, j, r] = int(rows[row, _H])
                K[i, j, r] = int(rows[row, _K])
                LAB[i, j, r] = int(rows[row, _LAB])
                LR[i, j, r] = int(rows[row, _LR])
                RR[i, j, r] = int(rows[row, _RR])
            CNT[i, j] = count
    return OK


def select_numpy(sd, h, d, cap, explore, rng, tau):
    """Indices of the surviving candidates in D-TIE order (vectorised path).

    ``sd`` is the signed distance used for ordering, ``d`` the true distance
    used for sampling; candidates are assumed in generation order.
    """
    m = sd.shape[0]
    idx = np.arange(m)
    if m <= cap:
        return np.lexsort((idx, h, sd))
    if not explore:
        kth = np.partition(sd, cap - 1)[cap - 1]
        pool = np.flatnonzero(sd <= kth)
        return pool[np.lexsort((pool, h[pool], sd[pool]))][:cap]
    best = np.flatnonzero(sd == sd.min())
    elite = best[np.lexsort((best, h[best]))][0]
    u = rng.random(m)
    with np.errstate(divide="ignore"):
        neg_key = -(-(d / tau) - np.log(-np.log(u)))
    kth = np.partition(neg_key, cap - 1)[cap - 1]
    pool = np.flatnonzero(neg_key <= kth)
    top = pool[np.lexsort((pool, neg_key[pool]))][:cap]
    if elite not in top:
        top = np.concatenate(([elite], top[: cap - 1]))
    return top[np.lexsort((top, h[top], sd[top]))]


def _cell_arrays(i, j, lam_l, lam_r, gold, squared, S, A, H, CNT):
    """Candidate arrays for span (i, j) in generation order, or None if degenerate."""
    cl = CNT[i, i:j]
    cr = CNT[i + 1:j + 1, j]
    width = int(max(cl.max(), cr.max()))
    m = 3 * int(np.dot(cl, cr))
    splits = np.arange(i, j)
    if len(splits) * 3 * width * width <= 4 * m + 64:
        parts = [_split_block(i, j, splits, width, cl, cr, lam_l, lam_r, gold, squared, S, A, H)]
    else:
        parts = [
            _split_block(i, j, splits[t:t + 1], int(max(cl[t], cr[t])), cl[t:t + 1], cr[t:t + 1],
                         lam_l, lam_r, gold, squared, S, A, H)
            for t in range(len(splits))
        ]
    out = [np.concatenate(cols) for cols in zip(*parts)]
    if np.any(out[1] == 0.0):
        return None
    return out


def _split_block(i, j, splits, width, cl, cr, lam_l, lam_r, gold, squared, S, A, H):
    nk = len(splits)
    left = (i, slice(splits[0], splits[-1] + 1), slice(0, width))
    right = (slice(splits[0] + 1, splits[-1] + 2), j, slice(0, width))
    sl = S[left][:, None, :, None]
    sr = S[right][:, None, None, :]
    wl = lam_l[None, :, None, None] * A[left][:, None, :, None]
    wr = lam_r[None, :, None, None] * A[right][:, None, None, :]
    tot = wl + wr
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (wl * sl + wr * sr) / tot
    s = np.clip(s, np.minimum(sl, sr), np.maximum(sl, sr))
    h = np.maximum(H[left][:, None, :, None], H[right][:, None, None, :]) + 1
    rank = np.arange(width)
    valid = (rank[None, None, :, None] < cl[:, None, None, None]) & (rank[None, None, None, :] < cr[:, None, None, None])
    shape = (nk, 3, width, width)
    valid = np.broadcast_to(valid, shape)
    d = gold - s
    d = d * d if squared else np.abs(d)
    k = np.broadcast_to(splits[:, None, None, None], shape)
    lab = np.broadcast_to(np.arange(3)[None, :, None, None], shape)
    a = np.broadcast_to(rank[None, None, :, None], shape)
    b = np.broadcast_to(rank[None, None, None, :], shape)
    return (
        np.broadcast_to(s, shape)[valid],
        np.broadcast_to(tot, shape)[valid],
        d[valid],
        np.broadcast_to(h, shape)[valid],
        k[valid],
        lab[valid],
        a[valid],
        b[valid],
    )


def fill_chart_numpy(
    sent, att, gold, lam_l, lam_r, squared, beam_size, eps, tau, order_sign, rng,
    S, A, D, H, K, LAB, LR, RR, CNT,
):
    n = sent.shape[0]
    for i in range(n):
        S[i, i, 0] = sent[i]
        A[i, i, 0] = att[i]
        diff = gold - sent[i]
        D[i, i, 0] = diff * diff if squared else abs(diff)
        H[i, i, 0] = 0
        K[i, i, 0] = LAB[i, i, 0] = LR[i, i, 0] = RR[i, i, 0] = -1
        CNT[i, i] = 1
    for L in range(2, n + 1):
        for i in range(0, n - L + 1):
            j = i + L - 1
            explore = rng.random() < eps[L]
            cand = _cell_arrays(i, j, lam_l, lam_r, gold, squared, S, A, H, CNT)
            if cand is None:
                return DEGENERATE
            s, tot, d, h, k, lab, a, b = cand
            cap = min(beam_size, len(d))
            keep = select_numpy(order_sign * d, h, d, cap, explore, rng, tau)
            c = len(keep)
            S[i, j, :c] = s[keep]
            A[i, j, :c] = tot[keep]
            D[i, j, :c] = d[keep]
            H[i, j, :c] = h[keep]
            K[i, j, :c] = k[keep]
            LAB[i, j, :c] = lab[keep]
            LR[i, j, :c] = a[keep]
            RR[i, j, :c] = b[keep]
            CNT[i, j] = c
    return OK

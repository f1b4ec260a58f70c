"""Hot loops, each with a numba implementation and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``SPIBAND_DISABLE_NUMBA=1``
to force the numpy path (or run without numba installed).  Both variants of
every kernel are importable under ``*_numba`` / ``*_numpy`` names so they can
be compared directly.
"""
import os

import numpy as np

try:
    import numba
    from numba import njit
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

_DISABLE = os.environ.get("SPIBAND_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = NUMBA_AVAILABLE and _DISABLE not in ("1", "true", "yes", "on")

# |z - center| below this counts as "on" a zero-width wall
DEGENERATE_TOL = 1e-12


def _jit(fn):
    if not NUMBA_AVAILABLE:
        return fn
    return njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------------------
# pool adjacent violators (non-increasing)
# ---------------------------------------------------------------------------

def _pava_loop(v, out):
    n = v.shape[0]
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    top = -1
    for i in range(n):
        top += 1
        sums[top] = v[i]
        counts[top] = 1
        while top > 0 and sums[top - 1] / counts[top - 1] < sums[top] / counts[top]:
            sums[top - 1] += sums[top]
            counts[top - 1] += counts[top]
            top -= 1
    pos = 0
    for b in range(top + 1):
        if counts[b] == 1:
            # singleton blocks are copied, not divided, so fixed points stay bit-exact
            out[pos] = sums[b]
            pos += 1
            continue
        mean = sums[b] / counts[b]
        for _ in range(counts[b]):
            out[pos] = mean
            pos += 1
    return out


_pava_loop_numba = _jit(_pava_loop)


def pava_antitonic_numpy(v):
    v = np.asarray(v, dtype=np.float64)
    return _pava_loop(v, np.empty_like(v))


def pava_antitonic_numba(v):
    v = np.ascontiguousarray(v, dtype=np.float64)
    return _pava_loop_numba(v, np.empty_like(v))


# ---------------------------------------------------------------------------
# per-sample minimal k over bootstrap sets
# ---------------------------------------------------------------------------

def center_spread(x, ddof, two_sided):
    """Column centers and (lower, upper) spreads of a 2-D array."""
    m = x.shape[0]
    if not two_sided:
        # shifting by the first row keeps constant columns exactly constant
        shift = x[0]
        mu = shift + (x - shift).mean(axis=0)
        dev = x - mu
        sigma = np.sqrt((dev * dev).sum(axis=0) / (m - ddof))
        return mu, sigma, sigma
    med = np.median(x, axis=0)
    dev = x - med
    sq = dev * dev
    upper = dev >= 0
    lower = dev <= 0
    sp = np.sqrt(np.where(upper, sq, 0.0).sum(axis=0) / upper.sum(axis=0))
    sm = np.sqrt(np.where(lower, sq, 0.0).sum(axis=0) / lower.sum(axis=0))
    return med, sm, sp


def _scaled_distance_numpy(x, center, s_minus, s_plus):
    dev = x - center
    spread = np.where(dev < 0, s_minus, s_plus)
    absdev = np.abs(dev)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = absdev / spread
    degenerate = np.where(absdev <= DEGENERATE_TOL, 0.0, np.inf)
    ratio = np.where(spread > 0, ratio, degenerate)
    return ratio.max(axis=1)


def max_distances_numpy(rows, center, s_minus, s_plus):
    """Smallest k placing each row inside ``[center - k s_minus, center + k s_plus]``."""
    return _scaled_distance_numpy(np.asarray(rows, dtype=np.float64), center, s_minus, s_plus)


def bootstrap_distances_numpy(rows, idx, ddof=0, two_sided=False):
    rows = np.asarray(rows, dtype=np.float64)
    out = np.empty(idx.shape, dtype=np.float64)
    for b in range(idx.shape[0]):
        x = rows[idx[b]]
        center, sm, sp = center_spread(x, ddof, two_sided)
        out[b] = _scaled_distance_numpy(x, center, sm, sp)
    return out


def _bootstrap_distances_loop(rows, cols, xs, order, idx, ddof, two_sided, out):
    # a bootstrap set is the original rows with multiplicities; columns are
    # presorted once so medians come from a cumulative count scan
    n_sets, m = idx.shape
    n = rows.shape[1]
    counts = np.zeros(m, dtype=np.int64)
    dist = np.empty(m)
    center = np.empty(n)
    s_minus = np.empty(n)
    s_plus = np.empty(n)
    half = m // 2
    for b in range(n_sets):
        counts[:] = 0
        for i in range(m):
            counts[idx[b, i]] += 1
        first = idx[b, 0]
        for t in range(n):
            if two_sided:
                seen = 0
                lo_val = 0.0
                hi_val = 0.0
                for p in range(m):
                    c = counts[order[t, p]]
                    if c == 0:
                        continue
                    if seen <= half - 1 < seen + c:
                        lo_val = xs[t, p]
                    if seen <= half < seen + c:
                        hi_val = xs[t, p]
                        break
                    seen += c
                med = hi_val if m % 2 == 1 else 0.5 * (lo_val + hi_val)
                acc_p = 0.0
                acc_m = 0.0
                n_p = 0
                n_m = 0
                # sorted order keeps the sign tests predictable
                for p in range(m):
                    c = counts[order[t, p]]
                    d = xs[t, p] - med
                    if d <= 0:
                        acc_m += c * (d * d)
                        n_m += c
                    if d >= 0:
                        acc_p += c * (d * d)
                        n_p += c
                center[t] = med
                s_plus[t] = np.sqrt(acc_p / n_p)
                s_minus[t] = np.sqrt(acc_m / n_m)
            else:
                col = cols[t]
                shift = col[first]
                acc = 0.0
                for i in range(m):
                    c = counts[i]
                    if c != 0:
                        acc += c * (col[i] - shift)
                mu = shift + acc / m
                acc = 0.0
                for i in range(m):
                    c = counts[i]
                    if c != 0:
                        d = col[i] - mu
                        acc += c * (d * d)
                sd = np.sqrt(acc / (m - ddof))
                center[t] = mu
                s_plus[t] = sd
                s_minus[t] = sd
        for i in range(m):
            if counts[i] == 0:
                continue
            best = 0.0
            for t in range(n):
                d = rows[i, t] - center[t]
                sd = s_minus[t] if d < 0 else s_plus[t]
                a = abs(d)
                if sd > 0:
                    q = a / sd
                elif a <= DEGENERATE_TOL:
                    q = 0.0
                else:
                    q = np.inf
                if q > best:
                    best = q
            dist[i] = best
        for i in range(m):
            out[b, i] = dist[idx[b, i]]
    return out


_bootstrap_distances_kernel = _jit(_bootstrap_distances_loop)


def bootstrap_distances_numba(rows, idx, ddof=0, two_sided=False):
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    order = np.argsort(rows, axis=0, kind="stable")
    xs = np.ascontiguousarray(np.take_along_axis(rows, order, axis=0).T)
    order = np.ascontiguousarray(order.T)
    out = np.empty(idx.shape, dtype=np.float64)
    cols = np.ascontiguousarray(rows.T)
    return _bootstrap_distances_kernel(rows, cols, xs, order, idx, ddof, two_sided, out)


# ---------------------------------------------------------------------------
# greedy wall retraction
# ---------------------------------------------------------------------------

def gspie_step_numpy(lower, upper, opt):
    """Best single wall retraction of the box ``[lower, upper]``.

    Returns ``(wall, t, new_value, reduction, excluded, score)`` with
    ``wall`` 0 for a lower wall and 1 for an upper wall, or ``None`` when no
    wall has an interior sample coordinate.
    """
    opt = np.asarray(opt, dtype=np.float64)
    inside = np.all((opt >= lower) & (opt <= upper), axis=1)
    z = opt[inside]
    if z.shape[0] == 0:
        return None
    n = z.shape[1]
    new_lo = np.where(z > lower, z, np.inf).min(axis=0)
    new_hi = np.where(z < upper, z, -np.inf).max(axis=0)
    exc_lo = (z < new_lo).sum(axis=0)
    exc_hi = (z > new_hi).sum(axis=0)
    valid = np.concatenate([np.isfinite(new_lo), np.isfinite(new_hi)])
    if not valid.any():
        return None
    reduction = np.concatenate([new_lo - lower, upper - new_hi])
    excluded = np.concatenate([exc_lo, exc_hi])
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(excluded == 0, np.inf, reduction / np.maximum(excluded, 1))
    score = np.where(valid, score, -np.inf)
    # argmax returns the first maximum: lower walls precede upper, then by time index
    k = int(np.argmax(score))
    wall, t = divmod(k, n)
    new_value = new_lo[t] if wall == 0 else new_hi[t]
    return wall, t, float(new_value), float(reduction[k]), int(excluded[k]), float(score[k])


def _count_inside(rows, lower, upper):
    return int(np.count_nonzero(np.all((rows >= lower) & (rows <= upper), axis=1)))


def gspie_search_numpy(opt, val, lower, upper, required, trace=None):
    """Run greedy retractions until validation coverage would fall short.

    ``required`` is a non-increasing sequence of minimum validation counts.
    The retraction path does not depend on the threshold, so one run yields
    the stopping box for every entry.  Returns ``(lowers, uppers, steps)``
    with one row per threshold; ``steps[j]`` counts retractions applied.
    """
    opt = np.asarray(opt, dtype=np.float64)
    val = np.asarray(val, dtype=np.float64)
    lower = np.array(lower, dtype=np.float64)
    upper = np.array(upper, dtype=np.float64)
    required = np.asarray(required, dtype=np.int64)
    n_req = required.shape[0]
    lowers = np.empty((n_req, lower.shape[0]))
    uppers = np.empty((n_req, lower.shape[0]))
    steps = np.zeros(n_req, dtype=np.int64)
    j = 0
    n_steps = 0
    while j < n_req:
        cand = gspie_step_numpy(lower, upper, opt)
        if cand is None:
            break
        wall, t, new_value, _, _, _ = cand
        new_lower = lower.copy()
        new_upper = upper.copy()
        if wall == 0:
            new_lower[t] = new_value
        else:
            new_upper[t] = new_value
        covered = _count_inside(val, new_lower, new_upper)
        while j < n_req and covered < required[j]:
            lowers[j] = lower
            uppers[j] = upper
            steps[j] = n_steps
            j += 1
        if j == n_req:
            break
        if trace is not None:
            trace.append(cand + (covered,))
        lower, upper = new_lower, new_upper
        n_steps += 1
    while j < n_req:
        lowers[j] = lower
        uppers[j] = upper
        steps[j] = n_steps
        j += 1
    return lowers, uppers, steps


def _gspie_search_loop(opt, val, order, vorder, lower, upper, required,
                       lowers, uppers, steps):
    m, n = opt.shape
    mv = val.shape[0]
    alive = np.ones(m, dtype=np.bool_)
    val_alive = np.empty(mv, dtype=np.bool_)
    covered = 0
    for i in range(mv):
        ok = True
        for t in range(n):
            if val[i, t] < lower[t] or val[i, t] > upper[t]:
                ok = False
                break
        val_alive[i] = ok
        if ok:
            covered += 1
    for i in range(m):
        for t in range(n):
            if opt[i, t] < lower[t] or opt[i, t] > upper[t]:
                alive[i] = False
                break
    lo_ptr = np.zeros(n, dtype=np.int64)
    hi_ptr = np.full(n, m - 1, dtype=np.int64)
    vlo_ptr = np.zeros(n, dtype=np.int64)
    vhi_ptr = np.full(n, mv - 1, dtype=np.int64)
    n_req = required.shape[0]
    j = 0
    n_steps = 0
    while j < n_req:
        best_score = -np.inf
        best_wall = -1
        best_t = -1
        best_new = 0.0
        for wall in range(2):
            for t in range(n):
                # skip rows already excluded; they never come back
                if wall == 0:
                    p = lo_ptr[t]
                    while p < m and not alive[order[t, p]]:
                        p += 1
                    lo_ptr[t] = p
                    if p == m:
                        continue
                    edge = lower[t]
                    v = opt[order[t, p], t]
                    excluded = 0
                    if v <= edge:
                        while p < m:
                            r = order[t, p]
                            if alive[r]:
                                if opt[r, t] > edge:
                                    break
                                excluded += 1
                            p += 1
                        if p == m:
                            continue
                        v = opt[order[t, p], t]
                    reduction = v - edge
                else:
                    p = hi_ptr[t]
                    while p >= 0 and not alive[order[t, p]]:
                        p -= 1
                    hi_ptr[t] = p
                    if p < 0:
                        continue
                    edge = upper[t]
                    v = opt[order[t, p], t]
                    excluded = 0
                    if v >= edge:
                        while p >= 0:
                            r = order[t, p]
                            if alive[r]:
                                if opt[r, t] < edge:
                                    break
                                excluded += 1
                            p -= 1
                        if p < 0:
                            continue
                        v = opt[order[t, p], t]
                    reduction = edge - v
                if excluded == 0:
                    score = np.inf
                else:
                    score = reduction / excluded
                if score > best_score:
                    best_score = score
                    best_wall = wall
                    best_t = t
                    best_new = v
        if best_wall < 0:
            break
        t = best_t
        # validation rows this retraction would drop
        dropped = 0
        if best_wall == 0:
            p = vlo_ptr[t]
            while p < mv and val[vorder[t, p], t] < best_new:
                if val_alive[vorder[t, p]]:
                    dropped += 1
                p += 1
        else:
            p = vhi_ptr[t]
            while p >= 0 and val[vorder[t, p], t] > best_new:
                if val_alive[vorder[t, p]]:
                    dropped += 1
                p -= 1
        while j < n_req and covered - dropped < required[j]:
            for s in range(n):
                lowers[j, s] = lower[s]
                uppers[j, s] = upper[s]
            steps[j] = n_steps
            j += 1
        if j == n_req:
            break
        if best_wall == 0:
            while vlo_ptr[t] < mv and val[vorder[t, vlo_ptr[t]], t] < best_new:
                val_alive[vorder[t, vlo_ptr[t]]] = False
                vlo_ptr[t] += 1
            p = lo_ptr[t]
            while p < m and opt[order[t, p], t] < best_new:
                alive[order[t, p]] = False
                p += 1
            lo_ptr[t] = p
            lower[t] = best_new
        else:
            while vhi_ptr[t] >= 0 and val[vorder[t, vhi_ptr[t]], t] > best_new:
                val_alive[vorder[t, vhi_ptr[t]]] = False
                vhi_ptr[t] -= 1
            p = hi_ptr[t]
            while p >= 0 and opt[order[t, p], t] > best_new:
                alive[order[t, p]] = False
                p -= 1
            hi_ptr[t] = p
            upper[t] = best_new
        covered -= dropped
        n_steps += 1
    while j < n_req:
        for s in range(n):
            lowers[j, s] = lower[s]
            uppers[j, s] = upper[s]
        steps[j] = n_steps
        j += 1


_gspie_search_loop_numba = _jit(_gspie_search_loop)


def gspie_search_numba(opt, val, lower, upper, required):
    opt = np.ascontiguousarray(opt, dtype=np.float64)
    val = np.ascontiguousarray(val, dtype=np.float64)
    required = np.ascontiguousarray(required, dtype=np.int64)
    order = np.ascontiguousarray(np.argsort(opt, axis=0, kind="stable").T)
    vorder = np.ascontiguousarray(np.argsort(val, axis=0, kind="stable").T)
    n = opt.shape[1]
    lowers = np.empty((required.shape[0], n))
    uppers = np.empty((required.shape[0], n))
    steps = np.zeros(required.shape[0], dtype=np.int64)
    _gspie_search_loop_numba(opt, val, order, vorder,
                             np.array(lower, dtype=np.float64),
                             np.array(upper, dtype=np.float64),
                             required, lowers, uppers, steps)
    return lowers, uppers, steps


if USE_NUMBA:
    pava_antitonic = pava_antitonic_numba
    bootstrap_distances = bootstrap_distances_numba
    gspie_search = gspie_search_numba
else:
    pava_antitonic = pava_antitonic_numpy
    bootstrap_distances = bootstrap_distances_numpy
    gspie_search = gspie_search_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"


def set_threads(count):
    """Cap numba worker threads; a no-op on the numpy backend."""
    if USE_NUMBA and count:
        numba.set_num_threads(min(int(count), numba.config.NUMBA_NUM_THREADS))

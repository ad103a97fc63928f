"""Compiled inner loops of the relaxation and the incumbent heuristics."""

import numpy as np
from numba import njit

_BISECT_ITERS = 200


@njit(cache=True, nogil=True)
def _clip_scaled(y, t, lo, hi, out):
    s = 0.0
    for i in range(y.shape[0]):
        v = t * y[i]
        if v < lo[i]:
            v = lo[i]
        elif v > hi[i]:
            v = hi[i]
        out[i] = v
        s += v * v
    return s


@njit(cache=True, nogil=True)
def clip_scale_ball(y, lo, hi, q, tmax):
    """``clip(t*y, lo, hi)`` for the largest ``t`` in ``[0, tmax]`` with squared norm <= q.

    ``tmax = 1`` is the Euclidean projection of ``y`` onto box ∩ ball and
    ``tmax = inf`` minimizes ``-y^T z`` over the same set.  The squared norm
    is nondecreasing in ``t``; the box must contain a point of the ball.
    """
    n = y.shape[0]
    out = np.empty(n)
    # beyond t_sat every coordinate sits on a box face
    t_sat = 0.0
    for i in range(n):
        if y[i] > 0.0:
            b = max(hi[i], 0.0) / y[i]
        elif y[i] < 0.0:
            b = min(lo[i], 0.0) / y[i]
        else:
            continue
        if b > t_sat:
            t_sat = b
    t_hi = min(tmax, t_sat)
    if _clip_scaled(y, t_hi, lo, hi, out) <= q:
        return out
    t_lo = 0.0
    for _ in range(_BISECT_ITERS):
        t = 0.5 * (t_lo + t_hi)
        if t <= t_lo or t >= t_hi:
            break
        if _clip_scaled(y, t, lo, hi, out) > q:
            t_hi = t
        else:
            t_lo = t
    _clip_scaled(y, t_lo, lo, hi, out)
    return out


@njit(cache=True, nogil=True)
def quad_objective(V, c, a):
    return a @ (V @ a) - 2.0 * (c @ a)


@njit(cache=True, nogil=True)
def frank_wolfe_bound(V, c, lo, hi, q, a, fa):
    """Lower bound ``f(a) + min_z grad^T (z - a)`` over box ∩ ball (valid for any ``a``)."""
    g = 2.0 * (V @ a - c)
    z = clip_scale_ball(-g, lo, hi, q, np.inf)
    return fa + g @ (z - a)


@njit(cache=True, nogil=True)
def apg(V, c, lo, hi, q, a0, lip, max_iter, tol, cutoff, check_every):
    """Accelerated projected gradient with function-value restarts.

    Returns ``(a, f(a), lower_bound, iterations, converged)``; the bound is
    the best Frank-Wolfe bound seen and stays valid when the iteration
    budget runs out.  Stops early once the bound reaches ``cutoff``.
    """
    step = 1.0 / lip if lip > 0 else 1.0
    x = clip_scale_ball(a0, lo, hi, q, 1.0)
    fx = quad_objective(V, c, x)
    y = x.copy()
    t = 1.0
    lb = frank_wolfe_bound(V, c, lo, hi, q, x, fx)
    converged = fx - lb <= tol * (1.0 + abs(fx))
    k = 0
    while k < max_iter and not converged and lb < cutoff:
        k += 1
        g = 2.0 * (V @ y - c)
        xn = clip_scale_ball(y - step * g, lo, hi, q, 1.0)
        fn = quad_objective(V, c, xn)
        if fn > fx:
            if t == 1.0:
                # a plain projected gradient step cannot ascend: rounding floor
                converged = True
                break
            y = x.copy()
            t = 1.0
            continue
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = xn + ((t - 1.0) / tn) * (xn - x)
        moved = np.sqrt(np.sum((xn - x) ** 2))
        x = xn
        fx = fn
        t = tn
        if k % check_every == 0 or moved <= 1e-15 * (1.0 + np.sqrt(x @ x)):
            b = frank_wolfe_bound(V, c, lo, hi, q, x, fx)
            if b > lb:
                lb = b
            converged = fx - lb <= tol * (1.0 + abs(fx))
            if moved == 0.0:
                break
    b = frank_wolfe_bound(V, c, lo, hi, q, x, fx)
    if b > lb:
        lb = b
    converged = fx - lb <= tol * (1.0 + abs(fx))
    return x, fx, lb, k, converged


@njit(cache=True, nogil=True)
def round_and_repair(a, delta, mid, levels, q):
    """Nearest lattice point of ``a``, shrunk toward zero until the ball holds.

    Returns ``(x, ok)``; ``ok`` is False when even the minimum-norm lattice
    point violates the ball.
    """
    n = a.shape[0]
    x = np.empty(n, dtype=np.int64)
    norm = 0.0
    for i in range(n):
        v = np.rint(a[i] / delta + mid)
        v = min(max(v, 0.0), levels - 1.0)
        x[i] = np.int64(v)
        lab = delta * (x[i] - mid)
        norm += lab * lab
    while norm > q:
        best = -1
        best_mag = 0.0
        for i in range(n):
            lab = delta * (x[i] - mid)
            # the entry can move one step toward zero without crossing it
            if abs(lab) > 0.5 * delta + 1e-12 * delta and abs(lab) > best_mag:
                best_mag = abs(lab)
                best = i
        if best < 0:
            return x, False
        old = delta * (x[best] - mid)
        if old > 0:
            x[best] -= 1
        else:
            x[best] += 1
        new = delta * (x[best] - mid)
        norm += new * new - old * old
    return x, True


@njit(cache=True, nogil=True)
def local_search(V, c, x, delta, mid, levels, q, pair_moves, max_moves):
    """Steepest-descent polish over single-coordinate moves to any label,
    then pairs of unit moves, keeping ``||a||^2 <= q``.

    Modifies ``x`` in place and returns ``f(a)``.
    """
    n = x.shape[0]
    a = np.empty(n)
    for i in range(n):
        a[i] = delta * (x[i] - mid)
    g = V @ a - c
    norm = a @ a
    f = quad_objective(V, c, a)
    moves = 0
    while moves < max_moves:
        thresh = -1e-13 * (1.0 + abs(f))
        best = thresh
        bi = -1
        bz = 0
        for i in range(n):
            vii = V[i, i]
            for z in range(levels):
                if z == x[i]:
                    continue
                d = delta * (z - x[i])
                df = 2.0 * d * g[i] + vii * d * d
                if df < best and norm + 2.0 * a[i] * d + d * d <= q:
                    best = df
                    bi = i
                    bz = z
        if bi >= 0:
            d = delta * (bz - x[bi])
            x[bi] = bz
            a[bi] += d
            norm += 2.0 * (a[bi] - d) * d + d * d
            g += d * V[:, bi]
            f += best
            moves += 1
            continue
        if not pair_moves:
            break
        bj = -1
        bdi = 0
        bdj = 0
        for i in range(n):
            for si in (-1, 1):
                zi = x[i] + si
                if zi < 0 or zi >= levels:
                    continue
                di = delta * si
                dfi = 2.0 * di * g[i] + V[i, i] * di * di
                dni = 2.0 * a[i] * di + di * di
                for j in range(i + 1, n):
                    for sj in (-1, 1):
                        zj = x[j] + sj
                        if zj < 0 or zj >= levels:
                            continue
                        dj = delta * sj
                        df = dfi + 2.0 * dj * g[j] + V[j, j] * dj * dj + 2.0 * V[i, j] * di * dj
                        if df < best and norm + dni + 2.0 * a[j] * dj + dj * dj <= q:
                            best = df
                            bi = i
                            bj = j
                            bdi = si
                            bdj = sj
        if bi < 0:
            break
        for step in range(2):
            idx = bi if step == 0 else bj
            s = bdi if step == 0 else bdj
            d = delta * s
            x[idx] += s
            norm += 2.0 * a[idx] * d + d * d
            a[idx] += d
            g += d * V[:, idx]
        f += best
        moves += 1
    # recompute to shed accumulated rounding
    for i in range(n):
        a[i] = delta * (x[i] - mid)
    return quad_objective(V, c, a)

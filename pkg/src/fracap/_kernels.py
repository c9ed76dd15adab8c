"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names (``ray_near_integrals``, ``lattice_diff_sums``) are bound to
the numba versions unless ``FRACAP_DISABLE_JIT=1`` was set at import time;
both variants stay importable for benchmarking and cross-checking.
"""

from __future__ import annotations

import numpy as np

from ._jit import JIT_ENABLED, njit

# ---------------------------------------------------------------------------
# ray integrals of (V - g(rho*theta)) * rho^(-1-alpha) for unions of boxes
#
# Along a ray the covariogram of a box union is a piecewise polynomial of
# degree <= n in rho; breakpoints sit where a coordinate of rho*theta equals a
# difference of box edge coordinates. Each piece is integrated exactly.


@njit(cache=True)
def _pow_int_scalar(a, b, s):
    # integral of rho^(s-1) over [a, b]
    if b <= a:
        return 0.0
    if a == 0.0:
        return b ** s / s
    return a ** s * np.expm1(s * np.log(b / a)) / s


@njit(cache=True)
def _ray_near_numba(dirs, lo, hi, vol, alpha, radius):
    m, n = dirs.shape
    p = lo.shape[0]
    out = np.zeros(m)
    ncand = n * 4 * p * p
    cand = np.empty(ncand + 2)
    poly = np.empty(n + 1)
    coef = np.empty(n + 1)
    for r in range(m):
        cnt = 0
        for k in range(n):
            t = dirs[r, k]
            if t == 0.0:
                continue
            for i in range(p):
                for j in range(p):
                    for q in range(4):
                        if q == 0:
                            c = hi[i, k] - hi[j, k]
                        elif q == 1:
                            c = lo[i, k] - lo[j, k]
                        elif q == 2:
                            c = hi[i, k] - lo[j, k]
                        else:
                            c = lo[i, k] - hi[j, k]
                        rho = c / t
                        if rho > 0.0 and rho < radius:
                            cand[cnt] = rho
                            cnt += 1
        cand[cnt] = radius
        cnt += 1
        edges = np.sort(cand[:cnt])
        total = 0.0
        ra = 0.0
        for e in range(cnt):
            rb = edges[e]
            if rb <= ra:
                continue
            rm = 0.5 * (ra + rb)
            for d in range(n + 1):
                poly[d] = 0.0
            for i in range(p):
                for j in range(p):
                    coef[0] = 1.0
                    for d in range(1, n + 1):
                        coef[d] = 0.0
                    alive = True
                    for k in range(n):
                        t = dirs[r, k]
                        h = rm * t
                        if hi[i, k] <= hi[j, k] + h:
                            hc = hi[i, k]
                            hs = 0.0
                        else:
                            hc = hi[j, k]
                            hs = t
                        if lo[i, k] >= lo[j, k] + h:
                            lc = lo[i, k]
                            ls = 0.0
                        else:
                            lc = lo[j, k]
                            ls = t
                        c0 = hc - lc
                        c1 = hs - ls
                        if c0 + c1 * rm <= 0.0:
                            alive = False
                            break
                        for d in range(k + 1, 0, -1):
                            coef[d] = coef[d] * c0 + coef[d - 1] * c1
                        coef[0] = coef[0] * c0
                    if alive:
                        for d in range(n + 1):
                            poly[d] += coef[d]
            # (V - poly) rho^(-1-alpha); constant term vanishes on the first piece
            acc = 0.0
            if ra > 0.0:
                acc += (vol - poly[0]) * _pow_int_scalar(ra, rb, -alpha)
            for d in range(1, n + 1):
                acc -= poly[d] * _pow_int_scalar(ra, rb, d - alpha)
            total += acc
            ra = rb
        out[r] = total
    return out


def _pow_int(a, b, s):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        safe_a = np.where(a > 0, a, 1.0)
        ratio = np.where(a > 0, b / safe_a, 1.0)
        inner = safe_a ** s * np.expm1(s * np.log(ratio)) / s
        from_zero = np.where(b > 0, b, 1.0) ** s / s if s > 0 else np.zeros_like(b)
    res = np.where(a > 0, inner, from_zero)
    return np.where(b > a, res, 0.0)


# elements per broadcast block in the numpy ray kernel (about 16 MB of float64)
_RAY_BLOCK = 2_000_000


def _ray_near_numpy(dirs, lo, hi, vol, alpha, radius):
    dirs = np.asarray(dirs, dtype=float)
    m, n = dirs.shape
    p = lo.shape[0]
    per_ray = (4 * p * p * n + 1) * p * p * (n + 1)
    step = max(1, _RAY_BLOCK // per_ray)
    if m > step:
        return np.concatenate([_ray_block(dirs[i:i + step], lo, hi, vol, alpha, radius)
                               for i in range(0, m, step)])
    return _ray_block(dirs, lo, hi, vol, alpha, radius)


def _ray_block(dirs, lo, hi, vol, alpha, radius):
    m, n = dirs.shape
    # candidate breakpoints, identical edge differences for every ray
    diffs = np.concatenate([
        (hi[:, None, :] - hi[None, :, :]).reshape(-1, n),
        (lo[:, None, :] - lo[None, :, :]).reshape(-1, n),
        (hi[:, None, :] - lo[None, :, :]).reshape(-1, n),
        (lo[:, None, :] - hi[None, :, :]).reshape(-1, n),
    ])  # (4p^2, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = diffs[None, :, :] / dirs[:, None, :]
    rho = rho.reshape(m, -1)
    rho = np.where((rho > 0) & (rho < radius) & np.isfinite(rho), rho, radius)
    edges = np.sort(rho, axis=1)
    edges = np.concatenate([np.zeros((m, 1)), edges, np.full((m, 1), radius)], axis=1)
    ra, rb = edges[:, :-1], edges[:, 1:]
    rm = 0.5 * (ra + rb)  # (m, P)

    h = rm[:, :, None] * dirs[:, None, :]  # (m, P, n)
    H = h[:, :, None, None, :]
    T = dirs[:, None, None, None, :]
    Bi, Bj = hi[None, None, :, None, :], hi[None, None, None, :, :]
    Ai, Aj = lo[None, None, :, None, :], lo[None, None, None, :, :]
    use_bi = Bi <= Bj + H
    hc = np.where(use_bi, Bi, Bj)
    hs = np.where(use_bi, 0.0, T)
    use_ai = Ai >= Aj + H
    lc = np.where(use_ai, Ai, Aj)
    ls = np.where(use_ai, 0.0, T)
    c0 = hc - lc
    c1 = hs - ls  # (m, P, p, p, n)
    alive = np.all(c0 + c1 * rm[:, :, None, None, None] > 0.0, axis=-1)

    coef = np.zeros(c0.shape[:-1] + (n + 1,))
    coef[..., 0] = 1.0
    for k in range(n):
        new = coef * c0[..., k:k + 1]
        new[..., 1:] += coef[..., :-1] * c1[..., k:k + 1]
        coef = new
    coef *= alive[..., None]
    poly = coef.sum(axis=(2, 3))  # (m, P, n+1)

    const = vol - poly[..., 0]
    const[:, 0] = 0.0
    total = const * _pow_int(ra, rb, -alpha)
    for d in range(1, n + 1):
        total -= poly[..., d] * _pow_int(ra, rb, d - alpha)
    return total.sum(axis=1)


# ---------------------------------------------------------------------------
# lattice difference sums: sum_j |f[j+k] - f[j]| over Z^n (zero extension)


@njit(cache=True)
def _diff_sums_1d(f):
    n0 = f.shape[0]
    s = 0.0
    for j in range(n0):
        s += abs(f[j])
    out = np.empty(2 * n0 - 1)
    for k in range(n0):
        acc = 0.0
        ova = 0.0
        ovb = 0.0
        for j in range(n0 - k):
            a = f[j + k]
            b = f[j]
            acc += abs(a - b)
            ova += abs(a)
            ovb += abs(b)
        tot = acc + (s - ova) + (s - ovb)
        out[n0 - 1 + k] = tot
        out[n0 - 1 - k] = tot
    return out


@njit(cache=True)
def _diff_sums_2d(f):
    n0, n1 = f.shape
    s = 0.0
    for i in range(n0):
        for j in range(n1):
            s += abs(f[i, j])
    out = np.empty((2 * n0 - 1, 2 * n1 - 1))
    for k0 in range(n0):
        for k1 in range(-n1 + 1, n1):
            acc = 0.0
            ova = 0.0
            ovb = 0.0
            j1lo = max(0, -k1)
            j1hi = min(n1, n1 - k1)
            for j0 in range(n0 - k0):
                for j1 in range(j1lo, j1hi):
                    a = f[j0 + k0, j1 + k1]
                    b = f[j0, j1]
                    acc += abs(a - b)
                    ova += abs(a)
                    ovb += abs(b)
            tot = acc + (s - ova) + (s - ovb)
            out[n0 - 1 + k0, n1 - 1 + k1] = tot
            out[n0 - 1 - k0, n1 - 1 - k1] = tot
    return out


@njit(cache=True)
def _diff_sums_3d(f):
    n0, n1, n2 = f.shape
    s = 0.0
    for i in range(n0):
        for j in range(n1):
            for l in range(n2):
                s += abs(f[i, j, l])
    out = np.empty((2 * n0 - 1, 2 * n1 - 1, 2 * n2 - 1))
    for k0 in range(n0):
        for k1 in range(-n1 + 1, n1):
            for k2 in range(-n2 + 1, n2):
                acc = 0.0
                ova = 0.0
                ovb = 0.0
                for j0 in range(n0 - k0):
                    for j1 in range(max(0, -k1), min(n1, n1 - k1)):
                        for j2 in range(max(0, -k2), min(n2, n2 - k2)):
                            a = f[j0 + k0, j1 + k1, j2 + k2]
                            b = f[j0, j1, j2]
                            acc += abs(a - b)
                            ova += abs(a)
                            ovb += abs(b)
                tot = acc + (s - ova) + (s - ovb)
                out[n0 - 1 + k0, n1 - 1 + k1, n2 - 1 + k2] = tot
                out[n0 - 1 - k0, n1 - 1 - k1, n2 - 1 - k2] = tot
    return out


def _diff_sums_numba(f):
    f = np.ascontiguousarray(f, dtype=float)
    if f.ndim == 1:
        return _diff_sums_1d(f)
    if f.ndim == 2:
        return _diff_sums_2d(f)
    if f.ndim == 3:
        return _diff_sums_3d(f)
    return _diff_sums_numpy(f)


def _diff_sums_numpy(f):
    f = np.asarray(f, dtype=float)
    shape = f.shape
    absf = np.abs(f)
    s = absf.sum()
    out = np.empty(tuple(2 * m - 1 for m in shape))
    center = tuple(m - 1 for m in shape)
    # half-space of offsets: first coordinate >= 0, the rest by mirror symmetry
    ranges = [range(0, shape[0])] + [range(-m + 1, m) for m in shape[1:]]
    for k in np.ndindex(*(len(r) for r in ranges)):
        off = tuple(r[i] for r, i in zip(ranges, k))
        sa = tuple(slice(max(0, o), m + min(0, o)) for o, m in zip(off, shape))
        sb = tuple(slice(max(0, -o), m - max(0, o)) for o, m in zip(off, shape))
        a, b = f[sa], f[sb]
        tot = np.abs(a - b).sum() + (s - absf[sa].sum()) + (s - absf[sb].sum())
        out[tuple(c + o for c, o in zip(center, off))] = tot
        out[tuple(c - o for c, o in zip(center, off))] = tot
    return out


if JIT_ENABLED:
    ray_near_integrals = _ray_near_numba
    lattice_diff_sums = _diff_sums_numba
else:
    ray_near_integrals = _ray_near_numpy
    lattice_diff_sums = _diff_sums_numpy

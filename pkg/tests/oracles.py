"""Reference computations that share no code with the package.

Each oracle is deliberately naive: high-precision scalar math, brute-force
enumeration, dense linear algebra or plain Monte Carlo.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate, optimize
from scipy.special import erfc

mpmath.mp.dps = 40


def q_mp(x) -> float:
    """Gaussian tail at 40 digits."""
    return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


def lognormal_cdf_quad(x, mu, sigma) -> float:
    """Integrate the log-normal density from 0 to ``x``."""
    def dens(r):
        return math.exp(-((math.log(r) - mu) ** 2) / (2 * sigma ** 2)) / (r * sigma * math.sqrt(2 * math.pi))
    # split at the median for accuracy
    med = math.exp(mu)
    if x <= med:
        v, _ = integrate.quad(dens, 0, x, epsabs=1e-14, epsrel=1e-13, limit=400)
        return v
    v1, _ = integrate.quad(dens, 0, med, epsabs=1e-14, epsrel=1e-13, limit=400)
    v2, _ = integrate.quad(dens, med, x, epsabs=1e-14, epsrel=1e-13, limit=400)
    return v1 + v2


def marginal_failure_mc(acc, kind, p, draws, seed):
    """Switching-failure probability averaged over the previous resistance by sampling.

    Returns ``(estimate, standard_error)``.
    """
    rng = np.random.default_rng(seed)
    if kind == "set":
        mu, sig, v, a, b, s, t = p.mu_h, p.sigma_h, p.v_w_set, p.alpha_set, p.beta_set, p.sigma_set, p.t_set
    else:
        mu, sig, v, a, b, s, t = p.mu_l, p.sigma_l, p.v_w_reset, p.alpha_reset, p.beta_reset, p.sigma_reset, p.t_reset
    tot = 0.0
    tot2 = 0.0
    done = 0
    while done < draws:
        k = min(1 << 21, draws - done)
        r = np.exp(mu + sig * rng.standard_normal(k))
        vc = v * r / (r + acc + p.r_sf)
        z = (math.log(t) - (a * vc + b)) / s
        f = 0.5 * erfc(z / math.sqrt(2))
        tot += f.sum()
        tot2 += (f * f).sum()
        done += k
    mean = tot / draws
    var = tot2 / draws - mean * mean
    return mean, math.sqrt(max(var, 0.0) / draws)


def dense_kcl(r_cell, r_sel, wl_v, bl_v, r_w, r_b):
    """Node voltages of a crossbar by dense Gaussian elimination.

    Unknowns are all ``2 m n`` crosspoint nodes; drivers and terminals are
    eliminated into the right-hand side. Returns ``(v_wl, v_bl)``.
    """
    m, n = r_cell.shape
    N = 2 * m * n
    G = np.zeros((N, N))
    I = np.zeros(N)

    def w(i, j):
        return i * n + j

    def b(i, j):
        return m * n + i * n + j

    def stamp(a, c, g):
        G[a, a] += g
        G[c, c] += g
        G[a, c] -= g
        G[c, a] -= g

    def stamp_src(a, g, v):
        G[a, a] += g
        I[a] += g * v

    for i in range(m):
        stamp_src(w(i, 0), 1 / r_w, wl_v[i])
        for j in range(n - 1):
            stamp(w(i, j), w(i, j + 1), 1 / r_w)
    for j in range(n):
        stamp_src(b(0, j), 1 / r_b, bl_v[j])
        for i in range(m - 1):
            stamp(b(i, j), b(i + 1, j), 1 / r_b)
    for i in range(m):
        for j in range(n):
            if math.isfinite(r_sel[i, j]):
                stamp(w(i, j), b(i, j), 1 / (r_sel[i, j] + r_cell[i, j]))
    v = np.linalg.solve(G, I)
    return v[: m * n].reshape(m, n), v[m * n:].reshape(m, n)


def bisect_stmc(acc, r_th0, tol=1e-9):
    """Plain bisection on ``mean(ln(R - acc)) = ln(r_th0)``."""
    acc = np.asarray(acc, dtype=float).ravel()

    def f(r):
        return float(np.mean(np.log(r - acc))) - math.log(r_th0)

    lo = acc.max() * (1 + 1e-12) + 1e-9
    hi = r_th0 + acc.max() + 1.0
    while f(hi) < 0:
        hi *= 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binomial_tail_exact(n, t, p: Fraction) -> Fraction:
    """``1 - sum_{e<=t} C(n, e) p^e (1-p)^(n-e)`` in rational arithmetic."""
    return 1 - sum(Fraction(math.comb(n, e)) * p ** e * (1 - p) ** (n - e) for e in range(t + 1))


def exhaustive_ilp(c, rates, r_min):
    """Best ``(value, choice)`` over all allocations with mean rate >= ``r_min``."""
    m, L = c.shape
    best, arg = math.inf, None
    for choice in itertools.product(range(L), repeat=m):
        ch = np.array(choice)
        if rates[ch].mean() < r_min - 1e-12:
            continue
        v = c[np.arange(m), ch].sum()
        if v < best - 1e-15:
            best, arg = v, ch
    return best, arg


def lp_oracle(c, rates, r_min):
    """Generic LP solve of the relaxed allocation problem."""
    m, L = c.shape
    cost = c.ravel()  # variable (i, l) -> i * L + l
    A_eq = np.zeros((m, m * L))
    for i in range(m):
        A_eq[i, i * L:(i + 1) * L] = 1
    A_ub = -np.tile(rates, m)[None, :] / m
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=[-r_min], A_eq=A_eq, b_eq=np.ones(m),
                           bounds=(0, 1), method="highs",
                           options={"primal_feasibility_tolerance": 1e-10,
                                    "dual_feasibility_tolerance": 1e-10})
    assert res.status == 0, res.message
    return res.fun


# -- GF(2) polynomial helpers without log tables ---------------------------------


def gf_mul_slow(a, b, prim, m):
    out = 0
    for _ in range(m):
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= prim
    return out


def gf_pow_slow(a, e, prim, m):
    out = 1
    for _ in range(e):
        out = gf_mul_slow(out, a, prim, m)
    return out


def min_poly_bruteforce(s, prim, m):
    """Lowest-degree monic binary polynomial vanishing at ``alpha^s``, by search."""
    beta = gf_pow_slow(2, s, prim, m)
    powers = [1]
    for _ in range(m):
        powers.append(gf_mul_slow(powers[-1], beta, prim, m))
    for deg in range(1, m + 1):
        for low in range(1 << deg):
            poly = low | (1 << deg)
            acc = 0
            for c in range(deg + 1):
                if poly >> c & 1:
                    acc ^= powers[c]
            if acc == 0:
                return poly
    raise AssertionError("no minimal polynomial found")


def clmul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def bch_generator_oracle(t, prim, m):
    polys = []
    for s in range(1, 2 * t + 1):
        f = min_poly_bruteforce(s, prim, m)
        if f not in polys:
            polys.append(f)
    g = 1
    for f in polys:
        g = clmul(g, f)
    return g

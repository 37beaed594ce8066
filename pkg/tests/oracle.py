"""Independent extended-precision oracle for the statistics engine.

Everything here is evaluated from the defining formulas with mpmath at
50 significant digits (exact Fractions for the tiny hand cases), using
normal equations instead of QR so the computational route shares nothing
with the implementation under test. No antiwatt imports on purpose.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

mp.mp.dps = 50


def _to_mp(values):
    return [mp.mpf(v) for v in values]


def o_mean(x):
    xs = _to_mp(x)
    return mp.fsum(xs) / len(xs)


def o_pearson(x, y):
    xs, ys = _to_mp(x), _to_mp(y)
    mx, my = o_mean(xs), o_mean(ys)
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    sxy = mp.fsum(a * b for a, b in zip(dx, dy))
    sxx = mp.fsum(a * a for a in dx)
    syy = mp.fsum(b * b for b in dy)
    return sxy / mp.sqrt(sxx * syy)


def o_rankdata(x):
    n = len(x)
    order = sorted(range(n), key=lambda i: x[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        avg = Fraction(i + j, 2) + 1
        for k in range(i, j + 1):
            ranks[order[k]] = float(avg)
        i = j + 1
    return ranks


def o_spearman(x, y):
    return o_pearson(o_rankdata(x), o_rankdata(y))


def _solve(A, b):
    """Gaussian elimination with partial pivoting on mp numbers."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise ZeroDivisionError("singular system")
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                for c in range(col, n + 1):
                    M[r][c] -= f * M[col][c]
    return [M[i][n] / M[i][i] for i in range(n)]


def _inverse(A):
    n = len(A)
    cols = []
    for j in range(n):
        e = [mp.mpf(1) if i == j else mp.mpf(0) for i in range(n)]
        cols.append(_solve(A, e))
    # cols[j] is the j-th column of A^-1
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def o_ols(X, y):
    """Normal-equations OLS. Returns a dict of everything downstream needs."""
    n = len(X)
    p = len(X[0])
    Xm = [[mp.mpf(v) for v in row] for row in X]
    ym = _to_mp(y)
    xtx = [[mp.fsum(Xm[i][a] * Xm[i][b] for i in range(n)) for b in range(p)] for a in range(p)]
    xty = [mp.fsum(Xm[i][a] * ym[i] for i in range(n)) for a in range(p)]
    beta = _solve(xtx, xty)
    fitted = [mp.fsum(Xm[i][a] * beta[a] for a in range(p)) for i in range(n)]
    resid = [ym[i] - fitted[i] for i in range(n)]
    xtx_inv = _inverse(xtx)
    leverage = []
    for i in range(n):
        xi = Xm[i]
        v = [mp.fsum(xtx_inv[a][b] * xi[b] for b in range(p)) for a in range(p)]
        leverage.append(mp.fsum(xi[a] * v[a] for a in range(p)))
    ssr = mp.fsum(e * e for e in resid)
    my = o_mean(ym)
    sst = mp.fsum((v - my) ** 2 for v in ym)
    r2 = mp.mpf(0) if sst == 0 else 1 - ssr / sst
    sigma2 = ssr / (n - p)
    classical = [[sigma2 * xtx_inv[a][b] for b in range(p)] for a in range(p)]
    return {
        "beta": beta,
        "residuals": resid,
        "leverage": leverage,
        "r2": r2,
        "sigma2": sigma2,
        "xtx_inv": xtx_inv,
        "classical_cov": classical,
        "n": n,
        "p": p,
        "X": Xm,
    }


def o_hc3(fit):
    n, p, Xm = fit["n"], fit["p"], fit["X"]
    xtx_inv, resid, lev = fit["xtx_inv"], fit["residuals"], fit["leverage"]
    # A = (X'X)^-1 X'  (p x n)
    A = [[mp.fsum(xtx_inv[a][b] * Xm[i][b] for b in range(p)) for i in range(n)] for a in range(p)]
    w = [(resid[i] / (1 - lev[i])) ** 2 for i in range(n)]
    V = [[mp.fsum(A[a][i] * w[i] * A[b][i] for i in range(n)) for b in range(p)] for a in range(p)]
    return V


def o_chi2_sf(x, df):
    return mp.gammainc(mp.mpf(df) / 2, mp.mpf(x) / 2, mp.inf, regularized=True)


def o_breusch_pagan(X, y):
    fit = o_ols(X, y)
    e2 = [e * e for e in fit["residuals"]]
    aux = o_ols(X, e2)
    lm = fit["n"] * aux["r2"]
    p_value = o_chi2_sf(lm, fit["p"] - 1)
    return lm, p_value


def o_t_sf2(t, df):
    """Two-sided Student-t p-value for |t|."""
    t = abs(mp.mpf(t))
    x = df / (df + t * t)
    return mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, x, regularized=True)


def o_t_quantile(q, df):
    """Upper-tail quantile: t with P(T > t) = 1 - q for q in (0.5, 1)."""
    target = mp.mpf(2) * (1 - mp.mpf(q))

    def f(t):
        return o_t_sf2(t, df) - target

    return mp.findroot(f, mp.mpf(2))


def o_infer(X, y, j, alpha=0.05, robust=True):
    fit = o_ols(X, y)
    V = o_hc3(fit) if robust else fit["classical_cov"]
    beta = fit["beta"][j]
    se = mp.sqrt(V[j][j])
    df = fit["n"] - fit["p"]
    t = beta / se
    p = o_t_sf2(t, df)
    tcrit = o_t_quantile(1 - mp.mpf(alpha) / 2, df)
    return {
        "beta": beta,
        "se": se,
        "t": t,
        "p": p,
        "ci_low": beta - tcrit * se,
        "ci_high": beta + tcrit * se,
    }


def o_anderson_darling(x):
    n = len(x)
    xs = _to_mp(x)
    m = o_mean(xs)
    var = mp.fsum((v - m) ** 2 for v in xs) / (n - 1)
    sd = mp.sqrt(var)
    z = sorted((v - m) / sd for v in xs)
    total = mp.mpf(0)
    for i in range(1, n + 1):
        phi = mp.ncdf(z[i - 1])
        phi_hi = mp.ncdf(z[n - i])
        total += (2 * i - 1) * (mp.log(phi) + mp.log(1 - phi_hi))
    a2 = -n - total / n
    a2a = a2 * (1 + mp.mpf("0.75") / n + mp.mpf("2.25") / n**2)
    if a2a < mp.mpf("0.2"):
        p = 1 - mp.e ** (mp.mpf("-13.436") + mp.mpf("101.14") * a2a - mp.mpf("223.73") * a2a**2)
    elif a2a < mp.mpf("0.34"):
        p = 1 - mp.e ** (mp.mpf("-8.318") + mp.mpf("42.796") * a2a - mp.mpf("59.938") * a2a**2)
    elif a2a < mp.mpf("0.6"):
        p = mp.e ** (mp.mpf("0.9177") - mp.mpf("4.279") * a2a - mp.mpf("1.38") * a2a**2)
    elif a2a <= 13:
        p = mp.e ** (mp.mpf("1.2937") - mp.mpf("5.709") * a2a + mp.mpf("0.0186") * a2a**2)
    else:
        p = mp.mpf(0)
    p = min(max(p, mp.mpf(0)), mp.mpf(1))
    return a2a, p


# --- exact-rational route for the tiny hand-checked cases ---------------


def frac_ols_hc3(X, y):
    """Exact HC3 matrix via Fractions for a small dataset."""
    n = len(X)
    p = len(X[0])
    Xf = [[Fraction(v) for v in row] for row in X]
    yf = [Fraction(v) for v in y]
    xtx = [[sum(Xf[i][a] * Xf[i][b] for i in range(n)) for b in range(p)] for a in range(p)]
    xty = [sum(Xf[i][a] * yf[i] for i in range(n)) for a in range(p)]

    def fsolve(A, b):
        m = len(A)
        M = [row[:] + [b[i]] for i, row in enumerate(A)]
        for col in range(m):
            piv = next(r for r in range(col, m) if M[r][col] != 0)
            M[col], M[piv] = M[piv], M[col]
            for r in range(m):
                if r != col and M[r][col] != 0:
                    f = M[r][col] / M[col][col]
                    for c in range(col, m + 1):
                        M[r][c] -= f * M[col][c]
        return [M[i][m] / M[i][i] for i in range(m)]

    beta = fsolve(xtx, xty)
    resid = [yf[i] - sum(Xf[i][a] * beta[a] for a in range(p)) for i in range(n)]
    inv_cols = [fsolve(xtx, [Fraction(int(i == j)) for i in range(p)]) for j in range(p)]
    xtx_inv = [[inv_cols[j][i] for j in range(p)] for i in range(p)]
    lev = []
    for i in range(n):
        xi = Xf[i]
        v = [sum(xtx_inv[a][b] * xi[b] for b in range(p)) for a in range(p)]
        lev.append(sum(xi[a] * v[a] for a in range(p)))
    A = [[sum(xtx_inv[a][b] * Xf[i][b] for b in range(p)) for i in range(n)] for a in range(p)]
    w = [(resid[i] / (1 - lev[i])) ** 2 for i in range(n)]
    V = [[sum(A[a][i] * w[i] * A[b][i] for i in range(n)) for b in range(p)] for a in range(p)]
    return {"beta": beta, "residuals": resid, "leverage": lev, "hc3": V}

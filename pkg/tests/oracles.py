"""Independent oracles the tests check the library against.

Everything here is deliberately written from first principles (dense
matrices, finite differences, scalar minimization, exhaustive grids) and
shares no code path with the package.
"""

import numpy as np
from numba import njit
from scipy.optimize import minimize_scalar


def dense_degree_matrix(d):
    """The d x p matrix of the edge-weights -> node-degrees map, built by
    looping over the upper triangle in row-major order."""
    p = d * (d - 1) // 2
    S = np.zeros((d, p))
    k = 0
    for i in range(d):
        for j in range(i + 1, d):
            S[i, k] = 1.0
            S[j, k] = 1.0
            k += 1
    return S


def finite_difference_gradient(f, w, rel_h=1e-6):
    """Central differences with per-coordinate step h = rel_h * (1 + |w_k|)."""
    g = np.zeros_like(w)
    for k in range(w.size):
        h = rel_h * (1.0 + abs(w[k]))
        up = w.copy()
        dn = w.copy()
        up[k] += h
        dn[k] -= h
        g[k] = (f(up) - f(dn)) / (2.0 * h)
    return g


def pairwise_distance_loops(X):
    """O(d^2 N) double loop over row pairs."""
    d, n = X.shape
    z = []
    for i in range(d):
        for j in range(i + 1, d):
            acc = 0.0
            for t in range(n):
                acc += (X[i, t] - X[j, t]) ** 2
            z.append(acc)
    return np.array(z)


def prox_nonneg_l1_scalar(v, mu):
    """Coordinate minimizer of q(x) = 0.5 (x - v)^2 + mu x over x >= 0.

    On the feasible set the l1 penalty equals mu x, so q is a parabola with
    unconstrained stationary point v - mu; the constrained minimizer is that
    point when it is positive and the boundary 0 otherwise.  A bounded
    numeric search cross-checks the case analysis at its own accuracy.
    """
    interior = v - mu
    best = interior if interior > 0 else 0.0

    def obj(x):
        return 0.5 * (x - v) ** 2 + mu * x

    res = minimize_scalar(obj, bounds=(0.0, max(1.0, abs(v) + 1.0)), method="bounded",
                          options={"xatol": 1e-12})
    numeric = min([0.0, float(res.x)], key=obj)
    assert abs(numeric - best) < 1e-7, "case analysis disagrees with numeric search"
    return best


def consensus_prox_oracle(v, mu):
    return np.array([prox_nonneg_l1_scalar(vk, mu) for vk in v])


def l1_prox_scalar_grid(v, mu, span=3.0, step=1e-6):
    """Brute-force grid argmin of 0.5 (x - v)^2 + mu |x| over the real line."""
    xs = np.arange(-span, span + step, step)
    vals = 0.5 * (xs - v) ** 2 + mu * np.abs(xs)
    return float(xs[np.argmin(vals)])


def server_round_oracle(ws, gammas, lam, rho, eps_gamma):
    """Straight-line restatement of one server round on raw arrays."""
    c_gamma = float(np.sum(gammas))
    avg = np.zeros_like(ws[0])
    for g_i, w_i in zip(gammas, ws):
        avg = avg + g_i * w_i
    avg = avg / c_gamma
    mu = lam / (c_gamma * rho)
    w_con = np.maximum(avg - mu, 0.0)
    new_gamma = np.array([1.0 / (np.linalg.norm(w - w_con) + eps_gamma) for w in ws])
    return w_con, new_gamma


# --- exhaustive grid search for the d=3 local subproblem --------------------
#
# The round objective restricted to a grid line in any single coordinate is
# a strictly convex sequence (quadratics plus -log of affine terms), so the
# slice minimum over k can be located by binary search on first differences.
# That keeps the exact 2001^3 grid minimum tractable; correctness of the
# shortcut is cross-checked against full enumeration on a coarse grid.


@njit(cache=True)
def _slice_min(S3, g, a_shift, b_shift, alpha, zeta):
    n = g.shape[0]
    lo, hi = 0, n - 1
    while lo < hi:
        mid = (lo + hi) // 2
        f_mid = (S3[mid] - alpha * (np.log(a_shift + g[mid] + zeta)
                                    + np.log(b_shift + g[mid] + zeta)))
        f_nxt = (S3[mid + 1] - alpha * (np.log(a_shift + g[mid + 1] + zeta)
                                        + np.log(b_shift + g[mid + 1] + zeta)))
        if f_nxt < f_mid:
            lo = mid + 1
        else:
            hi = mid
    return S3[lo] - alpha * (np.log(a_shift + g[lo] + zeta)
                             + np.log(b_shift + g[lo] + zeta))


@njit(cache=True)
def _grid_min_d3(g, S1, S2, S3, alpha, zeta):
    n = g.shape[0]
    best = np.inf
    for i in range(n):
        for j in range(n):
            base = S1[i] + S2[j] - alpha * np.log(g[i] + g[j] + zeta)
            val = base + _slice_min(S3, g, g[i], g[j], alpha, zeta)
            if val < best:
                best = val
    return best


def _axis_terms(g, c_k, beta, rho_gamma, wc_k):
    return c_k * g + 2.0 * beta * g * g + 0.5 * rho_gamma * (g - wc_k) ** 2


def grid_min_round_objective_d3(z, w_con, gamma, hp, lo=0.0, hi=2.0, step=1e-3):
    """Minimum of the d=3 round objective over the cubic grid [lo, hi]^3.

    Edge order is (1,2), (1,3), (2,3); node degrees pair the coordinates as
    (w1+w2), (w1+w3), (w2+w3).
    """
    n = int(round((hi - lo) / step)) + 1
    g = lo + step * np.arange(n)
    c = z.z / z.n
    rg = hp.rho * gamma
    S1 = _axis_terms(g, c[0], hp.beta, rg, w_con[0])
    S2 = _axis_terms(g, c[1], hp.beta, rg, w_con[1])
    S3 = _axis_terms(g, c[2], hp.beta, rg, w_con[2])
    return float(_grid_min_d3(g, S1, S2, S3, hp.alpha, hp.zeta))


def grid_min_round_objective_d3_bruteforce(z, w_con, gamma, hp, lo=0.0, hi=2.0,
                                           step=2e-2):
    """Full enumeration on a coarse grid; validates the binary-search oracle."""
    n = int(round((hi - lo) / step)) + 1
    g = lo + step * np.arange(n)
    c = z.z / z.n
    rg = hp.rho * gamma
    W1, W2, W3 = np.meshgrid(g, g, g, indexing="ij")
    val = (c[0] * W1 + c[1] * W2 + c[2] * W3
           + 2.0 * hp.beta * (W1**2 + W2**2 + W3**2)
           + 0.5 * rg * ((W1 - w_con[0])**2 + (W2 - w_con[1])**2 + (W3 - w_con[2])**2)
           - hp.alpha * (np.log(W1 + W2 + hp.zeta) + np.log(W1 + W3 + hp.zeta)
                         + np.log(W2 + W3 + hp.zeta)))
    return float(val.min())

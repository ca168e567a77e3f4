#!/usr/bin/env python3
"""Generate the approximate spherical designs embedded in the built-in ladder.

Each design has the north pole (0,0,1) as its first point. The remaining
points are moved by L-BFGS on the sum over l=1..t of
R_l = (1/m^2) sum_{h,i} P_l(x_h . x_i), which vanishes exactly on a
spherical t-design. If the target strength cannot be reached to the
requested residual the strength is lowered and the search continues from
the current configuration.

Usage: generate.py OUTDIR [FIRST_LEVEL]
"""
import sys
import numpy as np
from scipy.optimize import minimize

# (cardinality, target strength) per ladder level >= 2.
# Targets follow the cardinalities of the reference ladder; strengths at the
# three largest levels are lowered to what the optimizer reaches reliably.
LEVELS = [(4, 1), (8, 3), (16, 3), (32, 7), (64, 7), (129, 15), (256, 15),
          (513, 27), (1024, 31), (2049, 44)]
RESIDUAL_TOL = 1e-14


def legendre_sums(z, t):
    """Return sum_{l=1}^t P_l(z) and its derivative, elementwise."""
    p_prev = np.ones_like(z)
    p = z.copy()
    dp_prev = np.zeros_like(z)
    dp = np.ones_like(z)
    g = p.copy()
    dg = dp.copy()
    for l in range(1, t):
        p_next = ((2 * l + 1) * z * p - l * p_prev) / (l + 1)
        dp_next = dp_prev + (2 * l + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
        g += p
        dg += dp
    return g, dg


def per_degree(x, t):
    z = np.clip(x @ x.T, -1.0, 1.0)
    m = len(x)
    out = []
    p_prev = np.ones_like(z)
    p = z.copy()
    out.append(p.sum() / m**2)
    for l in range(1, t):
        p_next = ((2 * l + 1) * z * p - l * p_prev) / (l + 1)
        p_prev, p = p, p_next
        out.append(p.sum() / m**2)
    return np.array(out)


def objective(v_flat, t, m):
    v = v_flat.reshape(m - 1, 3)
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    x = np.vstack([[0.0, 0.0, 1.0], v / norms])
    z = np.clip(x @ x.T, -1.0, 1.0)
    g, dg = legendre_sums(z, t)
    f = g.sum() / m**2
    grad_x = 2.0 / m**2 * (dg @ x)
    gx = grad_x[1:]
    xs = x[1:]
    tangent = gx - np.sum(gx * xs, axis=1, keepdims=True) * xs
    grad_v = tangent / norms
    return f, grad_v.ravel()


def spiral_start(m, rng):
    # generalized spiral with the pole as point 0
    k = np.arange(1, m)
    zc = 1.0 - 2.0 * (k + 0.5) / m
    phi = np.arccos(np.clip(zc, -1, 1))
    theta = np.pi * (1 + 5**0.5) * k + rng.uniform(0, 2 * np.pi)
    v = np.stack([np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)], axis=1)
    v += 1e-3 * rng.standard_normal(v.shape)
    return v


def solve(m, t, rng):
    v = spiral_start(m, rng)
    while t >= 1:
        for _ in range(3):
            res = minimize(objective, v.ravel(), args=(t, m), jac=True, method="L-BFGS-B",
                           options={"maxiter": 6000, "ftol": 0.0, "gtol": 1e-20, "maxcor": 30})
            v = res.x.reshape(m - 1, 3)
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            if res.fun <= RESIDUAL_TOL:
                break
        x = np.vstack([[0.0, 0.0, 1.0], v])
        r = per_degree(x, t)
        print(f"m={m} t={t} f={res.fun:.3e} maxR={r.max():.3e}", flush=True)
        if r.max() <= RESIDUAL_TOL:
            return x, t
        t -= 1
    raise RuntimeError("no design found")


def main():
    outdir = sys.argv[1]
    first = int(sys.argv[2]) if len(sys.argv) > 2 else 2
    for j, (m, t) in enumerate(LEVELS, start=2):
        if j < first:
            continue
        rng = np.random.default_rng(20120101 + j)
        x, achieved = solve(m, t, rng)
        with open(f"{outdir}/level{j:02d}_m{m}_t{achieved}.txt", "w") as fh:
            fh.write(f"# approximate spherical design: level {j}, m={m}, strength {achieved}\n")
            for p in x:
                fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")


if __name__ == "__main__":
    main()

"""Local polynomial regression: exact reproduction, conditioning, decay of error.

The policy estimates arm means by fitting a bounded-degree polynomial over
the samples inside a ball around each cube center.  The Gram matrix of the
scaled monomials doubles as a conditioning certificate: fits whose minimum
eigenvalue is tiny are declared degenerate and report 0.
"""

import numpy as np

from smoothbandit import enumerate_basis, gram_matrix, local_poly_estimate, min_eigenvalue

rng = np.random.default_rng(0)

# --- polynomials of degree <= l are reproduced exactly ------------------------
basis = enumerate_basis(d=1, l=2)
x = np.array([0.4])
pts = x + rng.uniform(-0.2, 0.2, size=(40, 1))
y = 1.0 - 2.0 * (pts[:, 0] - 0.4) + 3.0 * (pts[:, 0] - 0.4) ** 2
value, fit = local_poly_estimate(x, pts, y, h=0.2, basis=basis)
print(f"quadratic data, quadratic fit: value={value:.12f} (truth 1.0), "
      f"min eig {fit.min_eigenvalue:.3f}, {fit.n_in_ball} samples in ball")

# --- degenerate geometry falls back to zero -----------------------------------
value, fit = local_poly_estimate(x, np.array([[0.9]]), np.array([1.0]), h=0.2, basis=basis)
print(f"empty ball: value={value}, degenerate={fit.degenerate}")

# a single stacked sample cannot identify a quadratic either
pts1 = np.repeat([[0.4]], 5, axis=0)
value, fit = local_poly_estimate(x, pts1, np.full(5, 0.7), h=0.2, basis=basis)
print(f"five copies of one point: degenerate={fit.degenerate} "
      f"(min eig {fit.min_eigenvalue:.1e})")

# --- the Gram matrix in the scaled basis --------------------------------------
g = gram_matrix(x, np.array([[0.3], [0.5]]), h=0.2, basis=enumerate_basis(1, 1))
print("\nGram of two symmetric samples at +-h/2:")
print(g, " min eig", min_eigenvalue(g))

# --- error decays with sample size at the bandwidth the policy uses ------------
print("\nsup error of the fit to sin(2 pi x)/4 + 1/2 over a 50-point grid:")
beta, d = 2.0, 1
grid = np.linspace(0.05, 0.95, 50)[:, None]
basis = enumerate_basis(d, 1)
for n in (500, 2000, 8000):
    pts = rng.random((n, 1))
    y = np.sin(2 * np.pi * pts[:, 0]) / 4 + 0.5 + 0.1 * rng.standard_normal(n)
    h = n ** (-1.0 / (2 * beta + d))
    errs = [
        abs(local_poly_estimate(q, pts, y, h, basis)[0] - (np.sin(2 * np.pi * q[0]) / 4 + 0.5))
        for q in grid
    ]
    print(f"  n={n:>5d} h={h:.3f}: sup error {max(errs):.4f}")

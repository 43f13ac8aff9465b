"""The bump-grid hard instance and its assumption validators.

This family realizes the regret lower bound: arm -1 is flat at 1/2, arm +1
adds a signed smooth bump of height C q^-beta in each of m cells of a 1/q
grid, and contexts concentrate on small balls around the bump centers.
The margin law collapses to a single step at the bump height, which makes
the instance maximally confusable at the horizon it was built for.
"""

import numpy as np

from smoothbandit import (
    PolicyConfig,
    cate,
    make_lower_bound_instance,
    run_two_arm,
    verify_density,
    verify_holder,
    verify_margin,
)
from smoothbandit.environments import margin_probability

inst = make_lower_bound_instance(T=100_000, beta=1.0, alpha=0.5, d=1, seed=3)
height = inst.c_phi * float(inst.q) ** -inst.meta.beta
print(f"{inst.name}")
print(f"  grid cells per axis q = {inst.q}, signed bumps m = {inst.m}, "
      f"per-ball mass omega = {inst.omega:.4f}")
print(f"  bump height C q^-beta = {height:.3e}, signs {inst.sigma}")

# --- the margin law is a step function ----------------------------------------
rng = np.random.default_rng(0)
for t in (0.5 * height, 2.0 * height):
    p_hat, se = margin_probability(inst, t, 400_000, rng)
    print(f"  P(0 < |tau| <= {t:.2e}) = {p_hat:.4f}  "
          f"(step predicts {0.0 if t < height else inst.m * inst.omega:.4f})")

# --- validators ----------------------------------------------------------------
print()
print(verify_margin(inst, inst.meta.alpha, inst.meta.gamma,
                    [0.5 * height, 2 * height, 0.01], 200_000, rng).summary())
print(verify_holder(inst, beta=inst.meta.beta, L=inst.meta.L,
                    n_pairs=5000, rng=rng).summary())
print(verify_density(inst, n_samples=300_000, rng=rng).summary())

# --- the policy still runs on the holey support --------------------------------
cfg = PolicyConfig(beta=1.0, d=1, horizon=20_000, c_epoch=8.0, p=0.5)
res = run_two_arm(inst, cfg, seed=1)
print(f"\npolicy run on the hard instance: regret {res.final_regret:.2f} "
      f"over {res.horizon} steps ({res.meta['epochs']} epochs)")
print("regret is tiny in absolute terms because the bump height is "
      f"{height:.1e}; the point of the family is its scaling in T")
X = inst.sample_contexts(np.random.default_rng(5), 200_000)
print(f"max |tau| ever sampled: {np.abs(cate(inst, X)).max():.3e}")

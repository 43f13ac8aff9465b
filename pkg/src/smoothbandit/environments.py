"""Synthetic bandit environments.

Provides smooth parametric instance families with analytically known
treatment effects, a hard-instance family built from compactly supported
smooth bumps on a shrinking grid, and Monte-Carlo validators for the
assumptions an instance declares (smoothness, decision-region regularity,
density bounds, margin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, stats

from .geometry import ball_region_fraction, unit_ball_volume, unit_cube_support

TWO_ARMS = (1, -1)


# ---------------------------------------------------------------------------
# Instance container


@dataclass(frozen=True)
class InstanceMeta:
    """Declared regularity parameters of an instance."""

    beta: float
    L: float
    L1: float
    alpha: float
    gamma: float
    c0: float
    r0: float
    mu_min: float
    mu_max: float
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Instance:
    """A sampleable bandit environment.

    ``mean(points, arm)`` returns conditional mean rewards in [0,1];
    ``sample_contexts(rng, n)`` draws contexts inside the support; the
    reward law given the mean is Bernoulli by default, or a Gaussian
    truncated symmetrically around the mean (mean-preserving) when
    ``noise`` is ``"truncated_gaussian"``.
    """

    name: str
    d: int
    arms: tuple
    mean: Callable[[np.ndarray, object], np.ndarray]
    sample_contexts: Callable[[np.random.Generator, int], np.ndarray]
    support: Callable[[np.ndarray], np.ndarray]
    meta: InstanceMeta
    noise: str = "bernoulli"
    noise_scale: float = 0.1
    mean_deriv: Callable[[np.ndarray, object, tuple], np.ndarray] | None = None

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def means_matrix(self, points: np.ndarray) -> np.ndarray:
        """Mean rewards for every arm, shape (n_arms, n)."""
        points = np.atleast_2d(points)
        return np.stack([self.mean(points, a) for a in self.arms])

    def oracle_indices(self, points: np.ndarray) -> np.ndarray:
        """Index (into ``arms``) of the optimal arm; ties go to the arm
        listed first, which is +1 for two-arm instances and the smallest
        id when arms are listed ascending."""
        return np.argmax(self.means_matrix(points), axis=0)

    def sample_rewards(self, rng: np.random.Generator, means: np.ndarray) -> np.ndarray:
        means = np.asarray(means, dtype=float)
        if self.noise == "bernoulli":
            return (rng.random(means.shape[0]) < means).astype(float)
        if self.noise == "truncated_gaussian":
            # symmetric truncation about the mean keeps E[Y] = mean and Y in [0,1];
            # a mean at 0 or 1 leaves no room and the reward is deterministic
            half = np.minimum(means, 1.0 - means)
            y = means.copy()
            room = half > 0
            if np.any(room):
                width = half[room] / self.noise_scale
                y[room] = stats.truncnorm.rvs(
                    -width, width, loc=means[room], scale=self.noise_scale, random_state=rng
                )
            return y
        raise ValueError(f"unknown noise law {self.noise!r}")


def cate(instance: Instance, points: np.ndarray) -> np.ndarray:
    """Treatment effect of arm +1 over arm -1 (two-arm instances)."""
    if instance.arms != TWO_ARMS:
        raise ValueError("cate is defined for two-arm instances with arms (+1, -1)")
    points = np.atleast_2d(points)
    return instance.mean(points, 1) - instance.mean(points, -1)


def oracle_arm(instance: Instance, x: np.ndarray):
    """Optimal arm at a single context; see ``Instance.oracle_indices``."""
    idx = instance.oracle_indices(np.atleast_2d(np.asarray(x, dtype=float)))[0]
    return instance.arms[int(idx)]


# ---------------------------------------------------------------------------
# Smooth parametric families


def _uniform_sampler(d: int):
    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.random((n, d))

    return sample


def make_smooth_instance(family: str, d: int = 1, **params) -> Instance:
    """Built-in smooth families with analytic effects and derivatives.

    constant_gap(gap):            tau is the constant ``gap``.
    sinusoidal(frequency, amplitude):
                                  tau(x) = amplitude * sin(2 pi frequency x_1),
                                  realized as means 1/2 +- tau/2.
    polynomial_boundary(degree, scale):
                                  tau(x) = scale * (x_1 - 1/2)^degree.
    """
    if family == "constant_gap":
        return _constant_gap_instance(d, **params)
    if family == "sinusoidal":
        return _sinusoidal_instance(d, **params)
    if family == "polynomial_boundary":
        return _polynomial_boundary_instance(d, **params)
    raise ValueError(f"unknown family {family!r}")


def _symmetric_two_arm(name, d, tau_fn, tau_deriv_fn, meta, noise="bernoulli", noise_scale=0.1):
    """Two arms at 1/2 +- tau/2; keeps means in [0,1] whenever |tau| <= 1."""

    def mean(points, arm):
        points = np.atleast_2d(points)
        return 0.5 + 0.5 * arm * tau_fn(points)

    def mean_deriv(points, arm, r):
        points = np.atleast_2d(points)
        if sum(r) == 0:
            return mean(points, arm)
        return 0.5 * arm * tau_deriv_fn(points, r)

    return Instance(
        name=name,
        d=d,
        arms=TWO_ARMS,
        mean=mean,
        sample_contexts=_uniform_sampler(d),
        support=unit_cube_support,
        meta=meta,
        noise=noise,
        noise_scale=noise_scale,
        mean_deriv=mean_deriv,
    )


def _constant_gap_instance(d: int, gap: float = 0.5, **extra) -> Instance:
    if not 0 <= gap <= 1:
        raise ValueError(f"gap must lie in [0, 1] to keep means in [0,1], got {gap}")

    def tau_fn(points):
        return np.full(len(points), gap)

    def tau_deriv_fn(points, r):
        return np.zeros(len(points))

    meta = InstanceMeta(
        beta=float(extra.pop("beta", 2.0)),
        L=0.0,
        L1=0.0,
        alpha=math.inf,
        gamma=1.0,
        c0=2.0**-d,
        r0=0.5,
        mu_min=1.0,
        mu_max=1.0,
        extras={"gap": gap, "note": "inferior arm optimal nowhere", **extra},
    )
    return _symmetric_two_arm(f"constant_gap({gap})", d, tau_fn, tau_deriv_fn, meta)


def _sinusoidal_instance(
    d: int,
    frequency: float = 1.0,
    amplitude: float = 0.4,
    beta: float = 2.0,
    noise: str = "bernoulli",
    noise_scale: float = 0.1,
) -> Instance:
    if not 0 < amplitude <= 1:
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    if frequency <= 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    w = 2 * math.pi * frequency

    def tau_fn(points):
        return amplitude * np.sin(w * points[:, 0])

    def tau_deriv_fn(points, r):
        if any(ri > 0 for ri in r[1:]):
            return np.zeros(len(points))
        k = r[0]
        # d^k/dx^k sin(wx) = w^k sin(wx + k pi/2)
        return amplitude * w**k * np.sin(w * points[:, 0] + k * math.pi / 2)

    lsmall = math.ceil(beta) - 1  # largest integer strictly below beta
    taylor_L = 0.5 * amplitude * w ** (lsmall + 1) / math.factorial(lsmall + 1)
    meta = InstanceMeta(
        beta=beta,
        L=taylor_L,
        L1=0.5 * amplitude * w,
        alpha=1.0,
        gamma=1.0 / amplitude,
        c0=4.0**-d,
        r0=min(0.25 / frequency, 0.5),
        mu_min=1.0,
        mu_max=1.0,
        extras={"frequency": frequency, "amplitude": amplitude},
    )
    return _symmetric_two_arm(
        f"sinusoidal(f={frequency},A={amplitude})", d, tau_fn, tau_deriv_fn, meta,
        noise=noise, noise_scale=noise_scale,
    )


def _polynomial_boundary_instance(d: int, degree: int = 1, scale: float = 0.5, beta: float = 2.0) -> Instance:
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if not 0 < scale * 0.5**degree <= 1:
        raise ValueError("scale leaves means outside [0, 1]")

    def tau_fn(points):
        return scale * (points[:, 0] - 0.5) ** degree

    def tau_deriv_fn(points, r):
        if any(ri > 0 for ri in r[1:]):
            return np.zeros(len(points))
        k = r[0]
        if k > degree:
            return np.zeros(len(points))
        coef = scale * math.perm(degree, k)
        return coef * (points[:, 0] - 0.5) ** (degree - k)

    meta = InstanceMeta(
        beta=beta,
        L=0.0 if degree < beta else scale * 2.0**degree,
        L1=scale * degree * 0.5 ** (degree - 1),
        alpha=1.0 / degree,
        gamma=2.0 * scale ** (-1.0 / degree),
        c0=2.0**-d,
        r0=0.25,
        mu_min=1.0,
        mu_max=1.0,
        extras={"degree": degree, "scale": scale},
    )
    return _symmetric_two_arm(f"polynomial_boundary(deg={degree})", d, tau_fn, tau_deriv_fn, meta)


def make_constant_multi_arm(means: tuple, d: int = 1, beta: float = 2.0) -> Instance:
    """Multi-arm instance with context-independent means, arm ids 0..A-1."""
    means = tuple(float(m) for m in means)
    if len(means) < 2:
        raise ValueError("need at least two arms")
    if min(means) < 0 or max(means) > 1:
        raise ValueError("means must lie in [0, 1]")
    arms = tuple(range(len(means)))
    table = dict(zip(arms, means))

    def mean(points, arm):
        return np.full(len(np.atleast_2d(points)), table[arm])

    def mean_deriv(points, arm, r):
        if sum(r) == 0:
            return mean(points, arm)
        return np.zeros(len(np.atleast_2d(points)))

    gaps = sorted({abs(a - b) for a in means for b in means if a != b})
    meta = InstanceMeta(
        beta=beta, L=0.0, L1=0.0, alpha=math.inf, gamma=1.0,
        c0=2.0**-d, r0=0.5, mu_min=1.0, mu_max=1.0,
        extras={"means": means, "gaps": gaps},
    )
    return Instance(
        name=f"constant_multi{means}",
        d=d,
        arms=arms,
        mean=mean,
        sample_contexts=_uniform_sampler(d),
        support=unit_cube_support,
        meta=meta,
        mean_deriv=mean_deriv,
    )


# ---------------------------------------------------------------------------
# Smooth bump profile


def _bump_core(t: np.ndarray) -> np.ndarray:
    """exp(-1 / ((1/2 - t)(t - 1/4))) on (1/4, 1/2), 0 elsewhere."""
    t = np.asarray(t, dtype=float)
    w = (0.5 - t) * (t - 0.25)
    out = np.zeros_like(w)
    inside = w > 0
    out[inside] = np.exp(-1.0 / w[inside])
    return out


def _bump_core_d1(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    w = (0.5 - t) * (t - 0.25)
    out = np.zeros_like(w)
    inside = w > 0
    wi = w[inside]
    out[inside] = np.exp(-1.0 / wi) * (0.75 - 2.0 * t[inside]) / wi**2
    return out


_NORMALIZER: float | None = None


def _bump_normalizer() -> float:
    global _NORMALIZER
    if _NORMALIZER is None:
        val, _ = integrate.quad(lambda s: float(_bump_core(s)), 0.25, 0.5, epsabs=0.0, epsrel=1e-12)
        _NORMALIZER = val
    return _NORMALIZER


def bump_u(t) -> np.ndarray | float:
    """Smooth non-increasing transition: 1 on [0, 1/4], 0 on [1/2, inf).

    Normalized tail integral of the compactly supported core profile; the
    normalizer is computed once by adaptive quadrature.
    """
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("argument must be nonnegative")
    z = _bump_normalizer()
    out = np.zeros(t.shape)
    out[t <= 0.25] = 1.0
    mid = (t > 0.25) & (t < 0.5)
    for i in np.nonzero(mid)[0]:
        val, _ = integrate.quad(lambda s: float(_bump_core(s)), t[i], 0.5, epsabs=0.0, epsrel=1e-12)
        out[i] = val / z
    return float(out[0]) if scalar else out


def bump_u_deriv(t, order: int) -> np.ndarray | float:
    """Derivatives of :func:`bump_u` up to second order (closed forms)."""
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if order == 0:
        out = np.atleast_1d(bump_u(t))
    elif order == 1:
        out = -_bump_core(t) / _bump_normalizer()
    elif order == 2:
        out = -_bump_core_d1(t) / _bump_normalizer()
    else:
        raise ValueError(f"bump derivatives implemented for order <= 2, got {order}")
    return float(out[0]) if scalar else out


_BUMP_SUPS: dict[int, float] = {}


def _bump_deriv_sup(order: int) -> float:
    """Grid bound on sup |u^(order)| with a factor-2 safety margin."""
    if order not in _BUMP_SUPS:
        grid = np.linspace(0.25, 0.5, 10_001)
        _BUMP_SUPS[order] = 2.0 * float(np.max(np.abs(bump_u_deriv(grid, order))))
    return _BUMP_SUPS[order]


def _radial_bump_deriv(points: np.ndarray, r: tuple) -> np.ndarray:
    """D^r of u(||x||) for |r| <= 2; identically 0 inside radius 1/4."""
    points = np.atleast_2d(points)
    rho = np.linalg.norm(points, axis=1)
    order = sum(r)
    if order == 0:
        return np.atleast_1d(bump_u(rho))
    active = (rho > 0.25) & (rho < 0.5)
    out = np.zeros(len(points))
    if not np.any(active):
        return out
    p = points[active]
    rh = rho[active]
    u1 = bump_u_deriv(rh, 1)
    if order == 1:
        i = r.index(1)
        out[active] = u1 * p[:, i] / rh
        return out
    if order == 2:
        u2 = bump_u_deriv(rh, 2)
        axes = [k for k, rk in enumerate(r) for _ in range(rk)]
        i, j = axes[0], axes[1]
        delta = 1.0 if i == j else 0.0
        out[active] = u2 * p[:, i] * p[:, j] / rh**2 + u1 * (delta - p[:, i] * p[:, j] / rh**2) / rh
        return out
    raise ValueError(f"radial bump derivatives implemented for |r| <= 2, got {r}")


def certified_bump_scale(beta: float, L: float, d: int) -> float:
    """Largest profile height keeping the bump inside the Hoelder budget.

    Bounds the (beta - l)-Hoelder seminorm of the order-l derivatives of
    the radial bump (l the largest integer strictly below beta) using grid
    suprema of the profile derivatives, then inverts the budget
    L / sum_{|r|=l} 1/r!.  Supports l in {0, 1}; pass an explicit height
    for smoother constructions.
    """
    l = math.ceil(beta) - 1
    if l == 0:
        c_beta = 1.0
        seminorm = max(_bump_deriv_sup(1), 1.0)
    elif l == 1:
        c_beta = float(d)
        # gradient entries of d_i u(||x||) bounded via |u''| + 2|u'|/rho, rho >= 1/4
        grad_bound = math.sqrt(d) * (_bump_deriv_sup(2) + 8.0 * _bump_deriv_sup(1))
        seminorm = max(grad_bound, 2.0 * _bump_deriv_sup(1))
    else:
        raise NotImplementedError(
            "certified bump height supports beta <= 2; pass C_phi explicitly for smoother instances"
        )
    return L / (c_beta * seminorm)


# ---------------------------------------------------------------------------
# Hard-instance family: smooth bumps on a shrinking grid


@dataclass(frozen=True)
class LowerBoundInstance(Instance):
    """Bump-grid instance whose margin law is a single step.

    Arm -1 has constant mean 1/2; arm +1 adds a signed smooth bump of
    height ``c_phi * q**-beta`` centered in each of ``m`` grid cells of
    side 1/q.  Contexts concentrate on the bump balls (mass ``omega``
    each) and spread uniformly over the cell complement.
    """

    sigma: np.ndarray = None
    q: int = 0
    m: int = 0
    omega: float = 0.0
    delta0: float = 0.0
    kappa_sq: float = 0.0
    c_phi: float = 0.0
    bump_centers: np.ndarray = None
    ball_radius: float = 0.0


def make_lower_bound_instance(
    T: int,
    beta: float,
    alpha: float,
    d: int,
    delta0: float = 0.25,
    C_phi: float | None = None,
    sigma: np.ndarray | None = None,
    seed: int | None = None,
    L: float = 1.0,
    noise: str = "bernoulli",
) -> LowerBoundInstance:
    """Construct the hard instance for a horizon and smoothness level.

    The cell count per axis grows like ``(T / (4 e kappa^2))**(1/(2 beta + d))``
    with ``kappa^2 = 1/4 - delta0^2``; the number of signed bumps is
    ``ceil(q**(d - alpha beta))``.  Requires ``alpha * beta <= d`` and a
    horizon large enough for the bump count to fit the grid.
    """
    if not 0 < delta0 < 0.5:
        raise ValueError(f"delta0 must lie in (0, 1/2), got {delta0}")
    if beta < 1:
        raise ValueError(f"smoothness must be >= 1, got {beta}")
    if alpha < 0:
        raise ValueError(f"margin exponent must be >= 0, got {alpha}")
    if alpha * beta > d:
        raise ValueError(f"requires alpha * beta <= d, got alpha*beta={alpha * beta} > d={d}")
    kappa_sq = 0.25 - delta0**2
    q = math.ceil((T / (4 * math.e * kappa_sq)) ** (1.0 / (2 * beta + d)))
    m = math.ceil(q ** (d - alpha * beta))
    omega = float(q) ** -d
    if m > q**d:
        raise ValueError(f"horizon too small: bump count m={m} exceeds cell count q^d={q ** d}")
    if omega > 1.0 / m:
        raise ValueError(f"horizon too small: per-ball mass omega={omega} exceeds 1/m={1 / m}")
    if T <= 4 * kappa_sq * q ** (2 * beta + d):
        raise ValueError(
            f"horizon too small: requires T > 4 kappa^2 q^(2 beta + d) = {4 * kappa_sq * q ** (2 * beta + d):.3g}"
        )

    if C_phi is None:
        C_phi = min(delta0, certified_bump_scale(beta, L, d))
    if not 0 < C_phi <= delta0:
        raise ValueError(f"bump height must lie in (0, delta0], got {C_phi}")

    if sigma is None:
        sign_rng = np.random.default_rng(seed)
        sigma = sign_rng.choice([-1, 1], size=m)
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (m,) or not np.all(np.abs(sigma) == 1):
        raise ValueError(f"sigma must be a vector of {m} signs")

    # first m cells of the 1/q grid in lexicographic order
    flat = np.arange(m, dtype=np.int64)
    centers = np.empty((m, d))
    rem = flat.copy()
    for axis in range(d - 1, -1, -1):
        centers[:, axis] = (rem % q + 0.5) / q
        rem //= q
    ball_radius = 1.0 / (4 * q)

    bump_flags = np.zeros(q**d, dtype=bool)
    bump_flags[:m] = True
    sigma_by_cell = np.zeros(q**d, dtype=np.int64)
    sigma_by_cell[:m] = sigma

    def cell_index(points: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(points) * q
        j = np.floor(u).astype(np.int64)
        j -= (u == j) & (j > 0)
        j = np.clip(j, 0, q - 1)
        flat = np.zeros(len(j), dtype=np.int64)
        for axis in range(d):
            flat = flat * q + j[:, axis]
        return flat

    def nearest_center(points: np.ndarray, cells: np.ndarray) -> np.ndarray:
        ctr = np.empty((len(cells), d))
        rem = cells.copy()
        for axis in range(d - 1, -1, -1):
            ctr[:, axis] = (rem % q + 0.5) / q
            rem //= q
        return ctr

    def mean(points, arm):
        points = np.atleast_2d(points)
        if arm == -1:
            return np.full(len(points), 0.5)
        cells = cell_index(points)
        inside = bump_flags[cells] & unit_cube_support(points)
        out = np.full(len(points), 0.5)
        if np.any(inside):
            p = points[inside]
            ctr = nearest_center(p, cells[inside])
            u_val = bump_u(q * np.linalg.norm(p - ctr, axis=1))
            out[inside] += sigma_by_cell[cells[inside]] * C_phi * float(q) ** -beta * u_val
        return out

    def mean_deriv(points, arm, r):
        points = np.atleast_2d(points)
        if sum(r) == 0:
            return mean(points, arm)
        out = np.zeros(len(points))
        if arm == -1:
            return out
        cells = cell_index(points)
        inside = bump_flags[cells] & unit_cube_support(points)
        if np.any(inside):
            p = points[inside]
            ctr = nearest_center(p, cells[inside])
            vals = _radial_bump_deriv(q * (p - ctr), tuple(r))
            out[inside] = sigma_by_cell[cells[inside]] * C_phi * float(q) ** (sum(r) - beta) * vals
        return out

    def support(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        ok = unit_cube_support(points)
        cells = cell_index(points)
        in_bump_cell = bump_flags[cells]
        out = ok & ~in_bump_cell
        check = ok & in_bump_cell
        if np.any(check):
            p = points[check]
            ctr = nearest_center(p, cells[check])
            out[check] = np.linalg.norm(p - ctr, axis=1) <= ball_radius
        return out

    def sample_contexts(rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random(n)
        out = np.empty((n, d))
        in_ball = u < m * omega
        n_ball = int(in_ball.sum())
        if n_ball:
            which = np.minimum((u[in_ball] / omega).astype(np.int64), m - 1)
            out[in_ball] = centers[which] + ball_radius * _uniform_in_ball(rng, n_ball, d)
        n_rest = n - n_ball
        if n_rest:
            out[~in_ball] = _uniform_outside_cells(rng, n_rest, d, q, bump_flags, cell_index)
        return out

    height = C_phi * float(q) ** -beta
    meta = InstanceMeta(
        beta=beta,
        L=L,
        L1=C_phi * _bump_deriv_sup(1),
        alpha=alpha,
        gamma=2.0 * C_phi**-alpha,
        c0=2.0**-d,  # derived, not asserted by the construction
        r0=min(ball_radius, 0.25),
        mu_min=1.0,
        mu_max=4.0**d / unit_ball_volume(d),
        extras={"q": q, "m": m, "omega": omega, "bump_height": height, "derived_regularity": True},
    )
    return LowerBoundInstance(
        name=f"lower_bound(T={T},beta={beta},alpha={alpha},d={d})",
        d=d,
        arms=TWO_ARMS,
        mean=mean,
        sample_contexts=sample_contexts,
        support=support,
        meta=meta,
        noise=noise,
        mean_deriv=mean_deriv,
        sigma=sigma,
        q=q,
        m=m,
        omega=omega,
        delta0=delta0,
        kappa_sq=kappa_sq,
        c_phi=C_phi,
        bump_centers=centers,
        ball_radius=ball_radius,
    )


def _uniform_in_ball(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Uniform draws from the unit ball by rejection from the cube."""
    out = np.empty((n, d))
    need = np.arange(n)
    while len(need):
        cand = rng.random((len(need), d)) * 2.0 - 1.0
        ok = np.einsum("ij,ij->i", cand, cand) <= 1.0
        out[need[ok]] = cand[ok]
        need = need[~ok]
    return out


def _uniform_outside_cells(rng, n, d, q, bump_flags, cell_index) -> np.ndarray:
    """Uniform draws from the unit cube minus the flagged 1/q cells."""
    out = np.empty((n, d))
    need = np.arange(n)
    while len(need):
        cand = rng.random((len(need), d))
        ok = ~bump_flags[cell_index(cand)]
        out[need[ok]] = cand[ok]
        need = need[~ok]
    return out


# ---------------------------------------------------------------------------
# Assumption validators


@dataclass(frozen=True)
class CheckRow:
    label: str
    value: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    name: str
    rows: tuple[CheckRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"]
        for r in self.rows:
            mark = "ok " if r.passed else "BAD"
            lines.append(f"  {mark} {r.label}: value={r.value:.6g} bound={r.bound:.6g}")
        return "\n".join(lines)


def verify_margin(
    instance: Instance,
    alpha: float,
    gamma: float,
    t_grid,
    n_samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> ValidationReport:
    """Monte-Carlo check of P(0 < |tau(X)| <= t) <= gamma * t^alpha.

    Pass requires the estimate minus a 99% half-width to sit below the
    bound at every grid point.
    """
    if n_samples < 10_000:
        raise ValueError("need at least 1e4 samples for a meaningful margin check")
    rng = rng or np.random.default_rng(0)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0):
        raise ValueError("t grid must be positive")
    X = instance.sample_contexts(rng, n_samples)
    abs_tau = np.abs(cate(instance, X))
    rows = []
    z99 = 2.5758293035489004
    for t in t_grid:
        p_hat = float(np.mean((abs_tau > 0) & (abs_tau <= t)))
        half = z99 * math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_samples)
        bound = gamma * t**alpha
        rows.append(CheckRow(f"t={t:.4g}", p_hat, bound + half, p_hat - half <= bound))
    return ValidationReport(f"margin(alpha={alpha}, gamma={gamma}) on {instance.name}", tuple(rows))


def margin_probability(instance: Instance, t: float, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Point estimate and standard error of P(0 < |tau(X)| <= t)."""
    X = instance.sample_contexts(rng, n_samples)
    abs_tau = np.abs(cate(instance, X))
    p_hat = float(np.mean((abs_tau > 0) & (abs_tau <= t)))
    se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / n_samples)
    return p_hat, se


def verify_holder(
    instance: Instance,
    beta: float,
    L: float,
    n_pairs: int = 10_000,
    rng: np.random.Generator | None = None,
    arms=None,
) -> ValidationReport:
    """Taylor-remainder check of the smoothness class membership.

    Samples point pairs (half global, half local perturbations), expands
    each arm's mean to the largest order strictly below ``beta`` using the
    instance's analytic derivatives, and compares the remainder with
    ``L * distance**beta``.  Requires derivative access.
    """
    if instance.mean_deriv is None:
        raise ValueError(f"instance {instance.name} does not expose analytic derivatives")
    rng = rng or np.random.default_rng(0)
    l = math.ceil(beta) - 1
    indices = _taylor_indices(instance.d, l)
    half = n_pairs // 2
    x = rng.random((n_pairs, instance.d))
    x2 = np.empty_like(x)
    x2[:half] = rng.random((half, instance.d))
    radii = np.exp(rng.uniform(math.log(1e-3), math.log(0.3), size=n_pairs - half))
    direction = rng.standard_normal((n_pairs - half, instance.d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    x2[half:] = np.clip(x[half:] + radii[:, None] * direction, 0.0, 1.0)
    dist = np.linalg.norm(x2 - x, axis=1)
    keep = dist > 1e-12
    x, x2, dist = x[keep], x2[keep], dist[keep]

    rows = []
    arms = arms if arms is not None else instance.arms
    for arm in arms:
        taylor = np.zeros(len(x))
        for r in indices:
            coef = np.prod([math.factorial(ri) for ri in r])
            diff_pow = np.prod((x2 - x) ** np.asarray(r, dtype=float), axis=1)
            taylor += diff_pow / coef * instance.mean_deriv(x, arm, r)
        remainder = np.abs(instance.mean(x2, arm) - taylor)
        ratio = remainder / dist**beta
        worst = float(np.max(ratio, initial=0.0))
        # additive slack absorbs cancellation noise on exactly-polynomial means
        rows.append(CheckRow(f"arm {arm} max remainder ratio", worst, L, worst <= L * (1 + 1e-9) + 1e-7))
    return ValidationReport(f"holder(beta={beta}, L={L}) on {instance.name}", tuple(rows))


def _taylor_indices(d: int, l: int) -> list[tuple[int, ...]]:
    if l == 0:
        return [tuple([0] * d)]
    out = []

    def rec(prefix, remaining_axes, budget):
        if remaining_axes == 1:
            for k in range(budget + 1):
                out.append((*prefix, k))
            return
        for k in range(budget + 1):
            rec((*prefix, k), remaining_axes - 1, budget - k)

    rec((), d, l)
    return [r for r in out if sum(r) <= l]


def verify_density(
    instance: LowerBoundInstance,
    n_samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
) -> ValidationReport:
    """Sampler-vs-declared-density agreement for the bump-grid instance.

    Empirical mass of each bump ball must sit within 3 standard errors of
    its nominal mass, and the complement mass within 3 SE of its share.
    """
    rng = rng or np.random.default_rng(0)
    X = instance.sample_contexts(rng, n_samples)
    rows = []
    total_ball = 0
    for j, ctr in enumerate(instance.bump_centers):
        in_ball = np.linalg.norm(X - ctr[None, :], axis=1) <= instance.ball_radius
        count = int(in_ball.sum())
        total_ball += count
        p_hat = count / n_samples
        se = math.sqrt(instance.omega * (1 - instance.omega) / n_samples)
        rows.append(
            CheckRow(f"ball {j} mass vs omega", p_hat, instance.omega + 3 * se,
                     abs(p_hat - instance.omega) <= 3 * se)
        )
    rest = 1.0 - instance.m * instance.omega
    p_rest = 1.0 - total_ball / n_samples
    se = math.sqrt(max(rest * (1 - rest), 1e-12) / n_samples)
    rows.append(CheckRow("complement mass", p_rest, rest + 3 * se, abs(p_rest - rest) <= 3 * se))
    return ValidationReport(f"density on {instance.name}", tuple(rows))


def verify_regularity(
    instance: Instance,
    n_points: int = 50,
    resolution: int = 32,
    rng: np.random.Generator | None = None,
) -> ValidationReport:
    """Spot check the declared decision-region regularity.

    Samples support points, and at each point lying in an arm's optimal
    region tests the ball fraction at radii r0, r0/2, r0/4 against the
    declared c0.
    """
    rng = rng or np.random.default_rng(0)
    X = instance.sample_contexts(rng, min(n_points * 20, 5000))
    means = instance.means_matrix(X)
    best = means.max(axis=0)
    rows = []
    for ai, arm in enumerate(instance.arms):
        in_region = means[ai] >= best - 1e-12
        pts = X[in_region][:n_points]
        if len(pts) == 0:
            rows.append(CheckRow(f"arm {arm} region empty", 0.0, instance.meta.c0, False))
            continue

        def region(points, ai=ai):
            m = instance.means_matrix(points)
            return (m[ai] >= m.max(axis=0) - 1e-12) & np.asarray(instance.support(points), dtype=bool)

        worst = math.inf
        for x in pts:
            for r in (instance.meta.r0, instance.meta.r0 / 2, instance.meta.r0 / 4):
                worst = min(worst, ball_region_fraction(x, r, region, resolution))
        rows.append(CheckRow(f"arm {arm} worst ball fraction", worst, instance.meta.c0,
                             worst >= instance.meta.c0 * (1 - 1e-9)))
    return ValidationReport(f"regularity(c0={instance.meta.c0}, r0={instance.meta.r0}) on {instance.name}", tuple(rows))

"""Experiment orchestration: replicated runs, rate fits, and file output.

Runs a grid of (policy, horizon, repetition) simulations with seeds
derived stably from a base seed, accumulates regret and inferior-sampling
trajectories, fits the growth exponent of the mean final regret against
the horizon, and emits CSV rows plus a JSON summary.  Identical configs
produce byte-identical outputs regardless of the worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import json
import logging
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import baselines
from .environments import (
    Instance,
    make_constant_multi_arm,
    make_lower_bound_instance,
    make_smooth_instance,
)
from .policy import PolicyConfig, run_multi_arm, run_two_arm
from .results import RunResult

log = logging.getLogger(__name__)

CSV_HEADER = "policy,instance,T,rep,seed,checkpoint_t,cum_regret,inferior_count"


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, fieldpath: str, message: str):
        super().__init__(f"{fieldpath}: {message}")
        self.fieldpath = fieldpath


# ---------------------------------------------------------------------------
# Rate fitting


def theoretical_exponent(beta: float, alpha: float, d: int) -> float:
    """Growth exponent of the minimax regret in the horizon.

    ``max(beta + d - alpha*beta, 0) / (2*beta + d)``; zero means
    polylogarithmic regret.
    """
    if beta < 1:
        raise ValueError(f"smoothness must be >= 1, got {beta}")
    if alpha < 0:
        raise ValueError(f"margin exponent must be >= 0, got {alpha}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return max(beta + d - alpha * beta, 0.0) / (2 * beta + d)


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log mean-final-regret against log horizon."""

    horizons: tuple[int, ...]
    mean_regrets: tuple[float, ...]
    slope: float
    intercept: float
    r_squared: float
    excluded: tuple[int, ...] = ()


def fit_rate(regrets_by_horizon: dict, min_reps: int = 10) -> RateFit:
    """Fit the regret growth exponent over horizons.

    ``regrets_by_horizon`` maps each horizon to the final regrets of its
    repetitions (at least ``min_reps`` per horizon, at least 4 usable
    horizons).  Horizons whose mean regret is not positive are excluded
    and flagged.
    """
    horizons = sorted(regrets_by_horizon)
    usable, means, excluded = [], [], []
    for T in horizons:
        reps = np.asarray(regrets_by_horizon[T], dtype=float)
        if len(reps) < min_reps:
            raise ValueError(f"horizon {T} has {len(reps)} repetitions, need >= {min_reps}")
        m = float(reps.mean())
        if m <= 0:
            excluded.append(T)
            log.warning("horizon %d excluded from the rate fit: mean regret %.3g <= 0", T, m)
            continue
        usable.append(T)
        means.append(m)
    if len(usable) < 4:
        raise ValueError(f"need >= 4 horizons with positive mean regret, have {len(usable)}")
    x = np.log(np.asarray(usable, dtype=float))
    y = np.log(np.asarray(means))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(
        horizons=tuple(usable),
        mean_regrets=tuple(means),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        excluded=tuple(excluded),
    )


# ---------------------------------------------------------------------------
# Seeds


def derive_seed(base_seed: int, policy: str, horizon: int, rep: int) -> int:
    """Stable 63-bit run seed: base_seed XOR sha256(policy|T|rep)."""
    digest = hashlib.sha256(f"{policy}|{horizon}|{rep}".encode()).digest()
    return (int(base_seed) ^ int.from_bytes(digest[:8], "little")) & ((1 << 63) - 1)


# ---------------------------------------------------------------------------
# Instance and policy construction from config dictionaries


def build_instance(block: dict) -> Instance:
    if not isinstance(block, dict):
        raise ConfigError("instance", "must be a mapping")
    family = block.get("family")
    if not isinstance(family, str):
        raise ConfigError("instance.family", "missing or not a string")
    params = dict(block.get("params", {}))
    try:
        if family == "lower_bound":
            return make_lower_bound_instance(**params)
        if family == "constant_multi":
            return make_constant_multi_arm(**params)
        return make_smooth_instance(family, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"instance.params ({family})", str(exc)) from exc


_POLICY_NAMES = ("smooth", "smooth_multi", "binned_ucb", "uniform", "oracle")

_BASELINE_PARAMS = {
    "binned_ucb": {"exploration", "bin_rate", "block"},
    "uniform": set(),
    "oracle": set(),
}
_HARNESS_OWNED = {"d", "horizon", "arm_count"}


def validate_policy_params(index: int, name: str, params: dict) -> None:
    """Reject malformed policy parameter blocks with a field-level error."""
    fieldpath = f"policies[{index}].params"
    if name in ("smooth", "smooth_multi"):
        owned = _HARNESS_OWNED & params.keys()
        if owned:
            raise ConfigError(fieldpath, f"{sorted(owned)} are set by the harness, not the config")
        try:
            PolicyConfig(d=1, horizon=1000, arm_count=2, **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(fieldpath, str(exc)) from exc
    else:
        unknown = params.keys() - _BASELINE_PARAMS[name]
        if unknown:
            raise ConfigError(fieldpath, f"unknown parameters {sorted(unknown)} for {name!r}")


def run_policy(
    name: str, params: dict, env: Instance, horizon: int, seed: int, checkpoints
) -> RunResult:
    """Dispatch one run; ``params`` feeds the policy's own configuration."""
    if name == "smooth":
        config = PolicyConfig(d=env.d, horizon=horizon, arm_count=2, **params)
        return run_two_arm(env, config, seed, checkpoints)
    if name == "smooth_multi":
        config = PolicyConfig(d=env.d, horizon=horizon, arm_count=env.n_arms, **params)
        return run_multi_arm(env, config, seed, checkpoints)
    if name == "binned_ucb":
        return baselines.run_binned_ucb(env, horizon, seed, checkpoints, **params)
    if name == "uniform":
        return baselines.run_uniform(env, horizon, seed, checkpoints, **params)
    if name == "oracle":
        return baselines.run_oracle(env, horizon, seed, checkpoints, **params)
    raise ConfigError("policies", f"unknown policy {name!r}, expected one of {_POLICY_NAMES}")


# ---------------------------------------------------------------------------
# Experiment driver


def validate_experiment_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    out = dict(cfg)
    if "instance" not in cfg:
        raise ConfigError("instance", "missing")
    policies = cfg.get("policies")
    if not isinstance(policies, list) or not policies:
        raise ConfigError("policies", "must be a non-empty list")
    labels = []
    for i, p in enumerate(policies):
        if not isinstance(p, dict) or "name" not in p:
            raise ConfigError(f"policies[{i}]", "must be a mapping with a 'name'")
        if p["name"] not in _POLICY_NAMES:
            raise ConfigError(f"policies[{i}].name", f"unknown policy {p['name']!r}")
        validate_policy_params(i, p["name"], dict(p.get("params", {})))
        labels.append(p.get("label", p["name"]))
    if len(set(labels)) != len(labels):
        raise ConfigError("policies", f"labels must be unique, got {labels}; set 'label' to disambiguate")
    horizons = cfg.get("horizons")
    if not isinstance(horizons, list) or not horizons or not all(
        isinstance(T, int) and T >= 3 for T in horizons
    ):
        raise ConfigError("horizons", "must be a non-empty list of integers >= 3")
    reps = cfg.get("reps", 1)
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError("reps", "must be a positive integer")
    base_seed = cfg.get("base_seed", 0)
    if not isinstance(base_seed, int):
        raise ConfigError("base_seed", "must be an integer")
    checkpoints = cfg.get("checkpoints", 8)
    if not (isinstance(checkpoints, int) or isinstance(checkpoints, list)):
        raise ConfigError("checkpoints", "must be an integer count or a list of times")
    out.setdefault("reps", reps)
    out.setdefault("base_seed", base_seed)
    out.setdefault("checkpoints", checkpoints)
    return out


def run_experiment(cfg: dict, threads: int = 1, quiet: bool = False):
    """Execute the full grid and return (rows, summary).

    ``rows`` is the list of CSV tuples (one per checkpoint per run) in
    deterministic order; ``summary`` is a JSON-ready dict with per-group
    means and standard errors plus rate-fit inputs.
    """
    cfg = validate_experiment_config(cfg)
    env = build_instance(cfg["instance"])
    jobs = []
    for pol in cfg["policies"]:
        name = pol["name"]
        params = dict(pol.get("params", {}))
        label = pol.get("label", name)
        for T in cfg["horizons"]:
            for rep in range(cfg["reps"]):
                seed = derive_seed(cfg["base_seed"], label, T, rep)
                jobs.append((label, name, params, T, rep, seed))

    started = time.perf_counter()
    results: dict[tuple, RunResult] = {}

    def _one(job):
        label, name, params, T, rep, seed = job
        try:
            run = run_policy(name, params, env, T, seed, cfg["checkpoints"])
        except Exception as exc:
            raise RuntimeError(f"run failed at policy={label} T={T} rep={rep} seed={seed}: {exc}") from exc
        return (label, T, rep), run

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for key, run in pool.map(_one, jobs):
                results[key] = run
    else:
        for job in jobs:
            key, run = _one(job)
            results[key] = run
    if not quiet:
        log.info("executed %d runs in %.1fs", len(jobs), time.perf_counter() - started)

    rows = []
    for label, name, params, T, rep, seed in jobs:
        run = results[(label, T, rep)]
        for t, reg, inf in zip(run.checkpoint_times, run.cum_regret, run.cum_inferior):
            rows.append((label, env.name, T, rep, seed, int(t), float(reg), int(inf)))

    groups: dict[tuple, list[RunResult]] = {}
    for (label, T, rep), run in results.items():
        groups.setdefault((label, T), []).append(run)
    summary_groups = []
    for (label, T) in sorted(groups, key=lambda k: (k[0], k[1])):
        finals = np.asarray([r.final_regret for r in groups[(label, T)]], dtype=float)
        inferior = np.asarray([r.inferior_count for r in groups[(label, T)]], dtype=float)
        n = len(finals)
        summary_groups.append(
            {
                "policy": label,
                "T": T,
                "reps": n,
                "mean_final_regret": float(finals.mean()),
                "se_final_regret": float(finals.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                "mean_inferior": float(inferior.mean()),
                "se_inferior": float(inferior.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            }
        )
    summary = {
        "instance": {
            "name": env.name,
            "d": env.d,
            "arms": list(env.arms),
            "beta": env.meta.beta,
            "alpha": env.meta.alpha,
        },
        "config": {k: cfg[k] for k in ("horizons", "reps", "base_seed", "checkpoints")},
        "policies": [p.get("label", p["name"]) for p in cfg["policies"]],
        "groups": summary_groups,
    }
    return rows, summary, results


def write_csv(rows, path: str) -> None:
    # instance names may contain commas; let the csv module quote them
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for label, instance, T, rep, seed, t, reg, inf in rows:
            writer.writerow([label, instance, T, rep, seed, t, repr(reg), inf])


def write_summary(summary: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_state_reports(results: dict, out_dir: str) -> list[str]:
    """Write the rep-0 state report of each (policy, horizon) group."""
    paths = []
    for (label, T, rep), run in sorted(results.items()):
        if rep != 0 or not run.epochs:
            continue
        path = os.path.join(out_dir, f"state_{label}_T{T}.json")
        with open(path, "w") as fh:
            json.dump(run.to_report(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(path)
    return paths


def summary_rate_check(summary: dict, policy: str, band: tuple[float, float] | None = None):
    """Rate fit for one policy from a summary dict, with a pass/fail band.

    The default band is the theoretical exponent -0.15 / +0.25, a wide
    allowance for polylogarithmic factors at small horizons.
    """
    groups = [g for g in summary["groups"] if g["policy"] == policy]
    if not groups:
        raise ValueError(f"policy {policy!r} not present in the summary")
    for g in groups:
        if g["reps"] < 10:
            raise ValueError(f"horizon {g['T']} has {g['reps']} repetitions, need >= 10")
    regrets = {g["T"]: [g["mean_final_regret"]] for g in groups}
    fit = fit_rate(regrets, min_reps=1)
    inst = summary["instance"]
    alpha = inst["alpha"]
    exponent = theoretical_exponent(inst["beta"], min(alpha, 1e6), inst["d"])
    if band is None:
        band = (exponent - 0.15, exponent + 0.25)
    passed = band[0] <= fit.slope <= band[1]
    return fit, exponent, band, passed

"""Instance generators and the experiment drivers behind the CLI."""

import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from chowliupp.chow_liu import chow_liu_model
from chowliupp.learner import RobustnessWarning, hoeffding_eps, learn_from_samples, learn_model
from chowliupp.model import (
    TreeIsingModel,
    loctv2,
    loctv_k_exact,
    pairwise_correlations,
    perturb,
    random_model,
    sample,
)

KINDS = ("failure", "structure", "scaling", "latent")


@dataclass
class ExperimentConfig:
    """Parameters for one experiment run; unused fields are ignored by a given kind."""

    kind: str
    seed: int = 0
    trials: int = 1
    delta: float = 0.01
    n: int = 100
    m: int = 0
    alpha: float = 0.2
    beta: float = 0.2
    sample_constant: float = 1000.0
    eps: float = 0.0
    eps_grid: list = field(default_factory=lambda: [1e-3, 1e-4, 1e-5])
    theta_values: list = field(default_factory=lambda: [0.01, 0.5, 0.99])
    perturb_mode: str = "random_sign"
    exact_check_max_n: int = 12
    n_jobs: int = 1
    output_dir: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        positive = {
            "delta": self.delta,
            "n": self.n,
            "alpha": self.alpha,
            "beta": self.beta,
            "sample_constant": self.sample_constant,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.m < 0 or self.eps < 0:
            raise ValueError("m and eps must be nonnegative")
        if any(not e > 0 for e in self.eps_grid):
            raise ValueError("eps_grid values must be positive")
        if list(self.eps_grid) != sorted(self.eps_grid, reverse=True):
            raise ValueError("eps_grid must be descending")
        if not (0 < self.alpha < 1 and 0 < self.beta < 1 and self.alpha <= 1 - self.beta):
            raise ValueError("need 0 < alpha <= 1 - beta < 1")

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self):
        return asdict(self)


def trial_rng(seed, trial):
    """Independent stream for one trial, fixed by (seed, trial index)."""
    return np.random.default_rng([int(seed), int(trial)])


def _check_failure_delta(delta):
    if not 0 < delta <= 0.1:
        raise ValueError(f"delta must be in (0, 0.1], got {delta}")


def gen_cl_failure_correlations(delta, n):
    """Correlations of two coupled chains X_1..X_n, Y_1..Y_n (X block first).

    E[X_i X_j] = E[Y_i Y_j] = exp(-delta |i-j|), E[X_i Y_j] = exp(-delta |i-j| - 2 delta).
    """
    _check_failure_delta(delta)
    if n < 1:
        raise ValueError("n must be positive")
    i = np.arange(n)
    gap = np.abs(i[:, None] - i[None, :])
    same = np.exp(-delta * gap)
    cross = np.exp(-delta * gap - 2 * delta)
    return np.block([[same, cross], [cross, same]])


def gen_cl_failure_tree_model(delta, n):
    """The nearby tree model: path X_1, Y_1, X_2, Y_2, ... with X_i = Y_i."""
    _check_failure_delta(delta)
    edges = []
    for i in range(n):
        edges.append((i, n + i, 1.0))
        if i + 1 < n:
            edges.append((n + i, i + 1, math.exp(-delta)))
    return TreeIsingModel.from_edges(2 * n, edges)


def _cross_edge(tree, n):
    cross = [(u, v) for u, v in tree.edges if (u < n) != (v < n)]
    if len(cross) != 1:
        return None
    u, v = cross[0]
    return (u, v - n) if u < n else (v, u - n)


def chow_liu_failure_bound(delta, n, tree):
    """Lower bound on loctv2(Q, P) valid for every Q structured like `tree`.

    With a single cross edge (X_i, Y_j), the Q-path from X_e to Y_e runs
    through X_i and Y_j, so |E_Q[X_e Y_e]| <= |E_Q[X_e X_i]|. Matching both
    pairs to within 2 loctv2 forces loctv2 >= (exp(-2 delta) - exp(-delta |e-i|)) / 4,
    and likewise through Y_j. Returns 0 when the tree has several cross edges.
    """
    cross = _cross_edge(tree, n)
    if cross is None:
        return 0.0
    i, j = cross
    target = math.exp(-2 * delta)
    best = 0.0
    for end in (0, n - 1):
        reach = min(math.exp(-delta * abs(end - i)), math.exp(-delta * abs(end - j)))
        best = max(best, (target - reach) / 4)
    return best


def failure_certificate(q_mu, p_mu, n, tree):
    """max |E_Q - E_P| / 2 over the end pairs and the chain pairs reaching the cross edge.

    A direct lower bound on loctv2(Q, P) for this particular Q.
    """
    pairs = [(0, n), (n - 1, 2 * n - 1)]
    cross = _cross_edge(tree, n)
    if cross is not None:
        i, j = cross
        pairs += [(0, i), (n - 1, i), (n, n + j), (2 * n - 1, n + j)]
    return float(max(abs(q_mu[a, b] - p_mu[a, b]) for a, b in pairs) / 2)


def run_failure_experiment(cfg):
    """Chow-Liu vs Chow-Liu++ on the coupled-chain instance with population correlations."""
    delta, n = cfg.delta, cfg.n
    mu = gen_cl_failure_correlations(delta, n)
    start = time.perf_counter()
    cl = chow_liu_model(mu)
    cl_mu = pairwise_correlations(cl)
    cl_time = time.perf_counter() - start

    eps = cfg.eps if cfg.eps > 0 else 2 * delta
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RobustnessWarning)
        clpp = learn_model(mu, eps)
    clpp_time = time.perf_counter() - start

    bound = chow_liu_failure_bound(delta, n, cl.topology)
    tree_model = gen_cl_failure_tree_model(delta, n)
    return {
        "kind": "failure",
        "delta": delta,
        "n": n,
        "eps": eps,
        "chow_liu_loctv2": loctv2(cl_mu, mu),
        "chow_liu_certificate": failure_certificate(cl_mu, mu, n, cl.topology),
        "chow_liu_structural_bound": bound,
        "chow_liu_plus_plus_loctv2": loctv2(clpp, mu),
        "nearby_tree_loctv2": loctv2(tree_model, mu),
        "chow_liu_runtime_ms": cl_time * 1e3,
        "chow_liu_plus_plus_runtime_ms": clpp_time * 1e3,
    }


def gen_latent_counterexample(delta):
    """3 x 3 correlations over (X, Y_1, Y_2): E[Y_1 Y_2] = 1/4, E[X Y_i] = delta."""
    if not 0 < delta <= 0.125:
        raise ValueError(f"delta must be in (0, 1/8], got {delta}")
    return np.array([[1.0, delta, delta], [delta, 1.0, 0.25], [delta, 0.25, 1.0]])


def run_latent_experiment(cfg):
    delta = cfg.delta
    mu = gen_latent_counterexample(delta)
    independent = TreeIsingModel.from_edges(3, [(0, 1, 0.0), (1, 2, 0.25)])
    eps = cfg.eps if cfg.eps > 0 else delta
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RobustnessWarning)
        learned = learn_model(mu, eps)
    return {
        "kind": "latent",
        "delta": delta,
        "eps": eps,
        "independent_tree_loctv2": loctv2(independent, mu),
        "chow_liu_plus_plus_loctv2": loctv2(learned, mu),
        "model": model_edges(learned),
    }


def structure_sample_size(cfg, n):
    if cfg.m > 0:
        return int(cfg.m)
    return int(math.ceil(cfg.sample_constant * math.log(n) / (cfg.alpha * cfg.beta) ** 2))


def _structure_trial(cfg, trial):
    rng = trial_rng(cfg.seed, trial)
    n = cfg.n
    truth = random_model(n, rng, low=cfg.alpha, high=1 - cfg.beta)
    truth = TreeIsingModel(truth.topology, truth.theta * rng.choice([-1.0, 1.0], size=n - 1))
    m = structure_sample_size(cfg, n)
    eps = cfg.eps if cfg.eps > 0 else hoeffding_eps(m, n)
    x = sample(truth, m, rng)
    learned, _ = learn_from_samples(x, eps, k=3)
    correct = learned.topology.edge_set == truth.topology.edge_set
    out = {"trial": trial, "m": m, "eps": eps, "correct": bool(correct), "loctv3": None}
    if n <= cfg.exact_check_max_n:
        out["loctv3"] = loctv_k_exact(learned, truth, 3)
    return out


def run_structure_experiment(cfg):
    """Topology recovery rate from samples of random trees with edge strengths in [alpha, 1 - beta]."""
    rows = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_structure_trial)(cfg, t) for t in range(cfg.trials)
    )
    threshold = cfg.alpha * cfg.beta / 8
    checked = [r for r in rows if r["correct"] and r["loctv3"] is not None]
    return {
        "kind": "structure",
        "n": cfg.n,
        "m": rows[0]["m"],
        "eps": rows[0]["eps"],
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "trials": cfg.trials,
        "recovery_rate": sum(r["correct"] for r in rows) / len(rows),
        "loctv3_threshold": threshold,
        "loctv3_checked": len(checked),
        "loctv3_max": max((r["loctv3"] for r in checked), default=None),
        "loctv3_violations": sum(r["loctv3"] >= threshold for r in checked),
        "per_trial": rows,
    }


def _scaling_trial(cfg, trial):
    rng = trial_rng(cfg.seed, trial)
    truth = random_model(cfg.n, rng, values=cfg.theta_values, random_signs=True)
    mu = pairwise_correlations(truth)
    perturb_seed = int(rng.integers(2**63))
    errors = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RobustnessWarning)
        for eps in cfg.eps_grid:
            noisy = perturb(mu, eps, seed=perturb_seed, mode=cfg.perturb_mode)
            learned = learn_model(noisy, eps)
            errors.append(float(np.abs(pairwise_correlations(learned) - mu).max()))
    return errors


def run_scaling_experiment(cfg):
    """Max pairwise correlation error over eps for a fixed family of random trees.

    Each trial keeps its tree and perturbation signs across the grid, so the
    per-trial error curves are comparable.
    """
    per_trial = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_scaling_trial)(cfg, t) for t in range(cfg.trials)
    )
    errors = np.array(per_trial)
    grid = list(cfg.eps_grid)
    rows = [
        {"eps": eps, "max_error": float(errors[:, j].max()), "observed_C": float(errors[:, j].max() / eps)}
        for j, eps in enumerate(grid)
    ]
    monotone = bool(np.all(np.diff(errors, axis=1) <= 1e-12))
    return {
        "kind": "scaling",
        "n": cfg.n,
        "trials": cfg.trials,
        "rows": rows,
        "observed_C_max": max(r["observed_C"] for r in rows),
        "monotone_in_eps": monotone,
        "per_trial_errors": errors.tolist(),
    }


RUNNERS = {
    "failure": run_failure_experiment,
    "structure": run_structure_experiment,
    "scaling": run_scaling_experiment,
    "latent": run_latent_experiment,
}


def run_experiment(cfg):
    return RUNNERS[cfg.kind](cfg)


def model_edges(model):
    return [[u, v, float(t)] for (u, v), t in zip(model.edges, model.theta)]

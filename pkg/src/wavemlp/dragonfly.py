"""Dragonfly swarm optimizer for bounded continuous minimization.

Individuals move under five weighted behaviors (separation, alignment,
cohesion, attraction to the best-so-far "food" position, repulsion from the
worst current "enemy" position) plus momentum. An individual with no
neighbors inside the ever-growing perception radius takes a Levy flight
instead. Also hosts the classifier hyperparameter objective the pipeline
tunes with this optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import neuralnet
from .neuralnet import TrainConfig, TrainingDivergedError

LEVY_BETA = 1.5

# Hyperparameter search box: learning rate, hidden width.
TUNING_LR_BOUNDS = (0.0001, 0.1)
TUNING_HIDDEN_BOUNDS = (10.0, 200.0)


class ObjectiveError(RuntimeError):
    """Raised when the objective keeps returning NaN for a valid position."""


@dataclass
class DaConfig:
    dim: int
    lb: np.ndarray
    ub: np.ndarray
    pop: int
    max_iter: int
    seed: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.pop < 1:
            raise ValueError(f"pop must be >= 1, got {self.pop}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        self.lb = np.broadcast_to(
            np.asarray(self.lb, dtype=np.float64), (self.dim,)
        ).copy()
        self.ub = np.broadcast_to(
            np.asarray(self.ub, dtype=np.float64), (self.dim,)
        ).copy()
        if not np.all(self.lb < self.ub):
            raise ValueError("every lower bound must be strictly below its upper bound")

    @classmethod
    def rastrigin_benchmark(
        cls, seed: int = 1, dim: int = 10, pop: int = 30, max_iter: int = 100
    ) -> "DaConfig":
        return cls(dim=dim, lb=-5.12, ub=5.12, pop=pop, max_iter=max_iter, seed=seed)

    @classmethod
    def tuning_default(
        cls, seed: int = 1, pop: int = 10, max_iter: int = 2
    ) -> "DaConfig":
        lb = [TUNING_LR_BOUNDS[0], TUNING_HIDDEN_BOUNDS[0]]
        ub = [TUNING_LR_BOUNDS[1], TUNING_HIDDEN_BOUNDS[1]]
        return cls(dim=2, lb=lb, ub=ub, pop=pop, max_iter=max_iter, seed=seed)


@dataclass
class DaWeights:
    """Behavior weights for one step: s, a, c, f, e plus momentum w."""

    s: float
    a: float
    c: float
    f: float
    e: float
    w: float

    def __post_init__(self) -> None:
        for name in ("s", "a", "c", "f", "e", "w"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be >= 0")


@dataclass
class DaState:
    positions: np.ndarray
    steps: np.ndarray
    fitness: np.ndarray
    food_position: np.ndarray
    food_fitness: float
    enemy_position: np.ndarray
    enemy_fitness: float
    iteration: int
    rng: np.random.Generator


class DaResult(NamedTuple):
    position: np.ndarray
    fitness: float
    trace: np.ndarray


class BehaviorTerms(NamedTuple):
    """Raw (unweighted) behavior vectors for one individual."""

    separation: np.ndarray
    alignment: np.ndarray
    cohesion: np.ndarray
    food: np.ndarray
    enemy: np.ndarray


def rastrigin(x: Sequence[float] | np.ndarray) -> float:
    """Classic multimodal benchmark; global minimum 0 at the origin."""
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def levy_step(rng: np.random.Generator, dim: int, beta: float = LEVY_BETA) -> np.ndarray:
    """Heavy-tailed step lengths via Mantegna's algorithm."""
    num = math.gamma(1.0 + beta) * math.sin(math.pi * beta / 2.0)
    den = math.gamma((1.0 + beta) / 2.0) * beta * 2.0 ** ((beta - 1.0) / 2.0)
    sigma = (num / den) ** (1.0 / beta)
    u = rng.standard_normal(dim) * sigma
    v = rng.standard_normal(dim)
    # Floor |v| so a near-zero draw cannot blow the step up to inf/NaN.
    return u / np.maximum(np.abs(v), 1e-12) ** (1.0 / beta)


def initialize_swarm(cfg: DaConfig) -> DaState:
    """Uniform positions in the box, zero steps, placeholder best/worst."""
    rng = np.random.default_rng(cfg.seed % (2**63))
    positions = rng.uniform(cfg.lb, cfg.ub, size=(cfg.pop, cfg.dim))
    return DaState(
        positions=positions,
        steps=np.zeros((cfg.pop, cfg.dim), dtype=np.float64),
        fitness=np.full(cfg.pop, np.inf),
        food_position=positions[0].copy(),
        food_fitness=np.inf,
        enemy_position=positions[0].copy(),
        enemy_fitness=-np.inf,
        iteration=0,
        rng=rng,
    )


def _evaluate_swarm(
    state: DaState, cfg: DaConfig, objective: Callable[[np.ndarray], float]
) -> None:
    """Score every individual; refresh food (best ever) and enemy (worst now).

    +inf is a legal worst-case score. NaN gets one retry after re-clipping to
    the bounds, then aborts: a persistently NaN objective means the search has
    nothing to compare.
    """
    values = np.empty(cfg.pop, dtype=np.float64)
    for i in range(cfg.pop):
        f = float(objective(state.positions[i]))
        if math.isnan(f):
            state.positions[i] = np.clip(state.positions[i], cfg.lb, cfg.ub)
            f = float(objective(state.positions[i]))
            if math.isnan(f):
                raise ObjectiveError(
                    f"objective returned NaN twice at position {state.positions[i]!r}"
                )
        values[i] = f
    state.fitness = values
    best = int(values.argmin())
    if values[best] < state.food_fitness:
        state.food_fitness = float(values[best])
        state.food_position = state.positions[best].copy()
    worst = int(values.argmax())
    state.enemy_fitness = float(values[worst])
    state.enemy_position = state.positions[worst].copy()


def neighborhood_radius(cfg: DaConfig, iteration: int) -> np.ndarray:
    """Per-dimension perception radius; starts at a quarter of the box and
    grows linearly to engulf it."""
    span = cfg.ub - cfg.lb
    frac = iteration / cfg.max_iter if cfg.max_iter > 0 else 0.0
    return span / 4.0 + 2.0 * span * frac


def behavior_terms(state: DaState, i: int, neighbor_idx: np.ndarray) -> BehaviorTerms:
    """The five raw behavior vectors for individual ``i``.

    ``enemy`` is the offset toward the enemy; the step update subtracts it
    (weighted) to flee.
    """
    xi = state.positions[i]
    nb = state.positions[neighbor_idx]
    separation = -np.sum(xi - nb, axis=0)
    alignment = state.steps[neighbor_idx].mean(axis=0)
    cohesion = nb.mean(axis=0) - xi
    food = state.food_position - xi
    enemy = state.enemy_position - xi
    return BehaviorTerms(separation, alignment, cohesion, food, enemy)


def schedule_weights(
    iteration: int, max_iter: int, rng: np.random.Generator
) -> DaWeights:
    """Per-iteration behavior weights.

    Momentum decays linearly 0.9 -> 0.4; the exploration factor beta decays
    0.1 -> 0. Separation/alignment/cohesion draw fresh uniforms scaled by
    beta, food attraction does not shrink with beta, enemy repulsion is beta.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1 to schedule weights")
    frac = iteration / max_iter
    momentum = 0.9 - 0.5 * frac
    beta = 0.1 * (1.0 - frac)
    u = rng.random(4)
    return DaWeights(
        s=2.0 * u[0] * beta,
        a=2.0 * u[1] * beta,
        c=2.0 * u[2] * beta,
        f=2.0 * u[3],
        e=beta,
        w=momentum,
    )


def da_step(
    state: DaState,
    weights: DaWeights,
    cfg: DaConfig,
    objective: Callable[[np.ndarray], float],
) -> DaState:
    """Advance the swarm one iteration (synchronous position update)."""
    radius = neighborhood_radius(cfg, state.iteration)
    cap = (cfg.ub - cfg.lb) / 10.0
    pos = state.positions
    new_pos = np.empty_like(pos)
    new_steps = np.empty_like(state.steps)
    for i in range(cfg.pop):
        within = np.all(np.abs(pos - pos[i]) <= radius, axis=1)
        within[i] = False
        neighbor_idx = np.nonzero(within)[0]
        if neighbor_idx.size > 0:
            t = behavior_terms(state, i, neighbor_idx)
            dx = (
                weights.s * t.separation
                + weights.a * t.alignment
                + weights.c * t.cohesion
                + weights.f * t.food
                + weights.e * (pos[i] - state.enemy_position)
                + weights.w * state.steps[i]
            )
            dx = np.clip(dx, -cap, cap)
            x = np.clip(pos[i] + dx, cfg.lb, cfg.ub)
        else:
            dx = np.zeros(cfg.dim, dtype=np.float64)
            x = pos[i] + 0.01 * levy_step(state.rng, cfg.dim) * pos[i]
            x = np.clip(x, cfg.lb, cfg.ub)
        new_pos[i] = x
        new_steps[i] = dx
    state.positions = new_pos
    state.steps = new_steps
    _evaluate_swarm(state, cfg, objective)
    state.iteration += 1
    return state


def optimize(
    objective: Callable[[np.ndarray], float], cfg: DaConfig
) -> DaResult:
    """Minimize ``objective`` over the box; returns the best-ever position,
    its fitness, and the best-so-far trace (length max_iter + 1)."""
    state = initialize_swarm(cfg)
    _evaluate_swarm(state, cfg, objective)
    trace = [state.food_fitness]
    for t in range(cfg.max_iter):
        weights = schedule_weights(t, cfg.max_iter, state.rng)
        da_step(state, weights, cfg, objective)
        trace.append(state.food_fitness)
    return DaResult(
        position=state.food_position.copy(),
        fitness=state.food_fitness,
        trace=np.asarray(trace, dtype=np.float64),
    )


def decode_candidate(candidate: np.ndarray) -> tuple[float, int]:
    """Map a search-space point to (learning_rate, hidden_dim)."""
    candidate = np.asarray(candidate, dtype=np.float64)
    if candidate.shape != (2,):
        raise ValueError(f"expected a 2-vector (lr, hidden), got shape {candidate.shape}")
    lr = float(candidate[0])
    hidden = int(math.floor(candidate[1] + 0.5))
    return lr, max(hidden, 1)


def mlp_tuning_objective(
    candidate: np.ndarray,
    train_xy: tuple[np.ndarray, np.ndarray],
    val_xy: tuple[np.ndarray, np.ndarray],
    budget: TrainConfig,
) -> float:
    """Score a (learning rate, hidden width) candidate: train a fresh
    classifier under the reduced budget and return the negated final
    validation accuracy. Divergence scores +inf (worst possible)."""
    lr, hidden = decode_candidate(candidate)
    if lr <= 0:
        return float("inf")
    x_train, y_train = train_xy
    x_val, y_val = val_xy
    cfg = neuralnet.tuned_config(budget, lr)
    params = neuralnet.init_params(x_train.shape[1], hidden, budget.seed)
    try:
        report = neuralnet.train(params, x_train, y_train, x_val, y_val, cfg)
    except TrainingDivergedError:
        return float("inf")
    return -report.final_val_acc

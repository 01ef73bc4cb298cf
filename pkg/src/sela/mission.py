"""Semi-episodic mission control and the comparison baselines.

The mission runs in two phases. Nominal: greedily chase the waypoint using
the current model (the prior alone until anything has been learned). When the
mean prediction error over a sliding window exceeds a threshold, the mission
switches to Adapting and runs UCB-driven model updates in which every trial
is a real task step, so learning time is never lost to resets. Adaptation
ends when the goal is reached, the error window falls back below the
threshold, or an iteration budget runs out; the mission then resumes Nominal
with the updated posterior.

The baselines keep learning and execution episodic: their learning trials
reset the robot to the start pose and count as pure cost.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .acquisition import AcquisitionConfig, CandidateSet, select_next
from .gp import GpModel, Kernel, ObservationSet, PriorMean, fit, predict, zero_prior
from .reward import PlannerGrid, RewardFunction, build_waypoint_reward
from .worlds import World, goal_reached


class Method(Enum):
    SELA = "sela"
    BABBLING = "babbling"
    EPISODIC_ITE = "episodic_ite"
    UNCERTAINTY = "uncertainty"


class Phase(Enum):
    NOMINAL = "nominal"
    ADAPTING = "adapting"


@dataclass(frozen=True)
class DropDetectorConfig:
    """Sliding-window monitor for performance drops."""

    window: int = 3
    threshold: float = 0.15

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")


def detect_drop(recent, config: DropDetectorConfig) -> bool:
    """True when the mean prediction error over the last `window` pairs
    exceeds the threshold. `recent` holds (predicted, observed) outcomes."""
    if len(recent) == 0:
        raise ValueError("need at least one (predicted, observed) pair")
    return _mean_error(recent, config.window) > config.threshold


def _mean_error(recent, window: int) -> float:
    tail = list(recent)[-window:]
    errors = [float(np.linalg.norm(np.asarray(obs) - np.asarray(pred))) for pred, obs in tail]
    return float(np.mean(errors))


@dataclass
class MissionState:
    """Everything the control loop mutates while a mission runs."""

    world: World
    goal: np.ndarray
    epsilon_goal: float
    observations: ObservationSet
    model: GpModel
    step_cap: int
    step_count: int = 0
    adapt_iterations: int = 0
    phase: Phase = Phase.NOMINAL
    recent: deque = field(default_factory=lambda: deque(maxlen=3))

    def at_goal(self) -> bool:
        return goal_reached(self.world.pose, self.goal, self.epsilon_goal)


@dataclass(frozen=True)
class RunRecord:
    """Accounting for one mission: behaviors spent learning vs executing."""

    method: Method
    learn_steps: int
    exec_steps: int
    total_steps: int
    reached: bool
    seed: int
    wall_time: float

    def __post_init__(self):
        if self.total_steps != self.learn_steps + self.exec_steps:
            raise ValueError("total_steps must equal learn_steps + exec_steps")


@dataclass
class MissionConfig:
    """Fully built per-run bundle: a seeded world plus every knob a method needs."""

    world: World
    candidates: CandidateSet
    prior: PriorMean
    kernel: Kernel
    gp_noise: float
    goal: np.ndarray
    epsilon_goal: float
    grid: PlannerGrid
    lookahead_cells: int
    acquisition: AcquisitionConfig
    drop: DropDetectorConfig
    max_adapt_iterations: int
    step_cap: int
    seed: int
    rng: np.random.Generator
    behavior_sampler: Callable[[np.random.Generator], np.ndarray]
    babble_max: int = 15
    epsilon_model: float = 0.01
    uncertainty_iterations: int = 15
    episodic_success_projection: float = 0.09
    babble_prior: Optional[PriorMean] = None   # None means a zero prior

    def behavior_dim(self) -> int:
        return self.candidates.points.shape[1]


_GREEDY = AcquisitionConfig(alpha=0.0)


def _fresh_state(config: MissionConfig, prior: PriorMean) -> MissionState:
    observations = ObservationSet.empty(config.behavior_dim(), 2, config.gp_noise)
    return MissionState(
        world=config.world,
        goal=np.asarray(config.goal, dtype=float),
        epsilon_goal=config.epsilon_goal,
        observations=observations,
        model=fit(observations, config.kernel, prior),
        step_cap=config.step_cap,
        recent=deque(maxlen=config.drop.window),
    )


def _waypoint_reward(config: MissionConfig, pose) -> RewardFunction:
    return build_waypoint_reward(config.grid, pose, config.goal, config.lookahead_cells)


def sela_adapt(
    state: MissionState,
    candidates: CandidateSet,
    acquisition: AcquisitionConfig,
    reward_builder: Callable[[np.ndarray], RewardFunction],
    max_iterations: int,
    drop: DropDetectorConfig,
) -> MissionState:
    """Adaptation burst: learn while still making task progress.

    Each iteration refreshes the waypoint reward for the current pose, picks
    a behavior by UCB, executes it for real, and refits the model on the new
    observation. Stops on goal, on recovery (window error back under the
    drop threshold), or after max_iterations.
    """
    if state.phase is not Phase.ADAPTING:
        raise RuntimeError("sela_adapt requires the mission to be in the Adapting phase")
    for _ in range(max_iterations):
        if state.at_goal():
            break
        reward = reward_builder(state.world.pose)
        behavior, _ = select_next(candidates, state.model, reward, acquisition)
        predicted, _ = predict(state.model, behavior)
        observed = state.world.execute(behavior)
        state.observations = state.observations.with_observation(behavior, observed)
        state.model = fit(state.observations, state.model.kernel, state.model.prior)
        state.step_count += 1
        state.adapt_iterations += 1
        state.recent.append((predicted, observed))
        if _mean_error(state.recent, drop.window) < drop.threshold:
            break
    return state


def run_mission(config: MissionConfig) -> RunRecord:
    """Full semi-episodic mission; every executed behavior is a task step."""
    started = time.perf_counter()
    state = _fresh_state(config, config.prior)
    while state.step_count < config.step_cap and not state.at_goal():
        reward = _waypoint_reward(config, state.world.pose)
        behavior, _ = select_next(config.candidates, state.model, reward, _GREEDY)
        predicted, _ = predict(state.model, behavior)
        observed = state.world.execute(behavior)
        state.step_count += 1
        state.recent.append((predicted, observed))
        if detect_drop(state.recent, config.drop):
            state.phase = Phase.ADAPTING
            budget = min(config.max_adapt_iterations, config.step_cap - state.step_count)
            sela_adapt(
                state,
                config.candidates,
                config.acquisition,
                lambda pose: _waypoint_reward(config, pose),
                budget,
                config.drop,
            )
            state.phase = Phase.NOMINAL
    return RunRecord(
        method=Method.SELA,
        learn_steps=state.adapt_iterations,
        exec_steps=state.step_count - state.adapt_iterations,
        total_steps=state.step_count,
        reached=state.at_goal(),
        seed=config.seed,
        wall_time=time.perf_counter() - started,
    )


def _drive_greedy(config: MissionConfig, model: GpModel, budget: int) -> int:
    """Chase the goal with a fixed model; returns the number of steps taken."""
    steps = 0
    world = config.world
    while steps < budget and not goal_reached(world.pose, config.goal, config.epsilon_goal):
        reward = _waypoint_reward(config, world.pose)
        behavior, _ = select_next(config.candidates, model, reward, _GREEDY)
        world.execute(behavior)
        steps += 1
    return steps


def baseline_babbling(config: MissionConfig) -> RunRecord:
    """Learn by uniform random behaviors from scratch, then go.

    Each babble resets the pose, so learning is pure cost. Babbling stops
    early once the mean held-out error of the last few predictions drops
    under epsilon_model, which only happens when the model really fits.
    """
    started = time.perf_counter()
    prior = config.babble_prior or zero_prior(2)
    state = _fresh_state(config, prior)
    start_pose = config.world.pose
    recent = deque(maxlen=config.drop.window)
    for _ in range(config.babble_max):
        behavior = config.behavior_sampler(config.rng)
        predicted, _ = predict(state.model, behavior)
        observed = config.world.execute(behavior)
        config.world.reset_pose(start_pose)
        state.observations = state.observations.with_observation(behavior, observed)
        state.model = fit(state.observations, config.kernel, prior)
        recent.append((predicted, observed))
        if _mean_error(recent, config.drop.window) < config.epsilon_model:
            break
    learn_steps = len(state.observations)
    exec_steps = _drive_greedy(config, state.model, config.step_cap - learn_steps)
    return RunRecord(
        method=Method.BABBLING,
        learn_steps=learn_steps,
        exec_steps=exec_steps,
        total_steps=learn_steps + exec_steps,
        reached=goal_reached(config.world.pose, config.goal, config.epsilon_goal),
        seed=config.seed,
        wall_time=time.perf_counter() - started,
    )


# Cardinal task directions learned by the episodic baseline: up, down,
# right, left.
EPISODIC_DIRECTIONS = (
    np.array([0.0, 1.0]),
    np.array([0.0, -1.0]),
    np.array([1.0, 0.0]),
    np.array([-1.0, 0.0]),
)


def baseline_episodic_ite(config: MissionConfig) -> RunRecord:
    """Episodic adaptation: learn one good behavior per cardinal direction,
    resetting the pose after every trial, then bang-bang to the goal.

    Trials score by the observed displacement projected onto the direction;
    an episode ends early once the projection clears the success bar. All
    episodes share one observation set."""
    started = time.perf_counter()
    state = _fresh_state(config, config.prior)
    start_pose = config.world.pose
    learn_steps = 0
    chosen: list[tuple[np.ndarray, np.ndarray]] = []
    for direction in EPISODIC_DIRECTIONS:
        reward = RewardFunction(
            eval=lambda outcome, d=direction: float(np.dot(outcome, d)),
            description=f"projection onto direction ({direction[0]:g}, {direction[1]:g})",
        )
        best_projection = -np.inf
        best_behavior = None
        for _ in range(config.max_adapt_iterations):
            behavior, _ = select_next(config.candidates, state.model, reward, config.acquisition)
            observed = config.world.execute(behavior)
            config.world.reset_pose(start_pose)
            learn_steps += 1
            state.observations = state.observations.with_observation(behavior, observed)
            state.model = fit(state.observations, config.kernel, config.prior)
            projection = float(np.dot(observed, direction))
            if projection > best_projection:
                best_projection = projection
                best_behavior = behavior
            if best_projection >= config.episodic_success_projection:
                break
        chosen.append((best_behavior, direction))

    # Fixed repertoire: the posterior mean at each chosen behavior is the
    # outcome the controller believes in from now on.
    repertoire = [(behavior, predict(state.model, behavior)[0]) for behavior, _ in chosen]
    exec_steps = 0
    world = config.world
    budget = config.step_cap - learn_steps
    while exec_steps < budget and not goal_reached(world.pose, config.goal, config.epsilon_goal):
        landings = [
            float(np.linalg.norm(world.pose + outcome - config.goal))
            for _, outcome in repertoire
        ]
        behavior, _ = repertoire[int(np.argmin(landings))]
        world.execute(behavior)
        exec_steps += 1
    return RunRecord(
        method=Method.EPISODIC_ITE,
        learn_steps=learn_steps,
        exec_steps=exec_steps,
        total_steps=learn_steps + exec_steps,
        reached=goal_reached(world.pose, config.goal, config.epsilon_goal),
        seed=config.seed,
        wall_time=time.perf_counter() - started,
    )


def baseline_uncertainty(config: MissionConfig) -> RunRecord:
    """Pure uncertainty sampling: always try the behavior the model knows
    least about, for a fixed number of trials, then go with what was learned.
    Learning trials reset the pose and count as pure cost."""
    started = time.perf_counter()
    state = _fresh_state(config, config.prior)
    start_pose = config.world.pose
    zero_reward = RewardFunction(eval=lambda _outcome: 0.0, description="uncertainty only")
    for _ in range(config.uncertainty_iterations):
        behavior, _ = select_next(config.candidates, state.model, zero_reward, config.acquisition)
        observed = config.world.execute(behavior)
        config.world.reset_pose(start_pose)
        state.observations = state.observations.with_observation(behavior, observed)
        state.model = fit(state.observations, config.kernel, config.prior)
    learn_steps = config.uncertainty_iterations
    exec_steps = _drive_greedy(config, state.model, config.step_cap - learn_steps)
    return RunRecord(
        method=Method.UNCERTAINTY,
        learn_steps=learn_steps,
        exec_steps=exec_steps,
        total_steps=learn_steps + exec_steps,
        reached=goal_reached(config.world.pose, config.goal, config.epsilon_goal),
        seed=config.seed,
        wall_time=time.perf_counter() - started,
    )


_RUNNERS = {
    Method.SELA: run_mission,
    Method.BABBLING: baseline_babbling,
    Method.EPISODIC_ITE: baseline_episodic_ite,
    Method.UNCERTAINTY: baseline_uncertainty,
}


def run_method(method: Method, config: MissionConfig) -> RunRecord:
    return _RUNNERS[method](config)

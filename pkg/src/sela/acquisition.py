"""UCB selection of the next behavior from a finite candidate set.

Scores every candidate as reward(posterior mean) + alpha * aggregated
uncertainty and returns the argmax. The aggregated uncertainty pools the
per-dimension posterior variances, sqrt(sum_d var_d); with the shared
factorization that is sqrt(outcome_dim * var). Ties resolve to the lowest
candidate index so selection is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .gp import GpModel, predict_batch


class CandidateSource(Enum):
    DENSE_GRID = "dense_grid"
    ARCHIVE_ELITES = "archive_elites"


@dataclass(frozen=True)
class CandidateSet:
    """Finite, duplicate-free pool of behavior points to select from."""

    points: np.ndarray   # (n, behavior_dim)
    source: CandidateSource

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if len(pts) == 0:
            raise ValueError("candidate set must not be empty")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("candidate set contains duplicate points")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def dense_theta_grid(cls, resolution: int = 360) -> "CandidateSet":
        """Evenly spaced directions covering (-pi, pi].

        With the default resolution the grid sits on whole degrees, so the
        axis directions and the diagonals are all exactly representable.
        """
        if resolution < 1:
            raise ValueError("resolution must be at least 1")
        steps = np.arange(1, resolution + 1)
        thetas = -np.pi + steps * (2.0 * np.pi / resolution)
        return cls(points=thetas[:, None], source=CandidateSource.DENSE_GRID)

    @classmethod
    def from_archive(cls, archive) -> "CandidateSet":
        """All elite behaviors of a MAP-Elites archive, in cell order."""
        points = np.array([elite.behavior for elite in archive.elites()])
        return cls(points=points, source=CandidateSource.ARCHIVE_ELITES)


@dataclass(frozen=True)
class AcquisitionConfig:
    """alpha weighs the uncertainty bonus; zero recovers greedy exploitation."""

    alpha: float = 0.05

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")


def ucb_score(reward_of_mean: float, sigma: float, config: AcquisitionConfig) -> float:
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    return reward_of_mean + config.alpha * sigma


def select_next(
    candidates: CandidateSet,
    model: GpModel,
    reward: Callable[[np.ndarray], float],
    config: AcquisitionConfig,
) -> tuple[np.ndarray, int]:
    """Behavior point and index maximizing the UCB score over the candidates."""
    means, variances = predict_batch(model, candidates.points)
    sigma_agg = np.sqrt(means.shape[1] * variances)
    scores = np.fromiter(
        (reward(mean) for mean in means), dtype=float, count=len(means)
    )
    scores = scores + config.alpha * sigma_agg
    index = int(np.argmax(scores))
    return candidates.points[index].copy(), index

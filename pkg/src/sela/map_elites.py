"""Grid MAP-Elites: illuminate a behavior space and keep the best per cell.

The archive doubles as prior knowledge for adaptation: each elite caches the
outcome the intact model produced for its behavior, and ArchivePrior serves
those outcomes as a GP prior mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

import numpy as np


class ArchiveFormatError(ValueError):
    """Raised when serialized archive text does not parse."""


class OfferResult(Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"
    REJECTED = "rejected"


def bin_index(descriptor, grid_shape: tuple[int, ...]) -> tuple[int, ...]:
    """Cell of a descriptor on the unit grid: floor(d_i * n_i), top edge folded
    into the last bin. Descriptor coordinates are clamped to [0, 1] first."""
    desc = np.clip(np.asarray(descriptor, dtype=float), 0.0, 1.0)
    shape = np.asarray(grid_shape, dtype=int)
    if desc.shape != shape.shape:
        raise ValueError(f"descriptor has {desc.size} coordinates, grid has {shape.size}")
    idx = np.minimum(np.floor(desc * shape).astype(int), shape - 1)
    return tuple(int(i) for i in idx)


@dataclass(frozen=True)
class Elite:
    behavior: np.ndarray     # genotype evaluated
    descriptor: np.ndarray   # in [0, 1]^m
    performance: float
    outcome: np.ndarray      # cached intact-model outcome for this behavior

    def __post_init__(self):
        object.__setattr__(self, "behavior", np.asarray(self.behavior, dtype=float))
        object.__setattr__(
            self, "descriptor", np.clip(np.asarray(self.descriptor, dtype=float), 0.0, 1.0)
        )
        object.__setattr__(self, "outcome", np.asarray(self.outcome, dtype=float))


class Archive:
    """Sparse elite-per-cell store over a fixed descriptor grid."""

    def __init__(self, grid_shape: Iterable[int], behavior_dim: int, outcome_dim: int):
        self.grid_shape = tuple(int(n) for n in grid_shape)
        if any(n < 1 for n in self.grid_shape):
            raise ValueError(f"grid shape must be positive, got {self.grid_shape}")
        self.behavior_dim = int(behavior_dim)
        self.outcome_dim = int(outcome_dim)
        self.cells: dict[tuple[int, ...], Elite] = {}

    def offer(self, candidate: Elite) -> OfferResult:
        """Insert into an empty cell, replace on strictly better performance,
        otherwise reject. Ties keep the incumbent."""
        cell = bin_index(candidate.descriptor, self.grid_shape)
        incumbent = self.cells.get(cell)
        if incumbent is None:
            self.cells[cell] = candidate
            return OfferResult.INSERTED
        if candidate.performance > incumbent.performance:
            self.cells[cell] = candidate
            return OfferResult.REPLACED
        return OfferResult.REJECTED

    @property
    def total_cells(self) -> int:
        return int(np.prod(self.grid_shape))

    @property
    def coverage(self) -> float:
        return len(self.cells) / self.total_cells

    def __len__(self) -> int:
        return len(self.cells)

    def items(self) -> list[tuple[tuple[int, ...], Elite]]:
        return sorted(self.cells.items())

    def elites(self) -> list[Elite]:
        return [elite for _, elite in self.items()]


# Evaluator contract: behavior -> (descriptor, performance, outcome).
Evaluator = Callable[[np.ndarray], tuple[np.ndarray, float, np.ndarray]]

# Optional per-evaluation hook, called as on_offer(cell, candidate, result).
OfferHook = Callable[[tuple[int, ...], Elite, OfferResult], None]


def illuminate(
    evaluator: Evaluator,
    budget: int,
    seed: int,
    lower,
    upper,
    grid_shape: tuple[int, ...],
    mutation_sigma: Optional[float] = None,
    init_batch: Optional[int] = None,
    on_offer: Optional[OfferHook] = None,
) -> Archive:
    """Fill an archive with exactly `budget` evaluator calls.

    Starts from a uniform random batch (a tenth of the budget, at least 100),
    then loops: pick a uniform random occupied cell, mutate its elite with
    isotropic Gaussian noise, clamp to the domain, evaluate, offer. The whole
    run is a pure function of the seed.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(upper <= lower):
        raise ValueError("domain bounds must satisfy lower < upper per coordinate")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if init_batch is None:
        init_batch = max(100, budget // 10)
    if init_batch < 1 or init_batch > budget:
        raise ValueError(f"initial batch {init_batch} must be in [1, budget={budget}]")
    if mutation_sigma is None:
        mutation_sigma = 0.1 * float(np.max(upper - lower))
    if mutation_sigma <= 0:
        raise ValueError("mutation_sigma must be positive")

    rng = np.random.default_rng(seed)
    archive: Optional[Archive] = None
    occupied: list[tuple[int, ...]] = []

    def run_one(behavior: np.ndarray):
        nonlocal archive
        descriptor, performance, outcome = evaluator(behavior)
        candidate = Elite(behavior, descriptor, float(performance), outcome)
        if archive is None:
            archive = Archive(grid_shape, candidate.behavior.size, candidate.outcome.size)
        cell = bin_index(candidate.descriptor, archive.grid_shape)
        result = archive.offer(candidate)
        if result is OfferResult.INSERTED:
            occupied.append(cell)
        if on_offer is not None:
            on_offer(cell, candidate, result)

    for _ in range(init_batch):
        run_one(rng.uniform(lower, upper))
    for _ in range(budget - init_batch):
        parent = archive.cells[occupied[rng.integers(len(occupied))]]
        child = parent.behavior + rng.normal(0.0, mutation_sigma, size=lower.shape)
        run_one(np.clip(child, lower, upper))
    return archive


def _format_float(value: float) -> str:
    return repr(float(value))


def _format_vector(values: np.ndarray) -> str:
    return ",".join(_format_float(v) for v in np.asarray(values, dtype=float))


def save_archive(archive: Archive) -> bytes:
    """Serialize to the line-oriented text format, elites in cell order.

    Floats are written with shortest round-trip precision, so saving a loaded
    archive reproduces the input bytes exactly.
    """
    grid = "x".join(str(n) for n in archive.grid_shape)
    lines = [
        f"sela-archive v1 m={len(archive.grid_shape)} grid={grid} "
        f"b={archive.behavior_dim} d={archive.outcome_dim}"
    ]
    for cell, elite in archive.items():
        lines.append(
            f"cell={','.join(str(i) for i in cell)}"
            f" behavior={_format_vector(elite.behavior)}"
            f" descriptor={_format_vector(elite.descriptor)}"
            f" perf={_format_float(elite.performance)}"
            f" outcome={_format_vector(elite.outcome)}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_vector(text: str, expected: int, what: str, line_no: int) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != expected:
        raise ArchiveFormatError(
            f"line {line_no}: {what} has {len(parts)} coordinates, expected {expected}"
        )
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise ArchiveFormatError(f"line {line_no}: malformed {what} value") from exc


def load_archive(data: bytes) -> Archive:
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise ArchiveFormatError("line 1: empty archive data")
    header = lines[0].split()
    if len(header) != 6 or header[0] != "sela-archive" or header[1] != "v1":
        raise ArchiveFormatError(f"line 1: unrecognized header {lines[0]!r}")
    fields = {}
    for token in header[2:]:
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        m = int(fields["m"])
        grid_shape = tuple(int(n) for n in fields["grid"].split("x"))
        behavior_dim = int(fields["b"])
        outcome_dim = int(fields["d"])
    except (KeyError, ValueError) as exc:
        raise ArchiveFormatError(f"line 1: malformed header {lines[0]!r}") from exc
    if len(grid_shape) != m:
        raise ArchiveFormatError(f"line 1: grid lists {len(grid_shape)} sizes, m={m}")

    archive = Archive(grid_shape, behavior_dim, outcome_dim)
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        entry = {}
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise ArchiveFormatError(f"line {line_no}: malformed token {token!r}")
            entry[key] = value
        missing = {"cell", "behavior", "descriptor", "perf", "outcome"} - entry.keys()
        if missing:
            raise ArchiveFormatError(f"line {line_no}: missing field {sorted(missing)[0]!r}")
        try:
            cell = tuple(int(i) for i in entry["cell"].split(","))
        except ValueError as exc:
            raise ArchiveFormatError(f"line {line_no}: malformed cell index") from exc
        if len(cell) != m or any(not 0 <= c < n for c, n in zip(cell, grid_shape)):
            raise ArchiveFormatError(f"line {line_no}: cell {cell} outside grid {grid_shape}")
        if cell in archive.cells:
            raise ArchiveFormatError(f"line {line_no}: duplicate cell {cell}")
        try:
            performance = float(entry["perf"])
        except ValueError as exc:
            raise ArchiveFormatError(f"line {line_no}: malformed perf value") from exc
        elite = Elite(
            behavior=_parse_vector(entry["behavior"], behavior_dim, "behavior", line_no),
            descriptor=_parse_vector(entry["descriptor"], m, "descriptor", line_no),
            performance=performance,
            outcome=_parse_vector(entry["outcome"], outcome_dim, "outcome", line_no),
        )
        archive.cells[cell] = elite
    return archive


class ArchivePrior:
    """Prior mean backed by an archive.

    Returns the cached intact outcome of the elite whose behavior matches the
    query; a query between elites falls back to the nearest elite's outcome,
    ties resolving to the lowest cell index.
    """

    def __init__(self, archive: Archive):
        elites = archive.elites()
        if not elites:
            raise ValueError("cannot build a prior from an empty archive")
        self._behaviors = np.array([e.behavior for e in elites])
        self._outcomes = np.array([e.outcome for e in elites])
        self._exact = {e.behavior.tobytes(): i for i, e in enumerate(elites)}

    def __call__(self, x) -> np.ndarray:
        query = np.asarray(x, dtype=float)
        index = self._exact.get(query.tobytes())
        if index is None:
            deltas = self._behaviors - query[None, :]
            index = int(np.argmin(np.einsum("ij,ij->i", deltas, deltas)))
        return self._outcomes[index].copy()

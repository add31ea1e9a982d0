"""Self-organizing map on a fixed 5x5 hexagonal grid.

Inputs are expected unit-normalized. Training runs two phases over the
shuffled sample stream: an ordering phase whose learning rate decays
linearly from 0.9 and whose neighborhood radius shrinks from the grid
diameter down to the tuning radius, then a tuning phase at a fixed small
rate and radius 1. Neighborhoods are measured in link distance, the hop
count of the hexagonal neighbor graph.

Classification is by best-matching unit after neurons have been labeled
with the majority class of the training samples they win.
"""

from __future__ import annotations

import math
import time
from collections import Counter, deque
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyData, Unlabeled
from ..preproc import ClassLabel, l2_normalize_rows
from .base import TrainReport

GRID_ROWS = 5
GRID_COLS = 5
N_NEURONS = GRID_ROWS * GRID_COLS

# Preferred order when breaking label ties.
_LABEL_ORDER = (ClassLabel.NORMAL, ClassLabel.AMPLIFICATION, ClassLabel.DIRECT_DOS)


def grid_positions() -> np.ndarray:
    """Planar coordinates of the hexagonal offset layout, neuron-major.

    Neuron index r * GRID_COLS + c sits at (c + 0.5 * (r % 2), r * sqrt(3)/2).
    """
    pos = np.zeros((N_NEURONS, 2))
    for r in range(GRID_ROWS):
        for c in range(GRID_COLS):
            pos[r * GRID_COLS + c] = (c + 0.5 * (r % 2), r * math.sqrt(3) / 2)
    return pos


def _link_matrix() -> np.ndarray:
    """All-pairs hop counts on the neighbor graph (nodes within 1.001)."""
    pos = grid_positions()
    d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2))
    adjacency = (d <= 1.001) & ~np.eye(N_NEURONS, dtype=bool)
    dist = np.full((N_NEURONS, N_NEURONS), -1, dtype=int)
    for src in range(N_NEURONS):
        dist[src, src] = 0
        frontier = deque([src])
        while frontier:
            node = frontier.popleft()
            for nbr in np.nonzero(adjacency[node])[0]:
                if dist[src, nbr] < 0:
                    dist[src, nbr] = dist[src, node] + 1
                    frontier.append(nbr)
    return dist


_LINKS = _link_matrix()
GRID_DIAMETER = int(_LINKS.max())


def linkdist(a: int, b: int) -> int:
    """Hop count between two neurons on the hexagonal neighbor graph."""
    return int(_LINKS[a, b])


@dataclass
class SomModel:
    codebook: np.ndarray                         # (25, 3)
    grid: np.ndarray                             # (25, 2)
    neuron_labels: tuple[ClassLabel, ...] | None = None

    def copy(self) -> "SomModel":
        return SomModel(self.codebook.copy(), self.grid.copy(), self.neuron_labels)


@dataclass(frozen=True)
class SomTrainConfig:
    epochs: int = 1000
    ordering_lr: float = 0.9
    ordering_steps: int = 1000
    tuning_lr: float = 0.02
    tuning_neighbor_dist: int = 1
    seed: int = 0


def som_init(seed: int) -> SomModel:
    """Codebook drawn uniformly from the unit cube, deterministic per seed."""
    rng = np.random.default_rng(seed)
    return SomModel(codebook=rng.random((N_NEURONS, 3)), grid=grid_positions())


def _bmu(codebook: np.ndarray, x: np.ndarray) -> int:
    d2 = ((codebook - x) ** 2).sum(axis=1)
    return int(d2.argmin())   # ties go to the lowest index


def som_train(model: SomModel, data, cfg: SomTrainConfig = SomTrainConfig()) -> SomModel:
    """Run the two-phase competitive schedule; returns a new model.

    Presentation order is re-shuffled each epoch from the seeded
    generator; one epoch presents every sample once. The first
    `ordering_steps` presentations form the ordering phase.
    """
    X = np.asarray(data, dtype=float).reshape(-1, 3)
    if len(X) == 0:
        raise EmptyData("som training needs at least one sample")
    if not 0 < cfg.ordering_lr <= 1 or not 0 < cfg.tuning_lr <= 1:
        raise ValueError("learning rates must be in (0, 1]")
    if cfg.ordering_steps < 1:
        raise ValueError("ordering_steps must be >= 1")

    rng = np.random.default_rng(cfg.seed)
    codebook = model.codebook.copy()
    presented = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(len(X)):
            x = X[i]
            if presented < cfg.ordering_steps:
                frac = presented / cfg.ordering_steps
                lr = cfg.ordering_lr + (cfg.tuning_lr - cfg.ordering_lr) * frac
                radius = GRID_DIAMETER + (cfg.tuning_neighbor_dist - GRID_DIAMETER) * frac
            else:
                lr = cfg.tuning_lr
                radius = cfg.tuning_neighbor_dist
            winner = _bmu(codebook, x)
            mask = _LINKS[winner] <= radius
            codebook[mask] += lr * (x - codebook[mask])
            presented += 1
    return SomModel(codebook=codebook, grid=model.grid.copy(),
                    neuron_labels=model.neuron_labels)


def quantization_error(model: SomModel, data) -> float:
    """Mean distance from each sample to its best-matching unit."""
    X = np.asarray(data, dtype=float).reshape(-1, 3)
    if len(X) == 0:
        raise EmptyData("quantization error needs at least one sample")
    d2 = ((X[:, None, :] - model.codebook[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).mean())


def _pick_label(counter: Counter, global_counts: Counter) -> ClassLabel:
    top = max(counter.values())
    tied = [lbl for lbl in _LABEL_ORDER if counter.get(lbl, 0) == top]
    if len(tied) == 1:
        return tied[0]
    top_global = max(global_counts.get(lbl, 0) for lbl in tied)
    for lbl in _LABEL_ORDER:
        if lbl in tied and global_counts.get(lbl, 0) == top_global:
            return lbl
    return tied[0]


def som_label(model: SomModel, vectors, labels) -> SomModel:
    """Label every neuron from the training samples it wins.

    Majority vote per neuron; ties fall back to the globally most
    frequent class, then Normal. Neurons winning no samples inherit the
    label of the nearest labeled neuron by link distance, lowest index
    first.
    """
    X = np.asarray(vectors, dtype=float).reshape(-1, 3)
    labels = list(labels)
    if len(X) == 0 or len(labels) != len(X):
        raise EmptyData("neuron labeling needs matching non-empty samples")

    votes: dict[int, Counter] = {}
    for x, lbl in zip(X, labels):
        votes.setdefault(_bmu(model.codebook, x), Counter())[lbl] += 1
    global_counts = Counter(labels)

    assigned: dict[int, ClassLabel] = {
        n: _pick_label(counter, global_counts) for n, counter in votes.items()}
    result: list[ClassLabel] = []
    labeled = sorted(assigned)
    for n in range(N_NEURONS):
        if n in assigned:
            result.append(assigned[n])
        else:
            nearest = min(labeled, key=lambda j: (_LINKS[n, j], j))
            result.append(assigned[nearest])
    return SomModel(model.codebook.copy(), model.grid.copy(), tuple(result))


def som_classify(model: SomModel, x) -> ClassLabel:
    """Label of the best-matching unit for a raw (unnormalized) input.

    The input is unit-normalized first, so classification is invariant
    under positive scaling; an all-zero input is matched as-is.
    """
    if model.neuron_labels is None:
        raise Unlabeled("neuron labels missing; run som_label first")
    arr = np.asarray(x, dtype=float).reshape(1, 3)
    arr = l2_normalize_rows(arr)[0]
    return model.neuron_labels[_bmu(model.codebook, arr)]

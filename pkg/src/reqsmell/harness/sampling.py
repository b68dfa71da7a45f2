"""Stratified 3-fold split with nested shot pools and cross-assigned evaluation."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..errors import IndivisibleDataset
from ..model import Label
from .dataset import DatasetRecord

DEFAULT_POOL_SIZES = (20, 40, 80, 160, 320)
N_FOLDS = 3


@dataclass(frozen=True)
class SamplingPlan:
    """Fold ids, nested pool ids per fold, and the pool-to-eval assignment.

    ``assignment[i]`` is the fold whose instances evaluate the pools drawn
    from fold i, so no pool instance ever appears in its own evaluation set.
    """

    seed: int
    folds: tuple[tuple[str, ...], ...]
    nested_pools: tuple[dict[int, tuple[str, ...]], ...]
    assignment: tuple[int, ...]


def build_sampling_plan(
    dataset: list[DatasetRecord],
    seed: int,
    pool_sizes: tuple[int, ...] = DEFAULT_POOL_SIZES,
) -> SamplingPlan:
    """Split a balanced dataset into 3 stratified folds with nested pools.

    Every pool of a given size holds exactly size/2 records per label and is
    drawn from the next-larger pool of its fold, so pools form a strict
    chain of subsets. Fully deterministic for a fixed seed.
    """
    n = len(dataset)
    if n == 0 or n % (N_FOLDS * 2) != 0:
        raise IndivisibleDataset(
            f"dataset size {n} must be a positive multiple of {N_FOLDS * 2} "
            f"({N_FOLDS} folds x 2 strata)"
        )
    defect_ids = sorted(r.id for r in dataset if r.label is Label.DEFECT)
    other_ids = sorted(r.id for r in dataset if r.label is Label.NOT_DEFECT)
    if len(defect_ids) != len(other_ids):
        raise IndivisibleDataset(
            f"dataset must be balanced, got {len(defect_ids)} defect / "
            f"{len(other_ids)} not_defect"
        )
    per_class = len(defect_ids) // N_FOLDS
    sizes = tuple(sorted(pool_sizes))
    for size in sizes:
        if size <= 0 or size % 2 != 0:
            raise IndivisibleDataset(f"pool size {size} must be a positive even number")
    if sizes and sizes[-1] // 2 > per_class:
        raise IndivisibleDataset(
            f"largest pool size {sizes[-1]} needs {sizes[-1] // 2} records per class "
            f"but folds hold only {per_class}"
        )

    rng = random.Random(seed)
    rng.shuffle(defect_ids)
    rng.shuffle(other_ids)

    folds: list[tuple[str, ...]] = []
    fold_classes: list[tuple[list[str], list[str]]] = []
    for i in range(N_FOLDS):
        d = defect_ids[i * per_class : (i + 1) * per_class]
        o = other_ids[i * per_class : (i + 1) * per_class]
        folds.append(tuple(d + o))
        fold_classes.append((d, o))

    nested: list[dict[int, tuple[str, ...]]] = []
    for d, o in fold_classes:
        pools: dict[int, tuple[str, ...]] = {}
        cur_d, cur_o = d, o
        for size in reversed(sizes):
            cur_d = rng.sample(cur_d, size // 2)
            cur_o = rng.sample(cur_o, size // 2)
            pools[size] = tuple(cur_d + cur_o)
        nested.append(dict(sorted(pools.items())))

    assignment = tuple((i + 1) % N_FOLDS for i in range(N_FOLDS))
    return SamplingPlan(
        seed=seed,
        folds=tuple(folds),
        nested_pools=tuple(nested),
        assignment=assignment,
    )


def plan_to_json(plan: SamplingPlan) -> dict:
    return {
        "seed": plan.seed,
        "folds": [list(fold) for fold in plan.folds],
        "nested_pools": [
            {str(size): list(ids) for size, ids in pools.items()}
            for pools in plan.nested_pools
        ],
        "assignment": list(plan.assignment),
    }


def plan_from_json(doc: dict) -> SamplingPlan:
    return SamplingPlan(
        seed=int(doc["seed"]),
        folds=tuple(tuple(fold) for fold in doc["folds"]),
        nested_pools=tuple(
            {int(size): tuple(ids) for size, ids in pools.items()}
            for pools in doc["nested_pools"]
        ),
        assignment=tuple(doc["assignment"]),
    )


def save_plan(plan: SamplingPlan, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plan_to_json(plan), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_plan(path: str | Path) -> SamplingPlan:
    with open(path, encoding="utf-8") as fh:
        return plan_from_json(json.load(fh))

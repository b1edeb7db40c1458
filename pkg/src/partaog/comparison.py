"""Active-versus-random annotation-efficiency comparison on synthetic data.

Per seed: generate a training pool and a held-out split, run the QA loop once
per policy to the largest budget while snapshotting the graph at each budget
of interest, then evaluate every snapshot on the held-out split. Everything
derives from (config, budgets, seeds), so curves are exactly reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .aog.config import MiningConfig
from .errors import ConfigError
from .evaluation import evaluate
from .features.io import VolumeStore
from .features.stats import channel_stats
from .features.synth import BumpSpec, SynthConfig, TemplateLayout, generate_dataset
from .qa.loop import active_selector, random_selector, run_loop
from .qa.oracle import SimulatedOracle
from .qa.state import QaConfig, QaSession

# Train and held-out pools come from the same generator; this offset keeps
# their random streams disjoint for every benchmark seed.
HOLDOUT_SEED_OFFSET = 100_003

POLICIES = {"active": active_selector, "random": random_selector}


@dataclass(frozen=True)
class BenchmarkConfig:
    synth: SynthConfig
    qa: QaConfig
    holdout_images: int = 100

    def holdout_synth(self) -> SynthConfig:
        """Held-out split: same layouts, no flips or part-free images."""
        return replace(
            self.synth,
            num_images=self.holdout_images,
            flip_fraction=0.0,
            absent_fraction=0.0,
            id_prefix="test",
        )


@dataclass(frozen=True)
class CurvePoint:
    budget: int
    mean: float
    stderr: float
    per_seed: tuple[float, ...] = ()


@dataclass(frozen=True)
class EfficiencyCurve:
    policy: str
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        budgets = [p.budget for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
            raise ValueError("curve budgets must be strictly increasing")

    def mean_at(self, budget: int) -> float:
        for p in self.points:
            if p.budget == budget:
                return p.mean
        raise KeyError("no curve point at budget %d" % budget)


@dataclass(frozen=True)
class ComparisonResult:
    curves: dict[str, EfficiencyCurve]
    # policy -> budget -> fraction of seeds in which every template label
    # existed in the graph by that budget
    discovery: dict[str, dict[int, float]] = field(default_factory=dict)
    budgets: tuple[int, ...] = ()
    seeds: tuple[int, ...] = ()


def standard_benchmark() -> BenchmarkConfig:
    """The stock 200-image, 3-template benchmark configuration.

    Template frequencies are deliberately imbalanced and the rare template is
    the hardest (weaker bumps, more placement jitter), so annotation placement
    matters: a policy that finds and drills the underexplained templates wins.
    """
    templates = (
        TemplateLayout(
            label="a",
            bumps=(
                BumpSpec(channel=0, d_row=-1.0, d_col=-1.0, amplitude=2.6),
                BumpSpec(channel=1, d_row=1.0, d_col=1.0, amplitude=2.6),
            ),
            box_w=28.0,
            box_h=28.0,
            frequency=0.55,
            placement_jitter=0.5,
        ),
        TemplateLayout(
            label="b",
            bumps=(
                BumpSpec(channel=2, d_row=-1.0, d_col=1.0, amplitude=2.6),
                BumpSpec(channel=3, d_row=1.0, d_col=-1.0, amplitude=2.6),
            ),
            box_w=28.0,
            box_h=28.0,
            frequency=0.30,
            placement_jitter=0.5,
        ),
        TemplateLayout(
            label="c",
            bumps=(
                BumpSpec(channel=4, d_row=0.0, d_col=-2.0, amplitude=2.0),
                BumpSpec(channel=5, d_row=0.0, d_col=2.0, amplitude=2.0),
            ),
            box_w=28.0,
            box_h=28.0,
            frequency=0.15,
            placement_jitter=1.0,
        ),
    )
    synth = SynthConfig(
        templates=templates,
        num_images=200,
        grid_h=16,
        grid_w=16,
        num_channels=6,
        stride_px=8.0,
        noise=0.8,
        bump_sigma=1.5,
        center_jitter=3,
    )
    mining = MiningConfig(
        patterns_per_template=8,
        window_radius=3.0,
        candidate_stride=2,
    )
    qa = QaConfig(part_name="part", mining=mining)
    return BenchmarkConfig(synth=synth, qa=qa)


def _run_policy(cfg: BenchmarkConfig, seed, store, stats, gt, budgets, selector):
    """One QA run to the largest budget; returns {budget: AndOrGraph}."""
    session = QaSession(store, replace(cfg.qa, seed=seed), stats=stats)
    snapshots = {b: session.aog for b in budgets if b == 0}
    positive = [b for b in budgets if b > 0]
    if positive:
        oracle = SimulatedOracle(gt, iou_threshold=cfg.qa.iou_threshold)
        trace = run_loop(
            session, oracle, max(positive), selector=selector, snapshot_budgets=positive
        )
        for b in positive:
            snapshots[b] = trace.snapshots.get(b, session.aog)
    return snapshots


def compare_policies(cfg: BenchmarkConfig, budgets, seeds) -> ComparisonResult:
    budgets = sorted(set(int(b) for b in budgets))
    seeds = list(seeds)
    if len(seeds) < 5:
        raise ConfigError("need at least 5 seeds, got %d" % len(seeds))
    if not budgets:
        raise ConfigError("need at least one budget")
    all_labels = {t.label for t in cfg.synth.templates}

    per_seed = {policy: {b: [] for b in budgets} for policy in POLICIES}
    discovered = {policy: {b: 0 for b in budgets} for policy in POLICIES}
    for seed in seeds:
        train_volumes, train_gt = generate_dataset(cfg.synth, seed)
        store = VolumeStore.from_volumes(train_volumes, category=cfg.synth.category)
        stats = channel_stats(store)
        test_volumes, test_gt = generate_dataset(
            cfg.holdout_synth(), seed + HOLDOUT_SEED_OFFSET
        )
        test_store = VolumeStore.from_volumes(test_volumes, category="holdout")
        for policy, selector in POLICIES.items():
            snapshots = _run_policy(cfg, seed, store, stats, train_gt, budgets, selector)
            for b in budgets:
                aog = snapshots[b]
                report = evaluate(aog, test_store, test_gt, stats)
                per_seed[policy][b].append(report.mean_norm_dist)
                if set(aog.labels()) >= all_labels:
                    discovered[policy][b] += 1

    curves = {}
    discovery = {}
    for policy in POLICIES:
        points = []
        for b in budgets:
            vals = per_seed[policy][b]
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                stderr = math.sqrt(var / len(vals))
            else:
                stderr = 0.0
            points.append(CurvePoint(budget=b, mean=mean, stderr=stderr, per_seed=tuple(vals)))
        curves[policy] = EfficiencyCurve(policy=policy, points=tuple(points))
        discovery[policy] = {b: discovered[policy][b] / len(seeds) for b in budgets}
    return ComparisonResult(
        curves=curves, discovery=discovery, budgets=tuple(budgets), seeds=tuple(seeds)
    )


def write_curves_csv(result: ComparisonResult, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["policy", "budget", "mean", "stderr"])
        for policy in sorted(result.curves):
            for p in result.curves[policy].points:
                writer.writerow([policy, p.budget, p.mean, p.stderr])

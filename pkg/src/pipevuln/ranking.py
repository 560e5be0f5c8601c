"""Execution-path enumeration, vulnerability scoring, and target selection.

The adversary's objective, maximizing end-to-end pipeline cost over bounded
input perturbations, decomposes into two coordinated decisions: an outer
choice of which execution path to steer inputs into, and an inner
path-conditioned crafting of the inputs themselves. This module solves the
outer decision from profiling data alone; the inner one is out of scope
here and enters only through the declared adversarial cost and cardinality
profiles.

A path's vulnerability score aggregates its components' scores by summation
rather than maximum: an inflated emission at one component propagates work
to every downstream component on the path simultaneously, and a maximum
would miss exactly that multi-stage cascade.

Scoring model. The clean pipeline incurs a reference cost per system input,
``K = sum_v clean_cost(v) * clean_workload(v)``. Steering inputs toward a
path changes the cost incurred at component ``v`` to
``adv_cost(v) * targeted_workload(v)``. The component's vulnerability score
is its share of system-cost amplification:

    score(v | path) = (adv_incurred(v) - clean_incurred(v)) / K

so a component whose incurred cost is invariant scores exactly zero, and
the path score (the sum along the path) equals the path's cost-amplification
excess over the clean reference. Stored alongside each score are the clean
reference cost and the reference-plus-excess cost, whose ratio minus one
reproduces the score.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    MissingScoreError,
    NoSuchPathError,
    PathExplosionError,
)
from .model import EXIT, ComponentSpec, PipelineGraph
from .propagation import CLEAN, WorkloadVector, propagate

#: Default ceiling on enumerated paths; graphs beyond it are out of scope.
DEFAULT_PATH_CAP = 10_000

#: Environment variable overriding the default path-enumeration cap.
PATH_CAP_ENV = "PIPEVULN_PATH_CAP"


def resolve_path_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    raw = os.environ.get(PATH_CAP_ENV)
    return int(raw) if raw else DEFAULT_PATH_CAP


@dataclass(frozen=True)
class ExecutionPath:
    """A label-consistent source-to-exit walk through the pipeline.

    ``steps`` pairs each visited component with the outgoing label taken
    there; the sentinel label ``EXIT`` marks termination at a component
    without a gate. The id concatenates the steps and is the stable handle
    used in scenarios, budgets, and reports.
    """

    id: str
    steps: tuple[tuple[str, str], ...]

    @property
    def components(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.steps)

    @staticmethod
    def make(steps: Sequence[tuple[str, str]]) -> "ExecutionPath":
        pid = "->".join(f"{cid}:{label}" for cid, label in steps)
        return ExecutionPath(id=pid, steps=tuple(steps))


@dataclass(frozen=True)
class ComponentScore:
    """Vulnerability score of one component in a targeting context.

    ``clean_unit_cost`` is the clean per-input reference cost (giga-FLOPs)
    and ``adv_unit_cost`` the reference plus this component's adversarial
    excess, so ``score == adv_unit_cost / clean_unit_cost - 1`` whenever the
    reference is positive.
    """

    component: str
    clean_unit_cost: float
    adv_unit_cost: float
    score: float


@dataclass(frozen=True)
class ScoreContext:
    """Workload context for scoring one component against one targeting."""

    clean_workload: float
    adv_workload: float
    reference_gflops: float


@dataclass(frozen=True)
class RankedPath:
    path: ExecutionPath
    score: float
    component_scores: tuple[ComponentScore, ...]


@dataclass(frozen=True)
class PathRanking:
    """Ranked paths (descending score, ties by ascending id) plus selection.

    ``weights`` are the adaptive loss weights over the selected path's
    components; ``degenerate_weights`` flags the uniform fallback used when
    the selected path's score carries no positive mass.
    """

    entries: tuple[RankedPath, ...]
    selected: RankedPath
    weights: dict[str, float]
    degenerate_weights: bool


def enumerate_paths(
    graph: PipelineGraph, cap: int | None = None
) -> list[ExecutionPath]:
    """All label-consistent source-to-exit walks, ordered by path id.

    Raises:
        PathExplosionError: more than ``cap`` paths (default 10,000,
            overridable via ``PIPEVULN_PATH_CAP``) — the graph is outside
            the intended scale of exhaustive enumeration.
    """
    limit = resolve_path_cap(cap)
    paths: list[ExecutionPath] = []
    stack: list[tuple[str, tuple[tuple[str, str], ...]]] = [(graph.source, ())]
    while stack:
        cid, prefix = stack.pop()
        routes = graph.routes(cid)
        if not routes:
            paths.append(ExecutionPath.make(prefix + ((cid, EXIT),)))
        else:
            # Reverse-sorted push so label-ascending continuations pop first.
            for label in sorted(routes, reverse=True):
                target = routes[label]
                step = prefix + ((cid, label),)
                if target == EXIT:
                    paths.append(ExecutionPath.make(step))
                else:
                    stack.append((target, step))
        if len(paths) > limit:
            raise PathExplosionError(
                f"path count exceeds cap of {limit}; the graph is outside "
                "the intended enumeration scale"
            )
    return sorted(paths, key=lambda p: p.id)


def component_score(spec: ComponentSpec, ctx: ScoreContext) -> ComponentScore:
    """Score one component from its clean/targeted workloads and reference.

    Guarded so scores stay finite: a zero clean reference (an all-zero-cost
    pipeline) scores zero.
    """
    clean_incurred = spec.clean_cost * ctx.clean_workload
    adv_incurred = spec.adv_cost * ctx.adv_workload
    reference = ctx.reference_gflops
    if reference <= 0:
        return ComponentScore(spec.id, 0.0, 0.0, 0.0)
    excess = adv_incurred - clean_incurred
    return ComponentScore(
        component=spec.id,
        clean_unit_cost=reference,
        adv_unit_cost=reference + excess,
        score=excess / reference,
    )


def path_score(
    path: ExecutionPath, scores: Mapping[str, ComponentScore]
) -> float:
    """Sum of component scores along the path, in path order."""
    total = 0.0
    for cid in path.components:
        if cid not in scores:
            raise MissingScoreError(f"no score for component {cid!r} on {path.id}")
        total += scores[cid].score
    return total


def compute_loss_weights(
    path: ExecutionPath, scores: Mapping[str, ComponentScore]
) -> tuple[dict[str, float], bool]:
    """Adaptive loss weights: each component's share of the path score.

    Negative component scores (adversarial cost below clean) carry no
    useful loss mass and are clamped to zero before normalizing. When no
    positive mass remains the weights fall back to uniform and the
    degeneracy flag is set. Weights are nonnegative and sum to one.
    """
    mass: dict[str, float] = {}
    for cid in path.components:
        if cid not in scores:
            raise MissingScoreError(f"no score for component {cid!r} on {path.id}")
        mass[cid] = max(scores[cid].score, 0.0)
    total = sum(mass.values())
    if total <= 0:
        uniform = 1.0 / len(path.components)
        return {cid: uniform for cid in path.components}, True
    return {cid: value / total for cid, value in mass.items()}, False


def _score_path(
    graph: PipelineGraph,
    path: ExecutionPath,
    clean: WorkloadVector,
    reference: float,
) -> RankedPath:
    targeted = propagate(graph, path)
    scores = []
    for cid in path.components:
        ctx = ScoreContext(
            clean_workload=clean.entries[cid],
            adv_workload=targeted.entries[cid],
            reference_gflops=reference,
        )
        scores.append(component_score(graph.components[cid], ctx))
    total = sum(s.score for s in scores)
    return RankedPath(path=path, score=total, component_scores=tuple(scores))


def _reference_cost(graph: PipelineGraph, clean: WorkloadVector) -> float:
    return sum(
        graph.components[cid].clean_cost * clean.entries[cid]
        for cid in sorted(graph.components)
    )


def _assemble(entries: list[RankedPath], selected: RankedPath) -> PathRanking:
    ordered = sorted(entries, key=lambda r: (-r.score, r.path.id))
    scores = {s.component: s for s in selected.component_scores}
    weights, degenerate = compute_loss_weights(selected.path, scores)
    return PathRanking(
        entries=tuple(ordered),
        selected=selected,
        weights=weights,
        degenerate_weights=degenerate,
    )


def rank_and_select(graph: PipelineGraph, cap: int | None = None) -> PathRanking:
    """Rank every execution path and select the top-scoring one.

    Ties break toward the lexicographically smallest path id. Loss weights
    are computed for the selected path.
    """
    paths = enumerate_paths(graph, cap=cap)
    clean = propagate(graph, CLEAN)
    reference = _reference_cost(graph, clean)
    entries = [_score_path(graph, p, clean, reference) for p in paths]
    selected = max(entries, key=lambda r: (r.score, _NegId(r.path.id)))
    return _assemble(entries, selected)


def wrong_path_report(
    graph: PipelineGraph, forced_label: str, cap: int | None = None
) -> PathRanking:
    """Ranking with selection forced onto a label's path.

    ``forced_label`` must appear among some path's step labels; of the
    matching paths the highest-scoring one is selected (scores are computed
    normally), enabling selected-vs-forced comparisons.
    """
    paths = enumerate_paths(graph, cap=cap)
    clean = propagate(graph, CLEAN)
    reference = _reference_cost(graph, clean)
    entries = [_score_path(graph, p, clean, reference) for p in paths]
    matching = [
        r for r in entries
        if any(label == forced_label for _, label in r.path.steps)
    ]
    if not matching:
        raise NoSuchPathError(f"no execution path takes label {forced_label!r}")
    selected = max(matching, key=lambda r: (r.score, _NegId(r.path.id)))
    return _assemble(entries, selected)


class _NegId(str):
    """Reverses string comparison so max() prefers the smaller path id."""

    def __lt__(self, other) -> bool:  # pragma: no cover - trivial
        return str.__gt__(self, other)

    def __gt__(self, other) -> bool:
        return str.__lt__(self, other)

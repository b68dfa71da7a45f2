"""Simulated feedback-loop runs: gold labels stand in for human validation.

A run materializes, per fold, a pool of validated examples from the plan's
nested subsets, predicts the cross-assigned evaluation fold against it, and
scores gold-vs-predicted pairs per fold and in aggregate. Reasoning for pool
examples is generated conditioned on the gold label (never predicted), so a
pool record always carries the gold label regardless of backend chatter.

Fidelity note: the live loop has a human vet every generated explanation;
here label-conditioned generation is accepted unvetted. Deterministic
backends make this gap irrelevant for correctness checks but it should be
kept in mind when reading simulated scores.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..backends import CompletionRequest, complete
from ..errors import BackendUnavailable, ConfigError
from ..model import Finding, Label, normalize_text
from ..pool import ShotPool, ValidatedExample, utc_now
from ..predictor import PredictorConfig, predict_batch
from ..prompts import LABEL_PREFIX, LABEL_WORDS, REASONING_PREFIX, mark_span, render_instance
from .dataset import DatasetRecord, finding_for_record
from .metrics import CiBounds, Counts, Metrics, bootstrap_ci, compute_metrics, count_outcomes
from .sampling import SamplingPlan

_GENERATION_INSTRUCTIONS = (
    "You are an expert requirements engineer. You will be shown a requirement, "
    "a marked weak word, and the final validated label for that occurrence. "
    "Write one sentence explaining why the occurrence deserves that label. "
    'Reply with a line starting with "Reasoning:".'
)


@dataclass(frozen=True)
class RunConfig:
    """One Table-2-style configuration: pool size, CoT mode, shot count.

    pool_size 0 together with k 0 is the zero-shot row; the study grid uses
    pool sizes {20, 40, 80, 160, 320} with k=12, but any even sizes work for
    desk-scale checks.
    """

    pool_size: int = 0
    cot: bool = True
    k: int = 0
    approach: str = "oracle"
    seed: int = 0
    bootstrap_iterations: int = 10000
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.pool_size < 0 or self.pool_size % 2 != 0:
            raise ConfigError(f"pool_size must be a non-negative even integer, got {self.pool_size}")
        if self.k < 0 or self.k % 2 != 0:
            raise ConfigError(f"k must be a non-negative even integer, got {self.k}")
        if (self.pool_size == 0) != (self.k == 0):
            raise ConfigError(
                f"pool_size {self.pool_size} and k {self.k}: zero-shot requires both to be 0"
            )
        if self.bootstrap_iterations < 1:
            raise ConfigError("bootstrap_iterations must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")


@dataclass(frozen=True)
class RunResult:
    """Scores for one configuration over one fold (or all folds combined)."""

    config: RunConfig
    fold: int | None  # None for the aggregate over all folds
    counts: Counts
    metrics: Metrics
    ci: CiBounds
    n_predictions: int
    parse_failures: int


@dataclass(frozen=True)
class SimulationOutcome:
    config: RunConfig
    fold_results: tuple[RunResult, ...]
    aggregate: RunResult


def _extract_reasoning(raw: str) -> str:
    """Pull the reasoning sentence out of a generation completion.

    Accepts the usual grammar (a "Reasoning:" line, optionally followed by a
    "Label:" line) but falls back to the whole completion collapsed to one
    line, since generation backends are only asked for an explanation.
    """
    lines = [ln for ln in raw.splitlines() if not ln.lstrip().startswith("```")]
    collected: list[str] = []
    seen_prefix = False
    for line in lines:
        stripped = line.strip()
        if not seen_prefix:
            if stripped.startswith(REASONING_PREFIX):
                seen_prefix = True
                collected.append(stripped[len(REASONING_PREFIX) :].strip())
            continue
        if stripped.startswith(LABEL_PREFIX):
            break
        if stripped:
            collected.append(stripped)
    if seen_prefix:
        return " ".join(part for part in collected if part).strip()
    return " ".join(raw.split()).strip()


def generate_pool_reasoning(
    pool_records: list[DatasetRecord],
    backend,
    provider,
) -> list[ValidatedExample]:
    """Generate one label-conditioned explanation per record.

    Every record is attempted even if some fail, so one transient backend
    error does not hide the rest; failures are then reported together.
    """
    examples: list[ValidatedExample] = []
    failures: list[str] = []
    for record in pool_records:
        finding = finding_for_record(record)
        instance = render_instance(
            record.id,
            _marked_text(finding),
            finding.occurrence.catalog_entry,
        )
        user_text = f"{instance}\n{LABEL_PREFIX} {LABEL_WORDS[record.label]}"
        request = CompletionRequest(system_text=_GENERATION_INSTRUCTIONS, user_text=user_text)
        try:
            reasoning = _extract_reasoning(complete(request, backend))
            if not reasoning:
                raise BackendUnavailable("backend returned an empty explanation")
            examples.append(_simulated_example(record, reasoning, provider))
        except Exception as exc:  # noqa: BLE001 - per-record isolation
            failures.append(f"{record.id}: {exc}")
    if failures:
        raise BackendUnavailable(
            f"reasoning generation failed for {len(failures)} of "
            f"{len(pool_records)} records: " + "; ".join(failures[:5])
        )
    return examples


def _marked_text(finding: Finding) -> str:
    occ = finding.occurrence
    return mark_span(finding.requirement.text, occ.start, occ.end)


def _simulated_example(record: DatasetRecord, reasoning: str, provider) -> ValidatedExample:
    return ValidatedExample(
        example_id=f"sim-{record.id}",
        requirement_id=record.id,
        text=record.text,
        weak_word=record.weak_word,
        reasoning=reasoning,
        label=record.label,
        embedding=provider.embed(record.text),
        source="simulated",
        validated_at=utc_now(),
    )


def materialize_pool(
    pool_records: list[DatasetRecord],
    backend,
    provider,
    cot: bool,
) -> ShotPool:
    """Build an in-memory pool for one fold of a simulated run.

    Without CoT the prompt never renders reasoning, so no generation calls
    are made and records carry a fixed placeholder sentence (the pool schema
    requires one).
    """
    if cot:
        examples = generate_pool_reasoning(pool_records, backend, provider)
    else:
        examples = [
            _simulated_example(
                record,
                f"Validated as {LABEL_WORDS[record.label]} during simulation.",
                provider,
            )
            for record in pool_records
        ]
    pool = ShotPool(dim=provider.dim)
    for example in examples:
        pool.append_validated(example)
    return pool


def _score(
    pairs: list[tuple[Label, Label]],
    config: RunConfig,
    fold: int | None,
    parse_failures: int,
) -> RunResult:
    counts = count_outcomes(pairs)
    return RunResult(
        config=config,
        fold=fold,
        counts=counts,
        metrics=compute_metrics(counts),
        ci=bootstrap_ci(pairs, iterations=config.bootstrap_iterations, seed=config.seed),
        n_predictions=len(pairs),
        parse_failures=parse_failures,
    )


def simulate_run(
    dataset: list[DatasetRecord],
    plan: SamplingPlan,
    config: RunConfig,
    backend,
    provider,
) -> SimulationOutcome:
    """Run one configuration over every fold of the plan and aggregate.

    Fold i's pool predicts the plan's assigned evaluation fold; evaluation
    instances are processed in id order so scores are independent of any
    prediction parallelism. A prediction that errors out (unparseable
    output, backend failure) counts as a parse failure and scores as a
    not_defect prediction — failures stay visible instead of vanishing.
    """
    by_id = {record.id: record for record in dataset}
    fold_results: list[RunResult] = []
    all_pairs: list[tuple[Label, Label]] = []
    total_failures = 0

    for fold_index in range(len(plan.folds)):
        if config.pool_size == 0:
            pool = ShotPool(dim=provider.dim)
        else:
            sizes = plan.nested_pools[fold_index]
            if config.pool_size not in sizes:
                raise ConfigError(
                    f"plan has no pool of size {config.pool_size} for fold {fold_index} "
                    f"(available: {sorted(sizes)})"
                )
            pool_records = [_lookup(by_id, rid) for rid in sizes[config.pool_size]]
            pool = materialize_pool(pool_records, backend, provider, config.cot)

        eval_fold = plan.assignment[fold_index]
        eval_records = sorted(
            (_lookup(by_id, rid) for rid in plan.folds[eval_fold]),
            key=lambda record: record.id,
        )
        findings = [finding_for_record(record) for record in eval_records]
        predictor_config = PredictorConfig(
            provider=provider, backend=backend, k=config.k, cot=config.cot
        )
        items = predict_batch(findings, pool, predictor_config, jobs=config.jobs)

        pairs: list[tuple[Label, Label]] = []
        failures = 0
        for record, item in zip(eval_records, items):
            if item.error is None:
                predicted = item.result.prediction.label
            else:
                predicted = Label.NOT_DEFECT
                failures += 1
            pairs.append((record.label, predicted))

        fold_results.append(_score(pairs, config, fold_index, failures))
        all_pairs.extend(pairs)
        total_failures += failures

    aggregate = _score(all_pairs, config, None, total_failures)
    return SimulationOutcome(
        config=config, fold_results=tuple(fold_results), aggregate=aggregate
    )


def _lookup(by_id: dict[str, DatasetRecord], record_id: str) -> DatasetRecord:
    try:
        return by_id[record_id]
    except KeyError:
        raise ConfigError(f"plan references unknown record id {record_id!r}") from None


def oracle_labels_for(dataset: list[DatasetRecord]) -> dict[tuple[str, str], Label]:
    """Gold-label map for an oracle backend, keyed like its script lookups.

    Keys use the normalized weak word because that is what prompt instances
    carry on their "Weak word:" line.
    """
    return {
        (record.id, normalize_text(record.weak_word)): record.label for record in dataset
    }


def run_configurations(
    dataset: list[DatasetRecord],
    plan: SamplingPlan,
    configs: list[RunConfig],
    backend,
    provider,
) -> list[SimulationOutcome]:
    return [simulate_run(dataset, plan, config, backend, provider) for config in configs]

"""One-stop prediction: embed target, retrieve shots, prompt, complete, parse."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .backends import CompletionRequest
from .errors import DimensionMismatch, MissingLabel, UnknownLabel
from .model import Finding, Prediction
from .pool import RetrievedShot, ShotPool
from .prompts import FORMAT_REMINDER, PromptBundle, build_prompt, parse_output


@dataclass
class PredictorConfig:
    """How to predict: shot count, CoT mode, and the two pluggable backends."""

    provider: object
    backend: object
    k: int = 12
    cot: bool = True
    max_output_tokens: int = 256

    def __post_init__(self) -> None:
        if self.k < 0 or self.k % 2 != 0:
            raise ValueError(f"k must be a non-negative even integer, got {self.k}")


@dataclass(frozen=True)
class PredictionResult:
    """A prediction plus its full provenance for audit and UI display."""

    prediction: Prediction
    shots_used: tuple[RetrievedShot, ...]
    prompt: PromptBundle


@dataclass(frozen=True)
class BatchItem:
    """Per-finding outcome of a batch: either a result or an isolated error."""

    finding: Finding
    result: PredictionResult | None = None
    error: Exception | None = field(default=None, compare=False)


def predict(finding: Finding, pool: ShotPool, config: PredictorConfig) -> PredictionResult:
    """Predict one finding against a pool snapshot; never mutates the pool.

    With an empty pool or k=0 this is the zero-shot path: no embedding, no
    retrieval. Otherwise shots come from balanced retrieval that excludes
    the target's own requirement id.
    """
    shots: list[RetrievedShot] = []
    if config.k > 0 and len(pool) > 0:
        if pool.dim is not None and config.provider.dim != pool.dim:
            raise DimensionMismatch(
                f"provider dim {config.provider.dim} != pool dim {pool.dim}"
            )
        target = config.provider.embed(finding.requirement.text)
        shots = pool.retrieve_balanced(
            target, config.k, exclude_requirement_id=finding.requirement.id
        )
    prompt = build_prompt(finding, shots, config.cot)
    request = CompletionRequest(
        system_text=prompt.system_text,
        user_text=prompt.user_text,
        max_output_tokens=config.max_output_tokens,
    )
    raw = config.backend.complete(request)
    try:
        prediction = parse_output(raw, config.cot)
    except (MissingLabel, UnknownLabel):
        if getattr(config.backend, "deterministic", True):
            raise
        # One re-ask with an explicit format reminder, then give up.
        retry = CompletionRequest(
            system_text=prompt.system_text,
            user_text=f"{prompt.user_text}\n\n{FORMAT_REMINDER}",
            max_output_tokens=config.max_output_tokens,
        )
        prediction = parse_output(config.backend.complete(retry), config.cot)
    return PredictionResult(
        prediction=prediction, shots_used=tuple(shots), prompt=prompt
    )


def predict_batch(
    findings: list[Finding],
    pool: ShotPool,
    config: PredictorConfig,
    jobs: int = 1,
) -> list[BatchItem]:
    """Predict many findings against one fixed pool snapshot.

    Results align with the input order regardless of parallelism; a failing
    item becomes a BatchItem carrying its error instead of aborting the run.
    """
    snapshot = pool.snapshot()

    def run_one(finding: Finding) -> BatchItem:
        try:
            return BatchItem(finding=finding, result=predict(finding, snapshot, config))
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            return BatchItem(finding=finding, error=exc)

    if jobs <= 1 or len(findings) <= 1:
        return [run_one(finding) for finding in findings]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(run_one, findings))

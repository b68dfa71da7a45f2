"""Domain exceptions shared across the package."""


class ReqsmellError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownLabel(ReqsmellError):
    """A label token could not be mapped to defect / not_defect."""


class DuplicateEntry(ReqsmellError):
    """Two catalog lines normalize to the same entry."""


class EmptyCatalog(ReqsmellError):
    """A catalog file contains no usable entries."""


class ProviderError(ReqsmellError):
    """An embedding provider failed (network, auth, bad response)."""


class DimensionMismatch(ReqsmellError):
    """Vector dimensions disagree where they must match."""


class ZeroVector(ReqsmellError):
    """Cosine similarity is undefined for an all-zero vector."""


class DuplicateExampleId(ReqsmellError):
    """An example with this id is already in the pool."""


class CorruptRecord(ReqsmellError):
    """A persisted pool record could not be read back."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"corrupt pool record at line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class MissingLabel(ReqsmellError):
    """Backend output contains no label line."""


class MissingReasoning(ReqsmellError):
    """CoT output contains no reasoning line."""


class BackendUnavailable(ReqsmellError):
    """A completion backend kept failing after retries."""


class ScriptMiss(ReqsmellError):
    """A scripted/oracle backend has no entry for the requested finding."""


class ConfigError(ReqsmellError):
    """A backend or provider configuration is invalid."""


class DuplicateRequirementId(ReqsmellError):
    """A requirement with this id was already ingested."""


class UnknownItem(ReqsmellError):
    """No review item with this id exists."""


class AlreadyValidated(ReqsmellError):
    """The review item was validated before."""


class EmptyReasoning(ReqsmellError):
    """A validation must carry a non-empty final reasoning."""


class IndivisibleDataset(ReqsmellError):
    """The dataset cannot be split into the requested stratified folds."""


class EmptyPredictions(ReqsmellError):
    """Bootstrap resampling needs at least one prediction."""

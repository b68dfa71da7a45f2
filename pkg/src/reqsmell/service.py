"""HTTP review service: the human half of the collaboration loop.

Requirements come in as batches, each detected weak-word occurrence becomes
a pending review item, and items are served FIFO with a prediction computed
against the *current* pool — so every accepted or corrected item immediately
shapes the next prediction. Validation is the only pool-mutating path and is
serialized through one writer lock.

State layout: requirements and items live in one JSON state file (when
configured), the pool in its own JSONL — the pool file is the contract
shared with the evaluation harness. Predictions are derived data and are
never persisted; a restarted service recomputes them on first serve.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .detector import WeakWordCatalog, extract_findings
from .errors import (
    AlreadyValidated,
    DuplicateRequirementId,
    EmptyReasoning,
    UnknownItem,
)
from .model import Finding, Label, Prediction, Requirement, WeakWordOccurrence, parse_label
from .pool import RetrievedShot, ShotPool, ValidatedExample, record_to_json, utc_now
from .predictor import PredictorConfig, predict
from .prompts import mark_span


@dataclass
class ServiceSettings:
    """Everything a running service needs; built by the CLI or by tests."""

    catalog: WeakWordCatalog
    pool: ShotPool
    provider: object
    backend: object
    k: int = 12
    cot: bool = True
    state_path: str | Path | None = None


@dataclass
class ReviewItem:
    """One finding moving through pending → validated."""

    item_id: str
    finding: Finding
    seq: int
    status: str = "pending"
    # Serve-time prediction cache, refreshed whenever the pool has grown.
    prediction: Prediction | None = None
    shots_used: tuple[RetrievedShot, ...] = ()
    k_used: int = 0
    pool_version: int = -1
    # Validation outcome.
    final_label: Label | None = None
    final_reasoning: str | None = None
    corrected: dict | None = None
    source: str | None = None

    def to_json(self, include_prediction: bool = True) -> dict:
        occ = self.finding.occurrence
        requirement = self.finding.requirement
        doc = {
            "item_id": self.item_id,
            "status": self.status,
            "requirement_id": requirement.id,
            "text": requirement.text,
            "weak_word": occ.catalog_entry,
            "span": {"start": occ.start, "end": occ.end},
            "marked_text": mark_span(requirement.text, occ.start, occ.end),
        }
        if include_prediction and self.prediction is not None:
            doc["prediction"] = {
                "label": self.prediction.label.value,
                "reasoning": self.prediction.reasoning,
            }
            doc["shots_used"] = [
                {
                    "example_id": shot.example.example_id,
                    "similarity": shot.similarity,
                    "label": shot.example.label.value,
                    "text": shot.example.text,
                    "weak_word": shot.example.weak_word,
                }
                for shot in self.shots_used
            ]
            doc["k_used"] = self.k_used
        if self.status == "validated":
            doc["final_label"] = self.final_label.value
            doc["final_reasoning"] = self.final_reasoning
            doc["corrected"] = self.corrected
            doc["source"] = self.source
        return doc


class ServiceError(Exception):
    """Domain error with a wire shape: JSON {code, message} + HTTP status."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class ReviewService:
    """Transport-free core; the FastAPI layer below is a thin adapter."""

    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        self.pool = settings.pool
        self._requirements: dict[str, Requirement] = {}
        self._items: dict[str, ReviewItem] = {}
        self._order: list[str] = []  # item ids in creation order (FIFO)
        self._next_seq = 1
        self._write_lock = threading.Lock()
        if settings.state_path is not None:
            self._load_state()

    # -- ingest ----------------------------------------------------------

    def ingest(self, requirements: list[Requirement]) -> list[ReviewItem]:
        """Register a batch and queue one pending item per finding.

        The batch is atomic: a duplicate id anywhere (within the batch or
        against already-stored requirements) rejects the whole batch.
        """
        with self._write_lock:
            seen: set[str] = set()
            for requirement in requirements:
                if requirement.id in self._requirements or requirement.id in seen:
                    raise DuplicateRequirementId(
                        f"requirement id already ingested: {requirement.id}"
                    )
                seen.add(requirement.id)
            created: list[ReviewItem] = []
            for requirement in requirements:
                self._requirements[requirement.id] = requirement
                for finding in extract_findings(requirement, self.settings.catalog):
                    item = ReviewItem(
                        item_id=f"item-{self._next_seq}",
                        finding=finding,
                        seq=self._next_seq,
                    )
                    self._next_seq += 1
                    self._items[item.item_id] = item
                    self._order.append(item.item_id)
                    created.append(item)
            self._save_state()
            return created

    # -- serving ---------------------------------------------------------

    def next_item(self) -> ReviewItem | None:
        """Oldest pending item with a fresh prediction; None when drained."""
        for item_id in self._order:
            item = self._items[item_id]
            if item.status == "pending":
                self._ensure_prediction(item)
                return item
        return None

    def get_item(self, item_id: str) -> ReviewItem:
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(f"no such item: {item_id}")
        if item.status == "pending":
            self._ensure_prediction(item)
        return item

    def _ensure_prediction(self, item: ReviewItem) -> None:
        """Memoize the prediction, recomputing after any pool growth."""
        version = len(self.pool)
        if item.prediction is not None and item.pool_version == version:
            return
        config = PredictorConfig(
            provider=self.settings.provider,
            backend=self.settings.backend,
            k=self.settings.k,
            cot=self.settings.cot,
        )
        result = predict(item.finding, self.pool, config)
        item.prediction = result.prediction
        item.shots_used = result.shots_used
        item.k_used = result.prompt.k_used
        item.pool_version = version

    # -- validation ------------------------------------------------------

    def validate(self, item_id: str, final_label: Label, final_reasoning: str) -> dict:
        """Close out one item; exactly one pool record per validated item."""
        with self._write_lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownItem(f"no such item: {item_id}")
            if item.status == "validated":
                raise AlreadyValidated(f"item already validated: {item_id}")
            if not final_reasoning.strip():
                raise EmptyReasoning("final_reasoning must be non-empty")
            self._ensure_prediction(item)
            corrected = {
                "label": final_label != item.prediction.label,
                "reasoning": final_reasoning != item.prediction.reasoning,
            }
            source = "user_corrected" if any(corrected.values()) else "llm_accepted"
            occ = item.finding.occurrence
            requirement = item.finding.requirement
            example = ValidatedExample(
                example_id=item.item_id,
                requirement_id=requirement.id,
                text=requirement.text,
                weak_word=occ.catalog_entry,
                reasoning=final_reasoning,
                label=final_label,
                embedding=self.settings.provider.embed(requirement.text),
                source=source,
                validated_at=utc_now(),
            )
            self.pool.append_validated(example)
            item.status = "validated"
            item.final_label = final_label
            item.final_reasoning = final_reasoning
            item.corrected = corrected
            item.source = source
            self._save_state()
            return {
                "pool_size_after": len(self.pool),
                "source": source,
                "corrected": corrected,
            }

    # -- reporting -------------------------------------------------------

    def stats(self) -> dict:
        items = list(self._items.values())
        validated = [item for item in items if item.status == "validated"]
        corrected = [item for item in validated if item.source == "user_corrected"]
        return {
            "pending": sum(1 for item in items if item.status == "pending"),
            "validated": len(validated),
            "correction_rate": len(corrected) / len(validated) if validated else 0.0,
            "pool": self.pool.stats(),
        }

    def pool_records(self, limit: int | None = None) -> list[dict]:
        """Most recent pool records (append order), capped at `limit`."""
        records = self.pool.records
        if limit is not None:
            records = records[-limit:] if limit > 0 else []
        return [record_to_json(record) for record in records]

    # -- persistence -----------------------------------------------------

    def _save_state(self) -> None:
        if self.settings.state_path is None:
            return
        doc = {
            "next_seq": self._next_seq,
            "requirements": [
                {"id": r.id, "text": r.text} for r in self._requirements.values()
            ],
            "items": [
                {
                    "item_id": item.item_id,
                    "seq": item.seq,
                    "requirement_id": item.finding.requirement.id,
                    "start": item.finding.occurrence.start,
                    "end": item.finding.occurrence.end,
                    "catalog_entry": item.finding.occurrence.catalog_entry,
                    "status": item.status,
                    "final_label": item.final_label.value if item.final_label else None,
                    "final_reasoning": item.final_reasoning,
                    "corrected": item.corrected,
                    "source": item.source,
                }
                for item_id in self._order
                for item in [self._items[item_id]]
            ],
        }
        path = Path(self.settings.state_path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=2)
        tmp.replace(path)

    def _load_state(self) -> None:
        path = Path(self.settings.state_path)
        if not path.exists():
            return
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        self._next_seq = doc["next_seq"]
        for entry in doc["requirements"]:
            self._requirements[entry["id"]] = Requirement(id=entry["id"], text=entry["text"])
        for entry in doc["items"]:
            requirement = self._requirements[entry["requirement_id"]]
            occ = WeakWordOccurrence(
                surface=requirement.text[entry["start"] : entry["end"]],
                catalog_entry=entry["catalog_entry"],
                start=entry["start"],
                end=entry["end"],
            )
            item = ReviewItem(
                item_id=entry["item_id"],
                finding=Finding(requirement=requirement, occurrence=occ),
                seq=entry["seq"],
                status=entry["status"],
                final_label=Label(entry["final_label"]) if entry["final_label"] else None,
                final_reasoning=entry["final_reasoning"],
                corrected=entry["corrected"],
                source=entry["source"],
            )
            self._items[item.item_id] = item
            self._order.append(item.item_id)


# -- HTTP layer -----------------------------------------------------------


class RequirementIn(BaseModel):
    id: str
    text: str


class IngestRequest(BaseModel):
    requirements: list[RequirementIn]


class ValidationRequest(BaseModel):
    final_label: str
    final_reasoning: str


def create_app(settings: ServiceSettings):
    """FastAPI app over a ReviewService; errors always render {code, message}."""
    service = ReviewService(settings)
    app = FastAPI(title="requirement review service")
    app.state.service = service
    # The review page is a static file on another origin; the API carries no
    # credentials, so a permissive policy is fine.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def error_response(status: int, code: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"code": code, "message": message})

    @app.exception_handler(ServiceError)
    async def handle_service_error(request: Request, exc: ServiceError):
        return error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return error_response(422, "invalid_request", str(exc.errors()[:1]))

    def run(call):
        """Map domain errors to wire errors in one place."""
        try:
            return call()
        except DuplicateRequirementId as exc:
            raise ServiceError(409, "duplicate_requirement", str(exc)) from exc
        except UnknownItem as exc:
            raise ServiceError(404, "unknown_item", str(exc)) from exc
        except AlreadyValidated as exc:
            raise ServiceError(409, "already_validated", str(exc)) from exc
        except EmptyReasoning as exc:
            raise ServiceError(422, "empty_reasoning", str(exc)) from exc
        except ServiceError:
            raise
        except Exception as exc:  # noqa: BLE001 - surface, don't crash the app
            raise ServiceError(502, "backend_error", str(exc)) from exc

    @app.post("/requirements")
    def post_requirements(body: IngestRequest):
        requirements = [Requirement(id=r.id, text=r.text) for r in body.requirements]
        items = run(lambda: service.ingest(requirements))
        return {
            "ingested": len(requirements),
            "items": [item.to_json(include_prediction=False) for item in items],
        }

    @app.get("/items/next")
    def get_next_item():
        item = run(service.next_item)
        if item is None:
            return Response(status_code=204)
        return item.to_json()

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        return run(lambda: service.get_item(item_id)).to_json()

    @app.post("/items/{item_id}/validation")
    def post_validation(item_id: str, body: ValidationRequest):
        def call():
            try:
                label = parse_label(body.final_label)
            except Exception as exc:
                raise ServiceError(422, "invalid_label", str(exc)) from exc
            return service.validate(item_id, label, body.final_reasoning)

        return run(call)

    @app.get("/stats")
    def get_stats():
        return service.stats()

    @app.get("/pool/records")
    def get_pool_records(limit: int | None = None):
        return {"records": run(lambda: service.pool_records(limit))}

    return app

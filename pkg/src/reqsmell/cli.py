"""Command line entry point: detect, predict, serve, simulate, plan, pool.

Conventions: findings/predictions/stats go to stdout (JSONL or JSON) so they
pipe cleanly; logs go to stderr. Exit codes: 0 success, 1 usage error,
2 runtime error. A JSON config file may supply any flag's value; explicit
flags win; secrets only ever come from the environment.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .backends import OracleBackend, backend_from_config
from .detector import WeakWordCatalog, catalog_from_words, detect, extract_findings, load_catalog
from .embeddings import provider_from_config
from .errors import ConfigError, ReqsmellError
from .harness.dataset import prepare_dataset, read_dataset
from .harness.report import emit_report
from .harness.sampling import DEFAULT_POOL_SIZES, build_sampling_plan, plan_to_json, save_plan
from .harness.simulate import RunConfig, oracle_labels_for, simulate_run
from .model import Finding, Requirement
from .pool import ShotPool, load_pool
from .predictor import PredictorConfig, predict_batch

log = logging.getLogger("reqsmell")

DEFAULT_CATALOG_PATH = Path(__file__).parent / "data" / "default_catalog.txt"

_RUN_CONFIG_KEYS = {
    "pool_size",
    "cot",
    "k",
    "approach",
    "seed",
    "bootstrap_iterations",
    "jobs",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for runtime."""

    def error(self, message):  # noqa: A002 - argparse API
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _json_value(value: str | dict) -> dict:
    """Inline JSON object (starts with '{') or a path to a JSON file."""
    if isinstance(value, dict):
        return value
    text = value.strip()
    if text.startswith("{"):
        return json.loads(text)
    with open(value, encoding="utf-8") as fh:
        return json.load(fh)


def _file_config(args) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    config = _json_value(args.config)
    if not isinstance(config, dict):
        raise ConfigError("config file must hold a JSON object")
    return config


def _setting(args, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    return config.get(key, default)


def _catalog(args, config: dict) -> WeakWordCatalog:
    return load_catalog(_setting(args, config, "catalog", DEFAULT_CATALOG_PATH))


def _provider(args, config: dict):
    provider_cfg = _setting(args, config, "provider", {})
    return provider_from_config(_json_value(provider_cfg) if provider_cfg else {})


def _backend(args, config: dict):
    backend_cfg = _setting(args, config, "backend")
    if backend_cfg is None:
        return None
    return backend_from_config(_json_value(backend_cfg))


def _read_rows(path: str) -> list[dict]:
    """Rows from JSONL (default) or CSV; only 'id' and 'text' are required."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        with open(p, encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    with open(p, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _findings_from_row(row: dict, catalog: WeakWordCatalog) -> list[Finding]:
    """The row's annotated occurrence when present, else every catalog hit."""
    requirement = Requirement(id=str(row["id"]), text=row["text"])
    weak_word = row.get("weak_word")
    if weak_word:
        occurrences = detect(requirement.text, catalog_from_words([weak_word]))
        if not occurrences:
            raise ConfigError(
                f"requirement {requirement.id}: weak word {weak_word!r} not found in text"
            )
        return [Finding(requirement=requirement, occurrence=occurrences[0])]
    return extract_findings(requirement, catalog)


# -- subcommands -----------------------------------------------------------


def cmd_detect(args) -> int:
    config = _file_config(args)
    catalog = _catalog(args, config)
    count = 0
    for row in _read_rows(args.dataset):
        requirement = Requirement(id=str(row["id"]), text=row["text"])
        for finding in extract_findings(requirement, catalog):
            occ = finding.occurrence
            print(
                json.dumps(
                    {
                        "requirement_id": requirement.id,
                        "weak_word": occ.catalog_entry,
                        "surface": occ.surface,
                        "start": occ.start,
                        "end": occ.end,
                    },
                    ensure_ascii=False,
                )
            )
            count += 1
    log.info("detected %d findings", count)
    return 0


def cmd_predict(args) -> int:
    config = _file_config(args)
    catalog = _catalog(args, config)
    provider = _provider(args, config)
    backend = _backend(args, config)
    if backend is None:
        args.parser.error("predict requires a backend (--backend or config file)")
    k = int(_setting(args, config, "k", 12))
    cot = _setting(args, config, "cot", True)
    jobs = int(_setting(args, config, "jobs", 1))

    pool_path = _setting(args, config, "pool")
    if pool_path is not None:
        pool = load_pool(pool_path, expected_dim=provider.dim)
    else:
        pool = ShotPool(dim=provider.dim)
    if k > 0 and len(pool) == 0:
        log.warning("pool is empty or missing; proceeding zero-shot")

    findings = [
        finding
        for row in _read_rows(args.dataset)
        for finding in _findings_from_row(row, catalog)
    ]
    predictor_config = PredictorConfig(provider=provider, backend=backend, k=k, cot=cot)
    items = predict_batch(findings, pool, predictor_config, jobs=jobs)
    failures = 0
    for item in items:
        occ = item.finding.occurrence
        doc = {
            "requirement_id": item.finding.requirement.id,
            "weak_word": occ.catalog_entry,
        }
        if item.error is None:
            doc["label"] = item.result.prediction.label.value
            doc["reasoning"] = item.result.prediction.reasoning
            doc["k_used"] = item.result.prompt.k_used
        else:
            doc["error"] = str(item.error)
            failures += 1
        print(json.dumps(doc, ensure_ascii=False))
    log.info("predicted %d findings (%d failed)", len(items), failures)
    return 0


def cmd_serve(args) -> int:
    # Imported here so plain detect/predict/simulate runs skip the web stack.
    import uvicorn

    from .service import ServiceSettings, create_app

    config = _file_config(args)
    provider = _provider(args, config)
    backend = _backend(args, config)
    if backend is None:
        args.parser.error("serve requires a backend (--backend or config file)")
    pool_path = _setting(args, config, "pool")
    if pool_path is None:
        log.warning("no --pool path given; validated examples will not persist")
        pool = ShotPool(dim=provider.dim)
    else:
        pool = load_pool(pool_path, expected_dim=provider.dim)
    settings = ServiceSettings(
        catalog=_catalog(args, config),
        pool=pool,
        provider=provider,
        backend=backend,
        k=int(_setting(args, config, "k", 12)),
        cot=_setting(args, config, "cot", True),
        state_path=_setting(args, config, "state"),
    )
    app = create_app(settings)
    uvicorn.run(
        app,
        host=_setting(args, config, "host", "127.0.0.1"),
        port=int(_setting(args, config, "port", 8000)),
        log_level="info",
    )
    return 0


def _run_configs(path: str) -> list[RunConfig]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc["configs"] if isinstance(doc, dict) else doc
    configs = []
    for i, entry in enumerate(entries):
        unknown = set(entry) - _RUN_CONFIG_KEYS
        if unknown:
            raise ConfigError(f"config entry {i}: unknown keys {sorted(unknown)}")
        configs.append(RunConfig(**entry))
    if not configs:
        raise ConfigError("configs file lists no run configurations")
    return configs


def cmd_simulate(args) -> int:
    config = _file_config(args)
    catalog = _catalog(args, config)
    provider = _provider(args, config)
    records = read_dataset(args.dataset)
    prepared = prepare_dataset(records, seed=args.plan_seed, catalog=catalog)
    log.info("prepared %d of %d records", len(prepared), len(records))

    run_configs = _run_configs(args.configs)
    sizes = tuple(sorted({rc.pool_size for rc in run_configs if rc.pool_size > 0}))
    plan = build_sampling_plan(prepared, seed=args.plan_seed, pool_sizes=sizes)

    backend = _backend(args, config)
    if backend is None:
        backend = OracleBackend(oracle_labels_for(prepared))
        log.info("no backend configured; using gold-label oracle")

    results = []
    for run_config in run_configs:
        outcome = simulate_run(prepared, plan, run_config, backend, provider)
        aggregate = outcome.aggregate
        log.info(
            "pool=%s cot=%s k=%d: P=%.3f R=%.3f F1=%.3f (n=%d, parse_failures=%d)",
            run_config.pool_size or "--",
            "yes" if run_config.cot else "no",
            run_config.k,
            aggregate.metrics.precision,
            aggregate.metrics.recall,
            aggregate.metrics.f1,
            aggregate.n_predictions,
            aggregate.parse_failures,
        )
        results.append(aggregate)
    emit_report(results, args.format, args.out)
    log.info("wrote %s report to %s", args.format, args.out)
    return 0


def cmd_plan(args) -> int:
    config = _file_config(args)
    catalog = _catalog(args, config)
    records = read_dataset(args.dataset)
    prepared = prepare_dataset(records, seed=args.seed, catalog=catalog)
    log.info("prepared %d of %d records", len(prepared), len(records))
    sizes = tuple(int(s) for s in args.pool_sizes.split(",")) if args.pool_sizes else DEFAULT_POOL_SIZES
    plan = build_sampling_plan(prepared, seed=args.seed, pool_sizes=sizes)
    if args.out:
        save_plan(plan, args.out)
        log.info("wrote plan to %s", args.out)
    else:
        print(json.dumps(plan_to_json(plan), indent=2, sort_keys=True))
    return 0


def cmd_pool_stats(args) -> int:
    if not Path(args.pool).exists():
        raise ConfigError(f"pool file not found: {args.pool}")
    pool = load_pool(args.pool)
    print(json.dumps(pool.stats(), indent=2))
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="reqsmell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def common(p: argparse.ArgumentParser, backendish: bool = False):
        p.add_argument("--config", help="JSON file (or inline JSON) supplying any flag")
        p.add_argument("--catalog", help="weak-word catalog file (one entry per line)")
        p.set_defaults(parser=p)
        if backendish:
            p.add_argument("--provider", help="embedding provider config (JSON or path)")
            p.add_argument("--backend", help="completion backend config (JSON or path)")
            p.add_argument("--k", type=int, help="shots per prompt (even, default 12)")
            p.add_argument(
                "--cot",
                action=argparse.BooleanOptionalAction,
                help="request reasoning before the label (default on)",
            )

    p_detect = sub.add_parser("detect", help="print weak-word findings as JSONL")
    p_detect.add_argument("dataset", help="JSONL/CSV file with id and text fields")
    common(p_detect)
    p_detect.set_defaults(func=cmd_detect, parser=p_detect)

    p_predict = sub.add_parser("predict", help="predict labels for a dataset's findings")
    p_predict.add_argument("dataset", help="JSONL/CSV file with id and text fields")
    p_predict.add_argument("--pool", help="validated example pool (JSONL)")
    p_predict.add_argument("--jobs", type=int, help="parallel prediction workers")
    common(p_predict, backendish=True)
    p_predict.set_defaults(func=cmd_predict, parser=p_predict)

    p_serve = sub.add_parser("serve", help="run the review HTTP service")
    p_serve.add_argument("--host", help="bind address (default 127.0.0.1)")
    p_serve.add_argument("--port", type=int, help="bind port (default 8000)")
    p_serve.add_argument("--pool", help="pool JSONL path (grown by validations)")
    p_serve.add_argument("--state", help="service state file (requirements/items)")
    common(p_serve, backendish=True)
    p_serve.set_defaults(func=cmd_serve, parser=p_serve)

    p_sim = sub.add_parser("simulate", help="run the evaluation harness and write a report")
    p_sim.add_argument("dataset", help="annotated dataset (JSONL/CSV)")
    p_sim.add_argument("--plan-seed", type=int, required=True, help="seed for prepare + plan")
    p_sim.add_argument("--configs", required=True, help="JSON file listing run configurations")
    p_sim.add_argument("--out", required=True, help="report output path")
    p_sim.add_argument("--format", choices=("csv", "json"), default="csv")
    common(p_sim, backendish=True)
    p_sim.set_defaults(func=cmd_simulate, parser=p_sim)

    p_plan = sub.add_parser("plan", help="write a sampling plan for a dataset")
    p_plan.add_argument("dataset", help="annotated dataset (JSONL/CSV)")
    p_plan.add_argument("--seed", type=int, required=True)
    p_plan.add_argument("--pool-sizes", help="comma-separated sizes (default 20,40,80,160,320)")
    p_plan.add_argument("--out", help="plan JSON path (default: stdout)")
    common(p_plan)
    p_plan.set_defaults(func=cmd_plan, parser=p_plan)

    p_pool = sub.add_parser("pool", help="pool utilities")
    pool_sub = p_pool.add_subparsers(dest="pool_command", required=True, metavar="action")
    p_stats = pool_sub.add_parser("stats", help="print pool statistics as JSON")
    p_stats.add_argument("--pool", required=True, help="pool JSONL path")
    p_stats.set_defaults(func=cmd_pool_stats, parser=p_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SystemExit as exc:  # a handler escalated to parser.error()
        return int(exc.code or 0)
    except ReqsmellError as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end acceptance checks with explicit runtime budgets.

Each test states its own time budget and asserts it, so a regression that
makes a pipeline piece quadratic shows up here, not in CI wall-clock drift.
The live smoke test at the bottom needs real credentials and is skipped
unless explicitly enabled through the environment.
"""

from __future__ import annotations

import os
import random
import socket
import time
from collections import Counter

import pytest

from reqsmell import (
    DeterministicLocalProvider,
    Label,
    OracleBackend,
    ShotPool,
    build_prompt,
    load_pool,
    parse_output,
)
from reqsmell.prompts import render_answer
from reqsmell.harness.dataset import DatasetRecord, finding_for_record, prepare_dataset
from reqsmell.harness.metrics import (
    CiBounds,
    Counts,
    bootstrap_ci,
    compute_metrics,
    count_outcomes,
    f1_from_pr,
)
from reqsmell.harness.sampling import DEFAULT_POOL_SIZES, build_sampling_plan
from reqsmell.harness.simulate import RunConfig, oracle_labels_for, simulate_run
from reqsmell.predictor import PredictorConfig, predict_batch

from helpers import WORDS, make_example, make_record, sentence, toy_dataset

D, N = Label.DEFECT, Label.NOT_DEFECT

# Published operating points (precision, recall, f1) the metric layer must
# reproduce: recomputing F1 from each row's P and R lands on the printed
# value within rounding distance.
SCORE_ROWS = [
    (0.573, 0.997, 0.728),
    (0.553, 0.986, 0.709),
    (0.679, 0.972, 0.799),
    (0.634, 0.902, 0.745),
    (0.686, 0.967, 0.803),
    (0.647, 0.891, 0.750),
    (0.685, 0.968, 0.802),
    (0.655, 0.910, 0.761),
    (0.665, 0.897, 0.764),
    (0.682, 0.908, 0.779),
]


class budget:
    """Context manager asserting its body ran within `seconds`."""

    def __init__(self, seconds: float):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc == (None, None, None):
            assert self.elapsed < self.seconds, (
                f"ran {self.elapsed:.2f}s, budget {self.seconds}s"
            )
        return False


def test_f1_recomputes_from_published_precision_recall():
    with budget(1.0):
        for precision, recall, printed_f1 in SCORE_ROWS:
            assert f1_from_pr(precision, recall) == pytest.approx(printed_f1, abs=0.001)


def _messy_dataset() -> list[DatasetRecord]:
    """200 rows: duplicate requirement ids planted on both classes, 50/150 imbalance."""
    rng = random.Random(1234)
    rows: list[DatasetRecord] = []

    def two_word_text(w1: str, w2: str) -> str:
        return (
            f"The {rng.choice(['gateway', 'sensor', 'modem'])} shall report "
            f"{w1} faults under {w2} load conditions."
        )

    for i in range(50):
        w1, w2 = WORDS[i % 5], WORDS[(i + 1) % 5]
        text = two_word_text(w1, w2)
        rows.append(DatasetRecord(id=f"D{i:03d}", text=text, weak_word=w1, label=D))
        if i < 10:  # a second occurrence judged benign, same requirement
            rows.append(DatasetRecord(id=f"D{i:03d}", text=text, weak_word=w2, label=N))
    for i in range(130):
        w1, w2 = WORDS[i % 5], WORDS[(i + 2) % 5]
        text = two_word_text(w1, w2)
        rows.append(DatasetRecord(id=f"N{i:03d}", text=text, weak_word=w1, label=N))
        if i < 10:
            rows.append(DatasetRecord(id=f"N{i:03d}", text=text, weak_word=w2, label=N))
    assert len(rows) == 200
    return rows


def test_preparation_dedups_and_balances():
    rows = _messy_dataset()
    with budget(1.0):
        first = prepare_dataset(rows, seed=99)
        second = prepare_dataset(rows, seed=99)
    assert first == second

    ids = [r.id for r in first]
    assert len(ids) == len(set(ids)), "at most one record per requirement"
    counts = Counter(r.label for r in first)
    assert counts[D] == counts[N] == 50
    # every requirement with a defect-bearing occurrence survives as defect
    kept = {r.id: r.label for r in first}
    for i in range(50):
        assert kept[f"D{i:03d}"] is D


def test_sampling_plan_at_full_scale():
    data = toy_dataset(1266)
    labels = {r.id: r.label for r in data}
    with budget(1.0):
        plan = build_sampling_plan(data, seed=5, pool_sizes=DEFAULT_POOL_SIZES)
    assert plan == build_sampling_plan(data, seed=5, pool_sizes=DEFAULT_POOL_SIZES)

    assert [len(fold) for fold in plan.folds] == [422, 422, 422]
    assert sorted(rid for fold in plan.folds for rid in fold) == sorted(labels)
    for fold, pools in zip(plan.folds, plan.nested_pools):
        fold_counts = Counter(labels[rid] for rid in fold)
        assert fold_counts[D] == fold_counts[N] == 211
        chain = [set(pools[size]) for size in (20, 40, 80, 160, 320)]
        assert chain[0] < chain[1] < chain[2] < chain[3] < chain[4]
        for size, members in zip((20, 40, 80, 160, 320), chain):
            assert len(members) == size
            assert Counter(labels[rid] for rid in members)[D] == size // 2
            assert members <= set(fold)
    for i, eval_fold in enumerate(plan.assignment):
        assert eval_fold != i
        for members in plan.nested_pools[i].values():
            assert set(members).isdisjoint(plan.folds[eval_fold])


def _reference_retrieval(examples, target, k, exclude_rid):
    """Brute-force re-derivation of the balanced retrieval contract."""
    from reqsmell import cosine_similarity

    per_class = {D: [], N: []}
    for ex in examples:
        if exclude_rid is not None and ex.requirement_id == exclude_rid:
            continue
        per_class[ex.label].append((cosine_similarity(target, ex.embedding), ex))
    merged = []
    for scored in per_class.values():
        scored.sort(key=lambda pair: (-pair[0], pair[1].example_id))
        merged.extend(scored[: k // 2])
    merged.sort(key=lambda pair: (pair[0], pair[1].example_id))
    return [(ex.example_id, sim) for sim, ex in merged]


def test_retrieval_matches_brute_force_reference(provider):
    rng = random.Random(2024)
    master = []
    shared_texts = [sentence(rng, WORDS[i % 5]) for i in range(8)]
    for i in range(240):
        label = D if i % 2 else N
        # every 6th example reuses a text so similarity ties exercise id order
        if i % 6 == 0:
            text, word = shared_texts[i % 8], WORDS[i % 8 % 5]
        else:
            text, word = None, WORDS[i % 5]
        rid = "TARGET-1" if i % 7 == 0 else None
        master.append(
            make_example(i, label, provider, text=text, requirement_id=rid, word=word)
        )
    queries = [sentence(rng, rng.choice(WORDS)) for _ in range(40)]

    with budget(5.0):
        for _ in range(1000):
            examples = rng.sample(master, rng.randrange(1, 201))
            pool = ShotPool(dim=provider.dim)
            for ex in examples:
                pool.append_validated(ex)
            k = rng.choice((0, 2, 4, 6, 8, 12))
            exclude = "TARGET-1" if rng.random() < 0.3 else None
            target = provider.embed(rng.choice(queries))

            got = pool.retrieve_balanced(target, k, exclude_requirement_id=exclude)
            want = _reference_retrieval(examples, target, k, exclude)
            assert [(s.example.example_id, s.similarity) for s in got] == want
            if exclude is not None:
                assert all(s.example.requirement_id != exclude for s in got)


@pytest.fixture(scope="module")
def full_scale():
    dataset = toy_dataset(1266)
    plan = build_sampling_plan(dataset, seed=0, pool_sizes=(20, 80))
    backend = OracleBackend(oracle_labels_for(dataset))
    provider = DeterministicLocalProvider(dim=64)
    return dataset, plan, backend, provider


def test_perfect_backend_is_perfect_end_to_end(full_scale, monkeypatch):
    dataset, plan, backend, provider = full_scale

    def no_network(*args, **kwargs):
        raise AssertionError("simulation must not open sockets")

    monkeypatch.setattr(socket, "socket", no_network)

    configs = [
        RunConfig(pool_size=size, cot=cot, k=0 if size == 0 else 12)
        for size in (0, 20, 80)
        for cot in (True, False)
    ]
    with budget(30.0):
        for config in configs:
            outcome = simulate_run(dataset, plan, config, backend, provider)
            results = [*outcome.fold_results, outcome.aggregate]
            assert outcome.aggregate.n_predictions == 1266
            for result in results:
                m = result.metrics
                assert (m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0)
                assert result.ci == CiBounds(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
                assert result.parse_failures == 0


def test_planted_flips_match_hand_computed_counts(provider):
    with budget(10.0):
        # full pipeline: two benign instances answered as defect
        dataset = toy_dataset(30)
        plan = build_sampling_plan(dataset, seed=2, pool_sizes=(4,))
        flips = frozenset([("R0016", "appropriate"), ("R0023", "some")])
        backend = OracleBackend(oracle_labels_for(dataset), flips=flips)
        outcome = simulate_run(
            dataset, plan, RunConfig(bootstrap_iterations=1000), backend, provider
        )
        agg = outcome.aggregate
        assert agg.counts == Counts(tp=15, fp=2, fn=0, tn=13)
        assert agg.metrics.precision == 15 / 17
        assert agg.metrics.recall == 1.0
        assert agg.metrics.f1 == 2 * (15 / 17) / (15 / 17 + 1)

        # worked example: 5 gold defects plus 2 planted false positives
        records = [make_record(i, D) for i in range(5)]
        records += [make_record(10 + i, N) for i in range(2)]
        flips = frozenset((r.id, r.weak_word) for r in records if r.label is N)
        backend = OracleBackend(oracle_labels_for(records), flips=flips)
        config = PredictorConfig(provider=provider, backend=backend, k=0, cot=True)
        items = predict_batch(
            [finding_for_record(r) for r in records], ShotPool(dim=provider.dim), config
        )
        pairs = [
            (record.label, item.result.prediction.label)
            for record, item in zip(records, items)
        ]
        counts = count_outcomes(pairs)
        assert counts == Counts(tp=5, fp=2, fn=0, tn=0)
        metrics = compute_metrics(counts)
        assert metrics.precision == 5 / 7
        assert metrics.recall == 1.0


def _independent_resampler(pairs, iterations, seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    n = len(pairs)
    ps, rs, f1s = [], [], []
    for _ in range(iterations):
        sample = [pairs[j] for j in rng.integers(0, n, size=n)]
        tp = sum(1 for g, p in sample if g is D and p is D)
        fp = sum(1 for g, p in sample if g is N and p is D)
        fn = sum(1 for g, p in sample if g is D and p is N)
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        ps.append(p)
        rs.append(r)
        f1s.append(2 * p * r / (p + r) if p + r else 0.0)
    bounds = lambda xs: np.percentile(xs, [2.5, 97.5])
    return CiBounds(*bounds(ps), *bounds(rs), *bounds(f1s))


def test_bootstrap_matches_independent_resampler():
    pairs = [
        (D, D), (D, N), (N, D), (N, N), (D, D),
        (N, N), (D, D), (N, D), (D, N), (N, N),
    ]
    with budget(5.0):
        got = bootstrap_ci(pairs, iterations=10000, seed=31)
        want = _independent_resampler(pairs, iterations=10000, seed=31)
        for field in ("p_lo", "p_hi", "r_lo", "r_hi", "f1_lo", "f1_hi"):
            assert abs(getattr(got, field) - getattr(want, field)) <= 1e-12

        all_correct = [(D, D)] * 5 + [(N, N)] * 5
        assert bootstrap_ci(all_correct, iterations=10000, seed=31) == CiBounds(
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0
        )


def test_pool_reload_preserves_retrieval_exactly(tmp_path, provider):
    rng = random.Random(77)
    path = tmp_path / "pool.jsonl"
    with budget(5.0):
        pool = ShotPool(dim=provider.dim, path=path)
        for i in range(320):
            pool.append_validated(
                make_example(i, D if i % 2 else N, provider, word=WORDS[i % 5])
            )
        reloaded = load_pool(path, expected_dim=provider.dim)
        assert len(reloaded) == 320

        for _ in range(50):
            target = provider.embed(sentence(rng, rng.choice(WORDS)))
            before = pool.retrieve_balanced(target, 12)
            after = reloaded.retrieve_balanced(target, 12)
            assert [s.example for s in before] == [s.example for s in after]
            assert [s.similarity.hex() for s in before] == [
                s.similarity.hex() for s in after
            ]


def _random_reasoning(rng: random.Random) -> str:
    words = [
        rng.choice(
            ("the", "bound", "is", "unverifiable", "tolerance", "scope,",
             "quantified", "context-dependent", "threshold;", "ambiguous")
        )
        for _ in range(rng.randint(3, 14))
    ]
    return " ".join(words).strip()


def test_prompt_render_parse_round_trip(provider):
    rng = random.Random(8)
    with budget(2.0):
        for _ in range(500):
            reasoning = _random_reasoning(rng)
            label = rng.choice((D, N))
            parsed = parse_output(render_answer(reasoning, label, cot=True), cot=True)
            assert (parsed.reasoning, parsed.label) == (reasoning, label)
            parsed = parse_output(render_answer(reasoning, label, cot=False), cot=False)
            assert parsed.label is label

        record = make_record(1, D)
        finding = finding_for_record(record)
        zero = build_prompt(finding, [], cot=True)
        assert zero.k_used == 0
        assert "### Example" not in zero.system_text

        pool = ShotPool(dim=provider.dim)
        for i in range(30):
            pool.append_validated(
                make_example(100 + i, D if i % 2 else N, provider, word=WORDS[i % 5])
            )
        shots = pool.retrieve_balanced(provider.embed(record.text), 12)
        twelve = build_prompt(finding, shots, cot=True)
        assert twelve.k_used == 12
        most_similar = max(shots, key=lambda s: s.similarity)
        assert shots[-1].similarity == most_similar.similarity
        assert twelve.shot_blocks[-1] == twelve.system_text.split("### Example\n")[-1]
        assert f"Requirement ID: {shots[-1].example.requirement_id}" in twelve.shot_blocks[-1]


@pytest.mark.skipif(
    os.environ.get("REQSMELL_LIVE_SMOKE") != "1",
    reason="live smoke disabled (set REQSMELL_LIVE_SMOKE=1 with endpoint credentials)",
)
def test_live_smoke_zero_vs_few_shot():
    """Directional sanity against a real endpoint; never part of the gate."""
    from reqsmell import RemoteChatBackend
    from reqsmell.harness.simulate import materialize_pool

    backend = RemoteChatBackend(
        endpoint_url=os.environ["REQSMELL_SMOKE_ENDPOINT"],
        model_name=os.environ["REQSMELL_SMOKE_MODEL"],
    )
    provider = DeterministicLocalProvider(dim=64)
    dataset = toy_dataset(40)
    sample = random.Random(0).sample(dataset, 20)
    findings = [finding_for_record(r) for r in sample]

    zero_cfg = PredictorConfig(provider=provider, backend=backend, k=0, cot=True)
    zero_items = predict_batch(findings, ShotPool(dim=provider.dim), zero_cfg)
    parsed = [i for i in zero_items if i.error is None]
    assert len(parsed) >= 19, "expected >= 95% of outputs to parse"

    pool_records = [r for r in dataset if r not in sample][:20]
    pool = materialize_pool(pool_records, backend, provider, cot=True)
    few_cfg = PredictorConfig(provider=provider, backend=backend, k=12, cot=True)
    few_items = predict_batch(findings, pool, few_cfg)

    def precision(items):
        pairs = [
            (r.label, i.result.prediction.label)
            for r, i in zip(sample, items)
            if i.error is None
        ]
        return compute_metrics(count_outcomes(pairs)).precision

    assert precision(few_items) >= precision(zero_items)

"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Tolerances are pinned in the assertions; the expensive learning criteria
reuse the session-scoped reference run from conftest.
"""

import json
import threading
import time
import urllib.request

import numpy as np
import pytest

from tableqa.aggregate import execute_aggregation, select_cells
from tableqa.classifiers import (
    TrainingPair,
    grad_check_classifier,
    new_head,
)
from tableqa.encoder import parameter_shapes
from tableqa.harness import OracleScorer
from tableqa.intersect import combine_scores, rank_cells
from tableqa.metrics import RankingResult, evaluate_ranking
from tableqa.serialize import serialize_column, serialize_row
from tableqa.service import ServiceState, make_server
from tableqa.store import materialize, query_with_store
from tableqa.tables import CellCoord, Table, derive_targets, weak_supervise

from conftest import (
    tiny_interaction_classifier,
    tiny_representation_classifier,
)
from oracles import brute_hit_at_1, brute_mrr, brute_top_cell


def _criterion(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: {status}{suffix}")
    assert ok, f"acceptance criterion failed: {name}{suffix}"


class TestAcceptance:
    def test_serialization_fidelity(self, congress_table):
        started = time.perf_counter()
        row = serialize_row(congress_table, 1, "delimited")
        col = serialize_column(congress_table, 2, "delimited")
        expected_row = (
            "Name : Benjamin Contee | Took office : 1789 | Left office : 1791 | "
            "Party : Anti-Administration | Notes / Events : |"
        )
        expected_col = "Took office : 1789 | 1791 | 1792 | 1793 | 1795 |"
        elapsed = time.perf_counter() - started
        _criterion(
            "serialization-fidelity",
            row == expected_row and col == expected_col and elapsed < 1.0,
            f"{elapsed * 1000:.1f} ms",
        )

    def test_weak_supervision(self, congress_table):
        started = time.perf_counter()
        targets = weak_supervise({"Pro-Administration"}, congress_table)
        rc = derive_targets(targets)
        elapsed = time.perf_counter() - started
        _criterion(
            "weak-supervision",
            targets == {CellCoord(2, 4), CellCoord(4, 4), CellCoord(5, 4)}
            and rc.rows == {2, 4, 5}
            and rc.cols == {4}
            and elapsed < 1.0,
        )

    def test_intersection_oracle(self):
        started = time.perf_counter()
        rng = np.random.default_rng(1234)
        lattice = np.array([i / 10 for i in range(11)])
        checked = 0
        ok = True
        for _ in range(10_000):
            m = int(rng.integers(1, 7))
            n = int(rng.integers(1, 7))
            rows = lattice[rng.integers(0, 11, m)]
            cols = lattice[rng.integers(0, 11, n)]
            grid = combine_scores(rows, cols)
            top, _ = rank_cells(grid, 1)[0]
            brute, _ = brute_top_cell(list(rows), list(cols))
            if tuple(top) != brute:
                ok = False
                break
            if rows.max() > 0 and cols.max() > 0:
                if top != (int(np.argmax(rows)) + 1, int(np.argmax(cols)) + 1):
                    ok = False
                    break
            checked += 1
        elapsed = time.perf_counter() - started
        _criterion(
            "intersection-oracle",
            ok and checked == 10_000 and elapsed < 30.0,
            f"{checked} grids in {elapsed:.1f} s",
        )

    def test_metric_oracle(self):
        started = time.perf_counter()
        rng = np.random.default_rng(99)
        results = []
        pred_lists = []
        gold_sets = []
        for i in range(1000):
            m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            cells = [CellCoord(r, c) for r in range(1, m + 1) for c in range(1, n + 1)]
            k = int(rng.integers(1, min(10, len(cells)) + 1))
            order = rng.permutation(len(cells))[:k]
            preds = [cells[o] for o in order]
            gold = {cells[int(rng.integers(0, len(cells)))] for _ in range(int(rng.integers(1, 4)))}
            results.append(
                RankingResult(qid=f"q{i}", predictions=tuple(preds), gold=frozenset(gold))
            )
            pred_lists.append(preds)
            gold_sets.append(gold)
        report = evaluate_ranking(results)
        mrr_ref = brute_mrr(pred_lists, gold_sets)
        hit_ref = brute_hit_at_1(pred_lists, gold_sets)
        elapsed = time.perf_counter() - started
        _criterion(
            "metric-oracle",
            abs(report.mrr - mrr_ref) < 1e-12
            and abs(report.hit_at_1 - hit_ref) < 1e-12
            and elapsed < 10.0,
            f"mrr delta {abs(report.mrr - mrr_ref):.2e}",
        )

    def test_gradient_check(self):
        started = time.perf_counter()
        pairs = [
            TrainingPair("what is the color of alice ?", "name : alice | color : red |", True, 2.0),
            TrainingPair("which name has the home tigers ?", "home : tigers | away : lions |", False, 1.0),
            TrainingPair("what is the town of bob ?", "city : paris | color : blue |", False, 1.0),
            TrainingPair("how many names are listed ?", "name : carol | city : rome |", True, 1.0),
        ]
        inter = tiny_interaction_classifier(seed=3)
        n_families = len(parameter_shapes(inter.encoder.tokenizer, inter.encoder.config)) + 2
        err_inter = grad_check_classifier(inter, pairs, epsilon=1e-4, min_samples=max(200, n_families * 2), seed=1)
        repr_clf = tiny_representation_classifier(seed=4)
        err_repr = grad_check_classifier(repr_clf, pairs, epsilon=1e-4, min_samples=200, seed=2)
        elapsed = time.perf_counter() - started
        _criterion(
            "gradient-check",
            err_inter < 1e-3 and err_repr < 1e-3 and elapsed < 60.0,
            f"interaction {err_inter:.2e}, representation {err_repr:.2e}, "
            f"{n_families} tensor families, {elapsed:.1f} s",
        )

    def test_desk_scale_learning(self, reference_run):
        delim = reference_run["delimited"]
        plain = reference_run["plain"]
        hit = delim["report"].hit_at_1
        margin = hit - plain["report"].hit_at_1
        _criterion(
            "desk-scale-learning",
            hit >= 0.85 and delim["seconds"] < 600.0 and margin > 0.0,
            f"hit@1 {hit:.3f} in {delim['seconds']:.0f} s, "
            f"delimited-plain margin {margin:+.3f}",
        )

    def test_representation_equivalence(self):
        clf = tiny_representation_classifier(seed=11)
        rng = np.random.default_rng(7)
        tables = []
        for t in range(5):
            n = int(rng.integers(3, 6))
            tables.append(
                Table(
                    id=f"acc{t}",
                    header=tuple(f"h{j}" for j in range(n)),
                    cells=tuple(
                        tuple(f"val {t} {i} {j}" for j in range(n)) for i in range(4)
                    ),
                )
            )
        index = materialize(tables, clf)
        from tableqa.classifiers import score_representation

        words = ["what", "team", "city", "score", "alice", "red", "of", "the"]
        mismatches = 0
        checked = 0
        while checked < 100:
            table = tables[int(rng.integers(len(tables)))]
            question = " ".join(rng.choice(words, size=4))
            cached = query_with_store(question, table.id, index, clf)
            j = int(rng.integers(1, table.n + 1))
            online = score_representation(question, serialize_column(table, j, "delimited"), clf)
            if cached[j - 1] != online:
                mismatches += 1
            checked += 1

        calls = {"n": 0}
        original = clf.encoder.encode

        def counting(tokens, segments):
            calls["n"] += 1
            return original(tokens, segments)

        clf.encoder.encode = counting
        try:
            query_with_store("what is the score ?", tables[0].id, index, clf)
        finally:
            clf.encoder.encode = original
        _criterion(
            "representation-equivalence",
            mismatches == 0 and calls["n"] == 1,
            f"{checked} pairs exact, {calls['n']} encoder call per query",
        )

    def test_aggregation_executor(self):
        table = Table(id="agg", header=("a", "b"), cells=(("3", "5"),))
        grid = combine_scores([1.0], [0.9, 0.9], table=table)
        total = execute_aggregation(grid, table, "sum", tau=0.5)
        table_avg = Table(id="agg2", header=("a", "b"), cells=(("2", "4"),))
        grid_avg = combine_scores([1.0], [0.9, 0.9], table=table_avg)
        mean = execute_aggregation(grid_avg, table_avg, "average", tau=0.5)
        count = execute_aggregation(grid, table, "count", tau=0.99)

        rng = np.random.default_rng(5)
        monotone = True
        for _ in range(200):
            rows = rng.random(int(rng.integers(1, 6)))
            cols = rng.random(int(rng.integers(1, 6)))
            g = combine_scores(rows, cols)
            taus = sorted(rng.random(2))
            if len(select_cells(g, taus[1])) > len(select_cells(g, taus[0])):
                monotone = False
                break
        _criterion(
            "aggregation-executor",
            total.value == 8.0 and mean.value == 3.0 and count.value == 0.0 and monotone,
        )

    def test_service_pipeline_with_oracle(self):
        rng = np.random.default_rng(31)
        tables = {}
        gold = {}
        for t in range(20):
            m, n = int(rng.integers(2, 6)), int(rng.integers(2, 6))
            table = Table(
                id=f"svc{t}",
                header=tuple(f"h{j}" for j in range(n)),
                cells=tuple(tuple(f"c {t} {i} {j}" for j in range(n)) for i in range(m)),
            )
            tables[table.id] = table
            gold[table.id] = frozenset(
                {CellCoord(int(rng.integers(1, m + 1)), int(rng.integers(1, n + 1)))}
            )
        state = ServiceState(tables=dict(tables), scorer=OracleScorer(gold))
        server = make_server(state, "127.0.0.1", 0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        ok = True
        detail = ""
        try:
            base = f"http://127.0.0.1:{server.server_address[1]}"
            for tid, table in tables.items():
                payload = json.dumps({"table_id": tid, "question": "where ?", "k": 3}).encode()
                req = urllib.request.Request(
                    f"{base}/ask", data=payload, headers={"Content-Type": "application/json"}
                )
                with urllib.request.urlopen(req) as resp:
                    body = json.loads(resp.read())
                top = body["topk"][0]
                (expected,) = gold[tid]
                grid = np.outer(body["row_probs"], body["col_probs"])
                consistent = (
                    (top["row"], top["col"]) == tuple(expected)
                    and body["heatmap"]["argmax"] == [top["row"], top["col"]]
                    and np.allclose(body["heatmap"]["intensities"], grid / grid.max(), atol=1e-9)
                    and body["topk"][0]["score"] == pytest.approx(grid.max())
                )
                if not consistent:
                    ok = False
                    detail = f"inconsistent response for {tid}"
                    break
        finally:
            server.shutdown()
        _criterion("service-pipeline", ok, detail or "20 fixture tables")

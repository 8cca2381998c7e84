"""HTTP facade for table upload, question answering, and heatmap retrieval.

Endpoints:

* ``POST /tables``   -- body is a table record ``{id, header, rows}``; returns the id
* ``GET /tables``    -- list registered table ids
* ``GET /tables/{id}`` -- the table record
* ``POST /ask``      -- ``{table_id, question, mode?, k?, tau?}`` -> answer payload
* ``GET /health``    -- liveness probe

All shared state (tables, models, index) is read-only while serving;
table registration takes a lock, request handling is concurrent.  Errors
carry ``{code, message, field?}``.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .aggregate import classify_question, execute_aggregation, predicted_agg_type
from .classifiers import QuestionClassifier, RciModelBundle
from .errors import TableValidationError, UnanswerableError
from .harness import Scorer, score_question
from .intersect import heatmap_record, rank_cells
from .store import EmbeddingIndex, model_fingerprint
from .tables import Table


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, field_name: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field = field_name

    def body(self) -> dict:
        payload = {"code": self.code, "message": str(self)}
        if self.field is not None:
            payload["field"] = self.field
        return payload


@dataclass
class ServiceState:
    """Loaded tables, scorer, and optional aggregation classifier/index.

    The scorer abstraction lets tests inject an oracle in place of trained
    models; the whole bundle is swapped atomically, never piecewise.
    """

    tables: dict[str, Table] = field(default_factory=dict)
    scorer: Scorer | None = None
    bundle: RciModelBundle | None = None
    agg_model: QuestionClassifier | None = None
    index: EmbeddingIndex | None = None
    default_k: int = 10
    default_tau: float = 0.5
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def register_table(self, table: Table) -> None:
        with self._lock:
            self.tables[table.id] = table


def _validate_ask(payload: dict, state: ServiceState) -> tuple[str, str, str | None, int, float]:
    if not isinstance(payload, dict):
        raise ServiceError(400, "validation", "request body must be an object")
    table_id = payload.get("table_id")
    if not isinstance(table_id, str) or not table_id:
        raise ServiceError(400, "validation", "table_id must be a non-empty string", "table_id")
    question = payload.get("question")
    if not isinstance(question, str) or not question.strip():
        raise ServiceError(400, "validation", "question must be a non-empty string", "question")
    mode = payload.get("mode")
    if mode is not None and mode not in ("interaction", "representation"):
        raise ServiceError(
            400, "validation", "mode must be 'interaction' or 'representation'", "mode"
        )
    k = payload.get("k", state.default_k)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ServiceError(400, "validation", "k must be a positive integer", "k")
    tau = payload.get("tau", state.default_tau)
    if not isinstance(tau, (int, float)) or isinstance(tau, bool) or not 0.0 <= tau <= 1.0:
        raise ServiceError(400, "validation", "tau must lie in [0, 1]", "tau")
    return table_id, question, mode, k, float(tau)


def answer_question(payload: dict, state: ServiceState) -> dict:
    """Run the full pipeline: classify the question type, score rows and
    columns, intersect, rank, render the heatmap, and aggregate."""
    table_id, question, mode, k, tau = _validate_ask(payload, state)
    table = state.tables.get(table_id)
    if table is None:
        raise ServiceError(404, "not_found", f"unknown table {table_id!r}", "table_id")
    if state.scorer is None:
        raise ServiceError(503, "unavailable", "no model bundle is loaded")

    col_kind = state.bundle.col.kind if state.bundle is not None else "interaction"
    if mode is None:
        mode = col_kind
    if state.bundle is not None and mode != col_kind:
        raise ServiceError(
            400,
            "validation",
            f"loaded bundle scores columns with the {col_kind!r} classifier",
            "mode",
        )
    used_index = False
    if mode == "representation" and state.bundle is not None:
        used_index = (
            state.index is not None
            and table.id in state.index.entries
            and state.index.fingerprint == model_fingerprint(state.bundle.col)
        )

    t0 = time.perf_counter()
    if state.agg_model is not None:
        distribution = classify_question(question, table.header, state.agg_model)
    else:
        distribution = {label: (1.0 if label == "lookup" else 0.0) for label in
                        ("lookup", "max", "min", "count", "sum", "average")}
    predicted = predicted_agg_type(distribution)
    t1 = time.perf_counter()
    grid = score_question(state.scorer, question, table)
    t2 = time.perf_counter()
    ranked = rank_cells(grid, k)
    heatmap = heatmap_record(grid, k)
    try:
        agg_answer = execute_aggregation(grid, table, predicted, tau)
        aggregation = {
            "kind": agg_answer.kind,
            "value": agg_answer.value,
            "cells": [
                {"row": c.row, "col": c.col, "text": text} for c, text in agg_answer.cells
            ],
            "contributing": [[c.row, c.col] for c in agg_answer.contributing],
        }
    except UnanswerableError as exc:
        aggregation = {"kind": "unanswerable", "value": None, "cells": [], "message": str(exc)}
    t3 = time.perf_counter()

    return {
        "table_id": table.id,
        "question": question,
        "mode": mode,
        "used_index": used_index,
        "agg": {"predicted": predicted, "distribution": distribution},
        "topk": [
            {"row": c.row, "col": c.col, "score": s, "text": table.cell(c)} for c, s in ranked
        ],
        "heatmap": heatmap,
        "aggregation": aggregation,
        "row_probs": [float(p) for p in grid.row_probs],
        "col_probs": [float(p) for p in grid.col_probs],
        "timing_ms": {
            "encode": (t1 - t0) * 1000.0,
            "score": (t2 - t1) * 1000.0,
            "combine": (t3 - t2) * 1000.0,
        },
    }


class _Handler(BaseHTTPRequestHandler):
    server: "ServiceServer"

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw or b"{}")
        except json.JSONDecodeError as exc:
            raise ServiceError(400, "parse", f"invalid request body: {exc}") from exc

    def do_OPTIONS(self):  # noqa: N802 - stdlib naming
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):  # noqa: N802
        state = self.server.state
        try:
            if self.path == "/health":
                self._send(200, {"status": "ok"})
            elif self.path == "/tables":
                self._send(200, {"tables": sorted(state.tables)})
            elif self.path.startswith("/tables/"):
                table_id = self.path[len("/tables/") :]
                table = state.tables.get(table_id)
                if table is None:
                    raise ServiceError(404, "not_found", f"unknown table {table_id!r}")
                self._send(200, table.to_record())
            else:
                raise ServiceError(404, "not_found", f"no route {self.path!r}")
        except ServiceError as exc:
            self._send(exc.status, exc.body())

    def do_POST(self):  # noqa: N802
        state = self.server.state
        try:
            payload = self._read_json()
            if self.path == "/tables":
                try:
                    table = Table.from_record(payload)
                except (KeyError, TypeError) as exc:
                    raise ServiceError(400, "validation", f"bad table record: {exc}") from exc
                except TableValidationError as exc:
                    raise ServiceError(400, "validation", str(exc)) from exc
                state.register_table(table)
                self._send(200, {"id": table.id})
            elif self.path == "/ask":
                self._send(200, answer_question(payload, state))
            else:
                raise ServiceError(404, "not_found", f"no route {self.path!r}")
        except ServiceError as exc:
            self._send(exc.status, exc.body())
        except TableValidationError as exc:
            self._send(400, {"code": "validation", "message": str(exc)})


class ServiceServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, state: ServiceState, address: tuple[str, int]):
        super().__init__(address, _Handler)
        self.state = state


def make_server(state: ServiceState, host: str = "127.0.0.1", port: int = 0) -> ServiceServer:
    return ServiceServer(state, (host, port))


def serve(state: ServiceState, host: str = "127.0.0.1", port: int = 8080) -> None:
    server = make_server(state, host, port)
    print(f"serving on http://{host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()

"""Materialize query-independent column vectors and serve answers over HTTP.

The representation column model encodes every column of every table once.
At query time only the question is encoded; each cached column vector is
combined with it and classified, so per-query cost stays flat as tables
get wider.  The HTTP facade then exposes upload/ask/heatmap endpoints.
"""

import json
import threading
import time
import urllib.request

import numpy as np

from tableqa import (
    EmbeddingIndex,
    RciModelBundle,
    ServiceState,
    Table,
    make_server,
    materialize,
    query_with_store,
)
from tableqa.classifiers import SequenceClassifier, new_head
from tableqa.encoder import EncoderConfig, new_encoder
from tableqa.harness import BundleScorer, OracleScorer, benchmark_column_scoring
from tableqa.tables import CellCoord
from tableqa.tokenizer import TokenizerConfig

tok = TokenizerConfig(bucket_count=4096)
enc_cfg = EncoderConfig(d_model=48, n_layers=2, n_heads=4, max_len=64, seed=1)

repr_col = SequenceClassifier(new_encoder(tok, enc_cfg), new_head(2, 4 * 48, 2), "representation", 48)
inter_col = SequenceClassifier(new_encoder(tok, enc_cfg), new_head(2, 48, 2), "interaction", 48)
row_model = SequenceClassifier(new_encoder(tok, enc_cfg), new_head(2, 48, 3), "interaction", 48)

wide = Table(
    id="wide",
    header=tuple(f"field{j}" for j in range(20)),
    cells=tuple(tuple(f"value {i} {j}" for j in range(20)) for i in range(6)),
)

index = materialize([wide], repr_col)
print(f"materialized {sum(v.shape[0] for v in index.entries.values())} column vectors "
      f"of width {index.d_model}")

probs = query_with_store("what is field7 of row 2 ?", "wide", index, repr_col)
print("cached column probabilities (first 5):", np.round(probs[:5], 4))

timings = benchmark_column_scoring(
    RciModelBundle(row=row_model, col=repr_col),
    index,
    RciModelBundle(row=row_model, col=inter_col),
    [f"what is field {i} ?" for i in range(10)],
    wide,
)
print(f"10 questions x 20 columns: cached {timings['cached_seconds']:.3f} s "
      f"vs online interaction {timings['online_interaction_seconds']:.3f} s")

# serve a table with an oracle scorer so the endpoint flow is visible
gold = {"wide": frozenset({CellCoord(2, 8)})}
state = ServiceState(tables={"wide": wide}, scorer=OracleScorer(gold))
server = make_server(state, "127.0.0.1", 0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"

payload = json.dumps({"table_id": "wide", "question": "what is field7 of row 2 ?", "k": 3})
request = urllib.request.Request(
    f"{base}/ask", data=payload.encode(), headers={"Content-Type": "application/json"}
)
with urllib.request.urlopen(request) as resp:
    body = json.loads(resp.read())
print(f"\nPOST /ask -> top cell ({body['topk'][0]['row']}, {body['topk'][0]['col']}) "
      f"= {body['topk'][0]['text']!r}")
print("heatmap argmax:", body["heatmap"]["argmax"],
      "| timing ms:", {k: round(v, 2) for k, v in body["timing_ms"].items()})
server.shutdown()

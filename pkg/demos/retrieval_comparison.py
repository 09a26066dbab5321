"""
Lexical vs expanded search on the benchmark corpus
==================================================

Builds a tf.idf index over the benchmark documents and shows the top hits
for each strategy side by side.
"""

from ontosearch.knowledge_base import fixture_dir
from ontosearch.pipeline import STRATEGIES, SemanticSearch
from ontosearch.retrieval import build_index, read_corpus

data = fixture_dir("benchmark")
index = build_index(read_corpus(data / "corpus.jsonl"))
engine = SemanticSearch.from_dir(data, index=index)
print(f"{index.n_docs} documents, {len(index.vocabulary)} terms")

questions = [line.split("\t", 1)[1].strip()
             for line in (data / "queries.tsv").read_text().splitlines() if line and not line.startswith("# ")]

for q in questions:
    print("\n" + q)
    for strategy in STRATEGIES:
        hits = engine.search(q, strategy, k=3)
        shown = "  ".join(f"{h.doc_id}:{h.score:.3f}" for h in hits) or "(no hits)"
        print(f"  {strategy:8s} {shown}")

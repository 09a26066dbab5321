"""
Expanding a question with the fact graph
========================================

Walks one question through analysis, each activation strategy and the
resulting OR-query. Run with ``python3 demos/expansion_walkthrough.py``.
"""

from ontosearch.activation import free_spread
from ontosearch.knowledge_base import fixture_dir
from ontosearch.pipeline import SemanticSearch

engine = SemanticSearch.from_dir(fixture_dir())
question = "cities that are tourist destinations of Thailand"

# relation phrases, entity and class mentions, and the patterns built from them
analysis = engine.analyzer.analyze(question)
for p in analysis.patterns:
    print("pattern:", p)

# unconstrained spreading reaches a lot of the graph after two hops
wide = free_spread(engine.kb, analysis.seeds, 2)
print(f"free spread, 2 hops: {len(wide.activated)} entities")

# one hop, any relation
csa = engine.expand(question, "csa")
print("csa  ->", csa.query)

# one hop along the detected relation, filtered by the asked-for class
rcsa = engine.expand(question, "rcsa")
print("rcsa ->", rcsa.query)
print(rcsa.activation.explain())

"""The sandbox search engine: rank five short documents for a query.

The default ranker is Dirichlet-smoothed query likelihood (mu = 1000);
a linear model over nine content/quality features is available too. The
bot never sees any of this -- it only observes the induced rankings.
"""

from rankarena.engine import Document, EngineModel, Query, extract_doc_features, ndcg_at_k, rank_documents
from rankarena.text import build_corpus_stats, default_stopwords

query = Query("q1", "hoof cracks")
texts = {
    "d1": "Hoof cracks appear after dry summers. A farrier can fix most hoof cracks early.",
    "d2": "Trimming schedules matter for every horse. Most barns book visits monthly.",
    "d3": "Hoof cracks and hoof cracks again: cracks cracks cracks.",
    "d4": "Grass pasture keeps horses calm. Shade and water help in summer.",
    "d5": "A cracked hoof wall needs attention. Watch for lameness and call for help.",
}
docs = [Document.from_text(i, f"author-{i}", t) for i, t in texts.items()]
stats = build_corpus_stats(texts.values(), extra_texts=[query.text], stopwords=default_stopwords())

engine = EngineModel(kind="lm_dirichlet", mu=1000)
ranking = rank_documents(docs, query, engine, stats)
print(f"query: {query.text!r}")
for pos, doc_id in enumerate(ranking.doc_ids, 1):
    print(f"  {pos}. {doc_id}  {texts[doc_id][:60]}...")

print("\nper-document features (what a linear engine would see):")
f = extract_doc_features(docs[0], query, stats)
for name, value in f.as_dict().items():
    print(f"  {name:20s} {value:8.3f}")

print("\nkeyword stuffing ranks well here but tanks the quality proxy;")
print("see demo 05 for how competitions report that trade-off.")

print("\nNDCG@5 (the model-selection metric for the pair ranker):")
print("  ideal [3,2,1,0,0] ->", ndcg_at_k([3, 2, 1, 0, 0], 5))
print("  swapped top two   ->", round(ndcg_at_k([2, 3, 1, 0, 0], 5), 5))

"""The bot's single-shot move: replace one passage to climb the ranking.

A document ranked below two competitors borrows a sentence from the
documents above it. The audit record shows every candidate pair that
was considered, its 15 features and its score.
"""

from rankarena.bot import PairModel, RankingHistory, modify_document
from rankarena.engine import Document, EngineModel, Query, rank_documents
from rankarena.text import EmbeddingStore, build_corpus_stats, default_stopwords

query = Query("hoof", "hoof cracks")
texts = {
    "leader": (
        "Hoof cracks are common in dry seasons. A good farrier treats hoof cracks "
        "with corrective trimming. Balanced shoeing prevents new cracks."
    ),
    "second": (
        "Horizontal hoof cracks usually follow an injury. Keep the coronary band "
        "clean and protected. Most cracks grow out with care."
    ),
    "mine": (
        "Our stable cares for horses all year. Feeding plans change with the "
        "seasons. Volunteers help with daily grooming."
    ),
}
docs = {i: Document.from_text(i, i, t) for i, t in texts.items()}
stats = build_corpus_stats(texts.values(), extra_texts=[query.text], stopwords=default_stopwords())
store = EmbeddingStore.hash_only(48)
engine = EngineModel(mu=500)

ranking = rank_documents(docs.values(), query, engine, stats)
print("current ranking:", " > ".join(ranking.doc_ids))

history = RankingHistory(query_id=query.id, rankings=(ranking,), documents=docs)

# A hand-set model: prefer query-rich, top-similar replacement passages.
weights = {
    "QryTermSrc": -0.073, "QryTermTarget": 0.189,
    "SimSrcTop(TF.IDF)": -0.025, "SimTargetTop(TF.IDF)": 0.134,
    "SimSrcTop(W2V)": -0.013, "SimTargetTop(W2V)": 0.085,
    "SimSrcPrevTop(TF.IDF)": -0.020, "SimTargetPrevTop(TF.IDF)": -0.022,
    "SimSrcPrevTop(W2V)": 0.084, "SimTargetPrevTop(W2V)": 0.138,
    "SimSrcTarget(W2V)": 0.015,
    "SimSrcPrecPsg(W2V)": 0.024, "SimSrcFollowPsg(W2V)": -0.015,
    "SimTargetPrecPsg(W2V)": 0.034, "SimTargetFollowPsg(W2V)": 0.015,
}
model = PairModel(weights=weights)

modified, audit = modify_document(docs["mine"], query, history, model, stats, store)
print(f"\ndecision: {audit.reason}; {len(audit.candidates)} candidate pairs scored")
chosen = audit.chosen
print(f"replaced passage {chosen.pair.src_index}: {docs['mine'].passages[chosen.pair.src_index]!r}")
print(f"with {chosen.pair.target_doc_id}[{chosen.pair.target_index}]: {chosen.target_text!r}")
print(f"score {chosen.score:+.4f}")

print("\nmodified document:")
print(" ", modified.text)

new_ranking = rank_documents(
    [docs["leader"], docs["second"], modified], query, engine, stats
)
print("\nre-ranked with the swap in place:", " > ".join(new_ranking.doc_ids))
print("\ntop three candidates by score:")
for cand in audit.candidates[:3]:
    print(f"  {cand.score:+.4f} src={cand.pair.src_index} target={cand.target_text[:50]!r}")

"""Walk through the text layer: tokens, sentences, vectors, similarity.

Everything downstream (the engine, the bot, the labels) is built from
these four primitives.
"""

from rankarena.text import (
    EmbeddingStore,
    build_corpus_stats,
    cosine,
    embed_document,
    embed_text,
    segment_passages,
    tfidf_vector,
    tokenize,
)

text = "Grass cracks are usually seen in long, unshod horses. Regular trimming helps! Ask a farrier."

print("tokenize lowercases and strips punctuation:")
print(" ", tokenize(text)[:8], "...")

print("\nsentences are the passages the bot swaps:")
for i, passage in enumerate(segment_passages(text)):
    print(f"  [{i}] {passage}")

corpus = [
    "Hoof cracks worry riders. Trimming prevents hoof cracks.",
    "A farrier trims hooves and fits shoes.",
    "Grass grows fast in spring pastures.",
    text,
]
stats = build_corpus_stats(corpus)
print("\nTF.IDF highlights what is distinctive about a sentence:")
vec = tfidf_vector("Regular trimming helps", stats)
for term, weight in sorted(vec.items(), key=lambda kv: -kv[1]):
    print(f"  {term:10s} {weight:.3f}")

# With no vector file, the seeded hash fallback gives every term a fixed
# pseudo-random unit vector, so passage similarity reflects term overlap.
# EmbeddingStore.load() accepts a real word-vector file for semantics.
store = EmbeddingStore.hash_only(32)
a = embed_text("trimming prevents hoof cracks", store)
b = embed_text("a farrier repairs hoof cracks", store)
c = embed_text("spring pastures grow fast", store)
print("\nembedding cosine reflects shared vocabulary between sentences:")
print(f"  cracks-vs-cracks {cosine(a, b):+.3f}   cracks-vs-pasture {cosine(a, c):+.3f}")

doc_vec = embed_document(segment_passages(text), store)
print(f"\na document embeds as the mean of its passage vectors (dim={len(doc_vec)})")

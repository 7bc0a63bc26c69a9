import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankarena.bot import FEATURE_NAMES, PassagePair, RankingHistory, apply_replacement, build_candidate_pool
from rankarena.engine import Document, EngineModel, Query, Ranking, ndcg_at_k, rank_documents
from rankarena.text import EmbeddingStore, build_corpus_stats
from rankarena.training import (
    LabeledPair,
    TrainingConfig,
    aggregate_label,
    coherence_proxy_label,
    cross_validate,
    dataset_fingerprint,
    fit_rank_svm,
    generate_training_set,
    label_for_mode,
    promotion_label,
    relabel,
    score_pairs,
    train_pairwise,
)


def doc(id, text, author=None):
    return Document.from_text(id, author or id, text, max_terms=None)


class TestPromotionLabel:
    def test_max_jump(self):
        assert promotion_label(5, 1) == 4

    def test_no_change(self):
        assert promotion_label(2, 2) == 0

    def test_exhaustive_oracle(self):
        for cur in range(1, 6):
            for nxt in range(1, 6):
                assert promotion_label(cur, nxt, 5) == max(0, cur - nxt)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            promotion_label(6, 1, 5)
        with pytest.raises(ValueError):
            promotion_label(1, 0, 5)


class TestAggregateLabel:
    def test_zero_annihilates(self):
        assert aggregate_label(0, 3) == 0.0

    def test_hand_values(self):
        assert aggregate_label(4, 4) == pytest.approx(32 / 8.0001, abs=1e-9)
        assert aggregate_label(4, 2) == pytest.approx(16 / 6.0001, abs=1e-9)

    @given(st.floats(0, 4), st.floats(0, 4))
    def test_symmetry_at_beta_one(self, r, c):
        assert aggregate_label(r, c) == pytest.approx(aggregate_label(c, r), abs=1e-12)

    @given(st.floats(0, 4), st.floats(0, 4), st.floats(0, 4))
    def test_monotone(self, r, c, r2):
        lo, hi = min(r, r2), max(r, r2)
        assert aggregate_label(hi, c) >= aggregate_label(lo, c) - 1e-12

    def test_range(self):
        for r in range(5):
            for c in range(5):
                assert 0.0 <= aggregate_label(r, c) <= 4.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            aggregate_label(-1, 1)

    def test_label_modes(self):
        cfg_r = TrainingConfig(label_mode="r_only")
        cfg_c = TrainingConfig(label_mode="c_only")
        cfg_l = TrainingConfig()
        assert label_for_mode(3, 1.5, cfg_r) == 3.0
        assert label_for_mode(3, 1.5, cfg_c) == 1.5
        assert label_for_mode(3, 1.5, cfg_l) == aggregate_label(3, 1.5)


class TestCoherenceProxy:
    def axis_store(self):
        return EmbeddingStore(
            dimension=3,
            vectors={
                "alpha": np.array([1.0, 0.0, 0.0]),
                "beta": np.array([0.0, 1.0, 0.0]),
                "gamma": np.array([0.0, 0.0, 1.0]),
                "delta": np.array([1.0, 1.0, 0.0]),
                "omega": np.array([0.0, -1.0, 0.0]),
            },
            fallback_mode="error",
        )

    def test_identity_replacement(self):
        store = self.axis_store()
        d = doc("d", "alpha. beta. gamma.")
        c_self = coherence_proxy_label(d, 1, "beta", store)
        # s_pair = 1; s_ctx = mean(cos(beta, alpha), cos(beta, gamma)) = 0
        assert c_self == pytest.approx(4 * 0.5, abs=1e-9)

    def test_orthogonal_target_zero(self):
        store = self.axis_store()
        d = doc("d", "alpha. beta. alpha.")
        # omega is orthogonal to alpha and opposite to beta
        assert coherence_proxy_label(d, 1, "omega", store) == 0.0

    def test_hand_computed_fixture(self):
        store = self.axis_store()
        d = doc("d", "alpha. beta. gamma.")
        # target delta=(1,1,0): s_ctx = (cos(d,alpha)+cos(d,gamma))/2
        # = (1/sqrt2 + 0)/2; s_pair = cos(beta, delta) = 1/sqrt2
        expected = 4 * ((1 / math.sqrt(2) / 2 + 1 / math.sqrt(2)) / 2)
        got = coherence_proxy_label(d, 1, "delta", store)
        assert got == pytest.approx(expected, abs=1e-6)
        assert got == pytest.approx(2.12132, abs=1e-5)

    def test_range(self):
        store = EmbeddingStore.hash_only(8)
        d = doc("d", "one two. three four. five six.")
        for target in ("one two", "seven eight", "three"):
            assert 0.0 <= coherence_proxy_label(d, 1, target, store) <= 4.0


def tiny_snapshot():
    """3-doc ranking: dA (4 passages) above dB (3) above dC (3)."""
    query = Query("q1", "coral reef")
    texts = {
        "dA": "Coral reef shines. Reef coral again. Coral tide water. Reef sand bar.",
        "dB": "Coral sand here. Palm by water. Dune grass grows.",
        "dC": "Sunny walk today. Shell on path. Quiet morning air.",
    }
    docs = [doc(i, t) for i, t in texts.items()]
    stats = build_corpus_stats(texts.values(), extra_texts=[query.text])
    engine = EngineModel(mu=100)
    ranking = rank_documents(docs, query, engine, stats)
    assert ranking.doc_ids == ("dA", "dB", "dC")
    history = RankingHistory(query_id="q1", rankings=(ranking,), documents={d.id: d for d in docs})
    return query, history, engine, stats


class TestGenerateTrainingSet:
    def test_pair_count(self):
        query, history, engine, stats = tiny_snapshot()
        store = EmbeddingStore.hash_only(8)
        data = generate_training_set([(query, history)], engine, stats, store, TrainingConfig(max_terms=None))
        groups = {}
        for lp in data:
            groups.setdefault(lp.group_id, []).append(lp)
        # dB: pool = dA's 4 passages, 3 sources -> 12
        # dC: pool = 4 + 3 = 7 passages, 3 sources -> 21
        assert len(groups["q1/dB"]) == 12
        assert len(groups["q1/dC"]) == 21

    def test_engine_mismatch_guard(self):
        query, history, engine, stats = tiny_snapshot()
        store = EmbeddingStore.hash_only(8)
        tampered = RankingHistory(
            query_id=history.query_id,
            rankings=(
                Ranking(query_id="q1", doc_ids=tuple(reversed(history.current.doc_ids))),
            ),
            documents=history.documents,
        )
        with pytest.raises(ValueError, match="does not match the engine"):
            generate_training_set([(query, tampered)], engine, stats, store, TrainingConfig())

    def test_labels_match_independent_replay(self):
        query, history, engine, stats = tiny_snapshot()
        store = EmbeddingStore.hash_only(8)
        data = generate_training_set([(query, history)], engine, stats, store, TrainingConfig(max_terms=None))
        rng = np.random.default_rng(0)
        picks = rng.choice(len(data), size=10, replace=False)
        current = history.current
        for i in picks:
            lp = data[i]
            d_cur_id = lp.group_id.split("/")[1]
            d_cur = history.document(d_cur_id)
            pool = build_candidate_pool(history, d_cur_id)
            d_next = apply_replacement(d_cur, lp.pair, pool, max_terms=None)
            others = [history.document(x) for x in current.doc_ids if x != d_cur_id]
            new_ranking = rank_documents(others + [d_next], query, engine, stats)
            expected_r = max(0, current.rank_of(d_cur_id) - new_ranking.rank_of(d_next.id))
            assert lp.r == expected_r

    def test_query_rich_target_promotes_at_least_as_much_as_stopword_target(self):
        query, history, engine, stats = tiny_snapshot()
        store = EmbeddingStore.hash_only(8)
        data = generate_training_set([(query, history)], engine, stats, store, TrainingConfig(max_terms=None))
        by_target = {}
        for lp in data:
            if lp.group_id == "q1/dC" and lp.pair.src_index == 0:
                by_target[(lp.pair.target_doc_id, lp.pair.target_index)] = lp.r
        # dA passage 1 ("Reef coral again.") vs dB passage 2 ("Dune grass grows.")
        assert by_target[("dA", 1)] >= by_target[("dB", 2)]

    def test_relabel_recomputes_integrated_label(self):
        query, history, engine, stats = tiny_snapshot()
        store = EmbeddingStore.hash_only(8)
        data = generate_training_set([(query, history)], engine, stats, store, TrainingConfig())
        r_only = relabel(data, TrainingConfig(label_mode="r_only"))
        assert all(lp.l == lp.r for lp in r_only)
        back = relabel(r_only, TrainingConfig())
        assert all(a.l == pytest.approx(b.l) for a, b in zip(back, data))


def synthetic_pairs(n_groups=12, rows_per_group=6, seed=0, planted=0):
    """Random features; label = x1 exactly (well separated within groups)."""
    rng = np.random.default_rng(seed)
    data = []
    for g in range(n_groups):
        levels = np.linspace(0.05, 0.95, rows_per_group)
        rng.shuffle(levels)
        for i, lvl in enumerate(levels):
            feats = {n: float(v) for n, v in zip(FEATURE_NAMES, rng.random(15))}
            feats["QryTermSrc"] = float(lvl)
            data.append(
                LabeledPair(
                    pair=PassagePair(i, "t", i),
                    features=feats,
                    r=0,
                    c=0.0,
                    l=float(lvl),
                    group_id=f"g{g}",
                    query_id=f"q{g}",
                )
            )
    return data


class TestTrainPairwise:
    def test_recovers_planted_ordering(self):
        data = synthetic_pairs(n_groups=12)
        held_out = synthetic_pairs(n_groups=4, seed=99)
        model = train_pairwise(data, C=0.1, seed=0)
        for gid in {lp.group_id for lp in held_out}:
            rows = [lp for lp in held_out if lp.group_id == gid]
            scores = score_pairs(model, [lp.features for lp in rows])
            order = sorted(range(len(rows)), key=lambda i: -scores[i])
            labels = [rows[i].l for i in order]
            assert ndcg_at_k(labels, 5) == pytest.approx(1.0, abs=1e-12)

    def test_c_zero_gives_zero_weights(self):
        model = train_pairwise(synthetic_pairs(), C=0.0)
        assert all(w == 0.0 for w in model.weights.values())

    def test_duplicate_rows_with_equal_labels_change_nothing(self):
        data = synthetic_pairs(n_groups=6)
        dup = data + [
            LabeledPair(
                pair=PassagePair(99, "t", 99),
                features=dict(data[0].features),
                r=data[0].r,
                c=data[0].c,
                l=data[0].l,
                group_id=data[0].group_id,
                query_id=data[0].query_id,
            )
        ]
        m1 = train_pairwise(data, C=0.01, seed=3)
        m2 = train_pairwise(dup, C=0.01, seed=3)
        assert m1.weights == m2.weights

    def test_objective_history_non_increasing(self):
        rng = np.random.default_rng(5)
        diffs = rng.standard_normal((400, 15))
        for C in (0.001, 0.01, 0.1):
            _, history = fit_rank_svm(diffs, C, seed=1)
            for prev, cur in zip(history, history[1:]):
                assert cur <= prev + 1e-9

    def test_no_orderable_pairs(self):
        data = synthetic_pairs(n_groups=2, rows_per_group=3)
        flat = [
            LabeledPair(lp.pair, lp.features, lp.r, lp.c, 1.0, lp.group_id, lp.query_id)
            for lp in data
        ]
        with pytest.raises(ValueError, match="no orderable"):
            train_pairwise(flat, C=0.01)

    def test_bounds_come_from_raw_rows(self):
        data = synthetic_pairs(n_groups=4)
        model = train_pairwise(data, C=0.01)
        lo, hi = model.bounds["QryTermSrc"]
        values = [lp.features["QryTermSrc"] for lp in data]
        assert lo == min(values) and hi == max(values)


class TestCrossValidate:
    def test_single_c_selected(self):
        data = synthetic_pairs()
        trained = cross_validate(data, TrainingConfig(c_grid=(0.01,), folds=3))
        assert trained.chosen_c == 0.01

    def test_tie_break_smallest_c(self):
        data = synthetic_pairs(n_groups=10)
        trained = cross_validate(data, TrainingConfig(folds=5))
        if len({round(v, 9) for v in trained.cv_ndcg.values()}) == 1:
            assert trained.chosen_c == 0.001
        assert trained.cv_ndcg[str(trained.chosen_c)] == max(trained.cv_ndcg.values())

    def test_deterministic_fingerprints(self):
        data = synthetic_pairs()
        cfg = TrainingConfig(folds=4, seed=11)
        t1 = cross_validate(data, cfg)
        t2 = cross_validate(data, cfg)
        assert t1.fingerprint() == t2.fingerprint()
        assert dataset_fingerprint(data) == t1.dataset_fingerprint

    def test_fewer_groups_than_folds(self):
        data = synthetic_pairs(n_groups=3)
        with pytest.raises(ValueError):
            cross_validate(data, TrainingConfig(folds=5))

    def test_metadata_roundtrip(self):
        from rankarena.training import TrainedModel

        trained = cross_validate(synthetic_pairs(), TrainingConfig(folds=3))
        again = TrainedModel.from_dict(trained.to_dict())
        assert again.model.weights == trained.model.weights
        assert again.chosen_c == trained.chosen_c
        assert again.fingerprint() == trained.fingerprint()

    def test_dataset_shape_in_metadata(self):
        from rankarena.training import dataset_shape

        data = synthetic_pairs(n_groups=8, rows_per_group=6)
        shape = dataset_shape(data)
        assert shape == {
            "pairs": 48,
            "documents": 8,
            "pairs_per_document_mean": 6.0,
            "pairs_per_document_std": 0.0,
        }
        trained = cross_validate(data, TrainingConfig(folds=4))
        assert trained.dataset_shape == shape
        assert trained.to_dict()["metadata"]["dataset_shape"] == shape


class TestConfigValidation:
    def test_folds(self):
        with pytest.raises(ValueError):
            TrainingConfig(folds=1)

    def test_c_grid(self):
        with pytest.raises(ValueError):
            TrainingConfig(c_grid=())

    def test_label_mode(self):
        with pytest.raises(ValueError):
            TrainingConfig(label_mode="both")

    def test_labeled_pair_roundtrip(self):
        lp = synthetic_pairs(n_groups=1, rows_per_group=2)[0]
        assert LabeledPair.from_dict(lp.to_dict()) == lp

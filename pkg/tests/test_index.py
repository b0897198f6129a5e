import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

import oracles
from synthetic import planted_clusters, purity
from pathcohort.exceptions import (
    DimensionMismatch,
    EmptyIndex,
    IndexFormatError,
    InvalidValue,
    MissingLineage,
    TooFewPositives,
)
from pathcohort.features import FeatureVector
from pathcohort.index import (
    RankedList,
    SimilarityIndex,
    build_index,
    feedback_search,
    fuse_rankings,
    load_index,
    loads,
    resolve_cohort,
    save_index,
    update_weights,
    weighted_distance,
)


class TestBuild:
    def test_single_vector(self):
        idx = build_index(np.array([[1.0, 2.0, 3.0]]))
        assert idx.weights_.tolist() == [1.0, 1.0, 1.0]
        assert idx.z_.tolist() == [[0.0, 0.0, 0.0]]

    def test_two_vectors_zscores(self):
        idx = build_index(np.array([[0.0, 5.0], [4.0, 5.0]]))
        assert idx.z_[:, 0].tolist() == [-1.0, 1.0]
        assert idx.z_[:, 1].tolist() == [0.0, 0.0]

    def test_nan_rejected(self):
        with pytest.raises(InvalidValue):
            build_index(np.array([[0.0, np.nan]]))
        with pytest.raises(InvalidValue):
            FeatureVector("p", "w", "x", [0.0, np.nan])

    def test_mixed_lengths(self):
        vs = [FeatureVector("a", "w", "p", [1.0, 2.0]), FeatureVector("b", "w", "p", [1.0])]
        with pytest.raises(DimensionMismatch):
            build_index(vs)

    def test_empty(self):
        with pytest.raises(EmptyIndex):
            build_index([])

    def test_feature_vectors_and_ids(self):
        vs = [FeatureVector(f"p{i}", "w", "x", [float(i), 1.0]) for i in range(3)]
        idx = build_index(vs)
        assert idx.ids_ == ["p0", "p1", "p2"] and idx.dim == 2

    def test_duplicate_ids(self):
        with pytest.raises(ValueError):
            build_index(np.zeros((2, 2)), ids=["a", "a"])

    def test_estimator_api(self):
        est = SimilarityIndex(n_jobs=2)
        assert est.get_params() == {"n_jobs": 2}
        assert clone(est).get_params() == {"n_jobs": 2}
        X = np.random.default_rng(0).normal(size=(10, 4))
        Z = est.fit_transform(X)
        np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(Z.std(axis=0), 1, atol=1e-12)

    def test_immutable(self):
        idx = build_index(np.eye(3))
        with pytest.raises(ValueError):
            idx.weights_[0] = 2.0
        view = idx.with_weights([1.0, 2.0, 3.0])
        assert idx.weights_.tolist() == [1.0, 1.0, 1.0]
        assert view.weights_.sum() == pytest.approx(3.0, abs=1e-12)


class TestDistance:
    def test_345(self):
        assert weighted_distance([0, 0], [3, 4], [1, 1]) == 5.0

    def test_identity(self):
        assert weighted_distance([1.5, -2], [1.5, -2], [3, 0.1]) == 0.0

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            weighted_distance([0, 0], [0, 0, 0], [1, 1])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_metric(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = r.normal(size=(3, 6))
        w = r.uniform(0.01, 5, 6)
        ab, bc, ac = weighted_distance(a, b, w), weighted_distance(b, c, w), weighted_distance(a, c, w)
        assert abs(ab - weighted_distance(b, a, w)) <= 1e-9
        assert ac <= ab + bc + 1e-9
        assert ab == pytest.approx(oracles.weighted_distance_loop(a, b, w), rel=1e-12)


class TestQuery:
    def test_self_query(self):
        X = np.random.default_rng(1).normal(size=(50, 31))
        idx = build_index(X)
        res = idx.query(X[17], 5)
        assert res.ids[0] == "17" and res.distances[0] == 0.0

    def test_k_equals_n_and_larger(self):
        X = np.random.default_rng(2).normal(size=(20, 3))
        idx = build_index(X)
        assert sorted(idx.query(X[0], 20).ids) == sorted(idx.ids_)
        assert len(idx.query(X[0], 1000)) == 20

    def test_ties_by_insertion(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [0.0, 0.0]])
        idx = build_index(X, ids=list("abcde"))
        assert idx.query([0.0, 0.0], 5).ids == ("e", "a", "b", "c", "d")
        assert idx.query([0.0, 0.0], 3).ids == ("e", "a", "b")

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_full_scan(self, seed):
        r = np.random.default_rng(seed)
        X = r.normal(size=(300, 8))
        idx = build_index(X).with_weights(r.uniform(0.1, 3, 8))
        q = r.normal(size=8)
        res = idx.query(q, 40)
        ref = oracles.full_scan_sort(idx.z_, idx.transform(q[None])[0], idx.weights_, 40)
        assert [int(i) for i in res.ids] == [i for _, i in ref]
        np.testing.assert_allclose(res.distances, [d for d, _ in ref], rtol=1e-12)

    def test_planted_cluster_query(self):
        X, lab, centers = planted_clusters(0)
        idx = build_index(X)
        for c in range(3):
            assert purity(idx.query(centers[c], 100), lab, c) == 1.0

    def test_sharded_scan_identical(self):
        X = np.random.default_rng(3).normal(size=(1001, 31))
        a = build_index(X).query(X[5] + 0.01, 200)
        b = build_index(X, n_jobs=4).query(X[5] + 0.01, 200)
        assert a.ids == b.ids and np.array_equal(a.distances, b.distances)

    def test_bad_query(self):
        idx = build_index(np.eye(3))
        with pytest.raises(DimensionMismatch):
            idx.query([1.0, 2.0], 1)
        with pytest.raises(ValueError):
            idx.query([1.0, 2.0, 3.0], 0)


class TestWeights:
    def test_two_positive_example(self):
        idx = build_index(np.array([[0.0, 0.0], [0.0, 2.0]]), ids=["a", "b"])
        assert idx.z_.tolist() == [[0.0, -1.0], [0.0, 1.0]]
        w = update_weights(idx, {"a", "b"}, 1e-6)
        raw = np.array([1 / 1e-6, 1 / (1 + 1e-6)])
        np.testing.assert_allclose(w, 2 * raw / raw.sum(), rtol=1e-12)
        assert w.sum() == pytest.approx(2.0, abs=1e-12) and w[0] > 1.999

    def test_identical_dimension_dominates(self):
        r = np.random.default_rng(0)
        X = r.normal(size=(6, 4))
        X[:, 2] = 3.0
        X = np.vstack([X, [0, 0, 10.0, 0]])
        idx = build_index(X)
        w = update_weights(idx, [str(i) for i in range(6)])
        assert np.argmax(w) == 2

    def test_equal_spread_gives_ones(self):
        idx = build_index(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
        np.testing.assert_allclose(update_weights(idx, ["0", "1", "2"]), [1.0, 1.0], rtol=1e-12)

    def test_too_few(self):
        idx = build_index(np.eye(3))
        with pytest.raises(TooFewPositives):
            update_weights(idx, ["0"])
        with pytest.raises(TooFewPositives):
            update_weights(idx, ["0", "0"])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 20))
    def test_sum_invariant(self, seed, m):
        r = np.random.default_rng(seed)
        idx = build_index(r.normal(size=(25, 7)))
        w = update_weights(idx, [str(i) for i in r.choice(25, m, replace=False)])
        assert abs(w.sum() - 7) <= 1e-9 and np.all(w > 0)


class TestFeedback:
    def test_identical_vectors_converge_in_one_round(self):
        idx = build_index(np.ones((10, 4)))
        _, state = feedback_search(idx, np.ones(4), 5)
        assert state.round == 1 and state.converged and state.deltas == [0.0]

    def test_zero_rounds(self):
        X = np.random.default_rng(0).normal(size=(30, 4))
        idx = build_index(X)
        res, state = feedback_search(idx, X[0], 10, max_rounds=0)
        assert res == idx.query(X[0], 10)
        assert state.round == 0 and state.weights is idx.weights_

    def test_positive_set_monotone_and_bounded(self):
        X = np.random.default_rng(4).normal(size=(200, 6))
        idx = build_index(X)
        sizes = []
        for rounds in range(0, 6):
            _, state = feedback_search(idx, X[0], 20, m_positives=10, max_rounds=rounds, tol=0.0)
            assert state.round <= rounds
            sizes.append(len(state.positive_set))
        assert sizes == sorted(sizes)

    def test_single_vector_index(self):
        idx = build_index(np.ones((1, 3)))
        res, state = feedback_search(idx, np.ones(3), 5)
        assert res.ids == ("0",) and state.round == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_planted_purity_not_worse(self, seed):
        X, lab, centers = planted_clusters(seed)
        idx = build_index(X)
        p0 = purity(idx.query(centers[0], 100), lab, 0)
        res, state = feedback_search(idx, centers[0], 100)
        assert state.converged and state.round <= 10
        assert purity(res, lab, 0) >= p0

    def test_learns_noise_dimensions(self):
        # clusters differ in 3 of 31 dimensions: feedback raises mean purity
        before = after = 0.0
        for seed in range(30):
            r = np.random.default_rng(seed)
            centers = np.zeros((3, 31))
            centers[np.arange(3), np.arange(3)] = 10 / math.sqrt(2)
            X = np.concatenate([c + r.normal(0, 0.1, (100, 31)) for c in centers])
            lab = np.repeat(np.arange(3), 100)
            idx = build_index(X)
            before += purity(idx.query(centers[0], 100), lab, 0)
            after += purity(feedback_search(idx, centers[0], 100)[0], lab, 0)
        assert after > before


class TestFusion:
    def rl(self, ids):
        return RankedList(ids, np.arange(len(ids), dtype=float))

    def test_single_list(self):
        assert fuse_rankings([self.rl("abcd")]).ids == tuple("abcd")

    def test_identical_lists(self):
        assert fuse_rankings([self.rl("abcd"), self.rl("abcd")]).ids == tuple("abcd")

    def test_swap_tie(self):
        res = fuse_rankings([self.rl("xy"), self.rl("yx")])
        assert res.ids == ("x", "y")
        assert res.distances[0] == res.distances[1] == -(1 / 61 + 1 / 62)

    def test_missing_contributes_zero(self):
        res = fuse_rankings([self.rl("ab"), self.rl("c")])
        assert res.ids == ("a", "c", "b")
        assert res.distances.tolist() == [-1 / 61, -1 / 61, -1 / 62]

    def test_cut(self):
        assert len(fuse_rankings([self.rl("abcdef")], k=3)) == 3

    def test_rank_only(self):
        a = RankedList(list("abc"), [0.0, 1.0, 2.0])
        b = RankedList(list("abc"), [0.0, 100.0, 1e6])
        assert fuse_rankings([a, self.rl("cab")]) == fuse_rankings([b, self.rl("cab")])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.permutations(list("abcdefgh")), min_size=1, max_size=4))
    def test_three_way_ties_order_independent(self, perms):
        lists = [self.rl(p) for p in perms]
        forward = dict(fuse_rankings(lists))
        backward = dict(fuse_rankings(lists[::-1]))
        assert forward == backward


class TestCohort:
    LINEAGE = {"p1": ("w1", "A"), "p2": ("w2", "B"), "p3": ("w1", "A"), "p4": ("w3", "C"), "p5": ("w4", "B")}

    def test_worked_example(self):
        c = resolve_cohort(RankedList(["p1", "p2", "p3", "p4"], [0, 1, 2, 3]), self.LINEAGE)
        assert c.patient_ids == ("A", "B", "C") and c.support == (2, 1, 1)
        assert sum(c.support) == len(c.source_patches)

    def test_single_patient(self):
        c = resolve_cohort(RankedList(["p1", "p3"], [0, 1]), self.LINEAGE)
        assert c.patient_ids == ("A",) and c.support == (2,)

    def test_empty(self):
        c = resolve_cohort(RankedList([], []), self.LINEAGE)
        assert len(c) == 0

    def test_support_then_rank(self):
        c = resolve_cohort(RankedList(["p4", "p2", "p1", "p5", "p3"], range(5)), self.LINEAGE)
        assert c.patient_ids == ("B", "A", "C")

    def test_exclude(self):
        c = resolve_cohort(RankedList(["p1", "p2", "p3", "p4"], range(4)), self.LINEAGE, exclude_patients={"A"})
        assert c.patient_ids == ("B", "C") and c.source_patches == ("p2", "p4")

    def test_missing(self):
        with pytest.raises(MissingLineage) as err:
            resolve_cohort(RankedList(["p1", "zz"], [0, 1]), self.LINEAGE)
        assert err.value.patch_id == "zz"


class TestPersistence:
    def test_round_trip(self, tmp_path):
        r = np.random.default_rng(0)
        idx = build_index(r.normal(size=(40, 31)), ids=[f"patch-{i}" for i in range(40)])
        idx = idx.with_weights(r.uniform(0.5, 2, 31))
        path = tmp_path / "a.pgix"
        save_index(idx, path)
        back = load_index(path)
        assert back.ids_ == idx.ids_
        for name in ("raw_", "z_", "mean_", "scale_", "weights_"):
            assert np.array_equal(getattr(back, name), getattr(idx, name))
        q = r.normal(size=31)
        assert back.query(q, 10) == idx.query(q, 10)
        assert back.to_bytes() == idx.to_bytes()

    def test_header_layout(self):
        import struct

        data = build_index(np.ones((2, 3)), ids=["a", "bb"]).to_bytes()
        assert data[:5] == b"PGIX\x01"
        assert struct.unpack_from("<IQ", data, 5) == (3, 2)
        assert len(data) == 17 + 3 * 8 * 3 + (4 + 1 + 24) + (4 + 2 + 24)

    @pytest.mark.parametrize("blob,msg", [
        (b"NOPE" + bytes(20), "not a PGIX file"),
        (b"PGIX\x02" + bytes(12), "version"),
        (b"", "not a PGIX file"),
    ])
    def test_rejects(self, blob, msg):
        with pytest.raises(IndexFormatError, match=msg):
            loads(blob)

    def test_truncated(self):
        data = build_index(np.ones((2, 3))).to_bytes()
        with pytest.raises(IndexFormatError, match="truncated"):
            loads(data[:-1])
        with pytest.raises(IndexFormatError, match="trailing"):
            loads(data + b"\x00")

    def test_unicode_ids(self):
        idx = build_index(np.eye(2), ids=["é-1", "патч"])
        assert loads(idx.to_bytes()).ids_ == ["é-1", "патч"]

import numpy as np
import pytest

import oracle
from centerhash import centers as C
from centerhash import hamming, retrieval as R
from centerhash.errors import DimensionError
from centerhash.hamming import PackedCode


def make_index(bit_rows, label_rows):
    bits = np.asarray(bit_rows, dtype=np.uint8)
    labels = np.asarray(label_rows, dtype=np.uint8)
    return R.CodeIndex(k=bits.shape[1], codes=hamming.pack_matrix(bits), labels=labels)


def one_hot(q, j):
    row = np.zeros(q, dtype=np.uint8)
    row[j] = 1
    return row


class TestRanking:
    def test_orders_by_distance(self):
        index = make_index([[0, 0], [1, 1], [0, 1]], [[1], [1], [1]])
        order = R.rank_by_distance(index, PackedCode.from_bits([0, 0]))
        assert list(order) == [0, 2, 1]

    def test_ties_break_by_database_index(self):
        index = make_index([[1, 0], [0, 1], [0, 0]], [[1], [1], [1]])
        order = R.rank_by_distance(index, PackedCode.from_bits([0, 0]))
        assert list(order) == [2, 0, 1]

    def test_exact_match_ranks_first(self):
        index = make_index([[1, 1, 0], [0, 1, 0], [1, 0, 1]], [[1], [1], [1]])
        order = R.rank_by_distance(index, PackedCode.from_bits([0, 1, 0]))
        assert order[0] == 1

    def test_k_mismatch(self):
        index = make_index([[0, 0]], [[1]])
        with pytest.raises(DimensionError):
            R.rank_by_distance(index, PackedCode.from_bits([0, 0, 0]))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(0)
        bits = rng.integers(0, 2, size=(40, 12), dtype=np.uint8)
        labels = np.eye(4, dtype=np.uint8)[rng.integers(0, 4, size=40)]
        query = PackedCode.from_bits(rng.integers(0, 2, size=12, dtype=np.uint8))
        index = make_index(bits, labels)
        dists = hamming.distances_to(query.words, index.codes)

        perm = rng.permutation(40)
        shuffled = make_index(bits[perm], labels[perm])
        order = R.rank_by_distance(index, query)
        order_shuffled = R.rank_by_distance(shuffled, query)
        # same distance profile rank by rank; tie order follows the new indices
        assert np.array_equal(dists[order], dists[perm][order_shuffled])


class TestRelevance:
    def test_shared_category(self):
        assert R.relevant([0, 1, 0], [0, 1, 1]) is True

    def test_disjoint(self):
        assert R.relevant([0, 1], [1, 0]) is False

    def test_partial_overlap(self):
        assert R.relevant([1, 1, 0], [0, 1, 1]) is True


class TestAveragePrecision:
    def test_perfect_prefix(self):
        assert R.average_precision_at_n([1, 1, 0], 3) == 1.0

    def test_single_late_hit(self):
        assert R.average_precision_at_n([0, 1], 2) == 0.5

    def test_no_relevant_items(self):
        assert R.average_precision_at_n([0, 0, 0], 3) == 0.0


class TestMeanAveragePrecision:
    def test_single_query_equals_ap(self):
        index = make_index([[0, 0], [1, 1]], [[1, 0], [0, 1]])
        words = hamming.pack_matrix(np.array([[0, 0]], dtype=np.uint8))
        got = R.mean_average_precision(index, words, np.array([[1, 0]], dtype=np.uint8), 2)
        assert got == R.average_precision_at_n([1, 0], 2)

    def test_mean_of_two_known_queries(self):
        # query 0 sees relevance [1, 0]; query 1 sees [0, 1] -> APs 1.0 and 0.5
        index = make_index([[0, 0], [1, 1]], [[1, 0], [0, 1]])
        words = hamming.pack_matrix(np.array([[0, 0], [1, 1]], dtype=np.uint8))
        labels = np.array([[1, 0], [1, 0]], dtype=np.uint8)
        assert R.mean_average_precision(index, words, labels, 2) == 0.75

    def test_empty_query_set_rejected(self):
        index = make_index([[0, 0]], [[1]])
        with pytest.raises(ValueError):
            R.mean_average_precision(index, np.zeros((0, 1), np.uint64), np.zeros((0, 1), np.uint8), 1)


class TestPrecisionCurves:
    def test_two_rank_curve(self):
        index = make_index([[0, 0], [1, 1]], [[1, 0], [0, 1]])
        words = hamming.pack_matrix(np.array([[0, 0]], dtype=np.uint8))
        curve = R.precision_at_n_curve(index, words, np.array([[1, 0]], dtype=np.uint8), 2)
        assert curve == [(1, 1.0), (2, 0.5)]

    def test_all_relevant_database(self):
        index = make_index([[0, 0], [1, 1], [1, 0]], [[1], [1], [1]])
        words = hamming.pack_matrix(np.array([[0, 1]], dtype=np.uint8))
        curve = R.precision_at_n_curve(index, words, np.array([[1]], dtype=np.uint8), 3)
        assert curve[-1] == (3, 1.0)


class TestPrecisionWithinRadius:
    def test_pure_ball(self):
        index = make_index([[0, 0, 0, 0], [1, 1, 1, 1]], [[1, 0], [0, 1]])
        words = hamming.pack_matrix(np.array([[0, 0, 0, 1]], dtype=np.uint8))
        assert R.precision_within_radius(index, words, np.array([[1, 0]], dtype=np.uint8)) == 1.0

    def test_empty_ball_counts_zero(self):
        index = make_index([[1, 1, 1, 1, 1, 1]], [[1]])
        words = hamming.pack_matrix(np.zeros((1, 6), dtype=np.uint8))
        assert R.precision_within_radius(index, words, np.array([[1]], dtype=np.uint8)) == 0.0

    def test_mixed_ball(self):
        index = make_index([[0, 0, 0, 0], [0, 0, 0, 1]], [[1, 0], [0, 1]])
        words = hamming.pack_matrix(np.zeros((1, 4), dtype=np.uint8))
        assert R.precision_within_radius(index, words, np.array([[1, 0]], dtype=np.uint8)) == 0.5


class TestPrCurve:
    def test_perfect_ranking(self):
        index = make_index(
            [[0, 0, 0, 0], [0, 0, 0, 1], [1, 1, 1, 1], [1, 1, 1, 0]],
            [[1, 0], [1, 0], [0, 1], [0, 1]],
        )
        words = hamming.pack_matrix(np.zeros((1, 4), dtype=np.uint8))
        curve = R.pr_curve(index, words, np.array([[1, 0]], dtype=np.uint8))
        # precision stays 1.0 until recall reaches 1.0, then decays
        assert curve[0] == (0.5, 1.0)
        assert curve[1] == (1.0, 1.0)
        assert curve[-1][0] == 1.0

    def test_final_cutoff_reaches_full_recall(self):
        rng = np.random.default_rng(1)
        index = make_index(
            rng.integers(0, 2, size=(10, 6)), np.eye(3, dtype=np.uint8)[rng.integers(0, 3, 10)]
        )
        words = hamming.pack_matrix(rng.integers(0, 2, size=(3, 6), dtype=np.uint8))
        labels = np.eye(3, dtype=np.uint8)[rng.integers(0, 3, 3)]
        curve = R.pr_curve(index, words, labels)
        assert curve[-1][0] == 1.0
        recalls = [point[0] for point in curve]
        assert recalls == sorted(recalls)


class TestCenterDistanceMatrix:
    def test_codes_at_their_centers(self):
        cs = C.generate_centers(4, 8, seed=0)
        words = cs.packed()
        matrix = R.center_distance_matrix(words, np.arange(4), cs)
        assert np.array_equal(np.diag(matrix), np.zeros(4))
        off = matrix[~np.eye(4, dtype=bool)]
        assert np.array_equal(off, np.full(12, 4.0))

    def test_single_group_leaves_nan_rows(self):
        cs = C.generate_centers(3, 4, seed=0)
        words = hamming.pack_matrix(np.array([[1, 1, 1, 1], [1, 0, 1, 0]], dtype=np.uint8))
        matrix = R.center_distance_matrix(words, np.zeros(2, dtype=int), cs)
        assert np.isfinite(matrix[0]).all()
        assert np.isnan(matrix[1]).all() and np.isnan(matrix[2]).all()

    def test_matches_oracle(self):
        rng = np.random.default_rng(2)
        cs = C.generate_centers_bernoulli(5, 12, seed=3)
        bits = rng.integers(0, 2, size=(30, 12), dtype=np.uint8)
        groups = rng.integers(0, 5, size=30)
        got = R.center_distance_matrix(hamming.pack_matrix(bits), groups, cs)
        want = oracle.center_distance_matrix(
            [list(b) for b in bits], list(groups), [list(c) for c in cs.bits]
        )
        for i in range(5):
            for j in range(5):
                if np.isnan(want[i][j]):
                    assert np.isnan(got[i, j])
                else:
                    assert got[i, j] == want[i][j]


def random_instance(rng):
    n = int(rng.integers(5, 60))
    q = int(rng.integers(1, 6))
    k = int(rng.integers(2, 17))
    nq = int(rng.integers(1, 4))

    def labels(count):
        rows = rng.integers(0, 2, size=(count, q), dtype=np.uint8)
        rows[rows.sum(axis=1) == 0, rng.integers(0, q)] = 1
        return rows

    db_bits = rng.integers(0, 2, size=(n, k), dtype=np.uint8)
    q_bits = rng.integers(0, 2, size=(nq, k), dtype=np.uint8)
    return db_bits, labels(n), q_bits, labels(nq)


def test_all_metrics_match_oracle_on_random_instances():
    rng = np.random.default_rng(99)
    for _ in range(10):
        db_bits, db_labels, q_bits, q_labels = random_instance(rng)
        n = db_bits.shape[0]
        map_n = int(rng.integers(1, n + 1))
        index = make_index(db_bits, db_labels)
        q_words = hamming.pack_matrix(q_bits)

        db_cats = [set(np.flatnonzero(row)) for row in db_labels]
        q_cats = [set(np.flatnonzero(row)) for row in q_labels]
        db_list = [list(map(int, row)) for row in db_bits]
        q_list = [list(map(int, row)) for row in q_bits]

        assert R.mean_average_precision(index, q_words, q_labels, map_n) == (
            oracle.mean_average_precision(db_list, db_cats, q_list, q_cats, map_n)
        )
        assert R.precision_at_n_curve(index, q_words, q_labels, map_n) == (
            oracle.precision_at_n_curve(db_list, db_cats, q_list, q_cats, map_n)
        )
        assert R.precision_within_radius(index, q_words, q_labels, 2) == (
            oracle.precision_within_radius(db_list, db_cats, q_list, q_cats, 2)
        )
        curve = R.pr_curve(index, q_words, q_labels)
        assert curve == oracle.pr_curve(db_list, db_cats, q_list, q_cats)

        # range and monotonicity invariants
        assert 0.0 <= R.mean_average_precision(index, q_words, q_labels, map_n) <= 1.0
        assert 0.0 <= R.precision_within_radius(index, q_words, q_labels, 2) <= 1.0
        recalls = [rec for rec, _ in curve]
        assert all(0.0 <= rec <= 1.0 and 0.0 <= prec <= 1.0 for rec, prec in curve)
        assert recalls == sorted(recalls)


class TestReport:
    def test_csv_sections(self, tmp_path):
        matrix = np.array([[0.0, 2.0], [np.nan, np.nan]])
        report = R.EvalReport(
            map_at_n=0.75,
            p_at_h2=0.5,
            precision_at_n=[(1, 1.0), (2, 0.75)],
            pr_curve=[(0.5, 1.0), (1.0, 0.75)],
            center_distances=matrix,
        )
        path = tmp_path / "report.csv"
        R.write_report(path, report)
        text = path.read_text()
        sections = text.split("\n\n")
        assert sections[0].splitlines()[0] == "metric,value"
        assert "map_at_n,0.75" in sections[0]
        assert sections[1].splitlines()[0] == "rank,precision"
        assert sections[2].splitlines()[0] == "recall,precision"
        assert sections[3].splitlines()[0] == "center_i,center_j,mean_distance"
        assert "1,0,nan" in sections[3]

    def test_runtimes_never_serialized(self, tmp_path):
        report = R.EvalReport(
            map_at_n=1.0, p_at_h2=1.0, precision_at_n=[], pr_curve=[], runtimes={"map": 0.1}
        )
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        R.write_report(a, report)
        report.runtimes = {"map": 99.0}
        R.write_report(b, report)
        assert a.read_bytes() == b.read_bytes()

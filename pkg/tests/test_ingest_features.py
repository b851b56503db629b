import time

import numpy as np
import pytest
from scipy import stats

from conftest import exact_fisher_two_sided
from eqc import (
    Dataset,
    DomainError,
    ParseError,
    SparseDtm,
    fisher_exact_pvalue,
    fisher_exact_select,
    load_dense_csv,
    load_sparse_dtm,
    remove_low_frequency,
    save_dense_csv,
    save_sparse_dtm,
)


def _rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


class TestDenseCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = _rng(1)
        data = Dataset(rng.standard_normal((3, 4)) * 1e-7, [1, 2, 1], ["a", "b", "c", "d"])
        path = tmp_path / "d.csv"
        save_dense_csv(data, path)
        back = load_dense_csv(path)
        assert np.array_equal(back.X, data.X)
        assert np.array_equal(back.y, data.y)
        assert back.var_names == data.var_names

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1.0,2.0\n")
        with pytest.raises(ParseError, match="label"):
            load_dense_csv(path)

    def test_non_numeric_cell_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,v1\n1,0.5\n2,oops\n")
        with pytest.raises(ParseError, match="line 3"):
            load_dense_csv(path)

    def test_ragged_row_line_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,v1,v2\n1,0.5,0.5\n2,0.5\n")
        with pytest.raises(ParseError, match="line 3"):
            load_dense_csv(path)

    def test_bad_label_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("label,v1\n0,0.5\n")
        with pytest.raises(ParseError):
            load_dense_csv(path)

    def test_large_file_loads_quickly(self, tmp_path):
        rng = _rng(2)
        n, p = 10**4, 200
        X = rng.standard_normal((n, p)).round(6)
        y = rng.integers(1, 3, size=n)
        path = tmp_path / "big.csv"
        with open(path, "w") as fh:
            fh.write("label," + ",".join(f"v{j}" for j in range(p)) + "\n")
            np.savetxt(fh, np.column_stack([y, X]), delimiter=",", fmt="%.6g")
        t0 = time.perf_counter()
        data = load_dense_csv(path)
        elapsed = time.perf_counter() - t0
        assert data.X.shape == (n, p)
        assert elapsed < 5.0


def _toy_dtm():
    # 4 docs x 5 terms; doc 3 is empty; term 4 appears once
    return SparseDtm(
        n_docs=4, n_terms=5,
        docs=np.array([0, 0, 1, 1, 3, 3]),
        terms=np.array([0, 1, 0, 2, 2, 4]),
        counts=np.array([2, 1, 3, 1, 2, 1]),
        labels=np.array([1, 1, 2, 2]),
        term_names=["alpha", "beta", "gamma", "delta", "eps"],
    )


class TestSparseDtm:
    def test_empty_document_is_valid(self):
        dtm = _toy_dtm()
        dense = dtm.to_dense()
        assert np.all(dense.X[2] == 0.0)

    def test_duplicate_pair_rejected(self):
        with pytest.raises(DomainError, match="duplicate"):
            SparseDtm(2, 2, np.array([0, 0]), np.array([1, 1]),
                      np.array([1, 2]), np.array([1, 2]))

    def test_nonpositive_count_rejected(self):
        with pytest.raises(DomainError):
            SparseDtm(2, 2, np.array([0]), np.array([1]),
                      np.array([0]), np.array([1, 2]))

    def test_file_round_trip(self, tmp_path):
        dtm = _toy_dtm()
        m, l = tmp_path / "m.txt", tmp_path / "l.txt"
        save_sparse_dtm(dtm, m, l)
        back = load_sparse_dtm(m, l)
        assert np.array_equal(back.to_dense().X, dtm.to_dense().X)
        assert np.array_equal(back.labels, dtm.labels)

    def test_header_count_mismatch(self, tmp_path):
        m, l = tmp_path / "m.txt", tmp_path / "l.txt"
        m.write_text("2 2 3\n1 1 1\n")
        l.write_text("1\n2\n")
        with pytest.raises(ParseError, match="entries"):
            load_sparse_dtm(m, l)

    def test_out_of_range_index(self, tmp_path):
        m, l = tmp_path / "m.txt", tmp_path / "l.txt"
        m.write_text("2 2 1\n3 1 1\n")
        l.write_text("1\n2\n")
        with pytest.raises(ParseError, match="line 2"):
            load_sparse_dtm(m, l)


class TestRemoveLowFrequency:
    def test_singleton_term_dropped(self):
        dtm = _toy_dtm()
        out, kept = remove_low_frequency(dtm, 2)
        assert 4 not in kept  # "eps" appeared in one document
        assert 1 not in kept  # "beta" too
        assert np.all(out.document_frequencies() >= 2)

    def test_min_docs_one_is_identity_on_columns(self):
        dtm = _toy_dtm()
        out, kept = remove_low_frequency(dtm, 1)
        # term 3 never appears at all, so it is the only drop at min_docs=1
        assert list(kept) == [0, 1, 2, 4]

    def test_all_removed_errors(self):
        dtm = _toy_dtm()
        with pytest.raises(DomainError):
            remove_low_frequency(dtm, 10)


class TestFisher:
    def test_perfect_split_table(self):
        # [[5,0],[0,5]]: only the two extreme tables are as unlikely
        assert fisher_exact_pvalue(5, 0, 0, 5) == pytest.approx(2.0 / 252.0, abs=1e-12)

    def test_flat_table_p_one(self):
        assert fisher_exact_pvalue(1, 1, 1, 1) == pytest.approx(1.0, abs=1e-12)

    def test_matches_scipy(self):
        rng = _rng(3)
        for _ in range(50):
            a, b, c, d = (int(v) for v in rng.integers(0, 10, size=4))
            ours = fisher_exact_pvalue(a, b, c, d)
            ref = stats.fisher_exact([[a, b], [c, d]])[1]
            assert ours == pytest.approx(ref, abs=1e-9)

    def test_matches_exact_enumeration(self):
        rng = _rng(4)
        for _ in range(100):
            a, b, c, d = (int(v) for v in rng.integers(0, 12, size=4))
            assert fisher_exact_pvalue(a, b, c, d) == pytest.approx(
                exact_fisher_two_sided(a, b, c, d), abs=1e-12
            )

    def test_one_sided_upper_tail(self):
        p = fisher_exact_pvalue(5, 0, 0, 5, two_sided=False)
        assert p == pytest.approx(1.0 / 252.0, abs=1e-14)

    def test_select_keeps_informative_terms(self):
        rng = _rng(5)
        n = 60
        y = np.repeat([1, 2], 30)
        X = (rng.random((n, 10)) < 0.3).astype(float)
        X[y == 2, 0] = (rng.random(30) < 0.9).astype(float)  # signal column
        idx = fisher_exact_select(X, y, 3)
        assert 0 in idx
        assert len(idx) == 3

    def test_clamps_l_with_warning(self):
        X = _rng(6).random((10, 3))
        y = np.array([1] * 5 + [2] * 5)
        with pytest.warns(UserWarning):
            idx = fisher_exact_select(X, y, 9)
        assert len(idx) == 3

    def test_null_column_pvalues_roughly_uniform(self):
        rng = _rng(7)
        pvals = []
        for rep in range(200):
            y = np.repeat([1, 2], 20)
            col = (rng.random(40) < 0.5).astype(float)
            a = int(col[y == 1].sum())
            c = int(col[y == 2].sum())
            pvals.append(fisher_exact_pvalue(a, 20 - a, c, 20 - c))
        # discrete p-values are super-uniform under the null; check the
        # rejection rate rather than a strict KS fit
        assert np.mean(np.asarray(pvals) <= 0.05) <= 0.08

    def test_requires_binary_labels(self):
        X = _rng(8).random((9, 2))
        with pytest.raises(DomainError):
            fisher_exact_select(X, np.array([1, 2, 3] * 3), 1)

import numpy as np
import pytest

from wppi.expression import (
    ExpressionMatrix,
    match_genes,
    pearson,
    pearson_flagged,
    quantile_normalize,
    quantile_normalize_values,
    standardize_rows,
)
from wppi.model import intern_proteins

from .oracles import pearson_direct, quantile_normalize_direct


def matrix_of(values, genes=None):
    values = np.asarray(values, dtype=float)
    genes = genes or [f"G{i}" for i in range(values.shape[0])]
    return ExpressionMatrix(
        gene_index={g: i for i, g in enumerate(genes)},
        values=values,
        sample_names=[f"S{j}" for j in range(values.shape[1])],
    )


class TestQuantileNormalize:
    def test_identical_columns_unchanged(self):
        values = np.array([[1.0, 1.0], [5.0, 5.0], [2.0, 2.0]])
        out = quantile_normalize_values(values)
        assert np.allclose(out, values)

    def test_two_by_two_matches_oracle(self):
        values = [[1.0, 4.0], [3.0, 2.0]]
        expected = quantile_normalize_direct(values)
        assert expected == [[1.5, 3.5], [3.5, 1.5]]
        out = quantile_normalize_values(np.array(values))
        assert np.array_equal(out, np.array(expected))

    def test_single_column_fixed_point(self):
        values = np.array([[3.0], [1.0], [2.0]])
        assert np.array_equal(quantile_normalize_values(values), values)

    def test_ties_get_mean_of_covered_ranks(self):
        values = [[2.0, 1.0], [2.0, 3.0], [5.0, 4.0]]
        expected = quantile_normalize_direct(values)
        out = quantile_normalize_values(np.array(values))
        assert np.allclose(out, np.array(expected), atol=1e-15)

    def test_random_matrices_match_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            values = rng.normal(size=(rng.integers(2, 12), rng.integers(2, 6)))
            expected = np.array(quantile_normalize_direct(values.tolist()))
            assert np.allclose(quantile_normalize_values(values), expected, atol=1e-12)

    def test_matrix_level_requires_two_samples(self):
        with pytest.raises(ValueError, match="insufficient samples"):
            quantile_normalize(matrix_of([[1.0], [2.0]]))

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        values = rng.normal(size=(20, 5))
        once = quantile_normalize_values(values)
        twice = quantile_normalize_values(once)
        assert np.allclose(once, twice, atol=1e-12)

    def test_columns_share_sorted_values(self):
        rng = np.random.default_rng(2)
        out = quantile_normalize_values(rng.normal(size=(15, 4)))
        reference = np.sort(out[:, 0])
        for c in range(1, 4):
            assert np.allclose(np.sort(out[:, c]), reference, atol=1e-12)


class TestPearson:
    def test_perfect_correlation(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_perfect_anticorrelation(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_against_direct_formula(self):
        expected = pearson_direct([1, 2, 4], [2, 2, 5])
        assert expected == pytest.approx(0.9449, abs=5e-5)
        assert pearson([1, 2, 4], [2, 2, 5]) == pytest.approx(expected, abs=1e-12)

    def test_constant_vector_flagged(self):
        value, flagged = pearson_flagged([1.0, 1.0, 1.0], [1, 2, 3])
        assert value == 0.0
        assert flagged

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=9)
        b = rng.normal(size=9)
        assert pearson(a, b) == pytest.approx(pearson(b, a), abs=1e-15)

    def test_short_vectors_rejected(self):
        with pytest.raises(ValueError, match="insufficient samples"):
            pearson([1.0], [2.0])

    def test_standardize_rows_reproduces_pearson(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(6, 8))
        z, flat = standardize_rows(values)
        assert not flat.any()
        m = values.shape[1]
        for i in range(6):
            for j in range(6):
                dot = float(np.dot(z[i], z[j])) / m
                assert dot == pytest.approx(pearson(values[i], values[j]), abs=1e-12)


class TestMatchGenes:
    def test_full_match(self):
        proteins = intern_proteins(["A", "B"])
        matched = match_genes(proteins, matrix_of([[1, 2], [3, 4]], ["A", "B"]))
        assert matched.ratio_percent == 100.0
        assert matched.rows == [0, 1]

    def test_no_match(self):
        proteins = intern_proteins(["X", "Y"])
        matched = match_genes(proteins, matrix_of([[1, 2]], ["A"]))
        assert matched.ratio_percent == 0.0
        assert matched.rows == [None, None]

    def test_mapping_table_redirects(self):
        proteins = intern_proteins(["P1", "P2"])
        matrix = matrix_of([[1, 2], [3, 4]], ["gA", "gB"])
        matched = match_genes(proteins, matrix, {"P1": "gB", "P2": "gMissing"})
        assert matched.rows == [1, None]
        assert matched.matched == 1

    def test_ratio_formats_like_reports(self):
        # synthetic stand-in for a realistic high-coverage match ratio
        proteins = intern_proteins([f"P{i}" for i in range(173)])
        genes = [f"P{i}" for i in range(170)]
        matrix = matrix_of(np.zeros((170, 2)), genes)
        matched = match_genes(proteins, matrix)
        assert f"{matched.ratio_percent:.2f}%" == "98.27%"

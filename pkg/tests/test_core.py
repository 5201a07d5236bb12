import math

import numpy as np
import pytest

from modules.core.information import (
    assign, best_codebook, clustering_objective, code_cost, entropies, entropy,
    expected_cost, kl_divergence, kl_matrix, kraft_check,
)
from modules.core.types import (
    Codebook, CodebookSet, DiscretePreference, ItemSpec, PartitionAssignment, SoftAssignment, Spv,
)
from modules.error_handler.errors import AllInfinite, DimensionMismatch, InvalidDistribution


class TestTypes:
    def test_spv_rejects_bad_sum(self):
        with pytest.raises(InvalidDistribution):
            Spv([0.5, 0.6])

    def test_spv_ingest_renormalizes(self):
        assert np.allclose(Spv.ingest([1.0, 3.0]).probs, [0.25, 0.75])

    def test_spv_needs_two_symbols(self):
        with pytest.raises(InvalidDistribution):
            Spv([1.0])

    def test_negative_entries_rejected(self):
        with pytest.raises(InvalidDistribution):
            Spv([1.5, -0.5])

    def test_codebook_allows_deficient_kraft(self):
        assert Codebook([0.25, 0.25]).n == 2

    def test_codebook_rejects_kraft_violation(self):
        with pytest.raises(InvalidDistribution):
            Codebook([0.75, 0.5])

    def test_codebook_set_mixed_lengths(self):
        with pytest.raises(DimensionMismatch):
            CodebookSet.of([[0.5, 0.5], [0.2, 0.3, 0.5]])

    def test_arrays_are_read_only(self):
        cs = CodebookSet([[0.5, 0.5]])
        with pytest.raises(ValueError):
            cs.matrix[0, 0] = 1.0

    def test_preference_probs_must_match(self):
        with pytest.raises(DimensionMismatch):
            DiscretePreference([[0.5, 0.5], [1.0, 0.0]], [1.0])

    def test_preference_ingest_normalizes_probs(self):
        pref = DiscretePreference.ingest([[2.0, 2.0], [1.0, 0.0]], [3.0, 1.0])
        assert np.allclose(pref.probs, [0.75, 0.25])
        assert np.allclose(pref.spvs[0], [0.5, 0.5])

    def test_partition_range(self):
        with pytest.raises(DimensionMismatch):
            PartitionAssignment([0, 2], 2)

    def test_soft_assignment_hard_ties_to_lowest(self):
        soft = SoftAssignment([[0.5, 0.5], [0.2, 0.8]])
        assert soft.hard().owner.tolist() == [0, 1]

    def test_item_empirical(self):
        item = ItemSpec([0, 1, 1, 3])
        assert np.allclose(item.empirical(4), [0.25, 0.5, 0.0, 0.25])
        with pytest.raises(DimensionMismatch):
            item.check_alphabet(3)


class TestInformation:
    def test_entropy_fair_coin(self):
        assert entropy([0.5, 0.5]) == pytest.approx(1.0)

    def test_entropy_ignores_zeros(self):
        assert entropy([1.0, 0.0, 0.0]) == 0.0

    def test_kl_demo_value(self):
        assert kl_divergence([0.75, 0.25], [0.5, 0.5]) == pytest.approx(0.1887219, abs=1e-7)

    def test_kl_infinite_on_missing_support(self):
        assert math.isinf(kl_divergence([0.5, 0.5], [1.0, 0.0]))

    def test_kl_zero_on_equal(self):
        assert kl_divergence([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == pytest.approx(0.0, abs=1e-15)

    def test_kl_matrix_matches_pairwise(self, random_pref):
        pref = random_pref(j=7, n=3)
        books = pref.spvs[:3]
        divs = kl_matrix(pref.spvs, books)
        assert divs.shape == (7, 3)
        assert divs[4, 1] == pytest.approx(kl_divergence(pref.spvs[4], books[1]))

    def test_kl_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kl_matrix([[0.5, 0.5]], [[0.2, 0.3, 0.5]])

    def test_code_cost_is_entropy_plus_divergence(self):
        p, q = np.array([0.75, 0.25]), np.array([0.5, 0.5])
        assert code_cost(p, q, 20) == pytest.approx(20 * (entropy(p) + kl_divergence(p, q)))
        assert code_cost(p, q, 20) == pytest.approx(20.0)

    def test_best_codebook_ties_lowest(self):
        k, d = best_codebook([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
        assert (k, d) == (0, 0.0)

    def test_best_codebook_all_infinite(self):
        with pytest.raises(AllInfinite):
            best_codebook([0.5, 0.5], [[1.0, 0.0], [1.0, 0.0]])

    def test_assign_raises_unless_allowed(self):
        with pytest.raises(AllInfinite):
            assign([[0.5, 0.5]], [[1.0, 0.0]])
        owner, mins = assign([[0.5, 0.5]], [[1.0, 0.0]], allow_infinite=True)
        assert owner.tolist() == [0] and math.isinf(mins[0])

    def test_expected_cost_demo(self, pref1):
        bits, partition = expected_cost(pref1, CodebookSet([[0.5, 0.5, 0.0, 0.0]]), 20)
        assert bits == pytest.approx(20.0)
        assert partition.owner.tolist() == [0, 0, 0, 0]

    def test_expected_cost_skips_unrequested_items(self, pref1):
        # items 2 and 3 are unencodable but never requested
        bits, _ = expected_cost(pref1, CodebookSet([[0.5, 0.5, 0.0, 0.0]]), 1)
        assert math.isfinite(bits)

    def test_expected_cost_requested_unencodable(self, pref3):
        with pytest.raises(AllInfinite):
            expected_cost(pref3, CodebookSet([[0.5, 0.5, 0.0, 0.0]]), 20)

    def test_clustering_objective_given_owner(self, pref3):
        books = [[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]]
        value = clustering_objective(pref3.spvs, pref3.probs, books, owner=[0, 0, 1, 1])
        assert value == pytest.approx(0.1887219, abs=1e-7)
        assert clustering_objective(pref3.spvs, pref3.probs, books) == pytest.approx(value)

    def test_entropies_rowwise(self, demo_spvs):
        assert np.allclose(entropies(demo_spvs), 0.8112781, atol=1e-7)

    def test_kraft_check(self):
        assert kraft_check([0.5, 0.5])
        assert not kraft_check([0.6, 0.5])
        assert kraft_check([0.5, 0.25, 0.125])

    def test_code_cost_unsupported_symbol(self):
        assert math.isinf(code_cost([1.0, 0.0], [0.0, 1.0], 20))

    def test_clustering_objective_adds_over_clusters(self, random_pref):
        pref = random_pref(j=12, n=4, seed=3)
        centers = pref.spvs[[0, 5, 9]]
        owner = np.arange(12) % 3
        total = clustering_objective(pref.spvs, pref.probs, centers, owner=owner)
        parts = sum(
            clustering_objective(pref.spvs[owner == k], pref.probs[owner == k], centers[[k]])
            for k in range(3)
        )
        assert total == pytest.approx(parts, abs=1e-12)

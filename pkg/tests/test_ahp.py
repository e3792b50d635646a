"""AHP engine: weight derivation, consistency, aggregation, and hierarchy
synthesis, cross-checked against direct eigendecomposition oracles."""

from __future__ import annotations

import numpy as np
import pytest

from oracles import eig_principal as eig_oracle
from temai.ahp import (
    PairwiseMatrix,
    RANDOM_INDEX,
    WeightVector,
    aggregate_experts,
    consistency,
    derive_weights,
    simulate_random_index,
    synthesize_hierarchy,
)
from temai.errors import NumericsError, ValidationError


def consistent_matrix(weights: list[float]) -> PairwiseMatrix:
    n = len(weights)
    values = [[weights[i] / weights[j] for j in range(n)] for i in range(n)]
    return PairwiseMatrix([f"item{i}" for i in range(n)], values)


class TestPairwiseMatrixValidation:
    def test_non_reciprocal_rejected(self):
        with pytest.raises(ValidationError, match="reciprocity"):
            PairwiseMatrix(["a", "b"], [[1, 2], [0.4, 1]])

    def test_non_positive_rejected(self):
        with pytest.raises(ValidationError, match="positive"):
            PairwiseMatrix(["a", "b"], [[1, -2], [-0.5, 1]])

    def test_bad_diagonal_rejected(self):
        with pytest.raises(ValidationError, match="diagonal"):
            PairwiseMatrix(["a", "b"], [[2, 2], [0.5, 0.5]])

    def test_outside_scale_rejected_not_clamped(self):
        with pytest.raises(ValidationError, match="scale"):
            PairwiseMatrix(["a", "b"], [[1, 12], [1 / 12, 1]])

    def test_scale_bounds_inclusive(self):
        PairwiseMatrix(["a", "b"], [[1, 9], [1 / 9, 1]])

    def test_csv_round_trip_with_fractions(self):
        text = ",a,b,c\na,1,2,4\nb,1/2,1,2\nc,1/4,1/2,1\n"
        matrix = PairwiseMatrix.from_csv(text)
        assert matrix.items == ("a", "b", "c")
        assert matrix.values[1][0] == pytest.approx(0.5)
        assert matrix.values[2][0] == pytest.approx(0.25)

    def test_csv_without_row_labels(self):
        text = "a,b\n1,3\n1/3,1\n"
        matrix = PairwiseMatrix.from_csv(text)
        assert matrix.values[0][1] == 3.0

    def test_csv_shape_mismatch(self):
        with pytest.raises(ValidationError):
            PairwiseMatrix.from_csv("a,b\n1,2\n")


class TestDeriveWeights:
    def test_uniform_2x2(self):
        matrix = PairwiseMatrix(["a", "b"], [[1, 1], [1, 1]])
        weights = derive_weights(matrix)
        assert weights.weights == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_consistent_recovery(self):
        matrix = consistent_matrix([0.6, 0.3, 0.1])
        for method in ("eigenvector", "geometric_mean"):
            weights = derive_weights(matrix, method)
            assert weights.weights == pytest.approx((0.6, 0.3, 0.1), abs=1e-8)

    def test_hand_solvable_consistent_3x3(self):
        matrix = PairwiseMatrix(
            ["a", "b", "c"], [[1, 2, 4], [1 / 2, 1, 2], [1 / 4, 1 / 2, 1]]
        )
        weights = derive_weights(matrix)
        assert weights.weights == pytest.approx((4 / 7, 2 / 7, 1 / 7), abs=1e-8)
        oracle_weights, _ = eig_oracle(matrix.values)
        assert weights.weights == pytest.approx(tuple(oracle_weights), abs=1e-8)

    def test_methods_agree_on_consistent_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            raw = rng.uniform(0.5, 3.0, size=4)
            matrix = consistent_matrix(list(raw / raw.sum()))
            ev = derive_weights(matrix, "eigenvector").weights
            gm = derive_weights(matrix, "geometric_mean").weights
            assert ev == pytest.approx(gm, abs=1e-8)

    def test_inconsistent_matrix_matches_eig_oracle(self):
        matrix = PairwiseMatrix(
            ["a", "b", "c", "d"],
            [[1, 3, 5, 2], [1 / 3, 1, 2, 1 / 2], [1 / 5, 1 / 2, 1, 1 / 4], [1 / 2, 2, 4, 1]],
        )
        weights = derive_weights(matrix)
        oracle_weights, _ = eig_oracle(matrix.values)
        assert weights.weights == pytest.approx(tuple(oracle_weights), abs=1e-8)

    def test_generating_vector_scale_invariance(self):
        # a consistent matrix built from any positive rescaling of the same
        # weight vector is literally the same matrix, so derived weights
        # cannot depend on the generating vector's scale
        raw = [0.6, 0.3, 0.1]
        for scale in (1.0, 7.0, 0.01):
            matrix = consistent_matrix([scale * w for w in raw])
            assert derive_weights(matrix).weights == pytest.approx(tuple(raw), abs=1e-8)

    def test_row_column_rescaling_transforms_weights_covariantly(self):
        # multiplying row i and dividing column i by c is the similarity
        # transform D·A·D⁻¹: it keeps the matrix reciprocal but rescales
        # item i's priority by exactly c (then renormalized) — the precise
        # algebra behind "scaling a judgment scales the weight"
        base = PairwiseMatrix(
            ["a", "b", "c"], [[1, 3, 1 / 2], [1 / 3, 1, 1 / 4], [2, 4, 1]]
        )
        values = np.array(base.values)
        c = 1.5
        scaled = values.copy()
        scaled[0, :] *= c
        scaled[:, 0] /= c
        w0 = np.array(derive_weights(base).weights)
        w1 = np.array(derive_weights(PairwiseMatrix(base.items, scaled)).weights)
        expected = w0 * np.array([c, 1.0, 1.0])
        expected /= expected.sum()
        assert w1 == pytest.approx(expected, abs=1e-8)

    def test_unknown_method_rejected(self):
        matrix = PairwiseMatrix(["a", "b"], [[1, 2], [0.5, 1]])
        with pytest.raises(ValidationError):
            derive_weights(matrix, "least_squares")

    def test_nonconvergence_reports_iterations(self):
        import temai.ahp as ahp_module

        # unequal row sums, so the uniform start is far from the eigenvector
        matrix = PairwiseMatrix(
            ["a", "b", "c"], [[1, 3, 5], [1 / 3, 1, 1 / 2], [1 / 5, 2, 1]]
        )
        with pytest.raises(NumericsError) as exc_info:
            ahp_module._principal_eigenvector(matrix.values, max_iter=2)
        assert exc_info.value.iterations == 2


class TestConsistency:
    def test_consistent_matrix_cr_zero(self):
        report = consistency(consistent_matrix([0.5, 0.3, 0.2]))
        assert report.consistency_ratio == pytest.approx(0.0, abs=1e-8)
        assert report.lambda_max == pytest.approx(3.0, abs=1e-8)
        assert report.acceptable

    def test_cyclic_judgments_unacceptable(self):
        matrix = PairwiseMatrix(
            ["a", "b", "c"], [[1, 3, 1 / 3], [1 / 3, 1, 3], [3, 1 / 3, 1]]
        )
        _, lam = eig_oracle(matrix.values)
        report = consistency(matrix)
        assert report.lambda_max == pytest.approx(lam, abs=1e-8)
        assert report.consistency_ratio > 0.1
        assert not report.acceptable

    def test_2x2_always_consistent(self):
        report = consistency(PairwiseMatrix(["a", "b"], [[1, 7], [1 / 7, 1]]))
        assert report.consistency_index == 0.0
        assert report.acceptable

    def test_order_above_10_unsupported(self):
        n = 11
        items = [f"i{k}" for k in range(n)]
        matrix = PairwiseMatrix(items, np.ones((n, n)))
        with pytest.raises(ValidationError, match="order"):
            consistency(matrix)

    def test_lambda_equals_n_for_consistent(self):
        for n in (3, 5, 8):
            rng = np.random.default_rng(n)
            raw = rng.uniform(0.8, 1.4, size=n)
            report = consistency(consistent_matrix(list(raw / raw.sum())))
            assert report.lambda_max == pytest.approx(n, abs=1e-8)


class TestAggregateExperts:
    def test_single_expert_identity(self):
        matrix = PairwiseMatrix(["a", "b"], [[1, 4], [0.25, 1]])
        combined = aggregate_experts([matrix])
        assert np.allclose(combined.values, matrix.values)

    def test_geometric_mean_of_two(self):
        m1 = PairwiseMatrix(["a", "b"], [[1, 2], [0.5, 1]])
        m2 = PairwiseMatrix(["a", "b"], [[1, 8], [0.125, 1]])
        combined = aggregate_experts([m1, m2])
        assert combined.values[0][1] == pytest.approx(4.0, abs=1e-12)

    def test_cube_root_of_three(self):
        mats = [
            PairwiseMatrix(["a", "b"], [[1, v], [1 / v, 1]]) for v in (1.0, 3.0, 9.0)
        ]
        combined = aggregate_experts(mats)
        assert combined.values[0][1] == pytest.approx(3.0, abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(11)
        mats = []
        for _ in range(4):
            v = rng.choice([1 / 3, 1 / 2, 1, 2, 3], size=3)
            mats.append(
                PairwiseMatrix(
                    ["a", "b", "c"],
                    [[1, v[0], v[1]], [1 / v[0], 1, v[2]], [1 / v[1], 1 / v[2], 1]],
                )
            )
        forward = aggregate_experts(mats)
        backward = aggregate_experts(list(reversed(mats)))
        assert np.allclose(forward.values, backward.values, atol=1e-12)

    def test_output_satisfies_reciprocity(self):
        m1 = PairwiseMatrix(["a", "b", "c"], [[1, 3, 7], [1 / 3, 1, 2], [1 / 7, 1 / 2, 1]])
        m2 = PairwiseMatrix(["a", "b", "c"], [[1, 1 / 2, 5], [2, 1, 4], [1 / 5, 1 / 4, 1]])
        combined = aggregate_experts([m1, m2])
        assert np.allclose(combined.values * combined.values.T, 1.0, atol=1e-12)

    def test_mismatched_items_rejected(self):
        m1 = PairwiseMatrix(["a", "b"], [[1, 2], [0.5, 1]])
        m2 = PairwiseMatrix(["a", "c"], [[1, 2], [0.5, 1]])
        with pytest.raises(ValidationError):
            aggregate_experts([m1, m2])

    def test_empty_list_rejected(self):
        with pytest.raises(ValidationError):
            aggregate_experts([])


class TestSynthesizeHierarchy:
    def test_reproduces_store_capability_column(self):
        # component split 2/3 : 1/3 with the store capability per-component
        # ratios must land within 0.5 permyriad of the published entries
        dimension = WeightVector(("capability",), (1.0,))
        components = {
            "capability": WeightVector(
                ("intelligent_level", "equipment_compatibility"), (0.6667, 0.3333)
            )
        }
        intelligent = (1888.89, 1666.67, 1444.44, 1111.11, 555.56)
        equipment = (1333.33, 1111.11, 888.89)
        criteria = {
            "intelligent_level": WeightVector(
                (
                    "perception_capability",
                    "analytical_capability",
                    "decision_making_capability",
                    "execution_capability",
                    "evolution_capability",
                ),
                tuple(w / sum(intelligent) for w in intelligent),
            ),
            "equipment_compatibility": WeightVector(
                ("environmental_adaptation", "sensor_integration", "human_machine_interaction_maturity"),
                tuple(w / sum(equipment) for w in equipment),
            ),
        }
        table = synthesize_hierarchy(dimension, components, criteria, table_id="capability_only")
        assert table.entries["perception_capability"] == pytest.approx(1888.89, abs=0.5)
        assert table.entries["evolution_capability"] == pytest.approx(555.56, abs=0.5)
        assert table.entries["environmental_adaptation"] == pytest.approx(1333.33, abs=0.5)

    def test_degenerate_chain_hits_10000(self):
        table = synthesize_hierarchy(
            WeightVector(("capability",), (1.0,)),
            {"capability": WeightVector(("only_component",), (1.0,))},
            {"only_component": WeightVector(("only_criterion",), (1.0,))},
        )
        assert table.entries["only_criterion"] == pytest.approx(10000.0, abs=1e-9)

    def test_uniform_split(self):
        table = synthesize_hierarchy(
            WeightVector(("capability",), (1.0,)),
            {"capability": WeightVector(("c1", "c2"), (0.5, 0.5))},
            {
                "c1": WeightVector(("k1", "k2"), (0.5, 0.5)),
                "c2": WeightVector(("k3", "k4"), (0.5, 0.5)),
            },
        )
        assert all(v == pytest.approx(2500.0, abs=1e-9) for v in table.entries.values())

    def test_dimension_sums_hit_10000(self):
        table = synthesize_hierarchy(
            WeightVector(("capability", "adoption"), (0.5, 0.5)),
            {
                "capability": WeightVector(("c1",), (1.0,)),
                "adoption": WeightVector(("c2", "c3"), (0.3, 0.7)),
            },
            {
                "c1": WeightVector(("k1", "k2"), (0.25, 0.75)),
                "c2": WeightVector(("k3",), (1.0,)),
                "c3": WeightVector(("k4", "k5"), (0.6, 0.4)),
            },
        )
        assert table.entries["k1"] + table.entries["k2"] == pytest.approx(10000.0, abs=0.05)
        assert (
            table.entries["k3"] + table.entries["k4"] + table.entries["k5"]
            == pytest.approx(10000.0, abs=0.05)
        )

    def test_unreachable_criterion_rejected(self):
        with pytest.raises(ValidationError, match="unreachable"):
            synthesize_hierarchy(
                WeightVector(("capability",), (1.0,)),
                {"capability": WeightVector(("c1",), (1.0,))},
                {
                    "c1": WeightVector(("k1",), (1.0,)),
                    "c_orphan": WeightVector(("k2",), (1.0,)),
                },
            )

    def test_duplicate_criterion_rejected(self):
        with pytest.raises(ValidationError, match="more than one chain"):
            synthesize_hierarchy(
                WeightVector(("capability",), (1.0,)),
                {"capability": WeightVector(("c1", "c2"), (0.5, 0.5))},
                {
                    "c1": WeightVector(("k1",), (1.0,)),
                    "c2": WeightVector(("k1",), (1.0,)),
                },
            )


class TestWeightVector:
    def test_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            WeightVector(("a", "b"), (0.6, 0.5))

    def test_must_be_positive(self):
        with pytest.raises(ValidationError):
            WeightVector(("a", "b"), (1.0, 0.0))


class TestRandomIndexOracle:
    def test_small_sample_tracks_table(self):
        # the full ≥100k-sample validation runs in the acceptance suite;
        # this is a fast smoke check that the simulation is wired correctly
        estimate = simulate_random_index(4, samples=4000, seed=5)
        assert estimate == pytest.approx(RANDOM_INDEX[4], abs=0.08)

    def test_batched_lambda_agrees_with_eig(self):
        from temai.ahp import SAATY_SCALE_VALUES, _batch_lambda_max

        rng = np.random.default_rng(3)
        n, b = 5, 64
        iu = np.triu_indices(n, k=1)
        mats = np.ones((b, n, n))
        draws = rng.choice(np.array(SAATY_SCALE_VALUES), size=(b, len(iu[0])))
        mats[:, iu[0], iu[1]] = draws
        mats[:, iu[1], iu[0]] = 1.0 / draws
        lam = _batch_lambda_max(mats)
        expected = [eig_oracle(m)[1] for m in mats]
        assert lam == pytest.approx(expected, abs=1e-6)

    def test_below_order_3_is_zero(self):
        assert simulate_random_index(2, samples=10) == 0.0

"""Network morphisms: validation, composition, decomposition, updates.

Morphism direction is contravariant: alpha maps the target network's graph
into the source network's graph, while eta carries source domains to
products of target domains.  The tests build morphisms from the three
concrete families the library constructs (identities, marginalizations,
update witnesses) plus hand-made contractions.
"""

import numpy as np
import pytest

from chordalnet import (
    BayesianNetwork,
    ChordalNetwork,
    DegenerateDistributionError,
    GraphHom,
    Kernel,
    MarkovNetwork,
    NetworkMorphism,
    OrderedDag,
    PearlVertexUpdate,
    VariableTable,
    bn_joint,
    compose_morphisms,
    decompose_morphism,
    identity_morphism,
    marginalization_morphism,
    mn_to_bn,
    mn_unnormalized,
    moralise_bn,
    network_distribution,
    pearl_update,
    transfer_matrix,
    triangulate_mn,
    validate_morphism,
)
from helpers import bear_bn, oracle_mn_table, random_bn, random_mn


def binary_vt(*names):
    return VariableTable(tuple((n, ("0", "1")) for n in names))


def chain_bn():
    vt = binary_vt("A", "B")
    return BayesianNetwork(
        OrderedDag(("A", "B"), {("A", "B")}),
        vt,
        {
            "A": Kernel("A", (), [0.3, 0.7]),
            "B": Kernel("B", ("A",), [0.9, 0.1, 0.2, 0.8]),
        },
    )


class TestValidate:
    def test_identity_on_bn(self, misconception):
        bn = mn_to_bn(misconception)
        assert validate_morphism(identity_morphism(bn), bn, bn) == []

    def test_identity_on_mn(self, misconception):
        m = identity_morphism(misconception)
        assert validate_morphism(m, misconception, misconception) == []

    def test_marginalization_validates(self, misconception):
        bn = mn_to_bn(misconception)
        target, m = marginalization_morphism(bn, "A")
        assert validate_morphism(m, bn, target) == []

    def test_scaled_eta_is_stochasticity_violation(self):
        bn = chain_bn()
        m = identity_morphism(bn)
        m.eta["B"] = 2.0 * m.eta["B"]
        violations = validate_morphism(m, bn, bn)
        assert len(violations) == 1 and "column-stochastic" in violations[0]

    def test_wrong_graph_reference_is_flagged(self):
        bn = chain_bn()
        other = bear_bn()
        m = identity_morphism(bn)
        assert any(
            "target network's graph" in v for v in validate_morphism(m, bn, other)
        )

    def test_broken_preservation_is_reported_with_deviation(self):
        bn = chain_bn()
        m = identity_morphism(bn)
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        m.eta["B"] = swap  # relabels B without changing the target
        violations = validate_morphism(m, bn, bn)
        assert len(violations) == 1 and "deviation" in violations[0]


class TestMarginalizationMorphism:
    def test_single_vertex_network_is_identity_like(self):
        vt = binary_vt("A")
        bn = BayesianNetwork(OrderedDag(("A",)), vt, {"A": Kernel("A", (), [0.3, 0.7])})
        target, m = marginalization_morphism(bn, "A")
        assert np.array_equal(m.eta["A"], np.eye(2))
        assert np.array_equal(target.kernels["A"].values, [0.3, 0.7])

    def test_misconception_target_distribution(self, misconception):
        bn = mn_to_bn(misconception)
        target, m = marginalization_morphism(bn, "A")
        assert target.kernels["A"].values[0] == pytest.approx(0.1806, abs=1e-4)
        assert validate_morphism(m, bn, target) == []

    def test_chain_last_vertex_matches_enumeration(self):
        bn = chain_bn()
        target, m = marginalization_morphism(bn, "B")
        joint = bn_joint(bn).values.reshape(2, 2)
        np.testing.assert_allclose(
            target.kernels["B"].values, joint.sum(axis=0), rtol=1e-12
        )
        assert validate_morphism(m, bn, target) == []

    def test_markov_network_target_keeps_kind(self, misconception):
        target, m = marginalization_morphism(misconception, "C")
        assert isinstance(target, MarkovNetwork)
        assert validate_morphism(m, misconception, target) == []


class TestCompose:
    def test_identity_is_neutral(self):
        bn = chain_bn()
        target, m = marginalization_morphism(bn, "A")
        composed = compose_morphisms(identity_morphism(bn), m)
        assert composed.alpha.vertex_map == m.alpha.vertex_map
        for v in bn.graph.vertices:
            np.testing.assert_allclose(composed.eta[v], m.eta[v])

    def test_two_marginalizations_compose_to_one(self):
        bn = chain_bn()
        t1, m1 = marginalization_morphism(bn, "B")
        t2, m2 = marginalization_morphism(t1, "B")
        composed = compose_morphisms(m1, m2)
        # the matrix product equals the single-step marginalizer
        np.testing.assert_allclose(
            transfer_matrix(composed, bn), transfer_matrix(m1, bn), rtol=1e-12
        )
        assert validate_morphism(composed, bn, t2) == []

    def test_type_mismatch_is_error(self):
        bn = chain_bn()
        _, m1 = marginalization_morphism(bn, "A")
        with pytest.raises(ValueError, match="type mismatch"):
            compose_morphisms(m1, m1)

    def test_seeded_compositions_validate(self):
        rng = np.random.default_rng(107)
        done = 0
        while done < 20:
            bn = random_bn(rng, n_max=4)
            v = bn.graph.vertices[int(rng.integers(len(bn.graph.vertices)))]
            card = bn.vt.card(v)
            perm = np.eye(card)[rng.permutation(card)]
            mid, m1 = pearl_update(bn, {v: PearlVertexUpdate(iso=perm)})
            w = mid.graph.vertices[int(rng.integers(len(mid.graph.vertices)))]
            tgt, m2 = marginalization_morphism(mid, w)
            composed = compose_morphisms(m1, m2)
            assert validate_morphism(composed, bn, tgt) == []
            done += 1


class TestDecompose:
    def test_identity_decomposes_into_identities(self):
        bn = chain_bn()
        m = identity_morphism(bn)
        semantic, syntactic, mid = decompose_morphism(m, bn, bn)
        for v in bn.graph.vertices:
            assert np.array_equal(semantic.eta[v], np.eye(bn.vt.card(v)))
            assert np.array_equal(syntactic.eta[v], np.eye(bn.vt.card(v)))
        assert validate_morphism(semantic, bn, mid) == []
        assert validate_morphism(syntactic, mid, bn) == []

    def test_pure_contraction_splits_into_identity_semantics(self):
        # source: one vertex carrying the chain joint; target: the chain
        tgt = chain_bn()
        joint = bn_joint(tgt)
        vt = VariableTable((("X", ("(0,0)", "(0,1)", "(1,0)", "(1,1)")),))
        src = BayesianNetwork(
            OrderedDag(("X",)), vt, {"X": Kernel("X", (), joint.values)}
        )
        alpha = GraphHom(tgt.graph, src.graph, {"A": "X", "B": "X"})
        m = NetworkMorphism(alpha, {"X": np.eye(4)})
        assert validate_morphism(m, src, tgt) == []

        semantic, syntactic, mid = decompose_morphism(m, src, tgt)
        assert np.array_equal(semantic.eta["X"], np.eye(4))
        assert semantic.alpha.vertex_map == {"X": "X"}
        assert syntactic.alpha.vertex_map == alpha.vertex_map
        np.testing.assert_allclose(
            network_distribution(mid).values, joint.values, rtol=1e-12
        )

    def test_marginalization_recomposes_exactly(self, misconception):
        bn = mn_to_bn(misconception)
        tgt, m = marginalization_morphism(bn, "A")
        semantic, syntactic, mid = decompose_morphism(m, bn, tgt)
        assert validate_morphism(semantic, bn, mid) == []
        assert validate_morphism(syntactic, mid, tgt) == []
        back = compose_morphisms(semantic, syntactic)
        assert back.alpha.vertex_map == m.alpha.vertex_map
        for v in bn.graph.vertices:
            assert np.array_equal(back.eta[v], m.eta[v])

    def test_markov_decomposition(self, misconception):
        tgt, m = marginalization_morphism(misconception, "B")
        semantic, syntactic, mid = decompose_morphism(m, misconception, tgt)
        assert isinstance(mid, MarkovNetwork)
        assert validate_morphism(semantic, misconception, mid) == []
        assert validate_morphism(syntactic, mid, tgt) == []
        back = compose_morphisms(semantic, syntactic)
        for v in misconception.graph.vertices:
            assert np.array_equal(back.eta[v], m.eta[v])

    def test_invalid_morphism_is_rejected(self):
        bn = chain_bn()
        m = identity_morphism(bn)
        m.eta["A"] = 3.0 * m.eta["A"]
        with pytest.raises(ValueError, match="invalid"):
            decompose_morphism(m, bn, bn)


class TestPearlUpdate:
    def test_identity_update_is_identity(self):
        bn = chain_bn()
        updated, m = pearl_update(bn, {})
        for v in bn.graph.vertices:
            np.testing.assert_allclose(
                updated.kernels[v].values, bn.kernels[v].values, rtol=1e-12
            )
            assert np.array_equal(m.eta[v], np.eye(2))
        assert validate_morphism(m, bn, updated) == []

    def test_binary_swap_permutes(self):
        bn = chain_bn()
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        updated, m = pearl_update(bn, {"B": PearlVertexUpdate(iso=swap)})
        expected = bn_joint(bn).values.reshape(2, 2)[:, ::-1].ravel()
        np.testing.assert_allclose(bn_joint(updated).values, expected, rtol=1e-12)
        assert np.array_equal(m.eta["B"], swap)
        assert validate_morphism(m, bn, updated) == []

    def test_leaf_indicator_matches_conditioning_oracle(self):
        bn = chain_bn()
        updated, m = pearl_update(
            bn, {"B": PearlVertexUpdate(weight=np.array([1.0, 0.0]))}
        )
        # brute-force conditioning on B = state 0
        joint = bn_joint(bn).values.reshape(2, 2)
        conditioned = joint * np.array([1.0, 0.0])
        conditioned = conditioned / conditioned.sum()
        np.testing.assert_allclose(
            bn_joint(updated).values, conditioned.ravel(), atol=1e-12
        )
        assert updated.graph == bn.graph
        assert validate_morphism(m, bn, updated) == []

    def test_soft_evidence_posterior(self):
        bn = chain_bn()
        weight = np.array([0.5, 0.2])
        updated, _ = pearl_update(bn, {"B": PearlVertexUpdate(weight=weight)})
        joint = bn_joint(bn).values.reshape(2, 2) * weight
        joint /= joint.sum()
        np.testing.assert_allclose(bn_joint(updated).values, joint.ravel(), atol=1e-12)

    def test_update_composition_matches_combined_evidence(self):
        bn = chain_bn()
        w1 = np.array([0.7, 0.4])
        w2 = np.array([0.5, 0.9])
        mid, m1 = pearl_update(bn, {"B": PearlVertexUpdate(weight=w1)})
        out, m2 = pearl_update(mid, {"B": PearlVertexUpdate(weight=w2)})
        combined, mc = pearl_update(bn, {"B": PearlVertexUpdate(weight=w1 * w2)})
        for v in bn.graph.vertices:
            np.testing.assert_allclose(
                out.kernels[v].values, combined.kernels[v].values, atol=1e-9
            )
        composed = compose_morphisms(m1, m2)
        for v in bn.graph.vertices:
            np.testing.assert_allclose(composed.eta[v], mc.eta[v], atol=1e-9)

    def test_relabel_composition(self):
        bn = chain_bn()
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        mid, m1 = pearl_update(bn, {"A": PearlVertexUpdate(iso=swap)})
        out, m2 = pearl_update(mid, {"A": PearlVertexUpdate(iso=swap)})
        composed = compose_morphisms(m1, m2)
        for v in bn.graph.vertices:
            np.testing.assert_allclose(composed.eta[v], np.eye(2))
            np.testing.assert_allclose(
                out.kernels[v].values, bn.kernels[v].values, rtol=1e-12
            )

    def test_annihilating_update_fails(self):
        bn = chain_bn()
        with pytest.raises(DegenerateDistributionError, match="annihilates"):
            pearl_update(bn, {"B": PearlVertexUpdate(weight=np.array([0.0, 0.0]))})

    def test_contradictory_indicators_fail(self):
        vt = binary_vt("A", "B")
        bn = BayesianNetwork(
            OrderedDag(("A", "B"), {("A", "B")}),
            vt,
            {
                "A": Kernel("A", (), [1.0, 0.0]),
                "B": Kernel("B", ("A",), [1.0, 0.0, 0.0, 1.0]),
            },
        )
        with pytest.raises(DegenerateDistributionError, match="annihilates"):
            pearl_update(
                bn,
                {
                    "A": PearlVertexUpdate(weight=np.array([1.0, 0.0])),
                    "B": PearlVertexUpdate(weight=np.array([0.0, 1.0])),
                },
            )

    def test_collider_evidence_needs_chordal_graph(self):
        vt = binary_vt("A", "B", "C")
        bn = BayesianNetwork(
            OrderedDag(("A", "B", "C"), {("A", "C"), ("B", "C")}),
            vt,
            {
                "A": Kernel("A", (), [0.5, 0.5]),
                "B": Kernel("B", (), [0.5, 0.5]),
                "C": Kernel("C", ("A", "B"), [1, 0, 0, 1, 0, 1, 1, 0]),
            },
        )
        with pytest.raises(ValueError, match="chordal"):
            pearl_update(bn, {"C": PearlVertexUpdate(weight=np.array([1.0, 0.0]))})

    def test_chordal_network_update_keeps_kind(self):
        vt = binary_vt("A", "B")
        cnw = ChordalNetwork(
            OrderedDag(("A", "B"), {("A", "B")}),
            vt,
            {
                "A": Kernel("A", (), [3.0, 1.0], stochastic=False),
                "B": Kernel("B", ("A",), [2.0, 2.0, 1.0, 3.0], stochastic=False),
            },
        )
        updated, m = pearl_update(
            cnw, {"B": PearlVertexUpdate(weight=np.array([1.0, 0.0]))}
        )
        assert isinstance(updated, ChordalNetwork)
        dist = network_distribution(cnw).values.reshape(2, 2)
        conditioned = dist * np.array([1.0, 0.0])
        conditioned /= conditioned.sum()
        np.testing.assert_allclose(
            network_distribution(updated).values, conditioned.ravel(), atol=1e-12
        )
        assert validate_morphism(m, cnw, updated) == []

    def test_markov_network_update(self, misconception):
        weight = np.array([0.8, 0.3])
        updated, m = pearl_update(
            misconception, {"A": PearlVertexUpdate(weight=weight)}
        )
        assert isinstance(updated, MarkovNetwork)
        assert updated.graph == misconception.graph
        oracle = oracle_mn_table(misconception).reshape(2, 8) * weight[:, None]
        np.testing.assert_allclose(
            mn_unnormalized(updated).values, oracle.ravel(), rtol=1e-12
        )
        dist = network_distribution(updated)
        image = transfer_matrix(m, misconception) @ network_distribution(
            misconception
        ).values
        # the per-vertex witness only carries the marginals here
        for i, v in enumerate(misconception.graph.vertices):
            got = image.reshape([2, 2, 2, 2])
            want = dist.values.reshape([2, 2, 2, 2])
            axes = tuple(j for j in range(4) if j != i)
            np.testing.assert_allclose(got.sum(axis=axes), want.sum(axis=axes), atol=1e-9)


class TestMorphismsSurviveTransforms:
    def test_bn_morphism_survives_moralisation(self):
        rng = np.random.default_rng(109)
        for _ in range(10):
            bn = random_bn(rng, n_max=4)
            v = bn.graph.vertices[int(rng.integers(len(bn.graph.vertices)))]
            tgt, m = marginalization_morphism(bn, v)
            assert validate_morphism(m, bn, tgt) == []
            src_m = moralise_bn(bn)
            tgt_m = moralise_bn(tgt)
            lifted = NetworkMorphism(
                GraphHom(tgt_m.graph, src_m.graph, dict(m.alpha.vertex_map)),
                dict(m.eta),
            )
            assert validate_morphism(lifted, src_m, tgt_m) == []

    def test_mn_morphism_survives_triangulation(self):
        rng = np.random.default_rng(113)
        done = 0
        while done < 10:
            mn = random_mn(rng, n_max=4)
            if oracle_mn_table(mn).sum() == 0:
                continue
            v = mn.graph.vertices[int(rng.integers(len(mn.graph.vertices)))]
            tgt, m = marginalization_morphism(mn, v)
            assert validate_morphism(m, mn, tgt) == []
            src_t = triangulate_mn(mn)
            tgt_t = triangulate_mn(tgt)
            lifted = NetworkMorphism(
                GraphHom(tgt_t.graph, src_t.graph, dict(m.alpha.vertex_map)),
                dict(m.eta),
            )
            assert validate_morphism(lifted, src_t, tgt_t) == []
            done += 1

"""Encoder, decoder, and full-network behaviour."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_nets import encoder_reference, forward_reference, gat_layer_reference
from relplan import autodiff as ad
from relplan import corpus
from relplan.decoder import decode
from relplan.encoder import gat_layer
from relplan.graph import build_graph, features_matrix
from relplan.grounding import extract_dbn, ground
from relplan.model import (
    FingerprintMismatch, ModelConfig, PolicyNetwork, domain_fingerprint,
)
from relplan.rddl import parse_domain, parse_instance, validate


def _bound(name, config=ModelConfig(), seed=0):
    model = corpus.load(name)
    mdp = ground(model)
    net = PolicyNetwork(model.domain, config, seed=seed)
    return net, net.bind(mdp)


def _head_weights(rng, in_dim, out_dim, heads):
    return [
        (ad.constant(rng.normal(size=(in_dim, out_dim))),
         ad.constant(rng.normal(size=out_dim)),
         ad.constant(rng.normal(size=out_dim)))
        for _ in range(heads)]


# ---------------------------------------------------------------------------
# gat_layer
# ---------------------------------------------------------------------------

def test_isolated_node_is_projection():
    rng = np.random.default_rng(0)
    with ad.precision("float64"):
        weights = _head_weights(rng, 3, 6, heads=1)
        features = ad.constant(rng.normal(size=(1, 3)))
        out, attention = gat_layer(features, np.eye(1, dtype=bool), weights, 0.01)
        expected = np.where(features.data @ weights[0][0].data > 0,
                            features.data @ weights[0][0].data,
                            0.01 * (features.data @ weights[0][0].data))
        assert np.allclose(out.data, expected)
        assert attention[0][0, 0] == pytest.approx(1.0)


def test_identical_nodes_get_identical_embeddings():
    rng = np.random.default_rng(1)
    with ad.precision("float64"):
        weights = _head_weights(rng, 4, 6, heads=2)
        row = rng.normal(size=4)
        features = ad.constant(np.stack([row, row]))
        mask = np.ones((2, 2), dtype=bool)
        out, _ = gat_layer(features, mask, weights, 0.01)
        assert np.allclose(out.data[0], out.data[1])


def test_gat_layer_matches_dense_reference():
    rng = np.random.default_rng(2)
    with ad.precision("float64"):
        weights = _head_weights(rng, 5, 6, heads=2)
        features = rng.normal(size=(5, 5))
        mask = np.eye(5, dtype=bool) | (rng.random((5, 5)) < 0.5)
        out, _ = gat_layer(ad.constant(features), mask, weights, 0.01)
        expected = gat_layer_reference(
            features, mask,
            [(w.data, s.data, n.data) for w, s, n in weights], 0.01)
        assert np.max(np.abs(out.data - expected)) <= 1e-6


def test_missing_self_loop_rejected():
    rng = np.random.default_rng(3)
    weights = _head_weights(rng, 3, 6, heads=1)
    mask = np.zeros((2, 2), dtype=bool)
    mask[0, 1] = mask[1, 0] = True
    with pytest.raises(ValueError):
        gat_layer(ad.constant(rng.normal(size=(2, 3))), mask, weights, 0.01)


def test_attention_rows_sum_to_one():
    _, bound = _bound("wildfire_mini_2x3")
    result = bound.forward(bound.mdp.s0)
    assert result.attention
    for _, _, per_head in result.attention:
        for alpha in per_head:
            assert np.allclose(alpha.sum(axis=1), 1.0, atol=1e-6)


# ---------------------------------------------------------------------------
# tuple and state embeddings
# ---------------------------------------------------------------------------

def test_tuple_embedding_dimensions():
    net, bound = _bound("wildfire_mini_2x1")
    assert net.k == 4
    assert net.store.shape_of("enc/proj/W") == (6 * 4, 20)
    leaves = bound.make_leaves()
    features = ad.constant(features_matrix(bound.mdp, bound.graph, bound.mdp.s0))
    from relplan.encoder import encode
    tuples_, state, _ = encode(features, bound.in_masks, leaves, net.config)
    assert tuples_.data.shape == (2, 20)
    assert state.data.shape == (20,)


def test_zero_projection_gives_bias_rows():
    net, bound = _bound("sysadmin_ring_n3")
    arrays = net.store.snapshot()
    arrays["enc/proj/W"][:] = 0.0
    arrays["enc/proj/b"][:] = -2.0
    leaves = bound.make_leaves(arrays)
    features = ad.constant(features_matrix(bound.mdp, bound.graph, bound.mdp.s0))
    from relplan.encoder import encode
    tuples_, _, _ = encode(features, bound.in_masks, leaves, net.config)
    assert np.allclose(tuples_.data, 0.01 * -2.0)


def test_identity_slice_projection_recovers_node_embeddings():
    # single-subgraph domain (no action symbols): K = 1
    domain = parse_domain("""
        domain drift {
            pvariables { p : { state-fluent, bool, default = true }; };
            cpfs { p' = Bernoulli(0.5 * p); };
            reward = if (p) then 1.0 else 0.0;
        }
    """)
    instance = parse_instance(
        "instance drift_1 { domain = drift; horizon = 3; discount = 1.0; }")
    mdp = ground(validate(domain, instance))
    net = PolicyNetwork(domain, ModelConfig(), seed=1)
    bound = net.bind(mdp)
    arrays = net.store.snapshot()
    for k in range(net.config.gat_heads):  # non-negative weights keep v >= 0
        name = f"enc/g0/l0/h{k}/W"
        arrays[name] = np.abs(arrays[name])
    arrays["enc/proj/W"][:] = 0.0
    arrays["enc/proj/W"][:6, :6] = np.eye(6, dtype=np.float32)
    arrays["enc/proj/b"][:] = 0.0
    leaves = bound.make_leaves(arrays)
    features = ad.constant(features_matrix(mdp, bound.graph, mdp.s0))
    from relplan.encoder import encode
    tuples_, state, _ = encode(features, bound.in_masks, leaves, net.config)
    node_embeddings = gat_layer_reference(
        features.data, bound.in_masks[0],
        [(arrays[f"enc/g0/l0/h{k}/W"], arrays[f"enc/g0/l0/h{k}/a_self"],
          arrays[f"enc/g0/l0/h{k}/a_neigh"]) for k in range(4)], 0.01)
    assert np.allclose(tuples_.data[:, :6], node_embeddings, atol=1e-6)
    assert (tuples_.data[:, 6:] == 0).all()
    # single tuple: state embedding equals the tuple embedding
    assert np.array_equal(state.data, tuples_.data[0])


def test_state_embedding_is_dimensionwise_max():
    rows = ad.constant(np.array([[1.0, -2.0], [0.0, 3.0]]))
    assert np.array_equal(ad.max_pool_rows(rows).data, [1.0, 3.0])


def test_state_embedding_permutation_invariant():
    rng = np.random.default_rng(4)
    rows = rng.normal(size=(6, 20))
    perm = rng.permutation(6)
    a = ad.max_pool_rows(ad.constant(rows)).data
    b = ad.max_pool_rows(ad.constant(rows[perm])).data
    assert np.array_equal(a, b)


def test_encoder_permutation_equivariance():
    net, bound = _bound("sysadmin_ring_n5")
    mdp = bound.mdp
    rng = np.random.default_rng(5)
    state = rng.random(len(mdp.state_vars)) < 0.5
    arrays = net.store.snapshot()
    features = features_matrix(mdp, bound.graph, state)
    from relplan.encoder import encode
    with ad.precision("float64"):
        perm = rng.permutation(len(bound.graph.nodes))
        masks_p = [mask[np.ix_(perm, perm)] for mask in bound.in_masks]
        leaves = {k: ad.constant(v, dtype=np.float64) for k, v in arrays.items()}
        t1, s1, _ = encode(ad.constant(features, dtype=np.float64),
                           bound.in_masks, leaves, net.config)
        t2, s2, _ = encode(ad.constant(features[perm], dtype=np.float64),
                           masks_p, leaves, net.config)
        assert np.allclose(t1.data[perm], t2.data, atol=1e-9)
        assert np.allclose(s1.data, s2.data, atol=1e-9)


# ---------------------------------------------------------------------------
# decoder
# ---------------------------------------------------------------------------

def test_affected_pooling_structure():
    _, bound = _bound("wildfire_mini_2x1")
    by_symbol = dict(bound.symbol_actions)
    assert by_symbol["put-out"] == [[0], [1]]  # one tuple each
    assert by_symbol["cut-out"] == [[0], [1]]
    assert by_symbol["finisher"] == [[0, 1]]   # pools over every cell


def test_same_symbol_same_input_same_logit():
    # an all-running symmetric ring gives every reboot action the same score
    net, bound = _bound("sysadmin_ring_n3")
    state = np.ones(3, dtype=bool)
    result = bound.forward(state)
    reboot_logits = result.logits.data[1:]
    assert np.allclose(reboot_logits, reboot_logits[0], atol=1e-6)


def test_swapping_ground_actions_swaps_logits():
    rng = np.random.default_rng(6)
    config = ModelConfig()
    tuples_ = ad.constant(rng.normal(size=(3, 20)))
    state = ad.constant(rng.normal(size=20))
    arrays = {}
    for kind in ("pi", "v"):
        arrays[f"dec/move/{kind}/W1"] = rng.normal(size=(40, 16))
        arrays[f"dec/move/{kind}/b1"] = rng.normal(size=16)
        arrays[f"dec/move/{kind}/W2"] = rng.normal(size=(16, 1))
        arrays[f"dec/move/{kind}/b2"] = rng.normal(size=1)
        arrays[f"dec/__noop__/{kind}/W1"] = rng.normal(size=(20, 16))
        arrays[f"dec/__noop__/{kind}/b1"] = rng.normal(size=16)
        arrays[f"dec/__noop__/{kind}/W2"] = rng.normal(size=(16, 1))
        arrays[f"dec/__noop__/{kind}/b2"] = rng.normal(size=1)
    leaves = {k: ad.constant(v) for k, v in arrays.items()}
    logits_a, _ = decode(tuples_, state, [("move", [[0], [1, 2]])], leaves, config)
    logits_b, _ = decode(tuples_, state, [("move", [[1, 2], [0]])], leaves, config)
    assert logits_a.data[1] == logits_b.data[2]
    assert logits_a.data[2] == logits_b.data[1]


def test_policy_softmax_values():
    probs = np.exp(ad.log_softmax(ad.constant(np.zeros(6))).data)
    assert np.allclose(probs, 1 / 6)
    probs = np.exp(ad.log_softmax(ad.constant(np.array([np.log(2.0), 0.0]))).data)
    assert np.allclose(probs, [2 / 3, 1 / 3], atol=1e-7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-30, 30), min_size=2, max_size=8),
       st.floats(-20, 20))
def test_policy_shift_invariance(logits, shift):
    with ad.precision("float64"):
        base = np.exp(ad.log_softmax(ad.constant(np.array(logits))).data)
        moved = np.exp(ad.log_softmax(
            ad.constant(np.array(logits) + shift)).data)
    assert np.max(np.abs(base - moved)) <= 1e-9
    assert int(np.argmax(base)) == int(np.argmax(moved))


def test_value_is_sum_of_head_outputs():
    values = ad.constant(np.array([0.5, -0.2, 0.1, 0.0]))
    assert ad.sum_all(values).item() == pytest.approx(0.4)


def test_zero_value_parameters_give_zero_value():
    net, bound = _bound("wildfire_mini_2x1")
    arrays = net.store.snapshot()
    for name in arrays:
        if "/v/" in name:
            arrays[name][:] = 0.0
    leaves = bound.make_leaves(arrays)
    result = bound.forward(bound.mdp.s0, leaves)
    assert result.value.item() == 0.0


def test_empty_affected_set_uses_zero_pool():
    # chain2's poke affects nothing; its logit exists and the forward runs
    _, bound = _bound("chain2_h15")
    assert dict(bound.symbol_actions)["poke"] == [[]]
    result = bound.forward(bound.mdp.s0)
    assert len(result.probs) == 2


# ---------------------------------------------------------------------------
# full forward vs dense reference
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["wildfire_mini_2x1", "sysadmin_ring_n5",
                                  "chain2_h15"])
def test_forward_matches_dense_reference(name):
    net, bound = _bound(name, seed=3)
    rng = np.random.default_rng(9)
    arrays = {k: v.astype(np.float64) for k, v in net.store.snapshot().items()}
    with ad.precision("float64"):
        for trial in range(3):
            state = rng.random(len(bound.mdp.state_vars)) < 0.5
            leaves = {k: ad.constant(v, dtype=np.float64)
                      for k, v in arrays.items()}
            result = bound.forward(state, leaves)
            features = features_matrix(bound.mdp, bound.graph, state)
            ref_logits, ref_value = forward_reference(
                arrays, features, bound.in_masks, bound.symbol_actions,
                net.config)
            assert np.max(np.abs(result.logits.data - ref_logits)) <= 1e-6
            assert abs(result.value.item() - ref_value) <= 1e-6


def test_value_per_symbol_mode_matches_reference():
    config = ModelConfig(value_per_symbol=True)
    net, bound = _bound("wildfire_mini_2x1", config=config)
    arrays = {k: v.astype(np.float64) for k, v in net.store.snapshot().items()}
    with ad.precision("float64"):
        leaves = {k: ad.constant(v, dtype=np.float64) for k, v in arrays.items()}
        result = bound.forward(bound.mdp.s0, leaves)
        features = features_matrix(bound.mdp, bound.graph, bound.mdp.s0)
        _, ref_value = forward_reference(arrays, features, bound.in_masks,
                                         bound.symbol_actions, config)
    assert abs(result.value.item() - ref_value) <= 1e-6


# ---------------------------------------------------------------------------
# parameters, checkpoints, size invariance
# ---------------------------------------------------------------------------

def test_parameter_shapes_are_instance_independent():
    model3 = corpus.load("sysadmin_ring_n3")
    net = PolicyNetwork(model3.domain, seed=0)
    nbytes = net.store.payload_nbytes()
    for name in ("sysadmin_ring_n3", "sysadmin_ring_n10"):
        mdp = ground(corpus.load(name))
        bound = net.bind(mdp)
        result = bound.forward(mdp.s0)
        assert len(result.probs) == len(mdp.actions)
    assert net.store.payload_nbytes() == nbytes


def test_checkpoint_roundtrip_and_fingerprint(tmp_path):
    model = corpus.load("wildfire_mini_2x1")
    net = PolicyNetwork(model.domain, seed=5)
    path = tmp_path / "wf.ckpt"
    net.save(path, {"note": "test"})
    loaded = PolicyNetwork.load(path, model.domain)
    for name in net.store.names:
        assert np.array_equal(loaded.store.snapshot()[name],
                              net.store.snapshot()[name])
    other = corpus.load("sysadmin_ring_n3")
    with pytest.raises(FingerprintMismatch):
        PolicyNetwork.load(path, other.domain)


def test_fingerprint_distinguishes_encodings():
    quaternary = corpus.load("wildfire_mini_2x1").domain
    per_axis = corpus.load("wildfire_mini_xy_2x1").domain
    assert domain_fingerprint(quaternary) != domain_fingerprint(per_axis)
    assert domain_fingerprint(quaternary) == domain_fingerprint(quaternary)


def test_deterministic_initialisation():
    domain = corpus.load("wildfire_mini_2x1").domain
    a = PolicyNetwork(domain, seed=11).store.snapshot()
    b = PolicyNetwork(domain, seed=11).store.snapshot()
    c = PolicyNetwork(domain, seed=12).store.snapshot()
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert any(not np.array_equal(a[k], c[k]) for k in a)


# ---------------------------------------------------------------------------
# gradients through the full network
# ---------------------------------------------------------------------------

def _network_loss(bound, arrays, state, action_index):
    leaves = {name: ad.parameter(value, dtype=np.float64)
              for name, value in arrays.items()}
    result = bound.forward(state, leaves)
    log_pi = ad.index_element(result.log_probs, action_index)
    loss = ad.add(ad.neg(log_pi), ad.mul(result.value, result.value))
    return loss, leaves


@pytest.mark.parametrize("seed", [0, 1])
def test_full_network_gradients_match_finite_differences(seed):
    from test_autodiff import rel_err

    small = ModelConfig(gat_heads=2, gat_dim=3, tuple_dim=5, hidden_dim=4)
    net, bound = _bound("wildfire_mini_2x1", config=small, seed=seed)
    rng = np.random.default_rng(seed)
    state = rng.random(len(bound.mdp.state_vars)) < 0.5
    arrays = {k: v.astype(np.float64) for k, v in net.store.snapshot().items()}
    with ad.precision("float64"):
        loss, leaves = _network_loss(bound, arrays, state, action_index=1)
        ad.backward(loss)
        numeric = ad.finite_difference_gradients(
            lambda p: _network_loss(bound, p, state, 1)[0].item(), arrays)
    for name in arrays:
        got = leaves[name].grad
        if got is None:
            got = np.zeros_like(arrays[name])
        assert rel_err(got, numeric[name]) <= 1e-4, name

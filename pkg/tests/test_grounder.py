"""Grounding and DBN extraction."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from expr_eval import eval_ground
from relplan import corpus
from relplan.grounding import (
    GroundingError, affected_set, extract_dbn, fold, ground,
    state_deps_under_action,
)
from relplan.rddl import parse_domain, parse_expression, parse_instance, validate


@pytest.fixture(scope="module")
def wf2x1():
    return ground(corpus.load("wildfire_mini_2x1"))


@pytest.fixture(scope="module")
def ring3():
    return ground(corpus.load("sysadmin_ring_n3"))


def _var(mdp, text):
    name, _, args = text.partition("(")
    args = tuple(a.strip() for a in args.rstrip(")").split(",")) if args else ()
    return mdp.state_vars[mdp.var_index[(name, args)]]


def _action(mdp, text):
    name, _, args = text.partition("(")
    args = tuple(a.strip() for a in args.rstrip(")").split(",")) if args else ()
    if name == "noop":
        return mdp.noop
    return mdp.actions[mdp.action_index[(name, args)]]


# ---------------------------------------------------------------------------
# ground
# ---------------------------------------------------------------------------

def test_mini_wildfire_grounding(wf2x1):
    assert len(wf2x1.state_vars) == 4
    assert len(wf2x1.actions) == 6  # 5 ground actions + noop
    assert wf2x1.fluent_tuples == (("x1", "y1"), ("x2", "y1"))
    assert wf2x1.action_tuples == ((), ("x1", "y1"), ("x2", "y1"))


def test_mini_wildfire_nonfluent_tuples(wf2x1):
    required = {("x1", "y1"), ("x2", "y1"),
                ("x1", "y1", "x2", "y1"), ("x2", "y1", "x1", "y1")}
    assert required <= set(wf2x1.nonfluent_tuples)


def test_wildfire_replica_3x3_counts():
    mdp = ground(corpus.load("wildfire_replica_3x3"))
    assert len(mdp.state_vars) == 18
    assert len(mdp.actions) == 19


@pytest.mark.parametrize("name, objects, state_vars, action_vars", [
    ("wildfire_replica_3x3", 9, 18, 19),
    ("sysadmin_ring_n10", 10, 10, 11),
])
def test_size_statistics_regression(name, objects, state_vars, action_vars):
    # objects counted as distinct fluent argument tuples (graph nodes)
    mdp = ground(corpus.load(name))
    assert len(mdp.fluent_tuples) == objects
    assert len(mdp.state_vars) == state_vars
    assert len(mdp.actions) == action_vars


def test_grounding_is_deterministic():
    a = ground(corpus.load("wildfire_mini_2x1"))
    b = ground(corpus.load("wildfire_mini_2x1"))
    assert [v.name for v in a.state_vars] == [v.name for v in b.state_vars]
    assert [x.name for x in a.actions] == [x.name for x in b.actions]
    assert a.cpfs == b.cpfs
    assert a.reward == b.reward
    assert (a.s0 == b.s0).all()


def test_action_count_invariant():
    for name in corpus.INSTANCES:
        mdp = ground(corpus.load(name))
        domain = mdp.model.domain
        objects = dict(mdp.model.instance.objects)
        expected = 1
        for pv in domain.actions():
            count = 1
            for cls in pv.param_types:
                count *= len(objects.get(cls, ()))
            expected += count
        assert len(mdp.actions) == expected, name


def test_start_state(wf2x1):
    burning_x1 = _var(wf2x1, "burning(x1, y1)")
    assert wf2x1.s0[burning_x1.index]
    assert wf2x1.s0.sum() == 1


def test_empty_class_quantifiers():
    domain = parse_domain("""
        domain empties {
            types { a_cls : object; b_cls : object; };
            pvariables {
                p(a_cls)   : { state-fluent, bool, default = false };
                R(b_cls)   : { non-fluent, bool, default = true };
                go(a_cls)  : { action-fluent, bool, default = false };
            };
            cpfs {
                p'(?a) = KronDelta(p(?a) | exists_{?b : b_cls} [R(?b)]);
            };
            reward = sum_{?b : b_cls} [1.0];
        }
    """)
    instance = parse_instance("""
        instance empties_1 {
            domain = empties;
            objects { a_cls : {a1}; };
            horizon = 5;
            discount = 1.0;
        }
    """)
    mdp = ground(validate(domain, instance))
    # empty expansions: exists -> false, sum -> 0
    assert mdp.cpfs[0] == parse_expression("KronDelta(p(a1))")
    assert mdp.reward == parse_expression("0.0")


def test_division_by_literal_zero_reported():
    domain = parse_domain("""
        domain bad {
            pvariables {
                p  : { state-fluent, bool, default = false };
                go : { action-fluent, bool, default = false };
            };
            cpfs { p' = Bernoulli(1.0 / (0.0 * 2.0)); };
            reward = 0.0;
        }
    """)
    instance = parse_instance(
        "instance bad_1 { domain = bad; horizon = 1; discount = 1.0; }")
    with pytest.raises(GroundingError):
        ground(validate(domain, instance))


def test_fold_prunes_false_branches():
    # false conjunct kills the whole conjunction, true is an identity
    assert fold(parse_expression("false ^ p")) == parse_expression("false")
    assert fold(parse_expression("true ^ p")) == parse_expression("p")
    assert fold(parse_expression("0.0 * p + q")) == parse_expression("q")
    assert fold(parse_expression("if (true) then p else q")) == parse_expression("p")


# ---------------------------------------------------------------------------
# extract_dbn
# ---------------------------------------------------------------------------

def test_wildfire_cross_cell_dependency(wf2x1):
    dbn = extract_dbn(wf2x1)
    target = _var(wf2x1, "burning(x2, y1)")
    deps = dbn.entries[target.index].state_deps
    assert _var(wf2x1, "burning(x1, y1)").index in deps


def test_identity_cpf_dependency():
    domain = parse_domain("""
        domain identity {
            pvariables {
                p    : { state-fluent, bool, default = false };
                ping : { action-fluent, bool, default = false };
            };
            cpfs { p' = KronDelta(p); };
            reward = 0.0;
        }
    """)
    instance = parse_instance(
        "instance identity_1 { domain = identity; horizon = 1; discount = 1.0; }")
    mdp = ground(validate(domain, instance))
    dbn = extract_dbn(mdp)
    assert dbn.entries[0].state_deps == (0,)
    assert dbn.entries[0].action_deps == ()


def test_sysadmin_dependencies_match_brute_force_walk(ring3):
    # independent oracle: scan the folded CPF tree for applications directly
    from relplan.rddl import ast as rddl_ast

    dbn = extract_dbn(ring3)
    for entry in dbn.entries:
        seen_vars, seen_actions = set(), set()
        for node in rddl_ast.walk(ring3.cpfs[entry.var_index]):
            if isinstance(node, rddl_ast.Apply):
                key = (node.name, node.args)
                if key in ring3.var_index:
                    seen_vars.add(ring3.var_index[key])
                else:
                    seen_actions.add(ring3.action_index[key])
        assert set(entry.state_deps) == seen_vars
        assert set(entry.action_deps) == seen_actions

    # ring of three: every computer's next state reads all three, plus its reboot
    running_c1 = _var(ring3, "running(c1)")
    entry = dbn.entries[running_c1.index]
    assert set(entry.state_deps) == {0, 1, 2}
    assert [ring3.actions[i].name for i in entry.action_deps] == ["reboot(c1)"]


def test_dependency_masking_property(ring3):
    # flipping any variable outside a dependency set never changes the
    # distribution parameter; checked exhaustively on the 3-ring
    dbn = extract_dbn(ring3)
    n = len(ring3.state_vars)
    for entry in dbn.entries:
        outside = [i for i in range(n) if i not in entry.state_deps]
        for bits in itertools.product([False, True], repeat=n):
            state = np.array(bits)
            for action in ring3.actions:
                base = eval_ground(ring3.cpfs[entry.var_index], ring3,
                                   state, action.index)
                for j in outside:
                    flipped = state.copy()
                    flipped[j] = ~flipped[j]
                    assert eval_ground(ring3.cpfs[entry.var_index], ring3,
                                       flipped, action.index) == base


# ---------------------------------------------------------------------------
# affected_set
# ---------------------------------------------------------------------------

def test_finisher_affects_all_cells(wf2x1):
    dbn = extract_dbn(wf2x1)
    affected = affected_set(dbn, wf2x1, _action(wf2x1, "finisher"))
    assert [v.name for v in affected] == ["burning(x1, y1)", "burning(x2, y1)"]


def test_noop_affects_nothing(wf2x1):
    dbn = extract_dbn(wf2x1)
    assert affected_set(dbn, wf2x1, wf2x1.noop) == ()


def test_put_out_affects_single_cell(wf2x1):
    dbn = extract_dbn(wf2x1)
    affected = affected_set(dbn, wf2x1, _action(wf2x1, "put-out(x1, y1)"))
    assert [v.name for v in affected] == ["burning(x1, y1)"]


def test_conditioned_deps_vanish_under_own_action(wf2x1):
    # taking the action that forces a cell's outcome leaves no state reads
    dbn = extract_dbn(wf2x1)
    for action in wf2x1.actions:
        if action.is_noop:
            continue
        for var in affected_set(dbn, wf2x1, action):
            assert state_deps_under_action(wf2x1, var.index, action.index) == ()

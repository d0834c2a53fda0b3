"""Parsing, printing, and validation of the RDDL subset."""

from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relplan import corpus
from relplan.rddl import (
    Apply, BernoulliExpr, Const, DuplicateAssignmentError, KronDeltaExpr,
    LexicalError, RddlError, RddlSyntaxError, UnsupportedConstructError,
    ValidationError, domain_to_str, expr_to_str, instance_to_str,
    parse_domain, parse_expression, parse_instance, validate,
)

IDENTITY_DOMAIN = """
domain identity {
    pvariables {
        p    : { state-fluent, bool, default = false };
        ping : { action-fluent, bool, default = false };
    };
    cpfs {
        p' = KronDelta(p);
    };
    reward = 0.0;
}
"""


# ---------------------------------------------------------------------------
# parse_domain
# ---------------------------------------------------------------------------

def test_mini_wildfire_declaration_counts():
    domain = parse_domain(corpus.read_text("wildfire_mini"))
    assert [p.name for p in domain.fluents()] == ["burning", "out-of-fuel"]
    assert len(domain.non_fluents()) == 4
    assert {p.name for p in domain.non_fluents()} == {
        "COST-TGT-BURN", "COST-NTGT-BURN", "NEIGHBOUR", "TARGET"}
    assert [p.name for p in domain.actions()] == ["put-out", "cut-out", "finisher"]
    assert domain.max_nondef_actions == 1


def test_identity_domain():
    domain = parse_domain(IDENTITY_DOMAIN)
    assert len(domain.fluents()) == 1
    (cpf,) = domain.cpfs
    assert cpf.expr == KronDeltaExpr(Apply("p"))


def test_sysadmin_declaration_counts():
    domain = parse_domain(corpus.read_text("sysadmin_ring"))
    unary_fluents = [p for p in domain.fluents() if p.arity == 1]
    binary_nf = [p for p in domain.non_fluents() if p.arity == 2]
    unary_actions = [p for p in domain.actions() if p.arity == 1]
    assert [p.name for p in unary_fluents] == ["running"]
    assert [p.name for p in binary_nf] == ["CONNECTED"]
    assert [p.name for p in unary_actions] == ["reboot"]


def test_comments_are_stripped():
    text = "// leading\n" + IDENTITY_DOMAIN.replace(
        "reward = 0.0;", "reward = /* block\ncomment */ 0.0;")
    assert parse_domain(text).reward == Const(0.0)


# ---------------------------------------------------------------------------
# parse_instance
# ---------------------------------------------------------------------------

def test_mini_wildfire_instance_objects():
    instance = parse_instance(corpus.read_text("wildfire_mini_2x1"))
    assert instance.objects == (("x_pos", ("x1", "x2")), ("y_pos", ("y1",)))
    assert instance.horizon == 10
    assert instance.discount == 0.9


def test_empty_non_fluents_block():
    instance = parse_instance("""
        instance i1 {
            domain = identity;
            non-fluents { };
            horizon = 5;
            discount = 1.0;
        }
    """)
    assert instance.non_fluent_assignments == ()
    assert instance.init_state == ()


def test_sysadmin_n3_instance():
    instance = parse_instance(corpus.read_text("sysadmin_ring_n3"))
    assert instance.objects == (("computer", ("c1", "c2", "c3")),)
    assert instance.horizon == 20
    assert instance.discount == 0.9
    assert len(instance.non_fluent_assignments) == 6


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def test_lexical_error():
    with pytest.raises(LexicalError):
        parse_domain("domain d { # }")


def test_syntax_error_carries_position():
    text = "domain d {\n    pvariables {\n        p : state-fluent;\n"
    with pytest.raises(RddlSyntaxError) as err:
        parse_domain(text)
    assert err.value.line == 3
    assert err.value.col is not None


@pytest.mark.parametrize("snippet, construct", [
    ("q : { interm-fluent, bool };", "interm-fluent"),
    ("q : { state-fluent, int, default = 0 };", "int"),
])
def test_unsupported_pvariable_constructs(snippet, construct):
    text = IDENTITY_DOMAIN.replace(
        "ping : { action-fluent, bool, default = false };",
        "ping : { action-fluent, bool, default = false };\n        " + snippet)
    with pytest.raises(UnsupportedConstructError) as err:
        parse_domain(text)
    assert construct in str(err.value)


def test_unsupported_enumerated_type():
    text = """
    domain d {
        types { level : {@low, @high}; };
        pvariables { p : { state-fluent, bool, default = false }; };
        cpfs { p' = KronDelta(p); };
        reward = 0.0;
    }
    """
    with pytest.raises(UnsupportedConstructError) as err:
        parse_domain(text)
    assert "enumerated" in str(err.value)


def test_unsupported_distribution():
    text = IDENTITY_DOMAIN.replace("KronDelta(p)", "Normal(0.0, 1.0)")
    with pytest.raises(UnsupportedConstructError) as err:
        parse_domain(text)
    assert "Normal" in str(err.value)


def test_duplicate_assignment():
    text = corpus.read_text("wildfire_mini_2x1").replace(
        "TARGET(x1, y1);", "TARGET(x1, y1);\n        TARGET(x1, y1);")
    with pytest.raises(DuplicateAssignmentError):
        parse_instance(text)


def test_rejecting_is_total():
    # any mangled input yields an AST or exactly one RddlError subclass
    base = corpus.read_text("wildfire_mini")
    for cut in range(0, len(base), 197):
        mangled = base[:cut] + base[cut + 13:]
        try:
            parse_domain(mangled)
        except RddlError:
            pass


def test_nested_distribution_rejected():
    text = IDENTITY_DOMAIN.replace("KronDelta(p)", "KronDelta(Bernoulli(0.5))")
    with pytest.raises(ValidationError):
        parse_domain(text)


def test_real_state_fluent_rejected():
    text = IDENTITY_DOMAIN.replace(
        "p    : { state-fluent, bool, default = false };",
        "p    : { state-fluent, real, default = 0.0 };")
    with pytest.raises(ValidationError):
        parse_domain(text)


def test_arity_mismatch_inside_cpf():
    text = IDENTITY_DOMAIN.replace("KronDelta(p)", "KronDelta(p(ping))")
    with pytest.raises(ValidationError) as err:
        parse_domain(text)
    assert err.value.kind == "arity-mismatch"


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_mini_wildfire_pair():
    model = corpus.load("wildfire_mini_2x1")
    assert model.domain.name == "wildfire_mini"
    assert model.instance.domain_name == "wildfire_mini"


def test_validate_arity_mismatch():
    domain = parse_domain(corpus.read_text("wildfire_mini"))
    text = corpus.read_text("wildfire_mini_2x1").replace(
        "TARGET(x1, y1);", "TARGET(x1);")
    instance = parse_instance(text)
    with pytest.raises(ValidationError) as err:
        validate(domain, instance)
    assert err.value.kind == "arity-mismatch"
    assert err.value.symbol == "TARGET"
    assert err.value.line is not None


def test_validate_domain_name_mismatch():
    domain = parse_domain(corpus.read_text("sysadmin_ring"))
    instance = parse_instance(corpus.read_text("wildfire_mini_2x1"))
    with pytest.raises(ValidationError) as err:
        validate(domain, instance)
    assert err.value.kind == "domain-mismatch"


def test_validate_unknown_object():
    domain = parse_domain(corpus.read_text("wildfire_mini"))
    text = corpus.read_text("wildfire_mini_2x1").replace(
        "TARGET(x1, y1);", "TARGET(x9, y1);")
    with pytest.raises(ValidationError) as err:
        validate(domain, parse_instance(text))
    assert err.value.kind == "unknown-symbol"
    assert err.value.symbol == "x9"


def test_validate_type_mismatch():
    domain = parse_domain(corpus.read_text("wildfire_mini"))
    text = corpus.read_text("wildfire_mini_2x1").replace(
        "TARGET(x1, y1);", "TARGET(y1, x1);")
    with pytest.raises(ValidationError) as err:
        validate(domain, parse_instance(text))
    assert err.value.kind == "type-mismatch"


def test_validation_is_order_independent():
    domain_text = corpus.read_text("wildfire_mini")
    instance_text = corpus.read_text("wildfire_mini_2x1")
    domain = parse_domain(domain_text)
    instance = parse_instance(instance_text)
    shuffled = dataclasses.replace(
        instance,
        non_fluent_assignments=instance.non_fluent_assignments[::-1],
        init_state=instance.init_state[::-1])
    reordered_domain = dataclasses.replace(
        domain, pvariables=domain.pvariables[::-1])
    validate(domain, shuffled)
    validate(reordered_domain, instance)


# ---------------------------------------------------------------------------
# parse-print-parse fixpoint
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(corpus.DOMAINS))
def test_domain_roundtrip(name):
    first = parse_domain(corpus.read_text(name))
    again = parse_domain(domain_to_str(first))
    assert first == again


@pytest.mark.parametrize("name", sorted(corpus.INSTANCES))
def test_instance_roundtrip(name):
    first = parse_instance(corpus.read_text(name))
    again = parse_instance(instance_to_str(first))
    assert first == again


_names = st.sampled_from(["alpha", "beta-ray", "g7", "out-of-fuel"])
_vars = st.sampled_from(["?a", "?b", "?c"])
_classes = st.sampled_from(["t1", "t2"])


def _exprs():
    leaves = st.one_of(
        st.booleans().map(Const),
        st.floats(min_value=0, max_value=1e6, allow_nan=False).map(Const),
        st.builds(Apply, _names,
                  st.lists(st.one_of(_vars, _names), max_size=2).map(tuple)),
    )

    def extend(children):
        from relplan.rddl import (Add, Agg, And, Cmp, Div, If, Implies, Mul,
                                  Neg, Not, Or, Quant, Sub)
        items = st.lists(children, min_size=2, max_size=3).map(tuple)
        typed = st.lists(st.tuples(_vars, _classes), min_size=1, max_size=2,
                         unique_by=lambda vc: vc[0]).map(tuple)
        return st.one_of(
            st.builds(Not, children),
            st.builds(Neg, children),
            st.builds(And, items),
            st.builds(Or, items),
            st.builds(Add, items),
            st.builds(Mul, items),
            st.builds(Implies, children, children),
            st.builds(Sub, children, children),
            st.builds(Div, children, children),
            st.builds(Cmp, st.sampled_from(["==", "<", "<=", ">", ">="]),
                      children, children),
            st.builds(If, children, children, children),
            st.builds(Quant, st.sampled_from(["forall", "exists"]), typed, children),
            st.builds(Agg, st.sampled_from(["sum", "prod"]), typed, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=150, deadline=None)
@given(_exprs())
def test_expression_print_parse_fixpoint(expr):
    # the printed form of any parsed tree is a fixpoint of parse . print
    once = parse_expression(expr_to_str(expr))
    twice = parse_expression(expr_to_str(once))
    assert once == twice

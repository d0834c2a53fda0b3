"""Recursive-descent parser for the RDDL subset.

The accepted grammar is documented in ``docs/rddl-subset.md``.  Constructs
the full language defines but this subset excludes (enumerated types,
intermediate fluents, other distributions, ...) raise
:class:`UnsupportedConstructError` naming the construct rather than a generic
syntax error.
"""

from __future__ import annotations

from typing import Optional, Union

from . import ast
from .ast import (
    Add, Agg, And, Apply, Assignment, BernoulliExpr, Cmp, Const, Cpf, Div,
    DomainAst, Expr, If, Implies, InstanceAst, KronDeltaExpr, Mul, Neg, Not,
    Or, Pos, PVariable, Quant, Sub,
)
from .errors import (
    DuplicateAssignmentError, RddlSyntaxError, UnsupportedConstructError,
    ValidationError,
)
from .lexer import EOF, IDENT, NUMBER, PUNCT, VAR, Token, tokenize

_RESERVED = {
    "domain", "instance", "non-fluents", "objects", "types", "pvariables",
    "cpfs", "reward", "init-state", "horizon", "discount",
    "max-nondef-actions", "requirements", "object", "bool", "real", "int",
    "state-fluent", "non-fluent", "action-fluent", "default",
    "if", "then", "else", "true", "false", "pos-inf",
    "Bernoulli", "KronDelta",
}

_UNSUPPORTED_KINDS = {"interm-fluent", "derived-fluent", "observ-fluent"}
_UNSUPPORTED_DISTS = {
    "Discrete", "Normal", "Poisson", "DiracDelta", "Uniform", "Geometric",
    "Exponential", "Binomial", "Multinomial", "Dirichlet",
}
_UNSUPPORTED_BLOCKS = {
    "state-action-constraints", "action-preconditions", "state-invariants",
    "observations", "derived", "interm",
}

_QUANT_KEYWORDS = {"forall_": "forall", "exists_": "exists"}
_AGG_KEYWORDS = {"sum_": "sum", "prod_": "prod"}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, kind: str, value: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind: str, value: Optional[str] = None) -> Token:
        tok = self.peek()
        if not self.at(kind, value):
            want = value if value is not None else kind
            raise RddlSyntaxError(
                f"expected {want!r}, found {tok.value or tok.kind!r}",
                tok.line, tok.col)
        return self.advance()

    def fail(self, message: str) -> None:
        tok = self.peek()
        raise RddlSyntaxError(message, tok.line, tok.col)

    def _pos(self) -> Pos:
        tok = self.peek()
        return Pos(tok.line, tok.col)

    def name(self, what: str) -> Token:
        tok = self.expect(IDENT)
        if tok.value in _UNSUPPORTED_KINDS or tok.value in _UNSUPPORTED_DISTS:
            raise UnsupportedConstructError(tok.value, tok.line, tok.col)
        if tok.value in _RESERVED:
            raise RddlSyntaxError(
                f"reserved word {tok.value!r} cannot be used as {what}",
                tok.line, tok.col)
        return tok

    # -- domain file ----------------------------------------------------------

    def parse_domain_file(self) -> DomainAst:
        self.expect(IDENT, "domain")
        name = self.name("a domain name").value
        self.expect(PUNCT, "{")

        classes: list[str] = []
        pvariables: list[PVariable] = []
        cpfs: list[Cpf] = []
        reward: Optional[Expr] = None
        max_nondef: Optional[int] = None
        seen: set[str] = set()

        while not self.at(PUNCT, "}"):
            tok = self.peek()
            if tok.kind != IDENT:
                self.fail("expected a domain section")
            section = tok.value
            if section in _UNSUPPORTED_BLOCKS:
                raise UnsupportedConstructError(section, tok.line, tok.col)
            if section in seen:
                raise RddlSyntaxError(f"duplicate section {section!r}", tok.line, tok.col)
            seen.add(section)
            if section == "requirements":
                self._parse_requirements()
            elif section == "types":
                classes = self._parse_types()
            elif section == "pvariables":
                pvariables = self._parse_pvariables()
            elif section == "cpfs":
                cpfs = self._parse_cpfs()
            elif section == "reward":
                self.advance()
                self.expect(PUNCT, "=")
                reward = self.parse_expr()
                self.expect(PUNCT, ";")
            elif section == "max-nondef-actions":
                max_nondef = self._parse_max_nondef()
            else:
                raise RddlSyntaxError(f"unknown domain section {section!r}",
                                      tok.line, tok.col)
        self.expect(PUNCT, "}")
        self.expect(EOF)

        if reward is None:
            raise RddlSyntaxError("domain has no reward", 1, 1)
        domain = DomainAst(
            name=name,
            classes=tuple(classes),
            pvariables=tuple(pvariables),
            cpfs=tuple(cpfs),
            reward=reward,
            max_nondef_actions=max_nondef,
        )
        _check_domain(domain)
        return domain

    def _parse_requirements(self) -> None:
        self.advance()
        self.expect(PUNCT, "=")
        self.expect(PUNCT, "{")
        while not self.at(PUNCT, "}"):
            self.expect(IDENT)
            if self.at(PUNCT, ","):
                self.advance()
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")

    def _parse_types(self) -> list[str]:
        self.advance()
        self.expect(PUNCT, "{")
        classes: list[str] = []
        while not self.at(PUNCT, "}"):
            cls = self.name("a type name")
            self.expect(PUNCT, ":")
            if self.at(PUNCT, "{"):
                raise UnsupportedConstructError("enumerated type", cls.line, cls.col)
            self.expect(IDENT, "object")
            self.expect(PUNCT, ";")
            if cls.value in classes:
                raise RddlSyntaxError(f"duplicate type {cls.value!r}", cls.line, cls.col)
            classes.append(cls.value)
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")
        return classes

    def _parse_pvariables(self) -> list[PVariable]:
        self.advance()
        self.expect(PUNCT, "{")
        out: list[PVariable] = []
        names: set[str] = set()
        while not self.at(PUNCT, "}"):
            tok = self.name("a pvariable name")
            params: list[str] = []
            if self.at(PUNCT, "("):
                self.advance()
                while not self.at(PUNCT, ")"):
                    params.append(self.expect(IDENT).value)
                    if self.at(PUNCT, ","):
                        self.advance()
                self.expect(PUNCT, ")")
            self.expect(PUNCT, ":")
            self.expect(PUNCT, "{")
            kind_tok = self.expect(IDENT)
            if kind_tok.value in _UNSUPPORTED_KINDS:
                raise UnsupportedConstructError(kind_tok.value, kind_tok.line, kind_tok.col)
            if kind_tok.value not in (ast.STATE_FLUENT, ast.NON_FLUENT, ast.ACTION_FLUENT):
                raise RddlSyntaxError(f"unknown pvariable kind {kind_tok.value!r}",
                                      kind_tok.line, kind_tok.col)
            self.expect(PUNCT, ",")
            range_tok = self.expect(IDENT)
            if range_tok.value == "int":
                raise UnsupportedConstructError("int-valued pvariable",
                                                range_tok.line, range_tok.col)
            if range_tok.value not in (ast.BOOL, ast.REAL):
                raise UnsupportedConstructError(
                    f"non-primitive range {range_tok.value!r}",
                    range_tok.line, range_tok.col)
            default: Union[bool, float]
            default = False if range_tok.value == ast.BOOL else 0.0
            if self.at(PUNCT, ","):
                self.advance()
                self.expect(IDENT, "default")
                self.expect(PUNCT, "=")
                default = self._parse_literal(range_tok.value)
            self.expect(PUNCT, "}")
            self.expect(PUNCT, ";")
            if tok.value in names:
                raise RddlSyntaxError(f"duplicate pvariable {tok.value!r}",
                                      tok.line, tok.col)
            names.add(tok.value)
            out.append(PVariable(
                name=tok.value, kind=kind_tok.value, param_types=tuple(params),
                range=range_tok.value, default=default,
                pos=Pos(tok.line, tok.col)))
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")
        return out

    def _parse_literal(self, expected_range: Optional[str] = None) -> Union[bool, float]:
        tok = self.peek()
        if tok.kind == IDENT and tok.value in ("true", "false"):
            self.advance()
            value: Union[bool, float] = tok.value == "true"
        else:
            sign = 1.0
            if self.at(PUNCT, "-"):
                self.advance()
                sign = -1.0
            num = self.expect(NUMBER)
            value = sign * float(num.value)
        if expected_range == ast.BOOL and not isinstance(value, bool):
            raise RddlSyntaxError("boolean pvariable needs a true/false default",
                                  tok.line, tok.col)
        if expected_range == ast.REAL and isinstance(value, bool):
            raise RddlSyntaxError("real pvariable needs a numeric default",
                                  tok.line, tok.col)
        return value

    def _parse_cpfs(self) -> list[Cpf]:
        self.advance()
        self.expect(PUNCT, "{")
        out: list[Cpf] = []
        targets: set[str] = set()
        while not self.at(PUNCT, "}"):
            tok = self.name("a CPF target")
            self.expect(PUNCT, "'")
            params: list[str] = []
            if self.at(PUNCT, "("):
                self.advance()
                while not self.at(PUNCT, ")"):
                    params.append(self.expect(VAR).value)
                    if self.at(PUNCT, ","):
                        self.advance()
                self.expect(PUNCT, ")")
            self.expect(PUNCT, "=")
            expr = self.parse_expr()
            self.expect(PUNCT, ";")
            if tok.value in targets:
                raise RddlSyntaxError(f"duplicate CPF for {tok.value!r}",
                                      tok.line, tok.col)
            if len(set(params)) != len(params):
                raise RddlSyntaxError(f"repeated parameter in CPF {tok.value!r}",
                                      tok.line, tok.col)
            targets.add(tok.value)
            out.append(Cpf(name=tok.value, params=tuple(params), expr=expr,
                           pos=Pos(tok.line, tok.col)))
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")
        return out

    def _parse_max_nondef(self) -> Optional[int]:
        self.advance()
        self.expect(PUNCT, "=")
        if self.at(IDENT, "pos-inf"):
            self.advance()
            self.expect(PUNCT, ";")
            return None
        tok = self.expect(NUMBER)
        self.expect(PUNCT, ";")
        value = float(tok.value)
        if value < 1 or value != int(value):
            raise RddlSyntaxError("max-nondef-actions must be a positive integer",
                                  tok.line, tok.col)
        return int(value)

    # -- instance file ----------------------------------------------------------

    def parse_instance_file(self) -> InstanceAst:
        self.expect(IDENT, "instance")
        name = self.name("an instance name").value
        self.expect(PUNCT, "{")

        domain_name: Optional[str] = None
        objects: list[tuple[str, tuple[str, ...]]] = []
        non_fluents: list[Assignment] = []
        init_state: list[Assignment] = []
        horizon: Optional[int] = None
        discount: Optional[float] = None
        max_nondef: Optional[int] = None
        seen: set[str] = set()

        while not self.at(PUNCT, "}"):
            tok = self.peek()
            if tok.kind != IDENT:
                self.fail("expected an instance section")
            section = tok.value
            if section in seen:
                raise RddlSyntaxError(f"duplicate section {section!r}", tok.line, tok.col)
            seen.add(section)
            if section == "domain":
                self.advance()
                self.expect(PUNCT, "=")
                domain_name = self.name("a domain name").value
                self.expect(PUNCT, ";")
            elif section == "objects":
                objects = self._parse_objects()
            elif section == "non-fluents":
                non_fluents = self._parse_assignments()
            elif section == "init-state":
                init_state = self._parse_assignments()
            elif section == "horizon":
                self.advance()
                self.expect(PUNCT, "=")
                num = self.expect(NUMBER)
                self.expect(PUNCT, ";")
                horizon = int(float(num.value))
                if horizon < 1 or float(num.value) != horizon:
                    raise RddlSyntaxError("horizon must be a positive integer",
                                          num.line, num.col)
            elif section == "discount":
                self.advance()
                self.expect(PUNCT, "=")
                num = self.expect(NUMBER)
                self.expect(PUNCT, ";")
                discount = float(num.value)
                if not 0.0 < discount <= 1.0:
                    raise RddlSyntaxError("discount must be in (0, 1]",
                                          num.line, num.col)
            elif section == "max-nondef-actions":
                max_nondef = self._parse_max_nondef()
            else:
                raise RddlSyntaxError(f"unknown instance section {section!r}",
                                      tok.line, tok.col)
        self.expect(PUNCT, "}")
        self.expect(EOF)

        if domain_name is None:
            raise RddlSyntaxError("instance names no domain", 1, 1)
        if horizon is None:
            raise RddlSyntaxError("instance has no horizon", 1, 1)
        if discount is None:
            raise RddlSyntaxError("instance has no discount", 1, 1)
        return InstanceAst(
            name=name, domain_name=domain_name, objects=tuple(objects),
            non_fluent_assignments=tuple(non_fluents),
            init_state=tuple(init_state), horizon=horizon, discount=discount,
            max_nondef_actions=max_nondef)

    def _parse_objects(self) -> list[tuple[str, tuple[str, ...]]]:
        self.advance()
        self.expect(PUNCT, "{")
        out: list[tuple[str, tuple[str, ...]]] = []
        classes: set[str] = set()
        while not self.at(PUNCT, "}"):
            cls = self.name("a type name")
            self.expect(PUNCT, ":")
            self.expect(PUNCT, "{")
            members: list[str] = []
            while not self.at(PUNCT, "}"):
                members.append(self.name("an object name").value)
                if self.at(PUNCT, ","):
                    self.advance()
            self.expect(PUNCT, "}")
            self.expect(PUNCT, ";")
            if cls.value in classes:
                raise RddlSyntaxError(f"duplicate objects block for {cls.value!r}",
                                      cls.line, cls.col)
            classes.add(cls.value)
            out.append((cls.value, tuple(members)))
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")
        return out

    def _parse_assignments(self) -> list[Assignment]:
        self.advance()
        self.expect(PUNCT, "{")
        out: list[Assignment] = []
        seen: set[tuple[str, tuple[str, ...]]] = set()
        while not self.at(PUNCT, "}"):
            tok = self.name("a pvariable name")
            args: list[str] = []
            if self.at(PUNCT, "("):
                self.advance()
                while not self.at(PUNCT, ")"):
                    args.append(self.name("an object name").value)
                    if self.at(PUNCT, ","):
                        self.advance()
                self.expect(PUNCT, ")")
            value: Union[bool, float] = True
            if self.at(PUNCT, "="):
                self.advance()
                value = self._parse_literal()
            self.expect(PUNCT, ";")
            key = (tok.value, tuple(args))
            if key in seen:
                shown = f"{tok.value}({', '.join(args)})" if args else tok.value
                raise DuplicateAssignmentError(
                    f"duplicate assignment to {shown}", tok.line, tok.col)
            seen.add(key)
            out.append(Assignment(name=tok.value, args=tuple(args), value=value,
                                  pos=Pos(tok.line, tok.col)))
        self.expect(PUNCT, "}")
        self.expect(PUNCT, ";")
        return out

    # -- expressions ----------------------------------------------------------
    # precedence, loose to tight: =>  |  ^  ~  comparisons  + -  * /  unary -

    def parse_expr(self) -> Expr:
        return self._parse_implies()

    def _parse_implies(self) -> Expr:
        pos = self._pos()
        lhs = self._parse_or()
        if self.at(PUNCT, "<=>"):
            tok = self.peek()
            raise UnsupportedConstructError("biconditional <=>", tok.line, tok.col)
        if self.at(PUNCT, "=>"):
            self.advance()
            rhs = self._parse_implies()  # right associative
            return Implies(lhs, rhs, pos=pos)
        return lhs

    def _parse_or(self) -> Expr:
        pos = self._pos()
        items = [self._parse_and()]
        while self.at(PUNCT, "|"):
            self.advance()
            items.append(self._parse_and())
        if len(items) == 1:
            return items[0]
        return Or(tuple(_flatten(Or, items)), pos=pos)

    def _parse_and(self) -> Expr:
        pos = self._pos()
        items = [self._parse_unary_not()]
        while self.at(PUNCT, "^"):
            self.advance()
            items.append(self._parse_unary_not())
        if len(items) == 1:
            return items[0]
        return And(tuple(_flatten(And, items)), pos=pos)

    def _parse_unary_not(self) -> Expr:
        if self.at(PUNCT, "~"):
            pos = self._pos()
            self.advance()
            return Not(self._parse_unary_not(), pos=pos)
        return self._parse_comparison()

    def _parse_comparison(self) -> Expr:
        pos = self._pos()
        lhs = self._parse_additive()
        if self.at(PUNCT, "~="):
            tok = self.peek()
            raise UnsupportedConstructError("inequality ~=", tok.line, tok.col)
        for op in ("==", "<=", ">=", "<", ">"):
            if self.at(PUNCT, op):
                self.advance()
                rhs = self._parse_additive()
                return Cmp(op, lhs, rhs, pos=pos)
        return lhs

    def _parse_additive(self) -> Expr:
        pos = self._pos()
        expr = self._parse_multiplicative()
        items = [expr]
        while self.at(PUNCT, "+") or self.at(PUNCT, "-"):
            if self.at(PUNCT, "+"):
                self.advance()
                items.append(self._parse_multiplicative())
            else:
                self.advance()
                rhs = self._parse_multiplicative()
                lhs = items[0] if len(items) == 1 else Add(tuple(_flatten(Add, items)), pos=pos)
                items = [Sub(lhs, rhs, pos=pos)]
        if len(items) == 1:
            return items[0]
        return Add(tuple(_flatten(Add, items)), pos=pos)

    def _parse_multiplicative(self) -> Expr:
        pos = self._pos()
        items = [self._parse_factor()]
        while self.at(PUNCT, "*") or self.at(PUNCT, "/"):
            if self.at(PUNCT, "*"):
                self.advance()
                items.append(self._parse_factor())
            else:
                self.advance()
                rhs = self._parse_factor()
                lhs = items[0] if len(items) == 1 else Mul(tuple(_flatten(Mul, items)), pos=pos)
                items = [Div(lhs, rhs, pos=pos)]
        if len(items) == 1:
            return items[0]
        return Mul(tuple(_flatten(Mul, items)), pos=pos)

    def _parse_factor(self) -> Expr:
        if self.at(PUNCT, "-"):
            pos = self._pos()
            self.advance()
            return Neg(self._parse_factor(), pos=pos)
        return self._parse_primary()

    def _parse_primary(self) -> Expr:
        tok = self.peek()
        pos = Pos(tok.line, tok.col)
        if tok.kind == PUNCT and tok.value in ("(", "["):
            close = ")" if tok.value == "(" else "]"
            self.advance()
            expr = self.parse_expr()
            self.expect(PUNCT, close)
            return expr
        if tok.kind == NUMBER:
            self.advance()
            return Const(float(tok.value), pos=pos)
        if tok.kind == VAR:
            raise RddlSyntaxError(
                f"parameter variable {tok.value!r} outside a pvariable application",
                tok.line, tok.col)
        if tok.kind != IDENT:
            self.fail("expected an expression")
        word = tok.value
        if word in ("true", "false"):
            self.advance()
            return Const(word == "true", pos=pos)
        if word == "if":
            self.advance()
            self.expect(PUNCT, "(")
            cond = self.parse_expr()
            self.expect(PUNCT, ")")
            self.expect(IDENT, "then")
            then = self.parse_expr()
            self.expect(IDENT, "else")
            orelse = self.parse_expr()
            return If(cond, then, orelse, pos=pos)
        if word in _QUANT_KEYWORDS or word in _AGG_KEYWORDS:
            self.advance()
            variables = self._parse_typed_vars()
            body = self._parse_delimited_body(word)
            if word in _QUANT_KEYWORDS:
                return Quant(_QUANT_KEYWORDS[word], variables, body, pos=pos)
            return Agg(_AGG_KEYWORDS[word], variables, body, pos=pos)
        if word == "Bernoulli":
            self.advance()
            self.expect(PUNCT, "(")
            param = self.parse_expr()
            self.expect(PUNCT, ")")
            return BernoulliExpr(param, pos=pos)
        if word == "KronDelta":
            self.advance()
            self.expect(PUNCT, "(")
            inner = self.parse_expr()
            self.expect(PUNCT, ")")
            return KronDeltaExpr(inner, pos=pos)
        if word in _UNSUPPORTED_DISTS:
            raise UnsupportedConstructError(f"distribution {word}", tok.line, tok.col)
        if word == "switch":
            raise UnsupportedConstructError("switch", tok.line, tok.col)
        if word in _RESERVED:
            raise RddlSyntaxError(f"unexpected keyword {word!r}", tok.line, tok.col)
        # pvariable application
        self.advance()
        args: list[str] = []
        if self.at(PUNCT, "("):
            self.advance()
            while not self.at(PUNCT, ")"):
                term = self.peek()
                if term.kind == VAR:
                    args.append(self.advance().value)
                elif term.kind == IDENT:
                    args.append(self.name("an object name").value)
                else:
                    self.fail("expected an object or parameter variable")
                if self.at(PUNCT, ","):
                    self.advance()
            self.expect(PUNCT, ")")
        if self.at(PUNCT, "'"):
            tok2 = self.peek()
            raise UnsupportedConstructError(
                "primed pvariable outside a CPF target", tok2.line, tok2.col)
        return Apply(word, tuple(args), pos=pos)

    def _parse_typed_vars(self) -> tuple[tuple[str, str], ...]:
        self.expect(PUNCT, "{")
        out: list[tuple[str, str]] = []
        while not self.at(PUNCT, "}"):
            var = self.expect(VAR).value
            self.expect(PUNCT, ":")
            cls = self.name("a type name").value
            out.append((var, cls))
            if self.at(PUNCT, ","):
                self.advance()
        self.expect(PUNCT, "}")
        if not out:
            self.fail("quantifier needs at least one typed variable")
        return tuple(out)

    def _parse_delimited_body(self, word: str) -> Expr:
        if not (self.at(PUNCT, "[") or self.at(PUNCT, "(")):
            self.fail(f"{word}{{...}} body must be bracketed: [ ... ] or ( ... )")
        return self._parse_primary()


def _flatten(cls, items: list[Expr]) -> list[Expr]:
    """Merge directly nested chains of the same associative operator."""
    out: list[Expr] = []
    for item in items:
        if isinstance(item, cls):
            out.extend(item.items)
        else:
            out.append(item)
    return out


# ---------------------------------------------------------------------------
# Domain AST invariants
# ---------------------------------------------------------------------------

def _check_domain(domain: DomainAst) -> None:
    decls = {pv.name: pv for pv in domain.pvariables}
    for pv in domain.pvariables:
        if pv.kind in (ast.STATE_FLUENT, ast.ACTION_FLUENT) and pv.range != ast.BOOL:
            raise ValidationError(
                "type-mismatch", pv.name,
                f"{pv.kind} {pv.name!r} must be boolean-ranged",
                pv.pos.line if pv.pos else None, pv.pos.col if pv.pos else None)
        for cls in pv.param_types:
            if cls not in domain.classes:
                raise ValidationError(
                    "unknown-symbol", pv.name,
                    f"pvariable {pv.name!r} uses undeclared type {cls!r}",
                    pv.pos.line if pv.pos else None, pv.pos.col if pv.pos else None)

    fluent_names = {pv.name for pv in domain.fluents()}
    cpf_names = {cpf.name for cpf in domain.cpfs}
    for cpf in domain.cpfs:
        decl = decls.get(cpf.name)
        line = cpf.pos.line if cpf.pos else None
        col = cpf.pos.col if cpf.pos else None
        if decl is None or decl.kind != ast.STATE_FLUENT:
            raise ValidationError(
                "unknown-symbol", cpf.name,
                f"CPF target {cpf.name!r} is not a declared state-fluent", line, col)
        if len(cpf.params) != decl.arity:
            raise ValidationError(
                "arity-mismatch", cpf.name,
                f"CPF {cpf.name!r} has {len(cpf.params)} parameters, "
                f"declaration has {decl.arity}", line, col)
        scope = dict(zip(cpf.params, decl.param_types))
        _check_expr(cpf.expr, decls, domain.classes, scope, is_cpf_root=True)
    missing = fluent_names - cpf_names
    if missing:
        name = sorted(missing)[0]
        raise ValidationError("unknown-symbol", name,
                              f"state-fluent {name!r} has no CPF")
    _check_expr(domain.reward, decls, domain.classes, {}, is_cpf_root=False)


def _check_expr(expr: Expr, decls: dict[str, PVariable], classes: tuple[str, ...],
                scope: dict[str, str], is_cpf_root: bool) -> None:
    line = expr.pos.line if expr.pos else None
    col = expr.pos.col if expr.pos else None
    if isinstance(expr, ast.DISTRIBUTION_NODES) and not is_cpf_root:
        kind = "Bernoulli" if isinstance(expr, BernoulliExpr) else "KronDelta"
        raise ValidationError(
            "type-mismatch", kind,
            f"{kind} is only allowed at the root of a CPF", line, col)
    if isinstance(expr, Apply):
        decl = decls.get(expr.name)
        if decl is None:
            raise ValidationError("unknown-symbol", expr.name,
                                  f"unknown pvariable {expr.name!r}", line, col)
        if len(expr.args) != decl.arity:
            raise ValidationError(
                "arity-mismatch", expr.name,
                f"{expr.name!r} applied to {len(expr.args)} arguments, "
                f"declared with {decl.arity}", line, col)
        for term, expected in zip(expr.args, decl.param_types):
            if ast.is_var(term):
                bound = scope.get(term)
                if bound is None:
                    raise ValidationError(
                        "unknown-symbol", term,
                        f"unbound parameter variable {term!r}", line, col)
                if bound != expected:
                    raise ValidationError(
                        "type-mismatch", term,
                        f"{term!r} has type {bound!r}, {expr.name!r} expects "
                        f"{expected!r}", line, col)
            # object terms are resolved against instance declarations later
        return
    if isinstance(expr, (Quant, Agg)):
        inner = dict(scope)
        for var, cls in expr.variables:
            if var in inner:
                raise ValidationError(
                    "type-mismatch", var,
                    f"quantifier variable {var!r} shadows an enclosing binding",
                    line, col)
            if cls not in classes:
                raise ValidationError(
                    "unknown-symbol", cls,
                    f"quantifier over undeclared type {cls!r}", line, col)
            inner[var] = cls
        _check_expr(expr.body, decls, classes, inner, is_cpf_root=False)
        return
    for child in ast.children(expr):
        # distribution roots may wrap one level of expression
        _check_expr(child, decls, classes, scope,
                    is_cpf_root=False)


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def parse_domain(text: str) -> DomainAst:
    """Parse RDDL domain text into a checked :class:`DomainAst`."""
    return _Parser(text).parse_domain_file()


def parse_instance(text: str) -> InstanceAst:
    """Parse RDDL instance text into an :class:`InstanceAst`."""
    return _Parser(text).parse_instance_file()


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression (testing and tooling helper)."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    parser.expect(EOF)
    return expr

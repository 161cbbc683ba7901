"""Lexer, parser and the two normalisation passes for Cofola source.

The surface language is small enough that a hand-rolled recursive
descent parser is clearer than a grammar file, and it gives precise
error positions.

Pipeline: ``parse`` produces the raw Ast, ``expand_ranges`` replaces
range literals by entity runs, ``desugar`` splits fused forms and lifts
inline literals out of operand positions.  ``load`` chains all three.
``pretty_print`` renders any stage back to parseable source; re-parsing
its output yields an equal Ast.

Range literals come in three surface forms, all normalised at parse
time to a half-open integer interval on a shared name prefix:

* ``player0...10``        attached integer bound, exclusive
* ``player0...player9``   attached name bound, inclusive
* ``player1, player2, ..., player15``  list ellipsis, inclusive,
  continuing from the last explicitly written element
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .ast import (
    AddUnionOp, BagLit, CAnd, CDisjoint, CForParts, CIndexEq, CIndexIn,
    CMember, CNot, CObjEq, COr, CPattern, CSize, CSubset, Choose,
    ChooseReplace, CircleOf, ComposeOf, Constraint, Decl, DiffOp, Elem,
    Expr, FusedChoose, IndexOf, IntersectOp, PLess, PNextTo, PPred,
    PTogether, PartitionOf, Pattern, Program, RangeElem, Ref, SACard,
    SACount, SADedup, SAPatCount, SetLit, SequenceOf, SizeAtom, Supp,
    TupleOf, UnionOp,
)
from .errors import CofolaSyntaxError

# ---------------------------------------------------------------------------
# lexer


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


_ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TRAILING_INT_RE = re.compile(r"^(.*?)(\d+)$")

_TWO_CHAR = {"==": "EQEQ", "<=": "LE", ">=": "GE", "++": "PLUSPLUS"}
_ONE_CHAR = {
    "=": "EQ", "<": "LT", ">": "GT", "+": "PLUS", "-": "MINUS",
    "&": "AMP", "|": "PIPE", "(": "LPAREN", ")": "RPAREN",
    "[": "LBRACK", "]": "RBRACK", ",": "COMMA", ":": "COLON",
    ".": "DOT",
}


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    line = 1
    i = 0
    line_start = 0
    n = len(text)
    while i < n:
        c = text[i]
        col = i - line_start + 1
        if c in " \t\r":
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "\n":
            if toks and toks[-1].kind != "NEWLINE":
                toks.append(Token("NEWLINE", "\n", line, col))
            i += 1
            line += 1
            line_start = i
            continue
        if text.startswith("...", i):
            toks.append(Token("ELLIPSIS", "...", line, col))
            i += 3
            continue
        if text[i:i + 2] in _TWO_CHAR:
            two = text[i:i + 2]
            toks.append(Token(_TWO_CHAR[two], two, line, col))
            i += 2
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # a decimal point, but not the start of "..."
            if j < n - 1 and text[j] == "." and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                toks.append(Token("NUMBER", text[i:j], line, col))
            else:
                toks.append(Token("INT", text[i:j], line, col))
            i = j
            continue
        m = _ID_RE.match(text, i)
        if m:
            toks.append(Token("ID", m.group(0), line, col))
            i = m.end()
            continue
        if c in _ONE_CHAR:
            toks.append(Token(_ONE_CHAR[c], c, line, col))
            i += 1
            continue
        raise CofolaSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, n - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser

_EXPR_FUNCS = {
    "set", "bag", "choose", "choose_replace", "supp",
    "union", "intersect", "diff", "add_union",
    "tuple", "sequence", "circle", "partition", "compose",
    "choose_tuple", "choose_sequence", "choose_circle",
    "choose_replace_tuple", "choose_replace_sequence",
    "choose_replace_circle",
}

_INFIX = {"PLUS": UnionOp, "AMP": IntersectOp, "MINUS": DiffOp,
          "PLUSPLUS": AddUnionOp}

_CMP_TOKENS = {"EQEQ": "==", "LT": "<", "GT": ">", "LE": "<=", "GE": ">="}


class _Parser:
    def __init__(self, toks: List[Token]):
        self.toks = toks
        self.pos = 0

    # -- token helpers ------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise CofolaSyntaxError(
                f"expected {want}, found {tok.text!r}", tok.line, tok.col)
        return self.next()

    def error(self, msg: str) -> CofolaSyntaxError:
        tok = self.peek()
        return CofolaSyntaxError(msg, tok.line, tok.col)

    # -- program ------------------------------------------------------

    def parse_program(self) -> Program:
        statements: List = []
        while True:
            while self.accept("NEWLINE"):
                pass
            if self.peek().kind == "EOF":
                break
            if (self.peek().kind == "ID" and self.peek(1).kind == "EQ"):
                statements.append(self.parse_decl())
            else:
                statements.append(self.parse_constraint())
            if self.peek().kind != "EOF":
                self.expect("NEWLINE")
        return Program(tuple(statements))

    def parse_decl(self) -> Decl:
        name_tok = self.expect("ID")
        self.expect("EQ")
        expr = self.parse_expr()
        return Decl(name_tok.text, expr, line=name_tok.line)

    # -- expressions --------------------------------------------------

    def parse_expr(self) -> Expr:
        expr = self.parse_primary()
        while self.peek().kind in _INFIX:
            node = _INFIX[self.next().kind]
            rhs = self.parse_primary()
            expr = node(expr, rhs)
        return expr

    def parse_primary(self) -> Expr:
        tok = self.expect("ID")
        name = tok.text
        if name in _EXPR_FUNCS and self.peek().kind == "LPAREN":
            return self.parse_func(name)
        if self.peek().kind == "LBRACK":
            self.next()
            idx = int(self.expect("INT").text)
            self.expect("RBRACK")
            return IndexOf(Ref(name), idx)
        return Ref(name)

    def parse_func(self, name: str) -> Expr:
        self.expect("LPAREN")
        if name == "set":
            items = self.parse_items(with_counts=False)
            self.expect("RPAREN")
            return SetLit(items)
        if name == "bag":
            items = self.parse_items(with_counts=True)
            self.expect("RPAREN")
            return BagLit(items)
        if name in ("union", "intersect", "diff", "add_union"):
            lhs = self.parse_expr()
            self.expect("COMMA")
            rhs = self.parse_expr()
            self.expect("RPAREN")
            node = {"union": UnionOp, "intersect": IntersectOp,
                    "diff": DiffOp, "add_union": AddUnionOp}[name]
            return node(lhs, rhs)
        if name == "supp":
            src = self.parse_expr()
            self.expect("RPAREN")
            return Supp(src)
        if name in ("choose", "choose_replace"):
            src = self.parse_expr()
            k = None
            if self.accept("COMMA"):
                k = int(self.expect("INT").text)
            self.expect("RPAREN")
            node = Choose if name == "choose" else ChooseReplace
            return node(src, k)
        if name in ("tuple", "sequence"):
            src = self.parse_expr()
            self.expect("RPAREN")
            return TupleOf(src) if name == "tuple" else SequenceOf(src)
        if name == "circle":
            src = self.parse_expr()
            reflection = False
            if self.accept("COMMA"):
                reflection = self.parse_reflection_kw()
            self.expect("RPAREN")
            return CircleOf(src, reflection)
        if name in ("partition", "compose"):
            src = self.parse_expr()
            self.expect("COMMA")
            k = int(self.expect("INT").text)
            self.expect("RPAREN")
            node = PartitionOf if name == "partition" else ComposeOf
            return node(src, k)
        # remaining: the fused choose_* forms
        replace = name.startswith("choose_replace_")
        shape = name.split("_")[-1]
        src = self.parse_expr()
        k = None
        reflection = False
        if self.accept("COMMA"):
            if self.peek().kind == "INT":
                k = int(self.next().text)
                if self.accept("COMMA"):
                    reflection = self.parse_reflection_kw()
            else:
                reflection = self.parse_reflection_kw()
        self.expect("RPAREN")
        if reflection and shape != "circle":
            raise self.error("reflection only applies to circles")
        return FusedChoose(src, k, shape, replace, reflection)

    def parse_reflection_kw(self) -> bool:
        self.expect("ID", "reflection")
        self.expect("EQ")
        tok = self.expect("ID")
        if tok.text not in ("true", "false"):
            raise CofolaSyntaxError(
                f"expected true or false, found {tok.text!r}",
                tok.line, tok.col)
        return tok.text == "true"

    def parse_items(self, with_counts: bool) -> tuple:
        items: List = []
        if self.peek().kind == "RPAREN":
            return tuple(items)
        while True:
            items.append(self.parse_item(items, with_counts))
            if not self.accept("COMMA"):
                break
        return tuple(items)

    def parse_item(self, items: List, with_counts: bool):
        tok = self.peek()
        if tok.kind == "ELLIPSIS":
            # list form: continue the run from the previous element up to
            # an inclusive named bound, e.g.  member0, ..., member17
            self.next()
            self.expect("COMMA")
            bound = self.expect("ID")
            if not items or not isinstance(items[-1], Elem):
                raise CofolaSyntaxError(
                    "'...' must follow an explicit element",
                    tok.line, tok.col)
            prefix, start = self._split_indexed(items[-1].name, tok)
            bprefix, bidx = self._split_indexed(bound.text, bound)
            if prefix != bprefix:
                raise CofolaSyntaxError(
                    f"range endpoints disagree: {items[-1].name} vs "
                    f"{bound.text}", bound.line, bound.col)
            return RangeElem(prefix, start + 1, bidx + 1,
                             self._item_count(with_counts))
        name_tok = self.expect("ID")
        if self.peek().kind == "ELLIPSIS":
            self.next()
            prefix, start = self._split_indexed(name_tok.text, name_tok)
            if self.peek().kind == "INT":
                stop = int(self.next().text)  # exclusive bound
            else:
                bound = self.expect("ID")
                bprefix, bidx = self._split_indexed(bound.text, bound)
                if prefix != bprefix:
                    raise CofolaSyntaxError(
                        f"range endpoints disagree: {name_tok.text} vs "
                        f"{bound.text}", bound.line, bound.col)
                stop = bidx + 1  # named bound is inclusive
            return RangeElem(prefix, start, stop,
                             self._item_count(with_counts))
        return Elem(name_tok.text, self._item_count(with_counts))

    def _item_count(self, with_counts: bool) -> int:
        if with_counts and self.accept("COLON"):
            return int(self.expect("INT").text)
        return 1

    @staticmethod
    def _split_indexed(name: str, tok: Token) -> Tuple[str, int]:
        m = _TRAILING_INT_RE.match(name)
        if not m:
            raise CofolaSyntaxError(
                f"range endpoint {name!r} has no trailing index",
                tok.line, tok.col)
        return m.group(1), int(m.group(2))

    # -- constraints ----------------------------------------------------

    def parse_constraint(self) -> Constraint:
        c = self.parse_or()
        if self.accept("ID", "for"):
            var = self.expect("ID").text
            self.expect("ID", "in")
            obj = self.expect("ID").text
            return CForParts(c, var, obj)
        return c

    def parse_or(self) -> Constraint:
        items = [self.parse_and()]
        while self.accept("ID", "or"):
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else COr(tuple(items))

    def parse_and(self) -> Constraint:
        items = [self.parse_not()]
        while self.accept("ID", "and"):
            items.append(self.parse_not())
        return items[0] if len(items) == 1 else CAnd(tuple(items))

    def parse_not(self) -> Constraint:
        if self.accept("ID", "not"):
            return CNot(self.parse_not())
        return self.parse_catom()

    def parse_catom(self) -> Constraint:
        tok = self.peek()
        if tok.kind == "LPAREN":
            pred = self.try_predecessor()
            if pred is not None:
                return pred
            self.next()
            inner = self.parse_constraint()
            self.expect("RPAREN")
            return inner
        if tok.kind in ("PIPE", "INT", "NUMBER", "MINUS"):
            return self.parse_size_constraint()
        if tok.kind != "ID":
            raise self.error(f"unexpected {tok.text!r} in constraint")
        if tok.text == "together" and self.peek(1).kind == "LPAREN":
            self.next()
            self.expect("LPAREN")
            arg = self.expect("ID").text
            self.expect("RPAREN")
            self.expect("ID", "in")
            obj = self.expect("ID").text
            return CPattern(PTogether(arg), obj)
        if tok.text == "next_to" and self.peek(1).kind == "LPAREN":
            self.next()
            self.expect("LPAREN")
            first = self.expect("ID").text
            self.expect("COMMA")
            second = self.expect("ID").text
            self.expect("RPAREN")
            self.expect("ID", "in")
            obj = self.expect("ID").text
            return CPattern(PNextTo(first, second), obj)
        if self.peek(1).kind == "DOT":
            return self.parse_size_constraint()
        name = self.next().text
        if self.peek().kind == "LBRACK":
            self.next()
            idx = int(self.expect("INT").text)
            self.expect("RBRACK")
            if self.accept("EQEQ"):
                entity = self.expect("ID").text
                return CIndexEq(name, idx, entity)
            self.expect("ID", "in")
            return CIndexIn(name, idx, self.parse_primary())
        if self.peek().kind == "LT":
            self.next()
            rhs = self.expect("ID").text
            self.expect("ID", "in")
            obj = self.expect("ID").text
            return CPattern(PLess(name, rhs), obj)
        if self.accept("ID", "in"):
            return CMember(name, self.parse_primary())
        if self.accept("ID", "not"):
            self.expect("ID", "in")
            return CNot(CMember(name, self.parse_primary()))
        if self.accept("ID", "subset"):
            return CSubset(Ref(name), self.parse_primary())
        if self.accept("ID", "disjoint"):
            return CDisjoint(Ref(name), self.parse_primary())
        if self.accept("EQEQ"):
            return CObjEq(Ref(name), self.parse_primary())
        raise self.error(f"cannot parse constraint starting at {name!r}")

    def try_predecessor(self) -> Optional[Constraint]:
        """Attempt ``(a, b) in obj``; roll back on failure so the caller
        can parse a parenthesised constraint instead."""
        saved = self.pos
        try:
            self.expect("LPAREN")
            first = self.expect("ID").text
            self.expect("COMMA")
            second = self.expect("ID").text
            self.expect("RPAREN")
            self.expect("ID", "in")
            obj = self.expect("ID").text
            return CPattern(PPred(first, second), obj)
        except CofolaSyntaxError:
            self.pos = saved
            return None

    # -- size constraints ---------------------------------------------

    def parse_size_constraint(self) -> Constraint:
        terms: List = []
        sign = -1 if self.accept("MINUS") else 1
        while True:
            coef = Fraction(1)
            if self.peek().kind in ("INT", "NUMBER"):
                coef = Fraction(self.next().text)
            terms.append((sign * coef, self.parse_size_atom()))
            if self.accept("PLUS"):
                sign = 1
            elif self.accept("MINUS"):
                sign = -1
            else:
                break
        cmp_tok = self.peek()
        if cmp_tok.kind not in _CMP_TOKENS:
            raise self.error("expected a comparison operator")
        cmp = _CMP_TOKENS[self.next().kind]
        bsign = -1 if self.accept("MINUS") else 1
        btok = self.peek()
        if btok.kind not in ("INT", "NUMBER"):
            raise self.error("expected a numeric bound")
        bound = bsign * Fraction(self.next().text)
        return CSize(tuple(terms), cmp, bound)

    def parse_size_atom(self) -> SizeAtom:
        if self.accept("PIPE"):
            obj = self.expect("ID").text
            self.expect("PIPE")
            return SACard(obj)
        obj = self.expect("ID").text
        self.expect("DOT")
        method = self.expect("ID").text
        if method not in ("count", "dedup_count"):
            raise self.error(f"unknown size method {method!r}")
        self.expect("LPAREN")
        if method == "dedup_count":
            arg = self.parse_primary()
            self.expect("RPAREN")
            return SADedup(obj, arg)
        pattern = self.try_count_pattern()
        if pattern is not None:
            self.expect("RPAREN")
            return SAPatCount(obj, pattern)
        arg = self.parse_primary()
        self.expect("RPAREN")
        return SACount(obj, arg)

    def try_count_pattern(self) -> Optional[Pattern]:
        tok = self.peek()
        if tok.kind == "ID" and tok.text == "together" \
                and self.peek(1).kind == "LPAREN":
            self.next()
            self.expect("LPAREN")
            arg = self.expect("ID").text
            self.expect("RPAREN")
            return PTogether(arg)
        if tok.kind == "ID" and tok.text == "next_to" \
                and self.peek(1).kind == "LPAREN":
            self.next()
            self.expect("LPAREN")
            first = self.expect("ID").text
            self.expect("COMMA")
            second = self.expect("ID").text
            self.expect("RPAREN")
            return PNextTo(first, second)
        if tok.kind == "LPAREN":
            saved = self.pos
            try:
                self.next()
                first = self.expect("ID").text
                self.expect("COMMA")
                second = self.expect("ID").text
                self.expect("RPAREN")
                return PPred(first, second)
            except CofolaSyntaxError:
                self.pos = saved
                return None
        if tok.kind == "ID" and self.peek(1).kind == "LT":
            lhs = self.next().text
            self.next()
            rhs = self.expect("ID").text
            return PLess(lhs, rhs)
        return None


# ---------------------------------------------------------------------------
# public entry points

def parse(text: str) -> Program:
    """Parse Cofola source into a raw Ast (ranges and sugar intact)."""
    return _Parser(tokenize(text)).parse_program()


def load(text: str) -> Program:
    """Parse and fully normalise: expand ranges, then desugar."""
    return desugar(expand_ranges(parse(text)))


# ---------------------------------------------------------------------------
# range expansion

def expand_ranges(program: Program) -> Program:
    """Replace every RangeElem by its run of entities, in order."""
    def expand_items(items: tuple) -> tuple:
        out: List[Elem] = []
        for item in items:
            if isinstance(item, RangeElem):
                if item.stop <= item.start:
                    raise CofolaSyntaxError(
                        f"empty or inverted range {item.prefix}{item.start}"
                        f"...{item.stop}")
                for i in range(item.start, item.stop):
                    out.append(Elem(f"{item.prefix}{i}", item.count))
            else:
                out.append(item)
        return tuple(out)

    def walk(expr: Expr) -> Expr:
        if isinstance(expr, SetLit):
            return SetLit(expand_items(expr.items))
        if isinstance(expr, BagLit):
            return BagLit(expand_items(expr.items))
        return expr

    return _map_program(program, walk)


# ---------------------------------------------------------------------------
# desugaring

def desugar(program: Program) -> Program:
    """Normalise the Ast so every operand is a Ref:

    * fused ``choose_*`` forms split into a choose plus an arrangement,
      the intermediate named ``_tmpN``;
    * inline expressions in operand or constraint-argument positions are
      lifted into fresh ``_anonN`` declarations.

    Fresh names are deterministic: numbered in order of appearance,
    skipping any identifier the program already uses.
    """
    used = set()
    for stmt in program.statements:
        if isinstance(stmt, Decl):
            used.add(stmt.name)
            for item in _literal_items(stmt.expr):
                used.add(item.name)

    counters = {"tmp": 0, "anon": 0}

    def fresh(kind: str) -> str:
        while True:
            counters[kind] += 1
            name = f"_{kind}{counters[kind]}"
            if name not in used:
                used.add(name)
                return name

    statements: List = []

    def lift(expr: Expr, line: int) -> Expr:
        """Return a Ref to expr, declaring it under a fresh name if it
        is not already one."""
        expr = rewrite(expr, line)
        if isinstance(expr, Ref):
            return expr
        name = fresh("anon")
        statements.append(Decl(name, expr, line=line))
        return Ref(name)

    def rewrite(expr: Expr, line: int) -> Expr:
        if isinstance(expr, FusedChoose):
            inner = Choose(lift(expr.src, line), expr.k) if not expr.replace \
                else ChooseReplace(lift(expr.src, line), expr.k)
            name = fresh("tmp")
            statements.append(Decl(name, inner, line=line))
            if expr.shape == "tuple":
                return TupleOf(Ref(name))
            if expr.shape == "sequence":
                return SequenceOf(Ref(name))
            return CircleOf(Ref(name), expr.reflection)
        if isinstance(expr, (Ref, SetLit, BagLit)):
            return expr
        return _map_subexprs(expr, lambda sub: lift(sub, line))

    def rewrite_constraint(c: Constraint, line: int = 0) -> Constraint:
        if isinstance(c, CAnd):
            return CAnd(tuple(rewrite_constraint(i, line) for i in c.items))
        if isinstance(c, COr):
            return COr(tuple(rewrite_constraint(i, line) for i in c.items))
        if isinstance(c, CNot):
            return CNot(rewrite_constraint(c.item, line))
        if isinstance(c, CForParts):
            return CForParts(rewrite_constraint(c.template, line),
                             c.var, c.obj)
        if isinstance(c, CMember):
            return CMember(c.entity, lift(c.obj, line))
        if isinstance(c, CSubset):
            return CSubset(lift(c.lhs, line), lift(c.rhs, line))
        if isinstance(c, CDisjoint):
            return CDisjoint(lift(c.lhs, line), lift(c.rhs, line))
        if isinstance(c, CObjEq):
            return CObjEq(lift(c.lhs, line), lift(c.rhs, line))
        if isinstance(c, CIndexIn):
            return CIndexIn(c.obj, c.index, lift(c.target, line))
        if isinstance(c, CSize):
            terms = []
            for coef, atom in c.terms:
                if isinstance(atom, SACount):
                    atom = SACount(atom.obj, lift(atom.arg, line))
                elif isinstance(atom, SADedup):
                    atom = SADedup(atom.obj, lift(atom.arg, line))
                terms.append((coef, atom))
            return CSize(tuple(terms), c.cmp, c.bound)
        return c

    for stmt in program.statements:
        if isinstance(stmt, Decl):
            expr = rewrite(stmt.expr, stmt.line)
            statements.append(Decl(stmt.name, expr, line=stmt.line))
        else:
            statements.append(rewrite_constraint(stmt))
    return Program(tuple(statements))


def _literal_items(expr: Expr):
    if isinstance(expr, (SetLit, BagLit)):
        for item in expr.items:
            if isinstance(item, Elem):
                yield item
    else:
        for sub in _subexprs(expr):
            yield from _literal_items(sub)


# ---------------------------------------------------------------------------
# structural helpers

_SUB_FIELDS = {
    Choose: ("src",), ChooseReplace: ("src",), Supp: ("src",),
    UnionOp: ("lhs", "rhs"), IntersectOp: ("lhs", "rhs"),
    DiffOp: ("lhs", "rhs"), AddUnionOp: ("lhs", "rhs"),
    TupleOf: ("src",), SequenceOf: ("src",), CircleOf: ("src",),
    PartitionOf: ("src",), ComposeOf: ("src",), IndexOf: ("src",),
    FusedChoose: ("src",),
}


def _subexprs(expr: Expr):
    for f in _SUB_FIELDS.get(type(expr), ()):
        yield getattr(expr, f)


def _map_subexprs(expr: Expr, fn) -> Expr:
    fields = _SUB_FIELDS.get(type(expr))
    if not fields:
        return expr
    kwargs = {f: fn(getattr(expr, f)) for f in fields}
    from dataclasses import replace
    return replace(expr, **kwargs)


# ---------------------------------------------------------------------------
# pretty printer

def pretty_print(program: Program) -> str:
    """Render a Program back to source text.  Parsing the result yields
    an Ast equal to the input (modulo line numbers)."""
    lines = []
    for stmt in program.statements:
        if isinstance(stmt, Decl):
            lines.append(f"{stmt.name} = {_fmt_expr(stmt.expr)}")
        else:
            lines.append(_fmt_con(stmt, 0))
    return "\n".join(lines) + "\n"


def _fmt_number(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    twos = fives = 0
    d = q.denominator
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        # not expressible as a finite decimal; cannot arise from parsing
        return f"{q.numerator}/{q.denominator}"
    k = max(twos, fives)
    scaled = q.numerator * 10 ** k // q.denominator
    digits = str(abs(scaled)).rjust(k + 1, "0")
    sign = "-" if scaled < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


def _fmt_item(item, with_counts: bool) -> str:
    if isinstance(item, RangeElem):
        body = f"{item.prefix}{item.start}...{item.stop}"
    else:
        body = item.name
    if with_counts and item.count != 1:
        body += f": {item.count}"
    return body


def _fmt_expr(expr: Expr) -> str:
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, SetLit):
        inner = ", ".join(_fmt_item(i, False) for i in expr.items)
        return f"set({inner})"
    if isinstance(expr, BagLit):
        inner = ", ".join(f"{_fmt_item(i, False)}: {i.count}"
                          if isinstance(i, Elem)
                          else _fmt_item(i, True) for i in expr.items)
        return f"bag({inner})"
    if isinstance(expr, Choose):
        if expr.k is None:
            return f"choose({_fmt_expr(expr.src)})"
        return f"choose({_fmt_expr(expr.src)}, {expr.k})"
    if isinstance(expr, ChooseReplace):
        if expr.k is None:
            return f"choose_replace({_fmt_expr(expr.src)})"
        return f"choose_replace({_fmt_expr(expr.src)}, {expr.k})"
    if isinstance(expr, Supp):
        return f"supp({_fmt_expr(expr.src)})"
    if isinstance(expr, UnionOp):
        return f"union({_fmt_expr(expr.lhs)}, {_fmt_expr(expr.rhs)})"
    if isinstance(expr, IntersectOp):
        return f"intersect({_fmt_expr(expr.lhs)}, {_fmt_expr(expr.rhs)})"
    if isinstance(expr, DiffOp):
        return f"diff({_fmt_expr(expr.lhs)}, {_fmt_expr(expr.rhs)})"
    if isinstance(expr, AddUnionOp):
        return f"add_union({_fmt_expr(expr.lhs)}, {_fmt_expr(expr.rhs)})"
    if isinstance(expr, TupleOf):
        return f"tuple({_fmt_expr(expr.src)})"
    if isinstance(expr, SequenceOf):
        return f"sequence({_fmt_expr(expr.src)})"
    if isinstance(expr, CircleOf):
        if expr.reflection:
            return f"circle({_fmt_expr(expr.src)}, reflection = true)"
        return f"circle({_fmt_expr(expr.src)})"
    if isinstance(expr, PartitionOf):
        return f"partition({_fmt_expr(expr.src)}, {expr.k})"
    if isinstance(expr, ComposeOf):
        return f"compose({_fmt_expr(expr.src)}, {expr.k})"
    if isinstance(expr, IndexOf):
        return f"{_fmt_expr(expr.src)}[{expr.index}]"
    if isinstance(expr, FusedChoose):
        name = "choose_replace_" if expr.replace else "choose_"
        name += expr.shape
        args = [_fmt_expr(expr.src)]
        if expr.k is not None:
            args.append(str(expr.k))
        if expr.reflection:
            args.append("reflection = true")
        return f"{name}({', '.join(args)})"
    raise TypeError(f"cannot format {expr!r}")


def _fmt_pattern(p: Pattern) -> str:
    if isinstance(p, PTogether):
        return f"together({p.arg})"
    if isinstance(p, PLess):
        return f"{p.lhs} < {p.rhs}"
    if isinstance(p, PPred):
        return f"({p.first}, {p.second})"
    return f"next_to({p.first}, {p.second})"


def _fmt_atom(atom: SizeAtom) -> str:
    if isinstance(atom, SACard):
        return f"|{atom.obj}|"
    if isinstance(atom, SACount):
        return f"{atom.obj}.count({_fmt_expr(atom.arg)})"
    if isinstance(atom, SAPatCount):
        return f"{atom.obj}.count({_fmt_pattern(atom.pattern)})"
    return f"{atom.obj}.dedup_count({_fmt_expr(atom.arg)})"


# precedence levels used for bracketing: for < or < and < not < atom
def _fmt_con(c: Constraint, level: int) -> str:
    def wrap(text: str, mine: int) -> str:
        return f"({text})" if mine < level else text

    if isinstance(c, CForParts):
        body = _fmt_con(c.template, 1)
        return wrap(f"{body} for {c.var} in {c.obj}", 0)
    if isinstance(c, COr):
        body = " or ".join(_fmt_con(i, 2) for i in c.items)
        return wrap(body, 1)
    if isinstance(c, CAnd):
        body = " and ".join(_fmt_con(i, 3) for i in c.items)
        return wrap(body, 2)
    if isinstance(c, CNot):
        if isinstance(c.item, CMember):
            inner = c.item
            return (f"{inner.entity} not in {_fmt_expr(inner.obj)}")
        return wrap(f"not {_fmt_con(c.item, 4)}", 3)
    if isinstance(c, CMember):
        return f"{c.entity} in {_fmt_expr(c.obj)}"
    if isinstance(c, CSubset):
        return f"{_fmt_expr(c.lhs)} subset {_fmt_expr(c.rhs)}"
    if isinstance(c, CDisjoint):
        return f"{_fmt_expr(c.lhs)} disjoint {_fmt_expr(c.rhs)}"
    if isinstance(c, CObjEq):
        return f"{_fmt_expr(c.lhs)} == {_fmt_expr(c.rhs)}"
    if isinstance(c, CIndexEq):
        return f"{c.obj}[{c.index}] == {c.entity}"
    if isinstance(c, CIndexIn):
        return f"{c.obj}[{c.index}] in {_fmt_expr(c.target)}"
    if isinstance(c, CPattern):
        return f"{_fmt_pattern(c.pattern)} in {c.obj}"
    if isinstance(c, CSize):
        parts = []
        for i, (coef, atom) in enumerate(c.terms):
            mag = _fmt_number(abs(coef))
            body = _fmt_atom(atom) if abs(coef) == 1 \
                else f"{mag} {_fmt_atom(atom)}"
            if i == 0:
                parts.append(f"-{body}" if coef < 0 else body)
            else:
                parts.append(f"- {body}" if coef < 0 else f"+ {body}")
        return f"{' '.join(parts)} {c.cmp} {_fmt_number(c.bound)}"
    raise TypeError(f"cannot format {c!r}")


def _map_program(program: Program, expr_fn) -> Program:
    """Apply expr_fn bottom-up to every expression in the program,
    including the ones embedded in constraints."""
    def deep(expr: Expr) -> Expr:
        return expr_fn(_map_subexprs(expr, deep))

    def walk_con(c: Constraint) -> Constraint:
        if isinstance(c, CAnd):
            return CAnd(tuple(walk_con(i) for i in c.items))
        if isinstance(c, COr):
            return COr(tuple(walk_con(i) for i in c.items))
        if isinstance(c, CNot):
            return CNot(walk_con(c.item))
        if isinstance(c, CForParts):
            return CForParts(walk_con(c.template), c.var, c.obj)
        if isinstance(c, CMember):
            return CMember(c.entity, deep(c.obj))
        if isinstance(c, CSubset):
            return CSubset(deep(c.lhs), deep(c.rhs))
        if isinstance(c, CDisjoint):
            return CDisjoint(deep(c.lhs), deep(c.rhs))
        if isinstance(c, CObjEq):
            return CObjEq(deep(c.lhs), deep(c.rhs))
        if isinstance(c, CIndexIn):
            return CIndexIn(c.obj, c.index, deep(c.target))
        if isinstance(c, CSize):
            terms = []
            for coef, atom in c.terms:
                if isinstance(atom, SACount):
                    atom = SACount(atom.obj, deep(atom.arg))
                elif isinstance(atom, SADedup):
                    atom = SADedup(atom.obj, deep(atom.arg))
                terms.append((coef, atom))
            return CSize(tuple(terms), c.cmp, c.bound)
        return c

    statements = []
    for stmt in program.statements:
        if isinstance(stmt, Decl):
            statements.append(Decl(stmt.name, deep(stmt.expr),
                                   line=stmt.line))
        else:
            statements.append(walk_con(stmt))
    return Program(tuple(statements))

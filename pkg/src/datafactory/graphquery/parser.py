"""Tokenizer and recursive-descent parser for the Cypher subset.

Grammar:
    query := "MATCH" path ("," path)* ("WHERE" expr)? "RETURN" item
             ("," item)* ("ORDER BY" item ("ASC"|"DESC")?)? ("LIMIT" int)?
    path  := node (edge node)*
    node  := "(" var? (":" label)? ("{" prop ":" literal ("," ...)* "}")? ")"
    edge  := "-[" inner "]->" | "<-[" inner "]-" | "-[" inner "]-"
    inner := var? (":" reltype)? ("*" int ".." int)?
    expr  := or-chain of AND/NOT/comparisons; operands are var.prop or literals

Keywords are case-insensitive, identifiers case-sensitive, strings are
single-quoted with backslash escapes. Errors cite the byte offset and
the tokens that would have been accepted. Write clauses and other
out-of-subset constructs raise UnsupportedFeature instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..errors import CypherSyntaxError, UnsupportedFeature
from .ast import (
    AndExpr,
    Comparison,
    CountItem,
    EdgePattern,
    Literal,
    NodePattern,
    NotExpr,
    OrderBy,
    OrExpr,
    PathPattern,
    PropItem,
    PropRef,
    QueryAst,
    ReturnItem,
    VarItem,
    WhereExpr,
)

MAX_HOPS = 8

UNSUPPORTED_KEYWORDS = {
    "create",
    "merge",
    "set",
    "delete",
    "detach",
    "remove",
    "with",
    "optional",
    "unwind",
    "call",
    "foreach",
    "union",
}

_SYMBOLS = ("<=", ">=", "<>", "..", "->", "<-", "(", ")", "[", "]", "{", "}", ":", ",", ".", "*", "=", "<", ">", "-")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | symbol | end
    text: str
    value: object
    offset: int  # byte offset into the source


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    data = text
    i = 0
    byte_offset = 0

    def advance(n: int) -> None:
        nonlocal i, byte_offset
        byte_offset += len(data[i : i + n].encode("utf-8"))
        i += n

    while i < len(data):
        ch = data[i]
        if ch.isspace():
            advance(1)
            continue
        start = byte_offset
        if ch == "'":
            j = i + 1
            out = []
            while j < len(data):
                c = data[j]
                if c == "\\" and j + 1 < len(data):
                    out.append(data[j + 1])
                    j += 2
                    continue
                if c == "'":
                    break
                out.append(c)
                j += 1
            else:
                raise CypherSyntaxError("unterminated string literal", start, ["'"])
            raw = data[i : j + 1]
            tokens.append(Token("string", raw, "".join(out), start))
            advance(len(raw))
            continue
        if ch.isdigit():
            j = i
            while j < len(data) and data[j].isdigit():
                j += 1
            if j < len(data) and data[j] == "." and j + 1 < len(data) and data[j + 1].isdigit():
                j += 1
                while j < len(data) and data[j].isdigit():
                    j += 1
                raw = data[i:j]
                tokens.append(Token("number", raw, float(raw), start))
            else:
                raw = data[i:j]
                tokens.append(Token("number", raw, int(raw), start))
            advance(len(raw))
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(data) and (data[j].isalnum() or data[j] == "_"):
                j += 1
            raw = data[i:j]
            tokens.append(Token("ident", raw, raw, start))
            advance(len(raw))
            continue
        for sym in _SYMBOLS:
            if data.startswith(sym, i):
                tokens.append(Token("symbol", sym, sym, start))
                advance(len(sym))
                break
        else:
            raise CypherSyntaxError(f"unexpected character {ch!r}", start, [])
    end_offset = byte_offset
    tokens.append(Token("end", "", None, end_offset))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # --- token helpers ---

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: list[str], message: Optional[str] = None) -> None:
        tok = self.peek()
        if tok.kind == "ident" and tok.text.lower() in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(f"{tok.text.upper()} is outside the supported subset")
        found = tok.text or "end of input"
        msg = message or f"unexpected {found!r}"
        raise CypherSyntaxError(msg, tok.offset, expected)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text.lower() == word

    def eat_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail([word.upper()])
        return self.next()

    def at_symbol(self, sym: str) -> bool:
        tok = self.peek()
        return tok.kind == "symbol" and tok.text == sym

    def eat_symbol(self, sym: str) -> Token:
        if not self.at_symbol(sym):
            self.fail([sym])
        return self.next()

    def eat_ident(self, expected: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail([expected])
        if tok.text.lower() in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(f"{tok.text.upper()} is outside the supported subset")
        return self.next()

    # --- grammar ---

    def parse(self) -> QueryAst:
        tok = self.peek()
        if tok.kind == "ident" and tok.text.lower() in UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(f"{tok.text.upper()} is outside the supported subset")
        self.eat_keyword("match")
        paths = [self.parse_path()]
        while self.at_symbol(","):
            self.next()
            paths.append(self.parse_path())

        where = None
        if self.at_keyword("where"):
            self.next()
            where = self.parse_or()

        if self.at_keyword("return"):
            self.next()
        else:
            self.fail(["WHERE", "RETURN"])
        returns = [self.parse_item()]
        while self.at_symbol(","):
            self.next()
            returns.append(self.parse_item())

        order_by = None
        if self.at_keyword("order"):
            self.next()
            self.eat_keyword("by")
            item_offset = self.peek().offset
            item = self.parse_item()
            descending = False
            if self.at_keyword("asc"):
                self.next()
            elif self.at_keyword("desc"):
                self.next()
                descending = True
            if item not in returns:
                raise CypherSyntaxError(
                    "ORDER BY item must appear in RETURN", item_offset, ["a RETURN item"]
                )
            order_by = OrderBy(item, descending)

        limit = None
        if self.at_keyword("limit"):
            self.next()
            tok = self.peek()
            if tok.kind != "number" or not isinstance(tok.value, int):
                self.fail(["integer"])
            if tok.value < 0:
                raise CypherSyntaxError("LIMIT must be non-negative", tok.offset, ["integer >= 0"])
            limit = tok.value
            self.next()

        end = self.peek()
        if end.kind != "end":
            if end.kind == "ident" and end.text.lower() in UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeature(f"{end.text.upper()} is outside the supported subset")
            self.fail(["end of query"])

        ast = QueryAst(tuple(paths), where, tuple(returns), order_by, limit)
        self._check_bound_vars(ast)
        return ast

    def parse_path(self) -> PathPattern:
        nodes = [self.parse_node()]
        edges = []
        while self.at_symbol("-") or self.at_symbol("<-"):
            edges.append(self.parse_edge())
            nodes.append(self.parse_node())
        return PathPattern(tuple(nodes), tuple(edges))

    def parse_node(self) -> NodePattern:
        self.eat_symbol("(")
        var = None
        label = None
        props: list[tuple[str, Literal]] = []
        if self.peek().kind == "ident":
            var = self.eat_ident("variable").text
        if self.at_symbol(":"):
            self.next()
            label = self.eat_ident("label").text
        if self.at_symbol("{"):
            self.next()
            while True:
                prop = self.eat_ident("property name").text
                self.eat_symbol(":")
                props.append((prop, self.parse_literal()))
                if self.at_symbol(","):
                    self.next()
                    continue
                break
            self.eat_symbol("}")
        self.eat_symbol(")")
        return NodePattern(var, label, tuple(props))

    def parse_edge(self) -> EdgePattern:
        if self.at_symbol("<-"):
            self.next()
            self.eat_symbol("[")
            var, rel_type, hops = self.parse_edge_body()
            self.eat_symbol("]")
            self.eat_symbol("-")
            return EdgePattern(var, rel_type, "in", hops)
        self.eat_symbol("-")
        self.eat_symbol("[")
        var, rel_type, hops = self.parse_edge_body()
        self.eat_symbol("]")
        if self.at_symbol("->"):
            self.next()
            return EdgePattern(var, rel_type, "out", hops)
        self.eat_symbol("-")
        return EdgePattern(var, rel_type, "any", hops)

    def parse_edge_body(self):
        var = None
        rel_type = None
        hops = None
        if self.peek().kind == "ident":
            var = self.eat_ident("variable").text
        if self.at_symbol(":"):
            self.next()
            rel_type = self.eat_ident("relationship type").text
        if self.at_symbol("*"):
            star = self.next()
            lo_tok = self.peek()
            if lo_tok.kind != "number" or not isinstance(lo_tok.value, int):
                self.fail(["integer"])
            lo = self.next().value
            self.eat_symbol("..")
            hi_tok = self.peek()
            if hi_tok.kind != "number" or not isinstance(hi_tok.value, int):
                self.fail(["integer"])
            hi = self.next().value
            if not (1 <= lo <= hi <= MAX_HOPS):
                raise CypherSyntaxError(
                    f"hop range must satisfy 1 <= min <= max <= {MAX_HOPS}",
                    star.offset,
                    [f"*m..n with 1 <= m <= n <= {MAX_HOPS}"],
                )
            hops = (lo, hi)
        return var, rel_type, hops

    def parse_literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "string":
            self.next()
            return tok.value  # type: ignore[return-value]
        if tok.kind == "number":
            self.next()
            return tok.value  # type: ignore[return-value]
        if self.at_symbol("-"):
            self.next()
            num = self.peek()
            if num.kind != "number":
                self.fail(["number"])
            self.next()
            return -num.value  # type: ignore[operator]
        if tok.kind == "ident":
            word = tok.text.lower()
            if word == "true":
                self.next()
                return True
            if word == "false":
                self.next()
                return False
            if word == "null":
                self.next()
                return None
        self.fail(["string", "number", "true", "false", "null"])
        raise AssertionError("unreachable")

    def parse_or(self) -> WhereExpr:
        children = [self.parse_and()]
        while self.at_keyword("or"):
            self.next()
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else OrExpr(tuple(children))

    def parse_and(self) -> WhereExpr:
        children = [self.parse_not()]
        while self.at_keyword("and"):
            self.next()
            children.append(self.parse_not())
        return children[0] if len(children) == 1 else AndExpr(tuple(children))

    def parse_not(self) -> WhereExpr:
        if self.at_keyword("not"):
            self.next()
            return NotExpr(self.parse_not())
        if self.at_symbol("("):
            self.next()
            expr = self.parse_or()
            self.eat_symbol(")")
            return expr
        return self.parse_comparison()

    def parse_comparison(self) -> Comparison:
        left = self.parse_operand()
        tok = self.peek()
        if tok.kind != "symbol" or tok.text not in ("=", "<>", "<", ">", "<=", ">="):
            self.fail(["=", "<>", "<", ">", "<=", ">="])
        op = self.next().text
        right = self.parse_operand()
        return Comparison(left, op, right)

    def parse_operand(self) -> Union[PropRef, Literal]:
        tok = self.peek()
        if tok.kind == "ident" and tok.text.lower() not in ("true", "false", "null"):
            var = self.eat_ident("variable").text
            self.eat_symbol(".")
            prop = self.parse_prop_name()
            return PropRef(var, prop)
        return self.parse_literal()

    def parse_prop_name(self) -> str:
        # Property names may be dotted (core.pid); consume ident(.ident)*.
        parts = [self.eat_ident("property name").text]
        while self.at_symbol(".") and self.tokens[self.pos + 1].kind == "ident":
            self.next()
            parts.append(self.eat_ident("property name").text)
        return ".".join(parts)

    def parse_item(self) -> ReturnItem:
        tok = self.peek()
        if tok.kind == "ident" and tok.text.lower() == "count":
            self.next()
            self.eat_symbol("(")
            if self.at_symbol("*"):
                self.next()
                item: ReturnItem = CountItem(None)
            else:
                item = CountItem(self.eat_ident("variable").text)
            self.eat_symbol(")")
            return item
        var = self.eat_ident("variable").text
        if self.at_symbol("."):
            self.next()
            return PropItem(var, self.parse_prop_name())
        return VarItem(var)

    def _check_bound_vars(self, ast: QueryAst) -> None:
        bound = set(ast.node_vars()) | set(ast.edge_vars())

        def check(var: str) -> None:
            if var not in bound:
                raise CypherSyntaxError(
                    f"variable {var!r} is not bound in MATCH", 0, ["bound variable"]
                )

        def walk(expr: WhereExpr) -> None:
            if isinstance(expr, Comparison):
                for side in (expr.left, expr.right):
                    if isinstance(side, PropRef):
                        check(side.var)
            elif isinstance(expr, NotExpr):
                walk(expr.child)
            else:
                for child in expr.children:
                    walk(child)

        if ast.where is not None:
            walk(ast.where)
        for item in ast.returns:
            if isinstance(item, (VarItem, PropItem)):
                check(item.var)
            elif item.var is not None:
                check(item.var)


def parse_cypher(text: str) -> QueryAst:
    """Parse a query in the supported subset into an AST."""
    return _Parser(text).parse()

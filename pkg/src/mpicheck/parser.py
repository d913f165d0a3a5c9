"""Text format for programs: tokenizer, recursive-descent parser, renderer.

Grammar (``.mdl`` files, UTF-8)::

    program  := node+
    node     := "node" IDENT "{" stmt* "}"
    stmt     := "send" IDENT "to" IDENT
              | "recv" IDENT "from" IDENT
              | "for" ("inf" | INTEGER) "{" stmt* "}"

Statements are separated by newlines and/or commas; "#" starts a line
comment.  Node names map to ranks in declaration order.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import INFINITE, For, Program, Recv, Send, Symbol


class MdlSyntaxError(Exception):
    def __init__(self, msg, line, col):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class MdlLexError(MdlSyntaxError):
    pass


@dataclass(frozen=True)
class _Tok:
    kind: str  # IDENT INT LBRACE RBRACE SEP EOF
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks = []
    line = 1
    col = 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            toks.append(_Tok("SEP", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == ",":
            toks.append(_Tok("SEP", ",", line, col))
            i += 1
            col += 1
            continue
        if ch == "{":
            toks.append(_Tok("LBRACE", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "}":
            toks.append(_Tok("RBRACE", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise MdlLexError(f"illegal character {ch!r}", line, col)
    toks.append(_Tok("EOF", "", line, col))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def skip_seps(self):
        while self.peek().kind == "SEP":
            self.next()

    def expect(self, kind, what=None) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise MdlSyntaxError(
                f"expected {what or kind}, got {t.text!r}", t.line, t.col)
        return t

    def expect_kw(self, word):
        t = self.next()
        if t.kind != "IDENT" or t.text != word:
            raise MdlSyntaxError(
                f"expected {word!r}, got {t.text!r}", t.line, t.col)
        return t

    def parse_program(self):
        nodes = []  # (name, raw stmt list)
        self.skip_seps()
        if self.peek().kind == "EOF":
            t = self.peek()
            raise MdlSyntaxError("at least one node declaration required",
                                 t.line, t.col)
        while self.peek().kind != "EOF":
            self.expect_kw("node")
            name = self.expect("IDENT", "node name").text
            self.skip_seps()
            self.expect("LBRACE", "'{'")
            body = self.parse_stmts()
            nodes.append((name, body))
            self.skip_seps()
        return nodes

    def parse_stmts(self):
        stmts = []
        while True:
            self.skip_seps()
            t = self.peek()
            if t.kind == "RBRACE":
                self.next()
                return stmts
            if t.kind == "EOF":
                raise MdlSyntaxError("unexpected end of input, missing '}'",
                                     t.line, t.col)
            stmts.append(self.parse_stmt())

    def parse_stmt(self):
        t = self.next()
        if t.kind != "IDENT":
            raise MdlSyntaxError(f"expected a statement, got {t.text!r}",
                                 t.line, t.col)
        if t.text == "send":
            msg = self.expect("IDENT", "message name").text
            self.expect_kw("to")
            peer = self.expect("IDENT", "node name").text
            return ("send", msg, peer)
        if t.text == "recv":
            msg = self.expect("IDENT", "message name").text
            self.expect_kw("from")
            peer = self.expect("IDENT", "node name").text
            return ("recv", msg, peer)
        if t.text == "for":
            c = self.next()
            if c.kind == "IDENT" and c.text == "inf":
                count = INFINITE
            elif c.kind == "INT":
                count = int(c.text)
            else:
                raise MdlSyntaxError(
                    f"expected a loop count or 'inf', got {c.text!r}",
                    c.line, c.col)
            self.skip_seps()
            self.expect("LBRACE", "'{'")
            return ("for", count, self.parse_stmts())
        raise MdlSyntaxError(f"unknown statement keyword {t.text!r}",
                             t.line, t.col)


def parse(text: str) -> Program:
    """Parse source text into a Program (unvalidated)."""
    raw = _Parser(_tokenize(text)).parse_program()
    ranks = {}
    for name, _ in raw:
        if name not in ranks:
            ranks[name] = len(ranks)

    def rank_of(name):
        # Undeclared targets get fresh ranks so validation can report
        # the dangling endpoint with context.
        if name not in ranks:
            ranks[name] = len(ranks)
        return ranks[name]

    def build(stmts, here):
        out = []
        for st in stmts:
            if st[0] == "send":
                _, msg, peer = st
                out.append(Send(Symbol(msg, here, rank_of(peer))))
            elif st[0] == "recv":
                _, msg, peer = st
                out.append(Recv(Symbol(msg, rank_of(peer), here)))
            else:
                _, count, body = st
                out.append(For(count, tuple(build(body, here))))
        return out

    bodies = []
    for name, stmts in raw:
        here = ranks[name]
        bodies.append((here, tuple(build(stmts, here))))
    names = tuple((r, n) for n, r in ranks.items())
    return Program(tuple(bodies), names)


def render(program: Program) -> str:
    """Canonical text: two-space indent, one statement per line."""
    lines = []

    def emit(stmt, nid, depth):
        pad = "  " * depth
        if isinstance(stmt, Send):
            lines.append(f"{pad}send {stmt.sym.name} "
                         f"to {program.name_of(stmt.sym.dst)}")
        elif isinstance(stmt, Recv):
            lines.append(f"{pad}recv {stmt.sym.name} "
                         f"from {program.name_of(stmt.sym.src)}")
        else:
            count = "inf" if stmt.count is INFINITE else str(stmt.count)
            lines.append(f"{pad}for {count} {{")
            for st in stmt.body:
                emit(st, nid, depth + 1)
            lines.append(f"{pad}}}")

    for nid, body in program.nodes:
        lines.append(f"node {program.name_of(nid)} {{")
        for st in body:
            emit(st, nid, 1)
        lines.append("}")
    return "\n".join(lines) + "\n"

"""First-order terms for the toy calculus: lexing, parsing, rendering, matching.

Grammar (loosest binding first)::

    meta  := imp ('⟹' meta)?
    imp   := disj ('⟶' imp)?
    disj  := conj ('∨' disj)?
    conj  := neg ('∧' conj)?
    neg   := '¬' neg | eq
    eq    := sum ('=' sum)?
    sum   := app ('+' app)*
    app   := atom atom*
    atom  := ident | numeral | '∀' ident '.' meta | '(' meta (',' meta)* ')'

``f(a, b)`` and ``f a b`` parse to the same term. Single-letter identifiers
(optionally followed by digits or primes) are variables; everything else is a
constant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

ASCII_ALIASES = {
    "==>": "⟹",
    "-->": "⟶",
    "&": "∧",
    "/\\": "∧",
    "|": "∨",
    "\\/": "∨",
    "~": "¬",
    "ALL": "∀",
}

INFIX = {"⟹": 1, "⟶": 2, "∨": 3, "∧": 4, "=": 6, "+": 7}
RIGHT_ASSOC = {"⟹", "⟶", "∨", "∧"}
NEG_PREC = 5
APP_PREC = 8

BUILTIN_CONSTANTS = frozenset({"⟹", "⟶", "∨", "∧", "¬", "=", "+", "∀", "True", "False"})

_TOKEN_RE = re.compile(
    r"\s*(?:(==>|-->|/\\|\\/|[⟹⟶∧∨¬∀=+&|~(),.])|([A-Za-z_][A-Za-z0-9_']*)|(\d+)|(\S))"
)
_VAR_RE = re.compile(r"^[A-Za-z][0-9']*$")


class TermSyntaxError(ValueError):
    pass


class MatchFailure(Exception):
    pass


def is_var_name(name: str) -> bool:
    return bool(_VAR_RE.match(name))


@dataclass(frozen=True)
class Term:
    head: str
    args: tuple["Term", ...] = ()

    @property
    def is_binder(self) -> bool:
        return self.head == "∀" and len(self.args) == 2

    def __str__(self) -> str:
        return render(self)


TRUE = Term("True")
FALSE = Term("False")


def lex(text: str) -> list[str]:
    """Split text into tokens. Raises TermSyntaxError on stray characters."""
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # only trailing whitespace can fail here
            break
        sym, ident, num, junk = m.groups()
        if junk is not None:
            raise TermSyntaxError(f"unexpected character {junk!r}")
        tok = sym or ident or num
        tokens.append(ASCII_ALIASES.get(tok, tok))
        pos = m.end()
    return tokens


def lexical_tokens(text: str) -> list[str]:
    """Tolerant tokenizer: never raises, drops punctuation and stray characters."""
    out = []
    for m in _TOKEN_RE.finditer(text):
        sym, ident, num, _ = m.groups()
        tok = sym or ident or num
        if tok is None or tok in "(),.":
            continue
        out.append(ASCII_ALIASES.get(tok, tok))
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise TermSyntaxError("unexpected end of input")
        if expected is not None and tok != expected:
            raise TermSyntaxError(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def parse(self) -> Term:
        t = self.meta()
        if self.peek() is not None:
            raise TermSyntaxError(f"trailing input at {self.peek()!r}")
        return t

    def _right(self, op: str, sub, this) -> Term:
        left = sub()
        if self.peek() == op:
            self.take()
            return Term(op, (left, this()))
        return left

    def meta(self) -> Term:
        return self._right("⟹", self.imp, self.meta)

    def imp(self) -> Term:
        return self._right("⟶", self.disj, self.imp)

    def disj(self) -> Term:
        return self._right("∨", self.conj, self.disj)

    def conj(self) -> Term:
        return self._right("∧", self.neg, self.conj)

    def neg(self) -> Term:
        if self.peek() == "¬":
            self.take()
            return Term("¬", (self.neg(),))
        return self.eq()

    def eq(self) -> Term:
        left = self.sum()
        if self.peek() == "=":
            self.take()
            return Term("=", (left, self.sum()))
        return left

    def sum(self) -> Term:
        left = self.app()
        while self.peek() == "+":
            self.take()
            left = Term("+", (left, self.app()))
        return left

    def _starts_atom(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        return tok in ("(", "∀") or tok[0].isalnum() or tok[0] == "_"

    def app(self) -> Term:
        head = self.atom()
        args: list[Term] = []
        while self._starts_atom():
            if self.peek() == "∀":
                raise TermSyntaxError("quantifier must be parenthesised in argument position")
            args.extend(self.atom(allow_tuple=True))
        if not args:
            if isinstance(head, list):
                raise TermSyntaxError("tuple outside argument position")
            return head
        if isinstance(head, list) or head.args or head.is_binder:
            raise TermSyntaxError("only identifiers can be applied")
        return Term(head.head, tuple(args))

    def atom(self, allow_tuple: bool = False):
        tok = self.take()
        if tok == "(":
            items = [self.meta()]
            while self.peek() == ",":
                self.take()
                items.append(self.meta())
            self.take(")")
            if allow_tuple:
                return items
            return items if len(items) > 1 else items[0]
        if tok == "∀":
            var = self.take()
            if not is_var_name(var):
                raise TermSyntaxError(f"bad bound variable {var!r}")
            self.take(".")
            return Term("∀", (Term(var), self.meta()))
        if tok[0].isalnum() or tok[0] == "_":
            return [Term(tok)] if allow_tuple else Term(tok)
        raise TermSyntaxError(f"unexpected token {tok!r}")


def parse_term(text: str) -> Term:
    tokens = lex(text)
    if not tokens:
        raise TermSyntaxError("empty term")
    return _Parser(tokens).parse()


def _prec(t: Term) -> int:
    if t.is_binder:
        return 0
    if t.head in INFIX and len(t.args) == 2:
        return INFIX[t.head]
    if t.head == "¬" and len(t.args) == 1:
        return NEG_PREC
    if t.args:
        return APP_PREC
    return APP_PREC + 1


def render(t: Term) -> str:
    """Isabelle-style rendering with minimal parentheses; parse(render(t)) == t."""
    def wrap(sub: Term, min_prec: int) -> str:
        s = render(sub)
        return f"({s})" if _prec(sub) < min_prec else s

    if t.is_binder:
        return f"∀{t.args[0].head}. {render(t.args[1])}"
    if t.head in INFIX and len(t.args) == 2:
        p = INFIX[t.head]
        left, right = t.args
        if t.head in RIGHT_ASSOC:
            return f"{wrap(left, p + 1)} {t.head} {wrap(right, p)}"
        if t.head == "+":
            return f"{wrap(left, p)} + {wrap(right, p + 1)}"
        return f"{wrap(left, p + 1)} {t.head} {wrap(right, p + 1)}"
    if t.head == "¬" and len(t.args) == 1:
        return f"¬ {wrap(t.args[0], NEG_PREC)}"
    if t.args:
        return " ".join([t.head] + [wrap(a, APP_PREC + 1) for a in t.args])
    return t.head


def subterms(t: Term) -> Iterator[Term]:
    yield t
    for a in t.args:
        yield from subterms(a)


def free_vars(t: Term, bound: frozenset = frozenset()) -> set[str]:
    if t.is_binder:
        return free_vars(t.args[1], bound | {t.args[0].head})
    out = set()
    if is_var_name(t.head) and t.head not in bound:
        out.add(t.head)
    for a in t.args:
        out |= free_vars(a, bound)
    return out


def constants(t: Term, bound: frozenset = frozenset()) -> set[str]:
    if t.is_binder:
        return {"∀"} | constants(t.args[1], bound | {t.args[0].head})
    out = set()
    if not is_var_name(t.head) and t.head not in bound:
        out.add(t.head)
    for a in t.args:
        out |= constants(a, bound)
    return out


def canonical(t: Term, env: tuple[str, ...] = ()) -> str:
    """Fully parenthesised s-expression with de Bruijn indices for bound names."""
    if t.is_binder:
        return f"(∀ {canonical(t.args[1], (t.args[0].head,) + env)})"
    head = f"#{env.index(t.head)}" if t.head in env else t.head
    if not t.args:
        return head
    return "(" + " ".join([head] + [canonical(a, env) for a in t.args]) + ")"


def alpha_equal(a: Term, b: Term) -> bool:
    return canonical(a) == canonical(b)


def substitute(t: Term, s: dict[str, Term], bound: frozenset = frozenset()) -> Term:
    if t.is_binder:
        var = t.args[0].head
        return Term("∀", (t.args[0], substitute(t.args[1], s, bound | {var})))
    args = tuple(substitute(a, s, bound) for a in t.args)
    if t.head in s and t.head not in bound:
        repl = s[t.head]
        if not args:
            return repl
        if repl.args:
            raise MatchFailure(f"cannot apply compound {render(repl)}")
        return Term(repl.head, args)
    return Term(t.head, args)


def _rename_bound(t: Term, old: str, new: str) -> Term:
    if t.is_binder:
        if t.args[0].head == old:
            return t
        return Term("∀", (t.args[0], _rename_bound(t.args[1], old, new)))
    head = new if t.head == old else t.head
    return Term(head, tuple(_rename_bound(a, old, new) for a in t.args))


def match(pattern: Term, term: Term, subst: dict[str, Term] | None = None,
          _depth: int = 0) -> dict[str, Term]:
    """One-way matching: free variables of ``pattern`` are schematic, ``term`` is rigid.

    Raises MatchFailure. Head variables bind only to nullary heads.
    """
    s = dict(subst or {})
    _match(pattern, term, s, _depth)
    return s


def _bind(s: dict[str, Term], var: str, value: Term) -> None:
    if var in s:
        if not alpha_equal(s[var], value):
            raise MatchFailure(var)
    else:
        s[var] = value


def _match(p: Term, t: Term, s: dict[str, Term], depth: int) -> None:
    if p.is_binder:
        if not t.is_binder:
            raise MatchFailure("binder")
        fresh = f"%b{depth}"
        _match(_rename_bound(p.args[1], p.args[0].head, fresh),
               _rename_bound(t.args[1], t.args[0].head, fresh), s, depth + 1)
        return
    if is_var_name(p.head):
        if not p.args:
            _bind(s, p.head, t)
            return
        if len(p.args) != len(t.args) or t.is_binder:
            raise MatchFailure("arity")
        _bind(s, p.head, Term(t.head))
    elif p.head != t.head or len(p.args) != len(t.args):
        raise MatchFailure(f"{p.head} vs {t.head}")
    for pa, ta in zip(p.args, t.args):
        _match(pa, ta, s, depth)


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return Term(t.head, tuple(args))


def positions(t: Term, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Term]]:
    """Leftmost-outermost traversal of (path, subterm); binder variables are skipped."""
    yield path, t
    for i, a in enumerate(t.args):
        if t.is_binder and i == 0:
            continue
        yield from positions(a, path + (i,))


def shape_pairs(t: Term, bound: frozenset = frozenset()) -> list[tuple[str, str]]:
    """Parent/child head pairs; variables collapse to ``_v`` and bound names to ``_b``."""
    def label(x: Term, b: frozenset) -> str:
        if x.head in b:
            return "_b"
        if x.is_binder:
            return "∀"
        if is_var_name(x.head):
            return "_v"
        return x.head

    out = []
    if t.is_binder:
        inner = bound | {t.args[0].head}
        out.append(("∀", label(t.args[1], inner)))
        out.extend(shape_pairs(t.args[1], inner))
        return out
    for a in t.args:
        out.append((label(t, bound), label(a, bound)))
        out.extend(shape_pairs(a, bound))
    return out


def depth(t: Term) -> int:
    if t.is_binder:
        return 1 + depth(t.args[1])
    if not t.args:
        return 0
    return 1 + max(depth(a) for a in t.args)


def split_premises(t: Term) -> tuple[list[Term], Term]:
    """Split ``P1 ⟹ … ⟹ C`` into ([P1, …], C)."""
    prems = []
    while t.head == "⟹" and len(t.args) == 2:
        prems.append(t.args[0])
        t = t.args[1]
    return prems, t


def fresh_name(base: str, taken: set[str]) -> str:
    name = base + "'"
    while name in taken:
        name += "'"
    return name

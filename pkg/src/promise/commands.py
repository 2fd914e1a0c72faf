"""Apply-style proof command syntax shared by the prover and the candidate pipeline."""
from __future__ import annotations

import re
from dataclasses import dataclass

# methods whose bare arguments are fact names
FACT_METHODS = frozenset({"rule", "erule", "drule", "frule", "intro", "elim", "wp", "unfold", "subst"})
# methods whose bare arguments are variables
VAR_METHODS = frozenset({"cases", "induct", "induction"})

METHOD_FAMILY = {
    "simp": "simp", "auto": "simp", "simp_all": "simp", "clarsimp": "simp", "force": "simp",
    "fastforce": "simp", "blast": "rule",
    "rule": "rule", "erule": "rule", "drule": "rule", "frule": "rule", "intro": "rule",
    "elim": "rule", "assumption": "rule",
    "wp": "wp", "wpsimp": "wp", "wpc": "wp", "vcg": "wp",
    "cases": "struct", "induct": "struct", "induction": "struct", "unfold": "struct",
    "subst": "struct", "done": "struct",
}
FAMILIES = ("rule", "simp", "struct", "wp")

_WORD_RE = re.compile(r"[^\s()]+")


class CommandSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Command:
    """A parsed ``apply`` or ``done`` command.

    ``args`` are the bare words after the method name, ``sections`` the
    ``key: words`` groups (``simp add: a b`` gives ``{"add": ("a", "b")}``),
    ``repeat`` the number of trailing ``+`` combinators.
    """
    kind: str
    method: str = ""
    args: tuple[str, ...] = ()
    sections: tuple[tuple[str, tuple[str, ...]], ...] = ()
    repeat: int = 0

    def section(self, key: str) -> tuple[str, ...]:
        for k, v in self.sections:
            if k == key:
                return v
        return ()

    @property
    def family(self) -> str:
        if self.kind == "done":
            return "struct"
        return METHOD_FAMILY.get(self.method, "struct")

    def fact_refs(self) -> list[str]:
        refs = []
        if self.method in FACT_METHODS:
            refs.extend(self.args)
        for _, words in self.sections:
            refs.extend(words)
        return refs


def _strip_parens(body: str) -> tuple[str, int]:
    """Remove the outermost ``( … )`` wrapping (with ``+`` suffixes) from a method body."""
    repeat = 0
    body = body.strip()
    while True:
        if body.endswith("+"):
            inner = body[:-1].rstrip()
            if inner.startswith("(") and inner.endswith(")") and _balanced_wrap(inner):
                body = inner[1:-1].strip()
                repeat += 1
                continue
            raise CommandSyntaxError("'+' must follow a parenthesised method")
        if body.startswith("(") and body.endswith(")") and _balanced_wrap(body):
            body = body[1:-1].strip()
            continue
        return body, repeat


def _balanced_wrap(s: str) -> bool:
    """True if the opening paren at s[0] closes exactly at s[-1]."""
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0 and i != len(s) - 1:
                return False
    return depth == 0


def parse_command(text: str) -> Command:
    text = " ".join(text.split())
    if text == "done":
        return Command("done")
    if not text.startswith("apply"):
        raise CommandSyntaxError(f"not an apply command: {text!r}")
    body = text[len("apply"):]
    if body and not body[0] in " (":
        raise CommandSyntaxError(f"not an apply command: {text!r}")
    if body.count("(") != body.count(")"):
        raise CommandSyntaxError("unbalanced parentheses")
    body, repeat = _strip_parens(body)
    if not body:
        raise CommandSyntaxError("missing method")
    if "(" in body or ")" in body:
        raise CommandSyntaxError(f"unsupported nested method syntax: {body!r}")
    words = _WORD_RE.findall(body)
    method = words[0]
    if not re.match(r"^[A-Za-z_][A-Za-z0-9_']*$", method):
        raise CommandSyntaxError(f"bad method name {method!r}")
    args: list[str] = []
    sections: list[tuple[str, list[str]]] = []
    for w in words[1:]:
        if w.endswith(":") and len(w) > 1:
            sections.append((w[:-1], []))
        elif sections:
            sections[-1][1].append(w)
        else:
            args.append(w)
    return Command("apply", method, tuple(args),
                   tuple((k, tuple(v)) for k, v in sections), repeat)


def render_command(cmd: Command) -> str:
    if cmd.kind == "done":
        return "done"
    parts = [cmd.method, *cmd.args]
    for key, words in cmd.sections:
        parts.append(key + ":")
        parts.extend(words)
    inner = " ".join(parts)
    if cmd.repeat:
        return "apply " + _nest_repeat(inner, cmd.repeat)
    if len(parts) == 1:
        return f"apply {inner}"
    return f"apply ({inner})"


def _nest_repeat(inner: str, n: int) -> str:
    body = f"({inner})+"
    for _ in range(n - 1):
        body = f"({body})+"
    return body

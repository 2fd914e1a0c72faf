"""Generation backends behind one interface: scripted tables, a template heuristic, and HTTP chat."""
from __future__ import annotations

import abc
import itertools
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import httpx

DEFAULT_QUERY_CAP = 360
DEFAULT_MAX_TOKENS = 2048
API_KEY_ENV = "PROMISE_LLM_API_KEY"


class BackendUnavailable(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    n: int = 1
    temperature: float = 0.9
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass
class GenerationResult:
    texts: list[str]
    usage: dict = field(default_factory=dict)


class Backend(abc.ABC):
    """Counts one query per ``generate`` call and enforces the per-run cap."""

    name = "abstract"

    def __init__(self, query_cap: int | None = DEFAULT_QUERY_CAP):
        self.query_cap = query_cap
        self.queries = 0
        self.call_log: list[dict] = []
        self._lock = threading.Lock()

    def _admit(self) -> int:
        with self._lock:
            if self.query_cap is not None and self.queries >= self.query_cap:
                raise BudgetExceeded(f"query cap {self.query_cap} reached")
            self.queries += 1
            return self.queries

    def generate(self, req: GenerationRequest) -> GenerationResult:
        call = self._admit()
        texts = self._generate(req)[: req.n]
        with self._lock:
            self.call_log.append({"call": call, "n": req.n, "texts": list(texts)})
        return GenerationResult(texts, {"queries": call})

    @abc.abstractmethod
    def _generate(self, req: GenerationRequest) -> list[str]:
        ...


_GOAL_LINE_RE = re.compile(r"^- Goal: (.*)$", re.M)


def prompt_goal(prompt: str) -> str:
    m = _GOAL_LINE_RE.search(prompt)
    return m.group(1) if m else prompt


class ScriptedBackend(Backend):
    """Regex table over the prompt's goal line; the longest matching pattern wins.

    Each pattern replays its responses in order and then repeats the last one.
    """

    name = "scripted"

    def __init__(self, table: Mapping[str, Sequence[str]] | Sequence[tuple[str, Sequence[str]]] = (),
                 default: str = "", query_cap: int | None = DEFAULT_QUERY_CAP):
        super().__init__(query_cap)
        items = table.items() if isinstance(table, Mapping) else table
        self.table = [(p, tuple(r)) for p, r in items]
        for p, r in self.table:
            re.compile(p)
            if not r:
                raise ValueError(f"pattern {p!r} has no responses")
        self.default = default
        self._counts: dict[int, int] = {}

    @classmethod
    def from_dict(cls, data: dict, query_cap: int | None = DEFAULT_QUERY_CAP) -> "ScriptedBackend":
        table = [(e["pattern"], e["responses"]) for e in data.get("patterns", [])]
        return cls(table, data.get("default", ""), query_cap)

    @classmethod
    def from_json(cls, path: str | Path, query_cap: int | None = DEFAULT_QUERY_CAP) -> "ScriptedBackend":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), query_cap)

    def to_dict(self) -> dict:
        return {"patterns": [{"pattern": p, "responses": list(r)} for p, r in self.table],
                "default": self.default}

    def _generate(self, req: GenerationRequest) -> list[str]:
        goal = prompt_goal(req.prompt)
        hits = [i for i, (p, _) in enumerate(self.table) if re.search(p, goal)]
        if not hits:
            return [self.default]
        best = min(hits, key=lambda i: (-len(self.table[i][0]), i))
        with self._lock:
            k = self._counts.get(best, 0)
            self._counts[best] = k + 1
        responses = self.table[best][1]
        return [responses[min(k, len(responses) - 1)]]


_TEMPLATE_RE = re.compile(r"^- T\d+: (.*)$", re.M)
_ROW_RE = {
    "<Def/Simp names>": re.compile(r"^- Defs/Simp: (.*)$", re.M),
    "<Rule lemma>": re.compile(r"^- Rules: (.*)$", re.M),
    "<WP/refinement lemma>": re.compile(r"^- WP/Ref\.: (.*)$", re.M),
}
_COUNT_RE = re.compile(r"exactly (\d+)")


class HeuristicBackend(Backend):
    """Model-free generator: fills template placeholders with inventory names read off the prompt."""

    name = "heuristic"

    def _generate(self, req: GenerationRequest) -> list[str]:
        prompt = req.prompt
        buckets = {}
        for ph, rx in _ROW_RE.items():
            m = rx.search(prompt)
            row = m.group(1).strip() if m else "none"
            buckets[ph] = [] if row == "none" else [x.strip() for x in row.split(",")]
        m = _COUNT_RE.search(prompt)
        want = min(req.n, int(m.group(1))) if m else req.n
        streams = []
        for tm in _TEMPLATE_RE.finditer(prompt):
            step = tm.group(1).split(" -> ")[0].strip()
            streams.append(self._instances(step, buckets))
        out: list[str] = []
        for cmd in itertools.chain.from_iterable(itertools.zip_longest(*streams)):
            if cmd is not None and cmd not in out:
                out.append(cmd)
            if len(out) >= want:
                break
        return ["\n".join(f"{i}. {c}" for i, c in enumerate(out, 1))]

    @staticmethod
    def _instances(step: str, buckets: dict[str, list[str]]) -> list[str]:
        holes = [ph for ph in _ROW_RE if ph in step]
        if not holes:
            return [step]
        ph = holes[0]
        return [s for name in buckets[ph] for s in HeuristicBackend._instances(step.replace(ph, name, 1), buckets)]


class HttpBackend(Backend):
    """Chat-completions client with bounded retries and a sequential fallback for ``n > 1``."""

    name = "http"
    RETRIES = 3

    def __init__(self, base_url: str, model: str, api_key: str | None = None,
                 query_cap: int | None = DEFAULT_QUERY_CAP, timeout: float = 120.0,
                 backoff: float = 0.5, max_in_flight: int = 4,
                 transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep):
        super().__init__(query_cap)
        key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self.client = httpx.Client(base_url=base_url, headers=headers, timeout=timeout, transport=transport)
        self.model = model
        self.backoff = backoff
        self.sleep = sleep
        self._slots = threading.Semaphore(max_in_flight)
        self.n_supported = True

    def _post(self, payload: dict) -> httpx.Response:
        last: Exception | None = None
        for attempt in range(self.RETRIES + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    resp = self.client.post("/chat/completions", json=payload)
            except httpx.TransportError as exc:
                last = exc
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last = BackendUnavailable(f"HTTP {resp.status_code}")
                continue
            return resp
        raise BackendUnavailable(f"giving up after {self.RETRIES} retries: {last}")

    def _payload(self, req: GenerationRequest, n: int) -> dict:
        payload = {"model": self.model, "messages": [{"role": "user", "content": req.prompt}],
                   "n": n, "temperature": req.temperature, "max_tokens": req.max_tokens}
        if req.seed is not None:
            payload["seed"] = req.seed
        return payload

    @staticmethod
    def _texts(resp: httpx.Response) -> list[str]:
        try:
            return [c["message"]["content"] or "" for c in resp.json()["choices"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"malformed response: {exc}") from exc

    def _generate(self, req: GenerationRequest) -> list[str]:
        if req.n > 1 and self.n_supported:
            resp = self._post(self._payload(req, req.n))
            if resp.status_code < 400:
                return self._texts(resp)
            if resp.status_code not in (400, 422):
                raise BackendUnavailable(f"HTTP {resp.status_code}")
            self.n_supported = False
        texts: list[str] = []
        for _ in range(req.n):
            resp = self._post(self._payload(req, 1))
            if resp.status_code >= 400:
                raise BackendUnavailable(f"HTTP {resp.status_code}")
            texts.extend(self._texts(resp))
        return texts

    def close(self) -> None:
        self.client.close()

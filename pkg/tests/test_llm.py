import json

import httpx
import pytest

from promise.llm import (API_KEY_ENV, BackendUnavailable, BudgetExceeded, GenerationRequest, HeuristicBackend,
                         HttpBackend, ScriptedBackend, prompt_goal)


def req(goal="a + 0 = a", n=1, extra=""):
    return GenerationRequest(f"System role: x\n- Goal: {goal}\n{extra}", n)


def test_request_validation():
    with pytest.raises(ValueError):
        GenerationRequest("p", 0)
    with pytest.raises(ValueError):
        GenerationRequest("p", 1, temperature=3.0)


def test_prompt_goal():
    assert prompt_goal("x\n- Goal: foo y\n- Assumptions: none") == "foo y"


def test_scripted_lookup_and_default():
    b = ScriptedBackend({r"\+ 0": ["1. apply (simp add: add_zero)"]}, default="nothing")
    assert b.generate(req()).texts == ["1. apply (simp add: add_zero)"]
    assert b.generate(req("pp x")).texts == ["nothing"]


def test_scripted_longest_pattern_and_sequence():
    b = ScriptedBackend([("a", ["short"]), (r"a \+ 0", ["first", "second"])])
    assert [b.generate(req()).texts[0] for _ in range(3)] == ["first", "second", "second"]


def test_scripted_query_cap():
    b = ScriptedBackend({}, query_cap=30)
    for _ in range(30):
        b.generate(req())
    with pytest.raises(BudgetExceeded):
        b.generate(req())
    assert b.queries == 30


def test_scripted_json_roundtrip(tmp_path):
    b = ScriptedBackend([("^x$", ["1. apply simp"])], default="d")
    path = tmp_path / "table.json"
    path.write_text(json.dumps(b.to_dict()))
    again = ScriptedBackend.from_json(path)
    assert again.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        ScriptedBackend({"x": []})


def test_heuristic_fills_placeholders():
    prompt = "\n".join([
        "Task: produce exactly 3 distinct next-step candidates",
        "- Goal: double 0 = 0",
        "- T1: apply (unfold <Def/Simp names>) -> apply simp",
        "- T2: apply (rule <Rule lemma>)",
        "- Defs/Simp: double_def, add_zero",
        "- Rules: le_refl",
        "- WP/Ref.: none",
    ])
    text = HeuristicBackend().generate(GenerationRequest(prompt, 12)).texts[0]
    assert text.splitlines() == ["1. apply (unfold double_def)", "2. apply (rule le_refl)",
                                 "3. apply (unfold add_zero)"]


def chat(texts):
    return {"choices": [{"message": {"content": t}} for t in texts]}


def make_http(handler, **kw):
    return HttpBackend("http://llm.test/v1", "m", api_key="k", transport=httpx.MockTransport(handler),
                       sleep=lambda s: None, **kw)


def test_http_success_and_headers():
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=chat(["1. apply simp", "1. apply auto"]))

    b = make_http(handler)
    out = b.generate(GenerationRequest("p", 2, seed=7))
    assert out.texts == ["1. apply simp", "1. apply auto"]
    assert seen["auth"] == "Bearer k"
    assert seen["body"]["n"] == 2 and seen["body"]["seed"] == 7


def test_http_retries_then_unavailable():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503)

    with pytest.raises(BackendUnavailable):
        make_http(handler).generate(GenerationRequest("p", 1))
    assert len(calls) == 4


def test_http_recovers_after_transient_error():
    calls = []

    def handler(request):
        calls.append(1)
        if len(calls) < 3:
            raise httpx.ConnectError("down")
        return httpx.Response(200, json=chat(["ok"]))

    assert make_http(handler).generate(GenerationRequest("p", 1)).texts == ["ok"]


def test_http_sequential_fallback_when_n_rejected():
    bodies = []

    def handler(request):
        body = json.loads(request.content)
        bodies.append(body["n"])
        if body["n"] > 1:
            return httpx.Response(400, json={"error": "n not supported"})
        return httpx.Response(200, json=chat([f"r{len(bodies)}"]))

    b = make_http(handler)
    assert b.generate(GenerationRequest("p", 3)).texts == ["r2", "r3", "r4"]
    assert bodies == [3, 1, 1, 1]
    assert b.queries == 1


def test_http_malformed_body():
    b = make_http(lambda r: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(BackendUnavailable):
        b.generate(GenerationRequest("p", 1))


def test_http_key_from_env(monkeypatch):
    monkeypatch.setenv(API_KEY_ENV, "envkey")
    seen = {}

    def handler(request):
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(200, json=chat(["x"]))

    HttpBackend("http://llm.test/v1", "m", transport=httpx.MockTransport(handler)).generate(GenerationRequest("p"))
    assert seen["auth"] == "Bearer envkey"

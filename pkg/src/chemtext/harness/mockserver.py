"""Deterministic mock generation endpoints for tests and dry runs.

A *behavior* is a callable ``GenerationRequest -> GenerationResponse``.
:class:`MockClient` runs a behavior in-process; :class:`MockGenerationServer`
serves one over real HTTP on the ``/v1/generate`` wire contract, so the
HTTP client can be exercised end-to-end without a model.

All shipped behaviors are deterministic functions of the request (plus a
seed), independent of call order, so concurrent runs reproduce byte-identical
reports.
"""

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Mapping

from chemtext.errors import ValidationError
from chemtext.harness.client import GenerationRequest, GenerationResponse
from chemtext.harness.mcq import LETTERS

Behavior = Callable[[GenerationRequest], GenerationResponse]


# =============================================================================
# Behaviors
# =============================================================================


def gold_echo(gold_by_prompt: Mapping[str, str]) -> Behavior:
    """Echo each prompt's gold continuation.

    Text mode returns the mapped text (empty string for unknown prompts).
    Likelihood mode scores the choice equal to the mapped text at 0.0 and
    every other choice at -10.0.
    """

    def behave(request: GenerationRequest) -> GenerationResponse:
        gold = gold_by_prompt.get(request.prompt)
        if request.choices is not None:
            return GenerationResponse(
                choice_logprobs=tuple(
                    0.0 if choice == gold else -10.0 for choice in request.choices
                )
            )
        return GenerationResponse(text=gold if gold is not None else "")

    return behave


def constant(text: str) -> Behavior:
    """Always generate ``text``; in likelihood mode, score all choices
    equally (argmax resolves to the first choice)."""

    def behave(request: GenerationRequest) -> GenerationResponse:
        if request.choices is not None:
            return GenerationResponse(choice_logprobs=(0.0,) * len(request.choices))
        return GenerationResponse(text=text)

    return behave


def hashed_choice(seed: int) -> Behavior:
    """Pick a pseudo-random choice per prompt, deterministically: the pick
    depends only on (seed, prompt), never on call order or concurrency."""

    def pick(prompt: str, n: int) -> int:
        digest = hashlib.blake2b(f"{seed}:{prompt}".encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % n

    def behave(request: GenerationRequest) -> GenerationResponse:
        if request.choices is not None:
            chosen = pick(request.prompt, len(request.choices))
            return GenerationResponse(
                choice_logprobs=tuple(
                    0.0 if i == chosen else -10.0 for i in range(len(request.choices))
                )
            )
        return GenerationResponse(text=LETTERS[pick(request.prompt, len(LETTERS))])

    return behave


class flaky:
    """Fail the first ``fail_first`` attempts for each distinct prompt, then
    delegate to ``inner`` — exercises the runner's retry budget."""

    def __init__(self, inner: Behavior, fail_first: int = 1) -> None:
        self._inner = inner
        self._fail_first = fail_first
        self._attempts: dict[str, int] = {}
        self._lock = threading.Lock()

    def __call__(self, request: GenerationRequest) -> GenerationResponse:
        with self._lock:
            seen = self._attempts.get(request.prompt, 0)
            self._attempts[request.prompt] = seen + 1
        if seen < self._fail_first:
            return GenerationResponse(error=f"synthetic failure (attempt {seen + 1})")
        return self._inner(request)


# =============================================================================
# Clients and server
# =============================================================================


class MockClient:
    """In-process client running a behavior directly (no HTTP)."""

    def __init__(self, behavior: Behavior) -> None:
        self._behavior = behavior

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        try:
            return self._behavior(request)
        except Exception as exc:  # a broken behavior is an endpoint failure
            return GenerationResponse(error=f"behavior raised: {exc}")


class MockGenerationServer:
    """Threaded HTTP server speaking the ``/v1/generate`` wire contract.

    Usable as a context manager::

        with MockGenerationServer(gold_echo(answers)) as server:
            client = HttpGenerationClient(server.url)
    """

    def __init__(self, behavior: Behavior, host: str = "127.0.0.1") -> None:
        self._behavior = behavior
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802 (http.server API)
                if self.path != "/v1/generate":
                    self._reply(404, {"error": f"unknown path {self.path}"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    payload = json.loads(self.rfile.read(length))
                    request = _request_from_wire(payload)
                except (ValidationError, ValueError) as exc:
                    self._reply(400, {"error": f"bad request: {exc}"})
                    return
                try:
                    response = outer._behavior(request)
                except Exception as exc:
                    self._reply(500, {"error": f"behavior raised: {exc}"})
                    return
                self._reply(500 if response.error is not None else 200, response.to_wire())

            def _reply(self, status: int, body: dict) -> None:
                data = json.dumps(body).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args) -> None:  # keep test output clean
                pass

        self._server = ThreadingHTTPServer((host, 0), Handler)
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "MockGenerationServer":
        if self._thread is None:
            self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
            self._thread.start()
        return self

    def stop(self) -> None:
        if self._thread is not None:
            self._server.shutdown()
            self._thread.join()
            self._thread = None
        self._server.server_close()

    def __enter__(self) -> "MockGenerationServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()


def _request_from_wire(payload) -> GenerationRequest:
    if not isinstance(payload, dict) or "prompt" not in payload:
        raise ValidationError("request must be a JSON object with a 'prompt'")
    logprobs = payload.get("logprobs")
    choices = None
    if logprobs is not None:
        if not isinstance(logprobs, dict) or not isinstance(logprobs.get("choices"), list):
            raise ValidationError("'logprobs' must be an object with a 'choices' list")
        choices = tuple(str(c) for c in logprobs["choices"])
    stop = payload.get("stop", [])
    if not isinstance(stop, list):
        raise ValidationError("'stop' must be a list")
    return GenerationRequest(
        prompt=str(payload["prompt"]),
        max_new_tokens=int(payload.get("max_new_tokens", 64)),
        temperature=float(payload.get("temperature", 0.0)),
        stop_sequences=tuple(str(s) for s in stop),
        choices=choices,
    )

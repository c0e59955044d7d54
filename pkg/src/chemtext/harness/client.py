"""Text-generation endpoint contract and HTTP client.

Wire contract: ``POST {base_url}/v1/generate`` with JSON

    {"prompt": str, "max_new_tokens": int, "temperature": float,
     "stop": [str, ...], "logprobs"?: {"choices": [str, ...]}}

returning ``{"text": str}`` for free-form generation or
``{"choice_logprobs": [float, ...]}`` when per-choice likelihood scoring was
requested.  Any endpoint satisfying this contract is usable; a deterministic
in-process mock ships in :mod:`chemtext.harness.mockserver`.

A client performs exactly one attempt per :meth:`generate` call and never
raises for endpoint trouble — transport errors, non-200 statuses, and
malformed bodies all come back as error responses.  Retries are the
runner's job.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import requests

from chemtext.errors import ValidationError


@dataclass(frozen=True)
class GenerationRequest:
    """One generation call.

    ``choices`` switches the endpoint into per-choice likelihood scoring:
    instead of sampling a continuation it scores each candidate continuation
    and returns one log-probability per choice.
    """

    prompt: str
    max_new_tokens: int = 64
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ()
    choices: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.max_new_tokens < 1:
            raise ValidationError(f"max_new_tokens must be >= 1, got {self.max_new_tokens}")
        if self.temperature < 0:
            raise ValidationError(f"temperature must be >= 0, got {self.temperature}")
        if self.choices is not None and not self.choices:
            raise ValidationError("choices, when given, must be non-empty")

    def to_wire(self) -> dict:
        payload: dict = {
            "prompt": self.prompt,
            "max_new_tokens": self.max_new_tokens,
            "temperature": self.temperature,
            "stop": list(self.stop_sequences),
        }
        if self.choices is not None:
            payload["logprobs"] = {"choices": list(self.choices)}
        return payload


@dataclass(frozen=True)
class GenerationResponse:
    """Outcome of one generation attempt.

    Exactly one of ``text``, ``choice_logprobs``, ``error`` is set: a
    response either carries content or describes the failure.
    """

    text: str | None = None
    choice_logprobs: tuple[float, ...] | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        present = sum(x is not None for x in (self.text, self.choice_logprobs, self.error))
        if present != 1:
            raise ValidationError(
                "exactly one of text/choice_logprobs/error must be set, "
                f"got {present} of them"
            )

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_wire(self) -> dict:
        if self.text is not None:
            return {"text": self.text}
        if self.choice_logprobs is not None:
            return {"choice_logprobs": list(self.choice_logprobs)}
        return {"error": self.error}

    @classmethod
    def from_wire(cls, obj: dict) -> "GenerationResponse":
        if not isinstance(obj, dict):
            return cls(error=f"malformed response: expected JSON object, got {type(obj).__name__}")
        if "error" in obj:
            return cls(error=str(obj["error"]))
        if "choice_logprobs" in obj:
            values = obj["choice_logprobs"]
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
            ):
                return cls(error="malformed response: choice_logprobs must be a number list")
            return cls(choice_logprobs=tuple(float(v) for v in values))
        if "text" in obj:
            if not isinstance(obj["text"], str):
                return cls(error="malformed response: text must be a string")
            return cls(text=obj["text"])
        return cls(error="malformed response: no text, choice_logprobs, or error field")


@runtime_checkable
class GenerationClient(Protocol):
    """Anything that can serve one generation attempt."""

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        """Perform a single attempt; endpoint trouble becomes an error
        response, never an exception."""
        ...


class HttpGenerationClient:
    """Client for a live endpoint speaking the ``/v1/generate`` contract."""

    def __init__(self, base_url: str, timeout: float = 60.0) -> None:
        if not base_url:
            raise ValidationError("endpoint base URL must be non-empty")
        self._url = base_url.rstrip("/") + "/v1/generate"
        self._timeout = timeout
        self._session = requests.Session()

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        try:
            http = self._session.post(self._url, json=request.to_wire(), timeout=self._timeout)
        except requests.RequestException as exc:
            return GenerationResponse(error=f"transport error: {exc}")
        try:
            body = http.json()
        except ValueError:
            body = None
        if http.status_code != 200:
            detail = body.get("error") if isinstance(body, dict) else http.text[:200]
            return GenerationResponse(error=f"HTTP {http.status_code}: {detail}")
        if body is None:
            return GenerationResponse(error="malformed response: body is not JSON")
        response = GenerationResponse.from_wire(body)
        if response.choice_logprobs is not None and request.choices is not None:
            if len(response.choice_logprobs) != len(request.choices):
                return GenerationResponse(
                    error=f"malformed response: {len(response.choice_logprobs)} "
                    f"logprobs for {len(request.choices)} choices"
                )
        return response

    def close(self) -> None:
        self._session.close()

"""Thin client for the augmentation service.

The CLI talks to the service through this class. By default requests are
dispatched in-process against the FastAPI app (no server needed, still a
single process); pass ``server`` to target a running instance instead.
"""

from __future__ import annotations

import asyncio

import httpx


class ServiceError(RuntimeError):
    """Non-2xx response from the service."""

    def __init__(self, status_code: int, detail):
        super().__init__(f"service returned {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    def __init__(self, server: str | None = None):
        self._server = server
        self._app = None
        if server is None:
            from .service.app import create_app

            self._app = create_app()

    def _request(self, method: str, path: str, json_body=None) -> dict:
        if self._server is not None:
            with httpx.Client(base_url=self._server, timeout=None) as client:
                response = client.request(method, path, json=json_body)
        else:
            response = asyncio.run(self._asgi_request(method, path, json_body))
        if response.status_code >= 300:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, detail)
        return response.json()

    async def _asgi_request(self, method: str, path: str, json_body=None) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(transport=transport, base_url="http://augsearch", timeout=None) as client:
            return await client.request(method, path, json=json_body)

    # --- endpoint wrappers ---

    def health(self) -> dict:
        return self._request("GET", "/health")

    def augment(self, lines, policy_text=None, policy=None, seed=0, lexicon_dir=None) -> dict:
        return self._request(
            "POST",
            "/augment",
            {
                "lines": list(lines),
                "policy_text": policy_text,
                "policy": policy,
                "seed": seed,
                "lexicon_dir": lexicon_dir,
            },
        )

    def evaluate(self, responses, references, lexicon_dir=None) -> dict:
        return self._request(
            "POST",
            "/eval",
            {"responses": list(responses), "references": list(references), "lexicon_dir": lexicon_dir},
        )

    def validate_policy(self, text: str) -> dict:
        return self._request("POST", "/policy/validate", {"text": text})

    def render_policy(self, policy_doc: dict) -> dict:
        return self._request("POST", "/policy/render", {"policy": policy_doc})

    def search(self, **request) -> dict:
        return self._request("POST", "/search", request)

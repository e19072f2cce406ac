"""Thin HTTP client for the service, in-process by default.

Without a server URL the client mounts the FastAPI app over an in-process
ASGI transport: no socket, no subprocess, bit-identical responses. With a
URL it talks to a remote instance of the same app.
"""

from __future__ import annotations

import asyncio
from typing import Any

import httpx

__all__ = ["InProcessTransport", "ServiceClient", "ServiceError"]


class ServiceError(RuntimeError):
    """A service-reported failure with its machine-readable kind."""

    def __init__(self, kind: str, message: str, status_code: int, payload: Any = None):
        super().__init__(message)
        self.kind = kind
        self.status_code = status_code
        self.payload = payload


def _raise_for_error(response: httpx.Response) -> None:
    if response.status_code < 400:
        return
    kind = "data_error"
    message = f"service error (HTTP {response.status_code})"
    payload = None
    try:
        payload = response.json()
    except ValueError:
        pass
    if isinstance(payload, dict):
        detail = payload.get("detail")
        if isinstance(detail, dict):
            kind = detail.get("kind", kind)
            message = detail.get("message", message)
        elif isinstance(detail, list):
            # Request-validation failures arrive as a list of field errors.
            parts = []
            for item in detail:
                loc = ".".join(str(x) for x in item.get("loc", []) if x != "body")
                parts.append(f"{loc}: {item.get('msg', 'invalid')}")
            message = "invalid request: " + "; ".join(parts)
        elif detail is not None:
            message = str(detail)
    raise ServiceError(kind, message, response.status_code, payload)


class InProcessTransport(httpx.BaseTransport):
    """Synchronous httpx transport that dispatches into an ASGI app.

    httpx ships only an async ASGI transport; this wrapper drives it with
    its own event loop per request so the plain Client can use it.  Request
    bodies are re-wrapped as byte content so the async side can stream them.
    """

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app, raise_app_exceptions=False)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content = request.read()

        async def dispatch() -> tuple[httpx.Response, bytes]:
            inner = httpx.Request(
                request.method, request.url, headers=request.headers, content=content
            )
            response = await self._asgi.handle_async_request(inner)
            body = await response.aread()
            await response.aclose()
            return response, body

        response, body = asyncio.run(dispatch())
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=body,
            request=request,
        )


class ServiceClient:
    """GET/POST JSON against the service, local or remote."""

    def __init__(self, server: str | None = None, timeout: float = 600.0):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=timeout)
        else:
            from .service import create_app

            self._client = httpx.Client(
                transport=InProcessTransport(create_app()),
                base_url="http://rydrouter.local",
                timeout=timeout,
            )

    def get(self, path: str, params: dict | None = None) -> Any:
        response = self._client.get(path, params=params)
        _raise_for_error(response)
        return response.json()

    def post(self, path: str, body: dict) -> Any:
        response = self._client.post(path, json=body)
        _raise_for_error(response)
        return response.json()

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

"""Client for the HTTP service.

Without a server URL the client mounts the FastAPI app on an in-process ASGI
transport, so the full pipeline runs hermetically in one process with no
sockets.  Point it at a URL to talk to a deployed instance instead; the wire
contract is identical.
"""

from __future__ import annotations

import asyncio
from typing import Any

import httpx

from sketchpipe.errors import SketchPipeError

_INPROC_BASE = "http://sketchpipe.internal"


class ServiceError(SketchPipeError):
    code = "service"

    def __init__(self, message: str, status_code: int, payload: Any = None):
        super().__init__(message)
        self.status_code = status_code
        self.payload = payload

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["status_code"] = self.status_code
        if isinstance(self.payload, dict) and isinstance(self.payload.get("error"), dict):
            out.update({k: v for k, v in self.payload["error"].items() if k != "code"})
            out["code"] = self.payload["error"].get("code", self.code)
        return out


def _error_message(status_code: int, payload: Any) -> str:
    if isinstance(payload, dict):
        err = payload.get("error")
        if isinstance(err, dict):
            return f"{err.get('code', 'error')}: {err.get('message', '')}"
        detail = payload.get("detail")
        if detail is not None:
            if isinstance(detail, list):
                parts = []
                for item in detail:
                    loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
                    parts.append(f"{loc}: {item.get('msg', '')}" if loc else item.get("msg", ""))
                return "invalid request: " + "; ".join(parts)
            return str(detail)
    return f"service returned HTTP {status_code}"


class ServiceClient:
    def __init__(self, server: str | None = None, app=None, timeout_s: float = 600.0):
        self.server = server.rstrip("/") if server else None
        self.timeout_s = timeout_s
        self._app = app

    def _ensure_app(self):
        if self._app is None:
            from sketchpipe.service.app import create_app

            self._app = create_app()
        return self._app

    async def _asgi_request(self, method: str, path: str, payload: Any) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._ensure_app())
        async with httpx.AsyncClient(
            transport=transport, base_url=_INPROC_BASE, timeout=self.timeout_s
        ) as client:
            return await client.request(method, path, json=payload)

    def request(self, method: str, path: str, payload: Any = None) -> Any:
        if self.server:
            try:
                with httpx.Client(base_url=self.server, timeout=self.timeout_s) as client:
                    resp = client.request(method, path, json=payload)
            except httpx.HTTPError as exc:
                raise ServiceError(f"cannot reach {self.server}: {exc}", status_code=0) from exc
        else:
            resp = asyncio.run(self._asgi_request(method, path, payload))
        try:
            body = resp.json()
        except ValueError:
            body = None
        if resp.status_code >= 400:
            raise ServiceError(
                _error_message(resp.status_code, body),
                status_code=resp.status_code,
                payload=body,
            )
        return body

    # -- convenience wrappers, one per endpoint -------------------------

    def health(self) -> dict:
        return self.request("GET", "/health")

    def parse(self, source: str) -> dict:
        return self.request("POST", "/parse", {"source": source})

    def rasterize(self, source: str | None = None, program: dict | None = None,
                  scale: float = 100.0, provenance: str = "") -> dict:
        return self.request(
            "POST",
            "/rasterize",
            {"source": source, "program": program, "scale": scale, "provenance": provenance},
        )

    def ground(self, groundings: dict, source: str | None = None,
               program: dict | None = None, scale: float = 100.0) -> dict:
        return self.request(
            "POST",
            "/ground",
            {"source": source, "program": program, "groundings": groundings, "scale": scale},
        )

    def prompt(self, spec: dict) -> dict:
        return self.request("POST", "/prompt", {"spec": spec})

    def query(self, spec: dict, transport: dict) -> dict:
        return self.request("POST", "/query", {"spec": spec, "transport": transport})

    def batch_query(self, specs: list[dict], transport: dict) -> dict:
        return self.request("POST", "/query/batch", {"specs": specs, "transport": transport})

    def build_dataset(self, **kwargs) -> dict:
        return self.request("POST", "/dataset/build", kwargs)

    def evaluate(self, **kwargs) -> dict:
        return self.request("POST", "/evaluate", kwargs)

    def pipeline(self, spec: dict, out_dir: str, transport: dict, scale: float = 100.0) -> dict:
        return self.request(
            "POST",
            "/pipeline",
            {"spec": spec, "out_dir": out_dir, "transport": transport, "scale": scale},
        )

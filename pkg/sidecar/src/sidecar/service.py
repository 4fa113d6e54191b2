"""HTTP layer: request validation, batching limits and error mapping."""
from __future__ import annotations

import threading
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import ViewError, make_backend
from .config import ServiceConfig

VIEW_KINDS = ("softmax", "class_score", "hidden", "embedding")


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _validate_view(view: Any, backend, config: ServiceConfig) -> Optional[str]:
    """Returns an error message for a malformed view, else None."""
    if not isinstance(view, dict) or "kind" not in view:
        return "each view needs a 'kind'"
    kind = view["kind"]
    if kind not in VIEW_KINDS:
        return f"unsupported view kind {kind!r}"
    if kind == "hidden":
        layer = view.get("layer")
        if not isinstance(layer, int):
            return "hidden views need an integer 'layer'"
        if not config.layer_allowed(layer, backend.n_layers):
            return f"layer {layer} not exposed by this service"
        spans = view.get("spans")
        if not isinstance(spans, list) or not spans:
            return "hidden views need a non-empty 'spans' list"
        for span in spans:
            if (
                not isinstance(span, list)
                or len(span) != 2
                or not all(isinstance(v, int) for v in span)
                or span[0] < 0
                or span[1] <= span[0]
            ):
                return f"bad span {span!r}"
    if kind == "class_score":
        label = view.get("label")
        if label not in backend.classes:
            return f"unknown class label {label!r}"
    return None


def _score_view(backend, text: str, view: Dict[str, Any]) -> Dict[str, List[float]]:
    kind = view["kind"]
    if kind in ("softmax", "class_score"):
        # class scores are extracted client-side from the full distribution
        return {"softmax": backend.softmax(text)}
    if kind == "hidden":
        spans = [tuple(span) for span in view["spans"]]
        return {"hidden": backend.hidden(text, view["layer"], spans)}
    return {"embedding": backend.embedding(text)}


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="morphcheck-sidecar")
    app.state.config = config
    app.state.backend = None
    app.state.lock = threading.Lock()
    app.state.in_flight = 0

    def backend():
        # lazy load so the service binds its port before the checkpoint loads
        if app.state.backend is None:
            app.state.backend = make_backend(config)
        return app.state.backend

    @app.get("/v1/capabilities")
    def capabilities():
        b = backend()
        return {
            "views": list(VIEW_KINDS),
            "classes": list(b.classes),
            "hidden_dim": b.hidden_dim,
            "max_batch": config.max_batch,
        }

    @app.post("/v1/score")
    async def score(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "request body is not valid JSON")
        if app.state.backend is None and not config.echo_mode:
            # load under the lock; concurrent callers get a retryable 503
            if not app.state.lock.acquire(blocking=False):
                return _error(503, "model loading")
            try:
                backend()
            finally:
                app.state.lock.release()
        b = backend()

        texts = payload.get("texts")
        views = payload.get("views")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return _error(400, "'texts' must be a list of strings")
        if not isinstance(views, list) or not views:
            return _error(400, "'views' must be a non-empty list")
        if len(texts) > config.max_batch:
            return _error(429, f"batch of {len(texts)} exceeds max {config.max_batch}")
        for view in views:
            message = _validate_view(view, b, config)
            if message:
                return _error(400, message)
        try:
            results = []
            for text in texts:
                row: Dict[str, List[float]] = {}
                for view in views:
                    row.update(_score_view(b, text, view))
                results.append(row)
        except ViewError as exc:
            return _error(400, str(exc))
        return {"model_id": b.model_id, "results": results}

    return app

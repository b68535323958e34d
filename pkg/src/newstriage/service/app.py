"""FastAPI wiring around the service core."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..corpus import ArticleLabel, PostLabel
from .core import ServiceError, TriageService, Verdict
from .schemas import (
    ArticleDetail,
    ErrorOut,
    MetricsOut,
    QueuePage,
    RetrainIn,
    RetrainOut,
    VerdictAck,
    VerdictIn,
)


def _to_verdict(body: VerdictIn) -> Verdict:
    return Verdict(
        url=body.url,
        article_label=ArticleLabel.SUSPICIOUS if body.article_label == 1 else ArticleLabel.NOT_SUSPICIOUS,
        post_labels=None
        if body.post_labels is None
        else {pid: (PostLabel.SCP if v == 1 else PostLabel.NOT_SCP) for pid, v in body.post_labels.items()},
        reviewer=body.reviewer,
        timestamp=body.timestamp,
    )


def create_app(service: TriageService, static_dir=None) -> FastAPI:
    app = FastAPI(title="newstriage review service", version=__version__)
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status_code,
            content=ErrorOut(error_code=exc.error_code, message=str(exc)).model_dump(),
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content=ErrorOut(error_code="invalid_request", message=str(exc.errors())).model_dump(),
        )

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_version": service.model_version}

    @app.get("/api/queue", response_model=QueuePage)
    def queue(status: str | None = None, page: int = 1, size: int = 20):
        return service.list_articles(status=status, page=page, size=size)

    @app.get("/api/articles/{article_ident}", response_model=ArticleDetail)
    def article(article_ident: str):
        return service.get_article(article_ident)

    @app.post("/api/verdicts", response_model=VerdictAck, status_code=201)
    def submit_verdict(body: VerdictIn):
        return service.submit_verdict(_to_verdict(body))

    @app.post("/api/retrain", response_model=RetrainOut)
    def retrain(body: RetrainIn | None = None):
        body = body or RetrainIn()
        version = service.retrain(kind=body.model, seed=body.seed)
        return {"model_version": version}

    @app.get("/api/metrics", response_model=MetricsOut)
    def metrics():
        result = service.metrics()
        folds = [
            {"fold": str(i), "precision": r.precision, "recall": r.recall, "f1": r.f1}
            for i, r in enumerate(result.folds)
        ]
        agg = result.aggregate
        return {
            "model": result.model_kind,
            "seed": result.seed,
            "model_version": service.model_version,
            "folds": folds,
            "aggregate": {"fold": "aggregate", "precision": agg.precision, "recall": agg.recall, "f1": agg.f1},
        }

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app

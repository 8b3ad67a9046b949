"""FastAPI application exposing a loaded classifier bundle.

Routes
------
GET  /health    liveness probe
GET  /model     classifier metadata (labels, k, alpha, alphabet)
POST /classify  label a batch of texts; per-item errors stay per-item
POST /evaluate  score a labeled batch and return the metric report
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException

from fcmdetect.classifier import BinaryClassifier, Decision
from fcmdetect.metrics import MetricsError, score
from fcmdetect.persistence import load_bundle
from fcmdetect.service.schemas import (
    ClassifyRequest,
    ClassifyResponse,
    ConfusionOut,
    DecisionOut,
    EvaluateRequest,
    EvaluateResponse,
    ModelInfo,
    TextItem,
)

BUNDLE_ENV = "FCMDETECT_BUNDLE"


def create_app(bundle: BinaryClassifier | str | Path) -> FastAPI:
    """Build the service around a classifier or a path to its bundle."""
    clf = bundle if isinstance(bundle, BinaryClassifier) else load_bundle(bundle)
    # Requests run on a thread pool; settle lazy model state up front.
    clf.model_a.prepare()
    clf.model_b.prepare()
    app = FastAPI(title="fcmdetect", version="0.1.0")
    app.state.classifier = clf

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/model", response_model=ModelInfo)
    def model_info() -> ModelInfo:
        return ModelInfo(
            label_a=clf.label_a,
            label_b=clf.label_b,
            k=clf.k,
            alpha=clf.alpha,
            lowercase=clf.lowercase,
            alphabet=clf.alphabet.as_string(),
            alphabet_size=clf.alphabet.size,
            entries={clf.label_a: clf.model_a.num_entries, clf.label_b: clf.model_b.num_entries},
            trained_symbols={
                clf.label_a: clf.model_a.trained_symbols,
                clf.label_b: clf.model_b.trained_symbols,
            },
        )

    def to_out(item: TextItem, result: Decision | Exception) -> DecisionOut:
        if isinstance(result, Exception):
            return DecisionOut(id=item.id, error=str(result))
        return DecisionOut(
            id=item.id,
            label=result.label,
            bits=result.bits,
            coded_symbols=result.coded_symbols,
            margin_bits_per_symbol=result.margin_bits_per_symbol,
            tie=result.tie,
        )

    @app.post("/classify", response_model=ClassifyResponse)
    def classify(request: ClassifyRequest) -> ClassifyResponse:
        results = clf.classify_batch([item.text for item in request.texts])
        return ClassifyResponse(
            results=[to_out(item, res) for item, res in zip(request.texts, results)]
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(request: EvaluateRequest) -> EvaluateResponse:
        results = clf.classify_batch([s.text for s in request.samples])
        pairs = []
        errors = 0
        for sample, res in zip(request.samples, results):
            if isinstance(res, Exception):
                errors += 1
            else:
                pairs.append((sample.label, res.label))
        if not pairs:
            raise HTTPException(status_code=422, detail="no classifiable samples in request")
        positive = request.positive_label or min(clf.labels)
        try:
            report = score(pairs, positive_label=positive)
        except MetricsError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        m = report.matrix
        return EvaluateResponse(
            matrix=ConfusionOut(
                positive_label=m.positive_label,
                negative_label=m.negative_label,
                tp=m.tp,
                fp=m.fp,
                fn=m.fn,
                tn=m.tn,
            ),
            accuracy=report.accuracy,
            precision=report.precision,
            recall=report.recall,
            f1=report.f1,
            macro_f1=report.macro_f1,
            degenerate=report.degenerate,
            n_scored=len(pairs),
            n_errors=errors,
        )

    return app


def create_default_app() -> FastAPI:
    """Factory for ``uvicorn --factory``; reads the bundle path from the environment."""
    bundle = os.environ.get(BUNDLE_ENV)
    if not bundle:
        raise RuntimeError(f"set {BUNDLE_ENV} to a classifier bundle path")
    return create_app(bundle)

"""Request and response bodies for the classification service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class TextItem(BaseModel):
    id: str | None = None
    text: str


class ClassifyRequest(BaseModel):
    texts: list[TextItem] = Field(min_length=1)


class DecisionOut(BaseModel):
    id: str | None = None
    label: str | None = None
    bits: dict[str, float] | None = None
    coded_symbols: int | None = None
    margin_bits_per_symbol: float | None = None
    tie: bool | None = None
    error: str | None = None


class ClassifyResponse(BaseModel):
    results: list[DecisionOut]


class LabeledItem(BaseModel):
    text: str
    label: str


class EvaluateRequest(BaseModel):
    samples: list[LabeledItem] = Field(min_length=1)
    positive_label: str | None = None


class ConfusionOut(BaseModel):
    positive_label: str
    negative_label: str
    tp: int
    fp: int
    fn: int
    tn: int


class EvaluateResponse(BaseModel):
    matrix: ConfusionOut
    accuracy: float
    precision: float
    recall: float
    f1: float
    macro_f1: float
    degenerate: bool
    n_scored: int
    n_errors: int


class ModelInfo(BaseModel):
    label_a: str
    label_b: str
    k: int
    alpha: float
    lowercase: bool
    alphabet: str
    alphabet_size: int
    entries: dict[str, int]
    trained_symbols: dict[str, int]

"""Two-class decisions from a pair of per-class context models.

Text is mapped to symbol indices once, scored under both class models with
the same smoothing constant, and assigned the label whose model encodes it
in fewer bits.  On an exact tie the lexicographically smaller label wins and
the decision is flagged.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from fcmdetect.alphabet import Alphabet, filter_text
from fcmdetect.fcm import ContextModel, validate_alpha


class ClassifierConfigError(ValueError):
    """The two models or labels do not form a valid classifier."""


@dataclass(frozen=True)
class Decision:
    """Outcome of classifying one text.

    ``bits`` maps each label to the code length of the text under that
    class's model; ``margin_bits_per_symbol`` is the absolute bit gap
    normalized by the number of encoded symbols.
    """

    label: str
    bits: dict[str, float]
    coded_symbols: int
    margin_bits_per_symbol: float
    tie: bool


@dataclass(frozen=True)
class BinaryClassifier:
    """A pair of class models sharing one alphabet and smoothing constant."""

    model_a: ContextModel
    model_b: ContextModel
    label_a: str
    label_b: str
    alphabet: Alphabet
    alpha: float
    lowercase: bool = True

    def __post_init__(self) -> None:
        if self.label_a == self.label_b:
            raise ClassifierConfigError(f"class labels must differ, both are {self.label_a!r}")
        if not self.label_a or not self.label_b:
            raise ClassifierConfigError("class labels must be nonempty")
        if self.model_a.k != self.model_b.k:
            raise ClassifierConfigError(
                f"class models must share k, got {self.model_a.k} and {self.model_b.k}"
            )
        if self.model_a.alphabet_size != self.model_b.alphabet_size:
            raise ClassifierConfigError(
                f"class models must share an alphabet size, got "
                f"{self.model_a.alphabet_size} and {self.model_b.alphabet_size}"
            )
        if self.alphabet.size != self.model_a.alphabet_size:
            raise ClassifierConfigError(
                f"alphabet has {self.alphabet.size} symbols but the models "
                f"expect {self.model_a.alphabet_size}"
            )
        validate_alpha(self.alpha)

    @property
    def k(self) -> int:
        return self.model_a.k

    @property
    def labels(self) -> tuple[str, str]:
        return (self.label_a, self.label_b)

    def classify_indices(self, seq: Sequence[int] | np.ndarray) -> Decision:
        """Classify an already-filtered symbol-index sequence."""
        bits_a = self.model_a.code_length(seq, self.alpha)
        bits_b = self.model_b.code_length(seq, self.alpha)
        coded = len(seq) - self.k
        if bits_a < bits_b:
            label, tie = self.label_a, False
        elif bits_b < bits_a:
            label, tie = self.label_b, False
        else:
            label, tie = min(self.label_a, self.label_b), True
        return Decision(
            label=label,
            bits={self.label_a: bits_a, self.label_b: bits_b},
            coded_symbols=coded,
            margin_bits_per_symbol=abs(bits_a - bits_b) / coded,
            tie=tie,
        )

    def classify(self, text: str) -> Decision:
        """Filter ``text`` through the alphabet and classify it.

        Raises the underlying scoring error (for example when too few
        characters survive filtering) rather than guessing.
        """
        seq = filter_text(text, self.alphabet, lowercase=self.lowercase)
        return self.classify_indices(seq)

    def classify_batch(
        self, texts: Sequence[str], workers: int = 1
    ) -> list[Decision | Exception]:
        """Classify many texts, isolating per-item failures.

        Returns one entry per input in input order: a :class:`Decision`, or
        the exception that item raised.  Results do not depend on the worker
        count; models are never mutated during classification.
        """
        if workers < 1:
            raise ClassifierConfigError(f"worker count must be >= 1, got {workers}")

        def one(text: str) -> Decision | Exception:
            try:
                return self.classify(text)
            except Exception as exc:  # noqa: BLE001 - isolate per-item failures
                return exc

        if workers == 1 or len(texts) <= 1:
            return [one(t) for t in texts]
        # Lazy per-model state (pending batches, context table, indexes)
        # must settle before threads share the models.
        self.model_a.prepare()
        self.model_b.prepare()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, texts))

"""Order-k finite-context models over symbol-index sequences.

A :class:`ContextModel` accumulates counts N(c, s): how often symbol ``s``
followed the length-k context ``c`` in the training material.  Smoothed
conditional probabilities and ideal code lengths (in bits) derive from those
counts:

    P(s | c) = (N(c, s) + alpha) / (sum_j N(c, j) + alpha * size)
    bits(x)  = sum over positions i > k of -log2 P(x_i | x_{i-k} .. x_{i-1})

Contexts are encoded as base-``size`` integers with the oldest symbol in the
most significant digit, and each (context, symbol) pair collapses to the
single key ``context_key * size + symbol``.  Counts live in a pair of sorted
parallel arrays; lookups are binary searches, so scoring is vectorized.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

_INT64_MAX = 2**63 - 1
# Consolidate pending per-call count batches once they hold this many entries.
_CONSOLIDATE_AT = 12_000_000
# Ceiling on total trained symbols; keeps every count well inside 64 bits.
_MAX_TRAINED = 2**62
# Build a bucket index over sorted key tables at least this large; smaller
# tables do fine with a plain binary search.
_INDEX_MIN_ENTRIES = 1 << 16
_INDEX_MAX_BUCKETS = 1 << 22


class ModelParameterError(ValueError):
    """Invalid model shape: bad k, bad alphabet size, or a state space too big."""


class SymbolRangeError(ValueError):
    """A symbol index falls outside [0, alphabet_size)."""


class ContextLengthError(ValueError):
    """A context has the wrong number of symbols for this model's order."""


class TargetTooShortError(ValueError):
    """A sequence to score has no scorable positions (length <= k)."""


class SmoothingError(ValueError):
    """The smoothing constant is not a positive finite number."""


def validate_alpha(alpha: float) -> float:
    """Check a smoothing constant: finite and strictly positive."""
    try:
        value = float(alpha)
    except (TypeError, ValueError):
        raise SmoothingError(f"smoothing constant must be a number, got {alpha!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise SmoothingError(f"smoothing constant must be finite and > 0, got {value}")
    return value


class _BucketIndex:
    """Key-range buckets over one sorted key table.

    Shifting a key right by ``shift`` names its bucket; ``offsets`` stores
    where each bucket starts in the table.  A lookup then binary-searches
    only the handful of entries in the query's bucket, which keeps probe
    traffic cache-friendly on tables with tens of millions of entries.
    """

    __slots__ = ("shift", "offsets")

    def __init__(self, keys: np.ndarray, domain: int) -> None:
        n = len(keys)
        target = max(1024, min(_INDEX_MAX_BUCKETS, n // 6))
        domain_bits = max(int(domain).bit_length(), 1)
        self.shift = max(0, domain_bits - (target.bit_length() - 1))
        n_buckets = ((domain - 1) >> self.shift) + 1
        counts = np.bincount(keys >> self.shift, minlength=n_buckets)
        self.offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def lookup(self, keys: np.ndarray, vals: np.ndarray, queries: np.ndarray) -> np.ndarray:
        bucket = queries >> self.shift
        lo = self.offsets[bucket]
        hi = self.offsets[bucket + 1]
        end = hi  # exclusive end of each query's bucket
        while True:
            active = lo < hi
            if not active.any():
                break
            mid = (lo + hi) >> 1
            probe = keys[np.where(active, mid, 0)]
            go_right = active & (probe < queries)
            lo = np.where(go_right, mid + 1, lo)
            hi = np.where(active & ~go_right, mid, hi)
        safe = np.minimum(lo, len(keys) - 1)
        found = (lo < end) & (keys[safe] == queries)
        return np.where(found, vals[safe], 0).astype(np.int64)


class ContextModel:
    """Sparse count table for one text class.

    Parameters
    ----------
    k:
        Context order; each prediction conditions on the k preceding symbols.
    alphabet_size:
        Number of distinct symbols.  ``alphabet_size ** k`` must stay within
        a signed 64-bit range so context keys are representable.

    Training does not carry context across calls: every ``train`` call opens
    a fresh window, so the first k symbols of each call seed the context and
    are never predicted.
    """

    def __init__(self, k: int, alphabet_size: int) -> None:
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
            raise ModelParameterError(f"context order k must be an integer >= 1, got {k!r}")
        if (
            not isinstance(alphabet_size, (int, np.integer))
            or isinstance(alphabet_size, bool)
            or alphabet_size < 2
        ):
            raise ModelParameterError(
                f"alphabet size must be an integer >= 2, got {alphabet_size!r}"
            )
        if alphabet_size**k > _INT64_MAX:
            raise ModelParameterError(
                f"state space {alphabet_size}^{k} exceeds the representable "
                f"context-key range; lower k or shrink the alphabet"
            )
        self.k = int(k)
        self.alphabet_size = int(alphabet_size)
        self.trained_symbols = 0
        # Combined keys can need size^(k+1) values, one power past the guard
        # above; fall back to Python-int (object) arrays when that overflows.
        if alphabet_size ** (k + 1) <= _INT64_MAX:
            self._key_dtype: np.dtype = np.dtype(np.int64)
        else:
            self._key_dtype = np.dtype(object)
        self._keys = np.empty(0, dtype=self._key_dtype)
        self._counts = np.empty(0, dtype=np.int64)
        self._pending: list[tuple[np.ndarray, np.ndarray]] = []
        self._pending_entries = 0
        self._ctx_keys: np.ndarray | None = None
        self._ctx_totals: np.ndarray | None = None
        self._entry_index: _BucketIndex | None = None
        self._ctx_index: _BucketIndex | None = None

    # ------------------------------------------------------------------
    # construction helpers

    @classmethod
    def from_sorted_entries(
        cls, k: int, alphabet_size: int, keys: np.ndarray, counts: np.ndarray
    ) -> "ContextModel":
        """Rebuild a model from already-sorted unique combined keys and counts.

        Used by deserialization.  ``keys`` must be strictly increasing and
        ``counts`` strictly positive; both are taken as-is.
        """
        model = cls(k, alphabet_size)
        model._keys = keys.astype(model._key_dtype, copy=False)
        model._counts = counts.astype(np.int64, copy=False)
        total = int(counts.sum()) if len(counts) else 0
        if total > _MAX_TRAINED:
            raise ModelParameterError("total count exceeds the supported training volume")
        model.trained_symbols = total
        return model

    # ------------------------------------------------------------------
    # training

    def _as_symbols(self, seq: Sequence[int] | np.ndarray) -> np.ndarray:
        arr = np.asarray(seq)
        if arr.ndim != 1:
            raise SymbolRangeError(f"symbol sequence must be one-dimensional, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            raise SymbolRangeError(f"symbol sequence must be integer-typed, got dtype {arr.dtype}")
        if arr.size:
            lo, hi = int(arr.min()), int(arr.max())
            if lo < 0 or hi >= self.alphabet_size:
                raise SymbolRangeError(
                    f"symbol index out of range: saw [{lo}, {hi}], "
                    f"alphabet size is {self.alphabet_size}"
                )
        return arr

    def _combined_keys(self, arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Context keys and combined (context, symbol) keys for positions k..n-1."""
        n = len(arr)
        size = self.alphabet_size
        x = arr.astype(self._key_dtype)
        ctx = np.zeros(n - self.k, dtype=self._key_dtype)
        for j in range(1, self.k + 1):
            # x[i-j] contributes at digit j-1: newest symbol in the lowest digit
            ctx += x[self.k - j : n - j] * (size ** (j - 1))
        combined = ctx * size + x[self.k :]
        return ctx, combined

    def train(self, seq: Sequence[int] | np.ndarray) -> None:
        """Add one training window of symbol indices to the counts.

        Sequences of length <= k contribute nothing (there is no position
        with a full context) but are still validated.
        """
        arr = self._as_symbols(seq)
        n = len(arr)
        if n <= self.k:
            return
        if self.trained_symbols + (n - self.k) > _MAX_TRAINED:
            raise ModelParameterError("training volume exceeds the supported maximum")
        _, combined = self._combined_keys(arr)
        keys, counts = np.unique(combined, return_counts=True)
        self._pending.append((keys, counts.astype(np.int64)))
        self._pending_entries += len(keys)
        self.trained_symbols += n - self.k
        self._ctx_keys = None
        self._ctx_totals = None
        self._ctx_index = None
        if self._pending_entries >= _CONSOLIDATE_AT:
            self._consolidate()

    def _consolidate(self) -> None:
        if not self._pending:
            return
        parts_k = [self._keys] if len(self._keys) else []
        parts_c = [self._counts] if len(self._counts) else []
        for k_arr, c_arr in self._pending:
            parts_k.append(k_arr)
            parts_c.append(c_arr)
        self._pending = []
        self._pending_entries = 0
        self._entry_index = None
        if not parts_k:
            return
        # Aggressive del: these arrays run to hundreds of megabytes when a
        # large corpus is consolidated, so drop each as soon as possible.
        self._keys = np.empty(0, dtype=self._key_dtype)
        self._counts = np.empty(0, dtype=np.int64)
        all_keys = np.concatenate(parts_k)
        all_counts = np.concatenate(parts_c)
        parts_k.clear()
        parts_c.clear()
        order = np.argsort(all_keys, kind="stable")
        sk = all_keys[order]
        del all_keys
        sc = all_counts[order]
        del all_counts, order
        starts = np.flatnonzero(np.r_[True, sk[1:] != sk[:-1]])
        self._keys = sk[starts]
        del sk
        self._counts = np.add.reduceat(sc, starts)

    def _context_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted unique context keys with their total counts."""
        self._consolidate()
        if self._ctx_keys is None:
            if len(self._keys) == 0:
                self._ctx_keys = np.empty(0, dtype=self._key_dtype)
                self._ctx_totals = np.empty(0, dtype=np.int64)
            else:
                ctx = self._keys // self.alphabet_size
                starts = np.flatnonzero(np.r_[True, ctx[1:] != ctx[:-1]])
                self._ctx_keys = ctx[starts]
                self._ctx_totals = np.add.reduceat(self._counts, starts)
        assert self._ctx_totals is not None
        return self._ctx_keys, self._ctx_totals

    # ------------------------------------------------------------------
    # lookups

    @staticmethod
    def _plain_lookup(table_keys: np.ndarray, table_vals: np.ndarray, queries: np.ndarray) -> np.ndarray:
        """Value for each query key, 0 where absent.  Tables are sorted unique."""
        if len(table_keys) == 0:
            return np.zeros(len(queries), dtype=np.int64)
        idx = np.searchsorted(table_keys, queries)
        idx_c = np.minimum(idx, len(table_keys) - 1)
        hit = table_keys[idx_c] == queries
        vals = table_vals[idx_c]
        return np.where(np.asarray(hit, dtype=bool), vals, 0).astype(np.int64)

    def _indexable(self, table: np.ndarray) -> bool:
        return self._key_dtype != np.dtype(object) and len(table) >= _INDEX_MIN_ENTRIES

    def _lookup_entries(self, queries: np.ndarray) -> np.ndarray:
        if self._indexable(self._keys):
            if self._entry_index is None:
                self._entry_index = _BucketIndex(self._keys, self.alphabet_size ** (self.k + 1))
            return self._entry_index.lookup(self._keys, self._counts, queries)
        return self._plain_lookup(self._keys, self._counts, queries)

    def _lookup_totals(self, queries: np.ndarray) -> np.ndarray:
        ctx_keys, ctx_totals = self._context_arrays()
        if self._indexable(ctx_keys):
            if self._ctx_index is None:
                self._ctx_index = _BucketIndex(ctx_keys, self.alphabet_size**self.k)
            return self._ctx_index.lookup(ctx_keys, ctx_totals, queries)
        return self._plain_lookup(ctx_keys, ctx_totals, queries)

    @property
    def num_entries(self) -> int:
        """Number of (context, symbol) pairs with a nonzero count."""
        self._consolidate()
        return len(self._keys)

    def prepare(self) -> None:
        """Finish all deferred work so later scoring never mutates the model.

        Folds pending count batches, materializes the context table, and
        builds the lookup indexes a first query would otherwise create
        lazily.  Call this before sharing a model across threads; scoring
        methods themselves are not synchronized.
        """
        self._consolidate()
        ctx_keys, _ = self._context_arrays()
        if self._entry_index is None and self._indexable(self._keys):
            self._entry_index = _BucketIndex(self._keys, self.alphabet_size ** (self.k + 1))
        if self._ctx_index is None and self._indexable(ctx_keys):
            self._ctx_index = _BucketIndex(ctx_keys, self.alphabet_size**self.k)

    def entry_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All counts as (context_key, symbol, count) arrays sorted by key.

        The result is a pure function of the accumulated counts; the order
        and batching of the ``train`` calls that produced them do not show.
        """
        self._consolidate()
        if len(self._keys) == 0:
            return (
                np.empty(0, dtype=np.uint64),
                np.empty(0, dtype=np.uint8),
                np.empty(0, dtype=np.uint64),
            )
        ctx = self._keys // self.alphabet_size
        sym = self._keys - ctx * self.alphabet_size
        if self._key_dtype == np.dtype(object):
            ctx = np.array([int(v) for v in ctx], dtype=np.uint64)
            sym = np.array([int(v) for v in sym], dtype=np.uint8)
        else:
            ctx = ctx.astype(np.uint64)
            sym = sym.astype(np.uint8)
        return ctx, sym, self._counts.astype(np.uint64)

    def _context_key(self, context: Sequence[int] | np.ndarray) -> int:
        ctx = np.asarray(context)
        if ctx.ndim != 1 or len(ctx) != self.k:
            raise ContextLengthError(
                f"context must have exactly k={self.k} symbols, got {ctx.shape}"
            )
        if len(ctx) and (not np.issubdtype(ctx.dtype, np.integer) or ctx.min() < 0 or ctx.max() >= self.alphabet_size):
            raise SymbolRangeError("context symbols must be integers in [0, alphabet_size)")
        key = 0
        for s in ctx:
            key = key * self.alphabet_size + int(s)
        return key

    def count(self, context: Sequence[int] | np.ndarray, symbol: int) -> int:
        """N(context, symbol): occurrences of ``symbol`` after ``context``."""
        if not (0 <= int(symbol) < self.alphabet_size):
            raise SymbolRangeError(f"symbol {symbol} out of range")
        self._consolidate()
        key = self._context_key(context) * self.alphabet_size + int(symbol)
        q = np.array([key], dtype=self._key_dtype)
        return int(self._lookup_entries(q)[0])

    def context_total(self, context: Sequence[int] | np.ndarray) -> int:
        """Total count of all symbols seen after ``context``."""
        q = np.array([self._context_key(context)], dtype=self._key_dtype)
        return int(self._lookup_totals(q)[0])

    # ------------------------------------------------------------------
    # probabilities and code lengths

    def symbol_probability(
        self, context: Sequence[int] | np.ndarray, symbol: int, alpha: float
    ) -> float:
        """Smoothed conditional probability P(symbol | context).

        With no observations of ``context`` this degrades to the uniform
        1/alphabet_size.  For fixed context the probabilities over all
        symbols sum to 1.
        """
        alpha = validate_alpha(alpha)
        n_cs = self.count(context, symbol)
        n_c = self.context_total(context)
        return (n_cs + alpha) / (n_c + alpha * self.alphabet_size)

    def code_length(self, seq: Sequence[int] | np.ndarray, alpha: float) -> float:
        """Ideal number of bits to encode ``seq`` under this model.

        The first k symbols seed the context and are not charged.  Raises
        :class:`TargetTooShortError` when nothing remains to encode.
        """
        alpha = validate_alpha(alpha)
        arr = self._as_symbols(seq)
        n = len(arr)
        if n <= self.k:
            raise TargetTooShortError(
                f"sequence of length {n} has no scorable positions at order k={self.k}"
            )
        self._consolidate()
        ctx, combined = self._combined_keys(arr)
        n_cs = self._lookup_entries(combined).astype(np.float64)
        n_c = self._lookup_totals(ctx).astype(np.float64)
        probs = (n_cs + alpha) / (n_c + alpha * self.alphabet_size)
        return float(-np.sum(np.log2(probs)))

    def scorable_length(self, seq_len: int) -> int:
        """How many positions of a length-``seq_len`` sequence get encoded."""
        return max(0, seq_len - self.k)

"""Symbol alphabets and the text-to-symbol-index mapping.

Models in this package operate on sequences of small integer indices, not on
raw characters.  An :class:`Alphabet` fixes the ordered symbol set;
:func:`filter_text` maps text onto it, dropping characters that are not in
the set so the surviving symbols become contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

MAX_ALPHABET_SIZE = 256

# Preset symbol sets, smallest to largest.  Order matters: it fixes the
# integer index of each character.  sigma3 extends sigma2 with punctuation,
# sigma4 adds '@', '#' and '$' on top of that.
SIGMA1 = " abcdefghijklmnopqrstuvwxyz"
SIGMA2 = "1234567890 abcdefghijklmnopqrstuvwxyz"
SIGMA3 = SIGMA2 + ".,!?'\"/\\;:_-"
SIGMA4 = SIGMA3 + "@#$"

PRESETS = {
    "sigma1": SIGMA1,
    "sigma2": SIGMA2,
    "sigma3": SIGMA3,
    "sigma4": SIGMA4,
}

# Value stored in the lookup table for characters outside the alphabet.
_DROP = np.uint16(0xFFFF)


class AlphabetError(ValueError):
    """Raised for an invalid alphabet definition or an unknown preset."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct characters with a char <-> index bijection.

    Attributes
    ----------
    symbols:
        The characters in index order; ``symbols[i]`` is the character for
        symbol index ``i``.
    """

    symbols: tuple[str, ...]
    _lut: np.ndarray = field(init=False, repr=False, compare=False)
    _index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (2 <= len(self.symbols) <= MAX_ALPHABET_SIZE):
            raise AlphabetError(
                f"alphabet must have between 2 and {MAX_ALPHABET_SIZE} symbols, "
                f"got {len(self.symbols)}"
            )
        for s in self.symbols:
            if not (isinstance(s, str) and len(s) == 1):
                raise AlphabetError(f"alphabet symbols must be single characters, got {s!r}")
        if len(set(self.symbols)) != len(self.symbols):
            dupes = sorted({s for s in self.symbols if self.symbols.count(s) > 1})
            raise AlphabetError(f"duplicate characters in alphabet: {dupes}")
        # Full-codepoint lookup table: char -> symbol index, _DROP if absent.
        lut = np.full(0x110000, _DROP, dtype=np.uint16)
        for i, s in enumerate(self.symbols):
            lut[ord(s)] = i
        object.__setattr__(self, "_lut", lut)
        object.__setattr__(self, "_index_of", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def index_of(self) -> dict[str, int]:
        """Mapping from character to symbol index."""
        return self._index_of

    def as_string(self) -> str:
        """The alphabet as a single string in index order."""
        return "".join(self.symbols)

    def __contains__(self, char: str) -> bool:
        return char in self._index_of

    def __len__(self) -> int:
        return len(self.symbols)

    def to_text(self, indices: Iterable[int] | np.ndarray) -> str:
        """Map symbol indices back to their characters.

        Raises
        ------
        AlphabetError
            If any index is outside ``[0, size)``.
        """
        arr = np.asarray(indices)
        if arr.size == 0:
            return ""
        if arr.min() < 0 or arr.max() >= self.size:
            raise AlphabetError("symbol index out of range for this alphabet")
        return "".join(self.symbols[int(i)] for i in arr)


def preset_alphabet(name: str) -> Alphabet:
    """Look up one of the built-in alphabets by name.

    Raises
    ------
    AlphabetError
        If ``name`` is not a preset; the message lists the valid names.
    """
    try:
        chars = PRESETS[name]
    except KeyError:
        raise AlphabetError(
            f"unknown alphabet preset {name!r}; valid presets: {', '.join(sorted(PRESETS))}"
        ) from None
    return Alphabet(tuple(chars))


def custom_alphabet(chars: str | Iterable[str]) -> Alphabet:
    """Build an alphabet from an explicit character sequence.

    The sequence order fixes the symbol indices.  Duplicates, empty input and
    more than 256 characters are rejected.
    """
    symbols = tuple(chars)
    if not symbols:
        raise AlphabetError("alphabet cannot be empty")
    return Alphabet(symbols)


# Cap on the size of intermediate per-chunk buffers in filter_text.
_FILTER_CHUNK_CHARS = 8_000_000


def filter_text(text: str, alphabet: Alphabet, lowercase: bool = True) -> np.ndarray:
    """Map ``text`` onto ``alphabet``, dropping characters outside it.

    Lowercasing (on by default) happens before the mapping, so an alphabet
    of lowercase letters also captures uppercase input.  Returns a uint8
    array of symbol indices; characters not in the alphabet are removed and
    the survivors close ranks.
    """
    if lowercase:
        text = text.lower()
    if not text:
        return np.empty(0, dtype=np.uint8)
    lut = alphabet._lut
    out: list[np.ndarray] = []
    for start in range(0, len(text), _FILTER_CHUNK_CHARS):
        chunk = text[start : start + _FILTER_CHUNK_CHARS]
        # utf-32-le gives one uint32 per codepoint, indexable into the table
        cps = np.frombuffer(chunk.encode("utf-32-le"), dtype=np.uint32)
        mapped = lut[cps]
        out.append(mapped[mapped != _DROP].astype(np.uint8))
    return out[0] if len(out) == 1 else np.concatenate(out)

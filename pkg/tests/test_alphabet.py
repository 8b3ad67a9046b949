import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcmdetect import alphabet as alpha_mod
from fcmdetect.alphabet import (
    AlphabetError,
    PRESETS,
    custom_alphabet,
    filter_text,
    preset_alphabet,
)


class TestPresets:
    def test_sizes(self):
        assert preset_alphabet("sigma1").size == 27
        assert preset_alphabet("sigma2").size == 37
        assert preset_alphabet("sigma3").size == 49
        assert preset_alphabet("sigma4").size == 52

    def test_exact_symbol_order(self):
        assert preset_alphabet("sigma1").as_string() == " abcdefghijklmnopqrstuvwxyz"
        assert preset_alphabet("sigma2").as_string() == "1234567890 abcdefghijklmnopqrstuvwxyz"
        assert preset_alphabet("sigma3").as_string() == (
            "1234567890 abcdefghijklmnopqrstuvwxyz.,!?'\"/\\;:_-"
        )
        assert preset_alphabet("sigma4").as_string() == (
            "1234567890 abcdefghijklmnopqrstuvwxyz.,!?'\"/\\;:_-@#$"
        )

    def test_index_assignments(self):
        s1 = preset_alphabet("sigma1")
        assert s1.index_of[" "] == 0
        assert s1.index_of["a"] == 1
        assert s1.index_of["z"] == 26
        s2 = preset_alphabet("sigma2")
        assert s2.index_of["1"] == 0
        assert s2.index_of["0"] == 9
        assert s2.index_of[" "] == 10
        assert s2.index_of["a"] == 11

    def test_presets_nest(self):
        s2, s3, s4 = (preset_alphabet(n).as_string() for n in ("sigma2", "sigma3", "sigma4"))
        assert s3.startswith(s2)
        assert s4.startswith(s3)
        assert s4[len(s3):] == "@#$"

    def test_unknown_preset_lists_options(self):
        with pytest.raises(AlphabetError, match="sigma1"):
            preset_alphabet("sigma9")

    def test_all_presets_constructible(self):
        for name in PRESETS:
            assert preset_alphabet(name).size >= 2


class TestCustomAlphabet:
    def test_basic(self):
        ab = custom_alphabet("ab")
        assert ab.size == 2
        assert ab.index_of == {"a": 0, "b": 1}
        assert "a" in ab and "c" not in ab

    def test_duplicate_rejected(self):
        with pytest.raises(AlphabetError, match="duplicate"):
            custom_alphabet("aba")

    def test_empty_rejected(self):
        with pytest.raises(AlphabetError):
            custom_alphabet("")

    def test_single_char_rejected(self):
        with pytest.raises(AlphabetError):
            custom_alphabet("a")

    def test_oversize_rejected(self):
        chars = "".join(chr(i) for i in range(0x100, 0x100 + 257))
        with pytest.raises(AlphabetError, match="256"):
            custom_alphabet(chars)

    def test_max_size_accepted(self):
        chars = "".join(chr(i) for i in range(0x100, 0x100 + 256))
        assert custom_alphabet(chars).size == 256

    def test_non_ascii_symbols(self):
        ab = custom_alphabet("abé")
        assert filter_text("éba", ab).tolist() == [2, 1, 0]


class TestFilterText:
    def test_hand_example(self):
        # 'A' lowercases to 'a' (index 1), 'b' is 2, space 0, 'C' becomes 'c' (3)
        assert filter_text("Ab C", preset_alphabet("sigma1")).tolist() == [1, 2, 0, 3]

    def test_without_lowercasing(self):
        out = filter_text("Ab C", preset_alphabet("sigma1"), lowercase=False)
        assert out.tolist() == [2, 0]

    def test_drops_out_of_alphabet(self):
        out = filter_text("héllo, world!", preset_alphabet("sigma1"))
        assert out.tolist() == [8, 12, 12, 15, 0, 23, 15, 18, 12, 4]

    def test_empty_and_all_dropped(self):
        s1 = preset_alphabet("sigma1")
        assert filter_text("", s1).size == 0
        assert filter_text("!!!???", s1).size == 0
        assert filter_text("", s1).dtype == np.uint8

    def test_digits_only_on_sigma1_vs_sigma2(self):
        assert filter_text("2024", preset_alphabet("sigma1")).size == 0
        assert filter_text("2024", preset_alphabet("sigma2")).tolist() == [1, 9, 1, 3]

    def test_chunked_processing_matches(self, monkeypatch):
        text = "the quick brown fox jumps over the lazy dog " * 40
        s1 = preset_alphabet("sigma1")
        whole = filter_text(text, s1)
        monkeypatch.setattr(alpha_mod, "_FILTER_CHUNK_CHARS", 37)
        chunked = filter_text(text, s1)
        assert np.array_equal(whole, chunked)

    def test_to_text_round_trip(self):
        s2 = preset_alphabet("sigma2")
        seq = filter_text("it was 1984 again", s2)
        assert filter_text(s2.to_text(seq), s2).tolist() == seq.tolist()

    def test_to_text_range_check(self):
        with pytest.raises(AlphabetError):
            preset_alphabet("sigma1").to_text([0, 27])


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_filter_output_always_in_range(text):
    s2 = preset_alphabet("sigma2")
    out = filter_text(text, s2)
    assert out.dtype == np.uint8
    assert len(out) <= len(text.lower())
    if out.size:
        assert out.min() >= 0
        assert out.max() < s2.size


@given(st.lists(st.integers(min_value=0, max_value=26), max_size=100))
@settings(max_examples=200, deadline=None)
def test_round_trip_is_identity_on_indices(indices):
    s1 = preset_alphabet("sigma1")
    text = s1.to_text(indices)
    assert filter_text(text, s1).tolist() == indices


@given(st.text(max_size=200))
@settings(max_examples=100, deadline=None)
def test_filter_is_idempotent_through_text(text):
    s1 = preset_alphabet("sigma1")
    once = filter_text(text, s1)
    again = filter_text(s1.to_text(once), s1)
    assert np.array_equal(once, again)

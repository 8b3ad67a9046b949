import numpy as np
import pytest

from fcmdetect.alphabet import custom_alphabet, filter_text, preset_alphabet
from fcmdetect.classifier import BinaryClassifier, ClassifierConfigError, Decision
from fcmdetect.fcm import ContextModel, SmoothingError, TargetTooShortError

from synth import SaladSampler, salad_text

S1 = preset_alphabet("sigma1")


def trained_model(text, k=2, alphabet=S1):
    m = ContextModel(k, alphabet.size)
    m.train(filter_text(text, alphabet))
    return m


@pytest.fixture(scope="module")
def clf():
    ai_sampler, human_sampler = SaladSampler(100, 2000), SaladSampler(200, 2000)
    s2 = preset_alphabet("sigma2")
    ma, mh = ContextModel(3, s2.size), ContextModel(3, s2.size)
    ma.train(filter_text(salad_text(ai_sampler, 20000, 1), s2))
    mh.train(filter_text(salad_text(human_sampler, 20000, 2), s2))
    return BinaryClassifier(
        model_a=ma, model_b=mh, label_a="ai", label_b="human", alphabet=s2, alpha=0.5
    ), ai_sampler, human_sampler


class TestConfigValidation:
    def test_same_labels_rejected(self):
        m1, m2 = trained_model("aaa bbb"), trained_model("ccc ddd")
        with pytest.raises(ClassifierConfigError, match="labels"):
            BinaryClassifier(m1, m2, "ai", "ai", S1, 0.5)

    def test_empty_label_rejected(self):
        m1, m2 = trained_model("aaa bbb"), trained_model("ccc ddd")
        with pytest.raises(ClassifierConfigError):
            BinaryClassifier(m1, m2, "", "human", S1, 0.5)

    def test_k_mismatch_rejected(self):
        m1 = trained_model("aaa bbb", k=2)
        m2 = trained_model("ccc ddd", k=3)
        with pytest.raises(ClassifierConfigError, match="share k"):
            BinaryClassifier(m1, m2, "ai", "human", S1, 0.5)

    def test_alphabet_size_mismatch_rejected(self):
        m1 = trained_model("aaa bbb")
        m2 = ContextModel(2, 5)
        with pytest.raises(ClassifierConfigError, match="alphabet"):
            BinaryClassifier(m1, m2, "ai", "human", S1, 0.5)

    def test_alphabet_model_mismatch_rejected(self):
        ab = custom_alphabet("ab")
        m1, m2 = ContextModel(2, 2), ContextModel(2, 2)
        with pytest.raises(ClassifierConfigError):
            BinaryClassifier(m1, m2, "ai", "human", S1, 0.5)
        BinaryClassifier(m1, m2, "ai", "human", ab, 0.5)  # consistent: fine

    def test_bad_alpha_rejected(self):
        m1, m2 = trained_model("aaa bbb"), trained_model("ccc ddd")
        with pytest.raises(SmoothingError):
            BinaryClassifier(m1, m2, "ai", "human", S1, 0.0)


class TestDecisions:
    def test_prefers_matching_model(self, clf):
        classifier, ai_sampler, human_sampler = clf
        ai_text = salad_text(ai_sampler, 400, 50)
        human_text = salad_text(human_sampler, 400, 51)
        da = classifier.classify(ai_text)
        dh = classifier.classify(human_text)
        assert da.label == "ai"
        assert dh.label == "human"
        assert da.bits["ai"] < da.bits["human"]
        assert dh.bits["human"] < dh.bits["ai"]

    def test_margin_and_coded_symbols(self, clf):
        classifier, ai_sampler, _ = clf
        text = salad_text(ai_sampler, 300, 60)
        seq = filter_text(text, classifier.alphabet)
        d = classifier.classify(text)
        assert d.coded_symbols == len(seq) - classifier.k
        gap = abs(d.bits["ai"] - d.bits["human"])
        assert d.margin_bits_per_symbol == pytest.approx(gap / d.coded_symbols, rel=1e-12)

    def test_identical_models_tie(self):
        text = "abba abba abba"
        m1 = trained_model(text)
        m2 = trained_model(text)
        c = BinaryClassifier(m1, m2, "zeta", "alpha", S1, 0.5)
        d = c.classify("abba bab")
        assert d.tie
        assert d.label == "alpha"  # lexicographically smaller label wins ties
        assert d.bits["zeta"] == d.bits["alpha"]
        assert d.margin_bits_per_symbol == 0.0

    def test_classify_matches_classify_indices(self, clf):
        classifier, ai_sampler, _ = clf
        text = salad_text(ai_sampler, 500, 70)
        seq = filter_text(text, classifier.alphabet, lowercase=classifier.lowercase)
        d1 = classifier.classify(text)
        d2 = classifier.classify_indices(seq)
        assert d1 == d2

    def test_too_short_raises(self, clf):
        classifier, _, _ = clf
        with pytest.raises(TargetTooShortError):
            classifier.classify("ab")
        with pytest.raises(TargetTooShortError):
            classifier.classify("!!!")  # nothing survives filtering

    def test_lowercase_flag_respected(self):
        m1 = trained_model("aaaa aaaa")
        m2 = trained_model("bbbb bbbb")
        c_lower = BinaryClassifier(m1, m2, "ai", "human", S1, 0.5, lowercase=True)
        c_keep = BinaryClassifier(m1, m2, "ai", "human", S1, 0.5, lowercase=False)
        assert c_lower.classify("AAAA").label == "ai"
        with pytest.raises(TargetTooShortError):
            c_keep.classify("AAAA")  # uppercase filtered out entirely


class TestBatch:
    def test_batch_equals_sequential(self, clf):
        classifier, ai_sampler, human_sampler = clf
        texts = [salad_text(ai_sampler, 300, i) for i in range(5)] + [
            salad_text(human_sampler, 300, i) for i in range(5)
        ]
        sequential = [classifier.classify(t) for t in texts]
        batch = classifier.classify_batch(texts)
        assert batch == sequential

    def test_worker_count_does_not_change_results(self, clf):
        classifier, ai_sampler, human_sampler = clf
        texts = [salad_text(ai_sampler, 300, 200 + i) for i in range(6)] + [
            salad_text(human_sampler, 300, 300 + i) for i in range(6)
        ]
        one = classifier.classify_batch(texts, workers=1)
        four = classifier.classify_batch(texts, workers=4)
        assert one == four

    def test_fresh_models_are_safe_to_share_across_workers(self):
        # First use settles lazy model state (pending batches, context
        # table); fanning out before that settled used to race and could
        # drop or misscore items.  Fresh models per trial keep the lazy
        # path exercised.
        s2 = preset_alphabet("sigma2")
        ai_sampler, human_sampler = SaladSampler(100, 2000), SaladSampler(200, 2000)
        texts = [salad_text(ai_sampler, 300, 500 + i) for i in range(8)] + [
            salad_text(human_sampler, 300, 600 + i) for i in range(8)
        ]
        reference = None
        for _ in range(10):
            ma, mh = ContextModel(3, s2.size), ContextModel(3, s2.size)
            ma.train(filter_text(salad_text(ai_sampler, 20000, 1), s2))
            mh.train(filter_text(salad_text(human_sampler, 20000, 2), s2))
            classifier = BinaryClassifier(
                model_a=ma, model_b=mh, label_a="ai", label_b="human", alphabet=s2, alpha=0.5
            )
            results = classifier.classify_batch(texts, workers=8)
            assert all(isinstance(r, Decision) for r in results)
            if reference is None:
                reference = results
            else:
                assert results == reference

    def test_per_item_error_isolation(self, clf):
        classifier, ai_sampler, _ = clf
        good = salad_text(ai_sampler, 300, 400)
        results = classifier.classify_batch([good, "x", good])
        assert isinstance(results[0], Decision)
        assert isinstance(results[1], TargetTooShortError)
        assert isinstance(results[2], Decision)
        assert results[0] == results[2]

    def test_bad_worker_count(self, clf):
        classifier, _, _ = clf
        with pytest.raises(ClassifierConfigError):
            classifier.classify_batch(["abc"], workers=0)

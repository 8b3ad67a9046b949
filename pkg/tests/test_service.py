import pytest
from fastapi.testclient import TestClient
from synth import SaladSampler, salad_text

from fcmdetect.alphabet import filter_text, preset_alphabet
from fcmdetect.classifier import BinaryClassifier
from fcmdetect.fcm import ContextModel
from fcmdetect.metrics import score
from fcmdetect.persistence import save_bundle
from fcmdetect.service.app import create_app, create_default_app

S2 = preset_alphabet("sigma2")


def make_classifier():
    models = {}
    for label, seed in (("ai", 100), ("human", 200)):
        sampler = SaladSampler(seed=seed, vocab_size=2000)
        model = ContextModel(3, S2.size)
        model.train(filter_text(salad_text(sampler, 20_000, seed=1), S2))
        models[label] = model
    return BinaryClassifier(
        model_a=models["ai"],
        model_b=models["human"],
        label_a="ai",
        label_b="human",
        alphabet=S2,
        alpha=0.5,
    )


@pytest.fixture(scope="module")
def clf():
    return make_classifier()


@pytest.fixture(scope="module")
def client(clf):
    return TestClient(create_app(clf))


def sample_texts(label_seed, n, chars=400):
    sampler = SaladSampler(seed=label_seed, vocab_size=2000)
    return [salad_text(sampler, chars, seed=50 + i) for i in range(n)]


class TestHealthAndModel:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_model_info(self, client, clf):
        response = client.get("/model")
        assert response.status_code == 200
        info = response.json()
        assert info["label_a"] == "ai"
        assert info["label_b"] == "human"
        assert info["k"] == 3
        assert info["alpha"] == 0.5
        assert info["lowercase"] is True
        assert info["alphabet"] == S2.as_string()
        assert info["alphabet_size"] == 37
        assert info["entries"]["ai"] > 0
        assert info["trained_symbols"]["human"] == clf.model_b.trained_symbols


class TestClassify:
    def test_batch_with_partial_failure(self, client):
        texts = sample_texts(100, 2)
        payload = {
            "texts": [
                {"id": "t0", "text": texts[0]},
                {"id": "bad", "text": "!!!"},
                {"id": "t1", "text": texts[1]},
            ]
        }
        response = client.post("/classify", json=payload)
        assert response.status_code == 200
        results = response.json()["results"]
        assert [r["id"] for r in results] == ["t0", "bad", "t1"]
        assert results[0]["label"] == "ai"
        assert results[0]["error"] is None
        assert set(results[0]["bits"].keys()) == {"ai", "human"}
        assert results[0]["coded_symbols"] > 0
        assert results[1]["label"] is None
        assert "short" in results[1]["error"] or "scorable" in results[1]["error"]
        assert results[2]["error"] is None

    def test_matches_direct_library_call(self, client, clf):
        text = sample_texts(200, 1)[0]
        response = client.post("/classify", json={"texts": [{"text": text}]})
        row = response.json()["results"][0]
        direct = clf.classify(text)
        assert row["label"] == direct.label == "human"
        assert row["bits"]["ai"] == pytest.approx(direct.bits["ai"], abs=1e-9)
        assert row["margin_bits_per_symbol"] == pytest.approx(
            direct.margin_bits_per_symbol, abs=1e-12
        )
        assert row["tie"] is False

    def test_empty_batch_rejected(self, client):
        response = client.post("/classify", json={"texts": []})
        assert response.status_code == 422

    def test_missing_text_rejected(self, client):
        response = client.post("/classify", json={"texts": [{"id": "x"}]})
        assert response.status_code == 422


class TestEvaluate:
    def test_matches_metrics_module(self, client, clf):
        texts_ai = sample_texts(100, 4)
        texts_human = sample_texts(200, 4)
        samples = [{"text": t, "label": "ai"} for t in texts_ai] + [
            {"text": t, "label": "human"} for t in texts_human
        ]
        response = client.post("/evaluate", json={"samples": samples, "positive_label": "ai"})
        assert response.status_code == 200
        got = response.json()

        pairs = []
        for s in samples:
            decision = clf.classify(s["text"])
            pairs.append((s["label"], decision.label))
        want = score(pairs, positive_label="ai")
        assert got["accuracy"] == pytest.approx(want.accuracy, abs=1e-12)
        assert got["f1"] == pytest.approx(want.f1, abs=1e-12)
        assert got["macro_f1"] == pytest.approx(want.macro_f1, abs=1e-12)
        assert got["matrix"]["tp"] == want.matrix.tp
        assert got["matrix"]["tn"] == want.matrix.tn
        assert got["n_scored"] == 8
        assert got["n_errors"] == 0

    def test_unscorable_samples_counted(self, client):
        samples = [
            {"text": sample_texts(100, 1)[0], "label": "ai"},
            {"text": sample_texts(200, 1)[0], "label": "human"},
            {"text": "!!", "label": "ai"},
        ]
        response = client.post("/evaluate", json={"samples": samples})
        assert response.status_code == 200
        got = response.json()
        assert got["n_scored"] == 2
        assert got["n_errors"] == 1

    def test_nothing_classifiable_is_422(self, client):
        response = client.post(
            "/evaluate", json={"samples": [{"text": "!!", "label": "ai"}]}
        )
        assert response.status_code == 422
        assert "no classifiable" in response.json()["detail"]

    def test_unknown_positive_label_is_422(self, client):
        samples = [
            {"text": sample_texts(100, 1)[0], "label": "ai"},
            {"text": sample_texts(200, 1)[0], "label": "human"},
        ]
        response = client.post(
            "/evaluate", json={"samples": samples, "positive_label": "robot"}
        )
        assert response.status_code == 422

    def test_empty_samples_rejected(self, client):
        response = client.post("/evaluate", json={"samples": []})
        assert response.status_code == 422


class TestAppConstruction:
    def test_from_bundle_path(self, clf, tmp_path):
        save_bundle(clf, tmp_path)
        app = create_app(str(tmp_path))
        with TestClient(app) as c:
            assert c.get("/health").json() == {"status": "ok"}
            assert c.get("/model").json()["k"] == 3

    def test_default_app_needs_env(self, monkeypatch):
        monkeypatch.delenv("FCMDETECT_BUNDLE", raising=False)
        with pytest.raises(RuntimeError, match="FCMDETECT_BUNDLE"):
            create_default_app()

    def test_default_app_from_env(self, clf, tmp_path, monkeypatch):
        save_bundle(clf, tmp_path)
        monkeypatch.setenv("FCMDETECT_BUNDLE", str(tmp_path))
        app = create_default_app()
        with TestClient(app) as c:
            assert c.get("/model").json()["label_a"] == "ai"

"""
Unit tests for the order-1 replacement model.
"""

import json
import random
from fractions import Fraction

import pytest

from app.core.exceptions import (
    AssetValidationError,
    ConfigurationError,
    DataLoadError,
    TrainingError,
    ValidationError,
)
from app.models.corpus import MATCHABLE_KINDS
from app.services.markov_service import (
    MarkovReplacer,
    choose_replacement,
    load_model,
    model_to_json,
    save_model,
    train,
    transition_prob,
)
from app.utils.tokenizer import tokenize
from tests.generators import random_document


@pytest.fixture
def abac_model(make_doc):
    return train([make_doc(body="a b a c a b")])


class TestTrain:
    """Test suite for train()."""

    def test_hand_counted_bigrams(self, abac_model):
        """Test bigram counts of a small body."""
        assert abac_model.counts == {"a": {"b": 2, "c": 1}, "b": {"a": 1}, "c": {"a": 1}}
        assert abac_model.vocab == frozenset({"a", "b", "c"})

    def test_single_token(self, make_doc):
        """Test one token gives a vocabulary and no transitions."""
        model = train([make_doc(body="a")])

        assert model.counts == {}
        assert model.vocab == frozenset({"a"})

    def test_case_folded_and_punctuation_skipped(self, make_doc):
        """Test tokens are case-folded and punctuation is not part of the chain."""
        model = train([make_doc(body="Vaccines, vaccines! #Health")])

        assert model.counts == {"vaccines": {"vaccines": 1, "#health": 1}}

    def test_deterministic_and_order_independent(self):
        """Test the model does not depend on document order."""
        rng = random.Random(8)
        docs = [random_document(rng, f"d{i}") for i in range(10)]
        docs[0] = docs[0].model_copy(update={"body": "safe vaccines"})

        shuffled = docs[:]
        rng.shuffle(shuffled)

        assert train(docs) == train(docs)
        assert train(docs) == train(shuffled)

    def test_empty_corpus(self):
        """Test an empty corpus cannot be trained on."""
        with pytest.raises(TrainingError):
            train([])

    def test_corpus_without_tokens(self, make_doc):
        """Test bodies with only punctuation are a training error."""
        with pytest.raises(TrainingError, match="no tokens"):
            train([make_doc(body="!!! ..."), make_doc(id="t2", body="")])

    @pytest.mark.parametrize("smoothing", ["-1", "abc", "1/0"])
    def test_invalid_smoothing(self, make_doc, smoothing):
        """Test smoothing must be a non-negative rational."""
        with pytest.raises(ValidationError):
            train([make_doc()], smoothing=smoothing)


class TestTransitionProb:
    """Test suite for transition_prob()."""

    def test_hand_counted_probability(self, abac_model):
        """Test P(b|a) from the counts."""
        assert transition_prob(abac_model, "a", "b") == Fraction(2, 3)
        assert transition_prob(abac_model, "A", "B") == Fraction(2, 3)

    def test_unseen_state(self, abac_model):
        """Test an unseen previous token has probability 0 without smoothing."""
        assert transition_prob(abac_model, "zzz", "a") == 0

    def test_smoothing(self, make_doc):
        """Test add-k smoothing of an unseen transition."""
        model = train([make_doc(body="a b a c a b")], smoothing=1)

        assert transition_prob(model, "a", "a") == Fraction(1, 6)
        assert transition_prob(model, "zzz", "a") == Fraction(1, 3)

    @pytest.mark.parametrize("smoothing", [0, 1, "1/2"])
    def test_rows_are_normalized(self, smoothing):
        """Test every seen state sums to one over the vocabulary."""
        rng = random.Random(13)
        model = train([random_document(rng, f"d{i}") for i in range(20)], smoothing=smoothing)

        for prev in model.counts:
            total = sum(transition_prob(model, prev, nxt) for nxt in model.vocab)
            assert abs(float(total) - 1.0) < 1e-9

    @pytest.mark.slow
    @pytest.mark.parametrize("smoothing", [0, 1, "1/3"])
    def test_matches_brute_force_counter(self, smoothing):
        """Test every probability equals a naive pair count, exactly."""
        rng = random.Random(14)
        k = Fraction(smoothing)
        for _ in range(60):
            docs = [random_document(rng, f"d{i}") for i in range(rng.randint(1, 8))]
            chains = [
                [t.text.casefold() for t in tokenize(d.body) if t.kind in MATCHABLE_KINDS]
                for d in docs
            ]
            pairs = [(c[i], c[i + 1]) for c in chains for i in range(len(c) - 1)]
            vocab = sorted({token for c in chains for token in c})
            if not vocab:
                with pytest.raises(TrainingError):
                    train(docs, smoothing=smoothing)
                continue

            model = train(docs, smoothing=smoothing)

            assert sorted(model.vocab) == vocab
            for prev in vocab + ["unseen"]:
                row_total = sum(1 for p, _ in pairs if p == prev)
                for nxt in vocab + ["unseen"]:
                    denominator = row_total + k * len(vocab)
                    expected = (
                        Fraction(0)
                        if denominator == 0
                        else (pairs.count((prev, nxt)) + k) / denominator
                    )
                    assert transition_prob(model, prev, nxt) == expected


class TestChooseReplacement:
    """Test suite for choose_replacement() and MarkovReplacer."""

    def test_most_probable_candidate(self, abac_model):
        """Test the argmax wins."""
        assert choose_replacement(abac_model, "a", ["b", "c"]) == "b"

    def test_single_candidate(self, abac_model):
        """Test a lone candidate is returned."""
        assert choose_replacement(abac_model, "a", ["c"]) == "c"

    def test_ties_go_to_smallest_text(self, abac_model):
        """Test all-zero probabilities fall back to lexicographic order."""
        assert choose_replacement(abac_model, "zzz", ["y", "x"]) == "x"

    def test_empty_candidates(self, abac_model):
        """Test empty candidates is a validation error."""
        with pytest.raises(ValidationError):
            choose_replacement(abac_model, "a", [])

    def test_result_is_a_candidate(self):
        """Test the output always comes from the candidates."""
        rng = random.Random(21)
        model = train([random_document(rng, f"d{i}") for i in range(10)])
        vocab = sorted(model.vocab)
        for _ in range(200):
            candidates = rng.sample(vocab, rng.randint(1, min(4, len(vocab))))
            assert choose_replacement(model, rng.choice(vocab), candidates) in candidates

    def test_replacer_defaults_to_vocabulary(self, abac_model):
        """Test the replacer never proposes the matched token itself."""
        replacer = MarkovReplacer(abac_model)

        assert replacer("a", "b", None) == "c"

    def test_replacer_without_pool(self, make_doc):
        """Test a model whose only token is the match has nothing to offer."""
        replacer = MarkovReplacer(train([make_doc(body="a")]))

        with pytest.raises(ConfigurationError):
            replacer("", "a", None)


class TestPersistence:
    """Test suite for model files."""

    def test_json_layout(self, make_doc):
        """Test the persisted fields and rational smoothing."""
        model = train([make_doc(body="a b")], smoothing="1/2")

        assert model_to_json(model) == {
            "order": 1,
            "smoothing": "1/2",
            "vocab": ["a", "b"],
            "counts": {"a": {"b": 1}},
        }

    def test_save_and_load(self, abac_model, tmp_path):
        """Test a saved model loads back equal."""
        path = tmp_path / "models" / "model.json"

        save_model(abac_model, path)

        assert load_model(path) == abac_model

    def test_vocab_derived_when_absent(self, tmp_path):
        """Test a file with counts only still loads."""
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"order": 1, "smoothing": 0, "counts": {"a": {"b": 1}}}))

        assert load_model(path).vocab == frozenset({"a", "b"})

    def test_missing_file(self, tmp_path):
        """Test a missing model file is a load error."""
        with pytest.raises(DataLoadError):
            load_model(tmp_path / "none.json")

    def test_invalid_counts(self, tmp_path):
        """Test non-positive counts are rejected."""
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"counts": {"a": {"b": 0}}}))

        with pytest.raises(AssetValidationError):
            load_model(path)

"""
Unit tests for the integrity detector.

Covers alignment against an exhaustive oracle, metric factor recovery,
scoring, and the replay guarantee of recovered edit scripts.
"""

import itertools
import random
from fractions import Fraction
from functools import lru_cache

import pytest

from app.core.exceptions import ValidationError
from app.models.corpus import Metrics, Thread
from app.models.detection import AlignKind, ValenceLexicon
from app.models.rules import Edit, EditOp, Location, RuleSet
from app.services.detect_service import (
    align,
    alignment,
    classify,
    detect,
    detect_corpus,
    estimate_metric_factor,
)
from app.services.perturb_service import apply_ruleset, perturb_document, replay_document
from app.utils.tokenizer import tokenize
from tests.generators import random_document, random_ruleset


def brute_force_distance(a, b):
    """Plain recursive edit distance."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            go(i + 1, j + 1) + (a[i] != b[j]),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )

    return go(0, 0)


def prefix_distance(a, b):
    """Row-by-row edit distance over prefixes."""
    previous = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        current = [i]
        for j, y in enumerate(b, start=1):
            current.append(min(previous[j - 1] + (x != y), previous[j] + 1, current[j - 1] + 1))
        previous = current
    return previous[-1]


def apply_script(a, script):
    """Rebuild the delivered list from the original and a full alignment path."""
    out = []
    for op in script:
        if op.kind in (AlignKind.MATCH, AlignKind.SUBSTITUTE, AlignKind.INSERT):
            out.append(op.delivered)
    return out


def words(text):
    return [t.text for t in tokenize(text)]


def edit(op, original, replacement):
    return Edit(op=op, location=Location.root("t1"), original=original, replacement=replacement)


class TestAlign:
    """Test suite for align()."""

    def test_single_substitution(self):
        """Test one differing token is one substitution."""
        script = align(["A", "B", "C"], ["A", "X", "C"])

        assert [(op.kind, op.original_index, op.original, op.delivered) for op in script] == [
            (AlignKind.SUBSTITUTE, 1, "B", "X")
        ]

    def test_identical_lists(self):
        """Test identical lists have an empty script."""
        assert align(["A", "B"], ["A", "B"]) == []

    def test_manipulated_sentence(self):
        """Test substitutions are preferred and placed leftmost."""
        script = align(words("do not cause wrong"), words("don't cause right"))

        assert [(op.kind, op.original, op.delivered) for op in script] == [
            (AlignKind.SUBSTITUTE, "do", "don't"),
            (AlignKind.DELETE, "not", None),
            (AlignKind.SUBSTITUTE, "wrong", "right"),
        ]

    def test_accepts_tokens(self):
        """Test Token lists align by text."""
        script = align(tokenize("Many agree."), tokenize("No agree."))

        assert [(op.original, op.delivered) for op in script] == [("Many", "No")]

    def test_empty_sides(self):
        """Test alignment against an empty list is all inserts or all deletes."""
        assert [op.kind for op in align([], ["a", "b"])] == [AlignKind.INSERT] * 2
        assert [op.kind for op in align(["a"], [])] == [AlignKind.DELETE]

    def test_cost_matches_exhaustive_oracle(self):
        """Test the script length is the edit distance for every short pair."""
        alphabet = ["a", "b", "c"]
        lists = [list(p) for n in range(0, 5) for p in itertools.product(alphabet, repeat=n)]
        for a, b in itertools.product(lists, repeat=2):
            assert len(align(a, b)) == brute_force_distance(tuple(a), tuple(b))

    @pytest.mark.slow
    def test_cost_matches_oracle_for_every_pair_up_to_eight(self):
        """Test every pair of lists of up to eight tokens over a two-letter alphabet."""
        lists = [p for n in range(0, 9) for p in itertools.product("ab", repeat=n)]
        for a in lists:
            for b in lists:
                path = alignment(a, b)
                edits = sum(1 for op in path if op.kind is not AlignKind.MATCH)
                assert edits == prefix_distance(a, b)
                assert apply_script(a, path) == list(b)

    @pytest.mark.parametrize(
        "original,delivered,expected",
        [
            (["a"], ["a", "a"], [(AlignKind.INSERT, None, 0)]),
            (["x", "b", "b"], ["x", "b"], [(AlignKind.DELETE, 1, None)]),
            (["b", "b", "b"], ["b"], [(AlignKind.DELETE, 0, None), (AlignKind.DELETE, 1, None)]),
            (["a", "b"], ["b", "a"], [(AlignKind.SUBSTITUTE, 0, 0), (AlignKind.SUBSTITUTE, 1, 1)]),
        ],
    )
    def test_edits_are_leftmost(self, original, delivered, expected):
        """Test edits land at the leftmost position within repeated tokens."""
        script = align(original, delivered)

        assert [(op.kind, op.original_index, op.delivered_index) for op in script] == expected

    def test_runs_of_one_token(self):
        """Test growing or shrinking a run edits its front."""
        for p in range(0, 6):
            for q in range(0, 6):
                script = align(["t"] * p, ["t"] * q)
                if q >= p:
                    assert [op.delivered_index for op in script] == list(range(q - p))
                    assert all(op.kind is AlignKind.INSERT for op in script)
                else:
                    assert [op.original_index for op in script] == list(range(p - q))
                    assert all(op.kind is AlignKind.DELETE for op in script)

    def test_cost_matches_oracle_up_to_eight_tokens(self):
        """Test random lists of up to eight tokens."""
        rng = random.Random(31)
        for _ in range(2000):
            a = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
            b = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
            path = alignment(a, b)
            assert len(align(a, b)) == brute_force_distance(tuple(a), tuple(b))
            assert apply_script(a, path) == b

    def test_deterministic(self):
        """Test the same input always gives the same script."""
        a, b = words("a b c d e"), words("b x d e f")

        assert align(a, b) == align(a, b)


class TestEstimateMetricFactor:
    """Test suite for estimate_metric_factor()."""

    @pytest.mark.parametrize(
        "original,delivered,expected",
        [
            ((8, 40, 137), (32, 160, 548), Fraction(4)),
            ((12, 45, 160), (24, 90, 320), Fraction(2)),
            ((10, 20, 30), (5, 10, 15), Fraction(1, 2)),
            ((2, 4, 6), (3, 6, 9), Fraction(3, 2)),
            ((10, 10, 10), (10, 10, 10), None),
            ((8, 40, 137), (16, 160, 548), None),
            ((0, 0, 0), (1, 1, 1), None),
        ],
    )
    def test_examples(self, original, delivered, expected):
        """Test uniform factors are recovered and inconsistent ratios are not."""
        as_metrics = [Metrics(replies=r, retweets=t, likes=k) for r, t, k in (original, delivered)]

        assert estimate_metric_factor(*as_metrics) == expected

    def test_prefers_smallest_denominator(self):
        """Test rounding ambiguity resolves to the simplest factor."""
        original = Metrics(replies=1, retweets=1, likes=1)
        delivered = Metrics(replies=2, retweets=2, likes=2)

        assert estimate_metric_factor(original, delivered) == 2


class TestClassify:
    """Test suite for classify()."""

    def test_valence_pair_swap(self, lexicon):
        """Test wrong to right is an inversion."""
        report = classify([edit(EditOp.SUBSTITUTE, "wrong", "right")], [], None, lexicon)

        assert report.valence_inversion is True
        assert report.severity == 0.3125

    def test_negator_insert_and_delete(self, lexicon):
        """Test adding or dropping a negator is an inversion."""
        inserted = classify([edit(EditOp.INSERT, "", "don't")], [], None, lexicon)
        deleted = classify([edit(EditOp.DELETE, "not", "")], [], None, lexicon)

        assert inserted.valence_inversion and deleted.valence_inversion

    def test_neutral_substitution(self, lexicon):
        """Test a swap outside the lexicon is not an inversion."""
        report = classify([edit(EditOp.SUBSTITUTE, "clinic", "hospital")], [], None, lexicon)

        assert report.valence_inversion is False
        assert report.severity == 0.0625

    def test_clean(self, lexicon):
        """Test no edits and no signatures score zero."""
        report = classify([], [], None, lexicon)

        assert report.severity == 0
        assert report.clean

    def test_severity_is_capped(self, lexicon):
        """Test every signature together scores exactly one."""
        edits = [edit(EditOp.SUBSTITUTE, "wrong", "right")] * 6
        report = classify(edits, [("#provax", "#antivax")], Fraction(4), lexicon)

        assert report.severity == 1.0

    def test_severity_is_monotone(self, lexicon):
        """Test adding a signature never lowers the score."""
        base_edits = [edit(EditOp.SUBSTITUTE, "clinic", "hospital")]
        extra = [edit(EditOp.SUBSTITUTE, "safe", "dangerous")]
        flips = [("#provax", "#antivax")]
        previous = 0.0
        for edits, hashtag_flips, factor in [
            (base_edits, [], None),
            (base_edits, [], Fraction(2)),
            (base_edits, flips, Fraction(2)),
            (base_edits + extra, flips, Fraction(2)),
        ]:
            severity = classify(edits, hashtag_flips, factor, lexicon).severity
            assert severity >= previous
            previous = severity

    def test_hashtag_pair_counts_as_inversion(self, lexicon):
        """Test opposite hashtags resolve through the lexicon."""
        report = classify([edit(EditOp.HASHTAG_SWAP, "#provax", "#antivax")], [], None, lexicon)

        assert report.valence_inversion is True


class TestDetect:
    """Test suite for detect() and detect_corpus()."""

    def test_study_sample(self, bundled_corpus, study_rules, lexicon):
        """Test the study rendering trips every signature."""
        original = next(d for d in bundled_corpus if d.id == "study-1")
        delivered, _ = perturb_document(original, study_rules)

        report = detect(original, delivered, lexicon)

        assert report.valence_inversion is True
        assert report.metric_factor == 4
        assert report.hashtag_flips == (
            ("#provax", "#antivax"),
            ("#vaccineswork", "#vaccinesdontwork"),
        )
        assert report.severity == 1.0
        assert len(report.edits) == 4

    def test_pilot_sample(self, bundled_corpus, pilot_rules, lexicon):
        """Test the pilot rendering without hashtag flips."""
        original = next(d for d in bundled_corpus if d.id == "pilot-1")
        delivered, _ = perturb_document(original, pilot_rules)

        report = detect(original, delivered, lexicon)

        assert [e.op for e in report.edits] == [
            EditOp.DELETE,
            EditOp.INSERT,
            EditOp.SUBSTITUTE,
            EditOp.METRIC_SCALE,
        ]
        assert report.metric_factor == 2
        assert report.hashtag_flips == ()
        assert report.severity == 0.75

    def test_no_false_positives(self, bundled_corpus, lexicon):
        """Test every bundled document compared with itself is clean."""
        for report in detect_corpus(bundled_corpus, bundled_corpus, lexicon):
            assert report.severity == 0
            assert report.edits == ()

    def test_inconsistent_metrics(self, make_doc, lexicon):
        """Test non-uniform metric changes are still an edit but carry no factor."""
        report = detect(make_doc(metrics=(8, 40, 137)), make_doc(metrics=(16, 160, 548)), lexicon)

        assert report.metric_factor is None
        assert [e.op for e in report.edits] == [EditOp.METRIC_SCALE]
        assert report.severity > 0

    def test_whitespace_only_change(self, make_doc, lexicon):
        """Test a respacing is recovered so replay stays exact."""
        original, delivered = make_doc(body="a  b"), make_doc(body="a b")

        report = detect(original, delivered, lexicon)

        assert [e.op for e in report.edits] == [EditOp.RESPACE]
        assert replay_document(original, report.edits) == delivered

    def test_mismatched_ids(self, make_doc, lexicon):
        """Test only renderings of the same document can be compared."""
        with pytest.raises(ValidationError):
            detect(make_doc(id="a"), make_doc(id="b"), lexicon)

    def test_missing_delivered_document(self, make_doc, lexicon):
        """Test detect_corpus requires every original id."""
        with pytest.raises(ValidationError):
            detect_corpus([make_doc(id="a")], [], lexicon)

    @pytest.mark.slow
    def test_recovered_edits_replay(self, lexicon):
        """Test recovered scripts replay onto the original exactly."""
        rng = random.Random(77)
        for _ in range(1000):
            root = random_document(rng, "root")
            comments = tuple(
                random_document(rng, f"c{i}", parent_id="root") for i in range(rng.randint(0, 2))
            )
            thread = Thread(root=root, comments=comments)
            perturbed, _ = apply_ruleset(thread, RuleSet.model_validate(random_ruleset(rng)))

            for original, delivered in zip(thread.documents, perturbed.documents, strict=True):
                report = detect(original, delivered, lexicon)
                assert replay_document(original, report.edits) == delivered
                assert (report.severity == 0) == (original == delivered)

    def test_report_serializes(self, bundled_corpus, study_rules, lexicon):
        """Test reports dump to JSON with a rational factor."""
        original = next(d for d in bundled_corpus if d.id == "study-1")
        delivered, _ = perturb_document(original, study_rules)

        dumped = detect(original, delivered, lexicon).model_dump(mode="json")

        assert dumped["metric_factor"] == 4
        assert dumped["document_id"] == "study-1"


def test_lexicon_is_symmetric(lexicon):
    """Test every bundled pair reads both ways."""
    for token, opposite in lexicon.pairs.items():
        assert lexicon.pairs[opposite] == token
    with pytest.raises(ValueError):
        ValenceLexicon(pairs={"a": "b"})

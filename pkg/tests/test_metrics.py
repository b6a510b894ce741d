from __future__ import annotations

import itertools

import numpy as np
import pytest

from speechpipe import (
    ParameterError,
    SpeakerSegment,
    SpeakerTimeline,
    StructuralError,
    TimeSpan,
    UndefinedMetricError,
    der,
    merge_der_reports,
    merge_wer_reports,
    normalize_text,
    optimal_assignment,
    wer,
)
from synth import edit_distance_oracle, frame_der_oracle, random_timeline


def seg(a, b, spk):
    return SpeakerSegment(TimeSpan(a, b), spk)


def timeline(rid, *segments):
    return SpeakerTimeline.from_segments(rid, list(segments))


class TestNormalizeText:
    def test_whitespace_collapse(self):
        assert normalize_text("  ক   খ ") == "ক খ"

    def test_nfc_composition(self):
        decomposed = "éclair"
        composed = "éclair"
        assert normalize_text(decomposed) == normalize_text(composed) == composed

    def test_already_normalized_identity(self):
        assert normalize_text("ami bhalo achi") == "ami bhalo achi"

    def test_tabs_and_newlines(self):
        assert normalize_text("a\tb\nc") == "a b c"

    def test_punctuation_kept_by_default(self):
        assert normalize_text("কথা। আর, কথা") == "কথা। আর, কথা"

    def test_punctuation_strip_opt_in(self):
        assert normalize_text("কথা। আর, কথা", strip_punctuation=True) == "কথা আর কথা"
        assert wer("কথা। আর", "কথা আর", strip_punctuation=True).wer == 0.0


class TestWer:
    def test_identical(self):
        report = wer("a b c", "a b c")
        assert (report.substitutions, report.deletions, report.insertions) == (0, 0, 0)
        assert report.wer == 0.0

    def test_single_substitution(self):
        report = wer("a b c", "a x c")
        assert report.substitutions == 1
        assert report.wer == pytest.approx(1 / 3)

    def test_empty_hypothesis_all_deletions(self):
        report = wer("a b", "")
        assert report.deletions == 2
        assert report.wer == 1.0

    def test_empty_reference_rejected(self):
        with pytest.raises(UndefinedMetricError):
            wer("   ", "a b")

    def test_counts_sum_to_edit_distance(self):
        rng = np.random.default_rng(1)
        alphabet = list("abcde")
        for _ in range(300):
            ref = [alphabet[i] for i in rng.integers(0, 5, rng.integers(1, 21))]
            hyp = [alphabet[i] for i in rng.integers(0, 5, rng.integers(0, 21))]
            report = wer(" ".join(ref), " ".join(hyp))
            edits = edit_distance_oracle(ref, hyp)
            assert report.substitutions + report.deletions + report.insertions == edits
            assert report.wer == edits / len(ref)
            # alignment bookkeeping: matches + subs + dels cover the reference
            assert report.substitutions + report.deletions <= len(ref)
            assert report.substitutions + report.insertions <= len(hyp)

    def test_edit_roles_swap_between_directions(self):
        forward = wer("a b c d", "a c d e")
        backward = wer("a c d e", "a b c d")
        assert forward.insertions == backward.deletions
        assert forward.deletions == backward.insertions
        assert forward.substitutions == backward.substitutions

    def test_micro_average(self):
        merged = merge_wer_reports([wer("a b", "a x"), wer("c", "c")])
        assert merged.ref_word_count == 3
        assert merged.wer == pytest.approx(1 / 3)


class TestOptimalAssignment:
    def test_identity_diagonal(self):
        cost = np.ones((3, 3)) - np.eye(3)
        pairs, total = optimal_assignment(cost)
        assert pairs == [(0, 0), (1, 1), (2, 2)]
        assert total == 0.0

    def test_single_cell(self):
        pairs, total = optimal_assignment(np.array([[7.0]]))
        assert pairs == [(0, 0)]
        assert total == 7.0

    def test_matches_exhaustive_on_random_matrices(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            cost = rng.integers(0, 50, size=(6, 6)).astype(float)
            _, total = optimal_assignment(cost)
            brute = min(
                sum(cost[i, p[i]] for i in range(6))
                for p in itertools.permutations(range(6))
            )
            assert total == brute

    def test_rectangular(self):
        cost = np.array([[1.0, 9.0, 9.0], [9.0, 9.0, 2.0]])
        pairs, total = optimal_assignment(cost)
        assert pairs == [(0, 0), (1, 2)]
        assert total == 3.0

    def test_non_finite_rejected(self):
        with pytest.raises(ParameterError):
            optimal_assignment(np.array([[np.nan]]))


class TestDer:
    def test_permuted_labels_score_zero(self):
        ref = timeline("r", seg(0, 10, "A"), seg(12, 20, "B"))
        hyp = timeline("r", seg(0, 10, "X"), seg(12, 20, "Y"))
        report = der(ref, hyp)
        assert report.der == 0.0
        assert report.mapping == {"X": "A", "Y": "B"}

    def test_hand_case_missed_tail(self):
        report = der(timeline("r", seg(0, 10, "A")), timeline("r", seg(0, 8, "X")))
        assert report.missed == pytest.approx(2.0)
        assert report.false_alarm == 0.0
        assert report.confusion == 0.0
        assert report.der == pytest.approx(0.2)

    def test_hand_case_confusion_half(self):
        ref = timeline("r", seg(0, 5, "A"), seg(5, 10, "B"))
        hyp = timeline("r", seg(0, 10, "X"))
        report = der(ref, hyp)
        assert report.missed == 0.0
        assert report.false_alarm == 0.0
        assert report.confusion == pytest.approx(5.0)
        assert report.der == pytest.approx(0.5)

    def test_self_score_zero_any_collar(self):
        rng = np.random.default_rng(3)
        for collar in (0.0, 0.05, 0.25):
            t = random_timeline(rng, "r", 3)
            assert der(t, t, collar=collar).der == 0.0

    def test_mismatched_recording_ids(self):
        with pytest.raises(StructuralError):
            der(timeline("a", seg(0, 1, "A")), timeline("b", seg(0, 1, "A")))

    def test_empty_reference_undefined(self):
        with pytest.raises(UndefinedMetricError):
            der(timeline("r"), timeline("r", seg(0, 1, "X")))

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(4)
        ref = random_timeline(rng, "r", 3)
        hyp = random_timeline(rng, "r", 4)
        base = der(ref, hyp)
        renamed_hyp = SpeakerTimeline(
            "r", [seg(s.span.start, s.span.end, f"Z{s.speaker}") for s in hyp.segments]
        )
        renamed_ref = SpeakerTimeline(
            "r", [seg(s.span.start, s.span.end, f"Q{s.speaker}") for s in ref.segments]
        )
        assert der(renamed_ref, renamed_hyp).der == base.der

    def test_collar_never_increases_total_ref(self):
        rng = np.random.default_rng(5)
        ref = random_timeline(rng, "r", 3)
        hyp = random_timeline(rng, "r", 3)
        totals = [der(ref, hyp, collar=c).total_ref for c in (0.0, 0.05, 0.1, 0.25)]
        assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))

    def test_matches_frame_oracle(self):
        rng = np.random.default_rng(6)
        for trial in range(40):
            ref = random_timeline(rng, "r", int(rng.integers(1, 6)))
            hyp = random_timeline(rng, "r", int(rng.integers(1, 6)))
            if not ref.segments:
                continue
            collar = float(rng.choice([0.0, 0.0, 0.05, 0.25]))
            skip = bool(rng.integers(0, 2))
            oracle = frame_der_oracle(ref, hyp, collar=collar, skip_overlap=skip)
            if oracle is None:
                continue
            report = der(ref, hyp, collar=collar, skip_overlap=skip)
            assert report.der == pytest.approx(oracle[0], rel=0.002, abs=1e-9)

    def test_skip_overlap_excludes_overlap_regions(self):
        ref = timeline("r", seg(0, 10, "A"), seg(5, 15, "B"))
        hyp = timeline("r", seg(0, 15, "X"))
        full = der(ref, hyp)
        skipped = der(ref, hyp, skip_overlap=True)
        assert full.total_ref == pytest.approx(20.0)
        assert skipped.total_ref == pytest.approx(10.0)  # [5,10] counted twice in full
        assert skipped.missed == 0.0

    def test_hyp_only_speech_is_false_alarm(self):
        ref = timeline("r", seg(0, 5, "A"))
        hyp = timeline("r", seg(0, 5, "X"), seg(8, 11, "X"))
        report = der(ref, hyp)
        assert report.false_alarm == pytest.approx(3.0)
        assert report.der == pytest.approx(0.6)

    def test_micro_average_merge(self):
        r1 = der(timeline("a", seg(0, 10, "A")), timeline("a", seg(0, 8, "X")))
        r2 = der(timeline("b", seg(0, 10, "A")), timeline("b", seg(0, 10, "X")))
        merged = merge_der_reports([r1, r2])
        assert merged.total_ref == pytest.approx(20.0)
        assert merged.der == pytest.approx(0.1)

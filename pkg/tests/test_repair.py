from __future__ import annotations

import numpy as np
import pytest

from speechpipe import (
    FormatError,
    format_seconds,
    parse_segments_csv,
    repair_rows,
    rows_to_csv,
    write_segments_csv,
)
from synth import clean_rows, corrupt_row

HEADER = "id,start,end,speaker"


def as_csv(rows):
    return HEADER + "\n" + "\n".join(rows) + "\n"


class TestStrictMode:
    def test_clean_file_all_ok(self):
        rows = clean_rows(50, seed=1)
        outcomes, report = repair_rows(as_csv(rows), strict=True)
        assert report.parsed_ok == 50
        assert report.repaired == report.dropped == 0

    def test_malformed_row_raises_with_line(self):
        text = as_csv(["rec1,0.0,5.0,A", "rec1, 1.0 ,2.0,B"])
        with pytest.raises(FormatError, match="line 3"):
            parse_segments_csv(text, strict=True)

    def test_missing_header(self):
        with pytest.raises(FormatError, match="header"):
            parse_segments_csv("a,b,c,d\n", strict=True)


class TestRepairRules:
    def test_trim_whitespace(self):
        timelines, report = parse_segments_csv(as_csv(["rec1, 0.0 , 5.2 ,SPK_1"]))
        assert report.repaired == 1
        assert report.rules_fired == {"trim-whitespace": 1}
        assert timelines[0].segments[0].span.end == 5.2

    def test_swapped_times(self):
        timelines, report = parse_segments_csv(as_csv(["rec1,5.2,0.0,SPK_1"]))
        assert report.rules_fired == {"swap-times": 1}
        span = timelines[0].segments[0].span
        assert (span.start, span.end) == (0.0, 5.2)

    def test_decimal_comma(self):
        timelines, report = parse_segments_csv(as_csv(["rec1,0,5,12,3,SPK_1"]))
        assert report.rules_fired == {"decimal-comma": 1}
        span = timelines[0].segments[0].span
        assert (span.start, span.end) == (0.5, 12.3)

    def test_wrapping_quotes(self):
        timelines, report = parse_segments_csv(as_csv(['rec1,"0.5","5.2",SPK_1']))
        assert report.rules_fired == {"strip-quotes": 1}
        assert timelines[0].segments[0].span.start == 0.5

    def test_duplicate_delimiters(self):
        timelines, report = parse_segments_csv(as_csv(["rec1,,0.5,5.2,SPK_1"]))
        assert report.rules_fired == {"collapse-delimiters": 1}
        assert timelines[0].segments[0].span.start == 0.5

    def test_duplicate_delimiter_with_integer_times(self):
        # The delimiter fix must win here, not a bogus decimal-comma merge.
        timelines, report = parse_segments_csv(as_csv(["rec1,,5,10,SPK_1"]))
        assert report.repaired == 1
        span = timelines[0].segments[0].span
        assert (span.start, span.end) == (5.0, 10.0)

    def test_compound_delimiter_then_swap(self):
        timelines, report = parse_segments_csv(as_csv(["rec1,,5.2,0.0,SPK_1"]))
        assert report.repaired == 1
        span = timelines[0].segments[0].span
        assert (span.start, span.end) == (0.0, 5.2)

    def test_unrecoverable_dropped(self):
        _, report = parse_segments_csv(as_csv(["rec1,abc,def,SPK_1"]))
        assert report.dropped == 1
        assert report.rules_fired == {}

    def test_report_accounting(self):
        rows = ["rec1,0.0,5.0,A", "rec1, 1.0 ,2.0,B", "rec1,x,y,C"]
        _, report = parse_segments_csv(as_csv(rows))
        assert report.total_lines == 3
        assert (report.parsed_ok, report.repaired, report.dropped) == (1, 1, 1)

    def test_strict_acceptable_rows_never_altered(self):
        # Quotes are legal label characters; a strict-valid row keeps them.
        rows = ['rec1,0.0,5.0,"A"']
        outcomes, report = repair_rows(as_csv(rows))
        assert report.parsed_ok == 1
        assert outcomes[0].record == ("rec1", 0.0, 5.0, '"A"')
        assert rows_to_csv(outcomes).splitlines()[1] == rows[0]


class TestCorruptionCorpus:
    def test_every_single_corruption_recovers(self):
        rng = np.random.default_rng(33)
        originals = clean_rows(300, seed=7)
        corrupted, names = [], []
        for row in originals:
            name, bad = corrupt_row(row, rng)
            corrupted.append(bad)
            names.append(name)
        outcomes, report = repair_rows(as_csv(corrupted))
        assert report.parsed_ok == 0  # every corruption defeats strict parsing
        recovered = rows_to_csv(outcomes).splitlines()[1:]
        misses = [
            (names[i], originals[i], corrupted[i])
            for i, row in enumerate(recovered)
            if row != originals[i]
        ]
        assert not misses, misses[:5]

    def test_strict_rejects_all_corrupted(self):
        rng = np.random.default_rng(5)
        originals = clean_rows(200, seed=8)
        corrupted = [corrupt_row(row, rng)[1] for row in originals]
        _, report = repair_rows(as_csv(corrupted), strict=True)
        assert report.parsed_ok == 0
        assert report.dropped == 200


class TestWriters:
    def test_format_seconds(self):
        assert format_seconds(5.2) == "5.2"
        assert format_seconds(5.0) == "5"
        assert format_seconds(0.001) == "0.001"
        assert format_seconds(12.345) == "12.345"

    def test_csv_round_trip(self):
        rows = clean_rows(40, seed=3)
        timelines, _ = parse_segments_csv(as_csv(rows))
        text = write_segments_csv(timelines)
        timelines2, report = parse_segments_csv(text)
        assert report.parsed_ok == report.total_lines
        assert write_segments_csv(timelines2) == text
        assert [t.segments for t in timelines2] == [t.segments for t in timelines]

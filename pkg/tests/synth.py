"""Shared synthetic-data generators and independent oracles for the test suite.

Oracles here deliberately avoid the library's own algorithms: plain-python
dynamic programming for edit distance, 1 ms frame counting for DER,
exhaustive permutations for assignment, and a literal re-simulation of the
merge rule for agglomerative clustering.
"""

from __future__ import annotations

import itertools

import numpy as np

from speechpipe import SpeakerSegment, SpeakerTimeline, TimeSpan, Waveform

SR = 16000


# ---------------------------------------------------------------------------
# Audio generators

def tone(freq: float, seconds: float, amplitude: float = 0.5, sr: int = SR) -> np.ndarray:
    t = np.arange(int(seconds * sr)) / sr
    return (amplitude * np.sin(2 * np.pi * freq * t)).astype(np.float32)


def silence(seconds: float, sr: int = SR) -> np.ndarray:
    return np.zeros(int(seconds * sr), dtype=np.float32)


def music_proxy(seconds: float, seed: int, sr: int = SR) -> Waveform:
    """Dense overlapping tone chords with sharp onsets every 100 ms."""
    rng = np.random.default_rng(seed)
    n = int(seconds * sr)
    x = np.zeros(n)
    t0 = 0.0
    while t0 < seconds:
        start = int(t0 * sr)
        length = min(int(0.4 * sr), n - start)
        if length <= 0:
            break
        tt = np.arange(length) / sr
        envelope = np.minimum(1.0, tt / 0.005)
        for _ in range(3):
            f = rng.uniform(200, 4000)
            x[start : start + length] += 0.2 * envelope * np.sin(
                2 * np.pi * f * tt + rng.uniform(0, 2 * np.pi)
            )
        t0 += 0.1
    return Waveform((0.8 * x / np.abs(x).max()).astype(np.float32), sr)


def speech_proxy(seconds: float, seed: int, sr: int = SR) -> Waveform:
    """Sparse band-limited noise bursts: 250 ms burst, 750 ms silence."""
    rng = np.random.default_rng(seed)
    n = int(seconds * sr)
    x = np.zeros(n)
    kernel = np.hanning(9)
    kernel /= kernel.sum()
    t0 = 0.0
    while t0 < seconds:
        burst = np.convolve(rng.normal(size=int(0.25 * sr)), kernel, mode="same")
        start = int(t0 * sr)
        end = min(start + len(burst), n)
        x[start:end] = 0.5 * burst[: end - start]
        t0 += 1.0
    return Waveform((0.8 * x / np.abs(x).max()).astype(np.float32), sr)


# ---------------------------------------------------------------------------
# Edit-distance oracle (plain python DP, costs 1/1/1)

def edit_distance_oracle(ref: list, hyp: list) -> int:
    previous = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, start=1):
        current = [i]
        for j, h in enumerate(hyp, start=1):
            current.append(
                min(
                    previous[j - 1] + (0 if r == h else 1),
                    previous[j] + 1,
                    current[-1] + 1,
                )
            )
        previous = current
    return previous[-1]


# ---------------------------------------------------------------------------
# Timeline generators and frame-level DER oracle

def random_timeline(
    rng: np.random.Generator,
    recording_id: str,
    n_speakers: int,
    max_end: float = 60.0,
    grid: float = 0.01,
) -> SpeakerTimeline:
    """Segments on a 10 ms grid; different speakers may overlap."""
    segments = []
    for s in range(n_speakers):
        clock = rng.uniform(0, 5.0)
        while clock < max_end - 1.0:
            length = rng.uniform(0.5, 6.0)
            start = round(round(clock / grid) * grid, 6)
            end = round(round(min(clock + length, max_end) / grid) * grid, 6)
            if end > start:
                segments.append(SpeakerSegment(TimeSpan(start, end), f"S{s}"))
            clock = end + rng.uniform(0.2, 8.0)
    return SpeakerTimeline.from_segments(recording_id, segments)


def frame_der_oracle(
    ref: SpeakerTimeline,
    hyp: SpeakerTimeline,
    collar: float = 0.0,
    skip_overlap: bool = False,
    step: float = 0.001,
):
    """DER by 1 ms frame counting with brute-force speaker mapping."""
    end = max(
        [seg.span.end for seg in ref.segments + hyp.segments],
        default=0.0,
    )
    n = int(round(end / step)) + 1
    mid = (np.arange(n) + 0.5) * step

    def masks(timeline):
        out = {}
        for seg in timeline.segments:
            mask = out.setdefault(seg.speaker, np.zeros(n, dtype=bool))
            mask |= (mid > seg.span.start) & (mid < seg.span.end)
        return out

    ref_masks, hyp_masks = masks(ref), masks(hyp)
    scored = np.ones(n, dtype=bool)
    if collar > 0:
        for seg in ref.segments:
            for b in (seg.span.start, seg.span.end):
                scored &= ~((mid > b - collar) & (mid < b + collar))
    ref_count = np.sum([m for m in ref_masks.values()], axis=0) if ref_masks else np.zeros(n)
    if skip_overlap:
        scored &= ref_count < 2

    ref_names = sorted(ref_masks)
    hyp_names = sorted(hyp_masks)
    co = np.zeros((len(ref_names), len(hyp_names)))
    for i, r in enumerate(ref_names):
        for j, h in enumerate(hyp_names):
            co[i, j] = np.sum(ref_masks[r] & hyp_masks[h] & scored)

    best_map: dict[str, str] = {}
    best_total = -1.0
    if ref_names and hyp_names:
        short, long_ = (ref_names, hyp_names) if len(ref_names) <= len(hyp_names) else (hyp_names, ref_names)
        for perm in itertools.permutations(range(len(long_)), len(short)):
            total = 0.0
            for a, b in enumerate(perm):
                total += co[a, b] if short is ref_names else co[b, a]
            if total > best_total:
                best_total = total
                if short is ref_names:
                    best_map = {long_[b]: short[a] for a, b in enumerate(perm)}
                else:
                    best_map = {short[a]: long_[b] for a, b in enumerate(perm)}

    hyp_count = np.sum([m for m in hyp_masks.values()], axis=0) if hyp_masks else np.zeros(n)
    matched = np.zeros(n)
    for h, r in best_map.items():
        matched += ref_masks[r] & hyp_masks[h]

    sel = scored
    r_c = ref_count[sel]
    h_c = hyp_count[sel]
    m_c = matched[sel]
    missed = np.maximum(0, r_c - h_c).sum() * step
    false_alarm = np.maximum(0, h_c - r_c).sum() * step
    confusion = (np.minimum(r_c, h_c) - m_c).sum() * step
    total_ref = r_c.sum() * step
    if total_ref <= 0:
        return None
    return (missed + false_alarm + confusion) / total_ref, missed, false_alarm, confusion, total_ref


# ---------------------------------------------------------------------------
# Agglomerative-merge oracle (literal re-simulation on small N)

def ahc_oracle(vectors: np.ndarray, tau: float, min_cluster_size: int) -> list[int]:
    def cosine(u, v):
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        if nu == 0 or nv == 0:
            return 1.0
        return 1.0 - float(u @ v) / (nu * nv)

    clusters: list[list[int]] = [[i] for i in range(len(vectors))]
    while len(clusters) > 1:
        best = (np.inf, -1, -1)
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                ca = vectors[clusters[a]].mean(axis=0)
                cb = vectors[clusters[b]].mean(axis=0)
                d = cosine(ca, cb)
                if d < best[0]:
                    best = (d, a, b)
        if best[0] >= tau:
            break
        _, a, b = best
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]

    survivors = [c for c in clusters if len(c) >= min_cluster_size]
    if not survivors:
        sizes = [len(c) for c in clusters]
        best_i = max(range(len(clusters)), key=lambda i: (sizes[i], -min(clusters[i])))
        survivors = [clusters[best_i]]
    if len(survivors) < len(clusters):
        centroids = [vectors[c].mean(axis=0) for c in survivors]
        assigned = {i for c in survivors for i in c}
        for i in sorted(set(range(len(vectors))) - assigned):
            dists = [cosine(vectors[i], c) for c in centroids]
            survivors[int(np.argmin(dists))].append(i)

    labels = [0] * len(vectors)
    for j, cluster in enumerate(survivors):
        for i in cluster:
            labels[i] = j
    remap: dict[int, int] = {}
    out = []
    for lab in labels:
        if lab not in remap:
            remap[lab] = len(remap)
        out.append(remap[lab])
    return out


# ---------------------------------------------------------------------------
# Two-speaker embedding scene for end-to-end diarization

def two_speaker_scene(seed: int, total_seconds: float = 120.0, dim: int = 32):
    """Alternating speaker turns (multiples of 0.75 s), unit-vector clouds.

    Returns (EmbeddingSet, truth SpeakerTimeline). Cosine separation between
    the two cluster centers is >= 0.8.
    """
    from speechpipe import EmbeddingSet, window_schedule

    rng = np.random.default_rng(seed)
    base = rng.normal(size=(2, dim))
    base[0] /= np.linalg.norm(base[0])
    # Orthogonalize, then mix so that cos(c0, c1) = 0.15 (distance 0.85).
    base[1] -= (base[1] @ base[0]) * base[0]
    base[1] /= np.linalg.norm(base[1])
    centers = np.stack([base[0], 0.15 * base[0] + np.sqrt(1 - 0.15**2) * base[1]])

    turns = []
    clock = 0.0
    speaker = 0
    while clock < total_seconds - 1e-9:
        length = 0.75 * int(rng.integers(6, 13))  # 4.5 .. 9 s, multiple of hop
        length = min(length, total_seconds - clock)
        if length < 1.5:
            prev_span, prev_spk = turns[-1]
            turns[-1] = (TimeSpan(prev_span.start, total_seconds), prev_spk)
            break
        turns.append((TimeSpan(clock, clock + length), speaker))
        clock += length
        speaker = 1 - speaker

    spans = []
    vectors = []
    for turn_span, spk in turns:
        for scheduled in window_schedule([turn_span], 1.5, 0.75):
            spans.append(scheduled.span)
            v = centers[spk] + rng.normal(scale=0.05, size=dim)
            vectors.append(v / np.linalg.norm(v))
    truth = SpeakerTimeline.from_segments(
        "scene", [SpeakerSegment(span, f"T{spk}") for span, spk in turns]
    )
    return EmbeddingSet(np.array(vectors, dtype=np.float32), spans, "scene"), truth


# ---------------------------------------------------------------------------
# Clean CSV rows and rule-inverse corruption generators

def clean_rows(n: int, seed: int) -> list[str]:
    from speechpipe import format_seconds

    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        start = round(float(rng.uniform(0, 500)), 3)
        end = round(start + float(rng.uniform(0.01, 30)), 3)
        rows.append(
            f"rec{int(rng.integers(1, 6))},{format_seconds(start)},"
            f"{format_seconds(end)},SPK_{int(rng.integers(0, 9))}"
        )
    return rows


def corrupt_whitespace(row: str, rng: np.random.Generator) -> str:
    fields = row.split(",")
    k = int(rng.integers(0, 4))
    fields[k] = " " * int(rng.integers(1, 3)) + fields[k] + " " * int(rng.integers(0, 3))
    return ",".join(fields)


def corrupt_decimal_comma(row: str, rng: np.random.Generator) -> str | None:
    fields = row.split(",")
    candidates = [i for i in (1, 2) if "." in fields[i]]
    if not candidates:
        return None
    for i in candidates:
        fields[i] = fields[i].replace(".", ",")
    return ",".join(fields)


def corrupt_quotes(row: str, rng: np.random.Generator) -> str:
    # Only time fields: quotes inside id/speaker labels are legal characters,
    # so quoting those would produce a row strict mode still accepts.
    fields = row.split(",")
    quote = '"' if rng.integers(2) else "'"
    k = int(rng.integers(1, 3))
    fields[k] = quote + fields[k] + quote
    return ",".join(fields)


def corrupt_swap(row: str, rng: np.random.Generator) -> str:
    fields = row.split(",")
    fields[1], fields[2] = fields[2], fields[1]
    return ",".join(fields)


def corrupt_delimiters(row: str, rng: np.random.Generator) -> str:
    k = int(rng.integers(1, 4))
    parts = row.split(",")
    return ",".join(parts[:k]) + ",," + ",".join(parts[k:])


CORRUPTIONS = [
    ("whitespace", corrupt_whitespace),
    ("decimal-comma", corrupt_decimal_comma),
    ("quotes", corrupt_quotes),
    ("swap", corrupt_swap),
    ("delimiters", corrupt_delimiters),
]


def corrupt_row(row: str, rng: np.random.Generator) -> tuple[str, str]:
    """Apply one randomly-chosen applicable corruption; returns (name, bad_row)."""
    order = rng.permutation(len(CORRUPTIONS))
    for idx in order:
        name, fn = CORRUPTIONS[idx]
        result = fn(row, rng)
        if result is not None and result != row:
            return name, result
    raise AssertionError(f"no corruption applicable to {row!r}")

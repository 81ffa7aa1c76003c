#!/usr/bin/env python3
"""Generate the bundled synthetic fixtures under data/.

Produces a description dataset whose shape matches the published study
population (147 samples from 108 subjects; 106 negative / 41 positive;
subject sample counts 85x1 + 15x2 + 5x3 + 2x4 + 1x9) and a zero-shot
verdict file whose confusion against that dataset is tp=14, fp=12,
fn=27, tn=94.

The description text is synthetic: label-correlated wording so that a
text classifier has signal to learn from, but no real participant data.
Deterministic: rerunning reproduces byte-identical files.
"""

import json
import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data"

SUBJECT_HISTOGRAM = [(1, 85), (2, 15), (3, 5), (4, 2), (9, 1)]
N_POSITIVE = 41

NEGATIVE_PHRASES = [
    "The person is smiling warmly with bright, engaged eyes.",
    "Their posture is relaxed and the facial muscles look at ease.",
    "A calm, content expression with a light natural smile.",
    "The eyes look rested and the gaze is direct and friendly.",
    "Cheerful demeanor; the corners of the mouth are lifted.",
    "They appear comfortable, with an open and approachable look.",
    "A genuine smile reaches the eyes, suggesting good spirits.",
    "The face looks fresh and alert, with a pleasant expression.",
]

POSITIVE_PHRASES = [
    "The person looks visibly tired, with heavy-lidded eyes.",
    "Their gaze is lowered and the mouth is set in a flat line.",
    "The brow is furrowed and the jaw appears tense.",
    "A strained, weary expression with downcast eyes.",
    "They appear withdrawn; the face shows little animation.",
    "Dark circles under the eyes and a slack, fatigued look.",
    "The expression is somber and the shoulders sag inward.",
    "A distant, worried look with tightness around the eyes.",
]

NEUTRAL_PHRASES = [
    "The photo is taken indoors at close range.",
    "Hair is pulled back and the lighting is even.",
    "The background is plain and slightly out of focus.",
    "The subject faces the camera directly.",
    "The image is framed from the shoulders up.",
    "Natural light falls across one side of the face.",
]


def make_description(rng: random.Random, positive: bool) -> str:
    pool = POSITIVE_PHRASES if positive else NEGATIVE_PHRASES
    lead = rng.sample(pool, 2)
    neutral = rng.choice(NEUTRAL_PHRASES)
    return " ".join([lead[0], neutral, lead[1]])


def make_items(rng: random.Random, positive: bool) -> list[int]:
    total = rng.randint(6, 12) if positive else rng.randint(0, 5)
    while True:
        cuts = sorted(rng.randint(0, total) for _ in range(3))
        items = [
            cuts[0],
            cuts[1] - cuts[0],
            cuts[2] - cuts[1],
            total - cuts[2],
        ]
        if all(v <= 3 for v in items):
            return items


def main() -> None:
    rng = random.Random(20240614)
    OUT_DIR.mkdir(exist_ok=True)

    # Subject roster per the histogram.
    subject_sizes: list[int] = []
    for size, count in SUBJECT_HISTOGRAM:
        subject_sizes.extend([size] * count)
    rng.shuffle(subject_sizes)

    slots = []  # (subject_index, sample_index_within_subject)
    for subject_index, size in enumerate(subject_sizes):
        for sample_index in range(size):
            slots.append((subject_index, sample_index))
    assert len(slots) == 147

    positive_slots = set(rng.sample(range(len(slots)), N_POSITIVE))

    records = []
    for slot_index, (subject_index, sample_index) in enumerate(slots):
        positive = slot_index in positive_slots
        items = make_items(rng, positive)
        records.append(
            {
                "sample_id": f"s{subject_index + 1:03d}_{sample_index + 1}",
                "subject_id": f"subj{subject_index + 1:03d}",
                "description": make_description(rng, positive),
                "phq4_items": items,
                "label": "positive" if positive else "negative",
            }
        )
    records.sort(key=lambda r: r["sample_id"])

    with open(OUT_DIR / "descriptions.jsonl", "w") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")

    # Zero-shot verdicts with the pinned confusion: among 41 positives,
    # 14 predicted positive; among 106 negatives, 12 predicted positive.
    positives = [r for r in records if r["label"] == "positive"]
    negatives = [r for r in records if r["label"] == "negative"]
    assert len(positives) == 41 and len(negatives) == 106
    tp_ids = {r["sample_id"] for r in rng.sample(positives, 14)}
    fp_ids = {r["sample_id"] for r in rng.sample(negatives, 12)}

    with open(OUT_DIR / "zeroshot_verdicts.jsonl", "w") as f:
        for record in records:
            predicted_positive = (
                record["sample_id"] in tp_ids or record["sample_id"] in fp_ids
            )
            parsed = (
                rng.choice(["anxiety", "depression"])
                if predicted_positive
                else "normal"
            )
            verdict = {
                "sample_id": record["sample_id"],
                "raw_text": f"Output: {parsed}",
                "parsed": parsed,
                "label": "positive" if predicted_positive else "negative",
            }
            f.write(json.dumps(verdict) + "\n")

    n_pos = sum(1 for r in records if r["label"] == "positive")
    counts = {}
    for size in subject_sizes:
        counts[size] = counts.get(size, 0) + 1
    print(f"samples={len(records)} subjects={len(subject_sizes)} "
          f"positive={n_pos} histogram={sorted(counts.items())}")


if __name__ == "__main__":
    main()

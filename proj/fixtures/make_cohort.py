#!/usr/bin/env python3
"""Regenerates fixtures/cohort: a synthetic 12-provider cohort.

Run from the repository root. Output is deterministic.
"""
import datetime as dt
import json
import random
import sys
from pathlib import Path

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures/cohort")
rng = random.Random(20250930)

INDICATORS = [
    ("PG-01", "binary", "Public stakeholder consultation on model policies"),
    ("PG-02", "ordinal3", "External advisory body with published mandate"),
    ("PG-03", "count", "Documented public consultations in the last year"),
    ("PG-04", "binary", "Community input channel on usage policy changes"),
    ("PG-05", "ordinal3", "Participatory red-teaming programme"),
    ("ID-01", "binary", "Multilingual evaluation results published"),
    ("ID-02", "ordinal3", "Accessibility commitments for interfaces"),
    ("ID-03", "binary", "Demographic bias evaluation disclosed"),
    ("ID-04", "count", "Supported languages with evaluated quality"),
    ("ID-05", "ordinal3", "Inclusion of under-represented groups in data work"),
    ("TR-01", "ordinal3", "Model card"),
    ("TR-02", "binary", "Training data summary"),
    ("TR-03", "ordinal3", "Evaluation methodology disclosure"),
    ("TR-04", "count", "Published system or safety reports"),
    ("TR-05", "binary", "Usage policy change log"),
    ("AC-01", "binary", "Vulnerability disclosure process"),
    ("AC-02", "binary", "Redress mechanism for affected people"),
    ("AC-03", "ordinal3", "Independent audit of deployed systems"),
    ("AC-04", "binary", "Incident reporting channel"),
    ("AC-05", "count", "Resolved public incident reports"),
]

PROVIDERS = [
    "Alder Systems", "Birchline AI", "Cobalt Research", "Driftwood Labs",
    "Ember Intelligence", "Fjord Computing", "Garnet Works", "Harbor Models",
    "Iris Analytics", "Juniper Cognition", "Kestrel AI", "Lumen Foundry",
]
SYSTEMS_PER_PROVIDER = [3, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0, 0]
SOURCE_KINDS = ["policy", "model_card", "datasheet", "audit_report", "registry_entry",
                "consultation_record", "release_note", "other"]
CUTOFF = dt.date(2025, 9, 30)


def day(lo, hi):
    span = (hi - lo).days
    return lo + dt.timedelta(days=rng.randint(0, span))


def value_for(kind):
    if kind == "binary":
        return rng.choice(["yes", "no", "yes"])
    if kind == "ordinal3":
        return rng.randint(0, 2)
    return rng.choice([0, 1, 2, 3, 4, 5, 7, 9, 12, 18, 25, 40])


def perturb(kind, v):
    if kind == "binary":
        return "no" if v == "yes" else "yes"
    if kind == "ordinal3":
        return max(0, min(2, v + rng.choice([-1, 1])))
    return max(0, v + rng.choice([-2, -1, 1, 3]))


subjects, artifacts, codes = [], [], []
for i, name in enumerate(PROVIDERS):
    pid = f"P{i + 1:02d}"
    subjects.append({"subject_id": pid, "name": name, "kind": "provider"})
    for k in range(SYSTEMS_PER_PROVIDER[i]):
        subjects.append({"subject_id": f"{pid}-S{k + 1}", "name": f"{name} model {k + 1}",
                         "kind": "system", "provider_id": pid})

for s in subjects:
    sid = s["subject_id"]
    # Per-subject evidence density so coverage spreads out.
    density = rng.uniform(0.1, 0.8)
    arts = []
    for n in range(rng.randint(3, 6)):
        aid = f"{sid}-A{n + 1}"
        retrieved = day(dt.date(2025, 1, 1), CUTOFF)
        art = {"artifact_id": aid, "url": f"https://example.org/{sid.lower()}/doc-{n + 1}",
               "retrieved_date": retrieved.isoformat(), "source_kind": rng.choice(SOURCE_KINDS)}
        if rng.random() < 0.75:
            art["published_date"] = day(dt.date(2022, 1, 1), retrieved).isoformat()
        if rng.random() < 0.4:
            art["archive_url"] = f"https://archive.example.net/{sid.lower()}/{n + 1}"
        artifacts.append(art)
        arts.append(aid)

    for ind_id, kind, _ in INDICATORS:
        known = rng.random() < density
        first = value_for(kind) if known else "unknown"
        coders = [("c1", first)]
        if rng.random() < 0.5:
            r = rng.random()
            if not known:
                second = "unknown" if r < 0.85 else value_for(kind)
            elif r < 0.75:
                second = first
            elif r < 0.9:
                second = perturb(kind, first)
            else:
                second = "unknown"
            coders.append(("c2", second))
        for coder, v in coders:
            rec = {"subject_id": sid, "indicator_id": ind_id, "coder_id": coder, "value": v,
                   "evidence_refs": [] if v == "unknown" else sorted(rng.sample(arts, rng.randint(1, 2))),
                   "evidence_class": "third_party_neutral" if rng.random() < 0.2 else "primary_attributable",
                   "stale": v != "unknown" and rng.random() < 0.1,
                   "coded_date": day(dt.date(2025, 6, 1), CUTOFF).isoformat()}
            codes.append(rec)

indicators = [{"id": i, "pillar": i[:2], "kind": k, "title": t} for i, k, t in INDICATORS]

OUT.mkdir(parents=True, exist_ok=True)
for name, doc in [("indicators.json", indicators), ("subjects.json", subjects),
                  ("artifacts.json", artifacts), ("codes.json", codes)]:
    (OUT / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

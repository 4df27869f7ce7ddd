"""Deterministic demo dataset generator.

Writes a tiny bilingual dataset (word vectors, graph node/edge files, lemma
table, parallel corpus, and pipeline config) so the full pipeline can run
without the real crawled data. Also used by the end-to-end tests.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

# English word list in rough frequency order; French entries marked with the
# English word they are aligned to (None = language-specific form).
_EN_WORDS = [
    "music", "rock", "pop", "jazz", "dance", "metal", "blues", "folk", "punk",
    "soul", "funk", "house", "indie", "hard", "electronic", "alternative",
    "psychedelic", "progressive", "heavy", "garage", "sludge", "drum", "bass", "n",
]
_FR_WORDS = [
    ("musique", "music"), ("rock", "rock"), ("pop", "pop"), ("jazz", "jazz"),
    ("danse", "dance"), ("métal", "metal"), ("blues", "blues"), ("folk", "folk"),
    ("punk", "punk"), ("soul", "soul"), ("funk", "funk"), ("house", "house"),
    ("indé", "indie"), ("dur", "hard"), ("électronique", "electronic"),
    ("alternatif", "alternative"), ("psychédélique", "psychedelic"),
    ("progressif", "progressive"), ("garage", "garage"), ("batterie", "drum"),
]

# id suffix -> (en label, fr label); the shared suffix drives sameAs pairing.
_GENRES = {
    "rock": ("Rock", "Rock"),
    "pop": ("Pop", "Pop"),
    "jazz": ("Jazz", "Jazz"),
    "metal": ("Metal", "Métal"),
    "hard_rock": ("Hard_rock", "Rock_dur"),
    "dance_pop": ("Dance_pop", "Pop_danse"),
    "alt_rock": ("Alternative_rock", "Rock_alternatif"),
    "psych_rock": ("Psychedelic_rock", "Rock_psychédélique"),
    "sludge": ("Sludge_metal", "Métal_sludge"),
    "electronic": ("Electronic_music", "Musique_électronique"),
}

_RELATED = [
    ("dbp_en_hard_rock", "dbp_en_rock", "musicSubgenre"),
    ("dbp_en_alt_rock", "dbp_en_rock", "musicSubgenre"),
    ("dbp_en_psych_rock", "dbp_en_rock", "musicSubgenre"),
    ("dbp_en_dance_pop", "dbp_en_pop", "musicSubgenre"),
    ("dbp_en_sludge", "dbp_en_metal", "musicSubgenre"),
    ("dbp_en_metal", "dbp_en_rock", "stylisticOrigin"),
    ("dbp_en_electronic", "dbp_en_dance_pop", "derivative"),
    ("dbp_fr_hard_rock", "dbp_fr_rock", "musicSubgenre"),
    ("dbp_fr_alt_rock", "dbp_fr_rock", "musicSubgenre"),
    ("dbp_fr_psych_rock", "dbp_fr_rock", "musicSubgenre"),
    ("dbp_fr_dance_pop", "dbp_fr_pop", "musicSubgenre"),
    ("dbp_fr_sludge", "dbp_fr_metal", "musicSubgenre"),
    ("dbp_fr_metal", "dbp_fr_rock", "stylisticOrigin"),
]

# Per item: (en tags, fr tags) drawn from the genre labels above.
_ITEMS = [
    (["Rock", "Hard_rock"], ["Rock", "Rock_dur"]),
    (["Rock"], ["Rock"]),
    (["Hard_rock", "Metal"], ["Rock_dur", "Métal"]),
    (["Pop", "Dance_pop"], ["Pop", "Pop_danse"]),
    (["Pop"], ["Pop"]),
    (["Dance_pop"], ["Pop_danse", "Pop"]),
    (["Jazz"], ["Jazz"]),
    (["Jazz", "Pop"], ["Jazz"]),
    (["Metal", "Sludge_metal"], ["Métal", "Métal_sludge"]),
    (["Metal"], ["Métal"]),
    (["Alternative_rock"], ["Rock_alternatif", "Rock"]),
    (["Alternative_rock", "Rock"], ["Rock_alternatif"]),
    (["Psychedelic_rock", "Rock"], ["Rock_psychédélique"]),
    (["Psychedelic_rock"], ["Rock_psychédélique", "Rock"]),
    (["Electronic_music", "Dance_pop"], ["Musique_électronique"]),
    (["Electronic_music"], ["Musique_électronique", "Pop_danse"]),
    (["Rock", "Metal"], ["Rock", "Métal"]),
    (["Pop", "Jazz"], ["Pop", "Jazz"]),
    (["Hard_rock"], ["Rock_dur", "Rock"]),
    (["Sludge_metal", "Metal"], ["Métal_sludge"]),
    (["Rock", "Alternative_rock"], ["Rock"]),
    (["Dance_pop", "Pop"], ["Pop_danse"]),
    (["Jazz", "Rock"], ["Jazz", "Rock"]),
    (["Sludge_metal"], ["Métal_sludge", "Métal"]),
]

DIM = 8


def _write_vec(path: Path, rows: list[tuple[str, np.ndarray]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"{len(rows)} {DIM}\n")
        for word, vector in rows:
            handle.write(word + " " + " ".join(format(x, ".6f") for x in vector) + "\n")


def write_demo_dataset(root: str | Path, seed: int = 7) -> dict[str, Path]:
    """Write the demo dataset under `root` and return the file paths."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    base = {word: rng.normal(size=DIM) for word in _EN_WORDS}
    for vector in base.values():
        vector /= np.linalg.norm(vector)
    en_rows = [(word, base[word]) for word in _EN_WORDS]
    fr_rows = []
    for word, anchor in _FR_WORDS:
        aligned = base[anchor] + 0.05 * rng.normal(size=DIM)
        fr_rows.append((word, aligned / np.linalg.norm(aligned)))

    paths = {
        "vectors_en": root / "vectors_en.vec",
        "vectors_fr": root / "vectors_fr.vec",
        "nodes": root / "nodes.jsonl",
        "edges": root / "edges.jsonl",
        "lemma": root / "lemma.tsv",
        "corpus": root / "corpus.jsonl",
        "config": root / "config.json",
    }
    _write_vec(paths["vectors_en"], en_rows)
    _write_vec(paths["vectors_fr"], fr_rows)

    with open(paths["nodes"], "w", encoding="utf-8", newline="\n") as handle:
        for suffix, (en_label, fr_label) in _GENRES.items():
            handle.write(json.dumps({"id": f"dbp_en_{suffix}", "lang": "en", "label": en_label}, ensure_ascii=False) + "\n")
            handle.write(json.dumps({"id": f"dbp_fr_{suffix}", "lang": "fr", "label": fr_label}, ensure_ascii=False) + "\n")

    with open(paths["edges"], "w", encoding="utf-8", newline="\n") as handle:
        for suffix in _GENRES:
            handle.write(json.dumps({"src": f"dbp_en_{suffix}", "dst": f"dbp_fr_{suffix}", "rel": "sameAs"}) + "\n")
        for src, dst, rel in _RELATED:
            handle.write(json.dumps({"src": src, "dst": dst, "rel": rel}) + "\n")

    with open(paths["lemma"], "w", encoding="utf-8", newline="\n") as handle:
        handle.write("danse\tdanse\n")
        handle.write("children\tchild\n")

    with open(paths["corpus"], "w", encoding="utf-8", newline="\n") as handle:
        for index, (en_tags, fr_tags) in enumerate(_ITEMS, start=1):
            record = {"id": f"item{index:02d}", "annotations": {"en": en_tags, "fr": fr_tags}}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    config = {
        "vectors": {"en": "vectors_en.vec", "fr": "vectors_fr.vec"},
        "graph_nodes": "nodes.jsonl",
        "graph_edges": "edges.jsonl",
        "lemma_table": "lemma.tsv",
        "corpus": "corpus.jsonl",
        "workdir": "out",
        "composition": "sif",
        "sif_a": 0.001,
        "scheme": "typed",
        "scorer": "avg",
        "folds": 4,
        "seed": 7,
        "min_tag_count": 1,
        "tag_systems": [
            {"name": "en", "language": "en"},
            {"name": "fr", "language": "fr"},
        ],
        "target_system": "fr",
        "source_systems": ["en"],
    }
    with open(paths["config"], "w", encoding="utf-8", newline="\n") as handle:
        json.dump(config, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return paths


if __name__ == "__main__":
    destination = sys.argv[1] if len(sys.argv) > 1 else "demo_data"
    written = write_demo_dataset(destination)
    print(f"demo dataset written to {Path(destination).resolve()}")
    for name, path in written.items():
        print(f"  {name}: {path}")

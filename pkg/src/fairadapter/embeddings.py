"""Embedding sets: file format, validation, synthetic data, and splitting.

The toolkit never touches pixels. A frozen image encoder is run elsewhere
and its output is exchanged through a newline-delimited JSON file:

    line 1   {"format":"fairadapter-embeddings","version":1,"dim":D,"encoder":"tag"}
    line 2+  {"id":"...","category":"...","label":0|1,"vector":[...]}

Label 0 is a natural image, label 1 an AI-generated one. Category indices
are assigned lexicographically so that per-category bookkeeping is stable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

FORMAT_NAME = "fairadapter-embeddings"
FORMAT_VERSION = 1


class EmbeddingFormatError(ValueError):
    """Raised when an embedding file violates the on-disk contract."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class EmbeddingRecord:
    """One encoded image: identifier, content category, label, vector."""

    id: str
    category: str
    label: int
    vector: np.ndarray

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float64)


@dataclass
class EmbeddingSet:
    """An ordered collection of embedding records sharing one dimension.

    Treat instances as immutable after construction; they may be shared
    freely across threads.
    """

    dim: int
    encoder_tag: str
    records: list[EmbeddingRecord] = field(default_factory=list)

    @property
    def categories(self) -> list[str]:
        """Distinct category names in lexicographic order."""
        return sorted({r.category for r in self.records})

    def __len__(self) -> int:
        return len(self.records)

    def records_for(self, category: str, label: int | None = None) -> list[EmbeddingRecord]:
        out = [r for r in self.records if r.category == category]
        if label is not None:
            out = [r for r in out if r.label == label]
        return out


@dataclass
class SynthConfig:
    """Knobs for the deterministic synthetic embedding generator.

    Real vectors of category j are noise around a category mean; fake
    vectors sit a further ``skew[j] * shared_fake_shift`` along one shared
    unit direction. Shrinking a category's skew makes it harder to detect,
    which is what the fairness machinery is meant to absorb.
    """

    n_categories: int = 4
    per_category_real: int = 100
    per_category_fake: int = 100
    dim: int = 64
    shared_fake_shift: float = 1.0
    nuisance_scale: float = 1.0
    noise_sigma: float = 0.3
    skew: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_categories < 1:
            raise ValueError("n_categories must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.per_category_real < 0 or self.per_category_fake < 0:
            raise ValueError("per-category counts must be >= 0")
        for name in ("shared_fake_shift", "nuisance_scale", "noise_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.skew is not None:
            self.skew = tuple(float(s) for s in self.skew)
            if len(self.skew) != self.n_categories:
                raise ValueError("skew length must equal n_categories")


def read_embedding_set(path) -> EmbeddingSet:
    """Parse an embedding file, enforcing the format contract line by line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise EmbeddingFormatError("empty file, missing header", line=1)

    header = _parse_json(lines[0], 1)
    if not isinstance(header, dict):
        raise EmbeddingFormatError("header must be a JSON object", line=1)
    if header.get("format") != FORMAT_NAME:
        raise EmbeddingFormatError(
            f"unknown format {header.get('format')!r}, expected {FORMAT_NAME!r}", line=1
        )
    if header.get("version") != FORMAT_VERSION:
        raise EmbeddingFormatError(
            f"unsupported version {header.get('version')!r}, expected {FORMAT_VERSION}", line=1
        )
    dim = header.get("dim")
    if not _is_int(dim) or dim < 1:
        raise EmbeddingFormatError(f"header dim must be a positive integer, got {dim!r}", line=1)
    encoder_tag = header.get("encoder")
    if not isinstance(encoder_tag, str):
        raise EmbeddingFormatError("header encoder must be a string", line=1)

    records = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            raise EmbeddingFormatError("blank line inside record section", line=lineno)
        obj = _parse_json(raw, lineno)
        if not isinstance(obj, dict):
            raise EmbeddingFormatError("record must be a JSON object", line=lineno)
        rec_id = obj.get("id")
        category = obj.get("category")
        label = obj.get("label")
        vector = obj.get("vector")
        if not isinstance(rec_id, str):
            raise EmbeddingFormatError("record id must be a string", line=lineno)
        if not isinstance(category, str) or not category:
            raise EmbeddingFormatError("record category must be a non-empty string", line=lineno)
        if not _is_int(label) or label not in (0, 1):
            raise EmbeddingFormatError(f"label must be 0 or 1, got {label!r}", line=lineno)
        if not isinstance(vector, list):
            raise EmbeddingFormatError("record vector must be a JSON array", line=lineno)
        if len(vector) != dim:
            raise EmbeddingFormatError(
                f"vector length {len(vector)} does not match header dim {dim}", line=lineno
            )
        values = []
        for v in vector:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise EmbeddingFormatError(f"non-finite or non-numeric component {v!r}", line=lineno)
            values.append(float(v))
        records.append(EmbeddingRecord(rec_id, category, int(label), np.asarray(values)))

    return EmbeddingSet(dim=int(dim), encoder_tag=encoder_tag, records=records)


def write_embedding_set(eset: EmbeddingSet, path) -> None:
    """Write ``eset`` so that :func:`read_embedding_set` restores it exactly."""
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "dim": eset.dim,
        "encoder": eset.encoder_tag,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":"), allow_nan=False) + "\n")
        for rec in eset.records:
            obj = {
                "id": rec.id,
                "category": rec.category,
                "label": int(rec.label),
                "vector": [float(v) for v in rec.vector],
            }
            fh.write(json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n")


def validate_set(eset: EmbeddingSet, require_both_labels_per_category: bool = False) -> list[str]:
    """Check invariants, returning human-readable violations (empty if clean).

    With the flag on, every category must contain at least one natural and
    one AI-generated record, which is the precondition for hybrid mixing.
    """
    problems = []
    if eset.dim < 1:
        problems.append(f"dim must be positive, got {eset.dim}")
    if not eset.records:
        problems.append("set contains no records (need at least one category)")
    for rec in eset.records:
        if not rec.category:
            problems.append(f"record {rec.id!r}: empty category")
        if rec.label not in (0, 1):
            problems.append(f"record {rec.id!r}: label {rec.label!r} outside {{0,1}}")
        if rec.vector.shape != (eset.dim,):
            problems.append(
                f"record {rec.id!r}: vector length {rec.vector.shape[0] if rec.vector.ndim == 1 else rec.vector.shape}"
                f" does not match dim {eset.dim}"
            )
        elif not np.all(np.isfinite(rec.vector)):
            problems.append(f"record {rec.id!r}: vector contains a non-finite value")
    if require_both_labels_per_category:
        for cat in eset.categories:
            labels = {r.label for r in eset.records if r.category == cat}
            if 0 not in labels:
                problems.append(f"category {cat!r} has no natural (label 0) records")
            if 1 not in labels:
                problems.append(f"category {cat!r} has no AI-generated (label 1) records")
    return problems


def synth_generate(cfg: SynthConfig) -> EmbeddingSet:
    """Generate a deterministic labeled embedding set from ``cfg``.

    For a fixed seed the output is bit-identical across runs.
    """
    rng = np.random.default_rng(cfg.seed)
    shift_direction = rng.standard_normal(cfg.dim)
    shift_direction /= np.linalg.norm(shift_direction)
    skew = cfg.skew if cfg.skew is not None else (1.0,) * cfg.n_categories

    width = max(3, len(str(cfg.n_categories - 1)))
    records = []
    for j in range(cfg.n_categories):
        cat = f"cat{j:0{width}d}"
        mean = cfg.nuisance_scale * rng.standard_normal(cfg.dim)
        fake_mean = mean + skew[j] * cfg.shared_fake_shift * shift_direction
        for i in range(cfg.per_category_real):
            vec = mean + cfg.noise_sigma * rng.standard_normal(cfg.dim)
            records.append(EmbeddingRecord(f"{cat}-real-{i:04d}", cat, 0, vec))
        for i in range(cfg.per_category_fake):
            vec = fake_mean + cfg.noise_sigma * rng.standard_normal(cfg.dim)
            records.append(EmbeddingRecord(f"{cat}-fake-{i:04d}", cat, 1, vec))
    return EmbeddingSet(dim=cfg.dim, encoder_tag=f"synthetic-seed{cfg.seed}", records=records)


def split_set(eset: EmbeddingSet, test_fraction: float, seed: int) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Stratified train/test split by (category, label), rounding toward train.

    Each stratum is split independently and deterministically per seed; the
    two outputs partition the input and keep its record order.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must lie in [0, 1]")
    strata: dict[tuple[str, int], list[int]] = {}
    for idx, rec in enumerate(eset.records):
        strata.setdefault((rec.category, rec.label), []).append(idx)

    rng = np.random.default_rng(seed)
    test_indices: set[int] = set()
    for key in sorted(strata):
        members = strata[key]
        # guard against float fuzz such as 0.3 * 10 -> 2.9999...
        n_test = math.floor(test_fraction * len(members) + 1e-9)
        perm = rng.permutation(len(members))
        test_indices.update(members[p] for p in perm[:n_test])

    train_records = [r for i, r in enumerate(eset.records) if i not in test_indices]
    test_records = [r for i, r in enumerate(eset.records) if i in test_indices]
    return (
        EmbeddingSet(eset.dim, eset.encoder_tag, train_records),
        EmbeddingSet(eset.dim, eset.encoder_tag, test_records),
    )


def _parse_json(raw: str, lineno: int):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise EmbeddingFormatError(f"invalid JSON ({exc.msg})", line=lineno) from exc


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)

"""Walk an image-folder tree and emit a fairadapter embedding file.

Expected layout: ``root/<category>/<real|fake>/<images>``. Every decodable
image becomes one record; the id is its path relative to the root, the
label is 1 under ``fake`` and 0 under ``real``. Records are written in
sorted-path order by a single writer, so a fixed encoder version yields a
byte-identical file.

The output is the plain JSON-lines embedding format; this tool depends only
on the format, not on the training package.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import get_encoder

FORMAT_NAME = "fairadapter-embeddings"
FORMAT_VERSION = 1

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp", ".tif", ".tiff"}
LABEL_DIRS = {"real": 0, "fake": 1}


class LayoutError(ValueError):
    """The folder tree does not match <category>/<real|fake>/<images>."""


@dataclass
class ExtractSummary:
    records_written: int = 0
    categories: list[str] = field(default_factory=list)
    dim: int = 0
    skipped: list[str] = field(default_factory=list)


def scan_layout(root: Path) -> list[tuple[Path, str, str, int]]:
    """Collect (path, relative id, category, label) in sorted-path order."""
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"root {root} is not a directory")
    categories = sorted(d.name for d in root.iterdir() if d.is_dir())
    if not categories:
        raise LayoutError(f"no category directories under {root}")
    entries = []
    for cat in categories:
        count = 0
        for label_name, label in sorted(LABEL_DIRS.items()):
            label_dir = root / cat / label_name
            if not label_dir.is_dir():
                continue
            for p in sorted(label_dir.rglob("*")):
                if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
                    entries.append((p, p.relative_to(root).as_posix(), cat, label))
                    count += 1
        if count == 0:
            raise LayoutError(f"category {cat!r} contains no image files")
    entries.sort(key=lambda e: e[1])
    return entries


def extract_embeddings(root, encoder_id: str, out, batch: int = 32) -> ExtractSummary:
    """Encode every image under ``root`` and write the embedding file.

    Unreadable images are skipped with a warning and listed in the summary;
    a change of output width between batches is fatal.
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    encoder = get_encoder(encoder_id)
    entries = scan_layout(Path(root))
    summary = ExtractSummary(dim=encoder.dim,
                             categories=sorted({cat for _, _, cat, _ in entries}))

    decoded: list[tuple[str, str, int, Image.Image]] = []
    for path, rel_id, cat, label in entries:
        try:
            with Image.open(path) as img:
                decoded.append((rel_id, cat, label, img.convert("RGB")))
        except (UnidentifiedImageError, OSError) as exc:
            print(f"warning: skipping unreadable image {rel_id}: {exc}", file=sys.stderr)
            summary.skipped.append(rel_id)

    header = {"format": FORMAT_NAME, "version": FORMAT_VERSION,
              "dim": encoder.dim, "encoder": encoder.name}
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":"), allow_nan=False) + "\n")
        for start in range(0, len(decoded), batch):
            chunk = decoded[start:start + batch]
            vectors = encoder.encode_batch([img for _, _, _, img in chunk])
            if vectors.shape != (len(chunk), encoder.dim):
                raise RuntimeError(
                    f"encoder width drifted: got {vectors.shape}, expected "
                    f"({len(chunk)}, {encoder.dim})")
            if not np.all(np.isfinite(vectors)):
                raise RuntimeError("encoder produced a non-finite component")
            for (rel_id, cat, label, _), vec in zip(chunk, vectors):
                obj = {"id": rel_id, "category": cat, "label": label,
                       "vector": [float(v) for v in vec]}
                fh.write(json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n")
                summary.records_written += 1
    return summary

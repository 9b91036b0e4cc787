"""Frozen image encoders behind one tiny interface.

An encoder exposes a fixed output width and a batch encode method; it never
trains. Two families are registered:

    pixel-proj[:dim]     deterministic stand-in: resized RGB pixels through a
                         constant seeded Gaussian projection, L2-normalized.
                         No downloads, bit-reproducible, ideal for tests.
    clip:<hf-model-id>   a pretrained CLIP image tower via transformers;
                         requires the weights to be available locally or
                         downloadable.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


class EncoderNotAvailableError(ValueError):
    """The requested encoder id is unknown or its backend is missing."""


class PixelProjectionEncoder:
    """Fixed random projection of downsampled pixels.

    The projection matrix is seeded by the output width alone, so the same
    id always produces the same vectors on the same images.
    """

    def __init__(self, dim: int = 64, side: int = 32):
        if dim < 1:
            raise EncoderNotAvailableError(f"pixel-proj width must be positive, got {dim}")
        self.dim = dim
        self.name = f"pixel-proj:{dim}"
        self._side = side
        rng = np.random.default_rng(24601 + dim)
        n_pixels = side * side * 3
        self._projection = rng.standard_normal((n_pixels, dim)) / np.sqrt(n_pixels)

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        out = np.empty((len(images), self.dim), dtype=np.float64)
        for i, img in enumerate(images):
            small = img.convert("RGB").resize((self._side, self._side), Image.BILINEAR)
            flat = np.asarray(small, dtype=np.float64).ravel() / 255.0
            vec = flat @ self._projection
            out[i] = vec / max(np.linalg.norm(vec), 1e-12)
        return out


class ClipEncoder:
    """Pretrained CLIP image tower, frozen, via transformers."""

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise EncoderNotAvailableError(
                f"encoder clip:{model_id} needs torch and transformers installed"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(model_id)
            self._processor = CLIPProcessor.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderNotAvailableError(
                f"could not load CLIP weights {model_id!r}: {exc}"
            ) from exc
        self._torch = torch
        self._model.eval()
        self.dim = int(self._model.config.projection_dim)
        self.name = f"clip:{model_id}"

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        inputs = self._processor(images=[img.convert("RGB") for img in images],
                                 return_tensors="pt")
        with self._torch.no_grad():
            feats = self._model.get_image_features(**inputs)
        return feats.cpu().numpy().astype(np.float64)


def get_encoder(encoder_id: str):
    """Resolve an encoder id string to a ready encoder instance."""
    if encoder_id == "pixel-proj":
        return PixelProjectionEncoder()
    if encoder_id.startswith("pixel-proj:"):
        spec = encoder_id.split(":", 1)[1]
        try:
            dim = int(spec)
        except ValueError:
            raise EncoderNotAvailableError(f"bad pixel-proj width {spec!r}")
        return PixelProjectionEncoder(dim=dim)
    if encoder_id.startswith("clip:"):
        return ClipEncoder(encoder_id.split(":", 1)[1])
    raise EncoderNotAvailableError(
        f"unknown encoder {encoder_id!r}; expected pixel-proj[:dim] or clip:<model-id>"
    )

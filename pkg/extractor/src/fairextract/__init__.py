"""Image-folder to embedding-file extraction with a frozen encoder."""

from .encoders import EncoderNotAvailableError, PixelProjectionEncoder, get_encoder
from .extract import ExtractSummary, LayoutError, extract_embeddings, scan_layout

__version__ = "0.1.0"

"""Backend contract: text embeddings, audio embeddings, fluency scores.

Two implementations exist.  ArchiveBackend (here) serves bit-exact
precomputed vectors from archive files and makes evaluation hermetic.
ModelBackend (model_backend module) runs the exported encoder graphs.
Both promise determinism and safe concurrent reads.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .archive import EmbeddingArchive
from .audio import AudioBuffer
from .errors import ArchiveFormatError, BackendCapabilityError, RangeError

EMBEDDINGS_FILENAME = "embeddings.arc"
FLUENCY_FILENAME = "fluency.arc"


def _require_text(text: str) -> str:
    if not isinstance(text, str) or not text.strip():
        raise RangeError("caption text must be a nonempty string")
    return text


class Backend(ABC):
    """What the scorer needs from an embedding provider.

    Audio arrives two ways: ``embed_audio`` consumes a decoded waveform,
    ``embed_audio_id`` resolves a dataset audio identifier.  Archive
    backends only support the keyed form; waveform embedding requires the
    encoder graphs.
    """

    @abstractmethod
    def embedding_dim(self) -> int:
        """Dimension shared by all embeddings this backend produces."""

    @abstractmethod
    def embed_text(self, text: str) -> np.ndarray:
        """Embed one caption; output has embedding_dim() entries."""

    @abstractmethod
    def embed_audio(self, buf: AudioBuffer) -> np.ndarray:
        """Embed a decoded waveform."""

    @abstractmethod
    def embed_audio_id(self, audio_id: str) -> np.ndarray:
        """Embed the audio a dataset refers to by identifier."""

    @abstractmethod
    def fluency_prob(self, text: str) -> float:
        """Fluency-error probability of a caption, in [0, 1]."""


class ArchiveBackend(Backend):
    """Serves embeddings and fluency probabilities from archive files.

    Captions are keyed by their exact text, audio by dataset identifier.
    The fluency archive holds one-dimensional records keyed by caption.
    """

    def __init__(
        self,
        embeddings: EmbeddingArchive,
        fluency: Optional[EmbeddingArchive] = None,
    ):
        self._embeddings = embeddings
        if fluency is not None and fluency.dim != 1:
            raise ArchiveFormatError(
                f"fluency archive must hold dim-1 records, got dim {fluency.dim}"
            )
        self._fluency = fluency

    @classmethod
    def from_dir(cls, path: Union[str, Path]) -> "ArchiveBackend":
        """Open the conventional archive pair inside a directory.

        ``embeddings.arc`` is required; ``fluency.arc`` is optional and
        only needed when fluency probabilities are requested.
        """
        root = Path(path)
        embeddings = EmbeddingArchive(root / EMBEDDINGS_FILENAME)
        fluency_path = root / FLUENCY_FILENAME
        fluency = EmbeddingArchive(fluency_path) if fluency_path.exists() else None
        return cls(embeddings, fluency)

    def embedding_dim(self) -> int:
        return self._embeddings.dim

    def embed_text(self, text: str) -> np.ndarray:
        return self._embeddings.lookup(_require_text(text))

    def embed_audio(self, buf: AudioBuffer) -> np.ndarray:
        raise BackendCapabilityError(
            "archive backends serve audio by identifier, not by waveform; "
            "use embed_audio_id or a model backend"
        )

    def embed_audio_id(self, audio_id: str) -> np.ndarray:
        return self._embeddings.lookup(audio_id)

    def fluency_prob(self, text: str) -> float:
        _require_text(text)
        if self._fluency is None:
            raise BackendCapabilityError(
                f"no {FLUENCY_FILENAME} was loaded; fluency lookups are unavailable"
            )
        value = float(self._fluency.lookup(text)[0])
        if not 0.0 <= value <= 1.0:
            raise RangeError(f"stored fluency probability {value} outside [0, 1]")
        return value

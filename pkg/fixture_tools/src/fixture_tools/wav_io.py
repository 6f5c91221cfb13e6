"""Minimal mono WAV writer for golden audio clips.

Float-32 payloads keep the exact sample values through the evaluator's
decoder, which matters for bit-stable goldens.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np


def write_wav(path: Union[str, Path], samples: np.ndarray, rate: int, fmt: str = "float32") -> None:
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    if fmt == "float32":
        payload = x.astype("<f4").tobytes()
        fmt_tag, bits = 3, 32
    elif fmt == "pcm16":
        payload = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2").tobytes()
        fmt_tag, bits = 1, 16
    else:
        raise ValueError(f"unsupported format {fmt!r}")
    block = bits // 8
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<IHHIIHH", 16, fmt_tag, 1, rate, rate * block, block, bits))
        fh.write(b"data" + struct.pack("<I", len(payload)) + payload)

"""Decode, resample, window, and aggregate: the audio side of the metric.

Run:  python3 demos/02_audio_pipeline.py
"""

import numpy as np

from mace_eval import (
    AudioBuffer,
    aggregate_chunk_embeddings,
    decode_wav,
    encode_wav,
    iter_chunk_windows,
    plan_chunks,
    resample,
)

# Synthesize 10 s of a 440 Hz tone at 16 kHz and round-trip it through WAV.
rate = 16000
t = np.arange(rate * 10) / rate
tone = 0.5 * np.sin(2 * np.pi * 440.0 * t)
wav_bytes = encode_wav(AudioBuffer(tone, rate), "pcm16")
buf = decode_wav(wav_bytes)
print(f"decoded {len(buf)} samples at {buf.sample_rate_hz} Hz "
      f"({buf.duration_seconds:.1f} s)")

# Encoders expect a fixed rate; resampling is a polyphase windowed-sinc FIR.
buf_44k = resample(buf, 44100)
print(f"resampled to {buf_44k.sample_rate_hz} Hz: {len(buf_44k)} samples, "
      f"duration {buf_44k.duration_seconds:.4f} s")

# Long audio is split into contiguous 7 s windows; the tail keeps its true
# duration but is zero-padded to the window length for the encoder.
plan = plan_chunks(buf_44k, window_seconds=7.0)
for i, chunk in enumerate(plan.chunks):
    print(f"window {i}: samples [{chunk.start_sample}, {chunk.end_sample}) "
          f"duration {chunk.actual_duration_seconds:.1f} s "
          f"padded to {chunk.padded_length_samples}")

windows = list(iter_chunk_windows(buf_44k, plan))
print("padded window lengths:", [w.shape[0] for w, _ in windows])

# Per-window embeddings are combined with a duration-weighted mean, so a
# 3 s tail counts for 3/10 of the final audio embedding.
fake_embeddings = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
durations = [d for _, d in windows]
merged = aggregate_chunk_embeddings(fake_embeddings, durations)
print("durations:", durations, "-> weighted mean:", merged)

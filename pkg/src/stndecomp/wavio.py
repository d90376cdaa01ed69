"""Minimal RIFF/WAVE reader and writer for PCM16, PCM24, and float32.

Samples are exposed as floats in [-1, 1].  Integer formats normalize by the
full negative scale (PCM16 sample 32767 maps to 32767/32768) and writes use
round-half-away-from-zero with clipping.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, WavFormatError

_FORMATS = {"pcm16": (1, 16), "pcm24": (1, 24), "float32": (3, 32)}
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass
class AudioBuffer:
    """Multichannel float audio with its sample rate and source bit depth."""

    channels: np.ndarray  # (n_channels, n_samples)
    sample_rate: int
    source_format: str = "float32"

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=float))
        if self.channels.size == 0:
            raise ParameterError("audio buffer has no samples")
        if self.sample_rate <= 0:
            raise ParameterError(f"sample rate must be positive, got {self.sample_rate}")
        if self.source_format not in _FORMATS:
            raise ParameterError(f"unsupported format {self.source_format!r}")

    @property
    def num_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def num_channels(self) -> int:
        return self.channels.shape[0]


def read_wav(path) -> AudioBuffer:
    """Parse a RIFF/WAVE file into normalized float samples."""
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < 12:
        raise WavFormatError("file too short for a RIFF header", offset=0)
    if blob[0:4] != b"RIFF":
        raise WavFormatError("missing RIFF magic", offset=0)
    if blob[8:12] != b"WAVE":
        raise WavFormatError("missing WAVE form type", offset=8)

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, pos + 4)
        body_start = pos + 8
        if body_start + chunk_size > len(blob):
            raise WavFormatError(f"chunk {chunk_id!r} overruns the file", offset=pos)
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavFormatError("fmt chunk too short", offset=pos)
            fmt = struct.unpack_from("<HHIIHH", blob, body_start)
            if fmt[0] == WAVE_FORMAT_EXTENSIBLE:
                if chunk_size < 40:
                    raise WavFormatError("extensible fmt chunk too short", offset=pos)
                (sub_format,) = struct.unpack_from("<H", blob, body_start + 24)
                fmt = (sub_format,) + fmt[1:]
        elif chunk_id == b"data":
            data = (body_start, chunk_size)
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise WavFormatError("no fmt chunk found", offset=len(blob))
    if data is None:
        raise WavFormatError("no data chunk found", offset=len(blob))

    audio_format, n_channels, sample_rate, _, block_align, bits = fmt
    body_start, chunk_size = data
    raw = blob[body_start : body_start + chunk_size]

    if n_channels < 1:
        raise WavFormatError("zero channels declared", offset=body_start)
    if audio_format == 1 and bits == 16:
        samples = np.frombuffer(raw[: len(raw) - len(raw) % 2], dtype="<i2").astype(float) / 32768.0
        source = "pcm16"
    elif audio_format == 1 and bits == 24:
        usable = len(raw) - len(raw) % 3
        as_bytes = np.frombuffer(raw[:usable], dtype=np.uint8).reshape(-1, 3)
        padded = np.zeros((as_bytes.shape[0], 4), dtype=np.uint8)
        padded[:, 1:] = as_bytes
        samples = (padded.view("<i4").ravel() >> 8).astype(float) / float(2**23)
        source = "pcm24"
    elif audio_format == 3 and bits == 32:
        samples = np.frombuffer(raw[: len(raw) - len(raw) % 4], dtype="<f4").astype(float)
        source = "float32"
    else:
        raise WavFormatError(
            f"unsupported codec (format {audio_format}, {bits}-bit)", offset=body_start - 8
        )

    frames = samples.size // n_channels
    channels = samples[: frames * n_channels].reshape(frames, n_channels).T
    return AudioBuffer(channels=channels, sample_rate=sample_rate, source_format=source)


def _encode(channels: np.ndarray, bit_depth: str) -> bytes:
    interleaved = channels.T  # (n_samples, n_channels)
    if bit_depth == "float32":
        return interleaved.astype("<f4").tobytes()

    def round_away(values, scale, lo, hi):
        scaled = values * scale
        rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
        return np.clip(rounded, lo, hi)

    if bit_depth == "pcm16":
        return round_away(interleaved, 32768.0, -32768, 32767).astype("<i2").tobytes()
    if bit_depth == "pcm24":
        ints = round_away(interleaved, float(2**23), -(2**23), 2**23 - 1).astype("<i4")
        as_bytes = ints.reshape(-1, 1).view(np.uint8).reshape(-1, 4)
        return as_bytes[:, :3].tobytes()
    raise ParameterError(f"unsupported bit depth {bit_depth!r}")


def write_wav(path, buffer: AudioBuffer, bit_depth: str = "float32") -> None:
    """Write an AudioBuffer as RIFF/WAVE in the requested encoding."""
    if bit_depth not in _FORMATS:
        raise ParameterError(f"unsupported bit depth {bit_depth!r}")
    audio_format, bits = _FORMATS[bit_depth]
    n_channels = buffer.num_channels
    block_align = n_channels * bits // 8
    payload = _encode(buffer.channels, bit_depth)

    fmt_body = struct.pack(
        "<HHIIHH",
        audio_format,
        n_channels,
        int(buffer.sample_rate),
        int(buffer.sample_rate) * block_align,
        block_align,
        bits,
    )
    chunks = b"".join(
        [
            b"fmt ",
            struct.pack("<I", len(fmt_body)),
            fmt_body,
            b"data",
            struct.pack("<I", len(payload)),
            payload,
            b"" if len(payload) % 2 == 0 else b"\x00",
        ]
    )
    try:
        with open(path, "wb") as fh:
            fh.write(b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks)
    except OSError as exc:
        raise WavFormatError(f"cannot write {path}: {exc}") from exc

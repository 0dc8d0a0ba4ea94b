"""Binary tendon-frame codec and CSV trace recording.

Wire layout (all multi-byte fields little-endian):

    offset  size  field
    0       2     magic "TF" (0x54 0x46)
    2       1     version (0x01)
    3       1     reserved (0x00)
    4       4     sequence number, u32
    8       8     timestamp, microseconds since session start, u64
    16      36    9 x f32 tendon displacements (m)
    52      36    9 x f32 channel currents (A)
    88      4     CRC-32 (polynomial 0xEDB88320) over bytes 0..87

92 bytes total.  The CRC is checked before the header fields so any
single-bit corruption surfaces as a CRC mismatch; magic/version checks
still reject foreign frames that happen to carry a valid checksum.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .kinematics import N_TENDONS

FRAME_MAGIC = b"TF"
FRAME_VERSION = 1
_HEADER = struct.Struct("<2sBBIQ")
_PAYLOAD = struct.Struct("<9f9f")
_CRC = struct.Struct("<I")
FRAME_SIZE = _HEADER.size + _PAYLOAD.size + _CRC.size  # 92
_CRC_OFFSET = FRAME_SIZE - _CRC.size

TRACE_HEADER = "seq,t_us," + ",".join(
    [f"dl_{j}" for j in range(1, 10)] + [f"i_{j}" for j in range(1, 10)]
)


class FrameError(ValueError):
    """Base class for frame decoding failures."""


class FrameTruncated(FrameError):
    pass


class FrameCrcMismatch(FrameError):
    pass


class FrameBadMagic(FrameError):
    pass


class FrameBadVersion(FrameError):
    pass


class TraceFormatError(ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"trace line {line_number}: {message}")
        self.line_number = line_number


def _f32(value: float) -> float:
    return float(np.float32(value))


@dataclass(frozen=True)
class TendonFrame:
    """One teleoperation sample: tendon displacements plus channel currents.

    Float payloads are stored at float32 precision (the wire resolution), so
    encode/decode round-trips are bit-exact.
    """

    seq: int
    t_us: int
    displacements: tuple[float, ...]
    currents: tuple[float, ...]

    def __post_init__(self):
        if not 0 <= self.seq < 2**32:
            raise ValueError("sequence number out of u32 range")
        if not 0 <= self.t_us < 2**64:
            raise ValueError("timestamp out of u64 range")
        if len(self.displacements) != N_TENDONS or len(self.currents) != N_TENDONS:
            raise ValueError("frames carry exactly 9 displacements and 9 currents")
        object.__setattr__(self, "displacements", tuple(_f32(v) for v in self.displacements))
        object.__setattr__(self, "currents", tuple(_f32(v) for v in self.currents))


def encode_frame(frame: TendonFrame) -> bytes:
    body = _HEADER.pack(FRAME_MAGIC, FRAME_VERSION, 0, frame.seq, frame.t_us)
    body += _PAYLOAD.pack(*frame.displacements, *frame.currents)
    return body + _CRC.pack(zlib.crc32(body))


def decode_frame(buf: bytes) -> TendonFrame:
    """Inverse of encode_frame; validates length, CRC, magic and version."""
    if len(buf) < FRAME_SIZE:
        raise FrameTruncated(f"need {FRAME_SIZE} bytes, got {len(buf)}")
    buf = bytes(buf[:FRAME_SIZE])
    (expected,) = _CRC.unpack_from(buf, _CRC_OFFSET)
    actual = zlib.crc32(buf[:_CRC_OFFSET])
    if actual != expected:
        raise FrameCrcMismatch(f"crc {actual:#010x} != {expected:#010x}")
    magic, version, _, seq, t_us = _HEADER.unpack_from(buf, 0)
    if magic != FRAME_MAGIC:
        raise FrameBadMagic(f"bad magic {magic!r}")
    if version != FRAME_VERSION:
        raise FrameBadVersion(f"unsupported version {version}")
    values = _PAYLOAD.unpack_from(buf, _HEADER.size)
    return TendonFrame(seq=seq, t_us=t_us,
                       displacements=values[:N_TENDONS], currents=values[N_TENDONS:])


# ---------------------------------------------------------------------------
# CSV traces

def record_trace(frames: Iterable[TendonFrame], path) -> int:
    """Write frames as CSV; floats carry 9 significant digits (enough to
    reproduce the float32 payload exactly).  Returns the frame count."""
    count = 0
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(TRACE_HEADER + "\n")
        for frame in frames:
            values = [f"{v:.9g}" for v in (*frame.displacements, *frame.currents)]
            fh.write(f"{frame.seq},{frame.t_us}," + ",".join(values) + "\n")
            count += 1
    return count


def replay_trace(path) -> Iterator[TendonFrame]:
    """Yield the frames of a trace file, bit-equivalent to what was recorded.

    A header-only (or empty) file is an empty producer; malformed lines
    raise TraceFormatError with their line number.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if header and header.strip() != TRACE_HEADER:
            raise TraceFormatError(1, f"unexpected header {header.strip()!r}")
        for line_number, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2 + 2 * N_TENDONS:
                raise TraceFormatError(line_number, f"expected 20 fields, got {len(parts)}")
            try:
                seq = int(parts[0])
                t_us = int(parts[1])
                floats = [float(v) for v in parts[2:]]
            except ValueError as exc:
                raise TraceFormatError(line_number, str(exc)) from None
            yield TendonFrame(seq=seq, t_us=t_us,
                              displacements=tuple(floats[:N_TENDONS]),
                              currents=tuple(floats[N_TENDONS:]))

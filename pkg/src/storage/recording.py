"""
Framed binary log of a simulation run.

Layout (all little-endian):

    header   <4sHHI   magic, schema version, reserved, length of the JSON header
             JSON     RecordingHeader.to_dict(), canonical form
    frames   <IB      payload length, frame kind; then the payload

A step frame carries truth, local objects, system objects and the ledger of
one step. Each fusion diagnostic follows its step as a separate diagnostic
frame. Covariances are stored as their 21-value upper triangle.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, BinaryIO, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from src.exceptions import RecordingFormatError
from src.models.schema import (
    BeliefMass,
    Dimensions,
    LedgerEntry,
    LocalObject,
    LocalObjectList,
    ObjectClass,
    ObservationLedger,
    StateVector,
    SystemObject,
    TrackStatus,
)
from src.simulation.config import SCHEMA_VERSION
from src.simulation.runner import Recording, RecordingHeader, StepRecord
from src.simulation.traffic import TruthState
from src.utils.hashing import canonical_json

logger = logging.getLogger(__name__)

MAGIC = b"OFPL"
FRAME_STEP = 1
FRAME_DIAGNOSTIC = 2

_HEADER = struct.Struct("<4sHHI")
_FRAME = struct.Struct("<IB")
_STEP = struct.Struct("<Id")
_COUNT = struct.Struct("<H")
_SENSOR_BLOCK = struct.Struct("<HH")
_TRUTH = struct.Struct("<IB10d")
_LOCAL = struct.Struct("<I6d21d4dd??")
_SYSTEM = struct.Struct("<i6d21d4dd??5d")
_SENSOR_ID = struct.Struct("<H")
_LEDGER = struct.Struct("<HIII")
_DIAGNOSTIC = struct.Struct("<IH")

_CLASSES = list(ObjectClass)
_UPPER = np.triu_indices(6)


def _pack_covariance(matrix: np.ndarray) -> List[float]:
    return [float(v) for v in np.asarray(matrix)[_UPPER]]


def _unpack_covariance(values) -> np.ndarray:
    matrix = np.zeros((6, 6))
    matrix[_UPPER] = values
    return matrix + np.triu(matrix, 1).T


def _dims_values(dims: Dimensions) -> Tuple[float, float, float, float]:
    return dims.length, dims.width, dims.height, dims.heading


def _dims(values) -> Dimensions:
    length, width, height, heading = values
    return Dimensions(length=length, width=width, height=height, heading=heading)


def encode_step(record: StepRecord) -> bytes:
    """Serialize one step without its diagnostics."""
    parts = [_STEP.pack(record.step, record.timestamp)]

    parts.append(_COUNT.pack(len(record.truth)))
    for truth in record.truth:
        parts.append(_TRUTH.pack(
            truth.object_id,
            _CLASSES.index(truth.object_class),
            *(float(v) for v in truth.position),
            *(float(v) for v in truth.velocity),
            *_dims_values(truth.dims),
        ))

    sensor_ids = sorted(record.local_objects.objects)
    parts.append(_COUNT.pack(len(sensor_ids)))
    for sensor_id in sensor_ids:
        objects = record.local_objects.for_sensor(sensor_id)
        parts.append(_SENSOR_BLOCK.pack(sensor_id, len(objects)))
        for obj in objects:
            parts.append(_LOCAL.pack(
                obj.track_id,
                *obj.state.to_array(),
                *_pack_covariance(obj.covariance),
                *_dims_values(obj.dims),
                obj.status.score,
                obj.status.confirmed,
                obj.status.coasting,
            ))

    parts.append(_COUNT.pack(len(record.system_objects)))
    for obj in record.system_objects:
        parts.append(_SYSTEM.pack(
            obj.global_id,
            *obj.state.to_array(),
            *_pack_covariance(obj.covariance),
            *_dims_values(obj.dims),
            obj.status.score,
            obj.status.confirmed,
            obj.status.coasting,
            obj.p_exists,
            obj.s_exists,
            *obj.mass.to_array(),
        ))
        contributors = sorted(obj.contributors)
        parts.append(_COUNT.pack(len(contributors)))
        parts.extend(_SENSOR_ID.pack(sensor_id) for sensor_id in contributors)

    entries = sorted(record.ledger.entries.items())
    parts.append(_COUNT.pack(len(entries)))
    for sensor_id, entry in entries:
        parts.append(_LEDGER.pack(sensor_id, entry.regular, entry.unexpected, entry.misses))

    return b"".join(parts)


def encode_diagnostic(step: int, message: str) -> bytes:
    text = message.encode('utf-8')[:0xFFFF]
    return _DIAGNOSTIC.pack(step, len(text)) + text


class _Cursor:
    """Sequential reader over one frame payload."""

    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, layout: struct.Struct) -> Tuple[Any, ...]:
        end = self.offset + layout.size
        if end > len(self.payload):
            raise RecordingFormatError(f"truncated frame payload at byte {self.offset}")
        values = layout.unpack_from(self.payload, self.offset)
        self.offset = end
        return values

    def count(self) -> int:
        return self.take(_COUNT)[0]

    def raw(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise RecordingFormatError(f"truncated frame payload at byte {self.offset}")
        data = self.payload[self.offset:end]
        self.offset = end
        return data


def decode_step(payload: bytes) -> StepRecord:
    """
    Rebuild a step record from a step frame payload.

    Raises:
        RecordingFormatError: Truncated payload or invalid content
    """
    cursor = _Cursor(payload)
    step, timestamp = cursor.take(_STEP)

    try:
        truth = []
        for _ in range(cursor.count()):
            values = cursor.take(_TRUTH)
            truth.append(TruthState(
                object_id=values[0],
                object_class=_CLASSES[values[1]],
                position=np.array(values[2:5]),
                velocity=np.array(values[5:8]),
                dims=_dims(values[8:12]),
            ))

        objects: Dict[int, List[LocalObject]] = {}
        for _ in range(cursor.count()):
            sensor_id, count = cursor.take(_SENSOR_BLOCK)
            objects[sensor_id] = []
            for _ in range(count):
                values = cursor.take(_LOCAL)
                objects[sensor_id].append(LocalObject(
                    sensor_id=sensor_id,
                    track_id=values[0],
                    timestamp=timestamp,
                    state=StateVector.from_array(values[1:7]),
                    covariance=_unpack_covariance(values[7:28]),
                    dims=_dims(values[28:32]),
                    status=TrackStatus(score=values[32], confirmed=values[33], coasting=values[34]),
                ))

        system_objects = []
        for _ in range(cursor.count()):
            values = cursor.take(_SYSTEM)
            contributors = frozenset(cursor.take(_SENSOR_ID)[0] for _ in range(cursor.count()))
            system_objects.append(SystemObject(
                global_id=values[0],
                timestamp=timestamp,
                state=StateVector.from_array(values[1:7]),
                covariance=_unpack_covariance(values[7:28]),
                dims=_dims(values[28:32]),
                status=TrackStatus(score=values[32], confirmed=values[33], coasting=values[34]),
                p_exists=values[35],
                s_exists=values[36],
                mass=BeliefMass.from_array(values[37:40]),
                contributors=contributors,
            ))

        ledger = ObservationLedger(timestamp=timestamp)
        for _ in range(cursor.count()):
            sensor_id, regular, unexpected, misses = cursor.take(_LEDGER)
            ledger.entries[sensor_id] = LedgerEntry(regular=regular, unexpected=unexpected, misses=misses)
    except (ValueError, IndexError) as e:
        if isinstance(e, RecordingFormatError):
            raise
        raise RecordingFormatError(f"invalid content in step {step}: {e}") from e

    if cursor.offset != len(payload):
        raise RecordingFormatError(f"step {step}: {len(payload) - cursor.offset} trailing bytes")

    return StepRecord(
        step=step,
        timestamp=timestamp,
        truth=truth,
        local_objects=LocalObjectList(timestamp=timestamp, objects=objects),
        system_objects=system_objects,
        ledger=ledger,
    )


def decode_diagnostic(payload: bytes) -> Tuple[int, str]:
    cursor = _Cursor(payload)
    step, length = cursor.take(_DIAGNOSTIC)
    return step, cursor.raw(length).decode('utf-8', errors='replace')


class RecordingWriter:
    """
    Append-only, single-writer recording sink.

    The file appears at its final path only after close(); an interrupted run
    leaves nothing behind.

    Example:
        with RecordingWriter(path, header) as writer:
            run_scenario(config, sink=writer)
    """

    def __init__(self, path: Union[str, Path], header: RecordingHeader):
        self.path = Path(path)
        self.header = header
        self._temp = self.path.with_name(self.path.name + '.tmp')
        self._file: Optional[BinaryIO] = None
        self.frames = 0

    def open(self) -> "RecordingWriter":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self._temp, 'wb')
        header = canonical_json(self.header.to_dict()).encode('utf-8')
        self._file.write(_HEADER.pack(MAGIC, self.header.schema_version, 0, len(header)))
        self._file.write(header)
        return self

    def _frame(self, kind: int, payload: bytes) -> None:
        if self._file is None:
            raise RuntimeError("recording writer is not open")
        self._file.write(_FRAME.pack(len(payload), kind))
        self._file.write(payload)
        self.frames += 1

    def write_step(self, record: StepRecord) -> None:
        self._frame(FRAME_STEP, encode_step(record))
        for message in record.diagnostics:
            self._frame(FRAME_DIAGNOSTIC, encode_diagnostic(record.step, message))

    def close(self) -> Path:
        if self._file is not None:
            self._file.close()
            self._file = None
            self._temp.replace(self.path)
            logger.info(f"Recording written to {self.path} ({self.frames} frames)")
        return self.path

    def abort(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None
        if self._temp.exists():
            self._temp.unlink()

    def __enter__(self) -> "RecordingWriter":
        return self.open()

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()
        else:
            self.abort()


def _read_header(f: BinaryIO, source: Path) -> RecordingHeader:
    raw = f.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise RecordingFormatError(f"{source}: file too short for a recording header")
    magic, version, _, length = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise RecordingFormatError(f"{source}: not a recording (bad magic {magic!r})")
    if version != SCHEMA_VERSION:
        raise RecordingFormatError(f"{source}: unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    body = f.read(length)
    if len(body) < length:
        raise RecordingFormatError(f"{source}: truncated recording header")
    try:
        header = RecordingHeader.from_dict(json.loads(body.decode('utf-8')))
    except (ValueError, KeyError, TypeError) as e:
        raise RecordingFormatError(f"{source}: invalid recording header: {e}") from e
    if header.schema_version != version:
        raise RecordingFormatError(f"{source}: header and frame schema versions disagree")
    return header


def iter_frames(path: Union[str, Path]) -> Iterator[Tuple[Optional[RecordingHeader], int, bytes]]:
    """
    Yield (header, 0, b"") first, then (None, kind, payload) per frame.

    Raises:
        RecordingFormatError: Bad magic, unknown version or truncated frame
    """
    path = Path(path)
    with open(path, 'rb') as f:
        yield _read_header(f, path), 0, b""
        while True:
            raw = f.read(_FRAME.size)
            if not raw:
                return
            if len(raw) < _FRAME.size:
                raise RecordingFormatError(f"{path}: truncated frame header")
            length, kind = _FRAME.unpack(raw)
            payload = f.read(length)
            if len(payload) < length:
                raise RecordingFormatError(f"{path}: truncated frame ({len(payload)} of {length} bytes)")
            if kind not in (FRAME_STEP, FRAME_DIAGNOSTIC):
                raise RecordingFormatError(f"{path}: unknown frame kind {kind}")
            yield None, kind, payload


def read_recording(path: Union[str, Path]) -> Recording:
    """
    Load a complete recording.

    Raises:
        RecordingFormatError: Corrupt, truncated or version-mismatched file
    """
    frames = iter_frames(path)
    header, _, _ = next(frames)
    recording = Recording(header)
    for _, kind, payload in frames:
        if kind == FRAME_STEP:
            recording.steps.append(decode_step(payload))
        else:
            step, message = decode_diagnostic(payload)
            if not recording.steps or recording.steps[-1].step != step:
                raise RecordingFormatError(f"{path}: diagnostic for step {step} out of order")
            recording.steps[-1].diagnostics.append(message)

    logger.info(f"Loaded recording {path}: {len(recording)} steps")
    return recording


def header_to_dict(header: RecordingHeader) -> Dict[str, Any]:
    return {'frame': 'header', **header.to_dict()}


def step_to_dict(record: StepRecord) -> Dict[str, Any]:
    """Structured-text form of a step frame."""
    return {
        'frame': 'step',
        'step': record.step,
        'timestamp': record.timestamp,
        'truth': [
            {
                'id': t.object_id,
                'class': t.object_class.value,
                'position': [float(v) for v in t.position],
                'velocity': [float(v) for v in t.velocity],
                'dims': t.dims.model_dump(),
            }
            for t in record.truth
        ],
        'local_objects': [
            {
                'sensor_id': obj.sensor_id,
                'track_id': obj.track_id,
                'state': obj.state.model_dump(),
                'covariance_diag': [float(v) for v in np.diag(obj.covariance)],
                'dims': obj.dims.model_dump(),
                'status': obj.status.model_dump(),
            }
            for obj in record.local_objects.all_objects()
        ],
        'system_objects': [
            {
                'global_id': obj.global_id,
                'state': obj.state.model_dump(),
                'dims': obj.dims.model_dump(),
                'status': obj.status.model_dump(),
                'p_exists': obj.p_exists,
                's_exists': obj.s_exists,
                'mass': obj.mass.model_dump(),
                'contributors': sorted(obj.contributors),
            }
            for obj in record.system_objects
        ],
        'ledger': {str(k): v.model_dump() for k, v in sorted(record.ledger.entries.items())},
        'diagnostics': list(record.diagnostics),
    }


def dump_records(path: Union[str, Path]) -> Iterator[Dict[str, Any]]:
    """Header line, then one dict per step with its diagnostics attached."""
    frames = iter_frames(path)
    header, _, _ = next(frames)
    yield header_to_dict(header)
    pending: Optional[StepRecord] = None
    for _, kind, payload in frames:
        if kind == FRAME_STEP:
            if pending is not None:
                yield step_to_dict(pending)
            pending = decode_step(payload)
        elif pending is not None:
            pending.diagnostics.append(decode_diagnostic(payload)[1])
    if pending is not None:
        yield step_to_dict(pending)

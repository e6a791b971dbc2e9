"""Record container: JSON header + columnar binary payload + CSV sidecars.

The payload is little-endian float64, one lead after another, length- and
checksum-guarded. Floats in sidecars are written with shortest round-trip
repr, so read(write(c)) == c holds bit-exactly. All writes go through a
temp-file rename.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataIntegrityError, UnsupportedVersionError
from .record import AccelStream, Event, EventLog, MultiLeadRecord
from .rhythm import RPeakAnnotations, RrSeries

FORMAT_VERSION = "1"


@dataclass
class RecordContainer:
    """A record plus its sidecars, seed registry, and provenance chain."""

    record: MultiLeadRecord
    annotations: RPeakAnnotations = None
    events: EventLog = None
    accel: AccelStream = None
    seeds: dict = field(default_factory=dict)
    provenance: list = field(default_factory=list)

    def with_stage(self, entry):
        """Append one provenance entry (the chain is append-only)."""
        return RecordContainer(
            record=self.record,
            annotations=self.annotations,
            events=self.events,
            accel=self.accel,
            seeds=dict(self.seeds),
            provenance=list(self.provenance) + [entry],
        )

    def __eq__(self, other):
        if not isinstance(other, RecordContainer):
            return NotImplemented
        return (
            self.record == other.record
            and self.annotations == other.annotations
            and (self.events or EventLog()) == (other.events or EventLog())
            and self.accel == other.accel
            and self.seeds == other.seeds
            and self.provenance == other.provenance
        )


def _atomic_write_bytes(path, payload):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _atomic_write_text(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _stem(path):
    path = str(path)
    return path[:-5] if path.endswith(".json") else path


def _events_csv(events):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["source", "kind", "leads", "onset_sample", "duration_samples",
         "params"]
    )
    for ev in events.sorted():
        writer.writerow(ev.to_row())
    return buf.getvalue()


def _annotations_csv(ann):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["index", "value", "flag"])
    for idx, conf in zip(ann.indices, ann.confidence):
        writer.writerow([int(idx), repr(float(conf)), ann.source])
    return buf.getvalue()


def _accel_csv(accel):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["ax_g", "ay_g", "az_g"])
    for row in accel.samples:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_rr_csv(path, rr: RrSeries):
    """RR series sidecar: (index, value, flag) columns."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["index", "value_ms", "flag"])
    for i, (val, flag) in enumerate(zip(rr.intervals_ms, rr.flags)):
        writer.writerow([i, repr(float(val)), flag])
    _atomic_write_text(str(path), buf.getvalue())


def write_record(path, container: RecordContainer):
    """Write <stem>.json, <stem>.bin, and any sidecars; returns the stem."""
    stem = _stem(path)
    rec = container.record
    payload = np.ascontiguousarray(rec.data, dtype="<f8").tobytes()
    base = os.path.basename(stem)

    sidecars = {"events": None, "annotations": None, "accel": None}
    if container.events is not None:
        sidecars["events"] = base + ".events.csv"
        _atomic_write_text(stem + ".events.csv", _events_csv(container.events))
    if container.annotations is not None:
        sidecars["annotations"] = base + ".rpeaks.csv"
        _atomic_write_text(
            stem + ".rpeaks.csv", _annotations_csv(container.annotations)
        )
    if container.accel is not None:
        sidecars["accel"] = base + ".accel.csv"
        _atomic_write_text(stem + ".accel.csv", _accel_csv(container.accel))

    header = {
        "format_version": FORMAT_VERSION,
        "sample_rate_hz": rec.sample_rate_hz,
        "units": rec.units,
        "t0_s": rec.t0_s,
        "lead_labels": list(rec.lead_labels),
        "n_samples": rec.n_samples,
        "payload": {
            "file": base + ".bin",
            "dtype": "<f8",
            "layout": "lead-major",
            "bytes": len(payload),
            "sha256": hashlib.sha256(payload).hexdigest(),
        },
        "seeds": container.seeds,
        "provenance": container.provenance,
        "sidecars": sidecars,
        "annotations_meta": None,
        "accel_meta": None,
    }
    if container.annotations is not None:
        header["annotations_meta"] = {
            "sample_rate_hz": container.annotations.sample_rate_hz,
            "source": container.annotations.source,
            "refractory_s": container.annotations.refractory_s,
        }
    if container.accel is not None:
        header["accel_meta"] = {
            "sample_rate_hz": container.accel.sample_rate_hz,
            "t0_s": container.accel.t0_s,
        }

    _atomic_write_bytes(stem + ".bin", payload)
    _atomic_write_text(stem + ".json", json.dumps(header, indent=2) + "\n")
    return stem


def _read_events(path):
    events = EventLog()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            events.add(Event.from_row(row))
    return events


def _read_annotations(path, meta):
    indices = []
    confidence = []
    source = "detected"
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            indices.append(int(row[0]))
            confidence.append(float(row[1]))
            source = row[2]
    return RPeakAnnotations(
        indices=np.array(indices, dtype=int),
        sample_rate_hz=meta["sample_rate_hz"],
        source=meta.get("source", source),
        confidence=np.array(confidence, dtype=float),
        refractory_s=meta.get("refractory_s", 0.2),
    )


def _read_accel(path, meta):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            rows.append([float(v) for v in row])
    samples = np.array(rows, dtype=float) if rows else np.zeros((0, 3))
    return AccelStream(
        sample_rate_hz=meta["sample_rate_hz"],
        samples=samples,
        t0_s=meta.get("t0_s", 0.0),
    )


def read_record(path):
    """Read a container written by :func:`write_record`.

    Verifies the format version, payload length, and checksum before
    constructing anything; failures raise UnsupportedVersionError or
    DataIntegrityError.
    """
    stem = _stem(path)
    header_path = stem + ".json"
    if not os.path.exists(header_path):
        raise DataIntegrityError(f"missing container header {header_path}")
    with open(header_path) as fh:
        header = json.load(fh)

    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"container format version {version!r} is not supported "
            f"(expected {FORMAT_VERSION!r})"
        )

    meta = header["payload"]
    payload_path = os.path.join(os.path.dirname(stem), meta["file"])
    if not os.path.exists(payload_path):
        raise DataIntegrityError(f"missing payload file {payload_path}")
    with open(payload_path, "rb") as fh:
        payload = fh.read()
    if len(payload) != meta["bytes"]:
        raise DataIntegrityError(
            f"payload is {len(payload)} bytes, header says {meta['bytes']} "
            "(truncated or padded file)"
        )
    digest = hashlib.sha256(payload).hexdigest()
    if digest != meta["sha256"]:
        raise DataIntegrityError("payload checksum mismatch")

    n_leads = len(header["lead_labels"])
    n_samples = header["n_samples"]
    if len(payload) != 8 * n_leads * n_samples:
        raise DataIntegrityError(
            "payload size disagrees with lead/sample counts"
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(n_leads, n_samples)
    record = MultiLeadRecord(
        sample_rate_hz=header["sample_rate_hz"],
        lead_labels=tuple(header["lead_labels"]),
        data=data,
        units=header["units"],
        t0_s=header["t0_s"],
    )

    dirname = os.path.dirname(stem)
    sidecars = header.get("sidecars", {})
    events = annotations = accel = None
    if sidecars.get("events"):
        events = _read_events(os.path.join(dirname, sidecars["events"]))
    if sidecars.get("annotations"):
        annotations = _read_annotations(
            os.path.join(dirname, sidecars["annotations"]),
            header["annotations_meta"],
        )
    if sidecars.get("accel"):
        accel = _read_accel(
            os.path.join(dirname, sidecars["accel"]), header["accel_meta"]
        )

    return RecordContainer(
        record=record,
        annotations=annotations,
        events=events,
        accel=accel,
        seeds=header.get("seeds", {}),
        provenance=header.get("provenance", []),
    )

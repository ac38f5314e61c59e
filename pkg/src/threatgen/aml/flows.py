"""Tripartite transaction tensors: raw records in, (direction, M, E, T) tensors out.

Direction 0 is inflow (external -> internal), direction 1 is outflow
(internal -> external).  Each entry is the cumulative amount moved between the
pair inside one time window.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Optional

import numpy as np

MAGIC = b"FLOWT\x00"
FORMAT_VERSION = 1

IN = 0
OUT = 1


class TensorizeError(ValueError):
    pass


@dataclass(frozen=True)
class TransactionRecord:
    source_id: str
    dest_id: str
    amount: float
    timestamp: float  # seconds since epoch

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError(f"amount must be positive, got {self.amount}")
        if self.source_id == self.dest_id:
            raise ValueError("source and destination must differ")


@dataclass
class FlowTensor:
    """amounts: (2, M, E, T) nonnegative array; counts are derived, never stored."""

    amounts: np.ndarray
    window_length: float = 86400.0

    def __post_init__(self):
        self.amounts = np.asarray(self.amounts, dtype=np.float64)
        if self.amounts.ndim != 4 or self.amounts.shape[0] != 2:
            raise ValueError(f"amounts must have shape (2, M, E, T), got {self.amounts.shape}")
        if np.any(self.amounts < 0):
            raise ValueError("amounts must be nonnegative")
        if self.window_length <= 0:
            raise ValueError("window_length must be positive")

    @property
    def counts(self) -> np.ndarray:
        return (self.amounts > 0).astype(np.float64)

    @property
    def shape(self):
        return self.amounts.shape

    def total(self) -> float:
        return float(self.amounts.sum())


@dataclass
class AmlSample:
    tensor: FlowTensor
    provenance: str = "real"
    label: Optional[str] = None  # "suspicious" | "legitimate", evaluation sets only
    account_ids: list = field(default_factory=list)


def parse_timestamp(value: str) -> float:
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def read_transactions_csv(path) -> list[TransactionRecord]:
    """Reads 'source_id,dest_id,amount,timestamp' rows with ISO-8601 timestamps."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"source_id", "dest_id", "amount", "timestamp"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"transaction file must have header columns {sorted(required)}")
        for row in reader:
            records.append(TransactionRecord(
                source_id=row["source_id"],
                dest_id=row["dest_id"],
                amount=float(row["amount"]),
                timestamp=parse_timestamp(row["timestamp"]),
            ))
    return records


def write_transactions_csv(path, records: Iterable[TransactionRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_id", "dest_id", "amount", "timestamp"])
        for r in records:
            ts = datetime.fromtimestamp(r.timestamp, tz=timezone.utc).isoformat()
            writer.writerow([r.source_id, r.dest_id, f"{r.amount!r}", ts])


def tensorize(records: list[TransactionRecord], internal_ids, window: float,
              M: int, E: int, T: int, start: float | None = None) -> FlowTensor:
    """Aggregate raw records into a flow tensor.

    Every record must touch exactly one internal account.  Internal accounts
    are indexed in sorted-id order; external counterparties get slots in order
    of first appearance.  Accumulation runs in record order at 64-bit, so total
    mass is conserved exactly with respect to that summation order.
    """
    internal = sorted(set(internal_ids))
    if len(internal) > M:
        raise TensorizeError(f"{len(internal)} internal accounts exceed M={M}")
    internal_index = {a: i for i, a in enumerate(internal)}
    external_index: dict = {}

    if start is None:
        start = min((r.timestamp for r in records), default=0.0)

    amounts = np.zeros((2, M, E, T), dtype=np.float64)
    for r in records:
        src_internal = r.source_id in internal_index
        dst_internal = r.dest_id in internal_index
        if src_internal == dst_internal:
            raise TensorizeError(
                f"record {r.source_id}->{r.dest_id} touches "
                f"{'two' if src_internal else 'zero'} internal accounts"
            )
        direction = OUT if src_internal else IN
        m = internal_index[r.source_id if src_internal else r.dest_id]
        ext = r.dest_id if src_internal else r.source_id
        if ext not in external_index:
            if len(external_index) >= E:
                raise TensorizeError(
                    f"external counterparties overflow E={E} slots "
                    f"(at least {len(external_index) + 1} needed)"
                )
            external_index[ext] = len(external_index)
        e = external_index[ext]
        t = int((r.timestamp - start) // window)
        if not 0 <= t < T:
            raise TensorizeError(f"timestamp {r.timestamp} falls in window {t}, outside [0, {T})")
        amounts[direction, m, e, t] += r.amount
    return FlowTensor(amounts, window_length=window)


def save_flow_tensors(path, tensors: list[FlowTensor]) -> None:
    """Binary container: magic, version, count, then per tensor a shape header
    (direction, M, E, T) + window length + raw little-endian float32 amounts."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(tensors)))
        for t in tensors:
            d, m, e, tt = t.amounts.shape
            fh.write(struct.pack("<IIIId", d, m, e, tt, t.window_length))
            fh.write(t.amounts.astype("<f4").tobytes())


def load_flow_tensors(path) -> list[FlowTensor]:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError("not a flow-tensor container")
        version, count = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported container version {version}")
        tensors = []
        for _ in range(count):
            d, m, e, tt, window = struct.unpack("<IIIId", fh.read(24))
            n = d * m * e * tt
            data = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(d, m, e, tt)
            tensors.append(FlowTensor(data.astype(np.float64), window_length=window))
    return tensors

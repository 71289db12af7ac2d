"""Session persistence: Touchstone s2p traces, per-modality timestamped CSVs,
and a binary snapshot archive with an integrity manifest.

File layout under the output directory:
    <session-id>/manifest.json
    <session-id>/<modality>.csv
    <session-id>/<modality>.bin     (snapshot: float64-LE matrix)
    <session-id>/trace-<k>.s2p      (one per trace sample)
    <session-id>/events.csv         (gap/error markers, if any)
Writers are deterministic: identical sessions produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import StorageError
from .samples import (ActuationEvent, AngleSample, ErrorMarker, GapMarker,
                      MagneticFluxSample, TimestampedSample, TraceSample)
from .vna import ComplexTrace, FrequencyGrid

SOFTWARE_VERSION = "mpada 0.1.0"

_UNIT_HZ = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def _fmt9(x: float) -> str:
    return f"{x:.9g}"


def _fmt17(x: float) -> str:
    return f"{x:.17g}"


# --------------------------------------------------------------------------
# Touchstone


@dataclass(frozen=True)
class TouchstoneData:
    frequencies_hz: np.ndarray
    s11: np.ndarray
    s21: np.ndarray
    s12: np.ndarray
    s22: np.ndarray

    def to_trace(self, path=("P1", "P2")) -> ComplexTrace:
        f = self.frequencies_hz
        grid = FrequencyGrid(float(f[0]), float(f[-1]), len(f))
        return ComplexTrace(grid=grid, values=self.s21, path=path)


def write_touchstone(trace: ComplexTrace, path_info: tuple[str, str] | None = None) -> bytes:
    """Touchstone v1, RI, R 50. The measured parameter is written as S21;
    unmeasured parameters are written as 0."""
    values = trace.values
    if not np.all(np.isfinite(values)):
        raise StorageError("trace contains non-finite values")
    path = path_info or trace.path
    lines = [f"! path {path[0]} {path[1]}", "# Hz S RI R 50"]
    for f, v in zip(trace.grid.frequencies(), values):
        row = [_fmt9(f), "0", "0", _fmt9(v.real), _fmt9(v.imag), "0", "0", "0", "0"]
        lines.append(" ".join(row))
    return ("\n".join(lines) + "\n").encode("ascii")


def read_touchstone(data: bytes) -> TouchstoneData:
    """Parse a 2-port Touchstone file; RI format only, unit normalized to Hz."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise StorageError(f"touchstone: not ASCII: {exc}") from exc
    scale = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if scale is not None:
                raise StorageError(f"touchstone line {lineno}: duplicate option line")
            tokens = line[1:].split()
            tokens_up = [t.upper() for t in tokens]
            unit = next((t for t in tokens_up if t in _UNIT_HZ), "GHZ")
            if "MA" in tokens_up or "DB" in tokens_up:
                raise StorageError("touchstone: MA/DB formats are not supported (RI only)")
            if "RI" not in tokens_up:
                raise StorageError("touchstone: missing RI format token")
            scale = _UNIT_HZ[unit]
            continue
        if scale is None:
            raise StorageError(f"touchstone line {lineno}: data before option line")
        fields = line.split()
        if len(fields) != 9:
            raise StorageError(
                f"touchstone line {lineno}: expected 9 fields for 2-port data,"
                f" got {len(fields)}")
        try:
            nums = [float(x) for x in fields]
        except ValueError:
            raise StorageError(f"touchstone line {lineno}: non-numeric field") from None
        rows.append(nums)
    if scale is None:
        raise StorageError("touchstone: missing option line")
    if not rows:
        raise StorageError("touchstone: no data rows")
    arr = np.asarray(rows)
    freqs = arr[:, 0] * scale
    if np.any(np.diff(freqs) <= 0):
        raise StorageError("touchstone: frequencies not strictly increasing")
    return TouchstoneData(
        frequencies_hz=freqs,
        s11=arr[:, 1] + 1j * arr[:, 2],
        s21=arr[:, 3] + 1j * arr[:, 4],
        s12=arr[:, 5] + 1j * arr[:, 6],
        s22=arr[:, 7] + 1j * arr[:, 8],
    )


# --------------------------------------------------------------------------
# CSV time series


def _csv_rows_for(buffer: list[TimestampedSample]) -> tuple[list[str], list[list]]:
    """Header + rows for one modality; markers are excluded (they go to
    events.csv)."""
    data = [s for s in buffer if not isinstance(s.payload, (GapMarker, ErrorMarker))]
    if not data:
        return ["t_ms"], []
    first = data[0].payload
    if isinstance(first, MagneticFluxSample):
        header = ["t_ms", "bx", "by", "bz"]
        rows = [[s.t_ms, s.payload.bx, s.payload.by, s.payload.bz] for s in data]
    elif isinstance(first, AngleSample):
        header = ["t_ms", "theta_deg"]
        rows = [[s.t_ms, s.payload.theta_deg] for s in data]
    elif isinstance(first, ActuationEvent):
        header = ["t_ms", "event", "position"]
        rows = [[s.t_ms, s.payload.event, s.payload.position] for s in data]
    elif isinstance(first, TraceSample):
        n = first.trace.grid.n_points
        header = ["t_ms", "step_id", "tx", "rx"]
        for i in range(n):
            header += [f"re_{i}", f"im_{i}"]
        rows = []
        for s in data:
            tr = s.payload.trace
            row = [s.t_ms, s.payload.step_id, tr.path[0], tr.path[1]]
            for v in tr.values:
                row += [v.real, v.imag]
            rows.append(row)
    else:
        raise StorageError(f"unsupported payload type {type(first).__name__}")
    return header, rows


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if not math.isfinite(float(value)):
        raise StorageError("non-finite value in CSV row")
    return _fmt17(float(value))


def modality_csv(buffer: list[TimestampedSample]) -> bytes:
    header, rows = _csv_rows_for(buffer)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")


def events_csv(session) -> bytes:
    lines = ["t_ms,modality,kind,detail"]
    entries = []
    for modality, buf in session.buffers.items():
        for s in buf:
            if isinstance(s.payload, GapMarker):
                entries.append((s.t_ms, modality, "gap", f"missed={s.payload.missed_ticks}"))
            elif isinstance(s.payload, ErrorMarker):
                entries.append((s.t_ms, modality, "error", s.payload.message.replace(",", ";")))
    for t, modality, kind, detail in sorted(entries):
        lines.append(f"{_fmt17(t)},{modality},{kind},{detail}")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_timeseries_csv(data: bytes) -> tuple[list[str], list[list]]:
    """Round-trip reader: numeric cells come back as float/int exactly."""
    text = data.decode("ascii")
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise StorageError("empty CSV")
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        row = []
        for cell in ln.split(","):
            try:
                row.append(int(cell))
            except ValueError:
                try:
                    row.append(float(cell))
                except ValueError:
                    row.append(cell)
        rows.append(row)
    return header, rows


# --------------------------------------------------------------------------
# Snapshot (manifest + raw little-endian arrays)


def _snapshot_matrix(buffer: list[TimestampedSample]) -> tuple[np.ndarray, dict]:
    """Numeric matrix for one modality; string columns become integer codes
    with the lookup tables recorded in the column metadata."""
    header, rows = _csv_rows_for(buffer)
    tables: dict[str, list[str]] = {}
    matrix = np.zeros((len(rows), len(header)), dtype="<f8")
    for j, name in enumerate(header):
        for i, row in enumerate(rows):
            value = row[j]
            if isinstance(value, str):
                table = tables.setdefault(name, [])
                if value not in table:
                    table.append(value)
                matrix[i, j] = table.index(value)
            else:
                matrix[i, j] = float(value)
    meta = {"columns": header, "string_tables": tables, "rows": len(rows)}
    return matrix, meta


def write_session_archive(session, out_dir: str | Path,
                          write_s2p: bool = True) -> Path:
    """Persist a completed session; returns the session directory."""
    from .engine import SessionState  # local import to avoid a cycle

    if session.state not in (SessionState.COMPLETE, SessionState.ABORTED):
        raise StorageError(f"cannot archive a session in state {session.state.value}")

    session_dir = Path(out_dir) / session.id
    session_dir.mkdir(parents=True, exist_ok=True)

    files: dict[str, bytes] = {}
    modality_meta: dict[str, dict] = {}
    for modality in sorted(session.buffers):
        buf = session.buffers[modality]
        files[f"{modality}.csv"] = modality_csv(buf)
        matrix, meta = _snapshot_matrix(buf)
        files[f"{modality}.bin"] = matrix.tobytes()
        modality_meta[modality] = meta

    if any(isinstance(s.payload, (GapMarker, ErrorMarker))
           for buf in session.buffers.values() for s in buf):
        files["events.csv"] = events_csv(session)

    if write_s2p:
        k = 0
        for modality in sorted(session.buffers):
            for s in session.buffers[modality]:
                if isinstance(s.payload, TraceSample):
                    files[f"trace-{k}.s2p"] = write_touchstone(s.payload.trace)
                    k += 1

    hashes = {name: hashlib.sha256(blob).hexdigest() for name, blob in sorted(files.items())}
    manifest = {
        "session_id": session.id,
        "state": session.state.value,
        "partial": session.partial,
        "software": SOFTWARE_VERSION,
        "plan": session.plan.raw_document,
        "modalities": modality_meta,
        "files": hashes,
    }
    files["manifest.json"] = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()

    for name, blob in files.items():
        (session_dir / name).write_bytes(blob)
    return session_dir


def verify_archive(session_dir: str | Path) -> bool:
    """Recompute the manifest hashes over the data files."""
    session_dir = Path(session_dir)
    manifest = json.loads((session_dir / "manifest.json").read_text())
    for name, expected in manifest["files"].items():
        blob = (session_dir / name).read_bytes()
        if hashlib.sha256(blob).hexdigest() != expected:
            return False
    return True

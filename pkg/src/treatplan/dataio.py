"""File formats: trajectory CSV ingestion/export and the model text format.

Trajectory CSV schema (header required)::

    patient_id,session,score,cost

``session`` is a 0-based integer with 0 the baseline/intake visit; an empty
``score`` field means the reading is missing; ``cost`` is in currency units.
Rows belonging to one patient must appear together with strictly increasing
session indices.

The model file is a line-oriented plain-text table: the model class, one
``row`` line of five probabilities per conditioning bin, one ``effect`` line
of mean and std per next-step bin, and optional ``count`` lines mirroring the
raw fit counts.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .domain import BIN_BY_LABEL, DeltaBin, MISSING, N_BINS, ScaleConfig, observed
from .errors import CsvFormatError, InvalidInputError
from .transitions import (
    MODEL_CLASS_BY_NAME,
    ModelClass,
    Trajectory,
    TrajectoryDataset,
    TrajectorySession,
    TransitionModel,
)

_HEADER = ["patient_id", "session", "score", "cost"]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def read_trajectories(path: Union[str, Path]) -> TrajectoryDataset:
    """Parse a trajectory CSV, reporting the line number of any bad row."""
    trajectories: list[Trajectory] = []
    current_id: str | None = None
    current: list[TrajectorySession] = []

    def flush():
        nonlocal current, current_id
        if current_id is not None:
            trajectories.append(Trajectory(current_id, tuple(current)))
        current = []

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(1, "empty file; expected header "
                                 f"{','.join(_HEADER)}") from None
        if [h.strip() for h in header] != _HEADER:
            raise CsvFormatError(1, f"expected header {','.join(_HEADER)}, got {','.join(header)}")
        seen_ids: set[str] = set()
        last_session = -1
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(_HEADER):
                raise CsvFormatError(line_no, f"expected {len(_HEADER)} fields, got {len(row)}")
            pid, session_s, score_s, cost_s = (f.strip() for f in row)
            if not pid:
                raise CsvFormatError(line_no, "empty patient_id")
            try:
                session = int(session_s)
            except ValueError:
                raise CsvFormatError(line_no, f"session must be an integer, got {session_s!r}") from None
            if session < 0:
                raise CsvFormatError(line_no, "session must be non-negative")
            if score_s:
                try:
                    obs = observed(float(score_s))
                except ValueError:
                    raise CsvFormatError(line_no, f"score must be a number or empty, got {score_s!r}") from None
            else:
                obs = MISSING
            try:
                cost = float(cost_s)
            except ValueError:
                raise CsvFormatError(line_no, f"cost must be a number, got {cost_s!r}") from None
            if cost < 0:
                raise CsvFormatError(line_no, "cost must be non-negative")

            if pid != current_id:
                if pid in seen_ids:
                    raise CsvFormatError(line_no, f"rows for patient {pid!r} are not contiguous")
                flush()
                current_id = pid
                seen_ids.add(pid)
                last_session = -1
            if session <= last_session:
                raise CsvFormatError(
                    line_no, f"session {session} out of order for patient {pid!r}"
                )
            last_session = session
            current.append(TrajectorySession(session, obs, cost))
        flush()
    return TrajectoryDataset(tuple(trajectories))


def write_trajectories(data: Union[TrajectoryDataset, Iterable[Trajectory]], path: Union[str, Path]) -> None:
    """Emit the CSV the reader ingests (floats at 6 significant digits)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_HEADER)
        for traj in data:
            for s in traj.sessions:
                score = "" if s.observation.is_missing else _fmt(s.observation.score)
                writer.writerow([traj.patient_id, s.session, score, _fmt(s.cost)])


def save_model(model: TransitionModel, path: Union[str, Path]) -> None:
    """Serialize a transition model to the plain-text table format."""
    lines = [f"model_class {model.model_class.value}"]
    if model.model_class is ModelClass.ZEROTH_ORDER:
        row_labels = ["marginal"]
    else:
        row_labels = [DeltaBin(i).label for i in range(N_BINS)]
    for label, row in zip(row_labels, model.table):
        lines.append("row " + label + " " + " ".join(f"{p!r}" for p in row))
    for b in DeltaBin:
        lines.append(
            f"effect {b.label} {model.effect_means[b]!r} {model.effect_stds[b]!r}"
        )
    if model.counts is not None:
        for label, row in zip(row_labels, model.counts):
            lines.append("count " + label + " " + " ".join(str(int(c)) for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: Union[str, Path], cfg: ScaleConfig = ScaleConfig()) -> TransitionModel:
    """Parse a model file written by :func:`save_model`."""
    text = Path(path).read_text()
    model_class: ModelClass | None = None
    rows: dict[str, list[float]] = {}
    effects: dict[str, tuple[float, float]] = {}
    counts: dict[str, list[int]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "model_class":
            if len(parts) != 2 or parts[1] not in MODEL_CLASS_BY_NAME:
                raise InvalidInputError(f"bad model_class line: {line!r}")
            model_class = MODEL_CLASS_BY_NAME[parts[1]]
        elif tag == "row":
            if len(parts) != 2 + N_BINS:
                raise InvalidInputError(f"bad row line: {line!r}")
            rows[parts[1]] = [float(p) for p in parts[2:]]
        elif tag == "effect":
            if len(parts) != 4:
                raise InvalidInputError(f"bad effect line: {line!r}")
            effects[parts[1]] = (float(parts[2]), float(parts[3]))
        elif tag == "count":
            counts[parts[1]] = [int(c) for c in parts[2:]]
        else:
            raise InvalidInputError(f"unknown line in model file: {line!r}")
    if model_class is None:
        raise InvalidInputError("model file missing model_class line")
    if model_class is ModelClass.ZEROTH_ORDER:
        if set(rows) != {"marginal"}:
            raise InvalidInputError("zeroth-order model file needs exactly one 'marginal' row")
        table = np.asarray([rows["marginal"]])
        count_arr = np.asarray([counts["marginal"]]) if counts else None
    else:
        expected = {b.label for b in DeltaBin}
        if set(rows) != expected:
            raise InvalidInputError(f"model file must define rows {sorted(expected)}")
        table = np.asarray([rows[b.label] for b in DeltaBin])
        count_arr = np.asarray([counts[b.label] for b in DeltaBin]) if len(counts) == N_BINS else None
    if set(effects) != {b.label for b in DeltaBin}:
        raise InvalidInputError("model file must define one effect line per bin")
    means = np.asarray([effects[b.label][0] for b in DeltaBin])
    stds = np.asarray([effects[b.label][1] for b in DeltaBin])
    if any(lbl not in BIN_BY_LABEL and lbl != "marginal" for lbl in rows):
        raise InvalidInputError("unknown bin label in model file")
    return TransitionModel(
        model_class=model_class,
        table=table,
        effect_means=means,
        effect_stds=stds,
        counts=count_arr,
        scale=cfg,
    )

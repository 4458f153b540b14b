"""Newline-delimited JSON event trace of one run."""

from pathlib import Path
from typing import IO, Any, Literal, Optional

from loguru import logger
from pydantic import BaseModel, ConfigDict

from sefcsim.core.exceptions import SimulationError

TraceType = Literal[
    "round",
    "role",
    "membership",
    "delivery",
    "handover",
    "recluster",
    "orphan",
    "death",
    "summary",
]


class TraceRecord(BaseModel):
    """One trace line: event type, tick, time and the event's payload fields."""

    model_config = ConfigDict(extra="allow", frozen=True)

    type: TraceType
    tick: int
    t: float


class TraceWriter:
    """Append trace records to a file, one JSON object per line."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._handle: Optional[IO[str]] = None
        self.records_written = 0

    def __enter__(self) -> "TraceWriter":
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("w", encoding="utf-8", newline="\n")
        except OSError as error:
            raise SimulationError(f"Cannot open trace file {self.path}: {error}") from error
        return self

    def __exit__(self, *exc_info: Any) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None
        logger.debug("Wrote {} trace records to {}", self.records_written, self.path)

    def emit(self, type: TraceType, tick: int, t: float, **payload: Any) -> None:
        if self._handle is None:
            raise SimulationError("TraceWriter used outside its context")
        record = TraceRecord(type=type, tick=tick, t=t, **payload)
        self._handle.write(record.model_dump_json() + "\n")
        self.records_written += 1

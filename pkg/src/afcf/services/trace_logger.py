"""
afcf/services/trace_logger.py — Трасса сходимости и событий конвейера.

Записи копятся в буфере и сбрасываются в файл JSON lines (одна запись —
одна строка). Без файла записи остаются в памяти (для тестов и бенчмарка).

Типы записей:
    • admm.iteration — iteration, objective, lagrangian, r, s, rho
    • stage.start / stage.done — стадия конвейера и её длительность
"""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

from afcf.models.graph import TraceEntry

logger = logging.getLogger(__name__)


class TraceEvent(str, Enum):
    """Типы событий трассы."""

    ADMM_ITERATION = "admm.iteration"
    STAGE_START = "stage.start"
    STAGE_DONE = "stage.done"


class TraceLogger:
    """Буферизованный писатель JSON lines."""

    def __init__(self, path: Path | None = None, max_buffer_size: int = 1000) -> None:
        self.path = path
        self._buffer: list[dict[str, Any]] = []
        self._records: list[dict[str, Any]] = []
        self._max_buffer = max_buffer_size
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("", encoding="utf-8")

    def log(self, event: TraceEvent | str, **fields: Any) -> None:
        """Добавить запись трассы."""
        event_str = event.value if isinstance(event, TraceEvent) else event
        record = {
            "event": event_str,
            **fields,
            "logged_at": datetime.now(timezone.utc).isoformat(),
        }
        self._records.append(record)
        if self.path is None:
            return
        self._buffer.append(record)
        if len(self._buffer) >= self._max_buffer:
            self.flush()

    def admm_iteration(self, entry: TraceEntry) -> None:
        """Обратный вызов для ``fair_graph.solve``."""
        self.log(TraceEvent.ADMM_ITERATION, **entry.model_dump())

    def flush(self) -> int:
        """Сбросить буфер в файл; возвращает число записанных строк."""
        if self.path is None or not self._buffer:
            return 0
        with self.path.open("a", encoding="utf-8") as fh:
            for record in self._buffer:
                fh.write(json.dumps(record, default=str) + "\n")
        flushed = len(self._buffer)
        self._buffer = []
        logger.debug("Flushed %d trace records to %s", flushed, self.path)
        return flushed

    @property
    def records(self) -> list[dict[str, Any]]:
        return list(self._records)

    @property
    def buffer_size(self) -> int:
        return len(self._buffer)

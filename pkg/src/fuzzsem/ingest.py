"""Parsing of srsENB/srsUE style profiling logs.

A log line looks like::

    17:52:25.246 [RLC ] Info DRB1 Tx SDU
    17:52:26.094 [PHY1] Info [05788] PDSCH: l_crb=1, harq=0, ...

Lines that do not match (hex dumps, banners, wrapped text) are attached to
the content of the preceding record.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

MS_PER_DAY = 86_400_000

_LINE_RE = re.compile(
    r"^(\d{2}):(\d{2}):(\d{2})\.(\d{3})\s+\[\s*([^\]]*?)\s*\]\s+(\S+)\s+(\S.*?)\s*$"
)
_PHY_RE = re.compile(r"^\[(\d+)\]\s+([A-Za-z][A-Za-z0-9_]*):\s*(\S.*)$")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")


class EmptyDocument(ValueError):
    """Raised when a file yields no parseable log record."""


class Level(enum.Enum):
    DEBUG = "Debug"
    INFO = "Info"
    WARNING = "Warning"
    ERROR = "Error"


_LEVELS = {
    "debug": Level.DEBUG,
    "d": Level.DEBUG,
    "info": Level.INFO,
    "i": Level.INFO,
    "warning": Level.WARNING,
    "warn": Level.WARNING,
    "w": Level.WARNING,
    "error": Level.ERROR,
    "e": Level.ERROR,
}

# Incremented whenever an unrecognised level string is mapped to Info.
unknown_level_count = 0


@dataclass(frozen=True)
class LogRecord:
    timestamp_ms: int
    layer: str
    level: Level
    content: str
    subframe: int | None = None
    channel: str | None = None

    def to_line(self) -> str:
        """Render the record back into the log grammar."""
        h, rem = divmod(self.timestamp_ms, 3_600_000)
        m, rem = divmod(rem, 60_000)
        s, ms = divmod(rem, 1000)
        head = f"{h:02d}:{m:02d}:{s:02d}.{ms:03d} [{self.layer:<4}] {self.level.value}"
        if self.subframe is not None:
            return f"{head} [{self.subframe:05d}] {self.channel}: {self.content}"
        return f"{head} {self.content}"


@dataclass(frozen=True)
class EventGroup:
    timestamp_ms: int
    elapsed_s: int
    text: str
    n_records: int = 1


@dataclass(frozen=True)
class ProfilingDocument:
    source_path: str
    records: tuple[LogRecord, ...]
    groups: tuple[EventGroup, ...]
    skipped_lines: int = 0


def parse_line(line: str) -> LogRecord | None:
    """Parse one log line; ``None`` marks a line that is not a record."""
    global unknown_level_count
    match = _LINE_RE.match(line.rstrip("\r\n"))
    if match is None:
        return None
    hh, mm, ss, ms, layer, level_s, rest = match.groups()
    hh, mm, ss, ms = int(hh), int(mm), int(ss), int(ms)
    if hh > 23 or mm > 59 or ss > 59 or not layer:
        return None
    level = _LEVELS.get(level_s.lower())
    if level is None:
        unknown_level_count += 1
        level = Level.INFO
    timestamp = ((hh * 60 + mm) * 60 + ss) * 1000 + ms

    phy = _PHY_RE.match(rest)
    if phy is not None:
        return LogRecord(
            timestamp_ms=timestamp,
            layer=layer,
            level=level,
            content=phy.group(3),
            subframe=int(phy.group(1)),
            channel=phy.group(2),
        )
    return LogRecord(timestamp_ms=timestamp, layer=layer, level=level, content=rest)


def normalize_content(content: str) -> str:
    """Replace every non-alphanumeric run by one space and trim."""
    return _NON_ALNUM.sub(" ", content).strip()


def elapsed_ms(first_ms: int, ts_ms: int) -> int:
    """Milliseconds from ``first_ms`` to ``ts_ms``, wrapping at midnight."""
    delta = ts_ms - first_ms
    if delta < 0:
        delta += MS_PER_DAY
    return delta


def group_records(
    records: Sequence[LogRecord],
    per_second: bool = False,
    origin_ms: int | None = None,
) -> list[EventGroup]:
    """Merge records sharing a timestamp into one normalized sentence.

    Elapsed time is measured from ``origin_ms`` (default: the first record).
    With ``per_second`` the grouping key is the whole second instead of the
    full millisecond timestamp.
    """
    if not records:
        raise ValueError("group_records needs at least one record")
    first = records[0].timestamp_ms if origin_ms is None else origin_ms
    buckets: dict[int, list[LogRecord]] = {}
    offsets: dict[int, int] = {}
    for rec in records:
        key = rec.timestamp_ms - rec.timestamp_ms % 1000 if per_second else rec.timestamp_ms
        off = elapsed_ms(first, rec.timestamp_ms)
        buckets.setdefault(key, []).append(rec)
        offsets[key] = min(off, offsets.get(key, off))

    groups = []
    # stable sort: equal offsets keep first-appearance order
    for key in sorted(buckets, key=offsets.__getitem__):
        parts = (normalize_content(r.content) for r in buckets[key])
        groups.append(
            EventGroup(
                timestamp_ms=key,
                elapsed_s=offsets[key] // 1000,
                text=" ".join(p for p in parts if p),
                n_records=len(buckets[key]),
            )
        )
    return groups


def parse_lines(
    lines: Iterable[str],
    source_path: str = "<memory>",
    per_second: bool = False,
    exclude: str | None = None,
) -> ProfilingDocument:
    """Build a document from raw lines.

    Records whose content contains ``exclude`` are dropped after parsing,
    which keeps them out of the embedding input.
    """
    contents: list[list[str]] = []
    heads: list[LogRecord] = []
    skipped = 0
    for line in lines:
        rec = parse_line(line)
        if rec is None:
            text = line.strip()
            if text and heads:
                contents[-1].append(text)
            skipped += 1
            continue
        heads.append(rec)
        contents.append([rec.content])

    records = []
    for rec, parts in zip(heads, contents):
        if len(parts) > 1:
            rec = LogRecord(
                timestamp_ms=rec.timestamp_ms,
                layer=rec.layer,
                level=rec.level,
                content=" ".join(parts),
                subframe=rec.subframe,
                channel=rec.channel,
            )
        records.append(rec)
    if not records:
        raise EmptyDocument(f"no log records found in {source_path}")

    kept = [r for r in records if exclude is None or exclude not in r.content]
    groups = (
        group_records(kept, per_second=per_second, origin_ms=records[0].timestamp_ms)
        if kept
        else []
    )
    return ProfilingDocument(
        source_path=source_path,
        records=tuple(records),
        groups=tuple(groups),
        skipped_lines=skipped,
    )


def read_text(path: str | Path) -> str:
    return Path(path).read_bytes().decode("utf-8", errors="replace")


def parse_file(
    path: str | Path, per_second: bool = False, exclude: str | None = None
) -> ProfilingDocument:
    """Parse a profiling file. Raises :class:`EmptyDocument` if nothing parses."""
    text = read_text(path)
    return parse_lines(text.splitlines(), str(path), per_second=per_second, exclude=exclude)

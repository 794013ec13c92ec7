"""Partial calendar dates and relationship validity intervals.

Dates come at three granularities: a year (``2018``), a month
(``2018-06``), or a day (``2018-06-15``). A partial date normalizes to the
full span of days it covers, so a year reaches from January 1 to
December 31 and a month from its first to its last day. Validity checks
treat a partial date as that whole span: an interval is valid at a date
when the two spans overlap.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from datetime import date

from .errors import InvalidArgument

_DATE_RE = re.compile(r"^(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$")


@dataclass(frozen=True, slots=True)
class PartialDate:
    """A calendar date with year, optional month, optional day."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.year <= 9999:
            raise InvalidArgument(f"year out of range: {self.year}")
        if self.day is not None and self.month is None:
            raise InvalidArgument("a day requires a month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise InvalidArgument(f"month out of range: {self.month}")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise InvalidArgument(
                    f"day out of range for {self.year}-{self.month:02d}: {self.day}"
                )

    @classmethod
    def parse(cls, text: str) -> "PartialDate":
        """Parse ``YYYY``, ``YYYY-MM``, or ``YYYY-MM-DD``."""
        if not isinstance(text, str):
            raise InvalidArgument(f"expected a date string, got {type(text).__name__}")
        m = _DATE_RE.match(text.strip())
        if m is None:
            raise InvalidArgument(f"not a date (YYYY, YYYY-MM, or YYYY-MM-DD): {text!r}")
        year, month, day = m.groups()
        return cls(int(year), int(month) if month else None, int(day) if day else None)

    def first_day(self) -> date:
        """Earliest day this partial date covers."""
        return date(self.year, self.month or 1, self.day or 1)

    def last_day(self) -> date:
        """Latest day this partial date covers."""
        if self.month is None:
            return date(self.year, 12, 31)
        if self.day is None:
            return date(self.year, self.month, calendar.monthrange(self.year, self.month)[1])
        return date(self.year, self.month, self.day)

    def __str__(self) -> str:
        if self.month is None:
            return f"{self.year:04d}"
        if self.day is None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


def as_partial_date(value: "PartialDate | str") -> PartialDate:
    """Coerce a string or pass through an existing partial date."""
    if isinstance(value, PartialDate):
        return value
    return PartialDate.parse(value)


@dataclass(frozen=True, slots=True)
class TemporalInterval:
    """When a relationship holds. Absent end means it still does.

    Both bounds are optional; an absent start means the fact has held
    since before anyone recorded it.
    """

    start: PartialDate | None = None
    end: PartialDate | None = None

    def __post_init__(self) -> None:
        if self.start is not None and self.end is not None:
            if self.start.first_day() > self.end.last_day():
                raise InvalidArgument(
                    f"interval ends before it starts: [{self.start}, {self.end}]"
                )

    @property
    def open_ended(self) -> bool:
        return self.end is None

    def __str__(self) -> str:
        return f"[{self.start or ''}, {self.end or ''}]"


UNBOUNDED = TemporalInterval()


def interval(start: PartialDate | str | None, end: PartialDate | str | None) -> TemporalInterval:
    """Build an interval from optional date strings."""
    return TemporalInterval(
        as_partial_date(start) if start is not None else None,
        as_partial_date(end) if end is not None else None,
    )


def is_valid_at(iv: TemporalInterval, at: PartialDate | str) -> bool:
    """True when the interval's span overlaps the span of ``at``."""
    at = as_partial_date(at)
    if iv.start is not None and iv.start.first_day() > at.last_day():
        return False
    if iv.end is not None and iv.end.last_day() < at.first_day():
        return False
    return True

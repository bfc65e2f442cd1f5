from datetime import datetime

from smartbuilding.core import SimClock


def clock(t: int, anchor: datetime = None) -> SimClock:
    return SimClock(t, anchor)

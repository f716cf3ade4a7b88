from .qtable import QTable  # noqa
from .schedule import SCHEDULE_SETTINGS, Schedule, ScheduleKind  # noqa

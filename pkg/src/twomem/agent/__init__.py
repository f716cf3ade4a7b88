from .agent import EpisodeResult, EvalResult, TwoMemoryAgent  # noqa
from .config import AgentConfig, AgentMode  # noqa
from .tracker import ScoreTracker  # noqa

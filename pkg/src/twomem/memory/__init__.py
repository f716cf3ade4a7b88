from .episodic import (  # noqa
    ECEntry,
    ECMemory,
    EmptyEpisodeError,
    MissingEstimateError,
    discounted_returns,
)
from .features import FeatureExtractor, FeatureKind  # noqa
from .replay import MemoryKind, ReplayBuffer, Transition  # noqa

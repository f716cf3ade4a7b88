from enum import Enum
from typing import Optional, Sequence, Tuple, Union

from typing_extensions import Self

import numpy as np

# seed argument accepted by `numpy.random.default_rng`
Seed = Union[int, np.random.SeedSequence, None]


class FeatureKind(Enum):
    IDENTITY = "identity"
    RANDOM_PROJECTION = "random_projection"

    def __str__(self: Self) -> str:
        return self._value_


class FeatureExtractor:
    """Maps state features into the space episodic memory keys on.

    The random projection matrix is drawn once from a seeded standard normal
    (scaled by `1/sqrt(target_dim)`) and is read-only afterwards.

    Attributes:
        kind: `FeatureKind` instance.
        projection_matrix: Optional array of shape `(target_dim, input_dim)`.
    """

    def __init__(
        self: Self,
        kind: FeatureKind = FeatureKind.IDENTITY,
        input_dim: Optional[int] = None,
        target_dim: Optional[int] = None,
        seed: Seed = None,
    ) -> None:
        """Initializes the feature extractor instance.

        Args:
            kind: `FeatureKind` instance. Defaults to identity.
            input_dim: Dimension of the raw features. Required for random
                projections.
            target_dim: Dimension of the projected features. Required for
                random projections.
            seed: Seed for the projection matrix. Defaults to `None`.

        Raises:
            ValueError: Missing or non-positive dimensions for a projection.
        """
        self.kind = kind
        self.projection_matrix = None

        if kind == FeatureKind.RANDOM_PROJECTION:
            if not input_dim or not target_dim or input_dim < 1 or target_dim < 1:
                raise ValueError(
                    "Random projections require positive 'input_dim' and 'target_dim'."
                )

            rng = np.random.default_rng(seed)
            matrix = rng.standard_normal((target_dim, input_dim)) / np.sqrt(target_dim)
            matrix.setflags(write=False)
            self.projection_matrix = matrix

    def __call__(self: Self, features: Sequence[float]) -> np.ndarray:
        vector = np.asarray(features, dtype=float)

        if self.projection_matrix is None:
            return vector

        return self.projection_matrix @ vector

    def key(self: Self, features: Sequence[float]) -> Tuple[float, ...]:
        """Returns the hashable memory key for a feature vector."""
        return tuple(float(x) for x in self(features))

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np


class FadingModel(ABC):
    antennas: int

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """Vector (M,) si size es None, si no matriz (size, M)."""
        raise NotImplementedError

    @abstractmethod
    def mean(self) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def covariance(self) -> np.ndarray:
        raise NotImplementedError

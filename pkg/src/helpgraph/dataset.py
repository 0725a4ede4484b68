from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LabeledDataset:
    """Node features plus partial domain labels and a train/test split.

    ``labeled`` holds domain indices; ``labels``, ``train_mask`` and
    ``test_mask`` are aligned with it.
    """

    domain_features: np.ndarray
    user_features: np.ndarray
    labeled: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    test_mask: np.ndarray
    domain_ids: list[str] = field(default_factory=list)
    user_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.domain_features = np.asarray(self.domain_features, dtype=np.float64)
        self.user_features = np.asarray(self.user_features, dtype=np.float64)
        self.labeled = np.asarray(self.labeled, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        self.train_mask = np.asarray(self.train_mask, dtype=bool)
        self.test_mask = np.asarray(self.test_mask, dtype=bool)
        n = len(self.labeled)
        if not (len(self.labels) == len(self.train_mask) == len(self.test_mask) == n):
            raise ValueError("labels and split masks must align with the labeled indices")
        if np.any(self.train_mask & self.test_mask):
            raise ValueError("train and test masks overlap")
        if n and (self.labeled.min() < 0 or self.labeled.max() >= self.n_domains):
            raise ValueError("labeled domain index out of range")
        if len(np.unique(self.labeled)) != n:
            raise ValueError("a domain is labeled twice")
        if not np.all(np.isin(self.labels, (0.0, 1.0))):
            raise ValueError("labels must be 0 or 1")
        for name in ("domain_features", "user_features"):
            arr = getattr(self, name)
            if arr.ndim != 2 or not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be a finite 2-d matrix")
        if not self.domain_ids:
            self.domain_ids = [f"d{i}" for i in range(self.n_domains)]
        if not self.user_ids:
            self.user_ids = [f"u{i}" for i in range(self.n_users)]

    @property
    def n_domains(self) -> int:
        return self.domain_features.shape[0]

    @property
    def n_users(self) -> int:
        return self.user_features.shape[0]

    @property
    def train_idx(self) -> np.ndarray:
        return self.labeled[self.train_mask]

    @property
    def train_labels(self) -> np.ndarray:
        return self.labels[self.train_mask]

    @property
    def test_idx(self) -> np.ndarray:
        return self.labeled[self.test_mask]

    @property
    def test_labels(self) -> np.ndarray:
        return self.labels[self.test_mask]

    def train_label_vector(self) -> np.ndarray:
        """Per-domain training labels with -1 marking domains whose label is hidden."""
        out = np.full(self.n_domains, -1.0)
        out[self.train_idx] = self.train_labels
        return out

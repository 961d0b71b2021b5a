"""FIFO transition buffer with uniform or |delta|-prioritised sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .learner import SarsaTuple

MODES = ("uniform", "prioritized", "off")


class EmptyBufferError(LookupError):
    pass


@dataclass(frozen=True)
class ReplayConfig:
    capacity: int = 100_000
    mode: str = "off"
    priority_floor: float = 1e-3

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"replay mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "off" and self.capacity < 1:
            raise ValueError("capacity must be at least 1")
        if self.priority_floor <= 0:
            raise ValueError("priority floor must be positive")


@dataclass
class BufferEntry:
    tuple: SarsaTuple
    priority: float = 0.0

    def __post_init__(self):
        if self.priority < 0:
            raise ValueError("priority must be nonnegative")


class ReplayBuffer:
    """Ring buffer; entries are addressed by a monotonically increasing id."""

    def __init__(self, config: ReplayConfig):
        self.config = config
        cap = max(config.capacity, 1)
        self._entries: list[BufferEntry | None] = [None] * cap
        self._priority = np.zeros(cap)
        self._pushed = 0
        self.stale_updates = 0

    def __len__(self):
        return min(self._pushed, len(self._entries))

    @property
    def capacity(self) -> int:
        return len(self._entries)

    def _slot(self, entry_id: int) -> int | None:
        if entry_id < self._pushed - len(self) or entry_id >= self._pushed or entry_id < 0:
            return None
        return entry_id % self.capacity

    def push(self, entry: BufferEntry) -> int:
        """Store ``entry``, evicting the oldest when full; returns its id."""
        entry_id = self._pushed
        slot = entry_id % self.capacity
        self._entries[slot] = entry
        self._priority[slot] = entry.priority
        self._pushed += 1
        return entry_id

    def get(self, entry_id: int) -> BufferEntry:
        slot = self._slot(entry_id)
        if slot is None:
            raise KeyError(entry_id)
        return self._entries[slot]

    def ids(self) -> range:
        return range(self._pushed - len(self), self._pushed)

    def probabilities(self) -> np.ndarray:
        """Sampling probability of each live entry, in id order."""
        n = len(self)
        if n == 0:
            return np.zeros(0)
        slots = np.array([i % self.capacity for i in self.ids()])
        if self.config.mode == "prioritized":
            mass = self._priority[slots] + self.config.priority_floor
            return mass / mass.sum()
        return np.full(n, 1.0 / n)

    def sample(self, rng: np.random.Generator) -> tuple[int, BufferEntry]:
        n = len(self)
        if self.config.mode == "off":
            raise EmptyBufferError("replay is disabled for this buffer")
        if n == 0:
            raise EmptyBufferError("cannot sample from an empty buffer")
        oldest = self._pushed - n
        if self.config.mode == "uniform":
            k = int(rng.integers(n))
        else:
            # live slots in id order: [oldest % cap, ...) wrapping around
            start = oldest % self.capacity
            pri = np.concatenate([self._priority[start:n], self._priority[:start]]) if n == self.capacity \
                else self._priority[:n]
            cum = np.cumsum(pri + self.config.priority_floor)
            k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            k = min(k, n - 1)
        entry_id = oldest + k
        return entry_id, self._entries[entry_id % self.capacity]

    def update_priority(self, entry_id: int, new_delta_abs: float) -> None:
        slot = self._slot(entry_id)
        if slot is None:
            self.stale_updates += 1
            return
        p = abs(float(new_delta_abs))
        self._priority[slot] = p
        self._entries[slot].priority = p

"""Replay storage: two transition buffers and an initial-state store.

The co-design loop keeps three stores with identical ring discipline:
a per-morphology buffer cleared at every morphology iteration, a pooled
cross-morphology buffer that is never cleared during a run, and a store of
episode start states used by the fitness surrogate. All use FIFO eviction
once capacity is reached and uniform sampling with replacement.

Transition arrays are allocated lazily on first push and grown geometrically
up to capacity, so large capacities cost nothing until used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ShapeError, StateError

ACTION_BOUND = 1.0


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool
    morphology: np.ndarray


def _validate(t: Transition):
    s = np.asarray(t.state, dtype=np.float64)
    a = np.asarray(t.action, dtype=np.float64)
    s2 = np.asarray(t.next_state, dtype=np.float64)
    m = np.asarray(getattr(t.morphology, "values", t.morphology), dtype=np.float64)
    if s.shape != s2.shape or s.ndim != 1:
        raise ShapeError(f"state {s.shape} and next_state {s2.shape} must be equal-length vectors")
    for name, arr in (("state", s), ("action", a), ("next_state", s2), ("morphology", m)):
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"non-finite {name} in transition")
    if not np.isfinite(t.reward):
        raise NumericError("non-finite reward in transition")
    if np.any(np.abs(a) > ACTION_BOUND + 1e-12):
        raise ValueError(f"action outside [-{ACTION_BOUND}, {ACTION_BOUND}]")
    return s, a, float(t.reward), s2, bool(t.done), m


class ReplayBuffer:
    """Ring buffer of transitions with uniform sampling with replacement."""

    def __init__(self, capacity: int, seed: int = 0):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.rng = np.random.default_rng(seed)
        self.size = 0
        self._head = 0          # index of the oldest entry
        self._alloc = 0
        self._states = None
        self._actions = None
        self._rewards = None
        self._next_states = None
        self._dones = None
        self._morphs = None
        self.total_pushed = 0   # instrumentation, never reset by clear()
        self.clear_count = 0

    def __len__(self):
        return self.size

    def _ensure(self, s, a, m, needed):
        if self._states is None:
            self._alloc = min(self.capacity, max(needed, 1024))
            self._states = np.empty((self._alloc, s.size))
            self._actions = np.empty((self._alloc, a.size))
            self._rewards = np.empty(self._alloc)
            self._next_states = np.empty((self._alloc, s.size))
            self._dones = np.empty(self._alloc, dtype=bool)
            self._morphs = np.empty((self._alloc, m.size))
        elif needed > self._alloc:
            new = min(self.capacity, max(needed, self._alloc * 2))
            for name in ("_states", "_actions", "_rewards", "_next_states", "_dones", "_morphs"):
                old = getattr(self, name)
                grown = np.empty((new,) + old.shape[1:], dtype=old.dtype)
                grown[: self.size] = old[: self.size]
                setattr(self, name, grown)
            self._alloc = new

    def push(self, t: Transition) -> None:
        s, a, r, s2, done, m = _validate(t)
        self._ensure(s, a, m, self.size + 1)
        if self.size < self.capacity:
            idx = (self._head + self.size) % self._alloc
            self.size += 1
        else:
            idx = self._head                       # overwrite oldest
            self._head = (self._head + 1) % self._alloc
        self._states[idx] = s
        self._actions[idx] = a
        self._rewards[idx] = r
        self._next_states[idx] = s2
        self._dones[idx] = done
        self._morphs[idx] = m
        self.total_pushed += 1

    def clear(self) -> None:
        self.size = 0
        self._head = 0
        self.clear_count += 1

    def _draw(self, n):
        if self.size == 0:
            raise StateError("cannot sample from an empty buffer")
        if n <= 0:
            raise ValueError("batch size must be positive")
        raw = self.rng.integers(0, self.size, size=n)
        return (self._head + raw) % self._alloc

    def sample_arrays(self, n: int):
        """Batch of n uniform draws as a dict of stacked arrays (training path)."""
        idx = self._draw(n)
        return {
            "state": self._states[idx],
            "action": self._actions[idx],
            "reward": self._rewards[idx],
            "next_state": self._next_states[idx],
            "done": self._dones[idx].astype(np.float64),
            "morphology": self._morphs[idx],
        }

    def sample_batch(self, n: int) -> list[Transition]:
        """Batch of n uniform draws as Transition objects."""
        idx = self._draw(n)
        return [
            Transition(self._states[i].copy(), self._actions[i].copy(),
                       float(self._rewards[i]), self._next_states[i].copy(),
                       bool(self._dones[i]), self._morphs[i].copy())
            for i in idx
        ]

    def snapshot(self) -> list[Transition]:
        """All stored transitions, oldest first (test/instrumentation helper)."""
        order = (self._head + np.arange(self.size)) % self._alloc if self.size else []
        return [
            Transition(self._states[i].copy(), self._actions[i].copy(),
                       float(self._rewards[i]), self._next_states[i].copy(),
                       bool(self._dones[i]), self._morphs[i].copy())
            for i in order
        ]

    # -- optional persistence: documented header + content arrays ------------

    def dump(self, path) -> None:
        """Write buffer contents to an .npz with a (capacity, count, dims) header."""
        order = (self._head + np.arange(self.size)) % self._alloc if self.size else np.array([], int)
        hdr = np.array([self.capacity, self.size,
                        0 if self._states is None else self._states.shape[1],
                        0 if self._actions is None else self._actions.shape[1],
                        0 if self._morphs is None else self._morphs.shape[1]], dtype=np.int64)
        if self.size:
            np.savez(path, header=hdr, states=self._states[order],
                     actions=self._actions[order], rewards=self._rewards[order],
                     next_states=self._next_states[order], dones=self._dones[order],
                     morphs=self._morphs[order])
        else:
            np.savez(path, header=hdr)

    @classmethod
    def load(cls, path, seed: int = 0) -> "ReplayBuffer":
        with np.load(path) as data:
            hdr = data["header"]
            buf = cls(int(hdr[0]), seed=seed)
            if int(hdr[1]):
                for i in range(int(hdr[1])):
                    buf.push(Transition(data["states"][i], data["actions"][i],
                                        float(data["rewards"][i]), data["next_states"][i],
                                        bool(data["dones"][i]), data["morphs"][i]))
        return buf


class InitStateStore:
    """Ring of episode start states, same FIFO discipline as ReplayBuffer."""

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.size = 0
        self._head = 0
        self._states = None
        self.total_pushed = 0

    def __len__(self):
        return self.size

    def push(self, state) -> None:
        s = np.asarray(state, dtype=np.float64)
        if s.ndim != 1:
            raise ShapeError("initial state must be a vector")
        if not np.all(np.isfinite(s)):
            raise NumericError("non-finite initial state")
        if self._states is None:
            self._states = np.empty((min(self.capacity, 1024), s.size))
        elif self.size + 1 > self._states.shape[0] and self._states.shape[0] < self.capacity:
            grown = np.empty((min(self.capacity, self._states.shape[0] * 2), s.size))
            grown[: self.size] = self._states[: self.size]
            self._states = grown
        if self.size < self.capacity:
            idx = (self._head + self.size) % self._states.shape[0]
            self.size += 1
        else:
            idx = self._head
            self._head = (self._head + 1) % self._states.shape[0]
        self._states[idx] = s
        self.total_pushed += 1

    def sample(self, n: int, rng) -> np.ndarray:
        """n uniform draws with replacement, stacked (n, dim)."""
        if self.size == 0:
            raise StateError("cannot sample from an empty initial-state store")
        idx = (self._head + rng.integers(0, self.size, size=n)) % self._states.shape[0]
        return self._states[idx].copy()

    def all_states(self) -> np.ndarray:
        order = (self._head + np.arange(self.size)) % self._states.shape[0] if self.size else []
        return self._states[order].copy() if self.size else np.empty((0, 0))

"""
Per-node transient cache.

Provides:
- Byte-capacity accounting over whole objects (sizes in bits)
- Pin counts: pinned objects are never evicted
- In-flight placeholders reserved while an object is being fetched
- Pluggable eviction policies: Random, FIFO, LRU, LFU

One cache belongs to one simulated node and is shared by its CPU slots.
"""

from abc import ABC, abstractmethod
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from sortedcontainers import SortedList

from app.core.exceptions import AllPinnedError, NotResidentError, ObjectTooLargeError
from app.models.config import EvictionPolicyName


@dataclass(slots=True)
class CacheEntry:
    size_bits: int
    inserted_seq: int
    pins: int = 0
    ready: bool = True


class EvictionPolicy(ABC):
    """Orders resident keys from first to last eviction candidate."""

    name: str = "base"

    @abstractmethod
    def on_insert(self, key: str, seq: int) -> None: ...

    @abstractmethod
    def on_access(self, key: str) -> None: ...

    @abstractmethod
    def on_remove(self, key: str) -> None: ...

    @abstractmethod
    def candidates(self) -> Iterator[str]:
        """Resident keys in eviction order; the cache skips pinned ones."""


class FIFOEviction(EvictionPolicy):
    name = "fifo"

    def __init__(self) -> None:
        self._order: OrderedDict[str, None] = OrderedDict()

    def on_insert(self, key: str, seq: int) -> None:
        self._order[key] = None

    def on_access(self, key: str) -> None:
        pass

    def on_remove(self, key: str) -> None:
        self._order.pop(key, None)

    def candidates(self) -> Iterator[str]:
        return iter(self._order)


class LRUEviction(FIFOEviction):
    """FIFO order refreshed on every hit."""

    name = "lru"

    def on_access(self, key: str) -> None:
        if key in self._order:
            self._order.move_to_end(key)


class LFUEviction(EvictionPolicy):
    """Lowest access count first, ties broken by insertion order."""

    name = "lfu"

    def __init__(self) -> None:
        self._rank: SortedList = SortedList()
        self._meta: dict[str, tuple[int, int]] = {}

    def on_insert(self, key: str, seq: int) -> None:
        self._meta[key] = (1, seq)
        self._rank.add((1, seq, key))

    def on_access(self, key: str) -> None:
        meta = self._meta.get(key)
        if meta is None:
            return
        count, seq = meta
        self._rank.remove((count, seq, key))
        self._meta[key] = (count + 1, seq)
        self._rank.add((count + 1, seq, key))

    def on_remove(self, key: str) -> None:
        meta = self._meta.pop(key, None)
        if meta is not None:
            self._rank.remove((meta[0], meta[1], key))

    def candidates(self) -> Iterator[str]:
        return (key for _, _, key in self._rank)

    def access_count(self, key: str) -> int:
        return self._meta[key][0] if key in self._meta else 0


class RandomEviction(EvictionPolicy):
    """Uniformly random victims drawn from a seeded generator."""

    name = "random"

    def __init__(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)
        self._keys: SortedList = SortedList()
        self._seq: dict[str, int] = {}

    def on_insert(self, key: str, seq: int) -> None:
        self._seq[key] = seq
        self._keys.add((seq, key))

    def on_access(self, key: str) -> None:
        pass

    def on_remove(self, key: str) -> None:
        seq = self._seq.pop(key, None)
        if seq is not None:
            self._keys.remove((seq, key))

    def candidates(self) -> Iterator[str]:
        snapshot = list(self._keys)
        return (snapshot[i][1] for i in self._rng.permutation(len(snapshot)))


def make_eviction_policy(name: EvictionPolicyName, seed: int = 0) -> EvictionPolicy:
    """Build the eviction policy for a config value."""
    if name == EvictionPolicyName.RANDOM:
        return RandomEviction(seed)
    if name == EvictionPolicyName.FIFO:
        return FIFOEviction()
    if name == EvictionPolicyName.LFU:
        return LFUEviction()
    return LRUEviction()


class NodeCache:
    """
    Whole-object cache with capacity in bits.

    Invariant: ``used_bits`` equals the sum of resident sizes and never
    exceeds ``capacity_bits``.
    """

    def __init__(self, capacity_bits: int, policy: Optional[EvictionPolicy] = None):
        if capacity_bits < 0:
            raise ValueError("capacity_bits must be nonnegative")
        self.capacity_bits = capacity_bits
        self.policy = policy or LRUEviction()
        self.used_bits = 0
        self._entries: dict[str, CacheEntry] = {}
        self._seq = 0

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def keys(self) -> list[str]:
        return list(self._entries)

    def entry(self, key: str) -> CacheEntry:
        try:
            return self._entries[key]
        except KeyError:
            raise NotResidentError(f"object {key!r} is not cached") from None

    def is_ready(self, key: str) -> bool:
        entry = self._entries.get(key)
        return entry is not None and entry.ready

    def lookup(self, key: str) -> bool:
        """Hit/miss check; a hit refreshes the policy's recency/frequency."""
        if key in self._entries:
            self.policy.on_access(key)
            return True
        return False

    def insert(self, key: str, size_bits: int, ready: bool = True) -> list[str]:
        """
        Make ``key`` resident, evicting as needed.

        Args:
            key: Object id, must not already be resident
            size_bits: Object size
            ready: False for a placeholder whose data is still in flight

        Returns:
            Evicted keys in eviction order

        Raises:
            ObjectTooLargeError: The object exceeds the whole cache
            AllPinnedError: Not enough unpinned data can be evicted
        """
        if key in self._entries:
            raise ValueError(f"object {key!r} is already cached")
        if size_bits > self.capacity_bits:
            raise ObjectTooLargeError(
                f"object {key!r} ({size_bits} bits) exceeds cache capacity {self.capacity_bits}"
            )

        victims: list[str] = []
        needed = self.used_bits + size_bits - self.capacity_bits
        if needed > 0:
            freed = 0
            for candidate in self.policy.candidates():
                entry = self._entries[candidate]
                if entry.pins:
                    continue
                victims.append(candidate)
                freed += entry.size_bits
                if freed >= needed:
                    break
            if freed < needed:
                raise AllPinnedError(
                    f"cannot free {needed} bits for {key!r}: only {freed} bits unpinned"
                )
            for victim in victims:
                self._drop(victim)

        self._seq += 1
        self._entries[key] = CacheEntry(size_bits=size_bits, inserted_seq=self._seq, ready=ready)
        self.used_bits += size_bits
        self.policy.on_insert(key, self._seq)
        return victims

    def mark_ready(self, key: str) -> None:
        self.entry(key).ready = True

    def pin(self, key: str) -> int:
        entry = self.entry(key)
        entry.pins += 1
        return entry.pins

    def unpin(self, key: str) -> int:
        entry = self.entry(key)
        if entry.pins == 0:
            raise NotResidentError(f"object {key!r} is not pinned")
        entry.pins -= 1
        return entry.pins

    def remove(self, key: str) -> None:
        """Drop an unpinned object outright (e.g. an aborted placeholder)."""
        entry = self.entry(key)
        if entry.pins:
            raise ValueError(f"object {key!r} is pinned")
        self._drop(key)

    def clear(self) -> list[str]:
        """Discard everything; returns the keys that were resident."""
        keys = list(self._entries)
        for key in keys:
            self.policy.on_remove(key)
        self._entries.clear()
        self.used_bits = 0
        return keys

    def _drop(self, key: str) -> None:
        entry = self._entries.pop(key)
        self.used_bits -= entry.size_bits
        self.policy.on_remove(key)

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

from dataclasses import dataclass

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


def fnv1a64(text: str) -> int:
	"""64-bit FNV-1a over the UTF-8 bytes of ``text``."""
	h = FNV_OFFSET
	for byte in text.encode("utf-8"):
		h ^= byte
		h = (h * FNV_PRIME) & MASK64
	return h


def fmix64(h: int) -> int:
	"""MurmurHash3 64-bit finalizer; spreads low-bit differences over every bit."""
	h ^= h >> 33
	h = (h * 0xFF51AFD7ED558CCD) & MASK64
	h ^= h >> 33
	h = (h * 0xC4CEB9FE1A85EC53) & MASK64
	h ^= h >> 33
	return h


def id_hash(text: str) -> int:
	"""fnv1a64 followed by fmix64, so ids differing only in their last characters land far apart."""
	return fmix64(fnv1a64(text))


@dataclass(frozen=True)
class RngStream:
	"""A named, reproducible random stream.

	The same (seed, purpose, index) always yields the same PCG64 sequence;
	different purposes or indices map to independent SeedSequence spawn keys.
	"""

	seed: int
	purpose: str
	index: int = 0

	def generator(self) -> np.random.Generator:
		seq = np.random.SeedSequence(entropy=self.seed & MASK64, spawn_key=(fnv1a64(self.purpose), self.index))
		return np.random.Generator(np.random.PCG64(seq))

# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

"""Little-endian checkpoint container.

Layout::

    magic     8 bytes  b"ASCKPT01"
    version   u32
    n_blocks  u32
    per block:
        name_len u16, name (utf-8), n_arrays u32
        per array:
            name_len u16, name (utf-8), ndim u32, extents u64 * ndim,
            data as <f8 in C order

Blocks are encoder, decoder, classifier and, when task weights are saved,
a ``lambda`` block holding ``logits``.
"""

import struct
from pathlib import Path

import numpy as np

from autoselect.exceptions import ConfigError
from autoselect.seqmodel.params import BLOCKS, ModelParams

MAGIC = b"ASCKPT01"
VERSION = 1
LAMBDA_BLOCK = "lambda"


def _write_name(out: bytearray, name: str):
	raw = name.encode("utf-8")
	out += struct.pack("<H", len(raw))
	out += raw


def encode_checkpoint(params: ModelParams, logits=None) -> bytes:
	blocks = [(b, params.block(b)) for b in BLOCKS]
	if logits is not None:
		blocks.append((LAMBDA_BLOCK, {"logits": np.asarray(logits, dtype=np.float64)}))

	out = bytearray(MAGIC)
	out += struct.pack("<II", VERSION, len(blocks))
	for block_name, arrays in blocks:
		_write_name(out, block_name)
		out += struct.pack("<I", len(arrays))
		for name, arr in arrays.items():
			arr = np.ascontiguousarray(arr, dtype="<f8")
			_write_name(out, name)
			out += struct.pack("<I", arr.ndim)
			out += struct.pack(f"<{arr.ndim}Q", *arr.shape)
			out += arr.tobytes(order="C")
	return bytes(out)


class _Reader:
	def __init__(self, data: bytes):
		self.data = data
		self.pos = 0

	def take(self, fmt: str):
		size = struct.calcsize(fmt)
		if self.pos + size > len(self.data):
			raise ConfigError("truncated checkpoint")
		values = struct.unpack_from(fmt, self.data, self.pos)
		self.pos += size
		return values

	def name(self) -> str:
		(length,) = self.take("<H")
		raw = self.data[self.pos : self.pos + length]
		self.pos += length
		return raw.decode("utf-8")

	def array(self) -> np.ndarray:
		(ndim,) = self.take("<I")
		shape = self.take(f"<{ndim}Q") if ndim else ()
		count = int(np.prod(shape)) if ndim else 1
		end = self.pos + 8 * count
		if end > len(self.data):
			raise ConfigError("truncated checkpoint")
		arr = np.frombuffer(self.data[self.pos : end], dtype="<f8").reshape(shape).astype(np.float64)
		self.pos = end
		return arr


def decode_checkpoint(data: bytes) -> tuple[ModelParams, np.ndarray | None]:
	if data[: len(MAGIC)] != MAGIC:
		raise ConfigError("not an autoselect checkpoint")
	reader = _Reader(data)
	reader.pos = len(MAGIC)
	version, n_blocks = reader.take("<II")
	if version != VERSION:
		raise ConfigError(f"unsupported checkpoint version {version}")

	blocks: dict[str, dict[str, np.ndarray]] = {}
	for _ in range(n_blocks):
		block_name = reader.name()
		(n_arrays,) = reader.take("<I")
		blocks[block_name] = {}
		for _ in range(n_arrays):
			name = reader.name()
			blocks[block_name][name] = reader.array()

	missing = [b for b in BLOCKS if b not in blocks]
	if missing:
		raise ConfigError(f"checkpoint lacks blocks {missing}")
	logits = blocks.get(LAMBDA_BLOCK, {}).get("logits")
	return ModelParams(**{b: blocks[b] for b in BLOCKS}), logits


def save_checkpoint(path: str | Path, params: ModelParams, logits=None) -> Path:
	path = Path(path)
	path.write_bytes(encode_checkpoint(params, logits))
	return path


def load_checkpoint(path: str | Path) -> tuple[ModelParams, np.ndarray | None]:
	return decode_checkpoint(Path(path).read_bytes())

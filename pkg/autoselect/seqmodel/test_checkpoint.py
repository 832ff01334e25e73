# Copyright (c) 2026, Hadeel Milad and contributors
# For license information, please see license.txt

import struct

import numpy as np
import pytest

from autoselect.exceptions import ConfigError
from autoselect.seqmodel.checkpoint import MAGIC, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from autoselect.seqmodel.params import BLOCKS, init_params


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
	params = init_params(5, 6, seed=3)
	logits = np.array([0.1, -2.0, 3.5, 0.0, 1e-300])
	path = save_checkpoint(tmp_path / "checkpoint.bin", params, logits)

	restored, restored_logits = load_checkpoint(path)
	for block in BLOCKS:
		for name, arr in params.block(block).items():
			assert restored.block(block)[name].tobytes() == arr.tobytes()
	assert restored_logits.tobytes() == logits.tobytes()


def test_header_layout():
	data = encode_checkpoint(init_params(2, 2, seed=0))
	assert data[:8] == MAGIC
	assert struct.unpack_from("<II", data, 8) == (1, 3)
	(name_len,) = struct.unpack_from("<H", data, 16)
	assert data[18 : 18 + name_len] == b"encoder"


def test_weights_block_is_optional():
	_, logits = decode_checkpoint(encode_checkpoint(init_params(2, 2, seed=0)))
	assert logits is None


def test_rejects_foreign_and_truncated_files():
	with pytest.raises(ConfigError):
		decode_checkpoint(b"NOTACKPT" + bytes(16))
	data = encode_checkpoint(init_params(2, 2, seed=0))
	with pytest.raises(ConfigError):
		decode_checkpoint(data[:-5])

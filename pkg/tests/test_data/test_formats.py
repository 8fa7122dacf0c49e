"""Tests for the IDX and CIFAR binary decoders."""

import gzip

import numpy as np
import pytest

from src.core.errors import DataFormatError, DataIOError
from src.data.formats import (
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    decode_cifar,
    decode_idx,
    encode_cifar,
    encode_idx,
    read_idx,
    record_size,
    write_idx,
)


class TestIdx:

    def test_header_layout(self):
        raw = encode_idx(np.zeros((2, 3, 4), dtype=np.uint8))
        assert int.from_bytes(raw[:4], "big") == IDX_IMAGES_MAGIC
        assert [int.from_bytes(raw[i:i + 4], "big") for i in (4, 8, 12)] == [2, 3, 4]
        assert len(raw) == 16 + 24

    def test_decode_labels(self):
        raw = bytes([0, 0, 8, 1, 0, 0, 0, 3, 7, 0, 9])
        labels = decode_idx(raw, expected_magic=IDX_LABELS_MAGIC)
        np.testing.assert_array_equal(labels, [7, 0, 9])

    def test_wrong_magic(self):
        raw = encode_idx(np.zeros(3, dtype=np.uint8))
        with pytest.raises(DataFormatError) as info:
            decode_idx(raw, expected_magic=IDX_IMAGES_MAGIC)
        assert info.value.offset == 0

    def test_not_unsigned_bytes(self):
        with pytest.raises(DataFormatError):
            decode_idx(bytes([0, 0, 0x0D, 1, 0, 0, 0, 1, 0, 0, 0, 0]))

    def test_truncated_payload_reports_offset(self):
        raw = encode_idx(np.zeros((4, 5), dtype=np.uint8))[:-3]
        with pytest.raises(DataFormatError) as info:
            decode_idx(raw, path="images.idx")
        assert info.value.offset == len(raw)
        assert "images.idx" in str(info.value)

    def test_truncated_header(self):
        with pytest.raises(DataFormatError):
            decode_idx(bytes([0, 0, 8, 3, 0, 0]))

    def test_trailing_bytes(self):
        raw = encode_idx(np.zeros(3, dtype=np.uint8)) + b"\x00"
        with pytest.raises(DataFormatError) as info:
            decode_idx(raw)
        assert info.value.offset == 8 + 3

    def test_gzip_file(self, temp_dir, rng):
        array = rng.integers(0, 256, size=(3, 28, 28)).astype(np.uint8)
        path = f"{temp_dir}/images.gz"
        write_idx(path, array)
        with open(path, "rb") as f:
            assert gzip.decompress(f.read())[:4] == encode_idx(array)[:4]
        np.testing.assert_array_equal(read_idx(path, IDX_IMAGES_MAGIC), array)

    def test_missing_file(self, temp_dir):
        with pytest.raises(DataIOError):
            read_idx(f"{temp_dir}/absent")


class TestCifar:

    def test_cifar10_record(self, rng):
        images = rng.integers(0, 256, size=(2, 3, 32, 32)).astype(np.uint8)
        records = decode_cifar(encode_cifar(images, np.array([3, 8]), "cifar10"), "cifar10")
        np.testing.assert_array_equal(records.images, images)
        np.testing.assert_array_equal(records.labels, [3, 8])
        assert records.coarse_labels is None

    def test_cifar100_fine_and_coarse(self, rng):
        images = rng.integers(0, 256, size=(2, 3, 32, 32)).astype(np.uint8)
        raw = encode_cifar(images, np.array([42, 99]), "cifar100", coarse_labels=np.array([4, 19]))
        records = decode_cifar(raw, "cifar100")
        np.testing.assert_array_equal(records.labels, [42, 99])
        np.testing.assert_array_equal(records.coarse_labels, [4, 19])

    def test_record_sizes(self):
        assert record_size("cifar10") == 3073
        assert record_size("cifar100") == 3074

    def test_partial_record(self):
        raw = bytes(3073 * 2 + 100)
        with pytest.raises(DataFormatError) as info:
            decode_cifar(raw, "cifar10")
        assert info.value.offset == 3073 * 2

    def test_unknown_variant(self):
        with pytest.raises(DataFormatError):
            decode_cifar(bytes(3073), "cifar20")

"""
Unit Test Suite for the binary tensor codec of the core app.
"""
import tempfile
from pathlib import Path

import numpy as np

from django.test import SimpleTestCase

from core import codecs
from core.exceptions import FormatError

HEADER = codecs.header_struct('II')


class TensorFileTests(SimpleTestCase):
    """Test write_tensor_file and read_tensor_file"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = Path(self.tmp.name) / 'tensor.bin'

    def tearDown(self):
        self.tmp.cleanup()

    def test_header_extras_and_tensor(self):
        """Test the three blocks come back in order"""
        tensor = np.arange(6).reshape(2, 3) * (1 - 2j)
        codecs.write_tensor_file(
            self.path, HEADER, (b'TEST', 1, 2, 3), tensor, extra_ints=[7, 9]
        )

        header, rest = codecs.read_tensor_file(self.path, HEADER, b'TEST', 1)
        extras, payload = codecs.take_ints(rest, 2)

        self.assertEqual(header, (b'TEST', 1, 2, 3))
        self.assertEqual(extras.tolist(), [7, 9])
        np.testing.assert_array_equal(
            codecs.take_tensor(payload, (2, 3)), tensor
        )
        self.assertEqual(
            self.path.stat().st_size, HEADER.size + 2 * 8 + 6 * 16
        )

    def test_wrong_version_raises_error(self):
        """Test a file of another version is refused"""
        codecs.write_tensor_file(
            self.path, HEADER, (b'TEST', 2, 0, 0), np.zeros(0)
        )

        with self.assertRaisesMessage(FormatError, 'version'):
            codecs.read_tensor_file(self.path, HEADER, b'TEST', 1)

    def test_truncated_header_raises_error(self):
        """Test a file shorter than its header"""
        self.path.write_bytes(b'TES')

        with self.assertRaisesMessage(FormatError, 'truncated'):
            codecs.read_tensor_file(self.path, HEADER, b'TEST', 1)

    def test_short_payload_raises_error(self):
        """Test a payload that does not fill the requested shape"""
        with self.assertRaises(FormatError):
            codecs.take_tensor(bytes(16), (2, 1))
        with self.assertRaises(FormatError):
            codecs.take_ints(bytes(4), 1)

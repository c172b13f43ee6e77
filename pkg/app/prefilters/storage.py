"""
Binary pre-filter files (magic "TRPF").

Header: magic, version, M, N, L_p, technique code. Then N int64 delay
references and the M*N*L_p complex taps.
"""
from pathlib import Path

from core import codecs
from core.exceptions import FormatError, HeaderMismatchError
from prefilters.models import PrefilterSet, Technique

PREFILTER_MAGIC = b'TRPF'
PREFILTER_VERSION = 1
PREFILTER_HEADER = codecs.header_struct('IIII')

TECHNIQUE_CODES = {name: code for code, name in enumerate(Technique.values)}


def save_prefilter_set(prefilters, path):
    """Write a PrefilterSet; returns the path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    codecs.write_tensor_file(
        path,
        PREFILTER_HEADER,
        (
            PREFILTER_MAGIC,
            PREFILTER_VERSION,
            prefilters.num_antennas,
            prefilters.num_users,
            prefilters.prefilter_length,
            TECHNIQUE_CODES[prefilters.technique],
        ),
        prefilters.taps,
        extra_ints=prefilters.delay_reference,
    )
    return path


def load_prefilter_set(path, expected=None):
    """Read a PrefilterSet, optionally checking M, N, L_p or technique"""
    header, payload = codecs.read_tensor_file(
        path, PREFILTER_HEADER, PREFILTER_MAGIC, PREFILTER_VERSION
    )
    _, _, num_antennas, num_users, prefilter_length, code = header
    try:
        technique = Technique.values[code]
    except IndexError as exc:
        raise FormatError(f'{path}: unknown technique code {code}') from exc

    found = {
        'num_antennas': num_antennas,
        'num_users': num_users,
        'prefilter_length': prefilter_length,
        'technique': technique,
    }
    for key, value in (expected or {}).items():
        if found[key] != value:
            raise HeaderMismatchError(
                f'{path}: {key} is {found[key]}, expected {value}'
            )

    delays, payload = codecs.take_ints(payload, num_users)
    taps = codecs.take_tensor(
        payload, (num_antennas, num_users, prefilter_length)
    )
    return PrefilterSet(
        taps=taps, technique=technique, delay_reference=delays
    )

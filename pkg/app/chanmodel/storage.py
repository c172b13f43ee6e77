"""
Binary channel cache.

Each realization is a `.trch` file (header: magic "TRCH", version, M, N, L,
scenario code, seed; then M*N*L little-endian complex doubles) with a JSON
sidecar holding the full scenario, array and correlation flag.
"""
import json
import logging
from pathlib import Path

from chanmodel.models import (
    ArrayGeometry,
    ChannelSet,
    Scenario,
    ScenarioParams,
)
from core import codecs
from core.exceptions import FormatError, HeaderMismatchError

logger = logging.getLogger(__name__)

CHANNEL_MAGIC = b'TRCH'
CHANNEL_VERSION = 1
CHANNEL_HEADER = codecs.header_struct('IIIIQ')

SCENARIO_CODES = {name: code for code, name in enumerate(Scenario.values)}


def sidecar_path(path):
    """JSON sidecar next to a cache file"""
    return Path(path).with_suffix('.json')


def save_channel_set(channels, path):
    """Write a ChannelSet and its sidecar; returns the cache path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    num_antennas, num_users, num_taps = channels.taps.shape
    codecs.write_tensor_file(
        path,
        CHANNEL_HEADER,
        (
            CHANNEL_MAGIC,
            CHANNEL_VERSION,
            num_antennas,
            num_users,
            num_taps,
            SCENARIO_CODES[channels.scenario.name],
            channels.seed,
        ),
        channels.taps,
    )
    sidecar = {
        'scenario': channels.scenario.as_dict(),
        'array': {
            'rows': channels.array.rows,
            'cols': channels.array.cols,
            'element_spacing': channels.array.element_spacing,
        },
        'correlated': channels.correlated,
        'seed': channels.seed,
    }
    sidecar_path(path).write_text(
        json.dumps(sidecar, indent=2, sort_keys=True)
    )
    return path


def load_channel_set(path, expected=None):
    """
    Read a ChannelSet written by save_channel_set.

    expected may hold any of num_antennas, num_users, num_taps and
    scenario; a header that disagrees is refused.
    """
    path = Path(path)
    header, payload = codecs.read_tensor_file(
        path, CHANNEL_HEADER, CHANNEL_MAGIC, CHANNEL_VERSION
    )
    _, _, num_antennas, num_users, num_taps, scenario_code, seed = header
    try:
        scenario_name = Scenario.values[scenario_code]
    except IndexError as exc:
        raise FormatError(f'{path}: unknown scenario code {scenario_code}') \
            from exc

    found = {
        'num_antennas': num_antennas,
        'num_users': num_users,
        'num_taps': num_taps,
        'scenario': scenario_name,
    }
    for key, value in (expected or {}).items():
        if found[key] != value:
            raise HeaderMismatchError(
                f'{path}: {key} is {found[key]}, expected {value}'
            )

    try:
        sidecar = json.loads(sidecar_path(path).read_text())
    except (OSError, ValueError) as exc:
        raise FormatError(f'{path}: missing or unreadable sidecar') from exc

    taps = codecs.take_tensor(payload, (num_antennas, num_users, num_taps))
    return ChannelSet(
        taps=taps,
        scenario=ScenarioParams(**sidecar['scenario']),
        array=ArrayGeometry(**sidecar['array']),
        correlated=bool(sidecar['correlated']),
        seed=seed,
    )

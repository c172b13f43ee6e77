"""
Channel caches shared between runs of the same experiment grid.
"""
import logging
from pathlib import Path

from chanmodel.generator import RoomGeometry, generate_realization
from chanmodel.storage import load_channel_set, save_channel_set

logger = logging.getLogger(__name__)


def cell_directory(root, scenario, array, num_users, correlated):
    """Directory holding every realization of one grid cell"""
    flag = 'corr' if correlated else 'uncorr'
    return Path(root) / (
        f'{scenario}_{array.rows}x{array.cols}_N{num_users}_{flag}'
    )


def channel_path(root, scenario, array, num_users, correlated, index):
    directory = cell_directory(root, scenario, array, num_users, correlated)
    return directory / f'r{index:05d}.trch'


def cache_channels(config, path, geometry=None):
    """
    Generate and store every channel realization a config needs.

    Realization k of a cell is drawn from the same substream the run
    would use, so a cached run and an uncached run see identical channels.
    Returns the list of written files.
    """
    geometry = geometry or RoomGeometry.from_settings()
    scenario = config.scenario_params()
    written = []
    for array, num_users, correlated in config.cells():
        for index in range(config.num_realizations):
            channels = generate_realization(
                scenario,
                array,
                num_users,
                correlated,
                config.master_seed,
                index,
                geometry=geometry,
            )
            target = channel_path(
                path, scenario.name, array, num_users, correlated, index
            )
            written.append(save_channel_set(channels, target))
        logger.info(
            'Cached %d realizations of M=%d N=%d correlated=%s in %s',
            config.num_realizations, array.num_elements, num_users,
            correlated, cell_directory(
                path, scenario.name, array, num_users, correlated
            ),
        )
    return written


def load_channels(path, expected=None):
    """
    Yield the ChannelSets stored under path in file-name order.

    path may be a single cache file or a directory searched recursively.
    """
    path = Path(path)
    files = [path] if path.is_file() else sorted(path.rglob('*.trch'))
    for file in files:
        yield load_channel_set(file, expected)

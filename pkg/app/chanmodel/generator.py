"""
Correlated Nakagami-tap CIR generator.

Every tap of a user's CIR comes from one irregular scatterer placed on the
delay ellipsoid of that tap. The scatterer returns a specular ray and a
few diffuse subrays; each array element sees all of them with its own
geometric path length. Scatterers are grouped in a few clusters per
realization, shared by every user, whose departure directions lie within a
small angular spread; taps leaving through the same cluster add up
coherently across the array, which is what correlates the elements.
In uncorrelated mode every element draws its taps independently with the
same Rician (Nakagami-matched) marginal.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy import constants

from chanmodel.models import ChannelSet, ScattererLayout
from chanmodel.pdp import build_pdp, rician_k_factor
from core.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoomGeometry:
    """Room size and scatterer model used for correlated channels."""
    room: tuple = (5.0, 5.0, 3.0)
    num_subrays: int = 8
    scatterer_radius: float = 0.1
    num_clusters: int = 4
    cluster_spread: float = 0.035  # rad

    @classmethod
    def from_settings(cls):
        """Geometry defaults from settings.SIMULATION"""
        defaults = settings.SIMULATION
        return cls(
            room=tuple(defaults['ROOM_M']),
            num_subrays=defaults['DIFFUSE_SUBRAYS'],
            scatterer_radius=defaults['SCATTERER_RADIUS_M'],
            num_clusters=defaults['NUM_CLUSTERS'],
            cluster_spread=np.deg2rad(defaults['CLUSTER_SPREAD_DEG']),
        )

    @property
    def array_centroid(self):
        """The array hangs from the centre of the ceiling"""
        x, y, z = self.room
        return np.array([x / 2, y / 2, z])


def derive_seed(master_seed, index, *context):
    """
    64-bit seed of substream (master_seed, index, *context).

    The same arguments always give the same seed, independently of how
    many other substreams were drawn or in which order.
    """
    entropy = [int(master_seed), int(index)] + [int(c) for c in context]
    state = np.random.SeedSequence(entropy).generate_state(1, np.uint64)
    return int(state[0])


def _as_generator(rng):
    """Accept a Generator or an integer seed"""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _unit_vectors(rng, shape):
    """Uniformly random 3-D unit vectors"""
    v = rng.standard_normal(tuple(shape) + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _downward(directions):
    directions[..., 2] = -np.abs(directions[..., 2])
    return directions


def draw_cluster_directions(geometry, rng):
    """(C, 3) departure directions of the clusters of one realization"""
    return _downward(_unit_vectors(rng, (geometry.num_clusters,)))


def _rotate_about_z(points, angle):
    """Rotate (..., 3) points about the vertical axis"""
    c, s = np.cos(angle), np.sin(angle)
    rotation = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return points @ rotation.T


def draw_scatterer_layout(pdp, scenario, centroid, receiver, geometry, rng,
                          clusters=None):
    """
    Place one scatterer per tap for a single user.

    The excess delay of tap l is l * T_s plus a uniform offset of at most
    half a sample. The scatterer sits where the path array centroid ->
    scatterer -> receiver is that much longer than the direct path. Its
    direction from the centroid is drawn around one of the cluster
    directions, picked uniformly per tap; without clusters it is uniform
    below the ceiling.
    """
    num_taps = len(pdp.taps)
    offsets = rng.uniform(-0.5, 0.5, num_taps)
    offsets[0] = rng.uniform(0.0, 0.5)
    excess_delays = (np.arange(num_taps) + offsets) * scenario.sample_period

    direct = centroid - receiver
    direct_length = np.linalg.norm(direct)
    path_length = direct_length + constants.c * excess_delays * 1e-9
    path_length = np.maximum(path_length, direct_length + 1e-6)

    if clusters is None:
        directions = _unit_vectors(rng, (num_taps,))
    else:
        picked = clusters[rng.integers(len(clusters), size=num_taps)]
        directions = picked + geometry.cluster_spread * rng.standard_normal(
            (num_taps, 3)
        )
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    directions = _downward(directions)

    # Point on the ellipsoid with foci centroid/receiver along each direction
    radius = (path_length ** 2 - direct_length ** 2) / (
        2 * (path_length + directions @ direct)
    )
    positions = centroid + radius[:, None] * directions

    k_factor = rician_k_factor(scenario.nakagami_m)
    specular_power = pdp.taps * k_factor / (1 + k_factor)
    return ScattererLayout(
        positions=positions,
        specular_power=specular_power,
        diffuse_power=pdp.taps - specular_power,
        subray_directions=_unit_vectors(rng, (num_taps, geometry.num_subrays)),
        excess_delays=excess_delays,
    )


def _correlated_user_taps(layout, elements, receiver, wavelength,
                          geometry, rng):
    """(M, L) taps of one user from its scatterer layout"""
    wavenumber = 2 * np.pi / wavelength
    positions = layout.positions

    # Specular ray: element -> scatterer centre -> receiver
    to_elements = np.linalg.norm(
        elements[None, :, :] - positions[:, None, :], axis=-1
    )
    to_receiver = np.linalg.norm(positions - receiver, axis=-1)
    specular_paths = to_elements + to_receiver[:, None]
    specular = np.sqrt(layout.specular_power)[:, None] * np.exp(
        -1j * wavenumber * specular_paths
    )

    # Diffuse subrays bounce off points spread over the scatterer's surface
    points = (
        positions[:, None, :]
        + geometry.scatterer_radius * layout.subray_directions
    )
    subray_paths = np.linalg.norm(
        elements[None, None, :, :] - points[:, :, None, :], axis=-1
    ) + np.linalg.norm(points - receiver, axis=-1)[:, :, None]
    num_subrays = geometry.num_subrays
    amplitudes = np.sqrt(layout.diffuse_power / (2 * num_subrays))[:, None] * (
        rng.standard_normal((len(positions), num_subrays))
        + 1j * rng.standard_normal((len(positions), num_subrays))
    )
    diffuse = np.einsum(
        'lk,lkm->lm', amplitudes, np.exp(-1j * wavenumber * subray_paths)
    )
    return (specular + diffuse).T


def _independent_user_taps(pdp, scenario, num_antennas, rng):
    """(M, L) taps with the Rician marginal and no cross-element coupling"""
    num_taps = len(pdp.taps)
    k_factor = rician_k_factor(scenario.nakagami_m)
    specular_power = pdp.taps * k_factor / (1 + k_factor)
    diffuse_power = pdp.taps - specular_power

    phases = rng.uniform(0.0, 2 * np.pi, (num_antennas, num_taps))
    specular = np.sqrt(specular_power) * np.exp(1j * phases)
    diffuse = np.sqrt(diffuse_power / 2) * (
        rng.standard_normal((num_antennas, num_taps))
        + 1j * rng.standard_normal((num_antennas, num_taps))
    )
    return specular + diffuse


def generate_channel_set(scenario, array, num_users, correlated, rng,
                         geometry=None, seed=0):
    """
    Draw one realization of the (M, N, L) channel tensor.

    Users are statistically independent: each gets its own receiver
    position and its own scatterers. The array orientation and the cluster
    directions are shared by all users of the realization.
    """
    if num_users < 1:
        raise InvalidArgumentError(
            f'num_users must be at least 1, got {num_users}'
        )
    rng = _as_generator(rng)
    geometry = geometry or RoomGeometry.from_settings()
    pdp = build_pdp(scenario)
    num_antennas = array.num_elements

    taps = np.empty(
        (num_antennas, num_users, scenario.num_taps), np.complex128
    )
    layouts = []

    if correlated:
        centroid = geometry.array_centroid
        orientation = rng.uniform(0.0, 2 * np.pi)
        elements = centroid + _rotate_about_z(
            array.element_positions, orientation
        )
        clusters = draw_cluster_directions(geometry, rng)
        for user in range(num_users):
            receiver = rng.uniform(0.0, 1.0, 3) * np.asarray(geometry.room)
            layout = draw_scatterer_layout(
                pdp, scenario, centroid, receiver, geometry, rng, clusters
            )
            taps[:, user, :] = _correlated_user_taps(
                layout,
                elements,
                receiver,
                scenario.carrier_wavelength,
                geometry,
                rng,
            )
            layouts.append(layout)
    else:
        for user in range(num_users):
            taps[:, user, :] = _independent_user_taps(
                pdp, scenario, num_antennas, rng
            )

    return ChannelSet(
        taps=taps,
        scenario=scenario,
        array=array,
        correlated=bool(correlated),
        seed=int(seed),
        layouts=layouts or None,
    )


def generate_realization(scenario, array, num_users, correlated,
                         master_seed, index, geometry=None):
    """Realization `index` of the substream family rooted at master_seed"""
    seed = derive_seed(
        master_seed, index, array.num_elements, num_users, int(correlated)
    )
    return generate_channel_set(
        scenario,
        array,
        num_users,
        correlated,
        np.random.default_rng(seed),
        geometry=geometry,
        seed=seed,
    )

"""Node geometry and Rayleigh block-fading channel draws.

The destination sits at the origin of a circular sector, a fixed relay
sits inside it, and the K users are placed uniformly over the sector
area outside an exclusion radius (uniform in area means the radial
density is proportional to r).  Every link (a, b) carries a proper
complex Gaussian amplitude A with zero mean and unit variance, constant
per trial, so |A|^2 is a unit-mean exponential.  The channel gain is
H = A / d^(gamma/2) with d the link distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryParams",
    "NodePlacement",
    "ChannelDraw",
    "sample_placement",
    "link_distance",
    "draw_link_gains",
    "sample_channel_draw",
]

DESTINATION = "d"
RELAY = "r"


def user_id(k: int) -> str:
    """Node id of user k (1-based)."""
    return f"u{k}"


@dataclass(frozen=True)
class GeometryParams:
    """Sector geometry and propagation constants.

    Defaults: unit sector radius, 60 degree opening, destination at the
    origin, relay at (0.5, 0), users kept at least 0.3 away from the
    destination, path-loss exponent 4.
    """

    num_users: int = 3
    sector_radius: float = 1.0
    sector_angle: float = np.pi / 3
    exclusion_radius: float = 0.3
    relay_position: tuple[float, float] = (0.5, 0.0)
    destination_position: tuple[float, float] = (0.0, 0.0)
    path_loss_exponent: float = 4.0

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.sector_radius <= 0:
            raise ValueError("sector_radius must be positive")
        if not 0 < self.sector_angle <= 2 * np.pi:
            raise ValueError("sector_angle must lie in (0, 2*pi]")
        if not 0 <= self.exclusion_radius < self.sector_radius:
            raise ValueError(
                "exclusion_radius must be >= 0 and strictly smaller than sector_radius"
            )
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be positive")


@dataclass(frozen=True)
class NodePlacement:
    """Realised node coordinates plus the derived distance matrix.

    Nodes are ordered destination, relay, u1..uK.  The distance matrix is
    symmetric with a zero diagonal and is precomputed once per placement.
    """

    params: GeometryParams
    positions: dict[str, tuple[float, float]]
    _ids: tuple[str, ...] = field(init=False, repr=False)
    _dist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ids = (DESTINATION, RELAY) + tuple(
            user_id(k) for k in range(1, self.params.num_users + 1)
        )
        missing = [i for i in ids if i not in self.positions]
        if missing:
            raise ValueError(f"placement missing nodes: {missing}")
        coords = np.array([self.positions[i] for i in ids], dtype=float)
        delta = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((delta**2).sum(axis=-1))
        object.__setattr__(self, "_ids", ids)
        object.__setattr__(self, "_dist", dist)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return self._ids

    def distance(self, a: str, b: str) -> float:
        if a == b:
            raise ValueError(f"no link from a node to itself: {a!r}")
        ia, ib = self._ids.index(a), self._ids.index(b)
        return float(self._dist[ia, ib])

    def path_gain(self, a: str, b: str) -> float:
        """Deterministic power attenuation 1 / d^gamma of link (a, b)."""
        return self.distance(a, b) ** -self.params.path_loss_exponent


def sample_placement(params: GeometryParams, rng: np.random.Generator) -> NodePlacement:
    """Draw one uniform-in-area user placement.

    The radius is drawn as sqrt(r0^2 + U * (R^2 - r0^2)) so the density is
    proportional to r over [r0, R]; the angle is uniform over the sector.
    Relay and destination are fixed by the params.
    """
    u = rng.random(params.num_users)
    v = rng.random(params.num_users)
    r0sq = params.exclusion_radius**2
    radius = np.sqrt(r0sq + u * (params.sector_radius**2 - r0sq))
    angle = v * params.sector_angle
    positions = {
        DESTINATION: tuple(map(float, params.destination_position)),
        RELAY: tuple(map(float, params.relay_position)),
    }
    for k in range(1, params.num_users + 1):
        positions[user_id(k)] = (
            float(radius[k - 1] * np.cos(angle[k - 1])),
            float(radius[k - 1] * np.sin(angle[k - 1])),
        )
    return NodePlacement(params=params, positions=positions)


def link_distance(placement: NodePlacement, a: str, b: str) -> float:
    """Euclidean distance between two distinct nodes."""
    return placement.distance(a, b)


@dataclass(frozen=True)
class ChannelDraw:
    """One block-fading realisation for a set of links.

    ``amp_sq`` maps link -> |A|^2; ``amp`` carries the complex amplitudes
    and is None when phases were not needed (decode-and-forward only uses
    magnitudes).  ``gain_sq`` folds in the path loss: |H|^2 = |A|^2 / d^gamma.
    """

    amp_sq: dict[tuple[str, str], float]
    gain_sq: dict[tuple[str, str], float]
    amp: dict[tuple[str, str], complex] | None = None


def draw_link_gains(
    placement: NodePlacement,
    links: list[tuple[str, str]],
    n: int,
    rng: np.random.Generator,
    need_phases: bool = False,
):
    """Draw n i.i.d. amplitude realisations for each link.

    Returns (amp_sq, amp) where amp_sq has shape (n, len(links)) and amp is
    the complex array of the same shape, or None when need_phases is False.
    Magnitude-only sampling draws unit-mean exponentials directly, which is
    half the random numbers.  Column order follows the links argument, which
    fixes the stream layout for reproducibility.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    m = len(links)
    if need_phases:
        parts = rng.standard_normal((n, 2 * m))
        amp = np.sqrt(0.5) * (parts[:, :m] + 1j * parts[:, m:])
        amp_sq = amp.real**2 + amp.imag**2
        return amp_sq, amp
    amp_sq = rng.exponential(size=(n, m))
    return amp_sq, None


def sample_channel_draw(
    placement: NodePlacement,
    links: list[tuple[str, str]],
    rng: np.random.Generator,
    need_phases: bool = False,
) -> ChannelDraw:
    """Draw a single coherence-interval realisation for the given links."""
    amp_sq, amp = draw_link_gains(placement, links, 1, rng, need_phases)
    gamma = placement.params.path_loss_exponent
    amp_sq_map = {}
    gain_sq_map = {}
    amp_map = {} if need_phases else None
    for j, (a, b) in enumerate(links):
        d = placement.distance(a, b)
        amp_sq_map[(a, b)] = float(amp_sq[0, j])
        gain_sq_map[(a, b)] = float(amp_sq[0, j]) / d**gamma
        if need_phases:
            amp_map[(a, b)] = complex(amp[0, j])
    return ChannelDraw(amp_sq=amp_sq_map, gain_sq=gain_sq_map, amp=amp_map)

"""Wiretap-channel parameters (eta, kappa, n_e) from link geometry.

Three eavesdropping layouts are covered:

* Eve behind Bob, aperture centered on the axis;
* Eve behind Bob, aperture displaced by D off the axis;
* Eve between Alice and Bob, on axis (her obstruction shadows Bob and the
  around-the-edge diffraction forms an Arago bright spot on Bob's aperture).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from scipy.constants import h as PLANCK, k as BOLTZMANN, c as LIGHT_SPEED

from .beams import BeamParams, encircled_power, total_power
from .diffraction import DiskSpec, SourceAnnulus, disk_power, propagate_profile

KAPPA_CLAMP_TOL = 1e-3


class ChannelConsistencyError(RuntimeError):
    """Eve's collected fraction exceeded 1 beyond quadrature tolerance."""


class Scenario(enum.Enum):
    BEHIND_BOB = "behind_bob"
    BEFORE_BOB = "before_bob"


@dataclass(frozen=True)
class Geometry:
    """Link layout.  Distances in meters.

    For BEHIND_BOB, ``bob_eve_distance`` is measured downstream of Bob and
    ``eve_offset`` displaces Eve's aperture off the beam axis.  For
    BEFORE_BOB, Eve sits at ``alice_bob_distance - bob_eve_distance`` from
    Alice, always on axis (her on-axis position maximizes her collection).
    """

    scenario: Scenario
    alice_bob_distance: float
    bob_eve_distance: float
    eve_offset: float = 0.0
    alice_radius: float = 0.1
    bob_radius: float = 0.1
    eve_radius: float = 0.1

    def __post_init__(self):
        if min(self.alice_bob_distance, self.bob_eve_distance,
               self.alice_radius, self.bob_radius, self.eve_radius) <= 0:
            raise ValueError("all distances and radii must be positive")
        if self.eve_offset < 0:
            raise ValueError("eve_offset must be nonnegative")
        if self.scenario is Scenario.BEFORE_BOB:
            if self.eve_offset != 0.0:
                raise ValueError("before-Bob geometry is on-axis only")
            if not 0.0 < self.alice_eve_distance < self.alice_bob_distance:
                raise ValueError("before-Bob requires 0 < L_AE < L_AB")

    @property
    def alice_eve_distance(self) -> float:
        return self.alice_bob_distance - self.bob_eve_distance


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivity to Bob, Eve's fraction of the lost light, thermal noise.

    ``p_bob`` and ``p_eve`` are diagnostics in units of the total transmitted
    power.  ``kappa = p_eve / (1 - eta)`` and is clamped to 1 (with a warning)
    when quadrature noise pushes it within ``KAPPA_CLAMP_TOL`` above.
    """

    eta: float
    kappa: float
    n_e: float
    p_bob: float
    p_eve: float


def thermal_occupation(frequency: float, temperature: float) -> float:
    """Blackbody mean photon number per mode, 1 / (exp(hf/kT) - 1).

    Evaluated via expm1 in the exponent domain; at optical frequencies and
    cold-space temperatures the result degrades gracefully to 0 instead of
    underflowing noisily.
    """
    if frequency <= 0 or temperature <= 0:
        raise ValueError("frequency and temperature must be positive")
    x = PLANCK * frequency / (BOLTZMANN * temperature)
    if x > 700.0:
        return math.exp(-x)  # underflows smoothly to 0.0
    return 1.0 / math.expm1(x)


def default_noise(beam: BeamParams, temperature: float = 3.0) -> float:
    """Background occupation at the beam's center frequency."""
    return thermal_occupation(LIGHT_SPEED / beam.wavelength, temperature)


def _kappa_from_powers(p_eve: float, eta: float, p_total: float) -> float:
    kappa = p_eve / ((1.0 - eta) * p_total)
    if kappa > 1.0 + KAPPA_CLAMP_TOL:
        raise ChannelConsistencyError(
            f"kappa = {kappa:.6f} exceeds 1 beyond tolerance; quadrature failure likely")
    if kappa > 1.0:
        warnings.warn(f"kappa = {kappa:.2e} clamped to 1", stacklevel=3)
        kappa = 1.0
    return kappa


def channel_params(geom: Geometry, beam: BeamParams, noise: float,
                   profile_provider=None) -> ChannelParams:
    """Compute (eta, kappa, n_e) for a geometry.

    ``profile_provider`` optionally replaces direct profile construction with
    a caching callable of signature ``(source, distance, disk_hint) ->
    FieldProfile``; sweeps and the CLI use it to share propagations.
    """
    provider = profile_provider or propagate_profile
    p_tot = total_power(beam)

    if geom.scenario is Scenario.BEHIND_BOB:
        p_bob = encircled_power(beam, geom.alice_bob_distance, geom.bob_radius)
        src = SourceAnnulus(beam, geom.alice_bob_distance, geom.bob_radius)
        disk = DiskSpec(geom.eve_radius, geom.eve_offset)
        profile = provider(src, geom.bob_eve_distance, disk)
        p_eve = disk_power(profile, disk)
    else:
        p_eve = encircled_power(beam, geom.alice_eve_distance, geom.eve_radius)
        src = SourceAnnulus(beam, geom.alice_eve_distance, geom.eve_radius)
        disk = DiskSpec(geom.bob_radius, 0.0)
        profile = provider(src, geom.bob_eve_distance, disk)
        p_bob = disk_power(profile, disk)

    eta = p_bob / p_tot
    kappa = _kappa_from_powers(p_eve, eta, p_tot)
    return ChannelParams(eta=eta, kappa=kappa, n_e=noise,
                         p_bob=p_bob / p_tot, p_eve=p_eve / p_tot)

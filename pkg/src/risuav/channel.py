"""Cascaded BS -> RIS -> terminal channel with a Rayleigh direct link.

The RIS is a uniform linear array of ``M`` elements co-located with the UAV.
Each hop has free-space path loss ``sqrt(rho * dist**-gamma)`` times the
array phase progression for that hop's angle cosine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .geometry import aoa_cosine, aod_cosine, distance
from .world import ChannelParams

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LinkSample:
    snr: float
    rate: float
    aoa_cos: float
    aod_cos: float
    cascaded_gain: complex
    direct_gain: complex


def _path_amplitude(a, b, cp: ChannelParams) -> float:
    dist = distance(a, b)
    if dist == 0.0:
        raise DegenerateGeometryError(f"coincident link endpoints {tuple(a)}")
    return math.sqrt(cp.rho * dist ** (-cp.gamma))


def steering_vector(amplitude: float, cosine: float, cp: ChannelParams) -> np.ndarray:
    m = np.arange(cp.m_elements)
    return amplitude * np.exp(-1j * (TWO_PI / cp.lambda_m) * cp.d_m * m * cosine)


def bs_ris_gain(bs, uav, cp: ChannelParams) -> np.ndarray:
    return steering_vector(_path_amplitude(bs, uav, cp), aoa_cosine(bs, uav), cp)


def ris_mt_gain(uav, mt, cp: ChannelParams) -> np.ndarray:
    return steering_vector(_path_amplitude(uav, mt, cp), aod_cosine(uav, mt), cp)


def cscg(rng: np.random.Generator, size=None):
    """Zero-mean, unit-variance circularly symmetric complex Gaussian draw(s)."""
    scale = math.sqrt(0.5)
    return rng.normal(0.0, scale, size) + 1j * rng.normal(0.0, scale, size)


def direct_gain(bs, mt, cp: ChannelParams, rng: np.random.Generator) -> complex:
    """Rayleigh-faded BS-terminal gain; ``E|g|^2 = rho * dist**-gamma``."""
    return complex(_path_amplitude(bs, mt, cp) * cscg(rng))


def optimal_phases(aoa_cos: float, aod_cos: float, cp: ChannelParams) -> np.ndarray:
    """Per-element phase shifts that align every reflected path, wrapped to [0, 2*pi)."""
    m = np.arange(cp.m_elements)
    raw = (TWO_PI * cp.d_m * m / cp.lambda_m) * (aoa_cos - aod_cos) + cp.varpi
    wrapped = np.mod(raw, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def cascaded_gain(g_bsru: np.ndarray, g_rumt: np.ndarray, phases: np.ndarray) -> complex:
    """``g_rumt^H diag(exp(j*phases)) g_bsru``."""
    if not (len(g_bsru) == len(g_rumt) == len(phases)):
        raise ValueError(
            f"length mismatch: {len(g_bsru)}, {len(g_rumt)}, {len(phases)}")
    return complex(np.sum(np.conj(g_rumt) * np.exp(1j * phases) * g_bsru))


def snr(direct: complex, cascaded: complex, cp: ChannelParams) -> float:
    return cp.p_bs_w * abs(direct + cascaded) ** 2 / cp.noise_w


def rate(snr_value: float) -> float:
    """Achievable spectral efficiency in bit/s/Hz."""
    if snr_value < 0:
        raise ValueError(f"negative snr {snr_value}")
    return math.log2(1.0 + snr_value)


def slot_cost(bs, uav, mt) -> float:
    """Product of the two hop lengths; smaller means a stronger cascaded link."""
    d1 = distance(bs, uav)
    d2 = distance(uav, mt)
    if d1 == 0.0 or d2 == 0.0:
        raise DegenerateGeometryError("slot cost needs distinct BS, UAV and terminal")
    return d2 * d1


def coherent_magnitude(bs, uav, mt, cp: ChannelParams) -> float:
    """Closed-form ``|cascaded gain|`` under optimal phases: ``M*rho/(d1*d2)**(gamma/2)``."""
    return cp.m_elements * cp.rho / (slot_cost(bs, uav, mt) ** (cp.gamma / 2.0))


def optimal_snr(bs, uav, mt, cp: ChannelParams) -> float:
    """SNR of the reflected path alone with optimal phases (no direct link)."""
    return cp.p_bs_w * coherent_magnitude(bs, uav, mt, cp) ** 2 / cp.noise_w


def link_sample(bs, uav, mt, cp: ChannelParams, direct: complex = 0j) -> tuple[LinkSample, np.ndarray]:
    """Evaluate the full link at one UAV position with optimal phases."""
    g1 = bs_ris_gain(bs, uav, cp)
    g2 = ris_mt_gain(uav, mt, cp)
    phi_a = aoa_cosine(bs, uav)
    phi_d = aod_cosine(uav, mt)
    phases = optimal_phases(phi_a, phi_d, cp)
    casc = cascaded_gain(g1, g2, phases)
    s = snr(direct, casc, cp)
    return LinkSample(s, rate(s), phi_a, phi_d, casc, complex(direct)), phases

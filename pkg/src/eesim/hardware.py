"""Transmitter power consumption, RF insertion loss, flop counts and EE."""
from dataclasses import asdict, dataclass, fields
import math

from .precoding import DIGITAL, FULLY_CONNECTED, PARTIALLY_CONNECTED

ACTIVE = "active"
PASSIVE = "passive"


@dataclass(frozen=True)
class HardwareProfile:
    """Component figures of the RF front-end (defaults: the reference table)."""

    p_lo: float = 22.5e-3  # W, shared local oscillator
    p_h: float = 3e-3  # W, 90 deg hybrid with buffers
    p_m: float = 0.3e-3  # W, mixer
    p_lp: float = 14e-3  # W, low-pass filter
    p_ps_active: float = 21.6e-3  # W, active phase-shifter
    pae: float = 0.27
    dac_static_coeff: float = 1.5e-5  # W per 2**b
    dac_dynamic_coeff: float = 9e-12  # W s per bit
    loss_div_db: float = 0.6  # per two-way divider stage
    loss_comb_db: float = 3.6  # per two-way combiner stage (0.6 + 3 mismatch)
    loss_ps_active_db: float = -2.3
    loss_ps_passive_db: float = 8.8
    e_c: float = 12.8e9  # flops/s/W
    coherence_blocks_per_s: float = 11111.0

    def __post_init__(self):
        powers = ("p_lo", "p_h", "p_m", "p_lp", "p_ps_active", "dac_static_coeff", "dac_dynamic_coeff")
        if any(getattr(self, name) < 0 for name in powers):
            raise ValueError("component powers must be non-negative")
        if not 0 < self.pae <= 1:
            raise ValueError("pae must lie in (0, 1]")
        if self.e_c <= 0:
            raise ValueError("e_c must be positive")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown hardware keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PowerBreakdown:
    p_static: float
    p_pa: float
    p_dacs: float
    p_rf_chains: float
    p_ps: float
    p_lo: float
    p_comp: float
    loss_linear: float

    @property
    def loss_db(self):
        return 10 * math.log10(self.loss_linear)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)


def _stages(k):
    # ceil(log2 k) two-way stages, exact for integers
    return (int(k) - 1).bit_length()


def p_dac(bits, sample_rate, profile=HardwareProfile()):
    """Binary-weighted current-steering DAC power in W."""
    return profile.dac_static_coeff * 2.0 ** bits + profile.dac_dynamic_coeff * bits * sample_rate


def p_rf_chain(profile=HardwareProfile()):
    return 2 * profile.p_lp + 2 * profile.p_m + profile.p_h


def phase_shifter_loss_db(ps_type, profile=HardwareProfile()):
    if ps_type == ACTIVE:
        return profile.loss_ps_active_db
    if ps_type == PASSIVE:
        return profile.loss_ps_passive_db
    raise ValueError(f"unknown phase-shifter type {ps_type!r}")


def loss_db(topology, ps_type, n_t, l_t, profile=HardwareProfile()):
    """PSN insertion loss in dB (may be negative with active phase-shifters)."""
    if topology == DIGITAL:
        return 0.0
    l_ps = phase_shifter_loss_db(ps_type, profile)
    if topology == FULLY_CONNECTED:
        return profile.loss_div_db * _stages(n_t) + l_ps + profile.loss_comb_db * _stages(l_t)
    if topology == PARTIALLY_CONNECTED:
        n_a = math.ceil(n_t / l_t)
        return profile.loss_div_db * _stages(n_a) + l_ps
    raise ValueError(f"unknown topology {topology!r}")


def loss_factor(topology, ps_type, n_t, l_t, profile=HardwareProfile()):
    """Linear insertion loss ``L_RF`` of the analog stage; 1 for digital."""
    if topology == DIGITAL:
        return 1.0
    return db_to_linear(loss_db(topology, ps_type, n_t, l_t, profile))


def phase_shifter_count(topology, n_t, l_t):
    if topology == DIGITAL:
        return 0
    if topology == FULLY_CONNECTED:
        return n_t * l_t
    if topology == PARTIALLY_CONNECTED:
        return math.ceil(n_t / l_t) * l_t
    raise ValueError(f"unknown topology {topology!r}")


def p_static(topology, ps_type, n_t, l_t, bits_dac, sample_rate, p_transmit, profile=HardwareProfile(),
             loss_linear=None, p_comp=0.0):
    """Static power of the transmitter front-end.

    Parameters
    ----------
    topology : str
        ``digital``, ``fully_connected`` or ``partially_connected``.
    ps_type : str or None
        ``active`` or ``passive``; ignored for digital.
    p_transmit : float
        Actual radiated power ``P_max / L_RF`` seen by the PAs.
    loss_linear : float, optional
        Recorded in the breakdown; computed from the topology if omitted.
    """
    if topology not in (DIGITAL, FULLY_CONNECTED, PARTIALLY_CONNECTED):
        raise ValueError(f"unknown topology {topology!r}")
    chains = n_t if topology == DIGITAL else l_t
    p_dacs = chains * 2 * p_dac(bits_dac, sample_rate, profile)
    p_chains = chains * p_rf_chain(profile)
    if topology == DIGITAL or ps_type == PASSIVE:
        p_ps = 0.0
    else:
        phase_shifter_loss_db(ps_type, profile)
        p_ps = phase_shifter_count(topology, n_t, l_t) * profile.p_ps_active
    p_pa = p_transmit / profile.pae
    total = profile.p_lo + p_pa + p_dacs + p_chains + p_ps
    if loss_linear is None:
        loss_linear = loss_factor(topology, ps_type, n_t, l_t, profile)
    return PowerBreakdown(total, p_pa, p_dacs, p_chains, p_ps, profile.p_lo, p_comp, loss_linear)


def flops_svd(p, q):
    return 4 * p * p * q + 22 * q ** 3


def flops_count(topology, n_t, n_r, l_t, n_a=None, iters_fpsn=0, iters_ppsn=0):
    """Flops to design one precoder (2MNR per M x R by R x N product)."""
    if topology == DIGITAL:
        return flops_svd(n_r, n_t)
    baseband = flops_svd(n_r, l_t) + 2 * n_r * n_t * l_t
    if topology == FULLY_CONNECTED:
        per_iter = 4 * n_t * l_t + 4 * n_t * n_t * l_t + 22 * l_t ** 3 + 2 * n_t * l_t * l_t
        return baseband + flops_svd(n_r, n_t) + iters_fpsn * per_iter
    if topology == PARTIALLY_CONNECTED:
        if n_a is None:
            n_a = math.ceil(n_t / l_t)
        return baseband + iters_ppsn * (4 * n_t * n_a + 2 * n_a + 1)
    raise ValueError(f"unknown topology {topology!r}")


def p_comp(n_flops, profile=HardwareProfile()):
    return profile.coherence_blocks_per_s * n_flops / profile.e_c


def energy_efficiency(rate, p_static_w, p_comp_w=None):
    """Spectral efficiency per watt; ``p_comp_w`` adds the computational power."""
    if p_static_w <= 0:
        raise ValueError("static power must be positive")
    return rate / (p_static_w + (p_comp_w or 0.0))

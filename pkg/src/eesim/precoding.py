"""Digital and hybrid (fully/partially connected PSN) transmit precoders."""
from dataclasses import dataclass
from typing import NamedTuple, Optional
import math
import warnings

import numpy as np

from . import kernels
from ._linalg import Svd, svd

DIGITAL = "digital"
FULLY_CONNECTED = "fully_connected"
PARTIALLY_CONNECTED = "partially_connected"
TOPOLOGIES = (DIGITAL, FULLY_CONNECTED, PARTIALLY_CONNECTED)


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class PhaseShiftSet:
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")

    @property
    def size(self):
        return 2 ** self.bits

    @property
    def resolution(self):
        return 2 * np.pi / self.size

    def points(self):
        return np.exp(1j * self.resolution * np.arange(self.size))

    def contains(self, z, atol=1e-12):
        z = np.asarray(z)
        k = np.round(np.angle(z) / self.resolution)
        return np.abs(z - np.exp(1j * self.resolution * k)) <= atol


@dataclass(frozen=True)
class PowerAllocation:
    lam: np.ndarray
    water_level: float


@dataclass(frozen=True)
class Precoder:
    topology: str
    f_rf: np.ndarray  # (n_t, M)
    f_bb: np.ndarray  # (M, n_s)
    loss_linear: float = 1.0
    iterations: int = 0
    converged: bool = True
    allocation: Optional[PowerAllocation] = None
    heq_svd: Optional[Svd] = None
    normalization: float = 1.0  # ||F_RF Q||_F^2 / p_max

    @property
    def streams(self):
        return self.f_bb.shape[1]

    @property
    def rf_chains(self):
        return self.f_bb.shape[0]

    @property
    def n_t(self):
        return self.f_rf.shape[0]

    def transmit_covariance(self):
        f = self.f_rf @ self.f_bb
        return f @ f.conj().T


class AnalogDesign(NamedTuple):
    f_rf: np.ndarray
    iterations: object  # int for HPF, per-block array for HPP
    converged: bool
    residuals: Optional[np.ndarray] = None


class PowerMethodResult(NamedTuple):
    v: np.ndarray
    iterations: int
    value: float  # estimate of sigma_max^2
    converged: bool


# -- water-filling ---------------------------------------------------------

def waterfill(sigma, p_max, noise_var):
    """Capacity-optimal power split over parallel channels.

    Parameters
    ----------
    sigma : array_like
        Channel singular values, descending. Zeros get no power.
    p_max : float
        Total power.
    noise_var : float
        Noise power per sub-channel.

    Returns
    -------
    PowerAllocation
        ``lam[i] = max(0, mu - noise_var / sigma[i]**2)`` with ``sum(lam) = p_max``.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.size == 0:
        raise ValueError("empty sigma")
    if p_max <= 0 or noise_var <= 0:
        raise ValueError("p_max and noise_var must be positive")
    with np.errstate(divide="ignore"):
        floor = np.where(sigma > 0, noise_var / sigma ** 2, np.inf)
    if not np.isfinite(floor).any():
        raise ValueError("all sub-channels have zero gain")

    lo = float(np.min(floor))
    hi = lo + p_max * sigma.size
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        total = np.sum(np.maximum(0.0, mu - floor))
        if abs(total - p_max) <= 1e-12 * p_max:
            break
        if total > p_max:
            hi = mu
        else:
            lo = mu
    # close the active set exactly
    active = floor < mu
    if not active.any():
        active = floor == np.min(floor)
    mu = (p_max + np.sum(floor[active])) / np.count_nonzero(active)
    lam = np.where(active, np.maximum(0.0, mu - floor), 0.0)
    # mu - floor cancels digits when floor >> p_max
    lam *= p_max / lam.sum()
    return PowerAllocation(lam, float(mu))


def svd_precoder(h, n_s, p_max, noise_var):
    """Truncated-SVD precoder ``Q = V Lambda^{1/2}`` with water-filling.

    Returns ``(q, allocation, svd)``; ``n_s`` beyond the rank of ``h`` gets
    zero-power streams.
    """
    dec = svd(h, k=n_s)
    alloc = waterfill(dec.s, p_max, noise_var)
    q = dec.v * np.sqrt(alloc.lam)[None, :]
    return q, alloc, dec


def digital_precoder(h, n_s, p_max, noise_var):
    h = np.asarray(h, dtype=np.complex128)
    q, alloc, dec = svd_precoder(h, n_s, p_max, noise_var)
    return Precoder(
        topology=DIGITAL,
        f_rf=np.eye(h.shape[1], dtype=np.complex128),
        f_bb=q,
        allocation=alloc,
        heq_svd=dec,
        normalization=float(np.linalg.norm(q) ** 2 / p_max),
    )


# -- analog stage ------------------------------------------------------------

def quantize_phases(m, bits):
    """Round every phase to the nearest multiple of ``2 pi / 2**bits``.

    Output entries have unit modulus; a zero entry maps to phase 0.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    step = 2 * np.pi / 2 ** bits
    k = np.round(np.angle(m) / step)
    return np.exp(1j * step * k)


def hpf_analog(h, l_t, bits_ps=5, tol=1e-6, max_iter=1000):
    """Fully-connected analog precoder by alternating projection.

    Starts from the top ``l_t`` right singular vectors of ``h`` and alternates
    between the unit-modulus set and semi-unitary matrices until consecutive
    semi-unitary iterates differ by less than ``tol`` in Frobenius norm.
    ``bits_ps=None`` skips the final phase quantization.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    h = np.asarray(h, dtype=np.complex128)
    f_su = svd(h, k=l_t).v
    f_rf, _, residuals, iters = kernels.alternating_projection(f_su, tol, max_iter)
    converged = bool(residuals.size and residuals[-1] < tol)
    if not converged:
        warnings.warn(f"alternating projection stopped after {max_iter} iterations", ConvergenceWarning)
    if bits_ps is not None:
        f_rf = quantize_phases(f_rf, bits_ps)
    return AnalogDesign(f_rf, int(iters), converged, residuals)


def power_method(a, tol=1e-6, max_iter=10_000, rng=None, stop="vector"):
    """Dominant right singular vector of ``a`` by power iteration on ``a^H a``.

    ``stop="vector"`` ends when consecutive unit iterates differ by less than
    ``tol``; ``stop="value"`` when the relative change of the dominant-value
    estimate does.
    """
    if stop not in ("vector", "value"):
        raise ValueError(f"unknown stop rule {stop!r}")
    a = np.asarray(a, dtype=np.complex128)
    if not np.any(a):
        raise ValueError("zero matrix has no dominant singular vector")
    rng = np.random.default_rng(rng)
    q = a.shape[1]
    v0 = rng.standard_normal(q) + 1j * rng.standard_normal(q)
    v, iters, value, ok = kernels.power_iteration(a, v0, tol, max_iter, stop == "value")
    if not ok:
        warnings.warn(f"power method stopped after {max_iter} iterations", ConvergenceWarning)
    return PowerMethodResult(v, int(iters), float(value), bool(ok))


def subarray_slices(n_t, l_t):
    n_a = math.ceil(n_t / l_t)
    if (l_t - 1) * n_a >= n_t:
        raise ValueError(f"n_t={n_t} cannot be split into {l_t} non-empty sub-arrays of {n_a}")
    return [slice(i * n_a, min((i + 1) * n_a, n_t)) for i in range(l_t)]


def hpp_analog(h, l_t, bits_ps=5, tol=1e-6, max_iter=10_000, rng=None, stop="value"):
    """Partially-connected analog precoder: quantized MET per sub-array."""
    h = np.asarray(h, dtype=np.complex128)
    n_t = h.shape[1]
    blocks = subarray_slices(n_t, l_t)
    rng = np.random.default_rng(rng)
    f_rf = np.zeros((n_t, l_t), dtype=np.complex128)
    iters = np.zeros(l_t, dtype=int)
    ok = True
    for i, sl in enumerate(blocks):
        res = power_method(h[:, sl], tol, max_iter, rng, stop=stop)
        if bits_ps is None:
            f_rf[sl, i] = np.exp(1j * np.angle(res.v))
        else:
            f_rf[sl, i] = quantize_phases(res.v, bits_ps)
        iters[i] = res.iterations
        ok = ok and res.converged
    return AnalogDesign(f_rf, iters, ok)


# -- baseband stage ----------------------------------------------------------

def hybrid_baseband(h, f_rf, n_s, p_max, noise_var, full=False):
    """SVD/water-filling baseband for a fixed analog stage.

    ``F_BB = sqrt(p_max) / ||F_RF Q||_F * Q`` so that ``||F_RF F_BB||_F^2 =
    p_max``. Water-filling runs on the singular values of ``H F_RF`` divided
    by the mean column gain ``||F_RF||_F^2 / M``, i.e. at the SNR the streams
    see once the analog stage's array gain is paid for by the power
    constraint. With ``full=True`` returns ``(f_bb, q, allocation, svd)``.
    """
    h = np.asarray(h, dtype=np.complex128)
    h_eq = h @ f_rf
    col_gain = np.linalg.norm(f_rf) ** 2 / f_rf.shape[1]
    q, alloc, dec = svd_precoder(h_eq, n_s, p_max, noise_var * col_gain)
    f_bb = np.sqrt(p_max) / np.linalg.norm(f_rf @ q) * q
    if full:
        return f_bb, q, alloc, dec
    return f_bb


def hybrid_precoder(h, topology, l_t, n_s, p_max, noise_var, bits_ps=5, tol=1e-6,
                    max_iter=None, rng=None, analog=None):
    """Design analog and baseband stages; ``analog`` reuses a prior design."""
    if analog is None:
        if topology == FULLY_CONNECTED:
            analog = hpf_analog(h, l_t, bits_ps, tol, max_iter or 1000)
        elif topology == PARTIALLY_CONNECTED:
            analog = hpp_analog(h, l_t, bits_ps, tol, max_iter or 10_000, rng)
        else:
            raise ValueError(f"not a hybrid topology: {topology!r}")
    f_bb, q, alloc, dec = hybrid_baseband(h, analog.f_rf, n_s, p_max, noise_var, full=True)
    return Precoder(
        topology=topology,
        f_rf=analog.f_rf,
        f_bb=f_bb,
        # HPP: mean power-method iterations per sub-array, rounded up
        iterations=int(math.ceil(np.mean(analog.iterations))),
        converged=analog.converged,
        allocation=alloc,
        heq_svd=dec,
        normalization=float(np.linalg.norm(analog.f_rf @ q) ** 2 / p_max),
    )


def aqn_transmit_power(precoder, rho):
    """Lossless transmit power ``(1-rho)||F_RF F_BB||^2 + tr(F_RF R_ee F_RF^H)``."""
    f_rf, f_bb = precoder.f_rf, precoder.f_bb
    r_ee_diag = rho * np.sum(np.abs(f_bb) ** 2, axis=1)
    col_power = np.sum(np.abs(f_rf) ** 2, axis=0)
    return float((1 - rho) * np.linalg.norm(f_rf @ f_bb) ** 2 + np.sum(col_power * r_ee_diag))

"""Achievable spectral efficiency under the AQN model, plus its bounds."""
from dataclasses import dataclass

import numpy as np

from ._linalg import log2det_eye_plus, log2det_pd, whitening_filter
from .quantization import quant_error_covariance


@dataclass(frozen=True)
class NoiseModel:
    awgn_var: float
    total_cov: np.ndarray

    def whitening(self):
        return whitening_filter(self.total_cov)


@dataclass(frozen=True)
class RateResult:
    rate: float  # bits/s/Hz
    snr_db: float
    method: str = "aqn-whitened"


def total_noise_cov(h_eq, r_ee, noise_var, loss_linear=1.0):
    """``(1/L_RF) H_eq R_ee H_eq^H + noise_var I``."""
    if loss_linear <= 0:
        raise ValueError("loss_linear must be positive")
    r_ee = np.asarray(r_ee)
    if np.min(np.linalg.eigvalsh(0.5 * (r_ee + r_ee.conj().T))) < -1e-12 * max(1.0, np.abs(r_ee).max()):
        raise ValueError("r_ee is not positive semidefinite")
    h_eq = np.asarray(h_eq)
    cov = h_eq @ r_ee @ h_eq.conj().T / loss_linear + noise_var * np.eye(h_eq.shape[0])
    return 0.5 * (cov + cov.conj().T)


def noise_model(h, precoder, rho, noise_var):
    h_eq = np.asarray(h) @ precoder.f_rf
    r_ee = quant_error_covariance(precoder.f_bb, rho)
    return NoiseModel(noise_var, total_noise_cov(h_eq, r_ee, noise_var, precoder.loss_linear))


def signal_cov(h, precoder, rho):
    """``(1/L_RF) H' R_uu H'^H`` with ``H' = sqrt(1-rho) H F_RF``."""
    g = np.sqrt(1.0 - rho) * (np.asarray(h) @ precoder.f_rf @ precoder.f_bb)
    return g @ g.conj().T / precoder.loss_linear


def achievable_rate(h, precoder, rho, noise_var, p_max=None):
    """Spectral efficiency of the whitened AQN model.

    The total noise (AWGN plus channel-filtered quantization noise) is
    whitened with ``L^{-1/2} J^H`` from its eigendecomposition and the rate
    is ``log2 det(I + W S W^H)`` for the signal covariance ``S``.
    """
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    nm = noise_model(h, precoder, rho, noise_var)
    w = nm.whitening()
    s = signal_cov(h, precoder, rho)
    rate = max(0.0, log2det_eye_plus(w @ s @ w.conj().T))
    if p_max is None:
        p_max = np.linalg.norm(precoder.f_rf @ precoder.f_bb) ** 2
    return RateResult(rate, float(10 * np.log10(p_max / noise_var)))


def achievable_rate_cholesky(h, precoder, rho, noise_var):
    """Same rate via ``log det(R + S) - log det(R)``; cross-check path."""
    nm = noise_model(h, precoder, rho, noise_var)
    s = signal_cov(h, precoder, rho)
    return log2det_pd(nm.total_cov + s) - log2det_pd(nm.total_cov)


def _rotated_noise(sigma, v, lam, rho, loss_linear, noise_var, n_t):
    # R_ee of F_BB = V Lam^{1/2} / sqrt(n_t)
    r_ee_diag = rho / n_t * np.sum(np.abs(v) ** 2 * lam[None, :], axis=1)
    sv = sigma[:, None] * v.conj().T  # Sigma V^H
    return (sv * r_ee_diag[None, :]) @ sv.conj().T / loss_linear + noise_var * np.eye(sigma.size)


def rate_lower_bound(h_eq_svd, lam, rho, loss_linear, noise_var, n_t):
    """Rate of the SVD-combined, noise-whitened model.

    ``n_t`` is the baseband normalization ``||F_RF Q||_F^2 / P_max``; the
    array approximation makes it equal to the number of transmit antennas.
    Passing the realized normalization gives a bound that never exceeds
    :func:`achievable_rate` on the same instance.
    """
    sigma = np.asarray(h_eq_svd.s, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    r = _rotated_noise(sigma, h_eq_svd.v, lam, rho, loss_linear, noise_var, n_t)
    sig = np.diag((1 - rho) / (loss_linear * n_t) * sigma ** 2 * lam)
    return max(0.0, log2det_pd(r + sig) - log2det_pd(r))


def low_snr_rate(sigma_max, rho, loss_linear, snr_linear, n_t):
    """Single-stream low-SNR limit of the lower bound."""
    return float(np.log2(1 + (1 - rho) * snr_linear * sigma_max ** 2 / (loss_linear * n_t)))


def high_snr_saturation_bound(h_eq_svd, rho, loss_linear, p_max, n_t, n_s):
    """Noise-free limit of the lower bound with equal power per stream.

    Both the signal and the quantization noise scale with ``p_max``, ``n_t``
    and ``1/loss_linear``, so the value depends only on the singular
    structure of ``H_eq`` and on ``rho``.
    """
    if rho <= 0:
        raise ValueError("saturation bound needs rho > 0")
    sigma = np.asarray(h_eq_svd.s[:n_s], dtype=np.float64)
    v = h_eq_svd.v[:, :n_s]
    lam = np.full(n_s, p_max / n_s)
    active = sigma > 0
    sigma, v, lam = sigma[active], v[:, active], lam[active]
    r_high = _rotated_noise(sigma, v, lam, rho, loss_linear, 0.0, n_t)
    sig = np.diag((1 - rho) / (loss_linear * n_t) * sigma ** 2 * lam)
    return max(0.0, log2det_pd(r_high + sig) - log2det_pd(r_high))

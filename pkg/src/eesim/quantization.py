"""MSE-optimal scalar quantizer for Gaussian inputs and the AQN linearization.

The quantizer operates on the real and imaginary parts of complex baseband
samples independently. Codes are designed once for a unit-variance real
Gaussian and rescaled per branch (perfect AGC).
"""
from dataclasses import dataclass
from functools import lru_cache
import warnings

import numpy as np
from scipy import integrate, linalg, special

from . import kernels

MAX_LLOYD_ITERATIONS = 100_000
CODE_TOL = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class QuantizerSpec:
    bits: int
    codes: np.ndarray
    thresholds: np.ndarray
    rho: float
    iterations: int = 0

    @property
    def levels(self):
        return self.codes.size

    @property
    def sqnr_db(self):
        return -10.0 * np.log10(self.rho)


@dataclass(frozen=True)
class AqnStats:
    """Monte Carlo check of the additive-quantization-noise model.

    ``input_output_corr`` is the measured linear gain E[p u*]/E[|u|^2]
    (close to sqrt(1 - rho) when the output is power-normalized),
    ``input_error_corr`` the normalized correlation coefficient between the
    input and the model error ``e = p - sqrt(1 - rho) u``.
    """

    input_output_corr: complex
    input_error_corr: complex
    error_to_input_power_ratio: float
    output_to_input_power_ratio: float
    sample_count: int

    def __post_init__(self):
        if self.sample_count <= 0:
            raise ValueError("sample_count must be positive")


def _phi(x):
    return np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)


def _cell_probability(a, b):
    # upper-tail form on the positive side keeps tails accurate
    pos = a >= 0
    out = np.empty(np.broadcast(a, b).shape)
    out[pos] = special.ndtr(-a[pos]) - special.ndtr(-b[pos])
    out[~pos] = special.ndtr(b[~pos]) - special.ndtr(a[~pos])
    return out


def _centroids(t):
    a = np.concatenate([[-np.inf], t])
    b = np.concatenate([t, [np.inf]])
    p = _cell_probability(a, b)
    g = (_phi(a) - _phi(b)) / p
    return g, a, b, p


def _lloyd_jacobian_solve(c, g, a, b, p, rhs):
    with np.errstate(invalid="ignore"):
        dga = np.where(np.isfinite(a), _phi(a) * (g - a) / p, 0.0)
        dgb = np.where(np.isfinite(b), _phi(b) * (b - g) / p, 0.0)
    n = c.size
    ab = np.zeros((3, n))
    ab[0, 1:] = -0.5 * dgb[:-1]
    ab[1] = 1.0 - 0.5 * dga - 0.5 * dgb
    ab[2, :-1] = -0.5 * dga[1:]
    return linalg.solve_banded((1, 1), ab, rhs)


def _symmetrize(c):
    return 0.5 * (c - c[::-1])


def _initial_codes(levels):
    if levels == 2:
        return np.array([-1.0, 1.0])
    # companding guess: point density proportional to pdf**(1/3)
    return np.sqrt(3.0) * special.ndtri((np.arange(levels) + 0.5) / levels)


def lloyd_max_gaussian(levels, tol=CODE_TOL, max_iter=MAX_LLOYD_ITERATIONS):
    """Fixed point of the Lloyd-Max iteration for a unit-variance Gaussian.

    Newton steps on ``c = centroid(midpoints(c))`` (tridiagonal Jacobian)
    accelerate the plain Lloyd update; a Newton step is only kept when it
    preserves ordering and reduces the Lloyd residual. Stops once one Lloyd
    update moves the codes by less than ``tol``.
    """
    c = _initial_codes(levels)
    for it in range(1, max_iter + 1):
        t = 0.5 * (c[1:] + c[:-1])
        g, a, b, p = _centroids(t)
        resid = c - g
        if np.max(np.abs(resid)) < tol:
            return c, t, it
        step = g
        try:
            cand = _symmetrize(c - _lloyd_jacobian_solve(c, g, a, b, p, resid))
            if np.all(np.diff(cand) > 0):
                gc = _centroids(0.5 * (cand[1:] + cand[:-1]))[0]
                if np.max(np.abs(cand - gc)) < np.max(np.abs(resid)):
                    step = cand
        except (linalg.LinAlgError, ValueError):
            pass
        c = _symmetrize(step)
    raise RuntimeError(f"Lloyd-Max design did not converge in {max_iter} iterations")


def _tail_mse(lo, hi, code):
    val, _ = integrate.quad(lambda u: (u - code) ** 2 * _phi(u), lo, hi, epsabs=1e-15, epsrel=1e-12)
    return val


def gaussian_mse(codes, thresholds):
    """E[(u - Q(u))^2] for u ~ N(0, 1), by per-cell quadrature."""
    if codes.size == 1:
        return 1.0 + codes[0] ** 2
    a, b = thresholds[:-1], thresholds[1:]
    c = codes[1:-1]
    half = 0.5 * (b - a)[:, None]
    mid = 0.5 * (b + a)[:, None]
    u = mid + half * _GL_NODES[None, :]
    inner = np.sum(half[:, 0] * np.sum(_GL_WEIGHTS * (u - c[:, None]) ** 2 * _phi(u), axis=1))
    tails = _tail_mse(-np.inf, thresholds[0], codes[0]) + _tail_mse(thresholds[-1], np.inf, codes[-1])
    return float(inner + tails)


def distortion_factor_approx(bits):
    """High-resolution approximation ``(pi sqrt(3) / 2) 2^(-2b)``."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    return np.pi * np.sqrt(3.0) / 2.0 * 2.0 ** (-2 * bits)


@lru_cache(maxsize=None)
def design_quantizer(bits, max_bits_exact=16):
    """MSE-optimal ``bits``-bit quantizer for a unit-variance real Gaussian.

    Resolutions above ``max_bits_exact`` skip the Lloyd-Max solve and use the
    companding code book with the high-resolution distortion factor.
    """
    bits = int(bits)
    if not 1 <= bits <= 16:
        raise ValueError("bits must lie in [1, 16]")
    levels = 2 ** bits
    if bits > max_bits_exact:
        codes = _initial_codes(levels)
        thresholds = 0.5 * (codes[1:] + codes[:-1])
        rho, iters = distortion_factor_approx(bits), 0
    else:
        codes, thresholds, iters = lloyd_max_gaussian(levels)
        rho = gaussian_mse(codes, thresholds)
    codes.setflags(write=False)
    thresholds.setflags(write=False)
    return QuantizerSpec(bits, codes, thresholds, float(rho), iters)


def distortion_factor(bits):
    return design_quantizer(bits).rho


def quantize_real(spec, x):
    """Quantize unit-variance real samples with the designed code book."""
    return kernels.quantize_real(np.asarray(x, dtype=np.float64), spec.thresholds, spec.codes)


def quantize_vector(spec, u, branch_std):
    """Entry-wise complex quantization with per-branch scaling.

    ``u`` has shape ``(M,)`` or ``(M, T)``; ``branch_std[m]`` is the standard
    deviation of the complex signal on branch ``m``, so each real dimension is
    scaled by ``branch_std[m] / sqrt(2)``.
    """
    u = np.asarray(u, dtype=np.complex128)
    std = np.asarray(branch_std, dtype=np.float64)
    if np.any(~(std > 0)):
        raise ValueError("branch_std must be strictly positive")
    scale = std / np.sqrt(2.0)
    if u.ndim == 2:
        scale = scale[:, None]
    re = quantize_real(spec, u.real / scale)
    im = quantize_real(spec, u.imag / scale)
    return scale * (re + 1j * im)


def quant_error_covariance(f_bb, rho):
    """AQN error covariance ``rho * diag(F_BB F_BB^H)``."""
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    f_bb = np.asarray(f_bb)
    return np.diag(rho * np.sum(np.abs(f_bb) ** 2, axis=1))


def validate_aqn(f_bb, spec, num_samples=10**6, rng=None, preserve_power=True, chunk=2**18):
    """Measure how well the AQN linearization describes the exact quantizer.

    Gaussian streams ``s`` with identity covariance are precoded,
    ``u = F_BB s``, quantized with perfect per-branch AGC, and compared with
    the linear model ``p ~ sqrt(1 - rho) u + e``. With ``preserve_power`` the
    quantizer output is rescaled by ``1/sqrt(1 - rho)`` so that output and
    input power match, which is the normalization under which the model's
    gain makes ``e`` uncorrelated with ``u``.
    """
    if num_samples < 10**4:
        raise ValueError("num_samples must be >= 1e4")
    f_bb = np.atleast_2d(np.asarray(f_bb, dtype=np.complex128))
    std = np.sqrt(np.sum(np.abs(f_bb) ** 2, axis=1))
    active = std > 0
    f_bb, std = f_bb[active], std[active]
    rng = np.random.default_rng(rng)
    gain = np.sqrt(1.0 - spec.rho)
    out_scale = 1.0 / gain if preserve_power else 1.0

    uu = ee = pp = 0.0
    ue = pu = 0.0 + 0.0j
    done = 0
    while done < num_samples:
        n = min(chunk, num_samples - done)
        s = (rng.standard_normal((f_bb.shape[1], n)) + 1j * rng.standard_normal((f_bb.shape[1], n))) / np.sqrt(2.0)
        u = f_bb @ s
        p = out_scale * quantize_vector(spec, u, std)
        e = p - gain * u
        uu += np.sum(np.abs(u) ** 2)
        ee += np.sum(np.abs(e) ** 2)
        pp += np.sum(np.abs(p) ** 2)
        ue += np.vdot(e, u)  # sum u e*
        pu += np.vdot(u, p)  # sum p u*
        done += n
    if ee == 0:
        warnings.warn("zero quantization error measured", RuntimeWarning)
        corr = 0j
    else:
        corr = ue / np.sqrt(uu * ee)
    return AqnStats(
        input_output_corr=complex(pu / uu),
        input_error_corr=complex(corr),
        error_to_input_power_ratio=float(ee / uu),
        output_to_input_power_ratio=float(pp / uu),
        sample_count=int(num_samples * f_bb.shape[0]),
    )

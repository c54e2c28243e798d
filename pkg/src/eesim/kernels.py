"""Hot inner loops, compiled with numba when available.

Every kernel exists as a plain numpy implementation (``py_*``) and, when
numba imports and ``EESIM_DISABLE_JIT`` is unset, as an ``@njit`` build of
a loop-oriented twin (``jit_*``). The public names (``quantize_real``,
``alternating_projection``, ``power_iteration``) point at whichever path is
active; ``BACKEND`` says which.
"""
import os

import numpy as np

_DISABLE = os.environ.get("EESIM_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def py_quantize_real(x, thresholds, codes):
    # side="left": a value sitting on a threshold takes the lower code
    return codes[np.searchsorted(thresholds, x, side="left")]


def py_alternating_projection(f_su, tol, max_iter):
    """Constant-modulus / semi-unitary alternating projection.

    Returns ``(f_rf, f_su, residuals, iterations)`` where ``residuals[k]`` is
    the Frobenius distance between consecutive semi-unitary iterates.
    """
    f_su = np.array(f_su, dtype=np.complex128)
    residuals = np.empty(max_iter)
    f_rf = np.exp(1j * np.angle(f_su))
    it = 0
    for k in range(max_iter):
        f_rf = np.exp(1j * np.angle(f_su))
        u, _, vh = np.linalg.svd(f_rf, full_matrices=False)
        new = u @ vh
        residuals[k] = np.linalg.norm(new - f_su)
        f_su = new
        it = k + 1
        if residuals[k] < tol:
            break
    return f_rf, f_su, residuals[:it], it


def py_power_iteration(a, v0, tol, max_iter, stop_on_value):
    """Power iteration on ``a^H a``.

    Stops when the relative change of the dominant-value estimate
    (``stop_on_value``) or the change of the unit iterate drops below
    ``tol``. Returns ``(v, iterations, value, converged)``; ``value`` is the
    estimate of ``sigma_max**2``.
    """
    ah = a.conj().T
    v = v0 / np.linalg.norm(v0)
    value = 0.0
    for k in range(max_iter):
        w = ah @ (a @ v)
        new_value = np.linalg.norm(w)
        if new_value == 0.0:
            raise ValueError("iterate collapsed to zero; start vector orthogonal to the row space")
        w = w / new_value
        if stop_on_value:
            delta = abs(new_value - value) / new_value
        else:
            delta = np.linalg.norm(w - v)
        v = w
        value = new_value
        if delta < tol:
            return v, k + 1, value, True
    return v, max_iter, value, False


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

def _quantize_real_loop(x, thresholds, codes):
    out = np.empty(x.shape[0])
    n = thresholds.shape[0]
    for i in range(x.shape[0]):
        xi = x[i]
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) >> 1
            if thresholds[mid] < xi:
                lo = mid + 1
            else:
                hi = mid
        out[i] = codes[lo]
    return out


def _alternating_projection_loop(f_su, tol, max_iter):
    residuals = np.empty(max_iter)
    f_rf = np.exp(1j * np.angle(f_su))
    it = 0
    for k in range(max_iter):
        f_rf = np.exp(1j * np.angle(f_su))
        u, _, vh = np.linalg.svd(f_rf, full_matrices=False)
        new = u @ vh
        residuals[k] = np.linalg.norm(new - f_su)
        f_su = new
        it = k + 1
        if residuals[k] < tol:
            break
    return f_rf, f_su, residuals[:it], it


def _power_iteration_loop(a, v0, tol, max_iter, stop_on_value):
    ah = np.ascontiguousarray(a.conj().T)
    v = v0 / np.linalg.norm(v0)
    value = 0.0
    for k in range(max_iter):
        w = ah @ (a @ v)
        new_value = np.linalg.norm(w)
        if new_value == 0.0:
            raise ValueError("iterate collapsed to zero")
        w = w / new_value
        if stop_on_value:
            delta = abs(new_value - value) / new_value
        else:
            delta = np.linalg.norm(w - v)
        v = w
        value = new_value
        if delta < tol:
            return v, k + 1, value, True
    return v, max_iter, value, False


if HAS_NUMBA:
    _jq = njit(cache=True)(_quantize_real_loop)
    _jap = njit(cache=True)(_alternating_projection_loop)
    _jpi = njit(cache=True)(_power_iteration_loop)

    def jit_quantize_real(x, thresholds, codes):
        x = np.ascontiguousarray(x, dtype=np.float64)
        return _jq(x.ravel(), thresholds, codes).reshape(x.shape)

    def jit_alternating_projection(f_su, tol, max_iter):
        f_su = np.ascontiguousarray(f_su, dtype=np.complex128)
        return _jap(f_su, float(tol), int(max_iter))

    def jit_power_iteration(a, v0, tol, max_iter, stop_on_value):
        a = np.ascontiguousarray(a, dtype=np.complex128)
        v0 = np.ascontiguousarray(v0, dtype=np.complex128)
        return _jpi(a, v0, float(tol), int(max_iter), bool(stop_on_value))

    quantize_real = jit_quantize_real
    alternating_projection = jit_alternating_projection
    power_iteration = jit_power_iteration
    BACKEND = "numba"
else:
    quantize_real = py_quantize_real
    alternating_projection = py_alternating_projection
    power_iteration = py_power_iteration
    BACKEND = "numpy"

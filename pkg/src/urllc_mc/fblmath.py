"""Finite-blocklength kernel for the AWGN normal approximation.

All functions accept scalars or numpy arrays and broadcast. SNRs are
linear (not dB), rates are in bits per channel use.
"""

import math

import numpy as np
from scipy.special import erfc

LN2 = math.log(2.0)
DISPERSION_LIMIT = 1.0 / LN2**2

# Acklam's rational approximation of the standard normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671134476802e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _check_snr(gamma, strict=False):
    gamma = np.asarray(gamma, dtype=float)
    bad = gamma <= 0 if strict else gamma < 0
    if np.any(bad) or not np.all(np.isfinite(gamma)):
        raise ValueError(f"SNR must be {'> 0' if strict else '>= 0'} and finite")
    return gamma


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
        raise ValueError("error probability must lie strictly in (0, 1)")
    return p


def _out(x):
    return x if np.ndim(x) else float(x)


def _cap_disp(gamma):
    lg = np.log1p(gamma)
    # 1 - (1+g)^-2 without cancellation at small g
    return lg / LN2, -DISPERSION_LIMIT * np.expm1(-2.0 * lg)


def capacity(gamma):
    """Shannon capacity log2(1 + gamma)."""
    gamma = _check_snr(gamma)
    return _out(np.log1p(gamma) / LN2)


def dispersion(gamma):
    """AWGN channel dispersion in bits^2 per channel use."""
    gamma = _check_snr(gamma)
    return _out(_cap_disp(gamma)[1])


def q_function(x):
    """Standard normal tail probability Q(x) = P(Z > x)."""
    x = np.asarray(x, dtype=float)
    return _out(0.5 * erfc(x / math.sqrt(2.0)))


def _acklam_lower(p):
    # initial guess for the lower-tail quantile Phi^-1(p)
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    q = np.sqrt(-2.0 * np.log(p[lo]))
    out[lo] = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
        ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)

    q = p[mid] - 0.5
    r = q * q
    out[mid] = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
        (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)

    q = np.sqrt(-2.0 * np.log1p(-p[hi]))
    out[hi] = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
        ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    return out


def q_inverse(p, max_iter=6):
    """Inverse of the Q-function.

    A rational approximation (relative error ~1e-9) is polished with Halley
    steps against :func:`q_function`. The upper half is solved through
    Q^-1(p) = -Q^-1(1 - p) so the residual is always taken in the small tail.
    """
    p = _check_prob(p)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    upper = p > 0.5
    tail = np.where(upper, 1.0 - p, p)
    x = -_acklam_lower(tail)
    for _ in range(max_iter):
        resid = 0.5 * erfc(x / math.sqrt(2.0)) - tail
        pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        # Q'(x) = -pdf, Q''(x) = x * pdf
        u = resid / pdf
        step = u / (1.0 - 0.5 * x * u)
        x = x + step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(x))):
            break
    x = np.where(upper, -x, x)
    return float(x[0]) if scalar else x


def channel_usage(L, gamma, pe, quantize=False):
    """Channel uses needed to carry ``L`` bits at SNR ``gamma`` with error ``pe``.

    Closed-form inverse of the truncated normal approximation. Set
    ``quantize`` to round up to whole channel uses.
    """
    gamma = _check_snr(gamma, strict=True)
    pe = _check_prob(pe)
    c, v = _cap_disp(gamma)
    qi2v = q_inverse(pe) ** 2 * v
    with np.errstate(divide="ignore", invalid="ignore"):
        extra = qi2v / (2.0 * c * c) * (1.0 + np.sqrt(1.0 + 4.0 * L * c / qi2v))
    # pe == 0.5 gives qi2v == 0 and the correction term vanishes
    R = L / c + np.where(qi2v > 0, extra, 0.0)
    if quantize:
        R = np.ceil(R)
    return _out(R)


def achievable_bits(R, gamma, pe):
    """Information bits in ``R`` channel uses, normal approximation without the log term."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ValueError("blocklength must be positive")
    c = capacity(gamma)
    v = dispersion(gamma)
    return _out(R * c - q_inverse(pe) * np.sqrt(R * v))


def outage_probability(R, gamma, L):
    """Decoding error probability of ``L`` bits sent in ``R`` channel uses at SNR ``gamma``."""
    R = np.asarray(R, dtype=float)
    if np.any(R <= 0):
        raise ValueError("blocklength must be positive")
    gamma = _check_snr(gamma, strict=True)
    c, v = _cap_disp(gamma)
    if np.any(v <= 0):
        raise ValueError("zero dispersion: link unusable")
    return _out(0.5 * erfc((R * c - L) / np.sqrt(2.0 * R * v)))


def db_to_linear(db):
    return _out(10.0 ** (np.asarray(db, dtype=float) / 10.0))


def linear_to_db(lin):
    return _out(10.0 * np.log10(np.asarray(lin, dtype=float)))

"""Leray projection, fractional Laplacian powers, the parabolic Riesz potential,
the C_alpha membership check and V_alpha sandwich surrogates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import betainc, hyp2f1

from .grid import SpaceGrid, SpaceTimeVectorField, SpectralField, TimeGrid, fft_samples, ifft_coeffs


class MeanNotZeroError(ValueError):
    """A negative Laplacian power was applied to a field with a nonzero mean."""


# ---------------------------------------------------------------------------
# spectral operators


def leray_project(spec: SpectralField) -> SpectralField:
    """``(I - xi xi^T / |xi|^2) u_hat`` per mode; the ``xi = 0`` mode passes through."""
    g = spec.grid
    if spec.ncomp != g.d:
        raise ValueError("Leray projection needs d components")
    xi = g.xi_mesh()
    k2 = sum(x**2 for x in xi)
    safe = np.where(k2 == 0, 1.0, k2)
    dot = sum(xi[a] * spec.coeffs[a] for a in range(g.d)) / safe
    out = np.stack([spec.coeffs[a] - xi[a] * dot for a in range(g.d)])
    return spec.with_coeffs(out)


def has_zero_mean(spec: SpectralField, tol: float = 1e-13) -> bool:
    g = spec.grid
    mean = np.abs(spec.coeffs[(slice(None),) + (0,) * g.d])
    return bool(np.all(mean <= tol * max(spec.norm(), 1e-300)))


def fractional_laplacian_power(spec: SpectralField, s: float, mean_tol: float = 1e-13) -> SpectralField:
    """Multiply by ``|xi|^s``, i.e. apply ``(-Delta)^{s/2}``.

    For ``s > 0`` the zero mode is annihilated; for ``s < 0`` it must already
    vanish (relative to ``mean_tol``), otherwise :class:`MeanNotZeroError`.
    """
    if s == 0:
        return spec.with_coeffs(spec.coeffs.copy())
    g = spec.grid
    if s < 0 and not has_zero_mean(spec, mean_tol):
        raise MeanNotZeroError("negative Laplacian power of a field with nonzero mean")
    k = g.xi_norm()
    with np.errstate(divide="ignore"):
        m = np.where(k == 0, 0.0, k ** float(s))
    return spec.with_coeffs(spec.coeffs * m)


def apply_power_to_samples(sgrid: SpaceGrid, data: np.ndarray, s: float) -> np.ndarray:
    """``(-Delta)^{s/2}`` on real samples with trailing grid axes (any leading shape)."""
    if s == 0:
        return np.array(data, dtype=float)
    c = fft_samples(sgrid, data)
    zero = (Ellipsis,) + (0,) * sgrid.d
    if s < 0:
        scale = np.sqrt(np.sum(np.abs(c) ** 2, axis=tuple(range(-sgrid.d, 0)), keepdims=True))
        if np.any(np.abs(c[zero]) > 1e-13 * np.maximum(scale[zero], 1e-300)):
            raise MeanNotZeroError("negative Laplacian power of a slice with nonzero mean")
    k = sgrid.xi_norm()
    with np.errstate(divide="ignore"):
        m = np.where(k == 0, 0.0, k ** float(s))
    return ifft_coeffs(sgrid, c * m)


# ---------------------------------------------------------------------------
# parabolic Riesz potential


@dataclass(frozen=True)
class RieszConfig:
    """Order ``s`` with ``0 < s < d + alpha``; kernel ``(|t-s|^{1/alpha} + |x-y|)^{-(d+alpha-s)}``.

    ``near`` is the offset radius (in cells, per axis) treated with sub-cell
    quadrature and ``sub`` the Gauss points per axis used there.
    """

    s: float
    alpha: float
    near: int = 2
    sub: int = 4
    max_n: int = 32


def _binc(alpha: float, m: float, X: np.ndarray) -> np.ndarray:
    """``int_0^X x^{alpha-1} (1+x)^{-m} dx``."""
    X = np.asarray(X, dtype=float)
    if m > alpha:
        out = beta_fn(alpha, m - alpha) * betainc(alpha, m - alpha, X / (1.0 + X))
        return np.where(np.isinf(X), beta_fn(alpha, m - alpha), out)
    return X**alpha / alpha * hyp2f1(m, alpha, alpha + 1.0, -X)


def _time_primitive(alpha: float, m: float, tau: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``F(tau) = int_0^tau (u^{1/alpha} + rho)^{-m} du`` for ``rho > 0``."""
    return alpha * rho ** (alpha - m) * _binc(alpha, m, tau ** (1.0 / alpha) / rho)


def _time_weight(alpha, m, lo, hi, rho):
    return _time_primitive(alpha, m, hi, rho) - _time_primitive(alpha, m, lo, rho)


@lru_cache(maxsize=64)
def _self_cell_unit(d: int, q_w: int = 16):
    """Face rule for the centred space cell: ``(c, b)`` with ``b = sqrt(1 + |y'|^2)``
    at Gauss nodes ``y'`` of the face ``[-1, 1]^{d-1}`` (units of ``h/2``)."""
    if d == 1:
        return np.array([1.0]), np.array([1.0])
    x, w = np.polynomial.legendre.leggauss(q_w)
    grids = np.meshgrid(*([x] * (d - 1)), indexing="ij")
    ws = np.ones_like(grids[0])
    for gw in np.meshgrid(*([w] * (d - 1)), indexing="ij"):
        ws = ws * gw
    b = np.sqrt(1.0 + sum(gg**2 for gg in grids)).ravel()
    return ws.ravel(), b


def self_cell_integral(d: int, alpha: float, s: float, h: float, U: float) -> float:
    """``int_0^U dtau int_{[-h/2,h/2]^d} (tau^{1/alpha} + |y|)^{-(d+alpha-s)} dy``.

    The cube is split into ``2d`` pyramids over its faces.  Along each ray the
    radial and time integrals are done in closed form: with ``X = U^{1/alpha}/rho_face``
    the ray integral is ``Binc_alpha(X)/s + X^{alpha+d-m} Binc_d(1/X)/s``
    (integration by parts), leaving a Gauss rule on the face only.
    """
    m = d + alpha - s
    c, b = _self_cell_unit(d)
    bb = b * (h / 2.0)
    X = U ** (1.0 / alpha) / bb
    inner = (_binc(alpha, m, X) + X ** (alpha + d - m) * _binc(d, m, 1.0 / X)) / s
    return float(2 * d * (h / 2.0) ** d * np.sum(c * alpha * bb ** (alpha - m) * inner))


def _offset_grid(d: int, n: int):
    """Integer offsets on the padded ``2n`` grid in FFT order."""
    k = np.fft.fftfreq(2 * n, d=1.0 / (2 * n)).astype(np.int64)
    return np.meshgrid(*([k] * d), indexing="ij")


def _riesz_kernels(sgrid: SpaceGrid, tgrid: TimeGrid, cfg: RieszConfig):
    """Weights ``W[k, j, offset]`` on the padded grid, as a generator over ``k``."""
    d, n, h = sgrid.d, sgrid.n, sgrid.h
    a, m = cfg.alpha, d + cfg.alpha - cfg.s
    edges = tgrid.edges
    tk = tgrid.nodes
    N = tgrid.N
    offs = _offset_grid(d, n)
    k2 = sum(o.astype(np.int64) ** 2 for o in offs)
    uniq, inv = np.unique(k2, return_inverse=True)
    inv = inv.reshape(k2.shape)
    rho_far = np.sqrt(uniq.astype(float)) * h
    pos = rho_far > 0
    near_mask = np.ones(k2.shape, dtype=bool)
    for o in offs:
        near_mask &= np.abs(o) <= cfg.near
    near_idx = np.nonzero(near_mask)
    near_vecs = np.stack([o[near_idx] for o in offs], axis=1).astype(float)
    # sub-cell nodes
    x, w = np.polynomial.legendre.leggauss(cfg.sub)
    sub_pts = np.stack(np.meshgrid(*([x] * d), indexing="ij"), axis=-1).reshape(-1, d) * (h / 2)
    sub_w = np.ones(len(sub_pts))
    for ww in np.meshgrid(*([w] * d), indexing="ij"):
        sub_w = sub_w * ww.ravel()
    sub_w = sub_w * (h / 2) ** d
    pts = near_vecs[:, None, :] * h + sub_pts[None]
    rho_near = np.sqrt(np.sum(pts**2, axis=-1))  # (n_near, n_sub)
    rho_u, rho_inv = np.unique(np.round(rho_near, 12), return_inverse=True)
    rho_inv = rho_inv.reshape(rho_near.shape)
    zero_near = np.all(near_vecs == 0, axis=1)
    for k in range(N):
        W = np.empty((N,) + k2.shape)
        for j in range(N):
            if j <= k:
                lo, hi = tk[k] - edges[j + 1], tk[k] - edges[j]
            else:
                lo, hi = edges[j] - tk[k], edges[j + 1] - tk[k]
            self_cell = lo == 0.0
            far = np.zeros_like(rho_far)
            far[pos] = _time_weight(a, m, lo, hi, rho_far[pos])
            Wj = far[inv] * h**d
            tw = _time_weight(a, m, lo, hi, rho_u)[rho_inv]  # (n_near, n_sub)
            nearw = tw @ sub_w
            if self_cell:
                nearw[zero_near] = self_cell_integral(d, a, cfg.s, h, hi)
            Wj[near_idx] = nearw
            W[j] = Wj
        yield k, W


def parabolic_riesz_potential(field: SpaceTimeVectorField, cfg: RieszConfig) -> SpaceTimeVectorField:
    """``I_s(|psi|)`` at the grid nodes, as a one-component space-time field.

    The field is extended by zero outside ``(0, T]`` in time and outside the
    box in space (zero-padded linear convolution).  Each time cell carries the
    sample at its right node.  Time integrals of the kernel are exact; the
    spatial integral is a point rule away from the diagonal, a Gauss rule on
    cells near it and an exact pyramid integral on the diagonal cell.
    """
    sg, tg = field.sgrid, field.tgrid
    d = sg.d
    if not (0 < cfg.s < d + cfg.alpha):
        raise ValueError(f"Riesz order must lie in (0, d + alpha), got {cfg.s}")
    if sg.n > cfg.max_n:
        raise ValueError(f"Riesz potential limited to n <= {cfg.max_n} (got {sg.n})")
    A = field.magnitude()
    N = tg.N
    P = 2 * sg.n
    pad = np.zeros((N,) + (P,) * d)
    pad[(slice(None),) + (slice(0, sg.n),) * d] = A
    axes = tuple(range(1, d + 1))
    Ahat = np.fft.rfftn(pad, axes=axes)
    out = np.empty((N,) + sg.shape)
    if not np.any(A):
        return SpaceTimeVectorField(sg, tg, np.zeros((N, 1) + sg.shape))
    for k, W in _riesz_kernels(sg, tg, cfg):
        What = np.fft.rfftn(W, axes=axes)
        conv = np.fft.irfftn(np.sum(What * Ahat, axis=0), s=(P,) * d, axes=tuple(range(d)))
        out[k] = conv[(slice(0, sg.n),) * d]
    return SpaceTimeVectorField(sg, tg, np.maximum(out, 0.0)[:, None])


def unit_cylinder_volume(d: int, alpha: float) -> float:
    """``|{(t, x): |t|^{1/alpha} + |x| < 1}| = 2 omega_d alpha B(alpha, d + 1)``."""
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return 2 * omega * alpha * beta_fn(alpha, d + 1)


# ---------------------------------------------------------------------------
# C_alpha cone and V_alpha surrogates


@dataclass(frozen=True, eq=False)
class CalphaReport:
    max_violation: float
    margin_field: np.ndarray
    member: bool
    tol: float

    def to_dict(self) -> dict:
        return {"max_violation": self.max_violation, "member": self.member, "tol": self.tol,
                "min_margin": float(self.margin_field.min())}


def calpha_margin(v: SpaceTimeVectorField, alpha: float, tol: float = 0.0,
                  cfg: Optional[RieszConfig] = None) -> CalphaReport:
    """Check ``I_{alpha-1}(v^2) <= v`` pointwise on the grid (constant 1, no normalisation)."""
    if v.ncomp != 1:
        raise ValueError("C_alpha check takes a scalar field")
    if np.any(v.data < 0):
        raise ValueError("C_alpha check needs v >= 0")
    cfg = cfg or RieszConfig(alpha - 1.0, alpha)
    if not np.any(v.data):
        z = np.zeros(v.data[:, 0].shape)
        return CalphaReport(0.0, z, True, tol)
    lhs = parabolic_riesz_potential(v.with_data(v.data**2), cfg).data[:, 0]
    margin = v.data[:, 0] - lhs
    worst = float(np.max(-margin))
    return CalphaReport(worst, margin, worst <= tol, tol)


@dataclass(frozen=True)
class ValphaBounds:
    """Morrey surrogates bracketing a V_alpha-type quantity up to unknown constants.

    ``lower`` is the ``M^{2,q}`` side (a necessary condition) and ``upper`` the
    ``M^{p1,q}`` side (a sufficient one), ``q = (d + alpha)/(alpha - 1)``.
    ``holder_constant`` is the cylinder-Holder factor with
    ``lower <= holder_constant * upper`` exactly for the continuous norms.
    """

    lower: float
    upper: float
    target: str
    p1: float
    holder_constant: float
    consistent: bool
    direct: Optional[float] = None
    notes: tuple = ()

    def to_dict(self) -> dict:
        out = {"lower": self.lower, "upper": self.upper, "target": self.target, "p1": self.p1,
               "holder_constant": self.holder_constant, "consistent": self.consistent,
               "notes": list(self.notes)}
        if self.direct is not None:
            out["direct"] = self.direct
        return out


def valpha_sandwich_bounds(field: SpaceTimeVectorField, target: str, p1: float, alpha: float,
                           scan=None, noise: float = 0.05) -> ValphaBounds:
    """Sandwich surrogates for ``||field||_{V_alpha}`` or ``||field||_{V_alpha^{-1}}``.

    For ``target = "Vinv"`` the field is first mapped to
    ``I_{alpha-1}(|(-Delta)^{-1/2} f|)``; the direct quantity
    ``||(-Delta)^{-1/2} f||_{M^{1,(d+alpha)/(2(alpha-1))}}`` is reported too.
    """
    from .norms import MorreyScan, parabolic_morrey_norm

    d = field.sgrid.d
    if target not in ("V", "Vinv"):
        raise ValueError("target must be 'V' or 'Vinv'")
    if not (2 < p1 <= d + alpha):
        raise ValueError("p1 must satisfy 2 < p1 <= d + alpha")
    q = (d + alpha) / (alpha - 1)
    scan = scan or MorreyScan.for_grid(field.sgrid, field.tgrid)
    hc = unit_cylinder_volume(d, alpha) ** (0.5 - 1.0 / p1)
    notes = []
    direct = None
    work = field
    if target == "Vinv":
        g = apply_power_to_samples(field.sgrid, field.data, -1.0)
        gfield = field.with_data(np.sqrt(np.sum(g**2, axis=1)))
        qd = (d + alpha) / (2 * (alpha - 1))
        direct = parabolic_morrey_norm(gfield, 1.0, qd, scan, alpha).value
        if field.sgrid.n <= RieszConfig(alpha - 1, alpha).max_n:
            work = parabolic_riesz_potential(gfield, RieszConfig(alpha - 1.0, alpha))
        else:
            notes.append("grid too large for the Riesz potential; V^-1 sandwich skipped")
            return ValphaBounds(math.nan, math.nan, target, p1, hc, True, direct, tuple(notes))
    lower = parabolic_morrey_norm(work, 2.0, q, scan, alpha).value
    upper = parabolic_morrey_norm(work, p1, q, scan, alpha).value
    consistent = lower <= hc * upper * (1 + noise) + 1e-300
    if not consistent:
        notes.append("lower surrogate exceeds Holder bound beyond estimator noise")
    return ValphaBounds(lower, upper, target, p1, hc, consistent, direct, tuple(notes))

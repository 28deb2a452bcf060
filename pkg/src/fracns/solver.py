"""Duhamel terms, Picard iteration and pressure recovery for the mild formulation

    u = p_t * u0 + int_0^t p_{t-s} * P f ds - int_0^t p_{t-s} * P div(u x u) ds.

Time integrals use exponential time differencing on the graded grid: per
Fourier mode the source is interpolated linearly between nodes and integrated
exactly against ``exp(-(t - s)|xi|^alpha)``.  On the first cell a declared
``t^(-b)`` factor is integrated exactly instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import beta as beta_fn
from scipy.special import hyp1f1

from .grid import (SpaceGrid, SpaceTimeVectorField, SpectralField, TimeGrid, VectorField,
                   fft_samples, forward_transform, ifft_coeffs, is_divergence_free)
from .operators import leray_project
from .semigroup import apply_semigroup


class DivergenceError(ValueError):
    """Input velocity is not divergence free within tolerance."""


# ---------------------------------------------------------------------------
# exact weights


def _phi1(z: np.ndarray) -> np.ndarray:
    """``(1 - exp(-z)) / z``."""
    out = np.ones_like(z)
    nz = z > 1e-8
    out[nz] = -np.expm1(-z[nz]) / z[nz]
    out[~nz] = 1 - z[~nz] / 2
    return out


def _psi(z: np.ndarray) -> np.ndarray:
    """``(1 - exp(-z)(1 + z)) / z^2 = int_0^1 x exp(-z x) dx``."""
    out = np.empty_like(z)
    small = z < 1e-2
    zs = z[small]
    out[small] = 0.5 - zs / 3 + zs**2 / 8 - zs**3 / 30
    zb = z[~small]
    out[~small] = -(np.expm1(-zb) + zb * np.exp(-zb)) / zb**2
    return out


def _first_cell_power(z: np.ndarray, b: float) -> np.ndarray:
    """``int_0^1 exp(-z (1 - x)) x^{-b} dx = M(1, 2 - b, -z) / (1 - b)``."""
    if b == 0:
        return _phi1(z)
    return hyp1f1(1.0, 2.0 - b, -z) / (1.0 - b)


def _etd_accumulate(sgrid: SpaceGrid, tgrid: TimeGrid, ghat: np.ndarray, alpha: float,
                    t_power: float = 0.0, g0hat: Optional[np.ndarray] = None) -> np.ndarray:
    """``S_k = int_0^{t_k} exp(-(t_k - s)|xi|^alpha) g(s) ds`` for spectral sources ``ghat[k]``."""
    lam = sgrid.xi_norm() ** alpha
    dts = tgrid.steps
    out = np.empty_like(ghat)
    z = lam * dts[0]
    if g0hat is None:
        S = dts[0] * _first_cell_power(z, t_power) * ghat[0]
    else:
        S = dts[0] * (_psi(z) * g0hat + (_phi1(z) - _psi(z)) * ghat[0])
    out[0] = S
    for k in range(1, tgrid.N):
        dt = dts[k]
        z = lam * dt
        ps = _psi(z)
        S = np.exp(-z) * S + dt * (ps * ghat[k - 1] + (_phi1(z) - ps) * ghat[k])
        out[k] = S
    return out


# ---------------------------------------------------------------------------
# Duhamel terms


def heat_term(u0: VectorField, tgrid: TimeGrid, alpha: float, div_tol: float = 1e-10) -> SpaceTimeVectorField:
    """``p_{t_k} * u0`` at every node."""
    spec = forward_transform(u0)
    if u0.ncomp == u0.grid.d and not is_divergence_free(spec, div_tol):
        raise DivergenceError("initial velocity is not divergence free")
    data = np.stack([ifft_coeffs(u0.grid, apply_semigroup(spec, t, alpha).coeffs)
                     for t in tgrid.nodes])
    return SpaceTimeVectorField(u0.grid, tgrid, data)


def _project_slices(sgrid: SpaceGrid, data: np.ndarray) -> np.ndarray:
    c = fft_samples(sgrid, data)
    return np.stack([leray_project(SpectralField(sgrid, ck)).coeffs for ck in c])


def duhamel_force_term(f: SpaceTimeVectorField, alpha: float) -> SpaceTimeVectorField:
    """``int_0^t p_{t-s} * P f(s) ds``; a declared ``t_power`` is integrated exactly on the first cell."""
    sg = f.sgrid
    ghat = _project_slices(sg, f.data)
    S = _etd_accumulate(sg, f.tgrid, ghat, alpha, f.t_power)
    return SpaceTimeVectorField(sg, f.tgrid, ifft_coeffs(sg, S))


def nonlinear_source(sgrid: SpaceGrid, u: np.ndarray) -> np.ndarray:
    """Spectral ``P div(u x u)`` for samples ``u`` of shape ``(..., d, n, ..., n)``.

    Products are formed in physical space; Nyquist modes are zeroed by the
    divergence.
    """
    d = sgrid.d
    xi = sgrid.xi()
    mask = sgrid.nyquist_mask()
    lead = u.shape[:-d - 1]
    out = np.zeros(lead + (d,) + sgrid.shape, dtype=complex)
    comp = [np.take(u, j, axis=-d - 1) for j in range(d)]
    for j in range(d):
        acc = 0
        for l in range(d):
            acc = acc + 1j * xi[l] * fft_samples(sgrid, comp[j] * comp[l])
        np.moveaxis(out, -d - 1, 0)[j] = np.where(mask, 0.0, acc)
    flat = out.reshape((-1, d) + sgrid.shape)
    proj = np.stack([leray_project(SpectralField(sgrid, c)).coeffs for c in flat])
    return proj.reshape(out.shape)


def duhamel_bilinear_term(u: SpaceTimeVectorField, alpha: float,
                          u0: Optional[VectorField] = None) -> SpaceTimeVectorField:
    """``B(u, u) = int_0^t p_{t-s} * P div(u x u)(s) ds``.

    With ``u0`` the source at ``t = 0`` is taken from it; otherwise it is held
    constant on the first cell.
    """
    sg = u.sgrid
    ghat = nonlinear_source(sg, u.data)
    g0 = None if u0 is None else nonlinear_source(sg, u0.data[None])[0]
    S = _etd_accumulate(sg, u.tgrid, ghat, alpha, 0.0, g0)
    return SpaceTimeVectorField(sg, u.tgrid, ifft_coeffs(sg, S))


# ---------------------------------------------------------------------------
# Picard iteration


@dataclass(frozen=True)
class SolveConfig:
    """``norm_choice`` is ``"linfty_alpha"`` or ``"morrey"`` (with exponent ``p1``)."""

    max_iters: int = 50
    stop_tol: float = 1e-12
    norm_choice: str = "linfty_alpha"
    p1: float = 2.5
    alpha: float = 1.5
    blowup_factor: float = 10.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.norm_choice not in ("linfty_alpha", "morrey"):
            raise ValueError("norm_choice must be 'linfty_alpha' or 'morrey'")


@dataclass(frozen=True, eq=False)
class SolveReport:
    iterate_norms: list
    contraction_factors: list
    residual: float
    relative_residual: float
    converged: bool
    diverged: bool
    final: SpaceTimeVectorField
    increments: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    data_norms: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"iterate_norms": list(map(float, self.iterate_norms)),
                "contraction_factors": list(map(float, self.contraction_factors)),
                "increments": list(map(float, self.increments)),
                "residual": float(self.residual), "relative_residual": float(self.relative_residual),
                "converged": self.converged, "diverged": self.diverged,
                "data_norms": self.data_norms}


def _norm_fn(cfg: SolveConfig, sgrid: SpaceGrid, tgrid: TimeGrid):
    from .norms import MorreyScan, linfty_alpha_norm, parabolic_morrey_norm

    if cfg.norm_choice == "linfty_alpha":
        return lambda u: linfty_alpha_norm(u, cfg.alpha).value
    d = sgrid.d
    q = (d + cfg.alpha) / (cfg.alpha - 1)
    scan = MorreyScan.for_grid(sgrid, tgrid, cfg.alpha, stride=2, time_stride=2, splits=8)
    return lambda u: parabolic_morrey_norm(u, cfg.p1, q, scan, cfg.alpha, refine_check=False).value


def picard_solve(u0: VectorField, f: Optional[SpaceTimeVectorField], tgrid: TimeGrid,
                 cfg: SolveConfig = SolveConfig()) -> SolveReport:
    """Iterate ``u <- U0 + F - B(u, u)`` from the seed ``U0 + F``.

    Stops when the relative increment falls below ``stop_tol``, after
    ``max_iters`` or when an iterate norm exceeds ``blowup_factor`` times the
    seed norm (reported as non-contraction).
    """
    a = cfg.alpha
    U0 = heat_term(u0, tgrid, a)
    base = U0.data
    if f is not None:
        if f.tgrid != tgrid or f.sgrid != u0.grid:
            raise ValueError("force grids must match")
        base = base + duhamel_force_term(f, a).data
    norm = _norm_fn(cfg, u0.grid, tgrid)
    wrap = lambda x: SpaceTimeVectorField(u0.grid, tgrid, x)

    def phi(x):
        return base - duhamel_bilinear_term(wrap(x), a, u0).data

    u = base
    seed_norm = norm(wrap(u))
    norms_, incs, factors, res_hist = [seed_norm], [], [], []
    converged = diverged = False
    if seed_norm == 0.0:
        return SolveReport([0.0], [], 0.0, 0.0, True, False, wrap(u), [0.0], [0.0])
    for _ in range(cfg.max_iters):
        nxt = phi(u)
        inc = norm(wrap(nxt - u))
        incs.append(inc)
        res_hist.append(inc)
        if len(incs) > 1 and incs[-2] > 0:
            factors.append(inc / incs[-2])
        u = nxt
        nu = norm(wrap(u))
        norms_.append(nu)
        if not np.isfinite(nu) or nu > cfg.blowup_factor * seed_norm:
            diverged = True
            break
        if inc <= cfg.stop_tol * nu:
            converged = True
            break
    if diverged:
        res = float("inf") if not np.all(np.isfinite(u)) else norm(wrap(u - phi(u)))
    else:
        res = norm(wrap(u - phi(u)))
    nu = norms_[-1]
    rel = res / nu if nu > 0 else res
    if converged and not rel < 10 * cfg.stop_tol:
        converged = False
    final = wrap(u) if np.all(np.isfinite(u)) else wrap(np.zeros_like(u))
    return SolveReport(norms_, factors, res, rel, converged, diverged, final, incs, res_hist)


# ---------------------------------------------------------------------------
# pressure and time integrals


def recover_pressure(u: SpaceTimeVectorField, f: Optional[SpaceTimeVectorField] = None) -> SpaceTimeVectorField:
    """Mean-free ``p`` with ``(-Delta) p = div(div(u x u) - f)`` per slice.

    In Fourier: ``p_hat = (-xi_j xi_l (u_j u_l)^ - i xi . f_hat) / |xi|^2``.
    """
    sg = u.sgrid
    d = sg.d
    xi = sg.xi()
    k2 = sum(x**2 for x in xi)
    safe = np.where(k2 == 0, 1.0, k2)
    mask = sg.nyquist_mask()
    num = 0
    for j in range(d):
        for l in range(d):
            num = num - xi[j] * xi[l] * fft_samples(sg, u.data[:, j] * u.data[:, l])
    if f is not None:
        fh = fft_samples(sg, f.data)
        num = num - 1j * sum(xi[j] * fh[:, j] for j in range(d))
    ph = np.where((k2 == 0) | mask, 0.0, num / safe)
    return SpaceTimeVectorField(sg, u.tgrid, ifft_coeffs(sg, ph))


def duhamel_time_integral(a: float, b: float, t: float, method: str = "beta") -> float:
    """``int_0^t (t - s)^{-a} s^{-b} ds = t^{1-a-b} B(1 - a, 1 - b)``.

    ``method="quad"`` evaluates the integral with an adaptive rule carrying the
    algebraic end-point weights instead of the Beta function.
    """
    if a >= 1 or b >= 1:
        raise ValueError("divergent integral: need a < 1 and b < 1")
    if t <= 0:
        raise ValueError("t must be positive")
    if method == "beta":
        return float(t ** (1 - a - b) * beta_fn(1 - a, 1 - b))
    if method == "quad":
        val, _ = quad(lambda s: 1.0, 0.0, t, weight="alg", wvar=(-b, -a), epsabs=0, epsrel=1e-13,
                      limit=200)
        return float(val)
    raise ValueError("method must be 'beta' or 'quad'")

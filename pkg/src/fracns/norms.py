"""Estimators for the critical norms and the scaling maps.

Parabolic Morrey quantities are computed with exact-in-space ball integrals:
for samples ``a`` with coefficients ``a_k`` the ball integral is
``sum_k a_k exp(i xi.x) B_rho(|xi|)`` where ``B_rho`` is the Fourier transform
of the ball indicator.  This is exact for the trigonometric interpolant of
``a``, so balls larger than the box see its periodic extension.  The time
direction is split at the cell edges and at the points where the ball radius
``r - |t_c - s|^{1/alpha}`` crosses ``r i / M``; every piece is weighted by the
exact integral of the declared time power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import jv

from .grid import (SpaceGrid, SpaceTimeVectorField, TimeGrid, VectorField, fft_samples,
                   ifft_coeffs, rescale_descriptor)
from .operators import apply_power_to_samples
from .params import INF, ForceIndices


@dataclass(frozen=True)
class NormReport:
    value: float
    estimator: str
    scan: dict = field(default_factory=dict)
    refinement_delta: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError(f"norm value must be non-negative, got {self.value}")

    def to_dict(self) -> dict:
        return {"value": self.value, "estimator": self.estimator, "scan": self.scan,
                "refinement_delta": self.refinement_delta, "extra": self.extra}


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


# ---------------------------------------------------------------------------
# L^infty_alpha and F norms


def linfty_alpha_norm(u: SpaceTimeVectorField, alpha: float) -> NormReport:
    """``max_k t_k^{(alpha-1)/alpha} max_x |u(t_k, x)|`` (Euclidean magnitude)."""
    t = u.tgrid.nodes
    w = t ** ((alpha - 1.0) / alpha)
    per = w * u.magnitude().reshape(u.tgrid.N, -1).max(axis=1)
    val = float(per.max())
    coarse = float(per[1::2].max()) if u.tgrid.N > 1 else val
    return NormReport(val, "linfty_alpha", {"times": int(u.tgrid.N), "argmax_t": float(t[per.argmax()])},
                      _rel(val, coarse))


def _lp_grid(sgrid: SpaceGrid, mag: np.ndarray, p) -> np.ndarray:
    """Grid ``L^p`` norm over the trailing axes (``p = INF`` is the max)."""
    ax = tuple(range(-sgrid.d, 0))
    if p is INF or (isinstance(p, float) and math.isinf(p)):
        return mag.max(axis=ax)
    p = float(p)
    return (np.sum(mag**p, axis=ax) * sgrid.cell_volume) ** (1.0 / p)


def _F_value(f: SpaceTimeVectorField, idx: ForceIndices) -> tuple[float, np.ndarray]:
    g = apply_power_to_samples(f.sgrid, f.data, -float(idx.beta))
    mag = np.sqrt(np.sum(g**2, axis=1))
    per = f.tgrid.nodes ** float(idx.rho) * _lp_grid(f.sgrid, mag, idx.p0)
    return float(per.max()), per


def force_F_norm(f: SpaceTimeVectorField, idx: ForceIndices) -> NormReport:
    """``sup_tau tau^rho ||(-Delta)^{-beta/2} f(tau)||_{L^{p0}}`` over the nodes.

    ``refinement_delta`` compares against the same estimate on the grid with
    every other sample dropped in each axis.
    """
    val, per = _F_value(f, idx)
    delta = None
    if f.sgrid.n >= 8:
        sg = SpaceGrid(f.sgrid.d, f.sgrid.n // 2, f.sgrid.L)
        sub = f.data[(slice(None), slice(None)) + (slice(None, None, 2),) * f.sgrid.d]
        coarse, _ = _F_value(SpaceTimeVectorField(sg, f.tgrid, sub), idx)
        delta = _rel(val, coarse)
    return NormReport(val, "force_F", {"times": int(f.tgrid.N), "p0": str(idx.p0),
                                       "beta": float(idx.beta), "rho": float(idx.rho)},
                      delta, {"per_time_spread": float(per.max() - per.min())})


# ---------------------------------------------------------------------------
# parabolic Morrey norms


@dataclass(frozen=True)
class MorreyScan:
    """Dyadic radii ``unit * 2^j`` for ``j_min <= j <= j_max`` and subsampled centres.

    ``stride`` subsamples spatial centres per axis, ``time_stride`` the time
    centres (the origin ``t = 0`` is always included).  ``center`` pins a
    single centre ``(t, grid index tuple)``.  ``splits`` is the number of
    radius steps used along the time axis of each cylinder.
    """

    j_min: int = 0
    j_max: int = 3
    unit: float = 1.0
    stride: int = 2
    time_stride: int = 1
    splits: int = 32
    center: Optional[tuple] = None

    def __post_init__(self):
        if self.j_max - self.j_min + 1 < 4:
            raise ValueError("a Morrey scan needs at least 4 dyadic radius levels")
        if self.unit <= 0 or self.stride < 1 or self.time_stride < 1 or self.splits < 1:
            raise ValueError("invalid scan parameters")

    @property
    def radii(self) -> np.ndarray:
        return self.unit * 2.0 ** np.arange(self.j_min, self.j_max + 1)

    @staticmethod
    def for_grid(sgrid: SpaceGrid, tgrid: TimeGrid, alpha: float = 1.5, stride: int = 2,
                 **kw) -> "MorreyScan":
        """Radii from ``h`` up to the first dyadic multiple covering box and horizon."""
        top = max(2 * sgrid.L, tgrid.T ** (1.0 / alpha))
        j_max = max(3, int(math.ceil(math.log2(top / sgrid.h))))
        return MorreyScan(0, j_max, sgrid.h, stride, **kw)

    def scaled(self, lam: float) -> "MorreyScan":
        """The same scan for a field rescaled by ``lam`` (lengths divided by ``lam``)."""
        c = self.center
        if c is not None:
            c = (c[0], c[1])
        return MorreyScan(self.j_min, self.j_max, self.unit / lam, self.stride, self.time_stride,
                          self.splits, c)

    def to_dict(self) -> dict:
        return {"radii": [float(r) for r in self.radii], "stride": self.stride,
                "time_stride": self.time_stride, "splits": self.splits,
                "center": None if self.center is None else [self.center[0], list(self.center[1])]}


def ball_transform(d: int, rho: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    """``int_{|y| < rho} exp(i xi.y) dy`` as a function of ``|xi| = kappa``; table ``(rho, kappa)``."""
    rho = np.asarray(rho, dtype=float)[:, None]
    k = np.asarray(kappa, dtype=float)[None, :]
    x = rho * k
    omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if d == 1:
            out = 2.0 * rho * np.sinc(x / math.pi)
        elif d == 3:
            big = 4 * math.pi * (np.sin(x) - x * np.cos(x)) / k**3
            small = omega * rho**3 * (1 - x**2 / 10 + x**4 / 280)
            out = np.where(x < 1e-2, small, big)
        else:
            big = (2 * math.pi * rho / k) ** (d / 2) * jv(d / 2, x)
            out = np.where(x == 0, omega * rho**d, big)
    return np.where(rho > 0, out, 0.0)


def _power_weight(s0, s1, tj, e):
    """``int_{s0}^{s1} (s/tj)^{-e} ds``."""
    if e == 0:
        return s1 - s0
    if abs(e - 1.0) < 1e-14:
        return tj * np.log(s1 / s0)
    return tj**e * (s1 ** (1 - e) - s0 ** (1 - e)) / (1 - e)


def _cylinder_pieces(tc, r, alpha, edges, M):
    """Time pieces of the cylinder around ``tc``: ``(cell, weight_lo, weight_hi, ball_radius)``."""
    half = r**alpha
    lo, hi = max(tc - half, 0.0), min(tc + half, edges[-1])
    if hi <= lo:
        return None
    steps = (r * np.arange(M + 1) / M) ** alpha
    cuts = np.concatenate((tc - steps, tc + steps, edges))
    cuts = np.unique(cuts[(cuts >= lo) & (cuts <= hi)])
    if cuts.size < 2:
        return None
    s0, s1 = cuts[:-1], cuts[1:]
    keep = s1 > s0
    s0, s1 = s0[keep], s1[keep]
    u0 = np.abs(tc - s0) ** (1 / alpha)
    u1 = np.abs(tc - s1) ** (1 / alpha)
    rad = r - 0.5 * (u0 + u1)
    mid = 0.5 * (s0 + s1)
    cell = np.clip(np.searchsorted(edges, mid) - 1, 0, len(edges) - 2)
    return cell, s0, s1, np.maximum(rad, 0.0)


class _MorreyEngine:
    """Shared state for cylinder integrals of ``|psi|^p`` over one field."""

    def __init__(self, field: SpaceTimeVectorField, p: float, alpha: float):
        self.f = field
        self.p = p
        self.alpha = alpha
        sg = field.sgrid
        a = field.magnitude() ** p
        self.active = np.nonzero(a.reshape(a.shape[0], -1).max(axis=1) > 0)[0]
        self.ahat = fft_samples(sg, a[self.active])
        k2 = sg.int_k2()
        self.kuniq, inv = np.unique(k2, return_inverse=True)
        self.kinv = inv.reshape(k2.shape)
        self.kappa = np.sqrt(self.kuniq.astype(float)) * math.pi / sg.L
        self.edges = field.tgrid.edges
        self.nodes = field.tgrid.nodes
        self.e = field.t_power * p
        self.slot = -np.ones(field.tgrid.N, dtype=int)
        self.slot[self.active] = np.arange(self.active.size)

    def integrals(self, tc: float, r: float, M: int) -> Optional[np.ndarray]:
        """Cylinder integrals ``int int |psi|^p`` for all spatial centres at time ``tc``."""
        pcs = _cylinder_pieces(tc, r, self.alpha, self.edges, M)
        if pcs is None:
            return None
        cell, s0, s1, rad = pcs
        slot = self.slot[cell]
        keep = (slot >= 0) & (rad > 0)
        if not np.any(keep):
            return None
        cell, s0, s1, rad, slot = cell[keep], s0[keep], s1[keep], rad[keep], slot[keep]
        w = _power_weight(s0, s1, self.nodes[cell], self.e)
        B = ball_transform(self.f.sgrid.d, rad, self.kappa) * w[:, None]
        Mj = np.zeros((self.active.size, self.kappa.size))
        np.add.at(Mj, slot, B)
        used = np.unique(slot)
        S = np.einsum("j...,j...->...", self.ahat[used], Mj[used][:, self.kinv])
        return ifft_coeffs(self.f.sgrid, S)


def _time_centres(tgrid: TimeGrid, scan: MorreyScan) -> np.ndarray:
    if scan.center is not None:
        return np.array([float(scan.center[0])])
    return np.concatenate(([0.0], tgrid.nodes[:: scan.time_stride]))


def _morrey_scan(field, p, q, scan, alpha, splits):
    sg = field.sgrid
    d = sg.d
    eng = _MorreyEngine(field, p, alpha)
    expo = -(d + alpha) * (1.0 / p - 1.0 / q)
    best, arg = 0.0, None
    per_r = []
    if eng.active.size == 0:
        return 0.0, None, [0.0] * len(scan.radii)
    sub = (slice(None, None, scan.stride),) * d
    for r in scan.radii:
        rbest = 0.0
        for tc in _time_centres(field.tgrid, scan):
            I = eng.integrals(tc, r, splits)
            if I is None:
                continue
            if scan.center is not None:
                v = I[tuple(scan.center[1])]
            else:
                v = I[sub].max()
            v = max(float(v), 0.0)
            if v > rbest:
                rbest = v
            val = r**expo * v ** (1.0 / p)
            if val > best:
                best, arg = val, (float(r), float(tc))
        per_r.append(r**expo * rbest ** (1.0 / p))
    return best, arg, per_r


def parabolic_morrey_norm(field: SpaceTimeVectorField, p: float, q: float, scan: MorreyScan,
                          alpha: float, refine_check: bool = True) -> NormReport:
    """``sup_{r, (t,x)} r^{-(d+alpha)(1/p - 1/q)} (int int_{cylinder} |psi|^p)^{1/p}`` over the scan.

    The field vanishes outside ``(0, T]`` in time.  ``refinement_delta`` is
    the relative change when the time splitting of the cylinders is halved.
    """
    if not (1 <= p <= q):
        raise ValueError("need 1 <= p <= q")
    if scan.radii.size == 0:
        raise ValueError("empty scan")
    val, arg, per_r = _morrey_scan(field, p, q, scan, alpha, scan.splits)
    delta = None
    if refine_check:
        coarse, _, _ = _morrey_scan(field, p, q, scan, alpha, max(1, scan.splits // 2))
        delta = _rel(val, coarse)
    return NormReport(val, "parabolic_morrey", dict(scan.to_dict(), p=p, q=q), delta,
                      {"argmax": arg, "per_radius": per_r})


def cylinder_profile(field: SpaceTimeVectorField, p: float, scan: MorreyScan,
                     alpha: float) -> np.ndarray:
    """Raw cylinder integrals ``int int |psi|^p`` maximised over centres, per radius."""
    eng = _MorreyEngine(field, p, alpha)
    out = []
    sub = (slice(None, None, scan.stride),) * field.sgrid.d
    for r in scan.radii:
        best = 0.0
        for tc in _time_centres(field.tgrid, scan):
            I = eng.integrals(tc, r, scan.splits)
            if I is None:
                continue
            v = I[tuple(scan.center[1])] if scan.center is not None else I[sub].max()
            best = max(best, float(v))
        out.append(best)
    return np.array(out)


def morrey_sobolev_norm(f: SpaceTimeVectorField, gamma: float, p: float, q: float,
                        scan: MorreyScan, alpha: float, refine_check: bool = True) -> NormReport:
    """``||(-Delta)^{-gamma/2} f||_{M^{p,q}_alpha}`` (spatial operator slice by slice)."""
    g = apply_power_to_samples(f.sgrid, f.data, -float(gamma))
    gf = SpaceTimeVectorField(f.sgrid, f.tgrid, g, f.t_power)
    rep = parabolic_morrey_norm(gf, p, q, scan, alpha, refine_check)
    return NormReport(rep.value, "morrey_sobolev", dict(rep.scan, gamma=float(gamma)),
                      rep.refinement_delta, rep.extra)


# ---------------------------------------------------------------------------
# Besov thermic norm


def besov_thermic_norm(psi: VectorField, s: float, variant: str = "fractional", alpha: float = 1.5,
                       j_range: tuple[int, int] = (-16, 16), per_octave: int = 4,
                       refine: bool = True) -> NormReport:
    """``sup_t t^{s/2} ||h_t * psi||_inf`` (heat) or ``sup_t t^{s/alpha} ||p_t * psi||_inf``.

    The sup is taken on ``t = 2^{j/per_octave}`` and then refined by a bounded
    scalar search in ``log t`` around the best grid point.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if variant not in ("heat", "fractional"):
        raise ValueError("variant must be 'heat' or 'fractional'")
    g = psi.grid
    c = fft_samples(g, psi.data)
    k = g.xi_norm()
    order, wexp = (2.0, s / 2) if variant == "heat" else (alpha, s / alpha)
    ko = k**order

    def value(logt: float) -> float:
        t = math.exp(logt)
        u = ifft_coeffs(g, c * np.exp(-t * ko))
        return t**wexp * float(np.sqrt(np.sum(u**2, axis=0)).max())

    js = np.arange(j_range[0] * per_octave, j_range[1] * per_octave + 1) / per_octave
    logs = js * math.log(2.0)
    vals = np.array([value(x) for x in logs])
    i = int(vals.argmax())
    best, at = float(vals[i]), float(logs[i])
    if refine and 0 < i < len(logs) - 1:
        res = minimize_scalar(lambda x: -value(x), bounds=(logs[i - 1], logs[i + 1]),
                              method="bounded", options={"xatol": 1e-10})
        if -res.fun > best:
            best, at = float(-res.fun), float(res.x)
    edge = i in (0, len(logs) - 1)
    return NormReport(best, f"besov_thermic_{variant}",
                      {"j_range": list(j_range), "per_octave": per_octave},
                      _rel(best, float(vals.max())),
                      {"argmax_t": math.exp(at), "at_scan_edge": edge})


# ---------------------------------------------------------------------------
# scaling


_KIND_EXPONENT = {"velocity": lambda a: a - 1.0, "initial": lambda a: a - 1.0,
                  "force": lambda a: 2.0 * a - 1.0}


def rescale(field, lam: float, kind: str, alpha: float):
    """``lam^c field(lam^alpha t, lam x)`` on the rescaled grids.

    ``c = alpha - 1`` for velocities and initial data, ``2 alpha - 1`` for
    forces.  The samples are exact: node ``(t_k / lam^alpha, x_j / lam)`` of the
    new grids maps to node ``(t_k, x_j)`` of the old ones.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if kind not in _KIND_EXPONENT:
        raise ValueError(f"unknown kind {kind!r}")
    factor = lam ** _KIND_EXPONENT[kind](alpha)
    if isinstance(field, VectorField):
        if kind != "initial":
            raise ValueError("a spatial field rescales as initial data")
        return VectorField(field.grid.rescaled(lam), factor * field.data)
    if kind == "initial":
        raise ValueError("initial-data scaling applies to spatial fields")
    tg = field.tgrid.rescaled(lam ** (-alpha))
    if not np.all(tg.nodes > 0):
        raise ValueError("rescaling produced a time node at 0")
    desc = None
    if field.descriptor is not None:
        desc = rescale_descriptor(field.descriptor, lam, factor, alpha)
    return SpaceTimeVectorField(field.sgrid.rescaled(lam), tg, factor * field.data,
                                field.t_power, desc)

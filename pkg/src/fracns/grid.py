"""Periodic space grids, graded time grids, fields and the DFT contract.

The box is ``[-L, L]^d`` sampled at ``x_j = -L + j h`` with ``h = 2L/n``.
Spectral coefficients follow the physical convention

    c_k = n^{-d} sum_j f(x_j) exp(-i xi_k . x_j),    xi_k = pi k / L,

so that ``f(x_j) = sum_k c_k exp(i xi_k . x_j)``.  Because ``x_0 = -L`` this
differs from the raw FFT by the real phase ``(-1)^{k_1 + ... + k_d}``, which
keeps Hermitian symmetry intact.  Coefficient arrays are stored in FFT index
order, i.e. ``k`` runs ``0, 1, ..., n/2-1, -n/2, ..., -1`` on every axis.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class SpaceGrid:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def volume(self) -> float:
        return (2.0 * self.L) ** self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def coords(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    def mesh(self) -> list[np.ndarray]:
        x = self.coords()
        return np.meshgrid(*([x] * self.d), indexing="ij")

    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers per axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def xi(self) -> list[np.ndarray]:
        """Physical frequencies ``pi k / L`` as broadcastable axis arrays."""
        k = self.wavenumbers() * (math.pi / self.L)
        out = []
        for ax in range(self.d):
            shp = [1] * self.d
            shp[ax] = self.n
            out.append(k.reshape(shp))
        return out

    def xi_mesh(self) -> list[np.ndarray]:
        return [np.broadcast_to(x, self.shape) for x in self.xi()]

    def xi_norm(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.xi()))

    def int_k2(self) -> np.ndarray:
        """Integer ``|k|^2`` on the full grid (exact; used to group radial symbols)."""
        k = self.wavenumbers().astype(np.int64)
        out = np.zeros(self.shape, dtype=np.int64)
        for ax in range(self.d):
            shp = [1] * self.d
            shp[ax] = self.n
            out = out + (k**2).reshape(shp)
        return out

    def nyquist_mask(self) -> np.ndarray:
        """True on modes with some ``k_i = -n/2``."""
        k = self.wavenumbers()
        m = np.zeros(self.shape, dtype=bool)
        for ax in range(self.d):
            shp = [1] * self.d
            shp[ax] = self.n
            m = m | (k == -self.n // 2).reshape(shp)
        return m

    def phase(self) -> np.ndarray:
        """The real factor ``(-1)^{sum k}`` relating raw FFT to physical coefficients."""
        k = self.wavenumbers().astype(np.int64)
        s = np.zeros(self.shape, dtype=np.int64)
        for ax in range(self.d):
            shp = [1] * self.d
            shp[ax] = self.n
            s = s + k.reshape(shp)
        return np.where(s % 2 == 0, 1.0, -1.0)

    def rescaled(self, lam: float) -> "SpaceGrid":
        return SpaceGrid(self.d, self.n, self.L / lam)

    def resolves(self, xi_vec: Sequence[float], tol: float = 1e-9) -> bool:
        """Whether a physical frequency vector sits on the grid lattice (below Nyquist)."""
        k = np.asarray(xi_vec, dtype=float) * self.L / math.pi
        return bool(np.all(np.abs(k - np.round(k)) < tol) and np.all(np.abs(k) < self.n / 2))


@dataclass(frozen=True)
class TimeGrid:
    """Graded nodes ``t_k = T (k/N)^kappa``, ``k = 1..N``; ``t = 0`` is not a node."""

    T: float
    N: int
    kappa: float = 2.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def nodes(self) -> np.ndarray:
        k = np.arange(1, self.N + 1)
        t = self.T * (k / self.N) ** self.kappa
        t[-1] = self.T
        return t

    @property
    def edges(self) -> np.ndarray:
        """``[0, t_1, ..., t_N]``; cell ``j`` is ``[t_{j-1}, t_j]``."""
        return np.concatenate(([0.0], self.nodes))

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.edges)

    def rescaled(self, factor: float) -> "TimeGrid":
        """Nodes multiplied by ``factor``."""
        return TimeGrid(self.T * factor, self.N, self.kappa)

    def refined(self, m: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.N * m, self.kappa)


# ---------------------------------------------------------------------------
# fields


def _check_finite(a: np.ndarray, what: str):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite samples in {what}")


@dataclass(frozen=True, eq=False)
class VectorField:
    """Real samples of shape ``(m, n, ..., n)``; ``m`` is usually ``d``."""

    grid: SpaceGrid
    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim == self.grid.d:
            a = a[None]
        if a.shape[1:] != self.grid.shape:
            raise ValueError(f"data shape {a.shape} does not match grid {self.grid.shape}")
        _check_finite(a, "VectorField")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.data**2, axis=0))

    def l2_norm(self) -> float:
        return math.sqrt(float(np.sum(self.data**2)) * self.grid.cell_volume)

    def sup_norm(self) -> float:
        return float(self.magnitude().max())

    @staticmethod
    def zeros(grid: SpaceGrid, ncomp: Optional[int] = None) -> "VectorField":
        return VectorField(grid, np.zeros((ncomp or grid.d,) + grid.shape))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex coefficients of shape ``(m, n, ..., n)`` in FFT order."""

    grid: SpaceGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim == self.grid.d:
            c = c[None]
        if c.shape[1:] != self.grid.shape:
            raise ValueError("coefficient shape does not match grid")
        object.__setattr__(self, "coeffs", c)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def hermitian_error(self) -> float:
        """Max of ``|c(-k) - conj c(k)|`` relative to the largest coefficient."""
        c = self.coeffs
        flipped = np.conj(np.roll(np.flip(c, axis=tuple(range(1, c.ndim))), 1,
                                  axis=tuple(range(1, c.ndim))))
        scale = max(float(np.abs(c).max()), 1e-300)
        return float(np.abs(c - flipped).max()) / scale

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.coeffs) ** 2)))

    def with_coeffs(self, c: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, c)


@dataclass(frozen=True, eq=False)
class SpaceTimeVectorField:
    """Slices on a shared space grid, one per time node, shape ``(N, m, n, ..., n)``.

    ``t_power`` declares that between nodes the field behaves like
    ``(s / t_k)^(-t_power)`` times its sample at the right node ``t_k``; it is
    exact for separable descriptor-backed fields and zero otherwise.
    """

    sgrid: SpaceGrid
    tgrid: TimeGrid
    data: np.ndarray
    t_power: float = 0.0
    descriptor: object = None

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim == self.sgrid.d + 1:
            a = a[:, None]
        if a.shape[0] != self.tgrid.N or a.shape[2:] != self.sgrid.shape:
            raise ValueError(f"data shape {a.shape} inconsistent with grids")
        _check_finite(a, "SpaceTimeVectorField")
        a.setflags(write=False)
        object.__setattr__(self, "data", a)

    @property
    def ncomp(self) -> int:
        return self.data.shape[1]

    @property
    def slices(self) -> list[VectorField]:
        return [VectorField(self.sgrid, s) for s in self.data]

    def slice(self, k: int) -> VectorField:
        return VectorField(self.sgrid, self.data[k])

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.data**2, axis=1))

    def with_data(self, data: np.ndarray, keep_meta: bool = False) -> "SpaceTimeVectorField":
        if keep_meta:
            return SpaceTimeVectorField(self.sgrid, self.tgrid, data, self.t_power, self.descriptor)
        return SpaceTimeVectorField(self.sgrid, self.tgrid, data)

    @staticmethod
    def zeros(sgrid: SpaceGrid, tgrid: TimeGrid, ncomp: Optional[int] = None):
        return SpaceTimeVectorField(sgrid, tgrid, np.zeros((tgrid.N, ncomp or sgrid.d) + sgrid.shape))

    @staticmethod
    def from_slices(tgrid: TimeGrid, slices: Sequence[VectorField]) -> "SpaceTimeVectorField":
        grids = {s.grid for s in slices}
        if len(grids) != 1:
            raise ValueError("slices must share one space grid")
        return SpaceTimeVectorField(slices[0].grid, tgrid, np.stack([s.data for s in slices]))


# ---------------------------------------------------------------------------
# transforms


def _axes(grid: SpaceGrid) -> tuple[int, ...]:
    return tuple(range(-grid.d, 0))


def fft_samples(grid: SpaceGrid, a: np.ndarray) -> np.ndarray:
    """Physical-convention coefficients of real samples with trailing grid axes."""
    c = np.fft.fftn(a, axes=_axes(grid)) / grid.size
    return c * grid.phase()


def ifft_coeffs(grid: SpaceGrid, c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fft_samples`; returns the real part."""
    return np.fft.ifftn(c * grid.phase(), axes=_axes(grid)).real * grid.size


def forward_transform(field: VectorField) -> SpectralField:
    _check_finite(field.data, "forward_transform input")
    return SpectralField(field.grid, fft_samples(field.grid, field.data))


def inverse_transform(spec: SpectralField) -> VectorField:
    return VectorField(spec.grid, ifft_coeffs(spec.grid, spec.coeffs))


def parseval_sides(field: VectorField) -> tuple[float, float]:
    """``(||f||^2_{L^2(box)}, |box| * sum |c_k|^2)``; equal up to rounding."""
    spec = forward_transform(field)
    return field.l2_norm() ** 2, field.grid.volume * float(np.sum(np.abs(spec.coeffs) ** 2))


def divergence(spec: SpectralField) -> SpectralField:
    """``i xi . u_hat`` per mode (Nyquist modes zeroed)."""
    g = spec.grid
    if spec.ncomp != g.d:
        raise ValueError("divergence needs d components")
    xi = g.xi()
    div = sum(1j * xi[a] * spec.coeffs[a] for a in range(g.d))
    div = np.where(g.nyquist_mask(), 0.0, div)
    return SpectralField(g, div)


def is_divergence_free(spec: SpectralField, tol: float = 1e-10) -> bool:
    div = divergence(spec).coeffs
    scale = spec.norm()
    if scale == 0.0:
        return True
    return bool(np.abs(div).max() < tol * scale)


def gradient(spec: SpectralField) -> SpectralField:
    """``i xi c`` for a scalar spectrum (Nyquist zeroed)."""
    g = spec.grid
    if spec.ncomp != 1:
        raise ValueError("gradient takes a scalar spectrum")
    mask = g.nyquist_mask()
    comps = [np.where(mask, 0.0, 1j * x * spec.coeffs[0]) for x in g.xi()]
    return SpectralField(g, np.stack(comps))


# ---------------------------------------------------------------------------
# analytic descriptors


class Profile:
    """A closed-form spatial vector profile ``phi(x)``."""

    ncomp: int

    def evaluate(self, mesh: list[np.ndarray]) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def to_dict(self) -> dict:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class Mode(Profile):
    """``amplitude * v * cos(xi . x + phase)``."""

    xi: tuple
    v: tuple
    amplitude: float = 1.0
    phase: float = 0.0

    @property
    def ncomp(self) -> int:
        return len(self.v)

    def evaluate(self, mesh):
        arg = sum(k * x for k, x in zip(self.xi, mesh)) + self.phase
        c = self.amplitude * np.cos(arg)
        return np.stack([vi * c for vi in self.v])

    def to_dict(self):
        return {"kind": "mode", "xi": list(self.xi), "v": list(self.v),
                "amplitude": self.amplitude, "phase": self.phase}


@dataclass(frozen=True)
class GaussianBump(Profile):
    """``amplitude * v * G(x - center)`` with ``G = exp(-|x|^2 / (2 w^2))``.

    ``unit_mass`` divides by ``(2 pi w^2)^{d/2}``; ``derivative`` replaces ``G`` by
    ``w * d G / d x_axis`` which has zero mean.
    """

    center: tuple
    width: float
    v: tuple
    amplitude: float = 1.0
    unit_mass: bool = False
    derivative: Optional[int] = None

    @property
    def ncomp(self) -> int:
        return len(self.v)

    def evaluate(self, mesh):
        d = len(mesh)
        w = self.width
        r2 = sum((x - c) ** 2 for x, c in zip(mesh, self.center))
        g = np.exp(-r2 / (2 * w * w))
        if self.unit_mass:
            g = g / (2 * math.pi * w * w) ** (d / 2)
        if self.derivative is not None:
            ax = self.derivative
            g = -(mesh[ax] - self.center[ax]) / w * g
        g = self.amplitude * g
        return np.stack([vi * g for vi in self.v])

    def to_dict(self):
        return {"kind": "gaussian", "center": list(self.center), "width": self.width,
                "v": list(self.v), "amplitude": self.amplitude, "unit_mass": self.unit_mass,
                "derivative": self.derivative}


@dataclass(frozen=True)
class TaylorGreen(Profile):
    """Divergence-free cellular flow at physical wavenumber ``k``.

    ``d = 2``: ``(sin kx cos ky, -cos kx sin ky)``; ``d = 3`` adds a ``cos kz`` factor
    and a zero third component.
    """

    d: int
    k: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError("TaylorGreen needs d in {2, 3}")

    @property
    def ncomp(self) -> int:
        return self.d

    def evaluate(self, mesh):
        k = self.k
        x, y = mesh[0], mesh[1]
        zf = np.cos(k * mesh[2]) if self.d == 3 else 1.0
        u = self.amplitude * np.sin(k * x) * np.cos(k * y) * zf
        v = -self.amplitude * np.cos(k * x) * np.sin(k * y) * zf
        comps = [u, v] + ([np.zeros_like(u)] if self.d == 3 else [])
        return np.stack(comps)

    def to_dict(self):
        return {"kind": "taylor_green", "d": self.d, "k": self.k, "amplitude": self.amplitude}


@dataclass(frozen=True)
class RandomModes(Profile):
    """Sum of ``count`` random real modes with integer wavenumbers ``|k_i| <= kmax``.

    Wavenumbers are physical (``xi = k * base``).  With ``solenoidal`` the
    polarisations are projected orthogonal to their wavevector.  The draw is
    fully determined by ``seed``.
    """

    d: int
    seed: int
    count: int = 4
    kmax: int = 2
    base: float = 1.0
    amplitude: float = 1.0
    solenoidal: bool = False

    @property
    def ncomp(self) -> int:
        return self.d

    def _draw(self):
        rng = np.random.default_rng(self.seed)
        ks, vs, phases = [], [], []
        while len(ks) < self.count:
            k = rng.integers(-self.kmax, self.kmax + 1, size=self.d)
            if not np.any(k):
                continue
            v = rng.standard_normal(self.d)
            if self.solenoidal:
                if self.d == 1:
                    continue
                v = v - k * (v @ k) / (k @ k)
            ks.append(k * self.base)
            vs.append(v / max(np.linalg.norm(v), 1e-300))
            phases.append(rng.uniform(0, 2 * math.pi))
        return ks, vs, phases

    def evaluate(self, mesh):
        out = np.zeros((self.d,) + mesh[0].shape)
        for k, v, ph in zip(*self._draw()):
            c = np.cos(sum(ki * x for ki, x in zip(k, mesh)) + ph)
            out += v[:, None].reshape((self.d,) + (1,) * len(mesh)) * c
        return self.amplitude * out / math.sqrt(self.count)

    def to_dict(self):
        return {"kind": "random_modes", "d": self.d, "seed": self.seed, "count": self.count,
                "kmax": self.kmax, "base": self.base, "amplitude": self.amplitude,
                "solenoidal": self.solenoidal}


@dataclass(frozen=True)
class Dilated(Profile):
    """``amplitude * phi(lam * x)``."""

    base: Profile
    lam: float
    amplitude: float = 1.0

    @property
    def ncomp(self) -> int:
        return self.base.ncomp

    def evaluate(self, mesh):
        return self.amplitude * self.base.evaluate([self.lam * x for x in mesh])

    def to_dict(self):
        return {"kind": "dilated", "lam": self.lam, "amplitude": self.amplitude,
                "base": self.base.to_dict()}


@dataclass(frozen=True)
class PowerLaw:
    """Time factor ``t^(-b)``."""

    b: float = 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0) and self.b > 0:
            raise ValueError("t-power descriptors are only evaluated at t > 0")
        return t ** (-self.b)

    def dilated(self, c: float):
        """Law of ``s -> law(c s)`` as ``(new_law, constant)``."""
        return self, c ** (-self.b)

    def to_dict(self):
        return {"law": "power", "b": self.b}


@dataclass(frozen=True)
class ExpLaw:
    """Time factor ``exp(-rate * t)`` (single-mode semigroup evolution)."""

    rate: float

    def __call__(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))

    def dilated(self, c: float):
        return ExpLaw(self.rate * c), 1.0

    def to_dict(self):
        return {"law": "exp", "rate": self.rate}


@dataclass(frozen=True)
class Separable:
    """Space-time descriptor ``amplitude * law(t) * profile(x)``."""

    profile: Profile
    law: object = field(default_factory=PowerLaw)
    amplitude: float = 1.0

    @property
    def ncomp(self) -> int:
        return self.profile.ncomp

    @property
    def t_power(self) -> float:
        return self.law.b if isinstance(self.law, PowerLaw) else 0.0

    def to_dict(self):
        return {"kind": "separable", "amplitude": self.amplitude, "time": self.law.to_dict(),
                "profile": self.profile.to_dict()}


def force_A(d: int, L: float, rho: float, amplitude: float = 1.0, axis: int = 0) -> Separable:
    """``t^(-rho) psi(x)`` with ``psi`` a mean-free Gaussian derivative of width ``L/8``.

    Every component carries the same profile.
    """
    psi = GaussianBump(center=(0.0,) * d, width=L / 8, v=(1.0,) * d, unit_mass=True,
                       derivative=axis)
    return Separable(psi, PowerLaw(rho), amplitude)


def force_B(e0: Sequence[float], v0: Sequence[float], b: float = 0.4,
            amplitude: float = 1.0) -> Separable:
    """``|t|^(-b) cos(e0 . x) v0``."""
    return Separable(Mode(tuple(map(float, e0)), tuple(map(float, v0))), PowerLaw(b), amplitude)


def sample_analytic(desc, sgrid: SpaceGrid, tgrid: Optional[TimeGrid] = None):
    """Exact samples of a closed-form descriptor at the grid nodes."""
    mesh = sgrid.mesh()
    if isinstance(desc, Profile):
        return VectorField(sgrid, desc.evaluate(mesh))
    if isinstance(desc, Separable):
        if tgrid is None:
            raise ValueError("space-time descriptor needs a time grid")
        prof = desc.profile.evaluate(mesh)
        tf = desc.amplitude * desc.law(tgrid.nodes)
        data = tf.reshape((-1,) + (1,) * prof.ndim) * prof[None]
        return SpaceTimeVectorField(sgrid, tgrid, data, desc.t_power, desc)
    raise TypeError(f"unsupported descriptor {type(desc).__name__}")


def rescale_descriptor(desc, lam: float, factor: float, alpha: float):
    """Descriptor of ``factor * desc(lam^alpha t, lam x)`` (or ``factor * desc(lam x)``)."""
    if isinstance(desc, Profile):
        return Dilated(desc, lam, factor)
    if isinstance(desc, Separable):
        law, c = desc.law.dilated(lam**alpha)
        return Separable(Dilated(desc.profile, lam), law, desc.amplitude * factor * c)
    raise TypeError(f"unsupported descriptor {type(desc).__name__}")


def descriptor_from_dict(spec: dict):
    """Build a descriptor from a JSON-style mapping (see README for the catalog)."""
    kind = spec.get("kind")
    if kind == "mode":
        return Mode(tuple(spec["xi"]), tuple(spec["v"]), spec.get("amplitude", 1.0),
                    spec.get("phase", 0.0))
    if kind == "gaussian":
        return GaussianBump(tuple(spec["center"]), spec["width"], tuple(spec["v"]),
                            spec.get("amplitude", 1.0), spec.get("unit_mass", False),
                            spec.get("derivative"))
    if kind == "taylor_green":
        return TaylorGreen(spec["d"], spec.get("k", 1.0), spec.get("amplitude", 1.0))
    if kind == "random_modes":
        return RandomModes(spec["d"], spec["seed"], spec.get("count", 4), spec.get("kmax", 2),
                           spec.get("base", 1.0), spec.get("amplitude", 1.0),
                           spec.get("solenoidal", False))
    if kind == "dilated":
        return Dilated(descriptor_from_dict(spec["base"]), spec["lam"], spec.get("amplitude", 1.0))
    if kind == "separable":
        t = spec.get("time", {"law": "power", "b": 0.0})
        law = ExpLaw(t["rate"]) if t.get("law") == "exp" else PowerLaw(t.get("b", 0.0))
        return Separable(descriptor_from_dict(spec["profile"]), law, spec.get("amplitude", 1.0))
    if kind == "force_A":
        return force_A(spec["d"], spec["L"], spec["rho"], spec.get("amplitude", 1.0))
    if kind == "force_B":
        return force_B(spec["e0"], spec["v0"], spec.get("b", 0.4), spec.get("amplitude", 1.0))
    raise ValueError(f"unknown descriptor kind {kind!r}")


# ---------------------------------------------------------------------------
# serialization

_MAGIC = b"FNSF"
_HEADER = struct.Struct("<4sIIdI")


def to_bytes(field: VectorField) -> bytes:
    """Header ``(magic, d, n, L, ncomp)`` followed by row-major little-endian doubles."""
    g = field.grid
    head = _HEADER.pack(_MAGIC, g.d, g.n, g.L, field.ncomp)
    return head + np.ascontiguousarray(field.data, dtype="<f8").tobytes()


def from_bytes(buf: bytes) -> VectorField:
    magic, d, n, L, m = _HEADER.unpack_from(buf)
    if magic != _MAGIC:
        raise ValueError("not a field snapshot")
    grid = SpaceGrid(d, n, L)
    a = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    if a.size != m * grid.size:
        raise ValueError("truncated payload")
    return VectorField(grid, a.reshape((m,) + grid.shape).copy())


def to_csv(field: VectorField, max_points: int = 65536) -> str:
    """Columns ``x1..xd, u1..um``; one row per grid node in row-major order."""
    g = field.grid
    if g.size > max_points:
        raise ValueError("grid too large for CSV export")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(g.d)] + [f"u{i + 1}" for i in range(field.ncomp)])
    xs = [m.ravel() for m in g.mesh()]
    us = field.data.reshape(field.ncomp, -1)
    for j in range(g.size):
        w.writerow([repr(float(x[j])) for x in xs] + [repr(float(u[j])) for u in us])
    return buf.getvalue()


def from_csv(text: str, L: float) -> VectorField:
    rows = list(csv.reader(io.StringIO(text)))
    head, body = rows[0], np.array(rows[1:], dtype=float)
    d = sum(1 for h in head if h.startswith("x"))
    m = len(head) - d
    n = round(len(body) ** (1.0 / d))
    grid = SpaceGrid(d, n, L)
    return VectorField(grid, body[:, d:].T.reshape((m,) + grid.shape))

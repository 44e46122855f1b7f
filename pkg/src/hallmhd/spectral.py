"""Periodic 3D spectral fields and the linear operators acting on them.

Fields live on the cubic torus [0, box_length)^3 sampled on an n^3 lattice
(n a power of two).  A field is stored as the full cube of complex Fourier
coefficients c_k, indexed in numpy fft order, normalized so that

    f(x) = sum_k c_k exp(i xi_k . x),   xi_k = (2 pi / box_length) k,

i.e. c = fftn(samples) / n^3.  Real fields have conjugate-symmetric
coefficients; every constructor in this module preserves that symmetry.

Products of fields are formed in physical space and re-dealiased with the
2/3 rule, so quadratic aliasing never reaches the retained band.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

SCALAR = "scalar"
VECTOR3 = "vector3"

_MAGIC = b"HMHD1"


class FieldError(ValueError):
    """Rejected input: mismatched grids, ranks or malformed data."""


# ----------------------------------------------------------------------
# grid
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Grid3:
    """Cubic periodic grid with wavevector lattice and dealiasing band.

    Modes with any |k_i| > dealias_fraction * n/2 are zeroed whenever a
    nonlinear (physical-space) product is formed.
    """

    n: int
    box_length: float = 2.0 * np.pi
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1) != 0:
            raise FieldError(f"grid size must be a power of two >= 4, got {self.n}")
        if not self.box_length > 0:
            raise FieldError("box_length must be positive")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise FieldError("dealias_fraction must lie in (0, 1]")

    @cached_property
    def k(self) -> np.ndarray:
        """Integer mode numbers in fft order, one axis."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        return (2.0 * np.pi / self.box_length) * self.k

    @cached_property
    def xi(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Wavevector components broadcastable over the full cube."""
        a = self.xi_axis
        return (a[:, None, None], a[None, :, None], a[None, None, :])

    @cached_property
    def xi_sq(self) -> np.ndarray:
        x, y, z = self.xi
        return x**2 + y**2 + z**2

    @cached_property
    def xi_mag(self) -> np.ndarray:
        return np.sqrt(self.xi_sq)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on retained modes (all |k_i| <= dealias_fraction * n/2)."""
        cutoff = self.dealias_fraction * self.n / 2.0
        keep = np.abs(self.k) <= cutoff + 1e-12
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    # half-spectrum (rfft) views used by the physical-product fast path
    @cached_property
    def _nh(self) -> int:
        return self.n // 2 + 1

    @cached_property
    def xi_half(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = self.xi_axis
        return (a[:, None, None], a[None, :, None], a[None, None, : self._nh])

    @cached_property
    def xi_sq_half(self) -> np.ndarray:
        x, y, z = self.xi_half
        return x**2 + y**2 + z**2

    @cached_property
    def dealias_mask_half(self) -> np.ndarray:
        return self.dealias_mask[..., : self._nh]

    @cached_property
    def cell_volume(self) -> float:
        return (self.box_length / self.n) ** 3

    @cached_property
    def xi_cell_volume(self) -> float:
        """Fourier-lattice cell weight for hat-norm sums."""
        return (2.0 * np.pi / self.box_length) ** 3

    def compatible(self, other: "Grid3") -> bool:
        return (
            self.n == other.n
            and np.isclose(self.box_length, other.box_length)
            and np.isclose(self.dealias_fraction, other.dealias_fraction)
        )


# ----------------------------------------------------------------------
# half-spectrum <-> full-cube plumbing
# ----------------------------------------------------------------------

def _rev(a: np.ndarray, axis: int) -> np.ndarray:
    """Index map i -> (-i) mod n along one axis."""
    return np.roll(np.flip(a, axis), 1, axis)


def full_from_half(half: np.ndarray, n: int) -> np.ndarray:
    """Expand an rfft half-spectrum to the full conjugate-symmetric cube."""
    h = n // 2 + 1
    shape = half.shape[:-3] + (n, n, n)
    full = np.empty(shape, dtype=np.complex128)
    full[..., :h] = half
    mirrored = np.conj(_rev(_rev(half, -3), -2))
    full[..., h:] = mirrored[..., np.arange(n - h, 0, -1)]
    return full


def _half_view(coeffs: np.ndarray, n: int) -> np.ndarray:
    return coeffs[..., : n // 2 + 1]


def _phys_from_half(half: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfftn(half * float(n) ** 3, s=(n, n, n), axes=(-3, -2, -1))


def _half_from_phys(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[-1]
    return np.fft.rfftn(samples, axes=(-3, -2, -1)) / float(n) ** 3


def is_conjugate_symmetric(coeffs: np.ndarray, tol: float = 1e-12) -> bool:
    sym = np.conj(_rev(_rev(_rev(coeffs, -1), -2), -3))
    scale = np.abs(coeffs).max()
    return bool(np.abs(coeffs - sym).max() <= tol * max(scale, 1.0))


# ----------------------------------------------------------------------
# fields
# ----------------------------------------------------------------------

@dataclass
class SpectralField:
    """A real scalar or 3-vector field stored as Fourier coefficients."""

    grid: Grid3
    rank: str
    coeffs: np.ndarray

    def __post_init__(self):
        if self.rank not in (SCALAR, VECTOR3):
            raise FieldError(f"unknown rank {self.rank!r}")
        n = self.grid.n
        want = (n, n, n) if self.rank == SCALAR else (3, n, n, n)
        if self.coeffs.shape != want:
            raise FieldError(f"coefficient shape {self.coeffs.shape} != {want}")
        if self.coeffs.dtype != np.complex128:
            object.__setattr__(self, "coeffs", self.coeffs.astype(np.complex128))
        self.coeffs.flags.writeable = False

    # -- arithmetic (fields form a vector space; handy in tests/demos) --
    def _like(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, self.rank, coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same(self, other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same(self, other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "SpectralField":
        return self._like(self.coeffs * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self._like(-self.coeffs)

    @property
    def half(self) -> np.ndarray:
        return _half_view(self.coeffs, self.grid.n)

    def component(self, i: int) -> "SpectralField":
        if self.rank != VECTOR3:
            raise FieldError("component() needs a vector3 field")
        return SpectralField(self.grid, SCALAR, self.coeffs[i].copy())

    def mean(self) -> np.ndarray:
        """Mean value over the box (the xi = 0 coefficient)."""
        if self.rank == SCALAR:
            return np.real(self.coeffs[0, 0, 0])
        return np.real(self.coeffs[:, 0, 0, 0])

    def is_band_limited(self, tol: float = 1e-13) -> bool:
        outside = np.abs(self.coeffs[..., ~self.grid.dealias_mask])
        if outside.size == 0:
            return True
        scale = max(np.abs(self.coeffs).max(), 1.0)
        return bool(outside.max() <= tol * scale)


def _check_same(f: SpectralField, g: SpectralField):
    if not f.grid.compatible(g.grid):
        raise FieldError("fields live on incompatible grids")
    if f.rank != g.rank:
        raise FieldError(f"rank mismatch: {f.rank} vs {g.rank}")


def zero_field(grid: Grid3, rank: str = SCALAR) -> SpectralField:
    n = grid.n
    shape = (n, n, n) if rank == SCALAR else (3, n, n, n)
    return SpectralField(grid, rank, np.zeros(shape, dtype=np.complex128))


def transform(samples: np.ndarray, grid: Grid3, dealias: bool = False) -> SpectralField:
    """Forward transform real samples to a SpectralField.

    Rank is inferred from the shape: (n,n,n) -> scalar, (3,n,n,n) -> vector3.
    With dealias=True the grid's retained band is enforced on construction.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = grid.n
    if samples.shape == (n, n, n):
        rank = SCALAR
    elif samples.shape == (3, n, n, n):
        rank = VECTOR3
    else:
        raise FieldError(f"sample shape {samples.shape} does not match n={n}")
    coeffs = full_from_half(_half_from_phys(samples), n)
    if dealias:
        coeffs = coeffs * grid.dealias_mask
    return SpectralField(grid, rank, coeffs)


def inverse_transform(f: SpectralField) -> np.ndarray:
    """Physical samples of the field (real, since coefficients are symmetric)."""
    return _phys_from_half(f.half, f.grid.n)


def grid_points(grid: Grid3) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = np.arange(grid.n) * (grid.box_length / grid.n)
    return np.meshgrid(x, x, x, indexing="ij")


# ----------------------------------------------------------------------
# derivatives
# ----------------------------------------------------------------------

def differentiate(kind: str, f: SpectralField) -> SpectralField:
    """Exact spectral derivative: kind in {'grad', 'div', 'curl'}."""
    g = f.grid
    xi = g.xi
    c = f.coeffs
    if kind == "grad":
        if f.rank != SCALAR:
            raise FieldError("grad needs a scalar field")
        out = np.stack([1j * xi[i] * c for i in range(3)])
        return SpectralField(g, VECTOR3, out)
    if kind == "div":
        if f.rank != VECTOR3:
            raise FieldError("div needs a vector3 field")
        out = 1j * (xi[0] * c[0] + xi[1] * c[1] + xi[2] * c[2])
        return SpectralField(g, SCALAR, out)
    if kind == "curl":
        if f.rank != VECTOR3:
            raise FieldError("curl needs a vector3 field")
        out = np.stack(
            [
                1j * (xi[1] * c[2] - xi[2] * c[1]),
                1j * (xi[2] * c[0] - xi[0] * c[2]),
                1j * (xi[0] * c[1] - xi[1] * c[0]),
            ]
        )
        return SpectralField(g, VECTOR3, out)
    raise FieldError(f"unknown derivative kind {kind!r}")


def grad(f: SpectralField) -> SpectralField:
    return differentiate("grad", f)


def div(f: SpectralField) -> SpectralField:
    return differentiate("div", f)


def curl(f: SpectralField) -> SpectralField:
    return differentiate("curl", f)


# ----------------------------------------------------------------------
# Fourier multipliers
# ----------------------------------------------------------------------

def multiplier_symbol(name: str, grid: Grid3, t: float | None = None,
                      half: bool = False) -> np.ndarray:
    """Pointwise symbol of a named multiplier on the grid lattice."""
    xi_sq = grid.xi_sq_half if half else grid.xi_sq
    if name == "heat":
        if t is None or t < 0:
            raise FieldError("heat multiplier needs t >= 0")
        return np.exp(-t * xi_sq)
    if name == "helmholtz_inverse":
        return 1.0 / (1.0 + xi_sq)
    if name == "laplacian":
        return -xi_sq
    if name == "neg_laplacian_helmholtz":
        return xi_sq / (1.0 + xi_sq)
    raise FieldError(f"unknown multiplier {name!r}")


def apply_multiplier(name: str, f: SpectralField, t: float | None = None) -> SpectralField:
    sym = multiplier_symbol(name, f.grid, t)
    return SpectralField(f.grid, f.rank, f.coeffs * sym)


def heat(t: float, f: SpectralField) -> SpectralField:
    return apply_multiplier("heat", f, t=t)


def helmholtz_inverse(f: SpectralField) -> SpectralField:
    return apply_multiplier("helmholtz_inverse", f)


# ----------------------------------------------------------------------
# Leray projection
# ----------------------------------------------------------------------

def _leray_half(stack: np.ndarray, grid: Grid3) -> np.ndarray:
    """Leray projection of a (..., 3, nx, ny, nzh) half-spectrum stack."""
    xi = grid.xi_half
    xi_sq = grid.xi_sq_half.copy()
    xi_sq[0, 0, 0] = 1.0  # xi = 0: projector acts as identity
    dot = xi[0] * stack[..., 0, :, :, :] + xi[1] * stack[..., 1, :, :, :] + xi[2] * stack[..., 2, :, :, :]
    dot = dot / xi_sq
    out = stack.copy()
    for i in range(3):
        out[..., i, :, :, :] -= xi[i] * dot
    return out


def leray_project(v: SpectralField) -> SpectralField:
    """Orthogonal projection onto divergence-free fields; identity at xi = 0."""
    if v.rank != VECTOR3:
        raise FieldError("Leray projection needs a vector3 field")
    g = v.grid
    xi = g.xi
    xi_sq = g.xi_sq.copy()
    xi_sq[0, 0, 0] = 1.0
    c = v.coeffs
    dot = (xi[0] * c[0] + xi[1] * c[1] + xi[2] * c[2]) / xi_sq
    out = np.stack([c[i] - xi[i] * dot for i in range(3)])
    return SpectralField(g, VECTOR3, out)


# ----------------------------------------------------------------------
# dealiased physical-space products
# ----------------------------------------------------------------------

def _dealias_half(half: np.ndarray, grid: Grid3) -> np.ndarray:
    return half * grid.dealias_mask_half


def _product_half(fh: np.ndarray, gh: np.ndarray, grid: Grid3) -> np.ndarray:
    """Dealiased product of two scalar half-spectra."""
    n = grid.n
    pf = _phys_from_half(fh, n)
    pg = _phys_from_half(gh, n)
    return _dealias_half(_half_from_phys(pf * pg), grid)


def pointwise_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Physical-space product, re-dealiased.

    scalar*scalar -> scalar; scalar*vector3 (either order) -> vector3.
    Vector-vector products go through dot_product / cross_product.
    """
    if not f.grid.compatible(g.grid):
        raise FieldError("fields live on incompatible grids")
    if f.rank == VECTOR3 and g.rank == VECTOR3:
        raise FieldError("use dot_product or cross_product for vector pairs")
    grid = f.grid
    n = grid.n
    if f.rank == SCALAR and g.rank == SCALAR:
        half = _product_half(f.half, g.half, grid)
        return SpectralField(grid, SCALAR, full_from_half(half, n))
    scalar, vec = (f, g) if f.rank == SCALAR else (g, f)
    ps = _phys_from_half(scalar.half, n)
    pv = _phys_from_half(vec.half, n)
    half = _dealias_half(_half_from_phys(ps[None] * pv), grid)
    return SpectralField(grid, VECTOR3, full_from_half(half, n))


def dot_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pointwise u . v, dealiased."""
    _check_same(u, v)
    if u.rank != VECTOR3:
        raise FieldError("dot_product needs vector3 fields")
    grid = u.grid
    pu = _phys_from_half(u.half, grid.n)
    pv = _phys_from_half(v.half, grid.n)
    half = _dealias_half(_half_from_phys(np.einsum("i...,i...->...", pu, pv)), grid)
    return SpectralField(grid, SCALAR, full_from_half(half, grid.n))


def cross_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pointwise u x v, dealiased."""
    _check_same(u, v)
    if u.rank != VECTOR3:
        raise FieldError("cross_product needs vector3 fields")
    grid = u.grid
    pu = _phys_from_half(u.half, grid.n)
    pv = _phys_from_half(v.half, grid.n)
    w = np.cross(pu, pv, axis=0)
    half = _dealias_half(_half_from_phys(w), grid)
    return SpectralField(grid, VECTOR3, full_from_half(half, grid.n))


# ----------------------------------------------------------------------
# norms
# ----------------------------------------------------------------------

def _pointwise_magnitude(samples: np.ndarray, rank: str) -> np.ndarray:
    if rank == SCALAR:
        return np.abs(samples)
    return np.sqrt(np.einsum("i...,i...->...", samples, samples))


def lp_norm(f: SpectralField, p: float) -> float:
    """L^p norm by physical-space quadrature (Euclidean magnitude for vectors)."""
    mag = _pointwise_magnitude(inverse_transform(f), f.rank)
    if np.isinf(p):
        return float(mag.max())
    if p < 1:
        raise FieldError("p must be >= 1")
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def fourier_lattice_norm(f: SpectralField, q: float) -> float:
    """l^q lattice norm of the coefficients with cell weight (2 pi / L)^3.

    This is the discrete stand-in for || f^hat ||_{L^q}; q is the CONJUGATE
    exponent when used for the hat-L^p norm.
    """
    c = f.coeffs
    mag = np.abs(c) if f.rank == SCALAR else np.sqrt(np.einsum("i...,i...->...", np.abs(c), np.abs(c)))
    if np.isinf(q):
        return float(mag.max())
    if q < 1:
        raise FieldError("q must be >= 1")
    return float((np.sum(mag**q) * f.grid.xi_cell_volume) ** (1.0 / q))


def l2_norm(f: SpectralField) -> float:
    """L^2 norm via Parseval (exact for the stored trigonometric polynomial)."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2) * f.grid.box_length**3))


# ----------------------------------------------------------------------
# state triple and trajectory
# ----------------------------------------------------------------------

@dataclass
class StateTriple:
    """The unknown (u, B, J); J is checked against curl B, not constrained."""

    u: SpectralField
    B: SpectralField
    J: SpectralField

    def __post_init__(self):
        for f in (self.u, self.B, self.J):
            if f.rank != VECTOR3:
                raise FieldError("StateTriple components must be vector3 fields")
        _check_same(self.u, self.B)
        _check_same(self.u, self.J)

    @classmethod
    def from_uB(cls, u: SpectralField, B: SpectralField) -> "StateTriple":
        return cls(u, B, curl(B))

    @property
    def grid(self) -> Grid3:
        return self.u.grid

    def fields(self) -> tuple[SpectralField, SpectralField, SpectralField]:
        return (self.u, self.B, self.J)

    def derived_H(self) -> SpectralField:
        """H = (Id - Delta) B."""
        return SpectralField(self.B.grid, VECTOR3, self.B.coeffs * (1.0 + self.B.grid.xi_sq))

    def max_divergence(self) -> float:
        scale = max(l2_norm(self.u), l2_norm(self.B), l2_norm(self.J), 1e-300)
        return max(l2_norm(div(f)) for f in self.fields()) / scale

    def coupling_defect(self) -> float:
        """Relative size of J - curl B (zero when the triple is coupled)."""
        jc = curl(self.B)
        denom = max(l2_norm(self.J), 1e-300)
        return l2_norm(self.J - jc) / denom

    def norm(self) -> float:
        return float(np.sqrt(sum(l2_norm(f) ** 2 for f in self.fields())))

    def __add__(self, other: "StateTriple") -> "StateTriple":
        return StateTriple(self.u + other.u, self.B + other.B, self.J + other.J)

    def __sub__(self, other: "StateTriple") -> "StateTriple":
        return StateTriple(self.u - other.u, self.B - other.B, self.J - other.J)

    def __mul__(self, a: float) -> "StateTriple":
        return StateTriple(self.u * a, self.B * a, self.J * a)

    __rmul__ = __mul__


@dataclass
class Trajectory:
    """States on a uniform time grid 0 = t_0 < ... < t_M = T."""

    times: np.ndarray
    states: list

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise FieldError("times and states must align")
        if len(self.times) >= 2:
            dt = np.diff(self.times)
            if not (dt > 0).all():
                raise FieldError("times must be strictly increasing")
            if not np.allclose(dt, dt[0], rtol=1e-10, atol=1e-14):
                raise FieldError("time grid must be uniform")

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, i: int):
        return self.states[i]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def T(self) -> float:
        return float(self.times[-1])


# ----------------------------------------------------------------------
# band-limited field constructors
# ----------------------------------------------------------------------

def single_mode_field(grid: Grid3, k: tuple[int, int, int], amplitude: float = 1.0,
                      component: int | None = None, phase: str = "sin") -> SpectralField:
    """amplitude * sin or cos of k.x, as a scalar or placed in one vector slot."""
    n = grid.n
    coeffs = np.zeros((n, n, n), dtype=np.complex128)
    idx = tuple(ki % n for ki in k)
    neg = tuple((-ki) % n for ki in k)
    if phase == "sin":
        coeffs[idx] = -0.5j * amplitude
        coeffs[neg] += 0.5j * amplitude
    elif phase == "cos":
        coeffs[idx] = 0.5 * amplitude
        coeffs[neg] += 0.5 * amplitude
    else:
        raise FieldError("phase must be 'sin' or 'cos'")
    if component is None:
        return SpectralField(grid, SCALAR, coeffs)
    vec = np.zeros((3, n, n, n), dtype=np.complex128)
    vec[component] = coeffs
    return SpectralField(grid, VECTOR3, vec)


def random_scalar_field(grid: Grid3, rng: np.random.Generator, kmax: int | None = None,
                        amplitude: float = 1.0, zero_mean: bool = True) -> SpectralField:
    """Random real band-limited scalar field with smooth spectral falloff."""
    n = grid.n
    if kmax is None:
        kmax = max(2, int(grid.dealias_fraction * n / 2) - 1)
    kk = grid.k
    K = np.stack(np.meshgrid(kk, kk, kk, indexing="ij"))
    inband = (np.abs(K[0]) <= kmax) & (np.abs(K[1]) <= kmax) & (np.abs(K[2]) <= kmax)
    inband &= grid.dealias_mask
    mag = np.sqrt(K[0] ** 2 + K[1] ** 2 + K[2] ** 2)
    weight = np.where(inband, np.exp(-0.5 * (mag / max(kmax, 1)) ** 2), 0.0)
    raw = rng.standard_normal((n, n, n)) + 1j * rng.standard_normal((n, n, n))
    coeffs = raw * weight
    if zero_mean:
        coeffs[0, 0, 0] = 0.0
    # symmetrize so the field is real
    coeffs = 0.5 * (coeffs + np.conj(_rev(_rev(_rev(coeffs, 0), 1), 2)))
    f = SpectralField(grid, SCALAR, coeffs)
    scale = lp_norm(f, np.inf)
    if scale > 0:
        f = f * (amplitude / scale)
    return f


def random_vector_field(grid: Grid3, rng: np.random.Generator, kmax: int | None = None,
                        amplitude: float = 1.0) -> SpectralField:
    comps = [random_scalar_field(grid, rng, kmax, 1.0).coeffs for _ in range(3)]
    f = SpectralField(grid, VECTOR3, np.stack(comps))
    scale = lp_norm(f, np.inf)
    if scale > 0:
        f = f * (amplitude / scale)
    return f


def random_divfree_field(grid: Grid3, rng: np.random.Generator, kmax: int | None = None,
                         amplitude: float = 1.0) -> SpectralField:
    """Random divergence-free band-limited vector field of given sup amplitude."""
    f = leray_project(random_vector_field(grid, rng, kmax, 1.0))
    scale = lp_norm(f, np.inf)
    if scale > 0:
        f = f * (amplitude / scale)
    return f


def shell_field(grid: Grid3, radius: float, rng: np.random.Generator,
                width: float = 0.25, rank: str = SCALAR,
                amplitude: float = 1.0) -> SpectralField:
    """Random field supported on the lattice shell |xi| in radius*(1 +/- width)."""
    lo, hi = radius * (1.0 - width), radius * (1.0 + width)
    mask = (grid.xi_mag >= lo) & (grid.xi_mag <= hi) & grid.dealias_mask
    if not mask.any():
        raise FieldError(f"no lattice modes in shell |xi| ~ {radius}")

    def one() -> np.ndarray:
        raw = rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape)
        c = np.where(mask, raw, 0.0)
        return 0.5 * (c + np.conj(_rev(_rev(_rev(c, 0), 1), 2)))

    if rank == SCALAR:
        f = SpectralField(grid, SCALAR, one())
    else:
        f = SpectralField(grid, VECTOR3, np.stack([one() for _ in range(3)]))
    scale = lp_norm(f, 2)
    if scale > 0:
        f = f * (amplitude / scale)
    return f


# ----------------------------------------------------------------------
# snapshot file format
# ----------------------------------------------------------------------
# magic "HMHD1" | u32 rank (1|3) | u32 n | f64 box_length | coefficients,
# per component, row-major k-order, little-endian f64 (re, im) pairs.

def save_field(path, f: SpectralField) -> None:
    rank_code = 1 if f.rank == SCALAR else 3
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IId", rank_code, f.grid.n, f.grid.box_length))
        flat = np.ascontiguousarray(f.coeffs, dtype=np.complex128)
        pairs = np.empty(flat.size * 2, dtype="<f8")
        pairs[0::2] = flat.real.ravel()
        pairs[1::2] = flat.imag.ravel()
        fh.write(pairs.tobytes())


def load_field(path, dealias_fraction: float = 2.0 / 3.0) -> SpectralField:
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != _MAGIC:
            raise FieldError(f"bad magic {magic!r}: not an HMHD1 snapshot")
        rank_code, n, box_length = struct.unpack("<IId", fh.read(16))
        if rank_code not in (1, 3):
            raise FieldError(f"bad rank code {rank_code}")
        count = rank_code * n**3 * 2
        pairs = np.frombuffer(fh.read(count * 8), dtype="<f8")
        if pairs.size != count:
            raise FieldError("truncated snapshot")
    coeffs = (pairs[0::2] + 1j * pairs[1::2]).astype(np.complex128)
    shape = (n, n, n) if rank_code == 1 else (3, n, n, n)
    grid = Grid3(n=int(n), box_length=float(box_length), dealias_fraction=dealias_fraction)
    rank = SCALAR if rank_code == 1 else VECTOR3
    return SpectralField(grid, rank, coeffs.reshape(shape))

"""4-f imaging geometry and the object-to-image transform in normalized coordinates.

Object and image coordinates are both scaled by Y/2, so the object occupies
s' in [-1, 1] and the coherent transfer kernel is sin(c (s' - s)) / (pi (s' - s)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.interpolate import CubicSpline

from .errors import (
    EigenvalueUnderflow,
    GridTooCoarse,
    GridTooNarrow,
    NonPositiveParameter,
    OrderOutOfRange,
)
from .io import write_csv
from .pswf import SlepianBasis, eval_inside, evaluate

#: Quadrature order for integrals over the object interval.
GL_ORDER = 256
#: Default image-plane window and sample count.
IMAGE_HALF_WIDTH = 4.0
IMAGE_POINTS = 2048
#: Smallest eigenvalue that the reconstruction will divide by.
INVERSION_FLOOR = float(np.finfo(float).eps)
# minimum samples per kernel oscillation length pi / c on the object grid
_SAMPLES_PER_OSCILLATION = 8

_GL_NODES, _GL_WEIGHTS = npleg.leggauss(GL_ORDER)


def gauss_legendre(order: int = GL_ORDER):
    if order == GL_ORDER:
        return _GL_NODES, _GL_WEIGHTS
    return npleg.leggauss(order)


def clenshaw_curtis(points: int):
    """Clenshaw-Curtis nodes (ascending, endpoints included) and weights on [-1, 1]."""
    n = int(points) - 1
    if n < 2:
        raise ValueError("need at least 3 points")
    theta = math.pi * np.arange(n + 1) / n
    x = np.cos(theta)
    w = np.zeros(n + 1)
    inner = theta[1:-1]
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(n * inner) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / n
    x[0], x[-1] = 1.0, -1.0
    return x[::-1].copy(), w[::-1].copy()


@dataclass(frozen=True)
class ImagingSystem:
    """Focal length f, wavelength, pupil width d and object size Y, all in meters."""

    focal_length: float
    wavelength: float
    pupil: float
    object_size: float

    @property
    def c(self) -> float:
        return math.pi * self.pupil * self.object_size / (2.0 * self.wavelength * self.focal_length)

    @property
    def shannon(self) -> float:
        return self.pupil * self.object_size / (self.wavelength * self.focal_length)

    @property
    def rayleigh(self) -> float:
        return self.wavelength * self.focal_length / self.pupil


def derive_dimensionless(f: float, wavelength: float, d: float, Y: float) -> ImagingSystem:
    named = (("f (focal length)", f), ("wavelength", wavelength), ("d (pupil diameter)", d), ("Y (object size)", Y))
    for name, val in named:
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise NonPositiveParameter(f"{name} must be positive, got {val!r}")
    return ImagingSystem(float(f), float(wavelength), float(d), float(Y))


def bandwidth(source) -> float:
    """Accept an ImagingSystem, a SlepianBasis or a bare number and return c."""
    if isinstance(source, (ImagingSystem, SlepianBasis)):
        return float(source.c)
    return float(source)


@dataclass(frozen=True)
class FieldSamples:
    grid: np.ndarray
    values: np.ndarray
    domain_tag: str = "object-plane"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.domain_tag not in ("object-plane", "image-plane"):
            raise ValueError(f"unknown domain tag {self.domain_tag!r}")
        if self.domain_tag == "object-plane" and (grid[0] > -1.0 + 1e-12 or grid[-1] < 1.0 - 1e-12):
            raise ValueError("object-plane samples must span [-1, 1]")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def interpolant(self):
        """Cubic spline through the samples restricted to [-1, 1]."""
        m = (self.grid >= -1.0 - 1e-12) & (self.grid <= 1.0 + 1e-12)
        return CubicSpline(self.grid[m], self.values[m])

    def to_csv(self, path) -> Path:
        vals = self.values.astype(complex)
        rows = zip(self.grid.tolist(), vals.real.tolist(), vals.imag.tolist())
        return write_csv(path, ("s", "value_real", "value_imag"), rows)


def sinc_kernel(c: float, x, s) -> np.ndarray:
    """sin(c (x - s)) / (pi (x - s)) with the diagonal limit c / pi."""
    d = np.subtract.outer(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    return (c / math.pi) * np.sinc(c * d / math.pi)


def default_image_grid(basis: SlepianBasis | None = None) -> np.ndarray:
    """Image-plane sample points.

    Without a basis this is [-4, 4] with 2048 points.  The PSWF tails decay
    only like 1/|s| and order j spreads over roughly |s| < pi (j + 1) / c, so
    when a basis is given the window grows to 2 pi (j_max + 1) / c and the
    spacing shrinks to resolve both the sinc oscillation and the in-pupil
    structure of the highest order.
    """
    if basis is None:
        return np.linspace(-IMAGE_HALF_WIDTH, IMAGE_HALF_WIDTH, IMAGE_POINTS)
    half = max(IMAGE_HALF_WIDTH, 2 * math.pi * (basis.j_max + 1) / basis.c)
    step = min(math.pi / (8 * basis.c), 1.0 / (4 * (basis.j_max + 1)))
    points = max(IMAGE_POINTS, int(math.ceil(2 * half / step)) + 1)
    return np.linspace(-half, half, points)


def _check_sampling(c: float, grid: np.ndarray) -> None:
    inside = grid[(grid >= -1.0) & (grid <= 1.0)]
    spacing = np.max(np.diff(inside)) if inside.size > 1 else np.inf
    limit = math.pi / (c * _SAMPLES_PER_OSCILLATION)
    if inside.size < 4 or spacing > limit:
        raise GridTooCoarse(
            f"object grid spacing {spacing:.3g} exceeds {limit:.3g} "
            f"({_SAMPLES_PER_OSCILLATION} samples per oscillation length pi/c)"
        )


def object_values_at_nodes(obj, c: float | None = None, order: int = GL_ORDER):
    """Object field at Gauss-Legendre nodes on [-1, 1].

    ``obj`` may be FieldSamples (interpolated with a cubic spline) or a callable.
    """
    x, w = gauss_legendre(order)
    if callable(obj) and not isinstance(obj, FieldSamples):
        return x, w, np.asarray(obj(x))
    if c is not None:
        _check_sampling(c, obj.grid)
    return x, w, obj.interpolant()(x)


def object_to_image(system, obj, image_grid=None) -> FieldSamples:
    """Apply the sinc transfer kernel to an object supported on [-1, 1]."""
    c = bandwidth(system)
    x, w, a = object_values_at_nodes(obj, c)
    s = default_image_grid() if image_grid is None else np.asarray(image_grid, dtype=float)
    img = (w * a) @ sinc_kernel(c, x, s)
    return FieldSamples(s, img, "image-plane")


def object_coefficients(basis: SlepianBasis, obj, orders=None) -> np.ndarray:
    """int_{-1}^{1} a(s') psi_j(s') ds' for each order (image coefficients of the object)."""
    orders = range(basis.n_orders) if orders is None else orders
    x, w, a = object_values_at_nodes(obj, basis.c)
    return np.array([np.sum(w * a * eval_inside(basis, j, x)) for j in orders])


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    h = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


# below this windowed-norm fraction the projection is considered unreliable
_MIN_WINDOW_NORM = 0.5


def decompose_image(basis: SlepianBasis, image: FieldSamples, check_norm: bool = True) -> np.ndarray:
    """Whole-line PSWF coefficients e_j of an image sampled on a finite window.

    The PSWF tails decay only like 1/|s|, so any finite window misses part of
    each norm.  The coefficients are therefore obtained by least squares against
    the windowed Gram matrix, which makes the decomposition exact for images in
    the span of the basis; the diagonal of that matrix is the numerically
    computed norm and is checked against one.
    """
    s = image.grid
    w = _trapezoid_weights(s)
    psi = basis.values(s)
    gram = (psi * w) @ psi.T
    norms = np.diag(gram)
    if check_norm and np.any(norms < _MIN_WINDOW_NORM):
        worst = int(np.argmin(norms))
        raise GridTooNarrow(
            f"window [{s[0]:g}, {s[-1]:g}] captures only {norms[worst]:.3f} of psi_{worst}'s norm"
        )
    rhs = (psi * w) @ image.values
    return np.linalg.solve(gram, rhs)


def compose_image(basis: SlepianBasis, coefficients, image_grid=None) -> FieldSamples:
    s = default_image_grid(basis) if image_grid is None else np.asarray(image_grid, dtype=float)
    e = np.asarray(coefficients)
    vals = e @ basis.values(s, range(len(e)))
    return FieldSamples(s, vals, "image-plane")


def check_inversion_order(basis: SlepianBasis, Q: int) -> int:
    Q = int(Q)
    if Q < 0 or Q > basis.j_max:
        raise OrderOutOfRange(f"Q={Q} outside 0..{basis.j_max}")
    if basis.eigenvalues[Q] < INVERSION_FLOOR:
        raise EigenvalueUnderflow(
            f"lambda_{Q}(c={basis.c:g}) = {basis.eigenvalues[Q]:.3g} is below the inversion floor "
            f"{INVERSION_FLOOR:.3g}; the reconstruction would be dominated by rounding noise"
        )
    return Q


def reconstruct_object_estimate(basis: SlepianBasis, coefficients, Q: int, grid=None) -> FieldSamples:
    """a~(s') = sum_{j<=Q} (e_j / lambda_j) psi_j(s') on [-1, 1]."""
    Q = check_inversion_order(basis, Q)
    e = np.asarray(coefficients)
    if e.shape[0] <= Q:
        raise OrderOutOfRange(f"need {Q + 1} coefficients, got {e.shape[0]}")
    grid = np.linspace(-1.0, 1.0, 401) if grid is None else np.asarray(grid, dtype=float)
    vals = np.zeros(grid.shape, dtype=np.result_type(e, float))
    for j in range(Q + 1):
        vals = vals + (e[j] / basis.eigenvalues[j]) * eval_inside(basis, j, grid)
    return FieldSamples(grid, vals, "object-plane")


def slepian_projection(basis: SlepianBasis, obj, Q: int, grid=None) -> FieldSamples:
    """Rank-(Q+1) projection of an object onto phi_0..phi_Q on [-1, 1]."""
    return reconstruct_object_estimate(basis, object_coefficients(basis, obj, range(Q + 1)), Q, grid)


def phi_function(basis: SlepianBasis, j: int):
    """In-pupil function phi_j = psi_j / sqrt(lambda_j) as a callable on [-1, 1]."""
    scale = 1.0 / math.sqrt(basis.eigenvalues[j])
    return lambda s: scale * eval_inside(basis, j, s)


def psi_function(basis: SlepianBasis, j: int):
    return lambda s: evaluate(basis, j, s)

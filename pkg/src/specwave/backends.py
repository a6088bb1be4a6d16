"""Discretized self-adjoint operator backends.

A backend owns the spectrum of a non-negative self-adjoint operator ``A``
on a finite set of sample points, together with a transform that is
unitary with respect to the weighted inner product ``<f, g> = sum w_j f_j g_j``.
Everything else in specwave (kernels applied as spectral multipliers, norms,
the time integrators) is written against this interface.

Three families are provided:

- ``dirichlet-1d``: the Dirichlet Laplacian on ``[0, L]``, diagonalized by
  the type-I discrete sine transform.
- ``fractional-of-base``: the spectral power ``A**(nu/2)`` of another backend.
- ``dense-matrix``: an arbitrary symmetric positive semi-definite matrix,
  diagonalized by a dense eigendecomposition. The Sierpinski prefractal
  generator produces one of these.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Protocol

import networkx as nx
import numpy as np
import scipy.fft
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import ConstructionError, DataError, ParameterError, ShapeError
from .fitting import MIN_FIT_POINTS, DecayFit, fit_power_law

logger = logging.getLogger("specwave")

# -----------------------------------------------------------------------------
# Constants
# -----------------------------------------------------------------------------

BACKEND_KINDS = ("dirichlet-1d", "fractional-of-base", "dense-matrix", "sierpinski")

# Decay index of the Dirichlet Laplacian in one dimension (d/4)
DIRICHLET_ALPHA = 0.25

# Decay index of the planar Sierpinski gasket: log2(3) / (2 log2(5))
SIERPINSKI_ALPHA = math.log(3.0) / (2.0 * math.log(5.0))

# Prefractal levels above this make the dense eigendecomposition impractical
MAX_SIERPINSKI_LEVEL = 7

# Tolerances for accepting a dense operator matrix
SYMMETRY_TOLERANCE = 1e-10
NEGATIVITY_TOLERANCE = 1e-10

# Decay fits on interval backends must end before this fraction of L**2
RESOLVABLE_FRACTION = 0.05

DEFAULT_ALPHA_TIMES = 24

DEFAULT_LENGTH = 200.0 * math.pi
DEFAULT_MODES = 4096


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


# -----------------------------------------------------------------------------
# Transforms
# -----------------------------------------------------------------------------


class SpectralTransform(Protocol):
    """Unitary map between weighted samples and spectral coefficients.

    All methods act on the last axis, so a stack of functions can be
    transformed in one call.
    """

    def forward(self, samples: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def inverse(self, coeffs: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def mode_density(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        """Return ``sum_k g_k phi_k(x_j)**2`` at every sample point."""
        ...

    def eigenfunction(self, index: int) -> NDArray[np.float64]: ...


@dataclass(frozen=True, eq=False)
class SineTransform:
    """Type-I sine transform for the Dirichlet Laplacian on ``[0, length]``."""

    length: float
    modes: int

    @property
    def cell(self) -> float:
        return self.length / (self.modes + 1)

    def forward(self, samples: NDArray[np.float64]) -> NDArray[np.float64]:
        return math.sqrt(self.cell) * scipy.fft.dst(samples, type=1, norm="ortho", axis=-1)

    def inverse(self, coeffs: NDArray[np.float64]) -> NDArray[np.float64]:
        return scipy.fft.dst(coeffs, type=1, norm="ortho", axis=-1) / math.sqrt(self.cell)

    def mode_density(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        # phi_k(x_j)**2 = (1 - cos(2 pi k j / (N + 1))) / L
        padded = np.zeros(self.modes + 1)
        padded[1:] = g
        cosine_sum = scipy.fft.fft(padded).real[1:]
        return (float(np.sum(g)) - cosine_sum) / self.length

    def eigenfunction(self, index: int) -> NDArray[np.float64]:
        k = index + 1
        j = np.arange(1, self.modes + 1)
        return math.sqrt(2.0 / self.length) * np.sin(math.pi * k * j / (self.modes + 1))


@dataclass(frozen=True, eq=False)
class EigenTransform:
    """Projection onto orthonormal eigenvectors of a symmetrized matrix.

    ``vectors`` are orthonormal in the plain Euclidean sense; samples are
    mapped to Euclidean coordinates by ``sqrt(weights) * f`` first.
    """

    vectors: NDArray[np.float64]
    weights: NDArray[np.float64]
    _sqrt_weights: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_sqrt_weights", _frozen(np.sqrt(self.weights)))

    def forward(self, samples: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray((self._sqrt_weights * samples) @ self.vectors)

    def inverse(self, coeffs: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray((coeffs @ self.vectors.T) / self._sqrt_weights)

    def mode_density(self, g: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray((self.vectors**2) @ g / self.weights)

    def eigenfunction(self, index: int) -> NDArray[np.float64]:
        return np.asarray(self.vectors[:, index] / self._sqrt_weights)


# -----------------------------------------------------------------------------
# Backend descriptor
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class BackendSpec:
    """Serializable description of a backend, as read from a config file."""

    kind: str = "dirichlet-1d"
    L: float = DEFAULT_LENGTH
    N: int = DEFAULT_MODES
    nu: float | None = None
    matrix_path: str | None = None
    weights_path: str | None = None
    alpha: float | None = None
    level: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "L": self.L,
            "N": self.N,
            "nu": self.nu,
            "matrix_path": self.matrix_path,
            "weights_path": self.weights_path,
            "alpha": self.alpha,
            "level": self.level,
        }


# -----------------------------------------------------------------------------
# Backend and state types
# -----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectrumBackend:
    """A discretized non-negative self-adjoint operator.

    Instances are immutable and can be shared between threads. Equality is
    identity: two backends built from the same data are still distinct.
    """

    kind: str
    eigenvalues: NDArray[np.float64]
    weights: NDArray[np.float64]
    transform: SpectralTransform
    alpha: float | None = None
    domain_length: float | None = None
    fractional_power: float | None = None
    spec: BackendSpec | None = None
    points: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.points is not None:
            object.__setattr__(self, "points", _frozen(self.points))
        if self.eigenvalues.ndim != 1 or self.weights.shape != self.eigenvalues.shape:
            raise ConstructionError("eigenvalues and weights must be 1-D arrays of equal length")
        if np.any(self.eigenvalues < 0):
            raise ConstructionError("eigenvalues must be non-negative")
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ConstructionError("eigenvalues must be sorted ascending")
        if np.any(self.weights <= 0):
            raise ConstructionError("quadrature weights must be positive")

    @property
    def mode_count(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def is_interval(self) -> bool:
        return self.domain_length is not None

    @property
    def grid(self) -> NDArray[np.float64]:
        """Sample coordinates: interval positions, or vertex indices for matrices."""
        if self.domain_length is not None:
            return np.arange(1, self.mode_count + 1) * (self.domain_length / (self.mode_count + 1))
        return np.arange(self.mode_count, dtype=float)

    def resolvable_time(self) -> float:
        """Latest time at which decay fits still see free-space behavior."""
        if self.domain_length is None:
            return math.inf
        return RESOLVABLE_FRACTION * self.domain_length**2

    def refined(self, modes: int) -> "SpectrumBackend":
        """Rebuild this interval backend with a different mode count."""
        if not self.is_interval or self.spec is None:
            raise ParameterError(f"backend kind '{self.kind}' cannot be refined")
        return build_backend(replace(self.spec, N=modes))

    def function(self, samples: ArrayLike) -> "GridFunction":
        return GridFunction(np.asarray(samples, dtype=float), self)

    def zeros(self) -> "GridFunction":
        return GridFunction(np.zeros(self.mode_count), self)

    def sample(self, func: Callable[[NDArray[np.float64]], ArrayLike]) -> "GridFunction":
        """Evaluate ``func`` on the sample grid."""
        return GridFunction(np.asarray(func(self.grid), dtype=float), self)

    def eigenfunction(self, index: int) -> "GridFunction":
        """Return the L2-normalized eigenfunction of the ``index``-th (0-based) mode."""
        if not 0 <= index < self.mode_count:
            raise ParameterError(f"mode index must be in [0, {self.mode_count}), got {index}")
        return GridFunction(self.transform.eigenfunction(index), self)

    def describe(self) -> dict[str, Any]:
        """Summary suitable for embedding in a report."""
        return {
            "kind": self.kind,
            "mode_count": self.mode_count,
            "alpha": self.alpha,
            "domain_length": self.domain_length,
            "fractional_power": self.fractional_power,
            "lambda_min": float(self.eigenvalues[0]),
            "lambda_max": float(self.eigenvalues[-1]),
            "spec": self.spec.to_dict() if self.spec is not None else None,
        }


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A real function sampled on a backend's grid."""

    samples: NDArray[np.float64]
    backend: SpectrumBackend

    def __post_init__(self) -> None:
        samples = _frozen(self.samples)
        if samples.shape != (self.backend.mode_count,):
            raise ShapeError(
                f"grid function has shape {samples.shape}, backend expects "
                f"({self.backend.mode_count},)"
            )
        if not np.all(np.isfinite(samples)):
            raise DataError("grid function has non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        check_same_backend(self.backend, other.backend)
        return GridFunction(self.samples + other.samples, self.backend)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        check_same_backend(self.backend, other.backend)
        return GridFunction(self.samples - other.samples, self.backend)

    def scaled(self, factor: float) -> "GridFunction":
        return GridFunction(factor * self.samples, self.backend)


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Spectral coefficients of a function, indexed by mode."""

    coeffs: NDArray[np.float64]
    backend: SpectrumBackend

    def __post_init__(self) -> None:
        coeffs = _frozen(self.coeffs)
        if coeffs.shape != (self.backend.mode_count,):
            raise ShapeError(
                f"coefficients have shape {coeffs.shape}, backend expects "
                f"({self.backend.mode_count},)"
            )
        if not np.all(np.isfinite(coeffs)):
            raise DataError("spectral coefficients are not finite")
        object.__setattr__(self, "coeffs", coeffs)


def check_same_backend(a: SpectrumBackend, b: SpectrumBackend) -> None:
    if a is not b:
        if a.mode_count != b.mode_count:
            raise ShapeError(f"backends differ in mode count: {a.mode_count} vs {b.mode_count}")
        raise ShapeError("functions live on different backends")


# -----------------------------------------------------------------------------
# Builders
# -----------------------------------------------------------------------------


def build_dirichlet_1d(length: float, modes: int) -> SpectrumBackend:
    """Build the Dirichlet Laplacian on ``[0, length]`` with ``modes`` sine modes.

    Eigenvalues are ``(k pi / L)**2`` for ``k = 1..N``, sample points
    ``x_j = j L / (N + 1)``, and every sample carries the cell weight
    ``L / (N + 1)``.

    Raises:
        ConstructionError: If ``length <= 0`` or ``modes < 2``.
    """
    if isinstance(modes, bool) or not isinstance(modes, (int, np.integer)) or modes < 2:
        raise ConstructionError(f"Dirichlet backend needs an integer mode count >= 2, got {modes!r}")
    if not math.isfinite(length) or length <= 0:
        raise ConstructionError(f"Dirichlet backend needs a positive length, got {length!r}")

    modes = int(modes)
    k = np.arange(1, modes + 1)
    return SpectrumBackend(
        kind="dirichlet-1d",
        eigenvalues=(k * math.pi / length) ** 2,
        weights=np.full(modes, length / (modes + 1)),
        transform=SineTransform(float(length), modes),
        alpha=DIRICHLET_ALPHA,
        domain_length=float(length),
        spec=BackendSpec(kind="dirichlet-1d", L=float(length), N=modes),
    )


def build_fractional(base: SpectrumBackend, nu: float) -> SpectrumBackend:
    """Spectral power ``A**(nu/2)`` of ``base``, sharing its transform.

    The decay index scales as ``alpha * 2 / nu``, which for a Gaussian
    base (``alpha = d/4``) is ``d / (2 nu)``.
    """
    if not math.isfinite(nu) or nu <= 0:
        raise ConstructionError(f"fractional power nu must be positive, got {nu!r}")

    base_power = base.fractional_power if base.fractional_power is not None else 2.0
    spec = None
    if base.spec is not None and base.kind in ("dirichlet-1d", "dense-matrix"):
        spec = replace(base.spec, kind="fractional-of-base", nu=float(nu))

    return SpectrumBackend(
        kind="fractional-of-base",
        eigenvalues=base.eigenvalues ** (nu / 2.0),
        weights=base.weights,
        transform=base.transform,
        alpha=base.alpha * 2.0 / nu if base.alpha is not None else None,
        domain_length=base.domain_length,
        fractional_power=base_power * nu / 2.0 if base.is_interval else float(nu),
        spec=spec,
        points=base.points,
    )


def build_matrix_backend(
    matrix: ArrayLike,
    weights: ArrayLike | None = None,
    alpha_hint: float | None = None,
    points: ArrayLike | None = None,
) -> SpectrumBackend:
    """Diagonalize a symmetric positive semi-definite matrix.

    The matrix acts on Euclidean coordinates ``sqrt(w) * f``; with unit
    weights those are the samples themselves. Eigenvalues within
    ``NEGATIVITY_TOLERANCE`` below zero are clamped to zero.

    Raises:
        ConstructionError: If the matrix is not square, not symmetric, or
            has an eigenvalue below ``-NEGATIVITY_TOLERANCE``.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ConstructionError(f"operator matrix must be square and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConstructionError("operator matrix has non-finite entries")

    n = m.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ConstructionError(f"weights have shape {w.shape}, matrix expects ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ConstructionError("weights must be positive and finite")
    if alpha_hint is not None and not alpha_hint > 0:
        raise ConstructionError(f"alpha_hint must be positive, got {alpha_hint!r}")

    asymmetry = float(np.max(np.abs(m - m.T)))
    if asymmetry > SYMMETRY_TOLERANCE:
        raise ConstructionError(f"matrix is not symmetric: max |M - M^T| = {asymmetry:.3e}")

    eigenvalues, vectors = scipy.linalg.eigh((m + m.T) / 2.0)
    smallest = float(eigenvalues[0])
    if smallest < -NEGATIVITY_TOLERANCE:
        raise ConstructionError(f"matrix is indefinite: smallest eigenvalue {smallest:.3e}")
    negative = eigenvalues < 0
    if np.any(negative):
        logger.debug(
            "Clamped %d negative eigenvalues to 0 (largest magnitude %.3e)",
            int(negative.sum()),
            -smallest,
        )
        eigenvalues = np.where(negative, 0.0, eigenvalues)

    # Fix the sign of each eigenvector so the decomposition is reproducible
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(n)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs

    return SpectrumBackend(
        kind="dense-matrix",
        eigenvalues=eigenvalues,
        weights=w,
        transform=EigenTransform(_frozen(vectors), _frozen(w)),
        alpha=alpha_hint,
        points=points,
    )


def _midpoint(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    return ((a[0] + b[0]) // 2, (a[1] + b[1]) // 2)


def _subdivide(
    graph: nx.Graph,
    a: tuple[int, int],
    b: tuple[int, int],
    c: tuple[int, int],
    depth: int,
) -> None:
    if depth == 0:
        graph.add_edges_from([(a, b), (b, c), (c, a)])
        return
    ab, bc, ca = _midpoint(a, b), _midpoint(b, c), _midpoint(c, a)
    _subdivide(graph, a, ab, ca, depth - 1)
    _subdivide(graph, ab, b, bc, depth - 1)
    _subdivide(graph, ca, bc, c, depth - 1)


def sierpinski_graph(level: int) -> nx.Graph:
    """Level-``level`` prefractal graph of the planar Sierpinski gasket.

    Vertices are integer lattice coordinates ``(i, j)`` standing for the
    point ``(i + j/2, j sqrt(3)/2) / 2**level``.
    """
    side = 2**level
    graph = nx.Graph()
    _subdivide(graph, (0, 0), (side, 0), (0, side), level)
    return graph


def build_sierpinski(level: int) -> SpectrumBackend:
    """Renormalized graph Laplacian of the level-``level`` Sierpinski prefractal.

    Each vertex carries the measure ``deg / (2 * 3**(level+1))`` so the total
    mass is 1, and the operator is ``(5/3)**level * W**-1 L_graph``. Its decay
    index is the analytic ``log2(3) / (2 log2(5))``; decay fits on it are
    exploratory.
    """
    if isinstance(level, bool) or not isinstance(level, (int, np.integer)):
        raise ConstructionError(f"Sierpinski level must be an integer, got {level!r}")
    if not 0 <= level <= MAX_SIERPINSKI_LEVEL:
        raise ConstructionError(
            f"Sierpinski level must be in [0, {MAX_SIERPINSKI_LEVEL}], got {level}"
        )

    graph = sierpinski_graph(int(level))
    nodes = sorted(graph.nodes)
    laplacian = nx.laplacian_matrix(graph, nodelist=nodes).toarray().astype(float)
    degrees = np.array([graph.degree(v) for v in nodes], dtype=float)
    weights = degrees / (2.0 * 3 ** (level + 1))
    inv_sqrt = 1.0 / np.sqrt(weights)
    matrix = (5.0 / 3.0) ** level * inv_sqrt[:, None] * laplacian * inv_sqrt[None, :]

    side = float(2**level)
    lattice = np.array(nodes, dtype=float)
    points = np.column_stack(
        [(lattice[:, 0] + lattice[:, 1] / 2.0) / side, lattice[:, 1] * math.sqrt(3.0) / 2.0 / side]
    )
    logger.debug("Sierpinski level %d: %d vertices, %d edges", level, len(nodes), graph.number_of_edges())

    backend = build_matrix_backend(matrix, weights, alpha_hint=SIERPINSKI_ALPHA, points=points)
    return replace(backend, spec=BackendSpec(kind="sierpinski", level=int(level)))


# -----------------------------------------------------------------------------
# File readers
# -----------------------------------------------------------------------------


def _read_doubles(path: str, what: str) -> NDArray[np.float64]:
    p = Path(path)
    if not p.is_file():
        raise ConstructionError(f"{what} file not found: {path}")
    try:
        if p.suffix.lower() in (".csv", ".txt"):
            return np.loadtxt(p, delimiter=",", ndmin=2, dtype=float)
        return np.fromfile(p, dtype="<f8")
    except (OSError, ValueError) as e:
        raise ConstructionError(f"cannot read {what} file {path}: {e}") from e


def read_matrix_file(path: str) -> NDArray[np.float64]:
    """Read a square matrix from CSV or from raw little-endian row-major doubles."""
    data = _read_doubles(path, "matrix")
    if data.ndim == 1:
        n = math.isqrt(data.size)
        if n == 0 or n * n != data.size:
            raise ConstructionError(
                f"binary matrix file {path} holds {data.size} doubles, not a square count"
            )
        data = data.reshape(n, n)
    return data


def read_weights_file(path: str) -> NDArray[np.float64]:
    """Read a weight vector from CSV (any layout) or raw little-endian doubles."""
    return _read_doubles(path, "weights").ravel()


def build_backend(spec: BackendSpec) -> SpectrumBackend:
    """Build the backend a descriptor names.

    ``fractional-of-base`` takes a dense-matrix base when ``matrix_path`` is
    set and a Dirichlet base otherwise.
    """
    if spec.kind == "dirichlet-1d":
        return build_dirichlet_1d(spec.L, spec.N)

    if spec.kind == "sierpinski":
        return build_sierpinski(spec.level if spec.level is not None else 5)

    if spec.kind == "dense-matrix":
        return _build_matrix_from_files(spec)

    if spec.kind == "fractional-of-base":
        if spec.nu is None:
            raise ConstructionError("fractional-of-base backend needs nu")
        if spec.matrix_path is not None:
            base = _build_matrix_from_files(replace(spec, kind="dense-matrix", nu=None))
        else:
            base = build_dirichlet_1d(spec.L, spec.N)
        backend = build_fractional(base, spec.nu)
        return replace(backend, spec=spec)

    raise ConstructionError(f"unknown backend kind '{spec.kind}', expected one of {BACKEND_KINDS}")


def _build_matrix_from_files(spec: BackendSpec) -> SpectrumBackend:
    if spec.matrix_path is None:
        raise ConstructionError("dense-matrix backend needs matrix_path")
    matrix = read_matrix_file(spec.matrix_path)
    weights = read_weights_file(spec.weights_path) if spec.weights_path else None
    backend = build_matrix_backend(matrix, weights, alpha_hint=spec.alpha)
    return replace(backend, spec=spec)


# -----------------------------------------------------------------------------
# Transforms and norms on grid functions
# -----------------------------------------------------------------------------


def forward(f: GridFunction) -> SpectralCoeffs:
    """Spectral coefficients of ``f``."""
    return SpectralCoeffs(f.backend.transform.forward(f.samples), f.backend)


def inverse(c: SpectralCoeffs) -> GridFunction:
    """Grid samples of the function with coefficients ``c``."""
    return GridFunction(c.backend.transform.inverse(c.coeffs), c.backend)


def _check_exponent(q: float) -> float:
    q = float(q)
    if math.isnan(q) or q < 1:
        raise ParameterError(f"q must be >= 1 or inf, got {q}")
    return q


def weighted_lq(samples: NDArray[np.float64], weights: NDArray[np.float64], q: float) -> Any:
    """``(sum_j w_j |f_j|**q)**(1/q)`` along the last axis; max-abs for ``q = inf``."""
    q = _check_exponent(q)
    magnitude = np.abs(samples)
    if math.isinf(q):
        return np.max(magnitude, axis=-1)
    if q == 1.0:
        return np.sum(weights * magnitude, axis=-1)
    if q == 2.0:
        return np.sqrt(np.sum(weights * magnitude**2, axis=-1))
    return np.sum(weights * magnitude**q, axis=-1) ** (1.0 / q)


def lq_norm(f: GridFunction, q: float) -> float:
    """Discrete ``L^q`` norm of ``f`` with the backend's quadrature weights."""
    return float(weighted_lq(f.samples, f.backend.weights, q))


def sobolev_norm(f: GridFunction, s: float) -> float:
    """Inhomogeneous norm ``||(I + A)**(s/2) f||_2``."""
    c = f.backend.transform.forward(f.samples)
    return float(np.sqrt(np.sum((1.0 + f.backend.eigenvalues) ** s * c**2)))


def homogeneous_norm(f: GridFunction, s: float) -> float:
    """Homogeneous norm ``||A**(s/2) f||_2``; ``s = 1`` gives the energy seminorm."""
    c = f.backend.transform.forward(f.samples)
    return float(np.sqrt(np.sum(f.backend.eigenvalues**s * c**2)))


# -----------------------------------------------------------------------------
# Decay index
# -----------------------------------------------------------------------------


def heat_operator_norm(backend: SpectrumBackend, t: float) -> float:
    """Exact ``||exp(-tA)||_{L2 -> Linf}``: the largest heat-kernel row norm."""
    density = backend.transform.mode_density(np.exp(-2.0 * t * backend.eigenvalues))
    return float(np.sqrt(np.max(density)))


def measure_alpha(
    backend: SpectrumBackend,
    t_window: tuple[float, float] = (1.0, 100.0),
    n_times: int = DEFAULT_ALPHA_TIMES,
) -> DecayFit:
    """Fit the decay index ``alpha`` in ``||exp(-tA)||_{2->inf} ~ t**-alpha``.

    Raises:
        ParameterError: If the window is degenerate, holds fewer than 8
            sample times, or runs past the backend's resolvable time.
    """
    t_lo, t_hi = float(t_window[0]), float(t_window[1])
    if not (0 < t_lo < t_hi) or not math.isfinite(t_hi):
        raise ParameterError(f"t_window must satisfy 0 < t_lo < t_hi, got ({t_lo}, {t_hi})")
    if n_times < MIN_FIT_POINTS:
        raise ParameterError(f"measure_alpha needs at least {MIN_FIT_POINTS} times, got {n_times}")
    limit = backend.resolvable_time()
    if t_hi > limit:
        raise ParameterError(
            f"t_window ends at {t_hi}, past the resolvable time {limit:.6g} of this backend"
        )

    times = np.geomspace(t_lo, t_hi, n_times)
    norms = np.array([heat_operator_norm(backend, t) for t in times])
    fit = fit_power_law(times, norms, (t_lo, t_hi))
    logger.debug(
        "measure_alpha on %s: alpha=%.4f r2=%.4f regime=%s",
        backend.kind,
        fit.exponent,
        fit.r_squared,
        fit.regime,
    )
    return fit

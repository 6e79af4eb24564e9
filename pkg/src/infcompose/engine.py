"""Truncated composition evaluation and adaptive depth selection.

``compose`` folds a kernel's steps innermost-first:

    H_1(x, H_2(x, ... H_n(x, z0)))

That order is fixed; it is what makes the finite-depth functional-equation
identities exact (see :mod:`infcompose.verify`).  ``compose_adaptive``
raises the depth until both the last increment and the estimated tail drop
below tolerance - increments alone can stall spuriously, so both are
required.  Overflow inside a step is an error, never an infinity pushed
through later steps; unbounded orbits belong to the solver's inverse-orbit
method instead.

Everything here is pure.  Grid cells are evaluated independently and
deterministically, so callers may parallelize over cells and must get
results identical to the sequential order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DivergenceError,
    EvalError,
    NoConvergenceError,
    NonFiniteError,
    PoleError,
)
from .expr import eval_jet
from .kernels import (
    CONTRACTING,
    Kernel,
    SchroederKernel,
    singularity_lattice,
    tail_estimate,
)

DEFAULT_TOL = 1e-12
DEFAULT_NMAX = 512

#: Radius of the jittered neighborhood used for query-local tail samples.
_SAMPLE_JITTER = 1e-2

STATUS_OK = "ok"
STATUS_MASKED = "masked"
STATUS_POLE = "pole"
STATUS_NO_CONVERGENCE = "no-convergence"
STATUS_NON_FINITE = "non-finite"


@dataclass(frozen=True)
class Truncation:
    """A composed value plus the depth and tail evidence that justify it."""

    value: complex
    depth: int
    last_increment: float
    tail: float


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sampling of the complex plane for batch evaluation."""

    center: complex
    half_width: float
    half_height: float
    cols: int
    rows: int
    exclusion_radius: float = 0.0

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid needs at least one row and one column")
        if self.half_width <= 0 or self.half_height <= 0:
            raise ValueError("grid half-extents must be positive")
        if self.exclusion_radius < 0:
            raise ValueError("exclusion radius must be non-negative")

    def node(self, row: int, col: int) -> complex:
        re = self.center.real
        im = self.center.imag
        if self.cols > 1:
            re += -self.half_width + 2 * self.half_width * col / (self.cols - 1)
        if self.rows > 1:
            im += self.half_height - 2 * self.half_height * row / (self.rows - 1)
        return complex(re, im)


@dataclass(frozen=True)
class GridCell:
    x: complex
    status: str
    value: complex | None = None
    depth: int | None = None
    last_increment: float | None = None
    tail: float | None = None


def _is_finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def compose(kernel: Kernel, n: int, x: complex, z0: complex = 0j) -> complex:
    """Exact depth-n nesting ``H_1(x, H_2(x, ... H_n(x, z0)))``."""
    if n < 1:
        raise ValueError("depth must be positive")
    z = complex(z0)
    for j in range(n, 0, -1):
        try:
            z = kernel.step(j, x, z)
        except PoleError:
            raise
        except EvalError as exc:
            raise NonFiniteError(j, x) from exc
        if not _is_finite(z):
            raise NonFiniteError(j, x)
    return z


def _local_sample(x: complex, z0: complex) -> list[tuple[complex, complex]]:
    # The query point plus 8 deterministic jittered neighbors.
    pts = [(x, z0)]
    for m in range(8):
        angle = math.tau * m / 8
        off = _SAMPLE_JITTER * complex(math.cos(angle), math.sin(angle))
        twist = _SAMPLE_JITTER * complex(-math.sin(angle), math.cos(angle))
        pts.append((x + off, z0 + twist))
    return pts


def compose_adaptive(
    kernel: Kernel,
    x: complex,
    z0: complex = 0j,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_NMAX,
) -> Truncation:
    """Smallest depth whose last increment and tail both beat ``tol``.

    Both thresholds are scaled by ``max(1, |value|)``: once composition
    values grow past 1, absolute increments bottom out at the rounding
    floor of the value itself, so the stop test has to be relative.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    sample = _local_sample(x, z0)
    prev: complex | None = None
    increment = math.inf
    tail: float | None = None
    for n in range(1, n_max + 1):
        value = compose(kernel, n, x, z0)
        if prev is not None:
            increment = abs(value - prev)
            scale = max(1.0, abs(value))
            if increment < tol * scale:
                try:
                    tail = tail_estimate(kernel, n, sample)
                except DivergenceError as exc:
                    raise NoConvergenceError(n, increment, None) from exc
                if tail < tol * scale:
                    return Truncation(value, n, increment, tail)
        prev = value
    raise NoConvergenceError(n_max, increment, tail)


def derivative_series(
    kernel: SchroederKernel,
    x: complex,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_NMAX,
) -> complex:
    """Derivative of the composition limit at ``x`` (contracting kernels).

    Each step is affine in its nested argument, ``a_j + b_j * z`` with

        a_j = lambda^j p'(lambda^j x) f(P(lambda^j x))
        b_j = lambda^j p(lambda^j x)  f'(P(lambda^j x)),

    so the derivative is the series ``sum_j a_j * prod_{i<j} b_i``, summed
    until a term falls below ``tol``.  Inner values of the limit come from
    :func:`compose_adaptive`.
    """
    if kernel.mode != CONTRACTING:
        raise ValueError("derivative series requires a contracting kernel")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    total = 0j
    prod = 1 + 0j
    lam_j = 1 + 0j
    for j in range(1, n_max + 1):
        lam_j *= kernel.lam
        arg = lam_j * x
        inner = compose_adaptive(kernel, arg, 0j, tol, n_max).value
        p_jet = eval_jet(kernel.p, arg, 1)
        f_jet = eval_jet(kernel.f, inner, 1)
        a = lam_j * p_jet.coeffs[1] * f_jet.coeffs[0]
        b = lam_j * p_jet.coeffs[0] * f_jet.coeffs[1]
        term = a * prod
        total += term
        if abs(term) < tol:
            return total
        prod *= b
        if prod == 0:
            return total
    raise NoConvergenceError(n_max, abs(term), None)


def grid_eval(
    kernel: Kernel,
    grid: GridSpec,
    tol: float = DEFAULT_TOL,
    n_max: int = DEFAULT_NMAX,
) -> list[list[GridCell]]:
    """Evaluate ``compose_adaptive`` on every grid node.

    Nodes within ``exclusion_radius`` of a singularity-lattice point are
    masked without evaluation; per-cell failures become status markers
    rather than exceptions.  Rows run top (largest imaginary part) to
    bottom, columns left to right.
    """
    lattice_points: tuple[complex, ...] = ()
    if isinstance(kernel, SchroederKernel):
        lattice_points = singularity_lattice(kernel, min(n_max, 64)).points

    out: list[list[GridCell]] = []
    for r in range(grid.rows):
        row: list[GridCell] = []
        for c in range(grid.cols):
            x = grid.node(r, c)
            if grid.exclusion_radius > 0 and any(
                abs(x - pt) <= grid.exclusion_radius for pt in lattice_points
            ):
                row.append(GridCell(x, STATUS_MASKED))
                continue
            try:
                t = compose_adaptive(kernel, x, 0j, tol, n_max)
            except PoleError:
                row.append(GridCell(x, STATUS_POLE))
            except NoConvergenceError:
                row.append(GridCell(x, STATUS_NO_CONVERGENCE))
            except NonFiniteError:
                row.append(GridCell(x, STATUS_NON_FINITE))
            else:
                row.append(
                    GridCell(x, STATUS_OK, t.value, t.depth, t.last_increment, t.tail)
                )
        out.append(row)
    return out

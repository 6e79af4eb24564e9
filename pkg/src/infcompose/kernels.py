"""Indexed step families for truncated infinite compositions.

A kernel packages one step family H_j.  Two shapes are supported:

* ``SchroederKernel`` - steps ``p(lambda^j w) * f(z)`` (contracting scale)
  or ``p(lambda^-j w) * f(z)`` (expanding scale), for a multiplier with
  ``0 < |lambda| < 1``.
* ``AbelKernel`` - steps ``u(s - j) * f(z)``.

The composition engine nests these innermost-first.  Convergence of the
nesting is governed by summability of ``sup |H_j - A|`` over compact sets
for some constant ``A``; :func:`tail_estimate` measures that sum
empirically on a finite sample and closes it with a geometric
extrapolation.  The estimates are sampled, not rigorous interval bounds.

Kernels are immutable and all operations here are pure, so they are safe
to share across threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

from . import expr
from .errors import DivergenceError, EvalError, PoleError
from .expr import Binary, Const, FuncExpr, Unary, Var, evaluate

CONTRACTING = "contracting"
EXPANDING = "expanding"

#: Stop summing tail terms once they drop below this fraction of the running sum.
_TAIL_RELATIVE_CUTOFF = 1e-3
#: Declare divergence after this many consecutive non-decreasing tail terms.
_DIVERGENCE_RUN = 64
#: Hard cap on probed tail indices past the truncation depth.
_TAIL_MAX_TERMS = 20000
#: Proximity of a logistic denominator to zero that counts as a pole hit.
_LOGISTIC_POLE_TOL = 1e-12


def _power(base: complex, j: int) -> complex:
    """base**j by repeated multiplication (exact for dyadic multipliers)."""
    out = 1 + 0j
    for _ in range(j):
        out *= base
    return out


@dataclass(frozen=True)
class SchroederKernel:
    """Step family ``p(lambda^(+/-j) w) * f(z)``.

    ``mode`` selects the scale direction: ``"contracting"`` uses
    ``lambda^j w`` (and requires ``p(0) = 0`` so the steps die out),
    ``"expanding"`` uses ``lambda^-j w`` (no condition on ``p(0)``).
    """

    p: FuncExpr
    f: FuncExpr
    lam: complex
    mode: str = CONTRACTING

    def __post_init__(self):
        if self.mode not in (CONTRACTING, EXPANDING):
            raise ValueError(f"unknown mode {self.mode!r}")
        mag = abs(self.lam)
        if not 0.0 < mag < 1.0:
            raise ValueError(f"multiplier must satisfy 0 < |lambda| < 1, got {self.lam}")
        if self.mode == CONTRACTING:
            at_zero = evaluate(self.p, 0.0)
            if abs(at_zero) > 1e-12:
                raise ValueError(
                    f"contracting mode needs p(0) = 0, got p(0) = {at_zero}"
                )

    def scale(self, j: int) -> complex:
        if self.mode == CONTRACTING:
            return _power(self.lam, j)
        return _power(1 / self.lam, j)

    def step(self, j: int, w: complex, z: complex) -> complex:
        return schroeder_step(self, j, w, z)


@dataclass(frozen=True)
class AbelKernel:
    """Step family ``u(s - j) * f(z)``.

    Summability of ``sum_j sup |u(s - j)|`` is never assumed; it is checked
    empirically by :func:`tail_estimate`.  When ``u`` is recognized as the
    logistic family ``1/(exp(-beta*s) + 1)`` the rate is stored in ``beta``
    and step evaluation reports a pole whenever ``beta*(j - s)`` lands on an
    odd multiple of ``pi*i``.
    """

    u: FuncExpr
    f: FuncExpr
    beta: complex | None = field(default=None)

    def __post_init__(self):
        if self.beta is None:
            object.__setattr__(self, "beta", _detect_logistic_rate(self.u))

    def step(self, j: int, s: complex, z: complex) -> complex:
        return abel_step(self, j, s, z)


Kernel = SchroederKernel | AbelKernel


@dataclass(frozen=True)
class SingularityLattice:
    """Excluded points of a kernel's steps up to a truncation depth.

    ``indexed`` pairs each pole with the step index that hits it; the
    origin, when present, is a divergence point of the whole composition
    rather than a pole of a single step.
    """

    points: tuple[complex, ...]
    rule: str
    indexed: tuple[tuple[int, complex], ...] = ()


# --------------------------------------------------------------------------
# Steps
# --------------------------------------------------------------------------


def schroeder_step(kernel: SchroederKernel, j: int, w: complex, z: complex) -> complex:
    """Value of step j: ``p(lambda^(+/-j) w) * f(z)``."""
    if j < 1:
        raise ValueError("step index must be positive")
    arg = kernel.scale(j) * w
    try:
        pv = evaluate(kernel.p, arg)
    except EvalError as exc:
        if exc.reason == "division-by-zero":
            raise PoleError(j, arg) from None
        raise
    return pv * evaluate(kernel.f, z)


def abel_step(kernel: AbelKernel, j: int, s: complex, z: complex) -> complex:
    """Value of step j: ``u(s - j) * f(z)``."""
    if j < 1:
        raise ValueError("step index must be positive")
    arg = s - j
    if kernel.beta is not None:
        # exp(i*pi) is not exactly -1 in floats, so the logistic pole set
        # beta*(j - s) = (2k+1)*pi*i needs an explicit proximity check.
        denom = cmath.exp(-kernel.beta * arg) + 1
        if abs(denom) < _LOGISTIC_POLE_TOL:
            raise PoleError(j, arg)
    try:
        uv = evaluate(kernel.u, arg)
    except EvalError as exc:
        if exc.reason == "division-by-zero":
            raise PoleError(j, arg) from None
        raise
    return uv * evaluate(kernel.f, z)


def _detect_logistic_rate(u: FuncExpr) -> complex | None:
    """Identify ``u(s) = 1/(exp(-beta*s)+1)`` numerically, returning beta."""
    try:
        if abs(evaluate(u, 0.0) - 0.5) > 1e-12:
            return None
        u1 = evaluate(u, 1.0)
        inner = 1 / u1 - 1
        if inner == 0:
            return None
        beta = -cmath.log(inner)
    except (EvalError, ZeroDivisionError):
        return None
    for probe in (0.7 + 0.3j, -1.2 + 0j, 2.1 - 0.4j):
        try:
            expected = 1 / (cmath.exp(-beta * probe) + 1)
            got = evaluate(u, probe)
        except (EvalError, OverflowError, ZeroDivisionError):
            return None
        if abs(got - expected) > 1e-12 * max(1.0, abs(expected)):
            return None
    return beta


# --------------------------------------------------------------------------
# Tail estimation
# --------------------------------------------------------------------------


def _step_for(kernel: Kernel, j: int, x: complex, z: complex) -> complex:
    return kernel.step(j, x, z)


def tail_estimate(
    kernel: Kernel,
    n: int,
    region: Sequence[tuple[complex, complex]],
) -> float:
    """Estimate ``sum_{j>n} sup |H_j - A|`` over a sampled compact region.

    ``A`` is zero for contracting Schroeder kernels (forced by ``p(0)=0``)
    and otherwise the empirical limit of the steps over the sample.  Terms
    are summed until they drop below ``1e-3`` of the running total and the
    remainder is closed geometrically from the last observed ratio.  Sample
    points that hit a step pole are dropped; if every point poles, the pole
    propagates.  Raises :class:`DivergenceError` when the terms refuse to
    decrease for 64 consecutive indices.
    """
    if n < 1:
        raise ValueError("truncation depth must be positive")
    points = [(complex(x), complex(z)) for x, z in region]
    if not points:
        raise ValueError("region sample is empty")

    center = 0j
    if not (isinstance(kernel, SchroederKernel) and kernel.mode == CONTRACTING):
        center = _empirical_limit(kernel, n, points)

    total = 0.0
    prev = None
    flat_run = 0
    zero_run = 0
    pole: PoleError | None = None
    for offset in range(1, _TAIL_MAX_TERMS + 1):
        j = n + offset
        sup = 0.0
        survivors = []
        for x, z in points:
            try:
                value = abs(_step_for(kernel, j, x, z) - center)
            except PoleError as exc:
                pole = exc
                continue
            survivors.append((x, z))
            if value > sup:
                sup = value
        if not survivors:
            raise pole if pole is not None else ValueError("region sample is empty")
        points = survivors

        if sup == 0.0:
            zero_run += 1
            if zero_run >= 2:
                return total
        else:
            zero_run = 0

        if prev is not None and sup >= prev:
            flat_run += 1
            if flat_run >= _DIVERGENCE_RUN:
                raise DivergenceError(
                    f"tail terms stopped decreasing for {_DIVERGENCE_RUN} "
                    f"consecutive indices after depth {n}"
                )
        else:
            flat_run = 0

        total += sup
        if prev is not None and sup < prev and sup < _TAIL_RELATIVE_CUTOFF * total:
            ratio = sup / prev
            return total + sup * ratio / (1.0 - ratio)
        prev = sup

    raise DivergenceError(
        f"tail sum did not settle within {_TAIL_MAX_TERMS} terms after depth {n}"
    )


def _empirical_limit(
    kernel: Kernel, n: int, points: list[tuple[complex, complex]]
) -> complex:
    probe_j = n + 64
    values = []
    for x, z in points:
        try:
            values.append(_step_for(kernel, probe_j, x, z))
        except PoleError:
            continue
    if not values:
        return 0j
    return complex(fmean(v.real for v in values), fmean(v.imag for v in values))


# --------------------------------------------------------------------------
# Singularity lattices
# --------------------------------------------------------------------------

_P_RATIONAL_FIXING_ZERO = "w/(1+w)"
_P_RATIONAL_UNIT_AT_ZERO = "1/(1+w)"

_PROBES = (0.37 + 0j, -0.41 + 0.23j, 1.7 - 0.9j, 0.05 + 2.1j)


def _identify_p(p: FuncExpr) -> str | None:
    def matches(reference) -> bool:
        for z in _PROBES:
            try:
                got = evaluate(p, z)
            except EvalError:
                return False
            want = reference(z)
            if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                return False
        return True

    if matches(lambda w: w / (1 + w)):
        return _P_RATIONAL_FIXING_ZERO
    if matches(lambda w: 1 / (w + 1)):
        return _P_RATIONAL_UNIT_AT_ZERO
    return None


def singularity_lattice(kernel: SchroederKernel, n: int) -> SingularityLattice:
    """Excluded points of steps 1..n for the recognized rational convergents.

    Both catalog convergents have their single pole at -1, so step j is
    singular where ``lambda^(+/-j) w = -1``.  Unrecognized convergents give
    the empty lattice with rule ``"unknown"``.
    """
    if n < 1:
        raise ValueError("truncation depth must be positive")
    form = _identify_p(kernel.p)
    if form is None:
        return SingularityLattice(points=(), rule="unknown", indexed=())

    if kernel.mode == CONTRACTING:
        base = 1 / kernel.lam
        rule_points = "w = -lambda^-j"
    else:
        base = kernel.lam
        rule_points = "w = -lambda^j"
    indexed = tuple((j, -_power(base, j)) for j in range(1, n + 1))

    include_origin = form == _P_RATIONAL_UNIT_AT_ZERO
    points: tuple[complex, ...]
    if include_origin:
        points = (0j,) + tuple(pt for _, pt in indexed)
        rule = f"{rule_points}, j=1..{n}, and w = 0 (divergence point)"
    else:
        points = tuple(pt for _, pt in indexed)
        rule = f"{rule_points}, j=1..{n}"
    return SingularityLattice(points=points, rule=rule, indexed=indexed)


# --------------------------------------------------------------------------
# Catalog
# --------------------------------------------------------------------------


def catalog_convergent(name: str, variable: str = "w") -> FuncExpr:
    """Built-in convergents by name: ``"w/(1+w)"`` or ``"1/(1+w)"``."""
    if name == _P_RATIONAL_FIXING_ZERO:
        return expr.parse(f"{variable}/(1+{variable})", variable)
    if name == _P_RATIONAL_UNIT_AT_ZERO:
        return expr.parse(f"1/(1+{variable})", variable)
    raise ValueError(f"unknown catalog convergent {name!r}")


def exponential_abel(f: FuncExpr, beta: complex = 1.0) -> AbelKernel:
    """Kernel with ``u(s) = exp(beta*s)``."""
    s = Var("s")
    scaled = s if beta == 1.0 else Binary("*", Const(complex(beta)), s)
    u = FuncExpr(Unary("exp", scaled), "s")
    return AbelKernel(u=u, f=f, beta=None)


def logistic_abel(f: FuncExpr, beta: complex) -> AbelKernel:
    """Kernel with the logistic convergent ``u(s) = 1/(exp(-beta*s)+1)``."""
    s = Var("s")
    inner = Unary("exp", Binary("*", Const(-complex(beta)), s))
    u = FuncExpr(Binary("/", Const(1 + 0j), Binary("+", inner, Const(1 + 0j))), "s")
    return AbelKernel(u=u, f=f, beta=complex(beta))

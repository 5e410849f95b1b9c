"""Geometry of the convergence domain of the interior generating matrix.

The central object is the closed convex curve where the Perron root of the
interior two-variable generating matrix equals one.  All decay-rate
formulas are read off this curve: its per-axis extreme tilts, the two
branches solved in either variable (the eta curves), the extreme value of
a direction functional ``c1*th1 + c2*th2``, and the two intersections of a
direction line with the curve.

Log-convexity of the Perron root in the tilt pair makes every
one-dimensional restriction convex, so interior minima are found by
bounded scalar minimization and curve crossings by bracketed root solves.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .model import Region
from .perron import spectral_radius

__all__ = [
    "DirectionVector",
    "EtaCurves",
    "GammaGeometry",
    "OutsideDomainError",
    "UnboundedDomainError",
    "compute_geometry",
    "directional_extremes",
    "directional_tangency",
    "eta_curves",
    "eta_line_roots",
    "interior_log_perron",
    "theta_extremes",
]

_BRACKET_CAP = 64.0
_OUTSIDE_TOL = 1e-9
_DOUBLE_ROOT_TOL = 1e-12


class OutsideDomainError(ValueError):
    """An abscissa or level has no real intersection with the curve."""


class UnboundedDomainError(RuntimeError):
    """The level set fails to close within the search cap.

    Indicates the model violates the boundedness that irreducibility of
    the free process guarantees (for instance, a walk that can never step
    down along one axis).
    """


@dataclass(frozen=True)
class DirectionVector:
    """Integer direction of interest, e.g. (1, 1) for the diagonal."""

    c1: int
    c2: int

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0 or (self.c1 == 0 and self.c2 == 0):
            raise ValueError("direction components must be nonnegative, not both zero")

    @property
    def is_coordinate(self):
        return self.c1 == 0 or self.c2 == 0

    @property
    def norm(self):
        return float(np.hypot(self.c1, self.c2))

    def as_tuple(self):
        return (self.c1, self.c2)


def as_direction(c):
    if isinstance(c, DirectionVector):
        return c
    return DirectionVector(*c)


def interior_log_perron(model):
    """Fast evaluator ``f(th1, th2) -> log spr(A(e^th1, e^th2))``.

    Assembles the two-variable generating matrix from the interior block
    stack with a rank-one weight table, then takes the dominant eigenvalue
    with the dense eigensolver; for a nonnegative matrix that modulus is
    exactly the Perron root.
    """
    stack = model.interior_stack()
    flat = stack.reshape(9, model.s0, model.s0)

    def log_perron(th1, th2):
        z1 = np.exp(th1)
        z2 = np.exp(th2)
        w = np.array([1.0 / z1, 1.0, z1])[:, None] * np.array([1.0 / z2, 1.0, z2])[None, :]
        a = np.tensordot(w.reshape(9), flat, axes=(0, 0))
        root = np.max(np.abs(np.linalg.eigvals(a)))
        if not np.isfinite(root) or root <= 0.0:
            root, _ = spectral_radius(a)
        return np.log(root)

    return log_perron


_GEOMETRY_CACHE = weakref.WeakKeyDictionary()


class _GeometryContext:
    """Per-model memo: evaluator, extremes, extreme points, eta curves."""

    def __init__(self, model):
        self.model = model
        self.log_perron = interior_log_perron(model)
        self._extremes = None
        self._extreme_points = {}
        self._directional = {}

    # -- scalar restrictions -------------------------------------------------

    def _line_min(self, f, lo, hi, xatol=1e-10):
        """Minimum of a convex function on [lo, hi]; returns (argmin, value)."""
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
        x, v = float(res.x), float(res.fun)
        for endpoint in (lo, hi):
            fe = f(endpoint)
            if fe < v:
                x, v = endpoint, fe
        return x, v

    def _axis_min(self, theta_fixed, axis):
        """Minimize log-Perron over the free variable at one fixed tilt.

        ``axis`` is the fixed axis (1 fixes th1).  The bracket expands
        until both endpoints exceed the center value, which convexity
        guarantees once the minimum is enclosed.
        """
        if axis == 1:
            f = lambda t: self.log_perron(theta_fixed, t)
        else:
            f = lambda t: self.log_perron(t, theta_fixed)
        center = f(0.0)
        radius = 1.0
        while radius <= _BRACKET_CAP:
            if f(-radius) > center and f(radius) > center:
                break
            radius *= 2.0
        else:
            raise UnboundedDomainError(
                "free-variable minimum not enclosed; the level set does not close"
            )
        return self._line_min(f, -radius, radius)

    # -- extremes -------------------------------------------------------------

    def extremes(self):
        """(th1_min, th1_max, th2_min, th2_max) of the level set.

        Located to near float precision: the branch roots collide like the
        square root of the distance to the extreme, so resolving the
        extreme to ~5e-14 is what makes the curve tangency come out as a
        double root at the returned abscissa.
        """
        if self._extremes is None:
            values = []
            for axis in (1, 2):
                for sign in (-1.0, 1.0):
                    values.append(self._one_extreme(axis, sign))
            t1min, t1max = values[0], values[1]
            t2min, t2max = values[2], values[3]
            self._extremes = (t1min, t1max, t2min, t2max)
        return self._extremes

    def _one_extreme(self, axis, sign):
        def inside(t):
            return self._axis_min(t, axis)[1] < 0.0

        if not inside(0.0):
            # The stochastic point (0,0) lies on the curve; under negative
            # drifts the domain opens immediately toward positive tilts.
            raise OutsideDomainError("level set has empty interior at the origin")
        lo = 0.0
        hi = sign * 0.5
        while inside(hi):
            lo = hi
            hi *= 2.0
            if abs(hi) > _BRACKET_CAP:
                raise UnboundedDomainError(
                    f"axis-{axis} extreme exceeds search cap {(_BRACKET_CAP)}"
                )
        while abs(hi - lo) > 5e-14:
            mid = 0.5 * (lo + hi)
            if inside(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def extreme_point(self, which):
        """Tangency point at one of the four axis extremes.

        ``which`` is 'left'/'right' (th1 extremes) or 'bottom'/'top'
        (th2 extremes); the free coordinate is the minimizer of the
        log-Perron restriction there.
        """
        if which not in self._extreme_points:
            t1min, t1max, t2min, t2max = self.extremes()
            if which == "left":
                point = (t1min, self._axis_min(t1min, 1)[0])
            elif which == "right":
                point = (t1max, self._axis_min(t1max, 1)[0])
            elif which == "bottom":
                point = (self._axis_min(t2min, 2)[0], t2min)
            elif which == "top":
                point = (self._axis_min(t2max, 2)[0], t2max)
            else:
                raise ValueError(which)
            self._extreme_points[which] = point
        return self._extreme_points[which]

    # -- eta curves -----------------------------------------------------------

    def eta_roots(self, theta, axis):
        """Both curve crossings of the free variable at one fixed tilt.

        Returns ``(lower, upper)``; they coincide at a tangency.  Raises
        :class:`OutsideDomainError` when the fixed tilt leaves the curve's
        per-axis range.
        """
        argmin, low = self._axis_min(theta, axis)
        if low > _OUTSIDE_TOL:
            raise OutsideDomainError(
                f"abscissa {theta:.6g} outside the level set range on axis {axis}"
            )
        if low >= -_DOUBLE_ROOT_TOL:
            return argmin, argmin
        if axis == 1:
            f = lambda t: self.log_perron(theta, t)
        else:
            f = lambda t: self.log_perron(t, theta)
        roots = []
        for sign in (-1.0, 1.0):
            step = max(abs(argmin), 0.5)
            outer = argmin + sign * step
            while f(outer) <= 0.0:
                step *= 2.0
                outer = argmin + sign * step
                if step > 4.0 * _BRACKET_CAP:
                    raise UnboundedDomainError("curve crossing not bracketed")
            lo, hi = (argmin, outer) if sign > 0 else (outer, argmin)
            roots.append(brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16))
        return min(roots), max(roots)

    # -- directional support --------------------------------------------------

    def directional(self, c):
        """Extremes and tangency points of ``c1*th1 + c2*th2`` on the curve.

        Returns ``(theta_min, theta_max, low_point, high_point)`` where the
        points attain the extremes.  Cached per direction.
        """
        c = as_direction(c)
        key = c.as_tuple()
        if key in self._directional:
            return self._directional[key]
        t1min, t1max, t2min, t2max = self.extremes()
        if c.c2 == 0:
            result = (
                c.c1 * t1min,
                c.c1 * t1max,
                self.extreme_point("left"),
                self.extreme_point("right"),
            )
        elif c.c1 == 0:
            result = (
                c.c2 * t2min,
                c.c2 * t2max,
                self.extreme_point("bottom"),
                self.extreme_point("top"),
            )
        else:
            def upper(t1):
                return self.eta_roots(t1, 1)[1]

            def lower(t1):
                return self.eta_roots(t1, 1)[0]

            hi_arg, hi_neg = self._line_min(
                lambda t: -(c.c1 * t + c.c2 * upper(t)), t1min, t1max, xatol=1e-9
            )
            lo_arg, lo_val = self._line_min(
                lambda t: c.c1 * t + c.c2 * lower(t), t1min, t1max, xatol=1e-9
            )
            high_point = (hi_arg, upper(hi_arg))
            low_point = (lo_arg, lower(lo_arg))
            result = (lo_val, -hi_neg, low_point, high_point)
        self._directional[key] = result
        return result


def _context(model):
    ctx = _GEOMETRY_CACHE.get(model)
    if ctx is None:
        ctx = _GeometryContext(model)
        _GEOMETRY_CACHE[model] = ctx
    return ctx


def theta_extremes(model):
    """Per-axis extreme tilts ``(th1_min, th1_max, th2_min, th2_max)``."""
    return _context(model).extremes()


@dataclass(frozen=True)
class EtaCurves:
    """Callable branches of the level set solved in either variable.

    ``eta2_lower``/``eta2_upper`` map a first-axis tilt to the two second
    coordinates on the curve; ``eta1_lower``/``eta1_upper`` are the
    analogues with the axes swapped.  Outside the admissible range the
    callables raise :class:`OutsideDomainError`.
    """

    eta2_lower: object
    eta2_upper: object
    eta1_lower: object
    eta1_upper: object


def eta_curves(model):
    ctx = _context(model)
    return EtaCurves(
        eta2_lower=lambda t: ctx.eta_roots(t, 1)[0],
        eta2_upper=lambda t: ctx.eta_roots(t, 1)[1],
        eta1_lower=lambda t: ctx.eta_roots(t, 2)[0],
        eta1_upper=lambda t: ctx.eta_roots(t, 2)[1],
    )


def directional_extremes(model, c):
    """Extreme values of ``c1*th1 + c2*th2`` over the level set."""
    lo, hi, _, _ = _context(model).directional(c)
    return lo, hi


def directional_tangency(model, c):
    """Boundary point attaining the directional maximum."""
    _, _, _, high_point = _context(model).directional(c)
    return high_point


def eta_line_roots(model, c, theta):
    """Both intersections of ``c1*th1 + c2*th2 = theta`` with the curve.

    Returns ``(left, right)`` as tilt pairs with ``left[0] <= right[0]``
    and ``left[1] >= right[1]``; they coincide at the directional maximum.
    Coordinate directions are rejected: a vertical or horizontal line has
    a degenerate parameterization and the per-axis machinery already
    covers those cases.
    """
    c = as_direction(c)
    if c.is_coordinate:
        raise ValueError("coordinate directions use the per-axis decay path")
    ctx = _context(model)
    t1min, t1max, t2min, t2max = ctx.extremes()
    theta_min, theta_max, _, _ = ctx.directional(c)
    if theta < theta_min - 1e-12 or theta > theta_max + 1e-12:
        raise OutsideDomainError(
            f"level {theta:.6g} outside [{theta_min:.6g}, {theta_max:.6g}]"
        )

    def second(t1):
        return (theta - c.c1 * t1) / c.c2

    lo = max(t1min, (theta - c.c2 * t2max) / c.c1)
    hi = min(t1max, (theta - c.c2 * t2min) / c.c1)
    if lo > hi:
        raise OutsideDomainError("direction line misses the bounding box")

    def g(t1):
        return ctx.log_perron(t1, second(t1))

    argmin, low = ctx._line_min(g, lo, hi)
    if low > _OUTSIDE_TOL:
        raise OutsideDomainError(f"level {theta:.6g} above the directional maximum")
    if low >= -_DOUBLE_ROOT_TOL:
        return (argmin, second(argmin)), (argmin, second(argmin))
    roots = []
    for outer in (lo, hi):
        if g(outer) <= 0.0:
            # grazing the bounding box: the crossing sits at the segment end
            roots.append(outer)
            continue
        roots.append(brentq(g, *sorted((argmin, outer)), xtol=1e-13, rtol=8.9e-16))
    t_left, t_right = min(roots), max(roots)
    return (t_left, second(t_left)), (t_right, second(t_right))


@dataclass(frozen=True)
class GammaGeometry:
    """Sampled description of the convergence-domain boundary.

    ``boundary_samples`` is ordered by angle around an interior center, so
    consecutive rows trace the closed curve once.  The four extreme points
    carry the tangency ordinates/abscissae of the curve branches.
    """

    theta1_min: float
    theta1_max: float
    theta2_min: float
    theta2_max: float
    boundary_samples: np.ndarray = field(repr=False)
    point_left: tuple
    point_right: tuple
    point_bottom: tuple
    point_top: tuple

    @property
    def eta2_upper_argmax(self):
        """Abscissa where the upper branch in the second variable peaks."""
        return self.point_top[0]

    @property
    def eta2_lower_argmin(self):
        """Abscissa where the lower branch in the second variable bottoms."""
        return self.point_bottom[0]


def compute_geometry(model, samples=512):
    """Sample the level-set boundary; see :class:`GammaGeometry`."""
    ctx = _context(model)
    t1min, t1max, t2min, t2max = ctx.extremes()
    corners = [ctx.extreme_point(w) for w in ("left", "right", "bottom", "top")]
    center = np.mean(np.asarray(corners), axis=0)
    if ctx.log_perron(*center) >= 0.0:
        center = 0.5 * (np.asarray(corners[0]) + np.asarray(corners[1]))
    span = max(t1max - t1min, t2max - t2min)
    rows = np.empty((samples, 2))
    for k in range(samples):
        phi = 2.0 * np.pi * k / samples
        direction = np.array([np.cos(phi), np.sin(phi)])

        def along(r):
            point = center + r * direction
            return ctx.log_perron(point[0], point[1])

        outer = span
        while along(outer) <= 0.0:
            outer *= 2.0
            if outer > 16.0 * span:
                raise UnboundedDomainError("boundary ray not bracketed")
        radius = brentq(along, 0.0, outer, xtol=1e-13, rtol=8.9e-16)
        rows[k] = center + radius * direction
    return GammaGeometry(
        theta1_min=t1min,
        theta1_max=t1max,
        theta2_min=t2min,
        theta2_max=t2max,
        boundary_samples=rows,
        point_left=corners[0],
        point_right=corners[1],
        point_bottom=corners[2],
        point_top=corners[3],
    )

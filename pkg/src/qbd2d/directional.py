"""Decay rate of the stationary tail in an arbitrary lattice direction.

Two independent routes compute the same number.  The root route applies
the defining constrained suprema: sweep the level of the direction
functional and find, by bisection, the largest level at which the
direction line still meets the part of the curve allowed by each per-axis
critical tilt.  The geometric route classifies the relative position of
the two constraint corners on the curve and evaluates a closed form per
class.  Their agreement is part of the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    DirectionVector,
    as_direction,
    directional_extremes,
    directional_tangency,
    eta_line_roots,
    theta_extremes,
    _context as _geometry_context,
)
from .matrix_analytic import StabilityError, StabilityVerdict, coordinate_profile

__all__ = [
    "TypeClass",
    "Regime",
    "BindingConstraint",
    "DirectionalDecayReport",
    "theta_dagger_directional",
    "xi_c",
    "classify_type",
    "xi_c_geometric",
]

_REGIME_TOL = 1e-7
_SLOPE_STEP = 1e-5
_EDGE_TOL = 1e-7


class TypeClass(Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"
    TYPE4 = "type4"


class Regime(Enum):
    UNCONSTRAINED = "unconstrained"
    BOUNDARY_DRIVEN = "boundary_driven"


class BindingConstraint(Enum):
    NONE = "none"
    Q1 = "q1"
    Q2 = "q2"


@dataclass(frozen=True)
class DirectionalDecayReport:
    """Everything the analysis knows about one direction."""

    c: DirectionVector
    theta_c_min: float
    theta_c_max: float
    theta_dagger_c1: float
    theta_dagger_c2: float
    xi: float
    xi_normalized: float
    type_class: TypeClass
    regime: Regime
    binding_constraint: BindingConstraint

    def to_dict(self):
        return {
            "direction": list(self.c.as_tuple()),
            "theta_c_min": self.theta_c_min,
            "theta_c_max": self.theta_c_max,
            "theta_dagger_c1": self.theta_dagger_c1,
            "theta_dagger_c2": self.theta_dagger_c2,
            "xi": self.xi,
            "xi_normalized": self.xi_normalized,
            "type_class": self.type_class.value,
            "regime": self.regime.value,
            "binding_constraint": self.binding_constraint.value,
        }


def _require_positive_recurrent(profile):
    if profile.stability is not StabilityVerdict.POSITIVE_RECURRENT:
        raise StabilityError(
            f"decay analysis requires a positive recurrent model, got "
            f"{profile.stability.value}"
        )


def theta_dagger_directional(model, c, which, profile=None):
    """Largest functional level compatible with one per-axis constraint.

    For ``which == 1`` the left intersection's first coordinate must stay
    at most theta1*; for ``which == 2`` the right intersection's second
    coordinate must stay at most theta2*.  The constraint function is
    monotone between the level through the relevant curve extreme point
    and the directional maximum, so bisection applies; when the constraint
    is slack at the top, the directional maximum itself is returned.
    """
    c = as_direction(c)
    if c.is_coordinate:
        raise ValueError("coordinate directions use the per-axis decay path")
    if profile is None:
        profile = coordinate_profile(model)
    _require_positive_recurrent(profile)
    ctx = _geometry_context(model)
    theta_min, theta_max, _, high_point = ctx.directional(c)
    star = profile.theta1_star if which == 1 else profile.theta2_star

    def satisfied(theta):
        left, right = eta_line_roots(model, c, theta)
        value = left[0] if which == 1 else right[1]
        return value <= star

    tangent_coord = high_point[0] if which == 1 else high_point[1]
    if tangent_coord <= star + 1e-9:
        return float(theta_max)
    anchor = ctx.extreme_point("left") if which == 1 else ctx.extreme_point("bottom")
    lo = c.c1 * anchor[0] + c.c2 * anchor[1]
    hi = theta_max
    if not satisfied(lo):
        raise StabilityError(
            "constraint violated at its anchor level; critical tilt inconsistent"
        )
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if satisfied(mid):
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def classify_type(model, profile=None):
    """Relative position of the two constraint corners on the curve.

    Returns ``(type_class, q1, q2, slopes)`` where ``q1``/``q2`` are the
    corner points and ``slopes`` maps ``"eta2_at_q1"``/``"eta1_at_q2"`` to
    one-sided boundary derivatives (``-inf`` at a per-axis extreme, where
    the tangent is vertical in the sweep variable).  Equalities within
    1e-9 are resolved exactly as the defining weak/strict inequalities
    read, and flagged via ``slopes["degenerate"]``.
    """
    if profile is None:
        profile = coordinate_profile(model)
    ctx = _geometry_context(model)
    t1min, t1max, t2min, t2max = ctx.extremes()
    t1s, t2s = profile.theta1_star, profile.theta2_star
    eta2_at_q1 = ctx.eta_roots(min(t1s, t1max), 1)[1]
    eta1_at_q2 = ctx.eta_roots(min(t2s, t2max), 2)[1]
    q1 = (t1s, eta2_at_q1)
    q2 = (eta1_at_q2, t2s)

    cond_a = t1s >= eta1_at_q2          # q2 is inside the theta1 constraint
    cond_b = eta2_at_q1 <= t2s          # q1 is inside the theta2 constraint
    if cond_a and cond_b:
        type_class = TypeClass.TYPE1
    elif not cond_a and not cond_b:
        type_class = TypeClass.TYPE2
    elif cond_a:
        type_class = TypeClass.TYPE3
    else:
        type_class = TypeClass.TYPE4

    slopes = {
        "eta2_at_q1": _boundary_slope(ctx, t1s, 1, t1min, t1max),
        "eta1_at_q2": _boundary_slope(ctx, t2s, 2, t2min, t2max),
        "degenerate": (
            abs(t1s - eta1_at_q2) <= 1e-9 or abs(eta2_at_q1 - t2s) <= 1e-9
        ),
    }
    return type_class, q1, q2, slopes


def _boundary_slope(ctx, at, axis, lo, hi, step=_SLOPE_STEP):
    """One-sided/central derivative of the upper curve branch.

    At the right end of the sweep range the branch closes with a vertical
    tangent, so the derivative is reported as ``-inf``.
    """
    if at >= hi - _EDGE_TOL:
        return float("-inf")
    upper = lambda t: ctx.eta_roots(t, axis)[1]
    if at - step >= lo and at + step <= hi:
        return (upper(at + step) - upper(at - step)) / (2.0 * step)
    if at + step > hi:
        return (upper(at) - upper(at - step)) / step
    return (upper(at + step) - upper(at)) / step


def xi_c_geometric(model, c, profile=None):
    """Closed-form decay rate from the corner classification."""
    c = as_direction(c)
    if profile is None:
        profile = coordinate_profile(model)
    _require_positive_recurrent(profile)
    type_class, q1, q2, slopes = classify_type(model, profile)
    c1, c2 = float(c.c1), float(c.c2)
    at_q1 = c1 * q1[0] + c2 * q1[1]
    at_q2 = c1 * q2[0] + c2 * q2[1]
    slope_line = -np.inf if c2 == 0.0 else -c1 / c2
    slope_line_swapped = -np.inf if c1 == 0.0 else -c2 / c1

    if type_class is TypeClass.TYPE1:
        if slope_line <= slopes["eta2_at_q1"]:
            return float(at_q1)
        if slope_line_swapped <= slopes["eta1_at_q2"]:
            return float(at_q2)
        return float(directional_extremes(model, c)[1])
    if type_class is TypeClass.TYPE2:
        chord = (q2[1] - q1[1]) / (q2[0] - q1[0])
        if slope_line <= chord:
            return float(at_q1)
        return float(at_q2)
    if type_class is TypeClass.TYPE3:
        return float(at_q2)
    return float(at_q1)


def xi_c(model, c, profile=None):
    """Decay rate report for one direction, by the root-finding route.

    Coordinate directions are served by the per-axis profile; all other
    directions take the two constrained-level bisections and the smaller
    of the two levels.  The regime flag distinguishes a decay rate pinned
    by the directional maximum from one strictly below it (where the tail
    is purely geometric).
    """
    c = as_direction(c)
    if profile is None:
        profile = coordinate_profile(model)
    _require_positive_recurrent(profile)
    type_class, _, _, _ = classify_type(model, profile)

    if c.is_coordinate:
        theta_min, theta_max = directional_extremes(model, c)
        if c.c2 == 0:
            base_star, base_dagger = profile.theta1_star, profile.theta1_dagger
            scale = c.c1
        else:
            base_star, base_dagger = profile.theta2_star, profile.theta2_dagger
            scale = c.c2
        dagger_own = scale * base_star
        dagger_other = scale * base_dagger
        # The own-axis constraint caps the functional at theta*, the other
        # axis at the curve-constrained tilt; same min structure as below.
        d1, d2 = (dagger_own, dagger_other) if c.c2 == 0 else (dagger_other, dagger_own)
    else:
        theta_min, theta_max = directional_extremes(model, c)
        d1 = theta_dagger_directional(model, c, 1, profile)
        d2 = theta_dagger_directional(model, c, 2, profile)
    xi = min(d1, d2)
    boundary_driven = xi < theta_max - _REGIME_TOL
    if not boundary_driven:
        binding = BindingConstraint.NONE
    elif d1 <= d2:
        binding = BindingConstraint.Q1
    else:
        binding = BindingConstraint.Q2
    return DirectionalDecayReport(
        c=c,
        theta_c_min=float(theta_min),
        theta_c_max=float(theta_max),
        theta_dagger_c1=float(d1),
        theta_dagger_c2=float(d2),
        xi=float(xi),
        xi_normalized=float(xi / c.norm),
        type_class=type_class,
        regime=Regime.BOUNDARY_DRIVEN if boundary_driven else Regime.UNCONSTRAINED,
        binding_constraint=binding,
    )

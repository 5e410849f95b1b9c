"""Two-dimensional quasi-birth-and-death process models.

A model is a finite set of phases together with four families of one-step
transition blocks, one family per region of the quadrant: the interior,
the two boundary axes and the origin.  Steps are skip free (each
coordinate moves by at most one per transition) and steps that would leave
the quadrant carry identically zero blocks.

The module also builds derived models: the block state process obtained by
aggregating ``b1 x b2`` cells of the lattice into a single level (used to
reduce a general direction to the diagonal), and JSON (de)serialization of
custom models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Region",
    "QbdModel",
    "BlockVector",
    "Violation",
    "validate",
    "eval_generating_matrix",
    "gen_row",
    "gen_col",
    "build_block_process",
    "load_model",
    "save_model",
    "model_to_dict",
    "model_from_dict",
]

STEPS = (-1, 0, 1)

ROW_SUM_TOL = 1e-12


class Region(Enum):
    """Region of the quadrant a transition block family applies to."""

    INTERIOR = "interior"      # x1 > 0, x2 > 0
    X_BOUNDARY = "x_boundary"  # x1 > 0, x2 = 0
    Y_BOUNDARY = "y_boundary"  # x1 = 0, x2 > 0
    ORIGIN = "origin"          # x1 = 0, x2 = 0

    @property
    def admissible_steps(self):
        return _ADMISSIBLE[self]


_ADMISSIBLE = {
    Region.INTERIOR: tuple((i1, i2) for i1 in STEPS for i2 in STEPS),
    Region.X_BOUNDARY: tuple((i1, i2) for i1 in STEPS for i2 in (0, 1)),
    Region.Y_BOUNDARY: tuple((i1, i2) for i1 in (0, 1) for i2 in STEPS),
    Region.ORIGIN: tuple((i1, i2) for i1 in (0, 1) for i2 in (0, 1)),
}


def _frozen(arr):
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class QbdModel:
    """Transition blocks of a discrete-time 2d-QBD process.

    Attributes
    ----------
    s0 : int
        Number of phases.
    blocks : dict
        Maps ``(Region, (i1, i2))`` to an ``s0 x s0`` nonnegative matrix.
        Steps absent from the map are zero.  Instances are immutable and
        safe to share between concurrent analyses; analysis modules key
        their memo tables on model identity (hence ``eq=False``).
    """

    s0: int
    blocks: dict = field(repr=False)

    def __post_init__(self):
        if self.s0 < 1:
            raise ValueError("phase count must be positive")
        frozen = {}
        for (region, step), mat in self.blocks.items():
            mat = _frozen(mat)
            if mat.shape != (self.s0, self.s0):
                raise ValueError(f"block {region.value}{step} has shape {mat.shape}")
            frozen[(region, step)] = mat
        object.__setattr__(self, "blocks", frozen)

    def block(self, region, i1, i2):
        """Block for one step, a zero matrix when the step is absent."""
        mat = self.blocks.get((region, (i1, i2)))
        if mat is None:
            return np.zeros((self.s0, self.s0))
        return mat

    def region_sum(self, region):
        """Sum of all admissible step blocks of one region."""
        total = np.zeros((self.s0, self.s0))
        for step in region.admissible_steps:
            total += self.block(region, *step)
        return total

    def interior_stack(self):
        """Interior blocks as a ``(3, 3, s0, s0)`` array indexed by step+1."""
        stack = np.zeros((3, 3, self.s0, self.s0))
        for i1 in STEPS:
            for i2 in STEPS:
                stack[i1 + 1, i2 + 1] = self.block(Region.INTERIOR, i1, i2)
        return stack


@dataclass(frozen=True)
class BlockVector:
    """Aggregation factors per axis for the block state process."""

    b1: int
    b2: int

    def __post_init__(self):
        if self.b1 < 1 or self.b2 < 1:
            raise ValueError("block sizes must be at least 1")


@dataclass(frozen=True)
class Violation:
    """One violated model invariant, with enough context to locate it."""

    kind: str
    region: str
    step: tuple
    row: int
    residual: float

    def __str__(self):
        return (
            f"{self.kind}: region={self.region} step={self.step} "
            f"row={self.row} residual={self.residual:.3e}"
        )


def validate(model):
    """Check every model invariant; returns a list of violations.

    Valid models produce an empty list.  Checks performed: entries within
    [0, 1], row-stochasticity of each region's block sum, zero blocks on
    impossible steps, and irreducibility of the summed interior blocks
    (via the strongly-connected-components closure of their pattern).
    """
    violations = []
    for (region, step), mat in sorted(
        model.blocks.items(), key=lambda kv: (kv[0][0].value, kv[0][1])
    ):
        if step not in region.admissible_steps:
            mass = float(np.abs(mat).max())
            if mass > 0.0:
                violations.append(
                    Violation("impossible-step", region.value, step, -1, mass)
                )
            continue
        low = float(mat.min())
        high = float(mat.max())
        if low < -1e-12 or high > 1.0 + 1e-12:
            bad_row = int(np.argmax(np.max(np.abs(mat - np.clip(mat, 0, 1)), axis=1)))
            violations.append(
                Violation(
                    "entry-range",
                    region.value,
                    step,
                    bad_row,
                    max(-low, high - 1.0),
                )
            )
    for region in Region:
        sums = model.region_sum(region).sum(axis=1)
        for row, value in enumerate(sums):
            if abs(value - 1.0) > ROW_SUM_TOL:
                violations.append(
                    Violation("row-sum", region.value, (), row, abs(value - 1.0))
                )
    pattern = model.region_sum(Region.INTERIOR) > 0
    if model.s0 > 1:
        n_comp, _ = connected_components(
            csr_matrix(pattern), directed=True, connection="strong"
        )
        if n_comp != 1:
            violations.append(
                Violation("interior-reducible", Region.INTERIOR.value, (), -1, float(n_comp))
            )
    return violations


def eval_generating_matrix(model, region, z1, z2):
    """Two-variable generating matrix of one region's blocks.

    Returns ``sum over steps of z1^i1 z2^i2 A[step]`` restricted to the
    region's admissible steps.
    """
    if z1 <= 0 or z2 <= 0:
        raise ValueError("generating matrix arguments must be positive")
    total = np.zeros((model.s0, model.s0))
    for (i1, i2) in region.admissible_steps:
        mat = model.blocks.get((region, (i1, i2)))
        if mat is not None:
            total += (z1 ** i1) * (z2 ** i2) * mat
    return total


def gen_row(model, region, i1, z):
    """One-variable partial sum at fixed first step: ``A[i1, *](z)``."""
    if z <= 0:
        raise ValueError("generating matrix arguments must be positive")
    total = np.zeros((model.s0, model.s0))
    for i2 in STEPS:
        if (i1, i2) in region.admissible_steps:
            mat = model.blocks.get((region, (i1, i2)))
            if mat is not None:
                total += (z ** i2) * mat
    return total


def gen_col(model, region, i2, z):
    """One-variable partial sum at fixed second step: ``A[*, i2](z)``."""
    if z <= 0:
        raise ValueError("generating matrix arguments must be positive")
    total = np.zeros((model.s0, model.s0))
    for i1 in STEPS:
        if (i1, i2) in region.admissible_steps:
            mat = model.blocks.get((region, (i1, i2)))
            if mat is not None:
                total += (z ** i1) * mat
    return total


def _source_region(on_axis1, on_axis2):
    """Original region of a source cell given which original axes it sits on."""
    if on_axis1 and on_axis2:
        return Region.ORIGIN
    if on_axis1:
        return Region.Y_BOUNDARY
    if on_axis2:
        return Region.X_BOUNDARY
    return Region.INTERIOR


def build_block_process(model, b):
    """Aggregate ``b1 x b2`` lattice cells into one level of a new model.

    The derived process has phase count ``b1 * b2 * s0``; a phase encodes
    the within-block offsets ``(m1, m2)`` together with the original phase.
    For each source offset and original step, the destination level change
    is the per-axis quotient of ``m + i`` by the block size and the
    destination offset is the remainder.  Source cells of a boundary block
    use the original boundary families only where the original coordinate
    is itself on the boundary; elsewhere they use interior blocks.
    """
    if isinstance(b, tuple):
        b = BlockVector(*b)
    b1, b2 = b.b1, b.b2
    s0 = model.s0
    if b1 == 1 and b2 == 1:
        return QbdModel(s0=s0, blocks=dict(model.blocks))

    def phase_index(m1, m2, j):
        return (m1 * b2 + m2) * s0 + j

    new_s0 = b1 * b2 * s0
    acc = {}

    for region in Region:
        level1_free = region in (Region.INTERIOR, Region.X_BOUNDARY)
        level2_free = region in (Region.INTERIOR, Region.Y_BOUNDARY)
        for m1 in range(b1):
            for m2 in range(b2):
                on_axis1 = (not level1_free) and m1 == 0
                on_axis2 = (not level2_free) and m2 == 0
                source_region = _source_region(on_axis1, on_axis2)
                for (i1, i2) in source_region.admissible_steps:
                    mat = model.blocks.get((source_region, (i1, i2)))
                    if mat is None:
                        continue
                    d1, r1 = divmod(m1 + i1, b1)
                    d2, r2 = divmod(m2 + i2, b2)
                    key = (region, (d1, d2))
                    dest = acc.setdefault(key, np.zeros((new_s0, new_s0)))
                    rows = slice(phase_index(m1, m2, 0), phase_index(m1, m2, 0) + s0)
                    cols = slice(phase_index(r1, r2, 0), phase_index(r1, r2, 0) + s0)
                    dest[rows, cols] += mat

    blocks = {key: mat for key, mat in acc.items() if np.any(mat)}
    return QbdModel(s0=new_s0, blocks=blocks)


# ---------------------------------------------------------------------------
# JSON serialization.  Schema:
#   { "s0": int,
#     "blocks": { "interior" | "x_boundary" | "y_boundary" | "origin":
#                   { "<i1>,<i2>": [[row-major s0 x s0 floats]] } } }
# Missing steps default to zero matrices; unknown keys are rejected.
# ---------------------------------------------------------------------------

_REGION_KEYS = {region.value: region for region in Region}


class ModelFormatError(ValueError):
    """Raised when a JSON model document does not match the schema."""


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be an object")
    unknown = set(doc) - {"s0", "blocks"}
    if unknown:
        raise ModelFormatError(f"unknown top-level keys: {sorted(unknown)}")
    if "s0" not in doc or "blocks" not in doc:
        raise ModelFormatError("model document requires 's0' and 'blocks'")
    s0 = doc["s0"]
    if not isinstance(s0, int) or s0 < 1:
        raise ModelFormatError("'s0' must be a positive integer")
    raw_blocks = doc["blocks"]
    if not isinstance(raw_blocks, dict):
        raise ModelFormatError("'blocks' must be an object")
    blocks = {}
    for region_key, steps in raw_blocks.items():
        region = _REGION_KEYS.get(region_key)
        if region is None:
            raise ModelFormatError(f"unknown region key: {region_key!r}")
        if not isinstance(steps, dict):
            raise ModelFormatError(f"region {region_key!r} must map steps to matrices")
        for step_key, rows in steps.items():
            try:
                i1_str, i2_str = step_key.split(",")
                step = (int(i1_str), int(i2_str))
            except ValueError as exc:
                raise ModelFormatError(f"bad step key {step_key!r}") from exc
            if step[0] not in STEPS or step[1] not in STEPS:
                raise ModelFormatError(f"step out of range: {step_key!r}")
            mat = np.asarray(rows, dtype=float)
            if mat.shape != (s0, s0):
                raise ModelFormatError(
                    f"block {region_key}/{step_key} must be {s0}x{s0}, got {mat.shape}"
                )
            blocks[(region, step)] = mat
    return QbdModel(s0=s0, blocks=blocks)


def model_to_dict(model):
    doc = {"s0": model.s0, "blocks": {}}
    for (region, step), mat in model.blocks.items():
        if not np.any(mat):
            continue
        region_doc = doc["blocks"].setdefault(region.value, {})
        region_doc[f"{step[0]},{step[1]}"] = mat.tolist()
    for region_key in list(doc["blocks"]):
        doc["blocks"][region_key] = dict(sorted(doc["blocks"][region_key].items()))
    doc["blocks"] = dict(sorted(doc["blocks"].items()))
    return doc


def load_model(path):
    """Load a model from a JSON file; rejects documents off-schema."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return model_from_dict(doc)


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")

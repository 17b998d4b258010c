"""Reconstruction accuracy over the target region."""
import csv
from dataclasses import dataclass

import numpy as np

from sfmkl.ridge import estimate_field
from sfmkl.scene import greens_field

NMSE_FLOOR_DB = -300.0
AXES = "xyz"


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class EvalGrid:
    points: np.ndarray
    spacing: float

    def __len__(self):
        return self.points.shape[0]


def _lattice_1d(radius, spacing):
    n = int(np.floor(radius / spacing + 1e-9))
    return spacing * np.arange(-n, n + 1)


def make_grid(region, spacing):
    """Cubic lattice through the region centre, clipped to the sphere.

    Parameters
    ----------
    region : Sphere
    spacing : float
        Lattice step in meters, ``0 < spacing <= 2 * radius``.

    Returns
    -------
    EvalGrid
    """
    if not 0 < spacing <= 2 * region.radius:
        raise EvaluationError("spacing must lie in (0, 2 * radius]")
    ax = _lattice_1d(region.radius, spacing)
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    offsets = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=-1)
    inside = np.linalg.norm(offsets, axis=-1) <= region.radius
    points = offsets[inside] + region.center
    if points.shape[0] == 0:
        raise EvaluationError("evaluation grid is empty")
    return EvalGrid(points, float(spacing))


def nmse(true_values, est_values):
    """``10 log10(sum |u_true - u_est|^2 / sum |u_true|^2)`` in dB, floored at -300 dB."""
    t = np.asarray(true_values, dtype=complex).reshape(-1)
    e = np.asarray(est_values, dtype=complex).reshape(-1)
    if t.shape != e.shape or t.size == 0:
        raise EvaluationError("true and estimated fields must have the same non-zero length")
    denom = np.sum(np.abs(t) ** 2)
    if not denom > 0:
        raise EvaluationError("true field is identically zero; NMSE undefined")
    num = np.sum(np.abs(t - e) ** 2)
    if num == 0:
        return NMSE_FLOOR_DB
    return max(float(10 * np.log10(num / denom)), NMSE_FLOOR_DB)


@dataclass(frozen=True)
class FieldEvaluation:
    points: np.ndarray
    true_values: np.ndarray
    est_values: np.ndarray

    @property
    def nmse_db(self):
        return nmse(self.true_values, self.est_values)


def evaluate_field(state, scene, frequency, grid):
    true = greens_field(scene, grid.points, frequency)
    est = estimate_field(state, grid.points)
    return FieldEvaluation(grid.points, np.atleast_1d(true), est)


def parse_plane(spec):
    """Parse ``'z=0'`` style plane specifications into ``(axis, offset)``."""
    try:
        axis, value = spec.split("=")
        axis = axis.strip().lower()
        offset = float(value)
    except ValueError as exc:
        raise EvaluationError(f"cannot parse plane {spec!r}; expected e.g. 'z=0'") from exc
    if axis not in AXES:
        raise EvaluationError(f"plane axis must be one of x, y, z, got {axis!r}")
    return axis, offset


@dataclass(frozen=True)
class FieldSlice:
    """Estimated and true field on a plane, row-major over the in-plane lattice.

    ``u``/``v`` are the in-plane coordinates (for ``z=c`` these are x and y).
    Points outside the region are NaN in ``true_values``/``est_values``.
    """

    axis: str
    offset: float
    u: np.ndarray
    v: np.ndarray
    true_values: np.ndarray
    est_values: np.ndarray

    @property
    def inside(self):
        return ~np.isnan(self.true_values.real)

    @property
    def normalized_error(self):
        """``|u_true - u_est|^2`` divided by the mean ``|u_true|^2`` over the slice."""
        ref = np.mean(np.abs(self.true_values[self.inside]) ** 2)
        return np.abs(self.true_values - self.est_values) ** 2 / ref

    @property
    def nmse_db(self):
        m = self.inside
        return nmse(self.true_values[m], self.est_values[m])


def _plane_axes(axis):
    i = AXES.index(axis)
    return i, [j for j in range(3) if j != i]


def error_slice(state, scene, frequency, plane, spacing):
    """Evaluate the reconstruction on a plane through the target region."""
    axis, offset = parse_plane(plane) if isinstance(plane, str) else plane
    region = scene.target_region
    normal, (iu, iv) = _plane_axes(axis)
    height = offset - region.center[normal]
    if abs(height) > region.radius:
        raise EvaluationError(f"plane {axis}={offset} does not intersect the target region")
    ax_u = _lattice_1d(region.radius, spacing) + region.center[iu]
    ax_v = _lattice_1d(region.radius, spacing) + region.center[iv]
    gu, gv = np.meshgrid(ax_u, ax_v, indexing="ij")
    pts = np.zeros(gu.shape + (3,))
    pts[..., normal] = offset
    pts[..., iu] = gu
    pts[..., iv] = gv
    flat = pts.reshape(-1, 3)
    inside = region.contains(flat, tol=1e-12)
    true = np.full(flat.shape[0], np.nan + 1j * np.nan)
    est = np.full(flat.shape[0], np.nan + 1j * np.nan)
    true[inside] = greens_field(scene, flat[inside], frequency)
    est[inside] = estimate_field(state, flat[inside])
    return FieldSlice(axis, float(offset), gu, gv, true.reshape(gu.shape), est.reshape(gu.shape))


def _fmt(x):
    return f"{x:.9g}"


def write_points_csv(path, evaluation):
    """One row per evaluation point: coordinates, true/estimated field and error."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "z", "true_re", "true_im", "est_re", "est_im", "abs_error"])
        for p, t, e in zip(evaluation.points, evaluation.true_values, evaluation.est_values):
            w.writerow([_fmt(p[0]), _fmt(p[1]), _fmt(p[2]), _fmt(t.real), _fmt(t.imag),
                        _fmt(e.real), _fmt(e.imag), _fmt(abs(t - e))])


def write_slice_csv(path, field_slice, value="normalized_error"):
    """``(u, v, value)`` triplets for points inside the region, row-major."""
    names = {AXES[j] for j in range(3)} - {field_slice.axis}
    cu, cv = sorted(names)
    if value == "normalized_error":
        vals = field_slice.normalized_error
        cols = [cu, cv, "normalized_error"]
        rows = ((u, v, _fmt(x)) for u, v, x in zip(field_slice.u.ravel(), field_slice.v.ravel(), vals.ravel()))
    else:
        cols = [cu, cv, "true_re", "true_im", "est_re", "est_im", "normalized_error"]
        rows = (
            (u, v, _fmt(t.real), _fmt(t.imag), _fmt(e.real), _fmt(e.imag), _fmt(x))
            for u, v, t, e, x in zip(field_slice.u.ravel(), field_slice.v.ravel(),
                                     field_slice.true_values.ravel(), field_slice.est_values.ravel(),
                                     field_slice.normalized_error.ravel())
        )
    inside = field_slice.inside.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for keep, row in zip(inside, rows):
            if keep:
                w.writerow([_fmt(row[0]), _fmt(row[1]), *row[2:]])

"""Geometric augmentation: piecewise affine warps, elastic deformation,
flips and right-angle rotations.

All sampling is driven by numpy's PCG64 generator (``np.random.default_rng``)
seeded with a 64-bit integer; one seed fully determines the transform, and
per-pair streams can be derived with ``np.random.SeedSequence`` so batches
stay reproducible however they are scheduled. Warps use the pull-back
convention throughout: the parameters map an output pixel's coordinates to
the source location that is sampled, which avoids forward-splatting holes.

Coordinates are (x, y) with x along image columns and y along rows.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage
from scipy.spatial import Delaunay, QhullError

from .errors import (
    DegenerateTriangleError,
    DimensionMismatchError,
    InvalidArgumentError,
    SamplingFailureError,
)

# ---------------------------------------------------------------------------
# elastic deformation


@dataclass(frozen=True)
class ElasticConfig:
    """Per-pixel random displacement smoothed by a Gaussian.

    alpha scales the field strength; sigma_e is the Gaussian std in pixels.
    Larger sigma_e averages the +-1 noise over a wider window, so fields
    shrink as it grows.
    """

    alpha: float
    sigma_e: float
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be >= 0: {self.alpha}")
        if self.sigma_e <= 0:
            raise InvalidArgumentError(f"sigma_e must be > 0: {self.sigma_e}")


@dataclass(frozen=True)
class DisplacementField:
    """Per-pixel (dx, dy) real displacements, same shape as the image."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        if self.dx.shape != self.dy.shape or self.dx.ndim != 2:
            raise DimensionMismatchError(
                f"dx {self.dx.shape} and dy {self.dy.shape} must be equal 2D shapes")
        if not (np.isfinite(self.dx).all() and np.isfinite(self.dy).all()):
            raise InvalidArgumentError("displacement field contains non-finite values")

    @property
    def height(self):
        return self.dx.shape[0]

    @property
    def width(self):
        return self.dx.shape[1]


def gaussian_kernel(sigma):
    """Normalized 1D Gaussian, truncated at radius ceil(3 * sigma)."""
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _smooth(field, sigma):
    # separable Gaussian with reflective boundary
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(field, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def sample_elastic_field(height, width, cfg):
    """Draw an elastic displacement field of the given size.

    dx and dy start as i.i.d. uniform(-1, 1) per pixel (dx drawn first),
    are smoothed with the truncated Gaussian of std cfg.sigma_e, and scaled
    by cfg.alpha. Same seed and config give the identical field.
    """
    rng = np.random.default_rng(cfg.seed)
    dx = rng.uniform(-1.0, 1.0, (height, width))
    dy = rng.uniform(-1.0, 1.0, (height, width))
    dx = cfg.alpha * _smooth(dx, cfg.sigma_e)
    dy = cfg.alpha * _smooth(dy, cfg.sigma_e)
    return DisplacementField(dx=dx, dy=dy)


def _sample(image, src_y, src_x, interp):
    """Sample image at real coordinates, clamped to the edge."""
    if interp not in ("bilinear", "nearest"):
        raise InvalidArgumentError(f"unknown interpolation {interp!r}")
    order = 1 if interp == "bilinear" else 0
    out = ndimage.map_coordinates(image.astype(np.float64), [src_y, src_x],
                                  order=order, mode="nearest")
    if np.issubdtype(image.dtype, np.integer):
        return np.rint(out).astype(image.dtype)
    return out.astype(image.dtype)


def warp_displacement(image, field, interp="bilinear"):
    """Warp an image by a displacement field (pull-back sampling).

    Output pixel (x, y) takes the source value at (x + dx[y, x],
    y + dy[y, x]); coordinates falling outside the image clamp to the edge.
    Use interp="nearest" for binary masks.
    """
    image = np.asarray(image)
    if image.shape != field.dx.shape:
        raise DimensionMismatchError(
            f"image {image.shape} does not match field {field.dx.shape}")
    yy, xx = np.mgrid[0:image.shape[0], 0:image.shape[1]].astype(np.float64)
    return _sample(image, yy + field.dy, xx + field.dx, interp)


# ---------------------------------------------------------------------------
# piecewise affine


@dataclass(frozen=True)
class AffineParams:
    """Coefficients of a 2D affine map (x, y) -> (a1 x + a2 y + c1,
    b1 x + b2 y + c2). For warps these map destination coordinates back to
    source coordinates."""

    a1: float
    a2: float
    b1: float
    b2: float
    c1: float
    c2: float

    def apply(self, x, y):
        return (self.a1 * x + self.a2 * y + self.c1,
                self.b1 * x + self.b2 * y + self.c2)


@dataclass(frozen=True)
class PiecewiseAffineConfig:
    """Random grid-point displacement driving a piecewise affine warp.

    A regular grid of control points is displaced by Gaussian noise whose
    std is a random fraction (drawn from sigma_p_range) of the image side
    length per axis. The default 2x2 grid moves only the four corners and
    splits the image into two triangles.
    """

    sigma_p_range: tuple = (0.01, 0.05)
    grid: tuple = (2, 2)
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.sigma_p_range
        if not 0 <= lo <= hi:
            raise InvalidArgumentError(
                f"sigma_p_range must satisfy 0 <= lo <= hi: {self.sigma_p_range}")
        if min(self.grid) < 2:
            raise InvalidArgumentError(f"grid dims must be >= 2: {self.grid}")


@dataclass(frozen=True)
class PiecewiseWarp:
    """Control points, their triangulation, and per-triangle affine maps.

    params[t] maps destination coordinates inside triangles[t] (indices
    into dst_points) back to source coordinates; each triangle's map sends
    its three dst vertices exactly onto the matching src vertices.
    """

    height: int
    width: int
    src_points: np.ndarray
    dst_points: np.ndarray
    triangles: np.ndarray
    params: tuple


def solve_affine(src_tri, dst_tri):
    """Affine map taking the three dst vertices onto the src vertices.

    Raises DegenerateTriangleError when the dst vertices are collinear.
    """
    src = np.asarray(src_tri, dtype=np.float64)
    dst = np.asarray(dst_tri, dtype=np.float64)
    if src.shape != (3, 2) or dst.shape != (3, 2):
        raise InvalidArgumentError("triangles must be three (x, y) points")
    area2 = abs((dst[1, 0] - dst[0, 0]) * (dst[2, 1] - dst[0, 1])
                - (dst[2, 0] - dst[0, 0]) * (dst[1, 1] - dst[0, 1]))
    scale = max(1.0, float(np.abs(dst).max()))
    if area2 <= 1e-12 * scale * scale:
        raise DegenerateTriangleError(f"collinear destination triangle: {dst.tolist()}")
    m = np.column_stack([dst, np.ones(3)])
    ax, ay = np.linalg.solve(m, src[:, 0]), np.linalg.solve(m, src[:, 1])
    params = AffineParams(a1=ax[0], a2=ax[1], c1=ax[2],
                          b1=ay[0], b2=ay[1], c2=ay[2])
    got = np.column_stack(params.apply(dst[:, 0], dst[:, 1]))
    resid = np.abs(got - src).max()
    if resid >= 1e-9:
        raise DegenerateTriangleError(
            f"affine solve residual {resid:g} too large (near-degenerate triangle)")
    return params


def _incircle_det(a, b, c, d):
    """Determinant whose magnitude ~0 iff a, b, c, d are cocircular."""
    rows = []
    for p in (a, b, c):
        px, py = p[0] - d[0], p[1] - d[1]
        rows.append([px, py, px * px + py * py])
    return float(np.linalg.det(np.array(rows)))


def _canonical_diagonal(points, quad):
    """Preferred diagonal of a cocircular quad: lowest to highest x + y."""
    s = points[quad, 0] + points[quad, 1]
    return quad[int(np.argmin(s))], quad[int(np.argmax(s))]


def _triangulate(points):
    """Delaunay triangles of the displaced points, deterministically ordered.

    Cocircular quads (always the case for the undisplaced rectangular
    grid) are split along the diagonal running from their lower-left to
    their upper-right point, so the triangulation does not depend on how
    the underlying library breaks the tie.
    """
    try:
        simplices = Delaunay(points).simplices.copy()
    except QhullError as exc:
        raise DegenerateTriangleError(f"cannot triangulate control points: {exc}") from exc
    extent = max(1.0, float(np.abs(points).max()))
    tol = 1e-8 * extent ** 4
    edges = {}
    for t, tri in enumerate(simplices):
        for k in range(3):
            e = tuple(sorted((tri[k], tri[(k + 1) % 3])))
            edges.setdefault(e, []).append(t)
    for (p, q), tris in edges.items():
        if len(tris) != 2:
            continue
        t1, t2 = tris
        # an earlier flip may have retired this edge
        if not ({p, q} <= set(simplices[t1]) and {p, q} <= set(simplices[t2])):
            continue
        r1 = int(simplices[t1][~np.isin(simplices[t1], (p, q))][0])
        r2 = int(simplices[t2][~np.isin(simplices[t2], (p, q))][0])
        quad = [p, q, r1, r2]
        if abs(_incircle_det(*points[[p, q, r1, r2]])) > tol:
            continue
        d0, d1 = _canonical_diagonal(points, quad)
        if {d0, d1} == {r1, r2}:  # flip to the canonical diagonal
            simplices[t1] = [d0, d1, p]
            simplices[t2] = [d0, d1, q]
    simplices = np.sort(simplices, axis=1)
    order = np.lexsort((simplices[:, 2], simplices[:, 1], simplices[:, 0]))
    return simplices[order]


def _triangle_areas(points, triangles):
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    return 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                        - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))


def build_piecewise_warp(height, width, src_points, dst_points):
    """Triangulate dst_points and solve the per-triangle pull-back maps."""
    src = np.asarray(src_points, dtype=np.float64)
    dst = np.asarray(dst_points, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise DimensionMismatchError(
            f"need matching (n, 2) point arrays, got {src.shape} and {dst.shape}")
    triangles = _triangulate(dst)
    params = tuple(solve_affine(src[tri], dst[tri]) for tri in triangles)
    return PiecewiseWarp(height=int(height), width=int(width), src_points=src,
                         dst_points=dst, triangles=triangles, params=params)


def grid_points(height, width, grid):
    """Regular (x, y) control-point grid over the image, row by row."""
    gy, gx = grid
    ys = np.linspace(0.0, height - 1.0, gy)
    xs = np.linspace(0.0, width - 1.0, gx)
    return np.array([(x, y) for y in ys for x in xs])


def sample_piecewise_warp(height, width, cfg):
    """Draw a random piecewise affine warp for an image of the given size.

    dst points are the regular grid plus Gaussian noise of std
    sigma_p * side_length per axis, with sigma_p drawn uniformly from
    cfg.sigma_p_range. Draws whose triangulation contains a triangle
    smaller than one square pixel are rejected and redrawn, up to 16
    attempts.
    """
    rng = np.random.default_rng(cfg.seed)
    src = grid_points(height, width, cfg.grid)
    for _ in range(16):
        sigma_p = rng.uniform(*cfg.sigma_p_range)
        noise = rng.normal(0.0, sigma_p, size=src.shape)
        dst = src + noise * np.array([width, height], dtype=np.float64)
        try:
            warp = build_piecewise_warp(height, width, src, dst)
        except DegenerateTriangleError:
            continue
        if _triangle_areas(dst, warp.triangles).min() >= 1.0:
            return warp
    raise SamplingFailureError(
        f"no non-degenerate warp for a {height}x{width} image in 16 draws")


def warp_piecewise(image, warp, interp="bilinear"):
    """Apply a piecewise affine warp (pull-back sampling, edge clamped).

    Each output pixel is located in its containing destination triangle
    (edge pixels go to the lower-indexed triangle) and mapped through that
    triangle's affine parameters to a source location. Pixels outside
    every triangle sample their own coordinates.
    """
    image = np.asarray(image)
    if image.shape != (warp.height, warp.width):
        raise DimensionMismatchError(
            f"image {image.shape} does not match warp "
            f"({warp.height}, {warp.width})")
    yy, xx = np.mgrid[0:warp.height, 0:warp.width].astype(np.float64)
    src_x = xx.copy()
    src_y = yy.copy()
    unassigned = np.ones(image.shape, dtype=bool)
    dst = warp.dst_points
    for tri, params in zip(warp.triangles, warp.params):
        if not unassigned.any():
            break
        (x0, y0), (x1, y1), (x2, y2) = dst[tri]
        det = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2)
        l0 = ((y1 - y2) * (xx - x2) + (x2 - x1) * (yy - y2)) / det
        l1 = ((y2 - y0) * (xx - x2) + (x0 - x2) * (yy - y2)) / det
        l2 = 1.0 - l0 - l1
        eps = 1e-9
        inside = (l0 >= -eps) & (l1 >= -eps) & (l2 >= -eps) & unassigned
        if not inside.any():
            continue
        sx, sy = params.apply(xx[inside], yy[inside])
        src_x[inside] = sx
        src_y[inside] = sy
        unassigned[inside] = False
    return _sample(image, src_y, src_x, interp)


# ---------------------------------------------------------------------------
# dihedral symmetries (flips and right-angle rotations)

DIHEDRAL_CODES = tuple(range(8))


def flip_rotate(image, code):
    """Apply one of the 8 symmetries of the square.

    Codes 0-3 rotate counterclockwise by 90 * code degrees; codes 4-7
    flip horizontally first, then rotate by 90 * (code - 4).
    """
    if code not in DIHEDRAL_CODES:
        raise InvalidArgumentError(f"dihedral code must be 0..7, got {code}")
    out = np.asarray(image)
    if code >= 4:
        out = np.fliplr(out)
    return np.rot90(out, k=code % 4).copy()


def inverse_code(code):
    """Dihedral code undoing ``code``; reflections are their own inverse."""
    if code not in DIHEDRAL_CODES:
        raise InvalidArgumentError(f"dihedral code must be 0..7, got {code}")
    return (4 - code) % 4 if code < 4 else code


# ---------------------------------------------------------------------------
# paired augmentation


def augment_pair(image, mask, pa_cfg=None, elastic_cfg=None,
                 use_flip_rotate=True, seed=0):
    """Augment an image and its mask with one shared random transform chain.

    The chain is flip/rotate, then piecewise affine (when pa_cfg is given),
    then optionally elastic deformation (when elastic_cfg is given; useful
    for comparison studies, not part of the default chain). The image is
    sampled bilinearly and the mask with nearest neighbor, so the mask
    stays binary. All randomness derives from ``seed``; the seeds inside
    the configs are ignored here so one argument pins the whole pair.
    """
    image = np.asarray(image)
    mask = np.asarray(mask)
    if image.shape != mask.shape:
        raise DimensionMismatchError(
            f"image {image.shape} and mask {mask.shape} differ")
    rng = np.random.default_rng(seed)
    code = int(rng.integers(0, 8)) if use_flip_rotate else 0
    pa_seed = int(rng.integers(0, 2 ** 63))
    el_seed = int(rng.integers(0, 2 ** 63))
    img_out = flip_rotate(image, code)
    mask_out = flip_rotate(mask, code)
    if pa_cfg is not None:
        h, w = img_out.shape
        warp = sample_piecewise_warp(h, w, replace(pa_cfg, seed=pa_seed))
        img_out = warp_piecewise(img_out, warp, "bilinear")
        mask_out = warp_piecewise(mask_out, warp, "nearest")
    if elastic_cfg is not None:
        h, w = img_out.shape
        field = sample_elastic_field(h, w, replace(elastic_cfg, seed=el_seed))
        img_out = warp_displacement(img_out, field, "bilinear")
        mask_out = warp_displacement(mask_out, field, "nearest")
    return img_out, mask_out

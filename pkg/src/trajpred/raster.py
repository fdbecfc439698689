"""Agent-centric bird's-eye-view rendering of the static map layers.

Pixel (row, col) has its centre at x = (col - anchor_col) * res,
y = (anchor_row - row) * res, so +x runs right and +y runs up the image.
Polygons are filled by scanline with pixel-centre inclusion; centres lying
exactly on an edge count as inside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Sample

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class RasterConfig:
    height_px: int = 240
    width_px: int = 240
    channels: int = 3
    resolution: float = 0.5
    anchor_row: int = 120
    anchor_col: int = 60
    background: RGB = (0, 0, 0)
    drivable: RGB = (90, 90, 90)
    sidewalk: RGB = (40, 90, 160)
    crosswalk: RGB = (220, 220, 220)
    lane_tail: RGB = (120, 0, 200)
    lane_head: RGB = (255, 200, 0)
    target_box: RGB = (255, 255, 255)
    agent_box: RGB = (0, 200, 255)
    draw_agents: bool = False

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if not (0 <= self.anchor_row < self.height_px and 0 <= self.anchor_col < self.width_px):
            raise ValueError("target anchor must lie inside the image")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height_px, self.width_px, self.channels)


def to_pixel_coords(points: np.ndarray, config: RasterConfig) -> np.ndarray:
    """Continuous (row, col) coordinates; integer values are pixel centres."""
    pts = np.asarray(points, dtype=float)
    rows = config.anchor_row - pts[..., 1] / config.resolution
    cols = config.anchor_col + pts[..., 0] / config.resolution
    return np.stack([rows, cols], axis=-1)


def to_pixels(points: np.ndarray, config: RasterConfig) -> np.ndarray:
    """Integer (row, col) of the pixel containing each point (half-up rounding)."""
    return np.floor(to_pixel_coords(points, config) + 0.5).astype(np.int64)


def in_window(pixels: np.ndarray, config: RasterConfig) -> np.ndarray:
    return ((pixels[..., 0] >= 0) & (pixels[..., 0] < config.height_px)
            & (pixels[..., 1] >= 0) & (pixels[..., 1] < config.width_px))


def _check_finite(points: np.ndarray, what: str) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"non-finite vertex in {what}")
    return pts


def fill_polygon(mask: np.ndarray, polygon: np.ndarray, config: RasterConfig) -> None:
    """OR the pixel-centre coverage of one closed polygon into ``mask`` in place."""
    rc = to_pixel_coords(polygon, config)
    if len(rc) < 3:
        return
    h, w = mask.shape
    r0, c0 = rc[:, 0], rc[:, 1]
    r1, c1 = np.roll(r0, -1), np.roll(c0, -1)
    lo = max(int(np.ceil(rc[:, 0].min())), 0)
    hi = min(int(np.floor(rc[:, 0].max())), h - 1)
    if lo > hi:
        return
    rows = np.arange(lo, hi + 1, dtype=float)[:, None]
    cols = np.arange(w)[None, :]

    # Half-open crossing rule [min, max) keeps the even-odd parity exact at vertices.
    rmin, rmax = np.minimum(r0, r1), np.maximum(r0, r1)
    crosses = (rows >= rmin) & (rows < rmax)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rows - r0) / (r1 - r0)
        xs = np.where(crosses, c0 + t * (c1 - c0), np.inf)
    xs.sort(axis=1)
    n_pairs = int(crosses.sum(axis=1).max()) // 2
    for k in range(n_pairs):
        left, right = xs[:, 2 * k:2 * k + 1], xs[:, 2 * k + 1:2 * k + 2]
        ok = np.isfinite(right)
        mask[lo:hi + 1] |= ok & (cols >= np.ceil(left)) & (cols <= np.floor(right))

    # Pixel centres exactly on an edge (including horizontal edges and the
    # lower vertex the half-open rule skips) belong to the polygon.
    for a, b in zip(rc, np.roll(rc, -1, axis=0)):
        _mark_on_segment(mask, a, b)


def _mark_on_segment(mask: np.ndarray, a: np.ndarray, b: np.ndarray) -> None:
    h, w = mask.shape
    (ra, ca), (rb, cb) = a, b
    if ra == rb:
        if ra == np.floor(ra) and 0 <= ra < h:
            c_lo, c_hi = max(int(np.ceil(min(ca, cb))), 0), min(int(np.floor(max(ca, cb))), w - 1)
            if c_lo <= c_hi:
                mask[int(ra), c_lo:c_hi + 1] = True
        return
    r_lo, r_hi = max(int(np.ceil(min(ra, rb))), 0), min(int(np.floor(max(ra, rb))), h - 1)
    if r_lo > r_hi:
        return
    rows = np.arange(r_lo, r_hi + 1, dtype=float)
    cols = ca + (rows - ra) * (cb - ca) / (rb - ra)
    exact = (cols == np.floor(cols)) & (cols >= 0) & (cols < w)
    mask[rows[exact].astype(int), cols[exact].astype(int)] = True


def polygons_mask(polygons, config: RasterConfig, what: str = "polygon") -> np.ndarray:
    mask = np.zeros((config.height_px, config.width_px), dtype=bool)
    for poly in polygons:
        fill_polygon(mask, _check_finite(poly, what), config)
    return mask


def _draw_polyline(img: np.ndarray, line: np.ndarray, config: RasterConfig) -> None:
    """Draw a directed polyline, blending tail colour into head colour along its length."""
    rc = to_pixel_coords(line, config)
    seg = np.diff(rc, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    total = seg_len.sum()
    if total == 0:
        return
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    n = int(np.ceil(total * 2)) + 1
    along = np.linspace(0.0, total, n)
    pts = np.stack([np.interp(along, cum, rc[:, 0]), np.interp(along, cum, rc[:, 1])], axis=1)
    pix = np.floor(pts + 0.5).astype(np.int64)
    keep = in_window(pix, config)
    frac = (along / total)[:, None]
    colors = (1 - frac) * np.array(config.lane_tail) + frac * np.array(config.lane_head)
    img[pix[keep, 0], pix[keep, 1]] = np.rint(colors[keep]).astype(np.uint8)


def _agent_boxes(sample: Sample):
    for i, track in enumerate(sample.agents()):
        s = track.current
        c, sn = np.cos(s.heading), np.sin(s.heading)
        half_l, half_w = track.info.length / 2, track.info.width / 2
        corners = np.array([[half_l, half_w], [-half_l, half_w], [-half_l, -half_w], [half_l, -half_w]])
        yield i == 0, corners @ np.array([[c, sn], [-sn, c]]) + [s.x, s.y]


def rasterize(sample: Sample, config: RasterConfig = RasterConfig()) -> np.ndarray:
    """Render the sample's map (already in the target frame) as an H x W x 3 uint8 image."""
    img = np.empty(config.shape, dtype=np.uint8)
    img[:] = config.background
    vmap = sample.map
    for polys, color, what in ((vmap.drivable_polygons, config.drivable, "drivable polygon"),
                               (vmap.sidewalks, config.sidewalk, "sidewalk"),
                               (vmap.crosswalks, config.crosswalk, "crosswalk")):
        img[polygons_mask(polys, config, what)] = color
    for line in vmap.lane_centerlines:
        _draw_polyline(img, _check_finite(line, "lane centerline"), config)
    if config.draw_agents:
        for is_target, box in _agent_boxes(sample):
            img[polygons_mask([box], config)] = config.target_box if is_target else config.agent_box
    return img


def drivable_mask(sample: Sample, config: RasterConfig = RasterConfig()) -> np.ndarray:
    """Boolean H x W grid: True where the pixel centre lies inside any drivable polygon."""
    return polygons_mask(sample.map.drivable_polygons, config, "drivable polygon")


def save_png(image: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(path, format="PNG")

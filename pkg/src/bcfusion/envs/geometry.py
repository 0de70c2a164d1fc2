"""Planar geometry for the navigation world: raycasting and clearance."""

from __future__ import annotations

import numpy as np


def boxes_to_segments(boxes: np.ndarray) -> np.ndarray:
    """(B, 4) boxes as (cx, cy, w, h) -> (4B, 4) edge segments."""
    boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)
    if boxes.size == 0:
        return np.zeros((0, 4))
    cx, cy, w, h = boxes.T
    x0, x1 = cx - w / 2, cx + w / 2
    y0, y1 = cy - h / 2, cy + h / 2
    return np.concatenate([
        np.stack([x0, y0, x1, y0], axis=1),
        np.stack([x1, y0, x1, y1], axis=1),
        np.stack([x1, y1, x0, y1], axis=1),
        np.stack([x0, y1, x0, y0], axis=1),
    ])


def ray_ranges(origin, angles, segments, max_range: float) -> np.ndarray:
    """Minimum hit distance per ray against all segments, capped at max_range.

    origin: (2,), angles: (R,) absolute ray angles, segments: (S, 4).
    """
    angles = np.asarray(angles, dtype=float)
    segments = np.asarray(segments, dtype=float).reshape(-1, 4)
    if segments.shape[0] == 0:
        return np.full(angles.shape, max_range)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)     # (R, 2)
    a = segments[:, :2]                                        # (S, 2)
    e = segments[:, 2:] - a                                    # (S, 2)
    ao = a - np.asarray(origin, dtype=float)                   # (S, 2)

    denom = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]   # (R, S)
    cross_ao_e = ao[:, 0] * e[:, 1] - ao[:, 1] * e[:, 0]                    # (S,)
    cross_ao_d = ao[None, :, 0] * d[:, None, 1] - ao[None, :, 1] * d[:, None, 0]

    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_ao_e[None, :] / denom
        u = cross_ao_d / denom
    hit = (np.abs(denom) > 1e-12) & (t > 1e-9) & (u >= 0.0) & (u <= 1.0)
    t = np.where(hit, t, np.inf)
    return np.minimum(t.min(axis=1), max_range)


def point_segment_distance(point, segments: np.ndarray) -> np.ndarray:
    """Distance from one point to each segment, (S,)."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 4)
    if segments.shape[0] == 0:
        return np.full(0, np.inf)
    p = np.asarray(point, dtype=float)
    a = segments[:, :2]
    e = segments[:, 2:] - a
    ee = np.einsum("ij,ij->i", e, e)
    t = np.einsum("ij,ij->i", p - a, e) / np.where(ee > 0, ee, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * e
    return np.linalg.norm(p - closest, axis=1)


def point_box_distance(point, boxes: np.ndarray) -> np.ndarray:
    """Distance from one point to each solid box, (B,); 0 inside a box."""
    boxes = np.asarray(boxes, dtype=float).reshape(-1, 4)
    if boxes.shape[0] == 0:
        return np.full(0, np.inf)
    p = np.asarray(point, dtype=float)
    dx = np.maximum(np.abs(p[0] - boxes[:, 0]) - boxes[:, 2] / 2, 0.0)
    dy = np.maximum(np.abs(p[1] - boxes[:, 1]) - boxes[:, 3] / 2, 0.0)
    return np.hypot(dx, dy)


def clearance(point, segments: np.ndarray, boxes: np.ndarray) -> float:
    """Smallest distance from the point to any obstacle."""
    dists = [np.inf]
    if segments.shape[0]:
        dists.append(point_segment_distance(point, segments).min())
    if boxes.shape[0]:
        dists.append(point_box_distance(point, boxes).min())
    return float(min(dists))

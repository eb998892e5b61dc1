"""Co-monotone and mixed-shape interpolation by pasting per-segment FIFs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_KAPPA,
    FifError,
    FifParameters,
    HermiteData,
    InfeasibleShapeError,
    ShapeClass,
    build_fif,
)
from .estimate import arithmetic_mean_derivatives
from .evaluation import CurveSample, EvalSettings, evaluate, sample_attractor
from .shape import check_shape_parameters, select_parameters


class PiecewiseJoinError(FifError):
    pass


def linear_midpoint(x_left, y_left, x_right, y_right, x_mid):
    return y_left + (y_right - y_left) * (x_mid - x_left) / (x_right - x_left)


@dataclass(frozen=True)
class Segment:
    """Knot range ``start..stop`` (0-based, inclusive) fitted with one shape class."""

    start: int
    stop: int
    shape: ShapeClass
    constant: bool = False
    inserted: tuple = ()


@dataclass(frozen=True)
class SegmentPlan:
    segments: tuple
    transitions: tuple

    def segment_data(self, x, y, d=None) -> list[HermiteData]:
        """Per-segment Hermite data with transition slopes forced to zero.

        Missing derivatives are estimated on the full data set; inserted
        nodes get the three point estimate within their segment.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if d is None:
            d = arithmetic_mean_derivatives(x, y) if len(x) >= 3 else np.full(2, (y[1] - y[0]) / (x[1] - x[0]))
        d = np.array(d, dtype=float)
        d[list(self.transitions)] = 0.0
        for seg in self.segments:
            if seg.constant:
                d[seg.start:seg.stop + 1] = 0.0
        out = []
        for seg in self.segments:
            sx = list(x[seg.start:seg.stop + 1])
            sy = list(y[seg.start:seg.stop + 1])
            sd = list(d[seg.start:seg.stop + 1])
            for nx, ny in seg.inserted:
                k = int(np.searchsorted(sx, nx))
                sx.insert(k, nx)
                sy.insert(k, ny)
                sd.insert(k, np.nan)
            sx, sy, sd = map(np.array, (sx, sy, sd))
            holes = np.flatnonzero(np.isnan(sd))
            if holes.size:
                h = np.diff(sx)
                delta = np.diff(sy) / h
                for k in holes:
                    sd[k] = (h[k] * delta[k - 1] + h[k - 1] * delta[k]) / (h[k - 1] + h[k])
            out.append(HermiteData(sx, sy, sd))
        return out


def _directions(y):
    return np.sign(np.diff(np.asarray(y, dtype=float))).astype(int)


def plan_segments(x, y, annotations: Sequence | None = None, *,
                  node_value: Callable = linear_midpoint) -> SegmentPlan:
    """Split the data into runs of uniform shape.

    Without annotations, maximal monotone runs are detected (equal values
    form constant runs).  ``annotations`` is a sequence of
    ``(x_start, x_end, shape)`` covering the data, each bound on a knot.
    Two-point non-constant segments receive one midpoint node whose value is
    given by ``node_value``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or x.shape != y.shape:
        raise FifError("need at least two knots with matching values")
    if np.any(np.diff(x) <= 0):
        raise FifError("knots must be strictly increasing")
    dirs = _directions(y)
    transitions = tuple(int(k) + 1 for k in np.flatnonzero(dirs[1:] != dirs[:-1]))

    if annotations is None:
        cuts = [0, *transitions, len(x) - 1]
        spans = []
        for s, e in zip(cuts[:-1], cuts[1:]):
            direction = dirs[s]
            shape = (ShapeClass.MONOTONE_DECREASING if direction < 0
                     else ShapeClass.MONOTONE_INCREASING)
            spans.append((s, e, shape))
    else:
        spans = []
        for x0, x1, shape in annotations:
            s = int(np.searchsorted(x, x0))
            e = int(np.searchsorted(x, x1))
            if s >= len(x) or e >= len(x) or x[s] != x0 or x[e] != x1 or e <= s:
                raise FifError(f"annotation [{x0}, {x1}] does not start and end on knots")
            spans.append((s, e, ShapeClass(shape)))
        for (_, e0, _), (s1, _, _) in zip(spans[:-1], spans[1:]):
            if e0 != s1:
                raise FifError("annotations must tile the data with shared endpoints")
        if spans[0][0] != 0 or spans[-1][1] != len(x) - 1:
            raise FifError("annotations must cover the whole data range")

    segments = []
    for s, e, shape in spans:
        constant = bool(np.all(dirs[s:e] == 0))
        inserted = ()
        if e - s == 1 and not constant:
            xm = 0.5 * (x[s] + x[e])
            inserted = ((xm, float(node_value(x[s], y[s], x[e], y[e], xm))),)
        segments.append(Segment(s, e, shape, constant, inserted))
    return SegmentPlan(tuple(segments), transitions)


@dataclass(frozen=True)
class PiecewiseFif:
    plan: SegmentPlan
    pieces: tuple
    breaks: np.ndarray

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        if np.any((x < self.breaks[0]) | (x > self.breaks[-1])):
            raise FifError(f"evaluation points must lie in [{self.breaks[0]}, {self.breaks[-1]}]")
        return np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, len(self.pieces) - 1)

    def _dispatch(self, x, settings, derivative):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        seg = self._locate(x)
        out = np.empty_like(x)
        for k, (segment, fif) in enumerate(zip(self.plan.segments, self.pieces)):
            mask = seg == k
            if not mask.any():
                continue
            if segment.constant:
                out[mask] = 0.0 if derivative else fif.data.y[0]
            else:
                out[mask] = evaluate(fif, x[mask], settings, derivative=derivative).value
        return out

    def value(self, x, settings: EvalSettings | None = None):
        return self._dispatch(x, settings, derivative=False)

    def derivative(self, x, settings: EvalSettings | None = None):
        return self._dispatch(x, settings, derivative=True)

    def sample(self, depth: int) -> CurveSample:
        xs, ys, ds, gen = [], [], [], []
        for k, fif in enumerate(self.pieces):
            s = sample_attractor(fif, depth)
            if self.plan.segments[k].constant:
                s = CurveSample(s.x, np.full_like(s.y, fif.data.y[0]),
                                np.zeros_like(s.x), depth, s.generation)
            cut = slice(1, None) if k else slice(None)
            xs.append(s.x[cut])
            ys.append(s.y[cut])
            ds.append(s.dy[cut])
            gen.append(s.generation[cut])
        return CurveSample(np.concatenate(xs), np.concatenate(ys), np.concatenate(ds),
                           depth, np.concatenate(gen))


def assemble_piecewise(plan: SegmentPlan, data: Sequence[HermiteData],
                       params: Sequence[FifParameters] | None = None, *, t: float = 0.5,
                       kappa: float = DEFAULT_KAPPA) -> PiecewiseFif:
    """Fit each segment and paste the pieces into one C1 model."""
    if len(data) != len(plan.segments):
        raise FifError(f"expected {len(plan.segments)} segment data sets, got {len(data)}")
    for k in range(len(data) - 1):
        left, right = data[k], data[k + 1]
        a = (left.x[-1], left.y[-1], left.d[-1])
        b = (right.x[0], right.y[0], right.d[0])
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            raise PiecewiseJoinError(
                f"segments {k + 1} and {k + 2} disagree at the joint: (x, y, d) {a} vs {b}"
            )

    pieces = []
    for k, (segment, seg_data) in enumerate(zip(plan.segments, data)):
        if segment.constant:
            fif_params = FifParameters(np.zeros(seg_data.intervals),
                                       np.full(seg_data.intervals, 3.0), kappa)
        elif params is None:
            fif_params = select_parameters(seg_data, segment.shape, t, kappa=kappa)
        else:
            fif_params = params[k]
            bad = check_shape_parameters(seg_data, fif_params, segment.shape)
            if bad:
                raise InfeasibleShapeError(
                    segment.shape, [f"segment {k + 1}: {v.message}" for v in bad])
        pieces.append(build_fif(seg_data, fif_params))
    breaks = np.array([p.data.x[0] for p in pieces] + [pieces[-1].data.x[-1]])
    return PiecewiseFif(plan, tuple(pieces), breaks)

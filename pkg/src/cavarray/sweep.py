"""Transmission (and stability) scans over one- and two-dimensional grids.

Grid cells are independent and may be evaluated by a process pool; results
are always assembled in row-major order with the first axis outermost, so
the output does not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .errors import BandEdge, EigenFailure, PoleAtResonance
from .model import ModelParams
from .scattering import ScatterOptions, TransmissionRoot, candidate_roots
from .stability import DEFAULT_TOL, StabilityReport, root_stability

AXIS_NAMES = ("k", "g", "J", "xi", "omega", "Omega")
REASONS = ("ok", "no_root", "band_edge", "pole", "residual_fail")
WORKERS_ENV = "CAVARRAY_WORKERS"


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    steps: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"axis {self.name}: steps must be an integer >= 2, got {self.steps!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError(f"axis {self.name}: bounds must be finite")
        if self.start == self.stop:
            raise ValueError(f"axis {self.name}: start and stop must differ")
        if self.spacing != "linear":
            raise ValueError(f"axis {self.name}: only linear spacing is supported")
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def open_interval(cls, name: str, lo: float, hi: float, steps: int) -> "Axis":
        """``steps`` evenly spaced interior points of (lo, hi), endpoints excluded."""
        h = (hi - lo) / (steps + 1)
        return cls(name, lo + h, hi - h, steps)

    @classmethod
    def midpoints(cls, name: str, lo: float, hi: float, steps: int) -> "Axis":
        """Centres of ``steps`` equal cells of (lo, hi)."""
        h = (hi - lo) / steps
        return cls(name, lo + h / 2, hi - h / 2, steps)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Cell:
    """One grid point: coordinates, admissible roots and optional stability reports."""

    index: tuple[int, ...]
    coords: dict
    roots: list[TransmissionRoot]
    reason: str = "ok"
    stability: list[StabilityReport | None] | None = None
    stability_errors: list[str | None] | None = None

    @property
    def s2(self) -> list[float]:
        return [rt.s2 for rt in self.roots]


@dataclass
class SweepGrid:
    axes: list[Axis]
    cells: list[Cell]
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.steps for ax in self.axes)

    def cell(self, *index: int) -> Cell:
        return self.cells[int(np.ravel_multi_index(index, self.shape))]

    def reasons(self) -> np.ndarray:
        return np.array([c.reason for c in self.cells]).reshape(self.shape)

    def branch_field(self, which: str = "max") -> np.ndarray:
        """Per-cell max or min branch |s|^2, NaN where the cell is empty."""
        pick = {"max": max, "min": min}[which]
        out = [pick(c.s2) if c.roots else np.nan for c in self.cells]
        return np.array(out, dtype=float).reshape(self.shape)

    @property
    def has_stability(self) -> bool:
        return any(c.stability is not None for c in self.cells)

    def to_csv(self, extra_metadata: dict | None = None) -> str:
        meta = dict(self.metadata)
        if extra_metadata:
            meta.update(extra_metadata)
        buf = io.StringIO()
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        buf.write("# rows: row-major over axes, first axis outermost; "
                  "one row per branch, empty cells have branch -1\n")
        w = csv.writer(buf, lineterminator="\n")
        stab = self.has_stability
        header = [ax.name for ax in self.axes] + [
            "branch", "re_s", "im_s", "s2", "residual_1", "residual_2", "valid", "reason"]
        if stab:
            header += ["max_im", "stable"]
        w.writerow(header)
        for c in self.cells:
            lead = [_fmt(c.coords[ax.name]) for ax in self.axes]
            if not c.roots:
                row = lead + ["-1"] + ["nan"] * 5 + ["0", c.reason]
                if stab:
                    row += ["nan", "nan"]
                w.writerow(row)
                continue
            for i, rt in enumerate(c.roots):
                row = lead + [str(rt.branch), _fmt(rt.s.real), _fmt(rt.s.imag), _fmt(rt.s2),
                              _fmt(rt.residual[0]), _fmt(rt.residual[1]),
                              "1" if rt.valid else "0", c.reason]
                if stab:
                    rep = c.stability[i] if c.stability else None
                    row += ([_fmt(rep.max_im), "1" if rep.stable else "0"]
                            if rep is not None else ["nan", "nan"])
                w.writerow(row)
        return buf.getvalue()

    def to_json(self, extra_metadata: dict | None = None) -> str:
        meta = dict(self.metadata)
        if extra_metadata:
            meta.update(extra_metadata)
        cells = []
        for c in self.cells:
            d = {"index": list(c.index), "coords": c.coords, "reason": c.reason,
                 "roots": [{"branch": rt.branch, "s": [rt.s.real, rt.s.imag], "s2": rt.s2,
                            "residual": list(rt.residual), "valid": rt.valid,
                            "multiplicity": rt.multiplicity} for rt in c.roots]}
            if c.stability is not None:
                d["stability"] = [rep.to_dict() if rep is not None else None
                                  for rep in c.stability]
            cells.append(d)
        return json.dumps({"metadata": meta, "axes": [ax.to_dict() for ax in self.axes],
                           "cells": cells}, sort_keys=True)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def _cell_params(params: ModelParams, k: float | None, coords: dict):
    over = {name: v for name, v in coords.items() if name != "k"}
    p = replace(params, **over) if over else params
    return p, coords.get("k", k)


def _solve_cell(task) -> Cell:
    params, k, index, coords, opts, with_stab, tol = task
    p, kk = _cell_params(params, k, coords)
    try:
        cands = candidate_roots(p, kk, opts)
    except BandEdge:
        return Cell(index, coords, [], "band_edge")
    except PoleAtResonance:
        return Cell(index, coords, [], "pole")
    roots = [rt for rt in cands if rt.valid]
    roots = [replace(rt, branch=i) for i, rt in enumerate(roots)]
    if not roots:
        return Cell(index, coords, [], "residual_fail" if cands else "no_root")
    cell = Cell(index, coords, roots)
    if with_stab:
        _attach_stability(cell, p, kk, opts, tol)
    return cell


def _attach_stability(cell: Cell, p: ModelParams, k: float, opts, tol) -> None:
    reports, errors = [], []
    for rt in cell.roots:
        try:
            reports.append(root_stability(p, k, rt, opts, tol))
            errors.append(None)
        except (EigenFailure, PoleAtResonance, ValueError) as exc:
            reports.append(None)
            errors.append(f"{type(exc).__name__}: {exc}")
    cell.stability = reports
    cell.stability_errors = errors


def _run(tasks: list, workers: int | None) -> list[Cell]:
    nw = worker_count(workers)
    if nw == 1 or len(tasks) < 2:
        return [_solve_cell(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * nw))
    with ProcessPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(_solve_cell, tasks, chunksize=chunk))


def _metadata(params, opts, axes, k, stability, tol) -> dict:
    meta = {"artifact": "cavarray", "version": __version__, "params": params.to_dict(),
            "scatter": opts.to_dict(), "axes": [ax.to_dict() for ax in axes],
            "order": "row-major, first axis outermost"}
    if k is not None:
        meta["k"] = k
    if stability:
        meta["stability_tolerance"] = tol
    return meta


def _sweep(params, axes, opts, k, workers, stability, tol) -> SweepGrid:
    names = [ax.name for ax in axes]
    if len(set(names)) != len(names):
        raise ValueError(f"axis names must be distinct, got {names}")
    if "k" not in names and k is None:
        raise ValueError("k must be given when it is not a sweep axis")
    vals = [ax.values() for ax in axes]
    tasks = []
    for index in itertools.product(*(range(ax.steps) for ax in axes)):
        coords = {ax.name: float(vals[a][i]) for a, (ax, i) in enumerate(zip(axes, index))}
        tasks.append((params, k, index, coords, opts, stability, tol))
    cells = _run(tasks, workers)
    return SweepGrid(list(axes), cells, _metadata(params, opts, axes, k, stability, tol))


def sweep1d(params: ModelParams, axis: Axis, opts: ScatterOptions = ScatterOptions(),
            k: float | None = None, workers: int | None = None,
            stability: bool = False, tolerance: float = DEFAULT_TOL) -> SweepGrid:
    """Transmission roots along one axis.

    Solver failures (band edge, pole) become empty cells with a reason code.
    ``k`` is required unless the axis itself is ``k``.
    """
    return _sweep(params, [axis], opts, k, workers, stability, tolerance)


def sweep2d(params: ModelParams, axis_a: Axis, axis_b: Axis,
            opts: ScatterOptions = ScatterOptions(), k: float | None = None,
            workers: int | None = None, stability: bool = False,
            tolerance: float = DEFAULT_TOL) -> SweepGrid:
    """Row-major scan over (axis_a, axis_b), axis_a outermost."""
    return _sweep(params, [axis_a, axis_b], opts, k, workers, stability, tolerance)


def sweep_stability(grid: SweepGrid, params: ModelParams,
                    opts: ScatterOptions = ScatterOptions(), k: float | None = None,
                    tolerance: float = DEFAULT_TOL) -> SweepGrid:
    """Attach a StabilityReport to every root of every non-empty cell."""
    if k is None:
        k = grid.metadata.get("k")
    names = [ax.name for ax in grid.axes]
    if "k" not in names and k is None:
        raise ValueError("k must be given when it is not a sweep axis")
    cells = []
    for c in grid.cells:
        new = Cell(c.index, dict(c.coords), list(c.roots), c.reason)
        if c.roots:
            p, kk = _cell_params(params, k, c.coords)
            _attach_stability(new, p, kk, opts, tolerance)
        cells.append(new)
    meta = dict(grid.metadata)
    meta["stability_tolerance"] = tolerance
    return SweepGrid(list(grid.axes), cells, meta)


def read_sweep_csv(text: str) -> tuple[dict, list[dict]]:
    """Parse sweep CSV text into (metadata, rows)."""
    lines = text.splitlines()
    meta = json.loads(lines[0][1:].strip()) if lines and lines[0].startswith("#") else {}
    body = [ln for ln in lines if not ln.startswith("#")]
    return meta, list(csv.DictReader(body))

"""Maximal and mean-oscillation operators, dyadic and geometric.

Dyadic variants act on piecewise-constant fields through exact block
averages.  Geometric variants act on grid functions: shape averages are
node-counting quadratures over balls, half balls, forward-in-time cylinders
``[t, t + r^2) x B_r`` and half cylinders, with shapes clipped to the grid
box.  For every radius the per-center averages come from one FFT window sum
and the sup over shapes containing a node from one running maximum filter,
so results are identical to the brute-force definition up to FFT rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .calculus import Grid, GridFunction
from .filtration import DiscreteField, level_average_values

# Cells per pairwise chunk in the generic double-average path.
_PAIR_CHUNK = 1 << 22


# ---------------------------------------------------------------------------
# dyadic operators

def dyadic_maximal(f: DiscreteField, m: int | None = None) -> DiscreteField:
    """Pointwise sup of ``|f|`` cell averages over levels ``<= m``
    (the whole materialized range when ``m`` is absent)."""
    filt = f.filtration
    top = filt.spec.n_max if m is None else min(m, filt.spec.n_max)
    if top < filt.spec.n_min:
        raise ValueError(f"level cap {m} lies below the coarsest level {filt.spec.n_min}")
    absf = abs(f)
    out = np.full(filt.shape, -np.inf)
    for n in range(filt.spec.n_min, top + 1):
        np.maximum(out, level_average_values(absf, n), out=out)
    return DiscreteField(filt, out)


def _pair_mean_sorted(blocks: np.ndarray) -> np.ndarray:
    # mean over ordered value pairs of |v_i - v_j|, via the sorted identity
    m = blocks.shape[1]
    v = np.sort(blocks, axis=1)
    coeff = 2.0 * np.arange(m) - (m - 1)
    return 2.0 * (v * coeff).sum(axis=1) / (m * m)


def _pair_mean_power(blocks: np.ndarray, gamma: float) -> np.ndarray:
    m = blocks.shape[1]
    out = np.empty(blocks.shape[0])
    step = max(1, _PAIR_CHUNK // (m * m))
    for a in range(0, blocks.shape[0], step):
        part = blocks[a:a + step]
        diff = np.abs(part[:, :, None] - part[:, None, :]) ** gamma
        out[a:a + step] = diff.sum(axis=(1, 2)) / (m * m)
    return out


def dyadic_sharp(u: DiscreteField, gamma: float, m: int) -> DiscreteField:
    """Largest mean oscillation over cells of levels ``>= m`` containing the
    point: per cell, the double average of ``|u(y) - u(z)|**gamma`` over its
    finest subcells, raised to ``1/gamma``."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    filt = u.filtration
    if m > filt.spec.n_max:
        raise ValueError(f"level floor {m} lies above the finest level {filt.spec.n_max}")
    start = max(m, filt.spec.n_min)
    out = np.zeros(filt.shape)
    for n in range(start, filt.spec.n_max + 1):
        factors = filt.block_factors(n)
        shape = []
        for size, fct in zip(filt.shape, factors):
            shape.extend((size // fct, fct))
        perm = list(range(0, 2 * filt.ndim, 2)) + list(range(1, 2 * filt.ndim, 2))
        blocks = u.values.reshape(shape).transpose(perm).reshape(filt.cell_count(n), -1)
        if gamma == 1.0:
            per_cell = _pair_mean_sorted(blocks)
        else:
            per_cell = _pair_mean_power(blocks, gamma) ** (1.0 / gamma)
        np.maximum(out, _expand_cells(per_cell, filt, n), out=out)
    return DiscreteField(filt, out)


def _expand_cells(per_cell: np.ndarray, filt, n: int) -> np.ndarray:
    factors = filt.block_factors(n)
    coarse = per_cell.reshape(tuple(s // f for s, f in zip(filt.shape, factors)))
    for ax, f in enumerate(factors):
        if f > 1:
            coarse = np.repeat(coarse, f, axis=ax)
    return coarse


# ---------------------------------------------------------------------------
# geometric shape families

_SHAPES = ("ball", "half_ball", "cylinder", "half_cylinder")


@dataclass(frozen=True)
class GeometricFamily:
    """Shapes centered at every grid node with radii from a finite ladder."""

    shape: str
    radii: tuple[float, ...]

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not self.radii or any(r <= 0 for r in self.radii):
            raise ValueError("radius ladder must be nonempty and positive")


def default_radii(grid: Grid, r_min: float | None = None, r_max: float | None = None,
                  ratio: float = np.sqrt(2.0)) -> tuple[float, ...]:
    """Geometric radius ladder from about two spacings up to the box size."""
    hs = [grid.spacing(ax) for ax in grid.space_axes]
    sides = [grid.hi[ax] - grid.lo[ax] for ax in grid.space_axes]
    lo = 2.05 * max(hs) if r_min is None else r_min
    hi = max(sides) if r_max is None else r_max
    radii = []
    r = lo
    while r < hi * (1 + 1e-12):
        radii.append(r)
        r *= ratio
    if not radii:
        raise ValueError("empty radius ladder; box is smaller than two spacings")
    return tuple(radii)


def family_for_grid(grid: Grid, radii=None, **kw) -> GeometricFamily:
    if grid.time_axis:
        shape = "half_cylinder" if grid.half_axis is not None else "cylinder"
    else:
        shape = "half_ball" if grid.half_axis is not None else "ball"
    return GeometricFamily(shape, tuple(radii) if radii is not None else default_radii(grid, **kw))


def _shape_offsets(grid: Grid, family: GeometricFamily, r: float) -> np.ndarray:
    """Boolean window mask of index offsets, odd-sized and centered; for
    cylinders the time support sits on the forward side only."""
    cyl = family.shape in ("cylinder", "half_cylinder")
    if cyl and not grid.time_axis:
        raise ValueError("cylinder shapes need a time axis")
    if not cyl and grid.time_axis:
        raise ValueError("ball shapes cannot run on a time grid")
    sp = grid.space_axes
    ks = [int(np.floor(r / grid.spacing(ax) * (1 - 1e-12))) for ax in sp]
    if cyl:
        kt = int(np.ceil(r * r / grid.spacing(0) * (1 - 1e-12))) - 1
        kt = max(kt, 0)
        dims = [2 * kt + 1] + [2 * k + 1 for k in ks]
        grids = np.meshgrid(*(np.arange(-(s // 2), s // 2 + 1) for s in dims), indexing="ij")
        off_t = grids[0] * grid.spacing(0)
        space2 = sum((grids[1 + i] * grid.spacing(ax)) ** 2 for i, ax in enumerate(sp))
        mask = (space2 < r * r) & (off_t >= 0) & (off_t < r * r)
    else:
        dims = [2 * k + 1 for k in ks]
        grids = np.meshgrid(*(np.arange(-(s // 2), s // 2 + 1) for s in dims), indexing="ij")
        space2 = sum((grids[i] * grid.spacing(ax)) ** 2 for i, ax in enumerate(sp))
        mask = space2 < r * r
    return mask


def _window_sum(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # correlation: out[c] = sum over offsets o in mask of values[c + o]
    kernel = mask.astype(np.float64)[tuple(slice(None, None, -1) for _ in mask.shape)]
    return signal.fftconvolve(values, kernel, mode="same")


def _covering_max(per_center: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # out[x] = max over centers c with x inside shape(c); c - x ranges over
    # the reflected window
    foot = mask[tuple(slice(None, None, -1) for _ in mask.shape)]
    return ndimage.maximum_filter(per_center, footprint=foot, mode="constant", cval=-np.inf)


def _radius_subset(family: GeometricFamily, rho: float | None, mode: str) -> list[float]:
    if mode == "all":
        radii = list(family.radii)
    elif mode == "at_least":
        if rho is None:
            raise ValueError("mode 'at_least' needs a radius floor")
        radii = [r for r in family.radii if r >= rho * (1 - 1e-12)]
    elif mode == "at_most":
        if rho is None:
            raise ValueError("mode 'at_most' needs a radius cap")
        radii = [r for r in family.radii if r <= rho * (1 + 1e-12)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not radii:
        raise ValueError(f"no family radii pass the {mode} filter at {rho}")
    return radii


def geometric_maximal(h: GridFunction, family: GeometricFamily, rho: float | None = None,
                      mode: str = "all") -> GridFunction:
    """Sup over shapes containing the node of the node-counting average of
    ``|h|``; ``mode='at_least'`` keeps only radii ``>= rho``."""
    if h.channels:
        raise ValueError("geometric maximal expects a scalar grid function")
    out = np.full(h.grid.shape, -np.inf)
    absv = np.abs(h.values)
    ones = np.ones_like(absv)
    for r in _radius_subset(family, rho, mode):
        mask = _shape_offsets(h.grid, family, r)
        counts = np.rint(_window_sum(ones, mask))
        avg = np.maximum(_window_sum(absv, mask), 0.0) / counts
        np.maximum(out, _covering_max(avg, mask), out=out)
    return GridFunction(h.grid, out)


def _overlap_slices(shape, oi, oj):
    src_i, src_j, dst = [], [], []
    for size, a, b in zip(shape, oi, oj):
        lo = max(0, -a, -b)
        hi = min(size, size - a, size - b)
        if hi <= lo:
            return None
        src_i.append(slice(lo + a, hi + a))
        src_j.append(slice(lo + b, hi + b))
        dst.append(slice(lo, hi))
    return tuple(src_i), tuple(src_j), tuple(dst)


def geometric_sharp(h: GridFunction, family: GeometricFamily, gamma: float,
                    rho: float, pair_budget: int = 4096, seed: int = 0) -> GridFunction:
    """Sup over shapes of radius ``<= rho`` containing the node of the double
    average of ``|h(y) - h(z)|**gamma`` over shape nodes, to the ``1/gamma``.

    Exact over all node pairs while the unordered pair count stays within
    ``pair_budget``; beyond that a seeded uniform pair sample is used and the
    budget is recorded on the result.  Vector or matrix channels are compared
    in the entrywise-l2 metric.
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if pair_budget < 1:
        raise ValueError("pair budget must be positive")
    grid = h.grid
    vals = h.values.reshape(grid.shape + (-1,))
    nchan = vals.shape[-1]
    rng = np.random.default_rng(seed)
    out = np.full(grid.shape, -np.inf)
    ones = np.ones(grid.shape)
    subsampled = False
    for r in _radius_subset(family, rho, "at_most"):
        mask = _shape_offsets(grid, family, r)
        counts = np.rint(_window_sum(ones, mask))
        offsets = np.argwhere(mask) - (np.array(mask.shape) - 1) // 2
        m = len(offsets)
        if m * (m - 1) // 2 <= pair_budget:
            pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        else:
            # uniform ordered pairs with replacement; the diagonal is excluded
            # by rejection and restored through the nondiag/ordered factor
            picks, need = [], pair_budget
            while need > 0:
                ii = rng.integers(0, m, size=2 * need)
                jj = rng.integers(0, m, size=2 * need)
                keep = ii != jj
                take = min(need, int(keep.sum()))
                picks.append(np.stack([ii[keep][:take], jj[keep][:take]], axis=1))
                need -= take
            pairs = np.concatenate(picks)
            subsampled = True
        acc = np.zeros(grid.shape)
        cnt = np.zeros(grid.shape)
        for i, j in pairs:
            sl = _overlap_slices(grid.shape, offsets[i], offsets[j])
            if sl is None:
                continue
            si, sj, dst = sl
            diff = vals[si] - vals[sj]
            mag = np.sqrt(np.einsum("...c,...c->...", diff, diff)) if nchan > 1 \
                else np.abs(diff[..., 0])
            acc[dst] += mag ** gamma
            cnt[dst] += 1.0
        ordered = counts * counts
        nondiag = ordered - counts
        with np.errstate(invalid="ignore", divide="ignore"):
            per_center = np.where(cnt > 0, acc / np.maximum(cnt, 1.0) * nondiag / ordered, 0.0)
        np.maximum(out, _covering_max(per_center ** (1.0 / gamma), mask), out=out)
    result = GridFunction(grid, out)
    result.pair_budget = pair_budget
    result.subsampled = subsampled
    return result

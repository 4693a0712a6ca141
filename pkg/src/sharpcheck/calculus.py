"""Grid functions, finite differences, operator families, manufactured inputs.

Vertex-centered uniform grids over boxes, optionally with a leading time axis
(independent spacing) and a half-space axis clipped at 0.  Derivatives use
second-order central stencils inside and second-order one-sided stencils at
faces, so they are exact on quadratics.  Operators act on Hessian fields:
linear trace forms, Bellman suprema over coefficient families, the extremal
operators with eigenvalue bounds ``[delta, 1/delta]``, and tabulated
callables.  The oscillation functional measures the averaged distance of an
x-dependent operator from a given x-independent model over a shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Grid:
    """Uniform vertex-centered grid on a box.

    ``time_axis`` marks axis 0 as time (excluded from spatial derivatives);
    ``half_axis`` marks the axis whose lower face lies on the boundary
    hyperplane {coordinate = 0}.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    shape: tuple[int, ...]
    time_axis: bool = False
    half_axis: int | None = None

    def __post_init__(self):
        if not (len(self.lo) == len(self.hi) == len(self.shape)):
            raise ValueError("lo, hi, shape must have one entry per axis")
        if any(n < 2 for n in self.shape):
            raise ValueError("grids need at least 2 nodes per axis")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError("degenerate box")
        if self.half_axis is not None and self.lo[self.half_axis] < 0:
            raise ValueError("half-space grid must satisfy lo >= 0 on the clipped axis")
        if self.time_axis and self.lo[0] < 0:
            raise ValueError("time axis starts at t >= 0")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def space_axes(self) -> tuple[int, ...]:
        return tuple(range(1, self.ndim)) if self.time_axis else tuple(range(self.ndim))

    @property
    def n_space(self) -> int:
        return len(self.space_axes)

    def spacing(self, axis: int) -> float:
        return (self.hi[axis] - self.lo[axis]) / (self.shape[axis] - 1)

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(self.spacing(ax) for ax in range(self.ndim))

    def axis_nodes(self, axis: int) -> np.ndarray:
        return np.linspace(self.lo[axis], self.hi[axis], self.shape[axis])

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape ``(*shape, ndim)``."""
        mesh = np.meshgrid(*(self.axis_nodes(ax) for ax in range(self.ndim)), indexing="ij")
        return np.stack(mesh, axis=-1)

    def flat_nodes(self) -> np.ndarray:
        return self.nodes().reshape(-1, self.ndim)


def box_grid(lo, hi, shape, time_axis=False, half_axis=None) -> Grid:
    return Grid(tuple(map(float, lo)), tuple(map(float, hi)), tuple(int(n) for n in shape),
                time_axis=time_axis, half_axis=half_axis)


@dataclass
class GridFunction:
    """Node samples of a function on a :class:`Grid`.

    ``values`` may carry trailing channel axes beyond the grid shape
    (vector or matrix valued samples).
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        g = self.grid.shape
        if self.values.shape[:len(g)] != g:
            raise ValueError(f"values shape {self.values.shape} does not start with grid {g}")

    @property
    def channels(self) -> tuple[int, ...]:
        return self.values.shape[self.grid.ndim:]

    def boundary_trace(self) -> np.ndarray:
        """Values on the clipped boundary face {coordinate = 0}."""
        ax = self.grid.half_axis
        if ax is None:
            raise ValueError("grid has no half-space axis")
        if self.grid.lo[ax] != 0.0:
            raise ValueError("grid does not touch the boundary hyperplane")
        return np.take(self.values, 0, axis=ax)


def grid_to_csv(f: GridFunction) -> str:
    import io
    buf = io.StringIO()
    ndim = f.grid.ndim
    buf.write(",".join(f"i{ax}" for ax in range(ndim)) + ",value\n")
    flat = f.values.reshape(-1, *f.channels)
    for idx, val in zip(np.ndindex(*f.grid.shape), flat):
        if np.ndim(val) == 0:
            cell = repr(float(val))
        else:
            cell = ";".join(repr(float(c)) for c in np.ravel(val))
        buf.write(",".join(str(i) for i in idx) + f",{cell}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# finite differences

def _diff1(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    n = values.shape[axis]
    if n < 3:
        raise ValueError("first derivative needs at least 3 nodes per axis")
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _diff2(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    n = values.shape[axis]
    if n < 3:
        raise ValueError("second derivative needs at least 3 nodes per axis")
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    if n >= 4:
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
        out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    else:
        out[0] = out[-1] = (v[0] - 2.0 * v[1] + v[2]) / (h * h)
    return np.moveaxis(out, 0, axis)


@dataclass
class Derivatives:
    """Gradient, Hessian and (optionally) time derivative on a grid."""

    grid: Grid
    du: np.ndarray           # (*shape, n_space)
    d2u: np.ndarray          # (*shape, n_space, n_space), exactly symmetric
    dt: np.ndarray | None    # (*shape) on time grids


def fd_derivatives(u: GridFunction) -> Derivatives:
    """Second-order finite differences of a scalar grid function.

    Mixed entries are nested one-dimensional first differences, applied along
    distinct axes, so the Hessian is symmetric to the last bit.
    """
    if u.channels:
        raise ValueError("derivatives expect a scalar grid function")
    g = u.grid
    sp = g.space_axes
    ds = len(sp)
    du = np.empty(g.shape + (ds,))
    d2u = np.empty(g.shape + (ds, ds))
    firsts = []
    for a, ax in enumerate(sp):
        d1 = _diff1(u.values, ax, g.spacing(ax))
        firsts.append(d1)
        du[..., a] = d1
        d2u[..., a, a] = _diff2(u.values, ax, g.spacing(ax))
    for a in range(ds):
        for b in range(a + 1, ds):
            mixed = _diff1(firsts[a], sp[b], g.spacing(sp[b]))
            d2u[..., a, b] = mixed
            d2u[..., b, a] = mixed
    dt = _diff1(u.values, 0, g.spacing(0)) if g.time_axis else None
    return Derivatives(g, du, d2u, dt)


def frobenius(H: np.ndarray) -> np.ndarray:
    """Entrywise-l2 matrix magnitude over the trailing two axes."""
    return np.sqrt(np.einsum("...ij,...ij->...", H, H))


def symmetrize(H: np.ndarray) -> np.ndarray:
    return 0.5 * (H + np.swapaxes(H, -1, -2))


# ---------------------------------------------------------------------------
# operators on Hessians

def pucci_extremal(H: np.ndarray, delta: float, side: str = "max") -> np.ndarray:
    """Extremal value of the trace form over coefficient matrices with
    eigenvalues in ``[delta, 1/delta]``; closed form through eigenvalues."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    w = np.linalg.eigvalsh(np.asarray(H, dtype=np.float64))
    pos = np.clip(w, 0.0, None).sum(axis=-1)
    neg = np.clip(w, None, 0.0).sum(axis=-1)
    if side == "max":
        return pos / delta + neg * delta
    if side == "min":
        return pos * delta + neg / delta
    raise ValueError(f"side must be 'max' or 'min', got {side!r}")


def _coeff_at(coeff, X: np.ndarray, ds: int) -> np.ndarray:
    if callable(coeff):
        A = np.asarray(coeff(X), dtype=np.float64)
    else:
        A = np.asarray(coeff, dtype=np.float64)
    if A.shape == (ds, ds):
        A = np.broadcast_to(A, (X.shape[0], ds, ds))
    if A.shape != (X.shape[0], ds, ds):
        raise ValueError(f"coefficient evaluated to shape {A.shape}, expected (n, {ds}, {ds})")
    return A


@dataclass
class Operator:
    """Second-order operator acting on Hessians, optionally x-dependent.

    kind: ``linear`` (trace form), ``bellman`` (max of trace forms),
    ``pucci_max`` / ``pucci_min`` (extremal), ``tabulated`` (callable).
    ``k_f`` is the advertised Lipschitz bound in the Frobenius metric;
    ``tau0`` and ``r0`` are the oscillation scale parameters carried along
    with the operator; ``homogeneous`` advertises positive 1-homogeneity.
    """

    kind: str
    delta: float
    coeff: object = None
    family: tuple = ()
    fn: Callable | None = None
    k_f: float | None = None
    r0: float = 1.0
    tau0: float = 0.0
    homogeneous: bool = True

    def __post_init__(self):
        if self.kind not in ("linear", "bellman", "pucci_max", "pucci_min", "tabulated"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.kind == "bellman" and not self.family:
            raise ValueError("bellman operator needs a nonempty coefficient family")
        if self.kind == "tabulated" and self.fn is None:
            raise ValueError("tabulated operator needs a callable")

    def __call__(self, H: np.ndarray, X: np.ndarray | None = None) -> np.ndarray:
        """Evaluate at Hessians ``H`` of shape ``(n, ds, ds)`` and points
        ``X`` of shape ``(n, ndim)`` (ignored by x-independent kinds)."""
        H = np.asarray(H, dtype=np.float64)
        n, ds = H.shape[0], H.shape[-1]
        if X is None:
            X = np.zeros((n, ds))
        if self.kind == "linear":
            return np.einsum("nij,nij->n", _coeff_at(self.coeff, X, ds), H)
        if self.kind == "bellman":
            vals = np.stack([np.einsum("nij,nij->n", _coeff_at(c, X, ds), H)
                             for c in self.family])
            return vals.max(axis=0)
        if self.kind == "pucci_max":
            return pucci_extremal(H, self.delta, "max")
        if self.kind == "pucci_min":
            return pucci_extremal(H, self.delta, "min")
        return np.asarray(self.fn(H, X), dtype=np.float64)


def linear_operator(coeff, delta: float, **kw) -> Operator:
    return Operator("linear", delta, coeff=coeff, **kw)


def bellman_operator(family, delta: float, **kw) -> Operator:
    return Operator("bellman", delta, family=tuple(family), **kw)


def pucci_operator(delta: float, side: str = "max", d: int | None = None, **kw) -> Operator:
    kind = "pucci_max" if side == "max" else "pucci_min"
    if "k_f" not in kw and d is not None:
        kw["k_f"] = d / delta
    return Operator(kind, delta, **kw)


def tabulated_operator(fn: Callable, delta: float, **kw) -> Operator:
    return Operator("tabulated", delta, fn=fn, **kw)


def bellman_argmax(op: Operator, H: np.ndarray, X: np.ndarray | None = None) -> np.ndarray:
    """Index of the coefficient achieving the Bellman max at each point."""
    if op.kind != "bellman":
        raise ValueError("argmax selection is only defined for bellman operators")
    H = np.asarray(H, dtype=np.float64)
    n, ds = H.shape[0], H.shape[-1]
    if X is None:
        X = np.zeros((n, ds))
    vals = np.stack([np.einsum("nij,nij->n", _coeff_at(c, X, ds), H) for c in op.family])
    return vals.argmax(axis=0)


def evaluate_operator(op: Operator, u: GridFunction, derivs: Derivatives | None = None,
                      with_time: bool | None = None) -> GridFunction:
    """``F(D2u, x)`` on the grid; adds the time derivative on time grids."""
    g = u.grid
    if derivs is None:
        derivs = fd_derivatives(u)
    H = derivs.d2u.reshape(-1, g.n_space, g.n_space)
    X = g.flat_nodes()
    vals = op(H, X).reshape(g.shape)
    if with_time is None:
        with_time = g.time_axis
    if with_time:
        if derivs.dt is None:
            raise ValueError("time derivative requested on a grid without a time axis")
        vals = derivs.dt + vals
    return GridFunction(g, vals)


# ---------------------------------------------------------------------------
# sampled class membership

def sample_elliptic_matrix(rng: np.random.Generator, d: int, delta: float) -> np.ndarray:
    """Random symmetric matrix with eigenvalues in ``[delta, 1/delta]``."""
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    eigs = rng.uniform(delta, 1.0 / delta, size=d)
    return (q * eigs) @ q.T


@dataclass
class ClassReport:
    """Outcome of sampled operator-class checks."""

    passed: bool
    max_lipschitz_ratio: float
    ellipticity_range: tuple[float, float]
    max_at_zero: float
    homogeneity_defect: float
    failures: list = field(default_factory=list)


def check_operator_class(op: Operator, d: int, budget: int = 200, seed: int = 0,
                         x_box: tuple = ((-1.0, 1.0),), rtol: float = 1e-9) -> ClassReport:
    """Sampled verification of Lipschitz bound, zero normalization,
    two-sided ellipticity quotients and (when advertised) homogeneity."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in x_box] * (1 if len(x_box) > 1 else d))[:d]
    hi = np.array([b[1] for b in x_box] * (1 if len(x_box) > 1 else d))[:d]
    X = rng.uniform(lo, hi, size=(budget, d))
    M = symmetrize(rng.normal(size=(budget, d, d)) * rng.uniform(0.1, 10.0, size=(budget, 1, 1)))
    N = symmetrize(rng.normal(size=(budget, d, d)))
    failures = []

    fm, fn = op(M, X), op(N, X)
    lips = np.abs(fm - fn) / np.maximum(frobenius(M - N), 1e-300)
    max_lip = float(lips.max())
    if op.k_f is not None and max_lip > op.k_f * (1 + rtol):
        failures.append(("lipschitz", max_lip))

    zero = float(np.abs(op(np.zeros((budget, d, d)), X)).max())
    if zero > rtol:
        failures.append(("zero_value", zero))

    G = rng.normal(size=(budget, d, d))
    P = np.einsum("nij,nkj->nik", G, G)
    s = rng.uniform(0.1, 5.0, size=budget)
    quot = (op(M + s[:, None, None] * P, X) - fm) / (s * np.einsum("nii->n", P))
    emin, emax = float(quot.min()), float(quot.max())
    if emin < op.delta * (1 - rtol) - rtol or emax > (1 / op.delta) * (1 + rtol) + rtol:
        failures.append(("ellipticity", (emin, emax)))

    hom = 0.0
    if op.homogeneous:
        c = rng.uniform(0.25, 8.0, size=budget)
        hom = float(np.abs(op(c[:, None, None] * M, X) - c * fm).max()
                    / max(1.0, np.abs(fm).max()))
        if hom > rtol * 10:
            failures.append(("homogeneity", hom))

    return ClassReport(not failures, max_lip, (emin, emax), zero, hom, failures)


# ---------------------------------------------------------------------------
# oscillation distance to an x-independent model

def unit_hessian_directions(d: int, n_random: int = 16, seed: int = 0) -> np.ndarray:
    """Unit-Frobenius symmetric matrices: coordinate directions, the
    normalized identity, and seeded random rotations of random spectra."""
    dirs = []
    for i in range(d):
        E = np.zeros((d, d))
        E[i, i] = 1.0
        dirs.append(E)
        dirs.append(-E)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d))
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2.0)
            dirs.append(E)
    dirs.append(np.eye(d) / np.sqrt(d))
    dirs.append(-np.eye(d) / np.sqrt(d))
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        s = rng.normal(size=d)
        s /= np.linalg.norm(s)
        dirs.append((q * s) @ q.T)
    return np.stack(dirs)


def shape_quadrature(center, radius: float, shape: str = "ball",
                     density: int = 24) -> np.ndarray:
    """Midpoint-lattice nodes inside a ball, half ball, forward-in-time
    cylinder ``[t, t + r^2) x B_r`` or half cylinder."""
    center = np.asarray(center, dtype=np.float64)
    d = center.size
    if shape in ("ball", "half_ball"):
        axes = [center[i] - radius + (np.arange(density) + 0.5) * (2 * radius / density)
                for i in range(d)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        keep = np.linalg.norm(X - center, axis=1) < radius
        if shape == "half_ball":
            keep &= X[:, 0] >= 0
    elif shape in ("cylinder", "half_cylinder"):
        taxis = center[0] + (np.arange(density) + 0.5) * (radius ** 2 / density)
        axes = [taxis] + [center[i] - radius + (np.arange(density) + 0.5)
                          * (2 * radius / density) for i in range(1, d)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        keep = np.linalg.norm(X[:, 1:] - center[1:], axis=1) < radius
        if shape == "half_cylinder":
            keep &= X[:, 1] >= 0
    else:
        raise ValueError(f"unknown shape {shape!r}")
    X = X[keep]
    if X.shape[0] == 0:
        raise ValueError("quadrature shape contains no nodes")
    return X


def tau_ladder(tau0: float, steps: int = 21) -> np.ndarray:
    """Geometric scan grid for the scale supremum; for ``tau0 = 0`` the base
    drops to ``2**-10`` so the scan still covers small and large scales."""
    base = tau0 if tau0 > 0 else 2.0 ** -10
    return base * 2.0 ** np.arange(steps)


@dataclass
class ThetaResult:
    value: float
    per_direction: np.ndarray
    n_nodes: int
    taus: np.ndarray


def oscillation_theta(op: Operator, model: Callable, center, radius: float, *,
                      shape: str = "ball", tau0: float = 0.0, homogeneous: bool = False,
                      density: int = 24, n_random_dirs: int = 16, seed: int = 0) -> ThetaResult:
    """Averaged worst-scale deviation of ``op`` from the x-independent
    ``model`` over a shape: max over unit Hessian directions of the shape
    average of ``sup_tau |F(tau u'', x) - model(tau u'')| / tau``.

    ``homogeneous=True`` drops the scale supremum and compares at scale 1.
    ``model`` maps a stack of Hessians to values.
    """
    X = shape_quadrature(center, radius, shape=shape, density=density)
    d_space = X.shape[1] - (1 if shape in ("cylinder", "half_cylinder") else 0)
    dirs = unit_hessian_directions(d_space, n_random=n_random_dirs, seed=seed)
    taus = np.array([1.0]) if homogeneous else tau_ladder(tau0)
    per_dir = np.zeros(len(dirs))
    for k, U in enumerate(dirs):
        worst = np.zeros(X.shape[0])
        for tau in taus:
            H = np.broadcast_to(tau * U, (X.shape[0], d_space, d_space))
            ref = float(model(tau * U[None])[0])
            dev = np.abs(op(H, X) - ref) / tau
            np.maximum(worst, dev, out=worst)
        per_dir[k] = worst.mean()
    return ThetaResult(float(per_dir.max()), per_dir, X.shape[0], taus)


def homogenized_model(model: Callable, scale: float = 2.0 ** 20) -> Callable:
    """Large-scale limit ``u'' -> F(scale u'') / scale`` of a convex model."""
    def hom(H):
        return model(np.asarray(H) * scale) / scale
    return hom


# ---------------------------------------------------------------------------
# manufactured inputs with analytic derivatives

@dataclass
class ManufacturedFunction:
    """Closed-form input: values plus analytic gradient/Hessian callbacks.

    Callbacks take flat coordinate rows ``(n, ndim)`` matching the grid the
    function is sampled on; on time grids axis 0 is time and the spatial
    callbacks differentiate in the remaining axes only.
    """

    name: str
    params: dict
    u: Callable
    du: Callable
    d2u: Callable
    dt: Callable | None = None
    time_dependent: bool = False

    def on_grid(self, grid: Grid) -> GridFunction:
        return GridFunction(grid, self.u(grid.flat_nodes()).reshape(grid.shape))

    def derivatives(self, grid: Grid) -> Derivatives:
        X = grid.flat_nodes()
        ds = grid.n_space
        du = self.du(X).reshape(grid.shape + (ds,))
        d2u = self.d2u(X).reshape(grid.shape + (ds, ds))
        dt = None
        if grid.time_axis:
            dtv = self.dt(X) if self.dt is not None else np.zeros(X.shape[0])
            dt = dtv.reshape(grid.shape)
        return Derivatives(grid, du, d2u, dt)


def _bump_profile(s: np.ndarray):
    # g(s) = exp(-1/(1-s)) on s < 1, extended by 0, with two derivatives
    safe = s < 1.0 - 1e-8
    t = np.where(safe, 1.0 - s, 1.0)
    g = np.where(safe, np.exp(-1.0 / t), 0.0)
    g1 = np.where(safe, -g / t ** 2, 0.0)
    g2 = np.where(safe, g * (1.0 / t ** 4 - 2.0 / t ** 3), 0.0)
    return g, g1, g2


def _radial_bump(center, radius, amplitude):
    c = np.asarray(center, dtype=np.float64)
    R2 = float(radius) ** 2

    def parts(X):
        Y = X - c
        s = (Y ** 2).sum(axis=1) / R2
        return Y, s, _bump_profile(s)

    def u(X):
        _, _, (g, _, _) = parts(X)
        return amplitude * g

    def du(X):
        Y, _, (_, g1, _) = parts(X)
        return amplitude * g1[:, None] * (2.0 * Y / R2)

    def d2u(X):
        Y, _, (_, g1, g2) = parts(X)
        ds = Y.shape[1]
        grad_s = 2.0 * Y / R2
        out = amplitude * g2[:, None, None] * grad_s[:, :, None] * grad_s[:, None, :]
        out += amplitude * g1[:, None, None] * (2.0 / R2) * np.eye(ds)
        return out

    return u, du, d2u


def _make_bump(d, center=None, radius=1.0, amplitude=1.0):
    center = np.zeros(d) if center is None else np.asarray(center, dtype=np.float64)
    u, du, d2u = _radial_bump(center, radius, amplitude)
    return ManufacturedFunction("bump", dict(center=tuple(center), radius=radius,
                                             amplitude=amplitude), u, du, d2u)


def _make_gaussian(d, center=None, sigma=1.0, amplitude=1.0):
    c = np.zeros(d) if center is None else np.asarray(center, dtype=np.float64)
    s2 = float(sigma) ** 2

    def u(X):
        Y = X - c
        return amplitude * np.exp(-(Y ** 2).sum(axis=1) / (2 * s2))

    def du(X):
        Y = X - c
        return -u(X)[:, None] * Y / s2

    def d2u(X):
        Y = X - c
        base = u(X)[:, None, None]
        return base * (Y[:, :, None] * Y[:, None, :] / s2 ** 2 - np.eye(X.shape[1]) / s2)

    return ManufacturedFunction("gaussian", dict(center=tuple(c), sigma=sigma,
                                                 amplitude=amplitude), u, du, d2u)


def _make_quadratic(d, A=None, b=None, c=0.0):
    A = np.eye(d) if A is None else symmetrize(np.asarray(A, dtype=np.float64))
    b = np.zeros(d) if b is None else np.asarray(b, dtype=np.float64)

    def u(X):
        return 0.5 * np.einsum("ni,ij,nj->n", X, A, X) + X @ b + c

    def du(X):
        return X @ A + b

    def d2u(X):
        return np.broadcast_to(A, (X.shape[0], d, d)).copy()

    return ManufacturedFunction("quadratic", dict(), u, du, d2u)


def _make_exp_growth(d):
    if d != 1:
        raise ValueError("the exponential-growth input is one dimensional")

    def u(X):
        return np.exp(X[:, 0])

    def du(X):
        return np.exp(X[:, 0])[:, None]

    def d2u(X):
        return np.exp(X[:, 0])[:, None, None]

    return ManufacturedFunction("exp_growth", dict(), u, du, d2u)


def _make_sinh_growth(d):
    if d != 1:
        raise ValueError("the sinh-growth input is one dimensional")

    def u(X):
        return np.sinh(X[:, 0])

    def du(X):
        return np.cosh(X[:, 0])[:, None]

    def d2u(X):
        return np.sinh(X[:, 0])[:, None, None]

    return ManufacturedFunction("sinh_growth", dict(), u, du, d2u)


def _make_slab_bump(d, centers, radii, amplitude=1.0):
    centers = np.asarray(centers, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    if centers.size != d or radii.size != d:
        raise ValueError("slab bump needs one center and radius per axis")

    def parts(X):
        s = ((X - centers) / radii) ** 2
        g, g1, g2 = _bump_profile(s)
        dsdx = 2.0 * (X - centers) / radii ** 2
        b1 = g1 * dsdx
        b2 = g2 * dsdx ** 2 + g1 * (2.0 / radii ** 2)
        return g, b1, b2

    def u(X):
        g, _, _ = parts(X)
        return amplitude * g.prod(axis=1)

    def _others(g, skip):
        rest = np.ones(g.shape[0])
        for a in range(g.shape[1]):
            if a not in skip:
                rest = rest * g[:, a]
        return rest

    def du(X):
        g, b1, _ = parts(X)
        n, ds = X.shape
        out = np.empty((n, ds))
        for i in range(ds):
            out[:, i] = amplitude * b1[:, i] * _others(g, {i})
        return out

    def d2u(X):
        g, b1, b2 = parts(X)
        n, ds = X.shape
        out = np.empty((n, ds, ds))
        for i in range(ds):
            for j in range(ds):
                fac = b2[:, i] if i == j else b1[:, i] * b1[:, j]
                out[:, i, j] = amplitude * fac * _others(g, {i, j})
        return out

    return ManufacturedFunction("slab_bump", dict(amplitude=amplitude), u, du, d2u)


def _make_odd_bump(d, radius=1.0, amplitude=1.0):
    # x_1 times a radial bump centered on the boundary plane: odd in x_1,
    # identically zero on {x_1 = 0}, supported in the centered ball
    b, db, d2b = _radial_bump(np.zeros(d), radius, 1.0)

    def u(X):
        return amplitude * X[:, 0] * b(X)

    def du(X):
        out = amplitude * X[:, 0][:, None] * db(X)
        out[:, 0] += amplitude * b(X)
        return out

    def d2u(X):
        B1 = db(X)
        out = amplitude * X[:, 0][:, None, None] * d2b(X)
        out[:, 0, :] += amplitude * B1
        out[:, :, 0] += amplitude * B1
        return out

    return ManufacturedFunction("odd_bump", dict(radius=radius, amplitude=amplitude),
                                u, du, d2u)


_LIBRARY = ("bump", "gaussian", "quadratic", "exp_growth", "sinh_growth",
            "slab_bump", "odd_bump")


def manufactured(name: str, d: int, **params) -> ManufacturedFunction:
    """Library factory; ``d`` is the spatial dimension."""
    makers = {
        "bump": _make_bump,
        "gaussian": _make_gaussian,
        "quadratic": _make_quadratic,
        "exp_growth": _make_exp_growth,
        "sinh_growth": _make_sinh_growth,
        "slab_bump": _make_slab_bump,
        "odd_bump": _make_odd_bump,
    }
    if name not in makers:
        raise ValueError(f"unknown manufactured input {name!r}; library: {', '.join(_LIBRARY)}")
    return makers[name](d, **params)


def with_time_profile(mf: ManufacturedFunction, profile: str = "bump",
                      t_center: float = 0.0, t_radius: float = 1.0) -> ManufacturedFunction:
    """Space-time input ``q(t) * u(x)`` with an analytic time factor."""
    if profile == "const":
        q = lambda t: np.ones_like(t)
        q1 = lambda t: np.zeros_like(t)
    elif profile == "bump":
        def q(t):
            g, _, _ = _bump_profile(((t - t_center) / t_radius) ** 2)
            return g

        def q1(t):
            s = ((t - t_center) / t_radius) ** 2
            _, g1, _ = _bump_profile(s)
            return g1 * 2.0 * (t - t_center) / t_radius ** 2
    else:
        raise ValueError(f"unknown time profile {profile!r}")

    def u(X):
        return q(X[:, 0]) * mf.u(X[:, 1:])

    def du(X):
        return q(X[:, 0])[:, None] * mf.du(X[:, 1:])

    def d2u(X):
        return q(X[:, 0])[:, None, None] * mf.d2u(X[:, 1:])

    def dt(X):
        return q1(X[:, 0]) * mf.u(X[:, 1:])

    return ManufacturedFunction(mf.name + "+time", dict(profile=profile, **mf.params),
                                u, du, d2u, dt=dt, time_dependent=True)

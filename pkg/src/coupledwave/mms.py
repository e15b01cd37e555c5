"""Manufactured-solution verification of the space-time convergence rate.

A manufactured case picks smooth exact fields u, v vanishing on the boundary
and defines the sources

    f_u = u_tt - c^2 lap(u) + eps_u u_t + alpha (u - v)
    f_v = v_tt - c^2 lap(v) + eps_v v_t + alpha (v - u)

so the exact fields solve the forced system.  Running the scheme against
these sources on a sequence of meshes with h and k halved in lockstep should
shrink the composite error norm by about a factor 2 per level (first order
jointly in h and k); the study fits that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import assembly, energy
from .mesh import Mesh, refine_uniform
from .scheme import SchemeParams, State, run
from .sparse_linalg import SolverConfig, SolverFailure

# 6th-order central stencils; with this step the self-check residual sits
# around 1e-11, comfortably under its 1e-10 budget (4th order would not)
_FD_STEP = 0.01
_FD_W1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_FD_W2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_FD_OFFSETS = np.arange(-3, 4)


@dataclass(frozen=True)
class ManufacturedCase:
    """Closed-form exact fields with sources derived for fixed parameters.

    All callables take (points, t) with points of shape (n, dim) and return
    shape (n,).  ``u_t``/``v_t`` provide the initial velocities; sources have
    the parameters baked in at build time.
    """

    name: str
    dim: int
    params: SchemeParams
    u: Callable
    v: Callable
    u_t: Callable
    v_t: Callable
    source_u: Callable
    source_v: Callable


def build_case(name: str, params: SchemeParams) -> ManufacturedCase:
    """Construct a named manufactured case for the given parameters.

    Built-ins: ``separable-decay`` (2D, v = 2u), ``separable-decay-1d`` (the
    interval analogue), ``symmetric`` (2D, u = v so the coupling cancels),
    and ``zero`` (2D rest state, all sources vanish).
    """
    try:
        factory = _CASES[name]
    except KeyError:
        known = ", ".join(sorted(_CASES))
        raise ValueError(f"unknown manufactured case {name!r}; known: {known}") from None
    return factory(name, params)


def _sine_mode(points: np.ndarray) -> np.ndarray:
    vals = np.sin(np.pi * points[:, 0])
    for d in range(1, points.shape[1]):
        vals = vals * np.sin(np.pi * points[:, d])
    return vals


def _separable_decay(name: str, params: SchemeParams, dim: int, v_factor: float):
    """u = e^{-t} mode(x), v = v_factor * u, mode the first Dirichlet eigenmode.

    Since u_tt = u, u_t = -u and lap(u) = -dim pi^2 u, both sources are
    scalar multiples of u: f_u = (1 + dim pi^2 c^2 - eps_u + alpha (1 - q)) u
    and f_v = (q + dim q pi^2 c^2 - q eps_v + alpha (q - 1)) u with q the
    factor between the fields.
    """
    q = v_factor
    lam = dim * math.pi**2  # -lap(mode) = lam * mode
    coef_u = 1.0 + lam * params.c**2 - params.eps_u + params.alpha * (1.0 - q)
    coef_v = q * (1.0 + lam * params.c**2 - params.eps_v) + params.alpha * (q - 1.0)

    def u(points, t):
        return math.exp(-t) * _sine_mode(points)

    return ManufacturedCase(
        name=name,
        dim=dim,
        params=params,
        u=u,
        v=lambda p, t: q * u(p, t),
        u_t=lambda p, t: -u(p, t),
        v_t=lambda p, t: -q * u(p, t),
        source_u=lambda p, t: coef_u * u(p, t),
        source_v=lambda p, t: coef_v * u(p, t),
    )


def _zero_case(name: str, params: SchemeParams):
    def zero(points, t):
        return np.zeros(len(points))

    return ManufacturedCase(
        name=name, dim=2, params=params,
        u=zero, v=zero, u_t=zero, v_t=zero, source_u=zero, source_v=zero,
    )


_CASES = {
    "separable-decay": lambda n, p: _separable_decay(n, p, dim=2, v_factor=2.0),
    "separable-decay-1d": lambda n, p: _separable_decay(n, p, dim=1, v_factor=2.0),
    "symmetric": lambda n, p: _separable_decay(n, p, dim=2, v_factor=1.0),
    "zero": _zero_case,
}

_CASE_DIMS = {
    "separable-decay": 2,
    "separable-decay-1d": 1,
    "symmetric": 2,
    "zero": 2,
}


def case_names() -> tuple:
    """Names accepted by build_case, sorted."""
    return tuple(sorted(_CASES))


def case_dimension(name: str) -> int:
    """Spatial dimension of a named case, without constructing it."""
    try:
        return _CASE_DIMS[name]
    except KeyError:
        known = ", ".join(sorted(_CASES))
        raise ValueError(f"unknown manufactured case {name!r}; known: {known}") from None


def source_self_check(case: ManufacturedCase, n_samples: int = 100, seed: int = 0) -> float:
    """Max residual of the source identity at random (x, t) samples.

    The derivatives of the exact fields are probed by finite differences
    (6th-order stencils in t and in each space direction), so agreement
    certifies the hand-derived sources rather than re-evaluating them.
    """
    rng = np.random.default_rng(seed)
    p = case.params
    worst = 0.0
    for _ in range(n_samples):
        x = rng.uniform(0.1, 0.9, size=(1, case.dim))
        t = float(rng.uniform(0.1, 2.0))
        for field, other, eps, source in (
            (case.u, case.v, p.eps_u, case.source_u),
            (case.v, case.u, p.eps_v, case.source_v),
        ):
            w_tt = _fd_time(field, x, t, _FD_W2) / _FD_STEP**2
            w_t = _fd_time(field, x, t, _FD_W1) / _FD_STEP
            lap = _fd_laplacian(field, x, t)
            expected = (
                w_tt
                - p.c**2 * lap
                + eps * w_t
                + p.alpha * (float(field(x, t)[0]) - float(other(x, t)[0]))
            )
            worst = max(worst, abs(float(source(x, t)[0]) - expected))
    return worst


def _fd_time(field, x, t, weights) -> float:
    return sum(
        w * float(field(x, t + o * _FD_STEP)[0]) for w, o in zip(weights, _FD_OFFSETS)
    )


def _fd_laplacian(field, x, t) -> float:
    total = 0.0
    for axis in range(x.shape[1]):
        for w, o in zip(_FD_W2, _FD_OFFSETS):
            shifted = x.copy()
            shifted[0, axis] += o * _FD_STEP
            total += w * float(field(shifted, t)[0])
    return total / _FD_STEP**2


@dataclass(frozen=True)
class LevelRecord:
    """One refinement level: mesh size, time step, and the composite error."""

    level: int
    h: float
    k: float
    error: float


@dataclass(frozen=True)
class ErrorReport:
    """Per-level errors plus the least-squares order of log(error) vs log(h).

    ``fitted_order`` is NaN when fewer than two levels have positive error
    (an exactly reproduced solution leaves nothing to fit).
    """

    levels: list
    fitted_order: float

    def local_orders(self) -> list:
        """log2 ratios of consecutive errors; NaN where undefined."""
        orders = [math.nan]
        for a, b in zip(self.levels, self.levels[1:]):
            if a.error > 0.0 and b.error > 0.0:
                orders.append(math.log2(a.error / b.error))
            else:
                orders.append(math.nan)
        return orders


class _ErrorObserver:
    """Tracks the five-term composite error against the exact solution.

    The velocity error compares backward differences of the interpolated
    exact solution with the scheme's backward differences, matching how the
    scheme defines its discrete velocity.
    """

    def __init__(self, mesh, mass, stiffness, case, params):
        self.mass = mass
        self.stiffness = stiffness
        self.k = params.k
        self.case = case
        self.points = mesh.vertices[~mesh.boundary_flags]
        self.worst_sq = 0.0

    def _exact(self, fn, t):
        return np.asarray(fn(self.points, t), dtype=float)

    def __call__(self, state: State) -> None:
        t_cur = state.n * self.k
        t_prev = (state.n - 1) * self.k
        e_u = self._exact(self.case.u, t_cur) - state.u_curr
        e_v = self._exact(self.case.v, t_cur) - state.v_curr
        e_u_prev = self._exact(self.case.u, t_prev) - state.u_prev
        e_v_prev = self._exact(self.case.v, t_prev) - state.v_prev
        de_u = (e_u - e_u_prev) / self.k
        de_v = (e_v - e_v_prev) / self.k
        total = (
            float(de_u @ (self.mass @ de_u))
            + float(de_v @ (self.mass @ de_v))
            + float(e_u @ (self.stiffness @ e_u))
            + float(e_v @ (self.stiffness @ e_v))
            + float((e_u - e_v) @ (self.mass @ (e_u - e_v)))
        )
        self.worst_sq = max(self.worst_sq, total)


def measure_error(case: ManufacturedCase, mesh: Mesh, params: SchemeParams,
                  config: SolverConfig | None = None) -> float:
    """Run the scheme against the case's sources and return the composite error.

    Initial data and sources come from the exact solution; the error is the
    square root of the worst five-term composite over all recorded levels.
    """
    mass = assembly.assemble_mass(mesh)
    stiffness = assembly.assemble_stiffness(mesh)
    loads = assembly.load_matrix(mesh)
    all_points = mesh.vertices

    def sources(t):
        f_u = loads @ np.asarray(case.source_u(all_points, t), dtype=float)
        f_v = loads @ np.asarray(case.source_v(all_points, t), dtype=float)
        return f_u, f_v

    initial = (
        lambda p: case.u(p, 0.0),
        lambda p: case.u_t(p, 0.0),
        lambda p: case.v(p, 0.0),
        lambda p: case.v_t(p, 0.0),
    )
    observer = _ErrorObserver(mesh, mass, stiffness, case, params)
    run(mesh, params, initial, config=config, sources=sources, observer=observer)
    return math.sqrt(observer.worst_sq)


def convergence_study(case_name: str, base_mesh: Mesh, base_k: float, levels: int,
                      params: SchemeParams, config: SolverConfig | None = None) -> ErrorReport:
    """Lockstep h and k refinement study.

    Level j runs on base_mesh refined j times with time step base_k / 2^j,
    keeping T fixed.  Requires at least 3 levels so an order is fittable
    with a spare point.
    """
    if levels < 3:
        raise ValueError(f"need at least 3 refinement levels, got {levels}")
    records = []
    mesh = base_mesh
    for level in range(levels):
        k = base_k / 2**level
        level_params = SchemeParams.from_final_time(
            c=params.c, eps_u=params.eps_u, eps_v=params.eps_v,
            alpha=params.alpha, k=k, T=params.T,
        )
        case = build_case(case_name, level_params)
        if case.dim != base_mesh.dim:
            raise ValueError(
                f"case {case_name!r} is {case.dim}d but the mesh is {base_mesh.dim}d"
            )
        try:
            err = measure_error(case, mesh, level_params, config)
        except SolverFailure as exc:
            raise SolverFailure(
                f"refinement level {level}: {exc}", exc.residual, exc.iterations
            ) from exc
        records.append(LevelRecord(level=level, h=mesh.h, k=k, error=err))
        if level + 1 < levels:
            mesh = refine_uniform(mesh)
    return ErrorReport(levels=records, fitted_order=_fit_order(records))


def _fit_order(records) -> float:
    usable = [r for r in records if r.error > 0.0]
    if len(usable) < 2:
        return math.nan
    log_h = np.log([r.h for r in usable])
    log_e = np.log([r.error for r in usable])
    slope, _ = np.polyfit(log_h, log_e, 1)
    return float(slope)

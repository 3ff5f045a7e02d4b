"""Method-of-lines integration of a flow scheme from k = cutoff down to k ~ 0.

The scale variable is tau = ln(cutoff/k), so the k*d/dk right-hand sides of
the schemes enter with a sign flip and the run spans the six-plus decades of
k as a modest tau interval.  Stepping is an adaptive embedded Dormand-Prince
5(4) pair; a step is rejected and halved whenever a scheme guard
(PositivityViolation), a non-finite value, or a non-positive Z shows up in a
trial state.  The potential's constant mode carries no physics (every RHS
depends on spatial derivatives only), so the origin-node rate is subtracted
from dV/dtau; the stored potential is therefore normalized to V(k, 0) = 0,
which keeps error control focused on the curvature that observables are
read from.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .flow_rhs import (
    PositivityViolation,
    SchemeKind,
    SchemeSpec,
    alpha,
    pt_finite_m_fields,
    pt_inf_dv_fields,
    pt_inf_fields,
    wh_dv_fields,
)
from .model import ModelParams, SpatialGrid, bare_potential, default_grid
from .observables import gap_from_flow
from .stencil import Field, apply_stencil

# Dormand-Prince 5(4) tableau; the propagated solution is 5th order and the
# last stage is first-same-as-last.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_MAX_STEP_TAU = 0.25
_INITIAL_STEP = 1e-4
_STEP_FLOOR_FACTOR = 1e-12  # irrecoverable once h drops below this * tau scale

# Plateau detection: the running ratio V''(k,0)/Z(k,0) must be essentially
# frozen for a few consecutive accepted steps, and only once k is well below
# every scale in the problem (all observables freeze below k ~ gap).
_PLATEAU_GATE_K = 1.0
_PLATEAU_STREAK = 3

# Z-peak resolution monitor: only meaningful once a genuine peak has formed.
_PEAK_GATE = 0.5
_PEAK_MIN_NODES = 6

_PARITY_CHECK_EVERY = 16


class Termination(enum.Enum):
    PLATEAU_REACHED = "plateau"
    K_MIN_REACHED = "kmin"
    POSITIVITY_ABORT = "positivity_abort"
    RESOLUTION_ABORT = "resolution_abort"
    STEP_LIMIT = "step_limit"

    @property
    def is_abort(self) -> bool:
        return self in (
            Termination.POSITIVITY_ABORT,
            Termination.RESOLUTION_ABORT,
            Termination.STEP_LIMIT,
        )


@dataclass(frozen=True)
class SteppingConfig:
    rel_tol: float = 1e-7
    abs_tol: float = 1e-9
    k_min: float = 1e-3
    max_steps: int = 1_000_000
    plateau_tol: float = 1e-6  # relative change of V''/Z per e-fold of k

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "k_min", "plateau_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass
class FlowState:
    """Running action truncation at scale k: potential and kinetic coefficient."""

    k: float
    v: Field
    z: Field


@dataclass
class FlowDiagnostics:
    n_steps: int = 0
    n_rejected: int = 0
    min_step: float = math.inf
    peak_dz: float = 0.0
    v2_zero_crossing_k: float | None = None
    max_parity_error: float = 0.0
    note: str = ""


@dataclass
class FlowResult:
    final_state: FlowState
    v2_origin: float
    z_origin: float
    delta_e: float  # NaN unless the run converged with non-negative curvature
    termination: Termination
    snapshots: list[FlowState] = field(default_factory=list)
    diagnostics: FlowDiagnostics = field(default_factory=FlowDiagnostics)


class FlowAbortError(RuntimeError):
    """A sweep constituent aborted; carries the failing run."""

    def __init__(self, message: str, result: FlowResult, m: int | None):
        super().__init__(message)
        self.result = result
        self.m = m


@dataclass(frozen=True)
class SweepPoint:
    m: int | None  # None marks the m -> infinity entry
    v2_origin: float
    z_origin: float


def initialize(params: ModelParams, grid: SpatialGrid) -> FlowState:
    """Flow state at k = cutoff: bare potential and unit kinetic coefficient."""
    return FlowState(
        k=params.cutoff,
        v=Field(bare_potential(params, grid.x), grid),
        z=Field(np.ones(grid.n_points), grid),
    )


def _flatten_edges(rate: np.ndarray) -> None:
    """Copy the nearest fully-central rate onto the two edge rows per side.

    One-sided derivative rows carry a positive self-coefficient, which makes
    the edge nodes anti-diffusive under explicit stepping and blows up round-
    off long before any physics happens.  The boundary sits in the deep
    quartic region where the flow is irrelevant, so the rate is extrapolated
    instead; this removes the edge self-coupling entirely.
    """
    rate[0] = rate[1] = rate[2]
    rate[-1] = rate[-2] = rate[-3]


def _make_rhs(params: ModelParams, scheme: SchemeSpec, grid: SpatialGrid):
    """tau-derivative of the packed state vector; raises PositivityViolation."""
    hx = grid.h
    c = grid.center
    n = grid.n_points
    d = params.dimension
    cutoff = params.cutoff
    kind = scheme.kind

    if kind is SchemeKind.WEGNER_HOUGHTON:
        def rhs(tau, y):
            k = cutoff * math.exp(-tau)
            dv = wh_dv_fields(k, apply_stencil(y, hx, 2))
            _flatten_edges(dv)
            return dv[c] - dv

        return rhs, n

    if kind is SchemeKind.PROPER_TIME_LO:
        def rhs(tau, y):
            k = cutoff * math.exp(-tau)
            dv = pt_inf_dv_fields(k, apply_stencil(y, hx, 2), 1.0, d)
            _flatten_edges(dv)
            return dv[c] - dv

        return rhs, n

    m = scheme.m

    def rhs(tau, y):
        k = cutoff * math.exp(-tau)
        v = y[:n]
        z = y[n:]
        if np.any(z <= 0.0):
            raise PositivityViolation(f"non-positive Z in trial state at k = {k:g}")
        v2 = apply_stencil(v, hx, 2)
        v3 = apply_stencil(v, hx, 3)
        z1 = apply_stencil(z, hx, 1)
        z2 = apply_stencil(z, hx, 2)
        if kind is SchemeKind.PROPER_TIME_NLO:
            dv, dz = pt_inf_fields(k, v2, v3, z, z1, z2, d)
        else:
            dv, dz = pt_finite_m_fields(k, v2, v3, z, z1, z2, d, m)
        _flatten_edges(dv)
        _flatten_edges(dz)
        out = np.empty(2 * n)
        out[:n] = dv[c] - dv
        out[n:] = -dz
        return out

    return rhs, 2 * n


def _attempt_step(rhs, tau, y, h, K):
    """One Dormand-Prince trial step; fills K[1:] and returns (y_new, error)."""
    for s in range(1, 6):
        y_s = y + h * (_A[s - 1] @ K[:s])
        K[s] = rhs(tau + _C[s] * h, y_s)
    y_new = y + h * (_B @ K[:6])
    K[6] = rhs(tau + h, y_new)
    err = h * (_E @ K)
    return y_new, err


def _center_v2(y: np.ndarray, hx: float, c: int) -> float:
    """Interior order-2 stencil evaluated at the x = 0 node."""
    return (
        -y[c - 2] + 16.0 * y[c - 1] - 30.0 * y[c] + 16.0 * y[c + 1] - y[c + 2]
    ) / (12.0 * hx * hx)


def _parity_error(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr - arr[::-1]))) / (1.0 + float(np.max(np.abs(arr))))


def integrate(
    params: ModelParams,
    scheme: SchemeSpec,
    grid: SpatialGrid | None = None,
    cfg: SteppingConfig | None = None,
    snapshot_ks: tuple[float, ...] | list[float] = (),
) -> FlowResult:
    """Run one scheme from k = cutoff down to convergence, k_min, or an abort.

    Snapshots are taken by landing a step exactly on each requested k (which
    makes the recorded state the accepted state closest in ln k); targets the
    run never reaches are filled with the final state.
    """
    if grid is None:
        grid = default_grid(params)
    if cfg is None:
        cfg = SteppingConfig()
    if cfg.k_min >= params.cutoff:
        raise ValueError("k_min must be below the cutoff")

    snap = [float(k) for k in snapshot_ks]
    if any(k <= 0 for k in snap):
        raise ValueError("snapshot k values must be > 0")
    if any(k > params.cutoff * (1 + 1e-12) for k in snap):
        raise ValueError("snapshot k values must not exceed the cutoff")
    if any(snap[i] < snap[i + 1] for i in range(len(snap) - 1)):
        raise ValueError("snapshot_ks must be sorted descending")

    n = grid.n_points
    hx = grid.h
    cidx = grid.center
    evolve_z = scheme.evolves_z
    state0 = initialize(params, grid)
    y = (
        np.concatenate([state0.v.values, state0.z.values])
        if evolve_z
        else state0.v.values.copy()
    )

    tau = 0.0
    tau_end = math.log(params.cutoff / cfg.k_min)
    pending = [min(max(math.log(params.cutoff / k), 0.0), tau_end) for k in snap]
    snapshots: list[FlowState] = []
    snap_idx = 0
    diag = FlowDiagnostics()

    def current_k() -> float:
        return params.cutoff * math.exp(-tau)

    def make_state() -> FlowState:
        if evolve_z:
            v, z = y[:n].copy(), y[n:].copy()
        else:
            v, z = y.copy(), np.ones(n)
        return FlowState(current_k(), Field(v, grid), Field(z, grid))

    def record_due() -> None:
        nonlocal snap_idx
        while snap_idx < len(pending) and pending[snap_idx] <= tau + 1e-12:
            snapshots.append(make_state())
            snap_idx += 1

    def finalize(termination: Termination) -> FlowResult:
        final = make_state()
        nonlocal snap_idx
        while snap_idx < len(pending):  # unreached targets: final state is nearest
            snapshots.append(make_state())
            snap_idx += 1
        v2_origin = _center_v2(y, hx, cidx)
        z_origin = float(y[n + cidx]) if evolve_z else 1.0
        delta_e = math.nan
        if termination in (Termination.PLATEAU_REACHED, Termination.K_MIN_REACHED):
            if v2_origin >= 0:
                delta_e = gap_from_flow(v2_origin, z_origin)
        if not math.isfinite(diag.min_step):
            diag.min_step = 0.0
        diag.max_parity_error = max(
            diag.max_parity_error,
            _parity_error(y[:n]),
            _parity_error(y[n:]) if evolve_z else 0.0,
        )
        return FlowResult(
            final_state=final,
            v2_origin=v2_origin,
            z_origin=z_origin,
            delta_e=delta_e,
            termination=termination,
            snapshots=snapshots,
            diagnostics=diag,
        )

    record_due()

    sid = {
        SchemeKind.WEGNER_HOUGHTON: _kernels.WH,
        SchemeKind.PROPER_TIME_LO: _kernels.PT_LO,
        SchemeKind.PROPER_TIME_NLO: _kernels.PT_NLO,
        SchemeKind.PROPER_TIME_FINITE_M: _kernels.PT_M,
    }[scheme.kind]
    m_val = scheme.m if scheme.m is not None else 0
    alpha_m = alpha(m_val, params.dimension) if m_val else 0.0
    work = np.empty((_kernels.N_WORK, y.shape[0]))
    if not _kernels.rhs_tau(
        sid, y, params.cutoff, hx, params.dimension, cidx, m_val, alpha_m, work[0]
    ):
        diag.note = "initial state outside the scheme's domain"
        return finalize(Termination.POSITIVITY_ABORT)

    h = min(_INITIAL_STEP, tau_end)
    floor = _STEP_FLOOR_FACTOR * max(tau_end, 1.0)
    prev_v2 = _center_v2(y, hx, cidx)
    prev_ratio: float | None = None
    streak = 0

    while True:
        if tau >= tau_end - 1e-12:
            return finalize(Termination.K_MIN_REACHED)
        if diag.n_steps + diag.n_rejected >= cfg.max_steps:
            diag.note = "step budget exhausted"
            return finalize(Termination.STEP_LIMIT)

        h = min(h, _MAX_STEP_TAU, tau_end - tau)
        if snap_idx < len(pending):
            gap_tau = pending[snap_idx] - tau
            if gap_tau <= h * (1.0 + 1e-9):
                h = gap_tau

        status, err_norm = _kernels.dp45_step(
            sid,
            y,
            tau,
            h,
            params.cutoff,
            hx,
            params.dimension,
            cidx,
            m_val,
            alpha_m,
            cfg.abs_tol,
            cfg.rel_tol,
            evolve_z,
            work,
        )
        guard_hit = status != 0
        accept = (not guard_hit) and err_norm <= 1.0  # NaN compares False

        if not accept:
            diag.n_rejected += 1
            if guard_hit or not math.isfinite(err_norm):
                h *= 0.5
            else:
                h *= max(_FAC_MIN, min(1.0, _SAFETY * err_norm ** -0.2))
            if h < floor:
                diag.note = f"step collapsed below {floor:g} at k = {current_k():g}"
                # A collapse while a grown Z peak exists is the grid failing to
                # resolve that peak (steep flanks reject every step), so it is
                # reported as the resolution failure it is.
                if evolve_z and float(y[n:].max()) - 1.0 > _PEAK_GATE:
                    return finalize(Termination.RESOLUTION_ABORT)
                return finalize(Termination.POSITIVITY_ABORT)
            continue

        tau += h
        y = work[8].copy()
        work[0, :] = work[6]  # first-same-as-last
        diag.n_steps += 1
        diag.min_step = min(diag.min_step, h)
        if evolve_z:
            diag.peak_dz = max(diag.peak_dz, float(np.max(np.abs(work[0, n:]))))
        if diag.n_steps % _PARITY_CHECK_EVERY == 0:
            pe = _parity_error(y[:n])
            if evolve_z:
                pe = max(pe, _parity_error(y[n:]))
            diag.max_parity_error = max(diag.max_parity_error, pe)

        v2_0 = _center_v2(y, hx, cidx)
        if prev_v2 < 0.0 <= v2_0 and diag.v2_zero_crossing_k is None:
            diag.v2_zero_crossing_k = current_k()
        prev_v2 = v2_0

        record_due()

        if evolve_z:
            z_arr = y[n:]
            z_max = float(z_arr.max())
            if z_max - 1.0 > _PEAK_GATE:
                half_level = 1.0 + 0.5 * (z_max - 1.0)
                width = int(np.count_nonzero(z_arr > half_level))
                if width < _PEAK_MIN_NODES:
                    diag.note = (
                        f"Z peak narrower than {_PEAK_MIN_NODES} grid spacings at "
                        f"k = {current_k():g} (max Z = {z_max:g})"
                    )
                    return finalize(Termination.RESOLUTION_ABORT)

        z_0 = float(y[n + cidx]) if evolve_z else 1.0
        if v2_0 > 0.0 and z_0 > 0.0:
            ratio = v2_0 / z_0
            if prev_ratio is not None and current_k() <= _PLATEAU_GATE_K:
                rate = abs(ratio - prev_ratio) / (ratio * h)
                streak = streak + 1 if rate < cfg.plateau_tol else 0
                if streak >= _PLATEAU_STREAK:
                    return finalize(Termination.PLATEAU_REACHED)
            prev_ratio = ratio
        else:
            prev_ratio = None
            streak = 0

        if err_norm == 0.0:
            h *= _FAC_MAX
        else:
            h *= min(_FAC_MAX, max(_FAC_MIN, _SAFETY * err_norm ** -0.2))


def sweep_m(
    params: ModelParams,
    m_list: list[int],
    grid: SpatialGrid | None = None,
    cfg: SteppingConfig | None = None,
) -> list[SweepPoint]:
    """Finite-m runs for each m plus the m -> infinity run as the 1/m = 0 entry."""
    points: list[SweepPoint] = []
    for m in m_list:
        if m < 1 or m != int(m):
            raise ValueError(f"m values must be positive integers, got {m}")
        res = integrate(params, SchemeSpec(SchemeKind.PROPER_TIME_FINITE_M, int(m)), grid, cfg)
        if res.termination.is_abort:
            raise FlowAbortError(
                f"finite-m run m = {m} aborted: {res.termination.value} ({res.diagnostics.note})",
                res,
                m,
            )
        points.append(SweepPoint(int(m), res.v2_origin, res.z_origin))
    res = integrate(params, SchemeSpec(SchemeKind.PROPER_TIME_NLO), grid, cfg)
    if res.termination.is_abort:
        raise FlowAbortError(
            f"m = infinity run aborted: {res.termination.value} ({res.diagnostics.note})",
            res,
            None,
        )
    points.append(SweepPoint(None, res.v2_origin, res.z_origin))
    return points

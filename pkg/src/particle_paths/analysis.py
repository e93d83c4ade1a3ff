"""Error measurement, stability-bound checks, and the invariant audit.

The central estimate being exercised: the L1 error at time T is bounded
by the initial averaging gap plus 2*sqrt(2 * TV(u0) * R) where R is the
space-time integral of |A v - f(v)|.  Under a maximal initial spacing dx*
this yields the explicit bound TV(u0) * (dx* + 2*sqrt(T * lip(f') *
sup(u0) * dx*)), i.e. order one half in dx*.  The entropy-defect checker
evaluates the weak Kruzkov-type pairing of a run against smooth
compactly supported test bumps; it must be nonnegative up to a defect
that vanishes linearly with the time resolution.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import Trajectory, particle_velocities, simulate
from .field import PiecewiseConstantFn, reconstruct_density, spacetime_flux_residual
from .flux import FluxModel, velocity_extrema
from .initial import InitialData, ParticleState, cell_average, initial_approximation_gap, place_particles
from .quadrature import integrate
from .reference import ExactSolution

__all__ = [
    "ErrorReport",
    "RateFit",
    "CheckResult",
    "AuditReport",
    "SpaceTimeBump",
    "stability_error_bound",
    "explicit_rate_bound",
    "l1_error_against",
    "error_report",
    "entropy_defect",
    "entropy_tolerance",
    "continuity_pairing_defect",
    "invariant_audit",
    "temporal_modulus_margin",
    "convergence_study",
    "richardson_error_estimate",
    "fit_loglog_slope",
]


# ---------------------------------------------------------------------------
# stability bounds


def stability_error_bound(initial_gap: float, tv_u0: float, residual: float) -> float:
    """Right side of the L1 stability estimate (monotone in the residual)."""
    if min(initial_gap, tv_u0, residual) < 0:
        raise ValueError("bound inputs must be nonnegative")
    return initial_gap + 2.0 * math.sqrt(2.0 * tv_u0 * residual)


def explicit_rate_bound(tv_u0: float, sup_u0: float, lip_fprime: float, dx_star: float, T: float) -> float:
    """Explicit order-1/2 error bound under a maximal initial spacing."""
    if min(tv_u0, sup_u0, lip_fprime, dx_star, T) < 0:
        raise ValueError("bound inputs must be nonnegative")
    return tv_u0 * (dx_star + 2.0 * math.sqrt(T * lip_fprime * sup_u0 * dx_star))


# ---------------------------------------------------------------------------
# L1 error against a reference


def l1_error_against(
    recon: PiecewiseConstantFn,
    exact: ExactSolution,
    T: float,
    window: Tuple[float, float],
    tol: float = 1e-9,
) -> float:
    """Integral of |v - u(.,T)| over the window.

    Splits at the reconstruction's breakpoints and the reference's known
    discontinuities at time T, then refines adaptively inside each piece.
    """
    lo, hi = window
    cuts = [float(b) for b in recon.breakpoints if lo < b < hi]
    if exact.breakpoints_at is not None:
        cuts.extend(float(b) for b in exact.breakpoints_at(T) if lo < b < hi)

    def integrand(x):
        return abs(float(recon(x)) - float(exact(x, T)))

    return integrate(integrand, lo, hi, tol=tol, breakpoints=cuts)


@dataclass(frozen=True)
class ErrorReport:
    """Measured error of one run against a reference, with its bounds."""

    l1_error_at_T: float
    initial_gap: float
    tail_mass: float
    residual_spacetime: float
    residual_resolution: float
    stability_bound: float
    rate_bound: Optional[float]
    dx0_star: float
    T: float
    window: Tuple[float, float]
    n_particles: int
    audit_passed: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def error_report(
    traj: Trajectory,
    exact: ExactSolution,
    T: float,
    window: Optional[Tuple[float, float]] = None,
    tv_u0: Optional[float] = None,
    sup_u0: Optional[float] = None,
    lip_fprime: Optional[float] = None,
) -> ErrorReport:
    """Measure a run against a reference solution and assemble its bounds."""
    if traj.data is None:
        raise ValueError("trajectory carries no initial data record")
    times = traj.times
    if times[-1] < T - 1e-12 * max(1.0, T):
        raise ValueError(f"trajectory ends at {times[-1]} before T = {T}")
    data = traj.data
    if window is None:
        window = data.measure_window or data.support_hint
    tv = data.tv_u0 if tv_u0 is None else tv_u0
    sup = data.sup_u0 if sup_u0 is None else sup_u0
    lip_fp = traj.model.lip_fprime if lip_fprime is None else lip_fprime

    state_T = traj.state_at(T)
    recon = reconstruct_density(state_T)
    err = l1_error_against(recon, exact, T, window)

    state0 = traj.snapshots[0][1]
    gap, tail = initial_approximation_gap(data, state0)
    residual, resolution = spacetime_flux_residual(traj)
    bound = stability_error_bound(gap + tail, tv, residual)
    dx0_star = float(np.max(state0.widths))
    explicit = None
    if lip_fp is not None:
        explicit = explicit_rate_bound(tv, sup, lip_fp, dx0_star, T)
    audit = invariant_audit(traj)
    return ErrorReport(
        l1_error_at_T=float(err),
        initial_gap=float(gap),
        tail_mass=float(tail),
        residual_spacetime=float(residual),
        residual_resolution=float(resolution),
        stability_bound=float(bound),
        rate_bound=None if explicit is None else float(explicit),
        dx0_star=dx0_star,
        T=float(T),
        window=(float(window[0]), float(window[1])),
        n_particles=int(state0.n_particles),
        audit_passed=audit.passed,
    )


# ---------------------------------------------------------------------------
# entropy-defect checker


@dataclass(frozen=True)
class SpaceTimeBump:
    """Separable test function (1 - s^2)^3 bumps in x and t.

    Smooth, compactly supported on |x - x_center| < x_width and
    |t - t_center| < t_width, with closed-form derivative and spatial
    antiderivative, which keeps the pairing integrals exact in x.
    """

    x_center: float
    x_width: float
    t_center: float
    t_width: float

    def theta(self, x):
        s = (np.asarray(x, dtype=float) - self.x_center) / self.x_width
        out = np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 3, 0.0)
        return out if out.ndim else float(out)

    def theta_antideriv(self, x):
        s = np.clip((np.asarray(x, dtype=float) - self.x_center) / self.x_width, -1.0, 1.0)
        prim = s - s**3 + 0.6 * s**5 - s**7 / 7.0
        out = self.x_width * prim
        return out if out.ndim else float(out)

    def gamma(self, t):
        s = (t - self.t_center) / self.t_width
        return float((1.0 - s * s) ** 3) if abs(s) < 1.0 else 0.0

    def gamma_prime(self, t):
        s = (t - self.t_center) / self.t_width
        if abs(s) >= 1.0:
            return 0.0
        return float(-6.0 * s * (1.0 - s * s) ** 2 / self.t_width)

    @property
    def derivative_scale(self) -> float:
        # max |d/ds (1-s^2)^3| = 6/sqrt(5) * (4/5)^2
        peak = 6.0 / math.sqrt(5.0) * (4.0 / 5.0) ** 2
        return peak * max(1.0 / self.x_width, 1.0 / self.t_width)

    @property
    def x_support(self) -> Tuple[float, float]:
        return (self.x_center - self.x_width, self.x_center + self.x_width)

    @property
    def t_support(self) -> Tuple[float, float]:
        return (self.t_center - self.t_width, self.t_center + self.t_width)


def _pairing_terms(
    model: FluxModel, state: ParticleState, k: float, bump: SpaceTimeBump, window: Tuple[float, float]
) -> Tuple[float, float]:
    """Spatial integrals at one snapshot.

    Returns (I_abs, I_flux) with
      I_abs  = integral of |v - k| * theta(x) dx        (for the d/dt term),
      I_flux = integral of (A v - f(k)) sgn(v - k) theta'(x) dx,
    both over the bump's support, using the zero extension of v and the
    constant extension of A outside the particle range.
    """
    s_lo, s_hi = bump.x_support
    lo = max(s_lo, window[0])
    hi = min(s_hi, window[1])
    vel = particle_velocities(model, state)
    pos = state.positions
    f_k = float(model.eval_f(k))

    # pieces: (x_l, x_r, v, A_l, A_r) clipped to [lo, hi]
    pieces = []
    if lo < min(pos[0], hi):
        pieces.append((lo, min(pos[0], hi), 0.0, vel[0], vel[0]))
    interp = np.interp
    for i in range(state.n_cells):
        a = max(pos[i], lo)
        b = min(pos[i + 1], hi)
        if b <= a:
            continue
        A_a = float(interp(a, pos, vel))
        A_b = float(interp(b, pos, vel))
        pieces.append((a, b, float(state.densities[i]), A_a, A_b))
    if max(pos[-1], lo) < hi:
        pieces.append((max(pos[-1], lo), hi, 0.0, vel[-1], vel[-1]))

    I_abs = 0.0
    I_flux = 0.0
    for a, b, v, A_a, A_b in pieces:
        Theta_a = float(bump.theta_antideriv(a))
        Theta_b = float(bump.theta_antideriv(b))
        I_abs += abs(v - k) * (Theta_b - Theta_a)
        sgn = float(np.sign(v - k))
        if sgn == 0.0:
            continue
        g_a = A_a * v - f_k
        g_b = A_b * v - f_k
        slope = (g_b - g_a) / (b - a)
        # integral of g * theta' = [g theta] - slope * integral of theta
        I_flux += sgn * (g_b * float(bump.theta(b)) - g_a * float(bump.theta(a)) - slope * (Theta_b - Theta_a))
    return I_abs, I_flux


def entropy_defect(
    traj: Trajectory, k: float, bump: SpaceTimeBump, window: Tuple[float, float]
) -> float:
    """Weak entropy pairing of a run against one test bump.

    Evaluates  int int |v-k| dphi/dt + (A v - f(k)) sgn(v-k) dphi/dx dx dt
    - int phi(T)|v(T)-k| + int phi(0)|v0-k|  with exact spatial integrals
    and trapezoidal time quadrature over the snapshots.  Nonnegative up to
    a defect that shrinks linearly with the time resolution.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    s_lo, s_hi = bump.x_support
    if s_lo < window[0] - 1e-12 or s_hi > window[1] + 1e-12:
        raise ValueError(f"bump support ({s_lo}, {s_hi}) escapes the window {window}")
    # the time profile may overhang [0, T]: the pairing then picks up the
    # boundary terms below instead
    times = traj.times
    T = float(times[-1])

    vals = np.empty(len(traj.snapshots))
    for j, (t, state) in enumerate(traj.snapshots):
        gamma = bump.gamma(t)
        gamma_p = bump.gamma_prime(t)
        if gamma == 0.0 and gamma_p == 0.0:
            vals[j] = 0.0
            continue
        I_abs, I_flux = _pairing_terms(traj.model, state, k, bump, window)
        vals[j] = gamma_p * I_abs + gamma * I_flux
    dts = np.diff(times)
    total = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * dts))

    # boundary terms (nonzero only if the bump touches t = 0 or t = T)
    g0 = bump.gamma(times[0])
    if g0 != 0.0:
        I_abs0, _ = _pairing_terms(traj.model, traj.snapshots[0][1], k, bump, window)
        total += g0 * I_abs0
    gT = bump.gamma(T)
    if gT != 0.0:
        I_absT, _ = _pairing_terms(traj.model, traj.final_state, k, bump, window)
        total -= gT * I_absT
    return total


def entropy_tolerance(
    traj: Trajectory, k: float, bump: SpaceTimeBump, window: Tuple[float, float], C: float = 5.0
) -> float:
    """Defect budget: C * (dt + snapshot spacing) * bump scale * content."""
    dt_max = float(traj.config.get("dt_max", 0.0))
    spacing = float(np.max(np.diff(traj.times)))
    mass = traj.snapshots[0][1].total_mass
    width = window[1] - window[0]
    return C * (dt_max + spacing) * bump.derivative_scale * (mass + k * width)


def continuity_pairing_defect(traj: Trajectory, bump: SpaceTimeBump, window: Tuple[float, float]) -> float:
    """Weak continuity-equation pairing; identical to the k = 0 defect."""
    return entropy_defect(traj, 0.0, bump, window)


# ---------------------------------------------------------------------------
# invariant audit


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class AuditReport:
    checks: Dict[str, CheckResult]
    passed: bool

    def failures(self) -> List[str]:
        return [name for name, c in self.checks.items() if not c.ok]

    def to_json(self) -> str:
        return json.dumps(
            {name: asdict(c) for name, c in self.checks.items()} | {"passed": self.passed},
            indent=2,
            sort_keys=True,
        )


def invariant_audit(traj: Trajectory, rtol: float = 1e-12, tv_tol: float = 1e-10) -> AuditReport:
    """Check the a-priori structure of a trajectory snapshot by snapshot.

    Verifies per-cell mass bookkeeping, total-mass conservation (up to the
    audited mass discarded at collisions), the density maximum principle
    with its time-dependent lower bound, the two-sided particle separation
    bounds, nonincreasing total variation, and velocity bounds.
    """
    model = traj.model
    state0 = traj.snapshots[0][1]
    rho_star = state0.density0_max
    ext = velocity_extrema(model, 0.0, rho_star) if rho_star > 0 else velocity_extrema(model, 0.0, 0.0)
    a_min, a_max = ext.min_value, ext.max_value
    spread = a_max - a_min
    mass0 = state0.total_mass
    scale_m = max(mass0, 1e-300)

    worst_mass_id = 0.0
    worst_drift = 0.0
    worst_max_principle = np.inf
    worst_lower_density = np.inf
    worst_sep_low = np.inf
    worst_sep_high = np.inf
    worst_tv_rise = -np.inf
    worst_vel = np.inf

    discarded_so_far = 0.0
    event_iter = iter(traj.events)
    next_event = next(event_iter, None)

    tv_prev = None
    for t, state in traj.snapshots:
        while next_event is not None and (
            next_event.time < t or (next_event.time == t and state.n_particles < next_event.pre_particle_count)
        ):
            discarded_so_far += next_event.discarded_mass
            next_event = next(event_iter, None)

        widths = state.widths
        worst_mass_id = max(
            worst_mass_id, float(np.max(np.abs(state.densities * widths - state.masses))) / scale_m
        )
        worst_drift = max(worst_drift, abs(state.total_mass + discarded_so_far - mass0) / scale_m)
        if state.densities.size:
            worst_max_principle = min(worst_max_principle, rho_star - float(np.max(state.densities)))
            lower = state.width0 * state.density0 / (state.width0 + state.time * spread)
            worst_lower_density = min(worst_lower_density, float(np.min(state.densities - lower)))
            if rho_star > 0:
                sep_low = state.density0 / rho_star * state.width0
                worst_sep_low = min(worst_sep_low, float(np.min(widths - sep_low)))
            sep_high = state.width0 + state.time * spread
            worst_sep_high = min(worst_sep_high, float(np.min(sep_high - widths)))
        tv = reconstruct_density(state).total_variation()
        if tv_prev is not None:
            worst_tv_rise = max(worst_tv_rise, tv - tv_prev)
        tv_prev = tv
        try:
            vel = particle_velocities(model, state)
        except ValueError:
            # densities left the working interval: report it as a velocity
            # violation rather than aborting the audit
            worst_vel = -np.inf
        else:
            worst_vel = min(
                worst_vel, float(np.min(vel - a_min)), float(np.min(a_max - vel))
            )

    tol_rho = rtol * max(1.0, rho_star)
    tol_sep = rtol * max(1.0, float(np.max(state0.widths)) + abs(spread) * traj.times[-1])
    checks = {
        "mass_identity": CheckResult(worst_mass_id <= rtol, rtol - worst_mass_id, f"max |v*dx - m|/M = {worst_mass_id:.3e}"),
        "mass_drift": CheckResult(worst_drift <= rtol, rtol - worst_drift, f"max relative drift = {worst_drift:.3e}"),
        "max_principle": CheckResult(worst_max_principle >= -tol_rho, worst_max_principle, f"min(rho* - v) = {worst_max_principle:.3e}"),
        "density_lower_bound": CheckResult(worst_lower_density >= -tol_rho, worst_lower_density, f"min(v - bound) = {worst_lower_density:.3e}"),
        "separation_lower": CheckResult(worst_sep_low >= -tol_sep, worst_sep_low, f"min(dx - bound) = {worst_sep_low:.3e}"),
        "separation_upper": CheckResult(worst_sep_high >= -tol_sep, worst_sep_high, f"min(bound - dx) = {worst_sep_high:.3e}"),
        "tv_diminishing": CheckResult(worst_tv_rise <= tv_tol, tv_tol - worst_tv_rise, f"max TV rise = {worst_tv_rise:.3e}"),
        "velocity_bounds": CheckResult(worst_vel >= -rtol * max(1.0, abs(a_min) + abs(a_max)), worst_vel, f"min margin = {worst_vel:.3e}"),
    }
    return AuditReport(checks=checks, passed=all(c.ok for c in checks.values()))


def temporal_modulus_margin(traj: Trajectory, lip_f: Optional[float] = None) -> float:
    """Largest ratio of ||v(t) - v(s)||_L1 to 4 * lip_f * TV(v0) * |t - s|."""
    lip = traj.model.lip_f if lip_f is None else lip_f
    recons = [reconstruct_density(s) for _, s in traj.snapshots]
    times = traj.times
    tv0 = recons[0].total_variation()
    bound_rate = 4.0 * lip * tv0
    worst = 0.0
    for i in range(len(recons)):
        for j in range(i + 1, len(recons)):
            dt = times[j] - times[i]
            if dt <= 0:
                continue
            dist = recons[i].l1_distance(recons[j])
            worst = max(worst, dist / (bound_rate * dt))
    return worst


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log error against log resolution."""

    resolutions: Tuple[float, ...]
    errors: Tuple[float, ...]
    slope: float
    intercept: float
    slope_tail: float
    degenerate: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def fit_loglog_slope(resolutions: Sequence[float], errors: Sequence[float], floor: float = 1e-12) -> RateFit:
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    if res.size < 3:
        raise ValueError("need at least three resolutions")
    if np.any(np.diff(res) >= 0):
        raise ValueError("resolutions must be strictly decreasing")
    degenerate = bool(np.any(err <= floor))
    if degenerate:
        return RateFit(tuple(res), tuple(err), float("nan"), float("nan"), float("nan"), True)
    slope, intercept = np.polyfit(np.log(res), np.log(err), 1)
    tail_slope, _ = np.polyfit(np.log(res[-3:]), np.log(err[-3:]), 1)
    return RateFit(tuple(res), tuple(err), float(slope), float(intercept), float(tail_slope), False)


class StudyError(RuntimeError):
    pass


def convergence_study(
    model: FluxModel,
    data: InitialData,
    exact: ExactSolution,
    n_list: Sequence[int],
    T: float,
    *,
    strategy: str = "uniform",
    dt_max: Optional[float] = None,
    dt_max_ratio: float = 0.2,
    theta: float = 0.1,
    snapshot_count: int = 33,
    window: Optional[Tuple[float, float]] = None,
    workers: int = 1,
) -> Tuple[RateFit, List[ErrorReport]]:
    """Run the scheme over a family of particle counts and fit the rate.

    The time step scales with the initial spacing (``dt_max_ratio`` times
    dx*) unless ``dt_max`` is given.  Any run failing the invariant audit
    aborts the study, naming the run.
    """
    if len(n_list) < 3:
        raise ValueError("need at least three particle counts")

    def one(n: int) -> ErrorReport:
        pos = place_particles(data, n, strategy)
        state0 = cell_average(data, pos)
        dx_star = float(np.max(state0.widths))
        dt = dt_max if dt_max is not None else dt_max_ratio * dx_star
        traj = simulate(
            model, state0, T, dt_max=dt, theta=theta, snapshot_count=snapshot_count, data=data
        )
        rep = error_report(traj, exact, T, window=window)
        if not rep.audit_passed:
            raise StudyError(f"run with n = {n} failed the invariant audit")
        return rep

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, n_list))
    else:
        reports = [one(n) for n in n_list]
    fit = fit_loglog_slope([r.dx0_star for r in reports], [r.l1_error_at_T for r in reports])
    return fit, reports


def richardson_error_estimate(dist_coarse_fine: float, rate: float = 0.5) -> float:
    """Error estimate for the finer of two runs from their distance.

    For a method of order p on consecutive dyadic resolutions,
    err_fine ~ ||u_fine - u_coarse|| / (2^p - 1).
    """
    return dist_coarse_fine / (2.0**rate - 1.0)

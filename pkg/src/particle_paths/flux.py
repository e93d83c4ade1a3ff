"""Flux models for scalar conservation laws in continuity-equation form.

A Lipschitz flux f with f(0) = 0 induces the transport velocity
a(u) = f(u)/u, extended continuously by a(0) = f'(0).  Particle dynamics
only ever query a through its extrema over density intervals, so each
model carries an interval-extremum oracle: analytic for the built-in
fluxes, a certified scan-and-refine fallback otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

__all__ = [
    "FluxModel",
    "VelocityExtrema",
    "builtin_flux",
    "velocity_extrema",
    "ANALYTIC_TOL",
    "NUMERIC_TOL",
]

ANALYTIC_TOL = 1e-10
NUMERIC_TOL = 1e-8

_SCAN_POINTS = 2049


class VelocityExtrema(NamedTuple):
    min_value: float
    max_value: float
    argmin: float
    argmax: float


@dataclass(frozen=True)
class FluxModel:
    """Flux f plus its velocity field a(u) = f(u)/u on the interval [0, u_high].

    ``lip_f`` is the Lipschitz constant of f on [0, u_high]; it also bounds
    |a| there since |a(u)| = |f(u) - f(0)| / |u - 0|.  ``lip_fprime`` is
    optional and only needed for explicit rate bounds.  ``extremum_oracle``
    returns exact extrema of a over a density interval; when absent a
    numeric scan is used.
    """

    name: str
    eval_f: Callable
    fprime0: float
    lip_f: float
    u_high: float
    lip_fprime: Optional[float] = None
    extremum_oracle: Optional[Callable] = None
    tol_ext: float = NUMERIC_TOL

    def eval_a(self, u):
        u_arr = np.asarray(u, dtype=float)
        safe = np.where(u_arr == 0.0, 1.0, u_arr)
        f_vals = np.asarray(self.eval_f(u_arr), dtype=float)
        out = np.where(u_arr == 0.0, self.fprime0, f_vals / safe)
        if out.ndim == 0:
            return float(out)
        return out


def velocity_extrema(model: FluxModel, lo: float, hi: float, tol: Optional[float] = None) -> VelocityExtrema:
    """Extrema of the velocity field a over the density interval [lo, hi].

    Returns (min, max, argmin, argmax).  Degenerate intervals return the
    point value of a.  Inputs must be nonnegative, ordered, and inside the
    model's working interval.
    """
    lo = float(lo)
    hi = float(hi)
    if lo < 0.0 or hi < 0.0:
        raise ValueError(f"negative density interval [{lo}, {hi}]")
    if lo > hi:
        raise ValueError(f"inverted density interval [{lo}, {hi}]")
    if hi > model.u_high * (1.0 + 1e-9) + 1e-300:
        raise ValueError(
            f"interval top {hi} exceeds working interval [0, {model.u_high}]"
        )
    if lo == hi:
        a_val = float(model.eval_a(lo))
        return VelocityExtrema(a_val, a_val, lo, lo)
    if model.extremum_oracle is not None:
        res = model.extremum_oracle(lo, hi)
        return VelocityExtrema(*res)
    return _scan_extrema(model, lo, hi, model.tol_ext if tol is None else tol)


def _golden_refine(eval_a, lo, hi, start_u, start_val, width, sign):
    """Golden-section search for min of sign*a on [lo, hi], tracking best sample."""
    best_u, best_v = start_u, sign * start_val
    g = 0.5 * (3.0 - np.sqrt(5.0))
    a, b = lo, hi
    x1 = a + g * (b - a)
    x2 = b - g * (b - a)
    f1 = sign * float(eval_a(x1))
    f2 = sign * float(eval_a(x2))
    for u, v in ((x1, f1), (x2, f2)):
        if v < best_v:
            best_u, best_v = u, v
    while (b - a) > width:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + g * (b - a)
            f1 = sign * float(eval_a(x1))
            if f1 < best_v:
                best_u, best_v = x1, f1
        else:
            a, x1, f1 = x1, x2, f2
            x2 = b - g * (b - a)
            f2 = sign * float(eval_a(x2))
            if f2 < best_v:
                best_u, best_v = x2, f2
    for u in (a, b):
        v = sign * float(eval_a(u))
        if v < best_v:
            best_u, best_v = u, v
    return best_u, sign * best_v


def _scan_extrema(model: FluxModel, lo: float, hi: float, tol: float) -> VelocityExtrema:
    # Uniform scan locates the winning brackets; golden-section refinement
    # shrinks each bracket until its width times the sampled Lipschitz rate
    # of a is below tol, certifying the returned values to that accuracy.
    us = np.linspace(lo, hi, _SCAN_POINTS)
    vals = np.asarray(model.eval_a(us), dtype=float)
    h = (hi - lo) / (_SCAN_POINTS - 1)
    lip = 1.5 * float(np.max(np.abs(np.diff(vals)))) / h + 1e-30
    width = max(tol / max(1.0, lip), (hi - lo) * 1e-14)

    i_min = int(np.argmin(vals))
    i_max = int(np.argmax(vals))
    lo_min = us[max(i_min - 1, 0)]
    hi_min = us[min(i_min + 1, _SCAN_POINTS - 1)]
    lo_max = us[max(i_max - 1, 0)]
    hi_max = us[min(i_max + 1, _SCAN_POINTS - 1)]
    argmin, min_val = _golden_refine(
        model.eval_a, lo_min, hi_min, us[i_min], vals[i_min], width, sign=+1.0
    )
    argmax, max_val = _golden_refine(
        model.eval_a, lo_max, hi_max, us[i_max], vals[i_max], width, sign=-1.0
    )
    return VelocityExtrema(min_val, max_val, argmin, argmax)


def _affine_oracle(a_of, increasing: bool):
    def oracle(lo, hi):
        a_lo = float(a_of(lo))
        a_hi = float(a_of(hi))
        if increasing:
            return VelocityExtrema(a_lo, a_hi, lo, hi)
        return VelocityExtrema(a_hi, a_lo, hi, lo)

    return oracle


def builtin_flux(name: str, u_high: Optional[float] = None, **params) -> FluxModel:
    """Construct a registered flux model.

    Registered kinds:
      * ``burgers``: f(u) = u^2 / 2.
      * ``lwr``: f(u) = v_max * u * (1 - u/u_max); params v_max, u_max.
      * ``tabulated``: linear interpolation of samples; params ``us``, ``fs``
        with strictly increasing us starting at 0 and fs[0] = 0.  Falls back
        to the numeric extremum scan.

    ``u_high`` sets the working density interval [0, u_high]; Lipschitz
    constants are taken on it.
    """
    if name == "burgers":
        if params:
            raise ValueError(f"burgers flux takes no params, got {sorted(params)}")
        top = 1.0 if u_high is None else float(u_high)

        def f_burgers(u):
            u = np.asarray(u, dtype=float)
            return 0.5 * u * u

        def a_burgers(u):
            return 0.5 * np.asarray(u, dtype=float)

        return FluxModel(
            name="burgers",
            eval_f=f_burgers,
            fprime0=0.0,
            lip_f=top,
            u_high=top,
            lip_fprime=1.0,
            extremum_oracle=_affine_oracle(a_burgers, increasing=True),
            tol_ext=ANALYTIC_TOL,
        )

    if name == "lwr":
        v_max = float(params.pop("v_max", 1.0))
        u_max = float(params.pop("u_max", 1.0))
        if params:
            raise ValueError(f"unknown lwr params {sorted(params)}")
        if v_max <= 0 or u_max <= 0:
            raise ValueError("lwr requires positive v_max and u_max")
        top = u_max if u_high is None else float(u_high)

        def f_lwr(u):
            u = np.asarray(u, dtype=float)
            return v_max * u * (1.0 - u / u_max)

        def a_lwr(u):
            return v_max * (1.0 - np.asarray(u, dtype=float) / u_max)

        lip_f = v_max * max(1.0, abs(2.0 * top / u_max - 1.0))
        return FluxModel(
            name="lwr",
            eval_f=f_lwr,
            fprime0=v_max,
            lip_f=lip_f,
            u_high=top,
            lip_fprime=2.0 * v_max / u_max,
            extremum_oracle=_affine_oracle(a_lwr, increasing=False),
            tol_ext=ANALYTIC_TOL,
        )

    if name == "tabulated":
        us = np.asarray(params.pop("us"), dtype=float)
        fs = np.asarray(params.pop("fs"), dtype=float)
        if params:
            raise ValueError(f"unknown tabulated params {sorted(params)}")
        if us.ndim != 1 or us.shape != fs.shape or us.size < 2:
            raise ValueError("tabulated flux needs matching 1-D sample arrays")
        if us[0] != 0.0:
            raise ValueError("tabulated samples must start at u = 0")
        if np.any(np.diff(us) <= 0):
            raise ValueError("tabulated u samples must be strictly increasing")
        if fs[0] != 0.0:
            raise ValueError(f"tabulated flux has f(0) = {fs[0]}, expected 0")
        top = float(us[-1]) if u_high is None else float(u_high)
        if top > us[-1]:
            raise ValueError("u_high exceeds the tabulated sample range")

        def f_tab(u):
            return np.interp(np.asarray(u, dtype=float), us, fs)

        slopes = np.diff(fs) / np.diff(us)
        in_range = us[:-1] < top
        lip_f = float(np.max(np.abs(slopes[in_range]))) if in_range.any() else float(abs(slopes[0]))
        h0 = 1e-7 * top
        fprime0 = float(f_tab(h0)) / h0
        return FluxModel(
            name="tabulated",
            eval_f=f_tab,
            fprime0=fprime0,
            lip_f=lip_f,
            u_high=top,
            lip_fprime=None,
            extremum_oracle=None,
            tol_ext=NUMERIC_TOL,
        )

    raise ValueError(f"unknown flux '{name}'")

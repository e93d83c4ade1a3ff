"""Stable on-disk formats for trajectories, events, and sampled functions.

Trajectory CSV: header ``t,i,x_left,x_right,v`` with one row per snapshot
per cell, snapshots in record order (cell index restarting at 0 marks a
new snapshot; collision times appear twice, pre- then post-sweep).
Events JSON: one object per collision with the deleted particle and cell
indices, the survivor map, and the discarded mass.  Floats are written
with ``repr`` (shortest round-trip), so identical runs produce identical
bytes and parsing recovers exact values.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .dynamics import CollisionEvent, Trajectory
from .flux import FluxModel
from .initial import ParticleState

__all__ = [
    "write_trajectory_csv",
    "write_events_json",
    "write_function_csv",
    "write_rate_csv",
    "load_trajectory_dir",
]


def write_trajectory_csv(traj: Trajectory, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "i", "x_left", "x_right", "v"])
        for t, state in traj.snapshots:
            pos = state.positions
            for i in range(state.n_cells):
                writer.writerow(
                    [repr(float(t)), i, repr(float(pos[i])), repr(float(pos[i + 1])), repr(float(state.densities[i]))]
                )


def write_events_json(traj: Trajectory, path) -> None:
    payload = {
        "fingerprint": traj.fingerprint,
        "config": traj.config,
        "events": [
            {
                "time": ev.time,
                "deleted_particles": [int(j) for j in ev.deleted_particles],
                "deleted_cells": [int(j) for j in ev.deleted_cells],
                "survivor_map": [int(j) for j in ev.survivor_map],
                "discarded_mass": ev.discarded_mass,
                "pre_particle_count": ev.pre_particle_count,
            }
            for ev in traj.events
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def write_function_csv(fn, path, lo: float, hi: float, n: int = 512) -> None:
    """Sample a callable (reconstruction or velocity field) to CSV (x, value)."""
    xs = np.linspace(lo, hi, n)
    vals = np.asarray(fn(xs), dtype=float)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(xs, vals):
            writer.writerow([repr(float(x)), repr(float(v))])


def write_rate_csv(fit, path) -> None:
    """Convergence table: dx, error, bound, slope-so-far."""
    res = np.asarray(fit.resolutions)
    err = np.asarray(fit.errors)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dx", "error", "slope_so_far"])
        for j in range(res.size):
            if j == 0:
                slope = ""
            else:
                slope = repr(float(np.polyfit(np.log(res[: j + 1]), np.log(err[: j + 1]), 1)[0]))
            writer.writerow([repr(float(res[j])), repr(float(err[j])), slope])


def load_trajectory_dir(directory, model: FluxModel) -> Trajectory:
    """Rebuild a trajectory from ``trajectory.csv`` and ``events.json``.

    Initial per-cell widths and densities are taken from the first
    snapshot and pulled through the recorded collision deletions, so the
    invariant audit runs on the loaded object exactly as on a live one.
    """
    directory = Path(directory)
    rows: List[Tuple[float, int, float, float, float]] = []
    with (directory / "trajectory.csv").open() as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "i", "x_left", "x_right", "v"]:
            raise ValueError(f"unexpected trajectory header {header}")
        for raw in reader:
            rows.append((float(raw[0]), int(raw[1]), float(raw[2]), float(raw[3]), float(raw[4])))
    if not rows:
        raise ValueError("empty trajectory file")

    payload = json.loads((directory / "events.json").read_text())
    events = [
        CollisionEvent(
            time=ev["time"],
            deleted_particles=np.asarray(ev["deleted_particles"], dtype=int),
            deleted_cells=np.asarray(ev["deleted_cells"], dtype=int),
            survivor_map=np.asarray(ev["survivor_map"], dtype=int),
            discarded_mass=ev["discarded_mass"],
            pre_particle_count=ev["pre_particle_count"],
        )
        for ev in payload["events"]
    ]

    # split rows into snapshots wherever the cell index restarts
    groups: List[List[Tuple[float, int, float, float, float]]] = []
    for row in rows:
        if row[1] == 0:
            groups.append([])
        groups[-1].append(row)

    snapshots = []
    width0: Optional[np.ndarray] = None
    density0: Optional[np.ndarray] = None
    rho_star = 0.0
    pending = list(events)
    for g in groups:
        t = g[0][0]
        pos = np.array([r[2] for r in g] + [g[-1][3]])
        dens = np.array([r[4] for r in g])
        if width0 is None:
            width0 = np.diff(pos)
            density0 = dens.copy()
            rho_star = float(np.max(dens, initial=0.0))
        elif width0.size != dens.size:
            if not pending or width0.size - pending[0].deleted_cells.size != dens.size:
                raise ValueError("cell count change does not match the event log")
            keep = np.ones(width0.size, dtype=bool)
            keep[pending[0].deleted_cells] = False
            width0 = width0[keep]
            density0 = density0[keep]
            pending.pop(0)
        state = ParticleState(
            positions=pos,
            densities=dens,
            masses=dens * np.diff(pos),
            width0=width0.copy(),
            density0=density0.copy(),
            density0_max=rho_star,
            time=t,
        )
        snapshots.append((t, state))
    return Trajectory(
        snapshots=snapshots,
        events=events,
        model=model,
        data=None,
        config=payload.get("config", {}),
        fingerprint=payload.get("fingerprint", ""),
    )

"""Serialization of trajectories and reports: CSV and JSON writers.

Numbers go out in full-precision scientific notation (17 significant digits)
so reruns diff cleanly; identical config and seed produce byte-identical CSV.
"""

from __future__ import annotations

import json
import os

import numpy as np

TRAJECTORY_HEADER = "t,r1,r2,r3,p1,p2,p3,H,j1,j2,j3,Mstar,phase"


def fmt(x) -> str:
    return f"{float(x):.16e}"


def trajectory_csv(traj) -> str:
    lines = [TRAJECTORY_HEADER]
    for i in range(len(traj.t)):
        nums = [traj.t[i], *traj.y[i], traj.H[i], *traj.j[i], traj.mstar[i]]
        lines.append(",".join(fmt(v) for v in nums) + "," + str(traj.sample_phase[i]))
    return "\n".join(lines) + "\n"


def planar_trajectory_csv(traj) -> str:
    """Planar states embedded in the 3D schema (third components zero)."""
    lines = [TRAJECTORY_HEADER]
    for i in range(len(traj.t)):
        x1, x2, p1, p2 = traj.y[i]
        j3 = x1 * p2 - x2 * p1
        nums = [traj.t[i], x1, x2, 0.0, p1, p2, 0.0, traj.H[i], 0.0, 0.0, j3,
                traj.mstar[i]]
        lines.append(",".join(fmt(v) for v in nums) + ",free")
    return "\n".join(lines) + "\n"


def event_record(index, ev) -> dict:
    return {
        "trajectory": index,
        "kind": ev.kind,
        "time": ev.time,
        "state": {"r": list(map(float, ev.state.r)),
                  "p": list(map(float, ev.state.p)),
                  "t": float(ev.state.t)},
        "detail": ev.detail,
    }


def write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path, obj):
    write_text(path, json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj

"""File formats: trajectory CSV, stability JSON, metadata header lines."""

from __future__ import annotations

import csv
import io
import json

from .dynamics import Trajectory
from .stability import StabilityReport


def fmt(v) -> str:
    return format(float(v), ".17g")


def metadata_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


def strip_comments(text: str) -> tuple[list[dict], str]:
    """Split leading '#' JSON lines from the body."""
    metas, body = [], []
    for ln in text.splitlines(keepends=True):
        if ln.startswith("#") and not body:
            try:
                metas.append(json.loads(ln[1:].strip()))
            except json.JSONDecodeError:
                pass
        else:
            body.append(ln)
    return metas, "".join(body)


def trajectory_columns(N: int) -> list[str]:
    return ["t"] + [f"n_{j}" for j in range(-N, N + 1)] + ["sz", "re_sm", "im_sm", "Q", "L"]


def trajectory_to_csv(traj: Trajectory, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    meta = dict(metadata or {})
    meta.setdefault("trajectory", traj.metadata)
    buf.write(metadata_line(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trajectory_columns(traj.N))
    n, Q, L = traj.n, traj.Q, traj.L
    sz = traj.sz.real
    for i in range(len(traj.t)):
        w.writerow([fmt(traj.t[i]), *map(fmt, n[i]), fmt(sz[i]), fmt(traj.sm[i].real),
                    fmt(traj.sm[i].imag), fmt(Q[i]), fmt(L[i])])
    return buf.getvalue()


def trajectory_to_json(traj: Trajectory, metadata: dict | None = None) -> str:
    meta = dict(metadata or {})
    meta.setdefault("trajectory", traj.metadata)
    body = {"columns": trajectory_columns(traj.N), "t": traj.t.tolist(),
            "n": traj.n.tolist(), "sz": traj.sz.real.tolist(),
            "sm": [[z.real, z.imag] for z in traj.sm.tolist()],
            "Q": traj.Q.tolist(), "L": traj.L.tolist()}
    return metadata_line(meta) + json.dumps(body) + "\n"


def report_to_json(report: StabilityReport, metadata: dict | None = None) -> str:
    head = metadata_line(metadata) if metadata is not None else ""
    return head + report.to_json() + "\n"


def report_from_json(text: str) -> StabilityReport:
    _, body = strip_comments(text)
    return StabilityReport.from_json(body)


def report_to_csv(report: StabilityReport, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    if metadata is not None:
        buf.write(metadata_line(metadata))
    buf.write(f"# dim={report.dim} max_im={fmt(report.max_im)} stable={int(report.stable)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im"])
    for re, im in report.to_dict()["eigenvalues"]:
        w.writerow([fmt(re), fmt(im)])
    return buf.getvalue()

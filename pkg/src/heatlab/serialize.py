"""CSV and JSON writers for fields, plans, spectra and reports.

Float formatting uses ``repr``, which round-trips and is deterministic, so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .calculus import ScalarField
from .heat import SpectralSolver
from .reports import InequalityReport
from .transport import InterpolationPath, TransportPlan


def _write_rows(path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    Path(path).write_text("\n".join(lines) + "\n")


def field_to_csv(field: ScalarField, path) -> None:
    _write_rows(
        path,
        "x,value",
        (f"{float(x)!r},{float(v)!r}" for x, v in zip(field.space.nodes, field.values)),
    )


def plan_to_csv(plan: TransportPlan, path) -> None:
    _write_rows(
        path,
        "i,j,mass",
        (f"{int(i)},{int(j)},{float(m)!r}"
         for i, j, m in zip(plan.rows, plan.cols, plan.masses)),
    )


def interpolation_to_csv(path_obj: InterpolationPath, path) -> None:
    """Long-format per-slice densities: time, node coordinate, density."""
    space = path_obj.plan.source.space
    rows = []
    for t, mu in zip(path_obj.times, path_obj.measures):
        for x, rho in zip(space.nodes, mu.density()):
            rows.append(f"{float(t)!r},{float(x)!r},{float(rho)!r}")
    _write_rows(path, "t,x,density", rows)


def spectrum_to_csv(solver: SpectralSolver, path) -> None:
    _write_rows(
        path,
        "k,eigenvalue",
        (f"{k},{float(lam)!r}" for k, lam in enumerate(solver.eigenvalues)),
    )


def margins_to_csv(report: InequalityReport, path) -> None:
    if report.margin_field is None:
        raise ValueError(f"report {report.name!r} carries no margin field")
    _write_rows(
        path,
        "x,margin",
        (
            f"{float(x)!r},{float(v)!r}"
            for x, v in zip(report.margin_field.space.nodes, report.margin_field.values)
        ),
    )


def reports_to_json(reports, meta: dict, path) -> None:
    payload = dict(meta)
    payload["reports"] = [r.to_dict() for r in reports]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

"""Scenario-driven command line runner.

Subcommands:

* ``run <scenario.json>``: build the model, run every check, write
  ``report.json`` plus ``margins_<check>.csv`` dumps.  Exit code 0 when all
  asserted checks pass, 1 when any fails or errors, 2 on config errors.
* ``sweep <scenario.json> --levels k``: rerun the checks over refined grids
  and fit the convergence order of each check's defect; writes ``sweep.csv``.
* ``list-models``: print the model catalog.

Scenario files are JSON::

    {
      "seed": 7,
      "model": {"name": "circle", "params": {"n": 200, "circumference": 6.2831853}},
      "fields": [{"id": "f0", "profile": "cosine", "params": {"offset": 2.0}}],
      "checks": [{"name": "li_yau", "field": "f0",
                  "params": {"T": 0.5, "N": 1.0}, "tolerance": 1e-6}]
    }

Identical scenario + seed produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from . import inequalities as iq
from . import transport as tr
from .calculus import ScalarField, bochner_margin, gamma2, laplacian
from .errors import HeatlabError, ScenarioError
from .heat import build_solver
from .profiles import FIELD_PROFILES, build_fields
from .reports import InequalityReport, amend, make_report
from .serialize import margins_to_csv, reports_to_json
from .space import MODEL_BUILDERS, MODEL_CATALOG, CurvatureDimension
from .transport import measure_from_density

_NUM = (int, float)


# ---------------------------------------------------------------------------
# scenario schema

#: check name -> {param: (types, required)}; "field" handled separately.
CHECK_SPECS = {
    "li_yau": {"T": (_NUM, True), "N": (_NUM, False)},
    "bakry_qian": {"T": (_NUM, True), "K": (_NUM, False), "N": (_NUM, False)},
    "baudoin_garofalo": {"T": (_NUM, True), "K": (_NUM, False), "N": (_NUM, False)},
    "harnack": {
        "x": (int, True), "y": (int, True), "s": (_NUM, True), "t": (_NUM, True),
        "K": (_NUM, False), "N": (_NUM, False),
    },
    "harnack_scan": {
        "xs": (list, True), "ys": (list, True), "pairs": (list, True),
        "K": (_NUM, False), "N": (_NUM, False),
    },
    "harnack_transport": {
        "x": (int, True), "y": (int, True), "s": (_NUM, True), "t": (_NUM, True),
        "r_steps": (_NUM, False), "K": (_NUM, False), "N": (_NUM, False),
    },
    "be_flow": {"t": (_NUM, True), "K": (_NUM, False), "N": (_NUM, False)},
    "eks": {"t": (_NUM, True), "K": (_NUM, False), "N": (_NUM, False)},
    "bochner": {"K": (_NUM, False), "N": (_NUM, False)},
    "phi_derivative": {"T": (_NUM, True), "t": (_NUM, True), "dt": (_NUM, True)},
    "prop2": {
        "T": (_NUM, True), "times": (list, True), "dt": (_NUM, False),
        "K": (_NUM, False), "N": (_NUM, False),
    },
    "pre_li_yau": {
        "T": (_NUM, True), "profile": (str, True), "K": (_NUM, False), "N": (_NUM, False),
    },
    "cd_star": {
        "t": (_NUM, True), "n_prime": (_NUM, True),
        "mu0_field": (str, True), "mu1_field": (str, True),
        "K": (_NUM, False), "N": (_NUM, False),
    },
    "kernel_corollary": {
        "x": (int, True), "times": (list, True), "K": (_NUM, False), "N": (_NUM, False),
    },
    "laplacian_oracle_error": {},
    "gamma2_oracle_error": {},
}

_FIELD_FREE_CHECKS = {
    "kernel_corollary", "laplacian_oracle_error", "gamma2_oracle_error", "cd_star",
}


@dataclass
class Scenario:
    model_name: str
    model_params: dict
    fields: list
    checks: list
    seed: int = 0
    sweep: dict = dc_field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ScenarioError(f"{path}: cannot read scenario: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(
                f"{path}:{exc.lineno}:{exc.colno}: scenario is not valid JSON: {exc.msg}"
            ) from exc
        return cls.from_dict(raw, origin=str(path))

    @classmethod
    def from_dict(cls, raw: dict, origin: str = "<scenario>") -> "Scenario":
        def fail(where, msg):
            raise ScenarioError(f"{origin}: {where}: {msg}")

        if not isinstance(raw, dict):
            fail("top level", "expected a JSON object")
        model = raw.get("model")
        if not isinstance(model, dict) or "name" not in model:
            fail("model", 'expected {"name": ..., "params": {...}}')
        name = model["name"]
        if name not in MODEL_BUILDERS:
            fail("model.name", f"unknown model {name!r}; known: {sorted(MODEL_BUILDERS)}")
        params = model.get("params", {})
        if not isinstance(params, dict):
            fail("model.params", "expected an object")

        fields = raw.get("fields", [])
        if not isinstance(fields, list):
            fail("fields", "expected a list")
        seen_ids = set()
        for k, f in enumerate(fields):
            if not isinstance(f, dict) or "id" not in f or "profile" not in f:
                fail(f"fields[{k}]", 'expected {"id": ..., "profile": ..., "params": {...}}')
            if f["profile"] not in FIELD_PROFILES:
                fail(f"fields[{k}].profile",
                     f"unknown profile {f['profile']!r}; known: {sorted(FIELD_PROFILES)}")
            if f["id"] in seen_ids:
                fail(f"fields[{k}].id", f"duplicate field id {f['id']!r}")
            seen_ids.add(f["id"])

        checks = raw.get("checks", [])
        if not isinstance(checks, list) or not checks:
            fail("checks", "expected a non-empty list")
        for k, c in enumerate(checks):
            if not isinstance(c, dict) or "name" not in c:
                fail(f"checks[{k}]", 'expected {"name": ..., "params": {...}}')
            cname = c["name"]
            if cname not in CHECK_SPECS:
                fail(f"checks[{k}].name",
                     f"unknown check {cname!r}; known: {sorted(CHECK_SPECS)}")
            tol = c.get("tolerance", 1e-6)
            if not isinstance(tol, _NUM) or tol <= 0:
                fail(f"checks[{k}].tolerance", f"tolerance must be > 0, got {tol!r}")
            spec = CHECK_SPECS[cname]
            cparams = c.get("params", {})
            if not isinstance(cparams, dict):
                fail(f"checks[{k}].params", "expected an object")
            for pname, (ptype, required) in spec.items():
                if pname not in cparams:
                    if required:
                        fail(f"checks[{k}].params", f"missing required parameter {pname!r}")
                    continue
                if not isinstance(cparams[pname], ptype) or isinstance(cparams[pname], bool):
                    fail(f"checks[{k}].params.{pname}",
                         f"expected {ptype}, got {cparams[pname]!r}")
            unknown = set(cparams) - set(spec)
            if unknown:
                fail(f"checks[{k}].params", f"unknown parameters {sorted(unknown)}")
            needs_field = cname not in _FIELD_FREE_CHECKS
            if needs_field and c.get("field") not in seen_ids:
                fail(f"checks[{k}].field",
                     f"check {cname!r} needs a 'field' naming one of {sorted(seen_ids)}")
            if cname == "cd_star":
                for key in ("mu0_field", "mu1_field"):
                    if cparams[key] not in seen_ids:
                        fail(f"checks[{k}].params.{key}",
                             f"must name one of {sorted(seen_ids)}")

        seed = raw.get("seed", 0)
        if not isinstance(seed, int):
            fail("seed", f"expected an integer, got {seed!r}")
        sweep = raw.get("sweep", {})
        if not isinstance(sweep, dict):
            fail("sweep", "expected an object")
        return cls(
            model_name=name,
            model_params=dict(params),
            fields=[dict(f) for f in fields],
            checks=[dict(c) for c in checks],
            seed=seed,
            sweep=dict(sweep),
        )


# ---------------------------------------------------------------------------
# execution


class _Context:
    """Model, solver and fields for one grid level; the solver builds lazily."""

    def __init__(self, scenario: Scenario, n_override: int | None = None):
        params = dict(scenario.model_params)
        if n_override is not None:
            params["n"] = n_override
        self.space = MODEL_BUILDERS[scenario.model_name](**params)
        self.seed = scenario.seed
        self._solver = None
        self.fields: dict[str, list[ScalarField]] = {}
        for k, spec in enumerate(scenario.fields):
            member_seed = scenario.seed + 1000003 * k
            self.fields[spec["id"]] = build_fields(
                self.space, spec["profile"], spec.get("params", {}), member_seed
            )

    @property
    def solver(self):
        if self._solver is None:
            self._solver = build_solver(self.space)
        return self._solver

    def cd(self, params: dict) -> CurvatureDimension:
        base = self.space.expected_cd
        return CurvatureDimension(
            float(params.get("K", base.K)), float(params.get("N", base.N))
        )


def _oracle_derivatives(space):
    """Analytic first/second derivative data of f = cos(x) on this model."""
    x = space.nodes
    with np.errstate(divide="ignore"):
        log_w = space.weight_log_derivative(x)
        log_w_prime = space.weight_log_derivative_prime(x)
    f = np.cos(x)
    fp = -np.sin(x)
    fpp = -np.cos(x)
    lap = fpp + log_w * fp
    g2 = fpp**2 - log_w_prime * fp**2
    return f, lap, g2


def _run_single_check(ctx: _Context, check: dict, f: ScalarField | None,
                      tolerance: float) -> list[InequalityReport]:
    name = check["name"]
    p = check.get("params", {})
    space = ctx.space
    if name == "li_yau":
        n_dim = float(p.get("N", ctx.cd(p).N))
        return [iq.li_yau_check(ctx.solver, f, float(p["T"]), n_dim, tolerance=tolerance)]
    if name == "bakry_qian":
        return [iq.bakry_qian_check(ctx.solver, f, float(p["T"]), ctx.cd(p), tolerance=tolerance)]
    if name == "baudoin_garofalo":
        return [iq.baudoin_garofalo_check(ctx.solver, f, float(p["T"]), ctx.cd(p),
                                          tolerance=tolerance)]
    if name == "harnack":
        return [iq.harnack_check(ctx.solver, f, p["x"], p["y"], float(p["s"]), float(p["t"]),
                                 ctx.cd(p), tolerance=tolerance)]
    if name == "harnack_scan":
        pairs = [(float(s), float(t)) for s, t in p["pairs"]]
        return [iq.harnack_scan(ctx.solver, f, p["xs"], p["ys"], pairs, ctx.cd(p),
                                tolerance=tolerance)]
    if name == "harnack_transport":
        r = float(p.get("r_steps", 2)) * space.spacing
        return [tr.harnack_transport_check(ctx.solver, f, p["x"], p["y"], float(p["s"]),
                                           float(p["t"]), ctx.cd(p), r, tolerance=tolerance)]
    if name == "be_flow":
        return [iq.be_flow_check(ctx.solver, f, float(p["t"]), ctx.cd(p), tolerance=tolerance)]
    if name == "eks":
        return [iq.eks_check(ctx.solver, f, float(p["t"]), ctx.cd(p), tolerance=tolerance)]
    if name == "bochner":
        cd = ctx.cd(p)
        margin = bochner_margin(space, f, cd)
        interior = margin.values[space.interior_mask()]
        return [make_report(
            name="bochner",
            params={"model": space.model_id, "n": space.n_nodes, "h": space.spacing,
                    "K": cd.K, "N": cd.N},
            min_margin=float(interior.min()),
            tolerance=tolerance,
            margin_field=margin,
        )]
    if name == "phi_derivative":
        defect = iq.phi_derivative_check(ctx.solver, f, float(p["T"]), float(p["t"]),
                                         ScalarField(np.ones(space.n_nodes), space),
                                         float(p["dt"]))
        return [make_report(
            name="phi-derivative",
            params={"model": space.model_id, "n": space.n_nodes, "h": space.spacing,
                    "T": p["T"], "t": p["t"], "dt": p["dt"]},
            min_margin=-defect,
            tolerance=tolerance,
            notes="margin is minus the derivative-identity defect",
        )]
    if name == "prop2":
        cd = ctx.cd(p)
        a, a_prime = iq.quadratic_decay_profile(float(p["T"]))
        gamma_fn = iq.gamma_for_profile(a, a_prime, cd)
        phi_test = ScalarField(np.ones(space.n_nodes), space)
        return [iq.prop2_check(ctx.solver, f, float(p["T"]), a, a_prime, gamma_fn, phi_test,
                               [float(t) for t in p["times"]], cd,
                               dt=float(p.get("dt", 1e-3)), tolerance=tolerance)]
    if name == "pre_li_yau":
        cd = ctx.cd(p)
        profile_name = p["profile"]
        if profile_name not in iq.V_PROFILES:
            raise ScenarioError(
                f"unknown V-profile {profile_name!r}; known: {sorted(iq.V_PROFILES)}"
            )
        profile = iq.V_PROFILES[profile_name](float(p["T"]), cd)
        return [iq.pre_li_yau_check(ctx.solver, f, float(p["T"]), profile, cd,
                                    tolerance=tolerance)]
    if name == "cd_star":
        cd = ctx.cd(p)
        mu0 = measure_from_density(space, ctx.fields[p["mu0_field"]][0].values)
        mu1 = measure_from_density(space, ctx.fields[p["mu1_field"]][0].values)
        defect = tr.cd_star_check(space, mu0, mu1, float(p["t"]), cd, float(p["n_prime"]))
        vacuous = math.isinf(defect)
        return [make_report(
            name="cd-star",
            params={"model": space.model_id, "n": space.n_nodes, "h": space.spacing,
                    "K": cd.K, "N": cd.N, "n_prime": p["n_prime"], "t": p["t"]},
            min_margin=0.0 if vacuous else defect,
            tolerance=tolerance,
            vacuous=vacuous,
            notes="vacuous distortion branch (infinite coefficient)" if vacuous else "",
        )]
    if name == "kernel_corollary":
        return iq.kernel_corollary_suite(ctx.solver, p["x"], ctx.cd(p),
                                         [float(t) for t in p["times"]], tolerance=tolerance)
    if name == "laplacian_oracle_error":
        f_exact, lap_exact, _ = _oracle_derivatives(space)
        lap = laplacian(space, ScalarField(f_exact, space)).values
        err = float(np.max(np.abs(lap - lap_exact)[space.interior_mask()]))
        return [make_report(
            name="laplacian-oracle-error",
            params={"model": space.model_id, "n": space.n_nodes, "h": space.spacing},
            min_margin=-err, tolerance=tolerance,
            notes="margin is minus the interior sup error against the analytic value",
        )]
    if name == "gamma2_oracle_error":
        f_exact, _, g2_exact = _oracle_derivatives(space)
        g2 = gamma2(space, ScalarField(f_exact, space)).values
        err = float(np.max(np.abs(g2 - g2_exact)[space.interior_mask()]))
        return [make_report(
            name="gamma2-oracle-error",
            params={"model": space.model_id, "n": space.n_nodes, "h": space.spacing},
            min_margin=-err, tolerance=tolerance,
            notes="margin is minus the interior sup error against the analytic value",
        )]
    raise ScenarioError(f"unknown check {name!r}")  # pragma: no cover - validated earlier


def _run_check(ctx: _Context, check: dict, tolerance_scale: float) -> list[InequalityReport]:
    name = check["name"]
    tolerance = float(check.get("tolerance", 1e-6)) * tolerance_scale
    field_id = check.get("field")
    members = ctx.fields[field_id] if field_id is not None else [None]
    out: list[InequalityReport] = []
    for idx, f in enumerate(members):
        try:
            reports = _run_single_check(ctx, check, f, tolerance)
        except HeatlabError as exc:
            reports = [InequalityReport(
                name=name.replace("_", "-"),
                params={"model": ctx.space.model_id, "field": field_id},
                min_margin=math.nan,
                tolerance=tolerance,
                verdict="error",
                notes=f"{type(exc).__name__}: {exc}",
            )]
        if field_id is not None and len(members) > 1:
            reports = [amend(r, field=f"{field_id}[{idx}]") for r in reports]
        elif field_id is not None:
            reports = [amend(r, field=field_id) for r in reports]
        out.extend(reports)
    return out


def _sorted_reports(reports: list[InequalityReport]) -> list[InequalityReport]:
    return sorted(reports, key=lambda r: (r.name, json.dumps(r.to_dict()["params"],
                                                             sort_keys=True)))


def run_scenario(scenario: Scenario, out_dir, tolerance_scale: float = 1.0) -> int:
    """Execute all checks; write report.json and margin CSVs; return the exit code."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = _Context(scenario)
    reports: list[InequalityReport] = []
    for check in scenario.checks:
        reports.extend(_run_check(ctx, check, tolerance_scale))
    reports = _sorted_reports(reports)

    counts = {"pass": 0, "fail": 0, "vacuous-pass": 0, "error": 0}
    for r in reports:
        counts[r.verdict] += 1
    meta = {
        "artifact_version": __version__,
        "model": {
            "name": scenario.model_name,
            "params": scenario.model_params,
            "hash": ctx.space.content_hash(),
            "n": ctx.space.n_nodes,
            "h": ctx.space.spacing,
        },
        "seed": scenario.seed,
        "tolerance_scale": tolerance_scale,
        "summary": counts,
    }
    reports_to_json(reports, meta, out_dir / "report.json")
    used = {}
    for r in reports:
        if r.margin_field is None:
            continue
        stem = r.name
        used[stem] = used.get(stem, -1) + 1
        suffix = f"_{used[stem]}" if used[stem] else ""
        margins_to_csv(r, out_dir / f"margins_{stem}{suffix}.csv")
    for r in reports:
        print(f"[{r.verdict.upper():>12}] {r.name}: min_margin={r.min_margin:.6e} "
              f"tol={r.tolerance:.1e}")
    if counts["fail"] or counts["error"]:
        return 1
    return 0


def _sweep_defect(report: InequalityReport) -> float:
    if math.isnan(report.min_margin):
        return math.nan
    return max(0.0, -report.min_margin)


def sweep_scenario(scenario: Scenario, levels: int, out_dir,
                   tolerance_scale: float = 1.0) -> int:
    """Re-run every check over refined grids; fit each defect's order in h."""
    if levels < 3:
        raise ScenarioError(f"a sweep needs at least 3 levels, got {levels}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_n = int(scenario.model_params.get("n", 100))
    grid_sizes = scenario.sweep.get("grid_sizes")
    if grid_sizes is None:
        factor = int(scenario.sweep.get("factor", 2))
        grid_sizes = [base_n * factor**k for k in range(levels)]
    else:
        grid_sizes = [int(n) for n in grid_sizes[:levels]]
        if len(grid_sizes) < levels:
            raise ScenarioError(
                f"sweep.grid_sizes provides {len(grid_sizes)} levels, need {levels}"
            )
    labels = [check["name"] for check in scenario.checks]
    table: dict[int, list] = {k: [] for k in range(len(scenario.checks))}
    for n in grid_sizes:
        ctx = _Context(scenario, n_override=n)
        for k, check in enumerate(scenario.checks):
            reports = _run_check(ctx, check, tolerance_scale)
            min_margin = min(r.min_margin for r in reports)
            defect = max(_sweep_defect(r) for r in reports)
            table[k].append((n, ctx.space.spacing, min_margin, defect))
    lines = ["check,n,h,min_margin,defect,fitted_order"]
    for k, label in enumerate(labels):
        entries = table[k]
        hs = [h for (_, h, _, d) in entries if d > 0]
        ds = [d for (*_, d) in entries if d > 0]
        if len(ds) >= 2:
            slope = np.polyfit(np.log(hs), np.log(ds), 1)[0]
            order_txt = repr(float(slope))
        else:
            order_txt = ""
        for n, h, mm, d in entries:
            lines.append(f"{label},{n},{float(h)!r},{float(mm)!r},{float(d)!r},{order_txt}")
        print(f"sweep {label}: order={order_txt or 'n/a (defect vanished)'} "
              f"defects={[f'{d:.3e}' for (*_, d) in entries]}")
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    return 0


def list_models_text() -> str:
    lines = ["available model constructors:"]
    for name, params, cd in MODEL_CATALOG:
        lines.append(f"  {name:<18} params: {params:<22} expected (K, N): {cd}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="heatlab",
        description="Scenario runner for heat-flow inequality checks on model spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario", help="path to a JSON scenario")
    p_run.add_argument("--out-dir", default="heatlab_out", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--tolerance-scale", type=float, default=1.0,
                       help="multiply every check tolerance (negative forces failures)")

    p_sweep = sub.add_parser("sweep", help="refinement sweep of a scenario")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--levels", type=int, required=True)
    p_sweep.add_argument("--out-dir", default="heatlab_out")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--tolerance-scale", type=float, default=1.0)

    sub.add_parser("list-models", help="print the model catalog")

    args = parser.parse_args(argv)
    if args.command == "list-models":
        print(list_models_text())
        return 0
    try:
        scenario = Scenario.from_file(args.scenario)
        if args.seed is not None:
            scenario.seed = args.seed
        if args.command == "run":
            return run_scenario(scenario, args.out_dir, args.tolerance_scale)
        return sweep_scenario(scenario, args.levels, args.out_dir, args.tolerance_scale)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Batch scenario runner: ``contactlab run <config>`` and ``contactlab list``.

Exit codes: 0 when every asserted invariant holds, 1 when one fails (the
failing check is named on stderr), 2 for configuration errors.
"""

import argparse
import csv
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from .exceptions import ContactLabError
from .library import get_entry, list_library, random_path

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
QUADRATURE = "composite Simpson with Richardson error estimate"


class ConfigError(Exception):
    """Invalid configuration; ``diagnostics`` holds one line per problem."""

    def __init__(self, diagnostics):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = list(diagnostics)


def load_schema():
    text = resources.files("contactlab").joinpath("data/config_schema.json").read_text()
    return json.loads(text)


# -- config loading with line diagnostics ------------------------------------------

def _node_at(node, path):
    """Deepest YAML node along ``path`` (keys and indices)."""
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node = nxt
    return node


def _key_line(node, key):
    if isinstance(node, yaml.MappingNode):
        for k, _ in node.value:
            if k.value == key:
                return k.start_mark.line + 1
    return node.start_mark.line + 1


def _diagnose(err, root):
    path = list(err.absolute_path)
    where = "/".join(str(p) for p in path) or "<root>"
    node = _node_at(root, path)
    if err.validator == "additionalProperties":
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - allowed)
        return [f"line {_key_line(node, k)}: unknown key '{k}' in {where}" for k in extra]
    if err.validator == "required":
        return [f"line {node.start_mark.line + 1}: {where}: {err.message}"]
    return [f"line {node.start_mark.line + 1}: key '{where}': {err.message}"]


def load_config(path, seed=None):
    """Parse and validate a YAML scenario file; ``seed`` overrides the file.

    Raises
    ------
    ConfigError
        With ``line N: ...`` diagnostics for syntax or schema violations.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc.strerror}"]) from None
    try:
        root = yaml.compose(text)
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark else ""
        raise ConfigError([f"{line}YAML syntax error: {getattr(exc, 'problem', exc)}"]) from None
    if not isinstance(cfg, dict):
        raise ConfigError(["line 1: config must be a mapping"])
    if seed is not None:
        cfg["seed"] = int(seed)
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        diags = []
        for e in errors:
            for d in _diagnose(e, root):
                if d not in diags:
                    diags.append(d)
        raise ConfigError(diags)
    cfg.setdefault("name", path.stem)
    return cfg


# -- report plumbing ------------------------------------------------------------------

@dataclass
class Report:
    """Scenario output: scalar results, named checks, CSV tables and the tolerance ledger."""

    results: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    ledger: dict = field(default_factory=dict)

    def check(self, name, ok):
        self.checks[name] = bool(ok)

    @property
    def passed(self):
        return all(self.checks.values())


def _clean(x):
    """JSON-safe, platform-stable form of ``x`` (floats to 12 significant digits)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.12g}") + 0.0
    if x is None or isinstance(x, str):
        return x
    return str(x)


def _fmt_cell(v):
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_outputs(cfg, report, out_dir, grid_scale, started, elapsed):
    """Write ``<name>.json``, ``<name>.meta.json`` and ``<name>_<table>.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = cfg["name"]
    doc = {
        "scenario": cfg["scenario"],
        "name": name,
        "seed": cfg.get("seed"),
        "grid_scale": grid_scale,
        "config": cfg,
        "tolerance_ledger": report.ledger,
        "results": report.results,
        "checks": report.checks,
        "status": "PASS" if report.passed else "FAIL",
        "tables": sorted(report.tables),
    }
    main = out / f"{name}.json"
    main.write_text(json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n")
    meta = {"started": started, "elapsed_s": round(elapsed, 3),
            "python": platform.python_version(), "numpy": np.__version__,
            "platform": platform.platform()}
    (out / f"{name}.meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    paths = [main]
    for tname, (cols, rows) in sorted(report.tables.items()):
        p = out / f"{name}_{tname}.csv"
        with p.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in rows:
                w.writerow([_fmt_cell(v) for v in row])
        paths.append(p)
    return paths


# -- builders ---------------------------------------------------------------------------

class _Ctx:
    def __init__(self, cfg, grid_scale, base_dir):
        self.cfg = cfg
        self.gs = float(grid_scale)
        self.base_dir = Path(base_dir)
        self.grid = cfg.get("grid", {})
        self.tols = cfg.get("tolerances", {})
        self.params = cfg.get("params", {})
        seed = cfg.get("seed")
        # optimizers take 32-bit seeds; fold larger ones deterministically
        if seed is not None and seed >= 2 ** 32:
            seed = int(np.random.SeedSequence(seed).generate_state(1)[0])
        self.seed = seed

    def n(self, key, default, multiple=1, minimum=4):
        v = self.grid.get(key, default) * self.gs
        return max(minimum, multiple * int(round(v / multiple)))

    def raw(self, key, default):
        return self.grid.get(key, default)

    def tol(self, key, default):
        return float(self.tols.get(key, default))

    def model(self, default="T3"):
        from .manifolds import ContactModel
        spec = self.cfg.get("model", {"kind": default})
        return ContactModel(spec["kind"], spec.get("sign", 1), spec.get("scale", 1.0))

    def path(self, default_library, model=None):
        from .flows import load_path
        spec = self.cfg.get("path", {"library": default_library})
        if "library" in spec:
            return _library(spec["library"], "path")
        if "file" in spec:
            return load_path(self.base_dir / spec["file"])
        r = spec["random"]
        return random_path(model or self.model(), r["seed"], r.get("n_terms", 3),
                           r.get("amplitude", 0.5), r.get("positive", False))

    def family(self, default_library):
        from .genfun import jet_family
        spec = self.cfg.get("family", {"library": default_library})
        if "library" in spec:
            S = _library(spec["library"], "genfun")
        elif "jet" in spec:
            S = jet_family(_terms(spec["jet"]), name="config-jet")
        else:
            raise ConfigError(["family needs 'library' or 'jet'"])
        return S.stabilized() if spec.get("stabilize") else S

    def spacetime(self, default_library="flat-cylinder-T2"):
        from .spacetime import ProductSpacetime
        spec = self.cfg.get("spacetime", {"library": default_library})
        if "library" in spec:
            return _library(spec["library"], "spacetime")
        return ProductSpacetime(spec["u_terms"])


def _library(entry_id, category):
    try:
        e = get_entry(entry_id)
    except KeyError as exc:
        raise ConfigError([f"{category}: {exc.args[0]}"]) from None
    if e.category != category:
        raise ConfigError([f"library entry {entry_id!r} is a {e.category}, not a {category}"])
    return e.build()


def _terms(raw):
    out = []
    for t in raw:
        c, kind = float(t[0]), t[1]
        out.append((c, ("one",) if kind == "one" else (kind, int(t[2]) if len(t) > 2 else 1)))
    return out


# -- scenarios --------------------------------------------------------------------------

def _calibrate_reeb(ctx):
    from .flows import reeb_path
    from .genfun import genfun_for_path, spectral_values
    from .lorentz import norm_upper, tau_lower
    rep = Report()
    model = ctx.model()
    t = float(ctx.params["t"])
    tol, delta, eta = ctx.tol("tol", 1e-6), ctx.tol("delta", 1e-3), ctx.tol("eta", 1e-3)
    max_evals = ctx.raw("max_evals", 200)
    path = reeb_path(model, t)
    tau = tau_lower(model, path, seed=ctx.seed, max_evals=max_evals, delta=delta, eta=eta)
    norm = norm_upper(model, path, seed=ctx.seed, max_evals=max_evals, delta=delta, eta=eta)
    rep.results.update(t=t, tau=tau.to_dict(), norm=norm.to_dict())
    rep.check("lower_ge_t", tau.lower_bound >= t - tol)
    rep.check("norm_upper_le_t", norm.upper_bound <= t + delta)
    rep.check("lower_le_norm", tau.lower_bound <= norm.upper_bound + tol + tau.error_bound)
    rows = [("tau_lower", tau.lower_bound, tau.error_bound), ("norm_upper", norm.upper_bound,
                                                              norm.error_bound)]
    rep.ledger.update(delta=delta, eta=eta, tol=tol, max_evals=max_evals, quadrature=QUADRATURE)
    S = genfun_for_path(path)
    if S is not None:
        sv = spectral_values(S, 1.0, grid_scale=ctx.gs)["point"]
        rep.results["spectral_point"] = sv.to_dict()
        rep.check("spectral_within_2_cells", abs(sv.value - t) <= 2 * sv.cell_tol + tol)
        rows.append(("spectral_point", sv.value, sv.cell_tol))
        rep.ledger.update(spectral_n_q=sv.n_q, spectral_n_e=sv.n_e)
    rep.tables["bounds"] = (["quantity", "value", "error"], rows)
    return rep


def _reparametrize(ctx):
    from .flows import flow_map, reeb_reparametrize
    from .lorentz import match_residual, probe_points
    rep = Report()
    path = ctx.path("t3-mixed")
    delta = ctx.tol("delta", 1e-3)
    endpoint = ctx.tol("endpoint", 1e-5)
    steps = ctx.n("steps", 1000)
    mode = ctx.params.get("mode", "min")
    new = reeb_reparametrize(path, delta=delta, mode=mode)
    info = new.info
    P = probe_points(path.model, ctx.n("n", 32))
    resid = match_residual(path.model, flow_map(path, P, steps), flow_map(new, P, steps))
    rep.results.update(model=path.model.kind, target=info.target, width=info.width,
                       lipschitz=info.lipschitz, max_deviation=info.max_deviation,
                       endpoint_residual=resid, nodes=len(info.nodes))
    rep.check("minima_within_delta", info.max_deviation < delta)
    rep.check("endpoint_ensemble", resid <= endpoint)
    before = np.interp(info.check_times, info.nodes, info.minima)
    rep.tables["minima"] = (["t", "min_before", "min_after"],
                            list(zip(info.check_times, before, info.check_minima)))
    rep.ledger.update(delta=delta, endpoint=endpoint, steps=steps, probes=len(P),
                      adaptive_nodes=len(info.nodes), quadrature=QUADRATURE)
    return rep


def _zap(ctx):
    from .genfun import zap_sandwich
    rep = Report()
    S = ctx.family("fishtail-m1")
    n_t = ctx.n("n_t", 32, multiple=4)
    n_q = ctx.grid.get("n_q")
    n_q = None if n_q is None else ctx.n("n_q", n_q)
    n_e = ctx.grid.get("n_e")
    rows = []
    for A in ctx.params.get("classes", ["point", "fundamental"]):
        s = zap_sandwich(S, A, n_t=n_t, n_q=n_q, n_e=n_e, strict=False)
        rep.results[A] = s.to_dict()
        rep.check(f"sandwich_{A}", s.passed)
        rows.append((A, s.int_min, s.spectral, s.int_max, s.tolerance))
    rep.results["family"] = S.name
    rep.results["fiber_dimension"] = S.m
    rep.tables["sandwich"] = (["class", "int_min", "spectral", "int_max", "tolerance"], rows)
    rep.ledger.update(n_t=n_t, n_q=n_q if n_q else "default", n_e=n_e if n_e else "default",
                      quadrature=QUADRATURE)
    return rep


def _theorem3(ctx):
    from .genfun import theorem3_check, weight_field
    from .manifolds import ContactModel
    rep = Report()
    path = ctx.path("t3-mixed", ContactModel("T3"))
    amp = float(ctx.params.get("rho_amplitude", 1.0 / 3.0))
    rho = weight_field(amp) if amp > 0 else None
    max_evals = ctx.raw("max_evals", 300)
    n_t = ctx.n("n_t", 32, multiple=4)
    tol = ctx.tol("tol", 1e-6)
    r = theorem3_check(path, rho, n_modes=ctx.params.get("n_modes", 2), max_evals=max_evals,
                       seed=ctx.seed, tol=tol, n_t=n_t)
    rep.results.update(r.to_dict())
    for k, v in r.checks.items():
        rep.check(k, v)
    rep.tables["bounds"] = (["quantity", "value"],
                            [("tau_lower", r.tau_lower), ("d_upper", r.d_upper), ("C", r.C),
                             ("l_point", r.l_point), ("l_fundamental", r.l_fundamental)])
    rep.ledger.update(tol=tol, rho_amplitude=amp, max_evals=max_evals, n_t=n_t,
                      comparison_tolerance=r.tolerance, quadrature=QUADRATURE)
    return rep


def _loop_s3(ctx):
    from .lorentz import loop_tau_lower
    rep = Report()
    model = ctx.model("S3")
    k = int(ctx.params["k"])
    tol = ctx.tol("tol", 1e-9)
    max_evals = ctx.raw("max_evals", 100)
    est = loop_tau_lower(model, k, seed=ctx.seed, max_evals=max_evals)
    expected = k * model.reeb_period
    rep.results.update(k=k, period=model.reeb_period, expected=expected, tau=est.to_dict())
    rep.check("lower_ge_k_periods", est.lower_bound >= expected - tol)
    rep.check("loop_closes", est.matching_residual <= ctx.tol("eta", 1e-3))
    rep.tables["loop"] = (["k", "lower", "expected"], [(k, est.lower_bound, expected)])
    rep.ledger.update(tol=tol, max_evals=max_evals, quadrature=QUADRATURE)
    return rep


def _chekanov(ctx):
    from .flows import flow_map, translation_path
    from .genfun import LegendrianCurve
    from .legendrian import chekanov_upper, fiber, jet_curve, zero_section
    rep = Report()
    n = ctx.n("n", 256)
    eta = ctx.tol("eta", 1e-3)
    tol = ctx.tol("tol", 1e-6)
    max_evals = ctx.raw("max_evals", 400)
    pair = ctx.params["pair"]
    if pair == "translation":
        model = ctx.model("T3")
        a, b, c = ctx.params.get("shift", [0.5, 0.0, 0.0])
        L0 = fiber(model, n=n)
        L1 = LegendrianCurve(model, model.wrap(flow_map(translation_path(model, a, b, c),
                                                        L0.points)))
        closed = abs(c) + math.hypot(a, b)
    else:
        model = ctx.model("J1S1")
        terms = _terms(ctx.params.get("terms", [[0.3, "cos", 1]]))
        L0, L1 = zero_section(n, model), jet_curve(terms, n, model)
        closed = None
    est = chekanov_upper(L0, L1, eta=eta, max_evals=max_evals, seed=ctx.seed,
                         n_modes=ctx.params.get("n_modes", 2))
    rep.results.update(pair=pair, estimate=est.to_dict())
    rep.check("certified", est.certified)
    rep.check("matching_within_eta", est.matching_residual <= eta)
    if closed is not None:
        rep.results["witness_length"] = closed
        rep.check("upper_le_witness", est.upper_bound <= closed + tol)
    rep.tables["estimate"] = (["upper", "value", "error", "matching_residual"],
                              [(est.upper_bound, est.value, est.error_bound,
                                est.matching_residual)])
    rep.ledger.update(eta=eta, tol=tol, n=n, max_evals=max_evals, quadrature=QUADRATURE)
    return rep


def _spacetime_sky(ctx):
    from .legendrian import fiber, reeb_image
    from .spacetime import (SKY_MODEL, Event, sky, sky_distance_upper, sky_order_certificate,
                            tau_g, torus_distance)
    rep = Report()
    st = ctx.spacetime()
    n = ctx.n("n", 256)
    tol = ctx.tol("tol", 1e-6)
    p = Event(*ctx.params["event"])
    S = sky(st, p, n)
    rep.results.update(spacetime=st.to_dict(), event=[p.t, p.x, p.y], drift=S.drift, flagged=S.flagged)
    rep.check("null_drift", S.drift <= tol)
    if st.flat:
        exact = reeb_image(fiber(SKY_MODEL, (p.x, p.y), n), p.t)
        gap = S.curve.hausdorff(exact)
        rep.results["closed_form_gap"] = gap
        rep.check("sky_matches_closed_form", gap <= tol)
    rep.tables["sky"] = (["x", "y", "theta"], [tuple(r) for r in S.curve.points])
    if "target" in ctx.params:
        q = Event(*ctx.params["target"])
        tg = tau_g(st, p, q)
        rep.results["target"] = [q.t, q.x, q.y]
        rep.results["tau_g"] = tg
        if st.flat or (q.x, q.y) == (p.x, p.y):
            du = sky_distance_upper(st, p, q, n)
            rep.results["distance"] = du.to_dict()
            rep.check("distance_witness_matches", du.matching_residual <= ctx.tol("eta", 1e-3))
        if st.flat:
            cert = sky_order_certificate(st, p, q, n)
            rep.check("certificate_iff_timelike", (cert is not None) == (tg > 0))
            if cert is not None:
                rep.results["order"] = cert.to_dict()
                gap = (q.t - p.t) - torus_distance(p.position, q.position)
                rep.results["dt_minus_d"] = gap
                rep.check("margin_equals_dt_minus_d", abs(cert.margin - gap) <= tol)
                rep.check("margin_positive", cert.margin > 0)
    rep.ledger.update(n=n, tol=tol, geodesic_max_step=0.01, collocation_nodes=64,
                      quadrature="8-point Gauss per collocation segment")
    return rep


def _spacetime_scaling(ctx):
    from .spacetime import continuity_scaling
    rep = Report()
    st = ctx.spacetime()
    n = ctx.n("n", 256)
    p = tuple(ctx.params.get("event", [0.0, 0.0]))
    deltas = tuple(ctx.params.get("deltas", [0.2, 0.1, 0.05, 0.025]))
    ratio = float(ctx.params.get("max_ratio", 1.01))
    rows, C = continuity_scaling(st, p, deltas, n)
    rep.results.update(spacetime=st.to_dict(), event=list(p), C=C)
    rep.check("upper_le_ratio_delta", C <= ratio)
    rep.tables["scaling"] = (["delta", "upper", "reeb_part", "translation_part"], rows)
    rep.ledger.update(n=n, max_ratio=ratio)
    return rep


SCENARIOS = {
    "calibrate-reeb": _calibrate_reeb,
    "reparametrize": _reparametrize,
    "zap": _zap,
    "theorem3": _theorem3,
    "loop-s3": _loop_s3,
    "chekanov": _chekanov,
    "spacetime-sky": _spacetime_sky,
    "spacetime-scaling": _spacetime_scaling,
}


def run_scenario(cfg, grid_scale=1.0, base_dir="."):
    """Execute a validated config and return its :class:`Report`."""
    ctx = _Ctx(cfg, grid_scale, base_dir)
    rep = SCENARIOS[cfg["scenario"]](ctx)
    rep.ledger.setdefault("grid_scale", float(grid_scale))
    rep.ledger["grid"] = dict(cfg.get("grid", {}))
    return rep


# -- commands ------------------------------------------------------------------------------

def cmd_run(args):
    if not args.grid_scale > 0:
        print("error: --grid-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}: {d}", file=sys.stderr)
        return EXIT_CONFIG
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        rep = run_scenario(cfg, args.grid_scale, Path(args.config).parent)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{args.config}: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except ContactLabError as exc:
        rep = Report()
        rep.results["error"] = f"{type(exc).__name__}: {exc}"
        rep.check(type(exc).__name__, False)
    paths = write_outputs(cfg, rep, args.out, args.grid_scale, started, time.perf_counter() - t0)
    for name, ok in rep.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"{'PASS' if rep.passed else 'FAIL'}  {cfg['scenario']} -> {paths[0]}")
    if not rep.passed:
        failed = [k for k, v in rep.checks.items() if not v]
        msg = rep.results.get("error", "")
        print(f"invariant failed: {', '.join(failed)}" + (f" ({msg})" if msg else ""),
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_PASS


def _parse_filters(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"filter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_list(args):
    try:
        entries = list_library(_parse_filters(args.filter))
    except (KeyError, ValueError) as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    if args.json:
        print(json.dumps([e.to_dict() for e in entries], indent=2))
    else:
        for e in entries:
            print(f"{e.id:24s} {e.category:9s} {e.model:5s} {e.description}  [{e.provenance}]")
    return EXIT_PASS


def build_parser():
    p = argparse.ArgumentParser(prog="contactlab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="contactlab-out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="seed (overrides the config)")
    common.add_argument("--grid-scale", type=float, default=1.0,
                        help="global grid refinement multiplier")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one scenario config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", parents=[common], help="list shipped library entries")
    ls.add_argument("--json", action="store_true", help="machine-readable output")
    ls.add_argument("--filter", action="append", metavar="KEY=VALUE",
                    help="keep entries with KEY equal to VALUE (id, category, model)")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

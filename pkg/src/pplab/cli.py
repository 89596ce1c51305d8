"""Command-line front end: ``pplab <subcommand> [--config file] [--out dir] ...``.

Settings are resolved in the order defaults < config file < ``PPLAB_*``
environment variables < command-line flags.  The config file is INI-style:

    [grid]
    k = 1
    n_per_axis = 257

    [pair]
    entry = loglog

    [params]          # gallery parameters, passed to the entry's builder
    delta = 0.1

    [method]
    alpha = 1.5
    eps = [2, 4, 8]      # in units of the grid spacing h

Every run writes ``report.json`` and ``<subcommand>.csv`` into ``--out``.
Exit codes: 0 all checks pass, 1 a check failed, 2 invalid configuration,
3 a solver did not converge.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2, 3
SUBCOMMANDS = ("capacity", "envelope", "majorant", "energy", "lebesgue", "wstar", "verify", "gallery")

log = logging.getLogger("pplab")


class ConfigError(ValueError):
    def __init__(self, constraint: str, message: str):
        super().__init__(message)
        self.constraint = constraint


class NonConvergence(RuntimeError):
    pass


# config fields grouped by INI section; the section only matters for file layout
SECTIONS = {
    "grid": ("k", "n_per_axis"),
    "pair": ("entry", "normalize"),
    "sets": ("radius", "decay_levels"),
    "method": ("alpha", "lam", "N", "tol", "delta", "c", "m", "p_deg", "n_max", "eps", "r", "points",
               "dictionary_seeds", "sup_tol", "cap_tol"),
    "run": ("seed", "threads", "profile", "only", "skip", "out"),
}


@dataclass
class ExperimentConfig:
    subcommand: str = "verify"
    k: int = 1
    n_per_axis: int = 129
    entry: str = "loglog"
    normalize: bool = True
    params: dict = field(default_factory=dict)
    radius: float = 0.3
    decay_levels: int = 0
    alpha: float = 1.5
    lam: float | None = None
    N: int = 8
    tol: float = 1e-9
    delta: float = 0.1
    c: float = 0.5
    m: int = 1
    p_deg: int = 0
    n_max: int = 16
    eps: list = field(default_factory=lambda: [2, 4, 8, 16])
    r: list = field(default_factory=lambda: [4, 8, 16])
    points: list = field(default_factory=lambda: [0.5, 0.3 + 0.4j])
    dictionary_seeds: list = field(default_factory=lambda: [0, 1])
    sup_tol: float | None = None
    cap_tol: float | None = None
    seed: int = 0
    threads: int = 1
    profile: str = "full"
    only: list = field(default_factory=list)
    skip: list = field(default_factory=list)
    out: str = "pplab-out"
    # gallery subcommand only
    action: str = "list"
    name: str = ""

    # ---------------------------------------------------------- serialization

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["run"] = {"subcommand": self.subcommand}
        for sec, keys in SECTIONS.items():
            cp.setdefault(sec, {})
            for key in keys:
                cp[sec][key] = repr(getattr(self, key))
        cp["params"] = {k: repr(v) for k, v in sorted(self.params.items())}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp.read_string(text)
        cfg = dataclasses.replace(base) if base is not None else cls()
        known = {f.name for f in dataclasses.fields(cls)}
        for sec in cp.sections():
            if sec == "params":
                cfg.params = {**cfg.params, **{k: _parse_value(v) for k, v in cp[sec].items()}}
                continue
            for key, raw in cp[sec].items():
                if key not in known:
                    raise ConfigError("unknown_key", f"unknown config key {key!r} in section [{sec}]")
                setattr(cfg, key, _coerce(key, _parse_value(raw)))
        return cfg

    def as_dict(self) -> dict:
        """JSON form for reports; the output path is left out so reports do not depend on it."""
        d = dataclasses.asdict(self)
        d.pop("out")
        return {k: _jsonable(v) for k, v in d.items()}


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        low = raw.lower()
        if low in ("true", "yes", "on"):
            return True
        if low in ("false", "no", "off"):
            return False
        if low in ("none", ""):
            return None
        return raw


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(key: str, value):
    t = str(_FIELD_TYPES.get(key, ""))
    try:
        if value is None:
            return None
        if t == "int":
            return int(value)
        if t.startswith("float"):
            return float(value)
        if t == "bool":
            return bool(value)
        if t == "list":
            return list(value) if isinstance(value, (list, tuple)) else [value]
    except (TypeError, ValueError) as exc:
        raise ConfigError("type", f"{key}: cannot read {value!r} as {t}") from exc
    return value


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in sorted(v.items())}
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def env_overrides(cfg: ExperimentConfig, environ=None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    cfg = dataclasses.replace(cfg)
    for f in dataclasses.fields(ExperimentConfig):
        key = "PPLAB_" + f.name.upper()
        if key in environ:
            setattr(cfg, f.name, _coerce(f.name, _parse_value(environ[key])))
    return cfg


# ------------------------------------------------------------------ validation

def validate(cfg: ExperimentConfig) -> None:
    """Check every downstream precondition before any computation starts."""
    from . import gallery
    from .majorant import default_lambda

    def need(ok, constraint, msg):
        if not ok:
            raise ConfigError(constraint, msg)

    need(cfg.subcommand in SUBCOMMANDS, "subcommand", f"unknown subcommand {cfg.subcommand!r}")
    need(cfg.k in (1, 2), "k in {1, 2}", f"k must be 1 or 2, got {cfg.k}")
    need(cfg.n_per_axis >= 17 and cfg.n_per_axis % 2 == 1, "n_per_axis odd and >= 17",
         f"n_per_axis must be odd and at least 17, got {cfg.n_per_axis}")
    need(cfg.threads >= 1, "threads >= 1", "threads must be positive")
    need(cfg.tol > 0, "tol > 0", "tol must be positive")
    need(1.0 <= cfg.alpha < 2.0, "1 <= alpha < 2", f"alpha must lie in [1, 2), got {cfg.alpha}")
    lam = default_lambda(cfg.alpha) if cfg.lam is None else cfg.lam
    need(2.0**cfg.alpha < lam < 4.0, "2^alpha < lambda < 4",
         f"lambda must satisfy 2^alpha = {2.0**cfg.alpha:.6g} < lambda < 4, got {lam}")
    need(cfg.N >= 1, "N >= 1", "N must be at least 1")
    need(0.0 < cfg.delta < 0.5, "0 < delta < 1/2", "delta must lie in (0, 1/2)")
    need(cfg.c > 0, "c > 0", "c must be positive")
    need(0 <= cfg.m <= 3, "0 <= m <= 3", "m must lie in 0..3")
    need(cfg.n_max >= 3, "n_max >= 3", "n_max must be at least 3 for a growth fit")
    need(cfg.profile in ("full", "quick"), "profile in {full, quick}", f"unknown profile {cfg.profile!r}")
    h = 2.0 / (cfg.n_per_axis - 1)
    need(0.0 < cfg.radius <= 1.0 - 2 * h, "0 < radius <= 1 - 2h", f"radius must lie in (0, {1 - 2 * h:.4g}]")
    need(all(e >= 2 for e in cfg.eps), "eps >= 2h", "eps entries are in units of h and must be >= 2")
    need(all(x > 0 for x in cfg.r), "r > 0", "r entries (units of h) must be positive")
    need(len(cfg.dictionary_seeds) >= 1, "dictionary_seeds non-empty", "need at least one dictionary seed")
    if cfg.subcommand in ("majorant", "energy", "lebesgue", "wstar") or cfg.decay_levels:
        need(cfg.entry in gallery.names(), "entry in gallery", f"unknown gallery entry {cfg.entry!r}")
        need(cfg.k in gallery.get(cfg.entry).ks, "entry supports k", f"{cfg.entry!r} does not support k={cfg.k}")
        unknown = set(cfg.params) - set(gallery.get(cfg.entry).defaults)
        need(not unknown, "params known to entry", f"unknown parameters for {cfg.entry!r}: {sorted(unknown)}")
    if cfg.subcommand == "energy":
        need(0 <= cfg.p_deg <= cfg.k, "0 <= p_deg <= k", "p_deg must lie in 0..k")
    if cfg.subcommand == "gallery":
        need(cfg.action in ("list", "show"), "gallery action", "gallery takes 'list' or 'show <name>'")
        if cfg.action == "show":
            need(cfg.name in gallery.names(), "entry in gallery", f"unknown gallery entry {cfg.name!r}")


# ------------------------------------------------------------------ outputs

def claim(name, value, target=None, tolerance=None, oracle="", status=None, upper=True) -> dict:
    """A numeric claim with its tolerance and oracle; status derived when not given."""
    if status is None:
        if target is None:
            status = "pass" if np.isfinite(value) else "fail"
        elif tolerance is None:
            status = "pass" if (value <= target if upper else value >= target) else "fail"
        else:
            status = "pass" if abs(value - target) <= tolerance * abs(target) else "fail"
    return {"name": name, "value": float(value), "target": None if target is None else float(target),
            "tolerance": tolerance, "oracle": oracle, "status": status}


def write_outputs(out: Path, sub: str, cfg: ExperimentConfig, claims: list[dict], scalars: dict,
                  columns: list[str], rows: list[list]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    report = {"schema_version": SCHEMA_VERSION, "subcommand": sub, "config": cfg.as_dict(),
              "claims": [_jsonable(c) for c in claims], "scalars": _jsonable(scalars),
              "status": "fail" if any(c["status"] == "fail" for c in claims) else "pass"}
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    with open(out / f"{sub}.csv", "w", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    return v


# ------------------------------------------------------------------ subcommands

def _grid(cfg):
    from .grid import make_ball_grid
    return make_ball_grid(cfg.k, cfg.n_per_axis)


def _pair(cfg, g):
    from . import gallery
    from .wstar import normalize_pair
    p, facts = gallery.instantiate(cfg.entry, g, **cfg.params)
    return (normalize_pair(p) if cfg.normalize else p), facts


def _center(k):
    return [0.0] * k


def run_capacity(cfg):
    from .capacity import cap_bt, cap_decay_fit
    from .grid import ball_mask
    from .majorant import default_lambda, level_sets
    g = _grid(cfg)
    c = cap_bt(ball_mask(g, _center(cfg.k), cfg.radius), g, tol=cfg.tol)
    if not c.converged:
        raise NonConvergence(f"envelope residual {c.residual:.3e} after {c.iterations} sweeps")
    exact = (1.0 / np.log(1.0 / cfg.radius)) ** cfg.k
    tol = cfg.cap_tol if cfg.cap_tol is not None else (0.03 if cfg.k == 1 else 0.15)
    claims = [claim("capacity of centered ball", c.value, exact, tol, "(1/log(1/r))^k")]
    cols = ["set", "n", "value", "raw_value", "mass_outside_E", "clipped_fraction", "residual", "iterations"]
    rows = [["ball", 0, c.value, c.raw_value, c.mass_outside_E, c.clipped_fraction, c.residual, c.iterations]]
    scalars = {"exact": exact}
    if cfg.decay_levels:
        p, _ = _pair(cfg, g)
        lam = default_lambda(cfg.alpha) if cfg.lam is None else cfg.lam
        Ks = level_sets(p.phi, p.psi, ball_mask(g, _center(cfg.k), 0.5), lam, cfg.decay_levels)
        caps = []
        for n, Kn in enumerate(Ks, start=1):
            e = cap_bt(Kn, g, tol=cfg.tol)
            caps.append((n, e.value))
            rows.append([f"K_{n}", n, e.value, e.raw_value, e.mass_outside_E, e.clipped_fraction, e.residual,
                         e.iterations])
        try:
            fit = cap_decay_fit(caps)
            claims.append(claim("decay slope", fit.slope, fit.bound_slope(lam) + 0.1, None, "m log(lambda/4) + 0.1"))
            claims.append(claim("decay fit r^2", fit.r2, 0.9, None, "linear fit quality", upper=False))
        except ValueError as exc:
            claims.append(claim("decay fit", float("nan"), None, None, str(exc), status="fail"))
    return claims, scalars, cols, rows


def run_envelope(cfg):
    from .acceptance import extremal_closed_form
    from .envelope import psh_residual, relative_extremal
    from .grid import Mask, ball_mask
    g = _grid(cfg)
    res = relative_extremal(ball_mask(g, _center(cfg.k), cfg.radius), g, tol=cfg.tol)
    if not res.converged:
        raise NonConvergence(f"envelope residual {res.residual:.3e} after {res.iterations} sweeps")
    exact = extremal_closed_form(g, cfg.radius)
    err = np.abs(res.u.values - exact)
    tol = cfg.sup_tol if cfg.sup_tol is not None else (1e-2 if cfg.k == 1 else 3e-2)
    sup = float(err[g.ball].max())
    claims = [claim("sup error vs closed form", sup, tol, None, "max(log|z|/log(1/r), -1)"),
              claim("psh residual", psh_residual(res.u, m=Mask.interior_of(g)), 8 * cfg.tol, None,
                    "discrete submean")]
    c = g.center_index
    cols = ["x", "u", "closed_form", "error"]
    rows = []
    for i in range(c[0], g.n_per_axis):
        node = (i,) + c[1:]
        rows.append([float(g.axis[i]), float(res.u.values[node]), float(exact[node]), float(err[node])])
    return claims, {"iterations": res.iterations, "residual": res.residual}, cols, rows


def run_majorant(cfg):
    from .grid import ball_mask
    from .majorant import budget_sets, build_majorant
    g = _grid(cfg)
    p, _ = _pair(cfg, g)
    b = build_majorant(p, ball_mask(g, _center(cfg.k), 0.5), cfg.alpha, cfg.lam, cfg.N, cfg.tol)
    rep = b.report
    bud = budget_sets(b.u_fields, cfg.alpha, g)
    vac = "vacuous" if rep.vacuous else None
    claims = [claim("psh residual", rep.psh_residual, 8 * cfg.tol, None, "sum of psh terms"),
              claim("violation fraction", rep.violation_fraction, 1e-3, None,
                    "2^alpha u <= -phi^alpha off a pluripolar set", status=vac),
              claim("finiteness witness", rep.witness_value, None, None, "u(x0) > -inf"),
              claim("budget tail", bud.tail_measure, bud.ball_measure, None, "sum_(n>=4) Leb(B_n) < Leb(ball)")]
    cols = ["n", "K_n_nodes", "u_star_min", "budget_measure"]
    rows = [[n, b.K_masks[n - 1].count, float(np.nanmin(u.values)) if u is not None else 0.0, bud.measures[n - 1]]
            for n, u in enumerate(b.u_fields, start=1)]
    return claims, rep.as_dict(), cols, rows


def run_energy(cfg):
    from .energy import default_dictionary, growth_exponent, probe_I, probe_J
    from .grid import ball_mask
    g = _grid(cfg)
    p, _ = _pair(cfg, g)
    K = ball_mask(g, _center(cfg.k), 0.5)
    ns = list(range(1, cfg.n_max + 1))
    cols = ["n", "dictionary_seed", "probe", "m", "p_deg", "value", "label"]
    rows, claims, exps = [], [], {}
    probes = [("I", probe_I, cfg.p_deg)]
    if cfg.p_deg <= cfg.k - 1:
        probes.insert(0, ("J", probe_J, cfg.p_deg))
    for seed in cfg.dictionary_seeds:
        d = default_dictionary(g, int(seed))
        for name, fn, pd in probes:
            vals = []
            for n in ns:
                pr = fn(p, None, n, cfg.m, pd, K, d)
                vals.append(pr.value)
                rows.append([n, int(seed), name, cfg.m, pd, pr.value, pr.label])
            if min(vals) > 0:
                e = growth_exponent(ns, vals).exponent
                exps.setdefault(name, []).append(e)
                claims.append(claim(f"{name} growth exponent (seed {seed})", e, cfg.m + 0.3, None, "c n^m + 0.3"))
    for name, es in exps.items():
        claims.append(claim(f"{name} exponent spread", max(es) - min(es), 0.2, None, "dictionaries agree"))
    return claims, {"exponents": exps}, cols, rows


def run_lebesgue(cfg):
    from .lebesgue import density_ratio, lebesgue_ratio, mollifier_convergence
    g = _grid(cfg)
    p, _ = _pair(cfg, g)
    h = g.h
    eps = [e * h for e in cfg.eps]
    rs = [r * h for r in cfg.r]
    nodes = [g.nearest_node([complex(x)] + [0j] * (cfg.k - 1)) for x in cfg.points]
    cols = ["point", "eps_or_r", "quantity", "kind", "value", "reference", "error", "cross_deviation"]
    rows, claims = [], []
    for i, node in enumerate(nodes):
        A = lebesgue_ratio(p.phi, node, eps)
        rows += [[i, e, "A", "", a, 0.0, a, ""] for e, a in zip(eps, A)]
        claims.append(claim(f"A(x{i}, eps) shrinks", A[0], A[-1], None, "Lebesgue point"))
        for r, (b, c, q) in zip(rs, density_ratio(p.phi, node, cfg.delta, rs)):
            rows.append([i, r, "density_ratio", "", q, b, c, ""])
    for row in mollifier_convergence(p.phi, nodes, eps_list=eps):
        rows.append([row["point"], row["eps"], "mollified", row["kind"], row["value"], row["reference"],
                     row["error"], row["cross_deviation"]])
    return claims, {"points": [list(n) for n in nodes]}, cols, rows


def run_wstar(cfg):
    from .grid import Mask
    from .wstar import exp_moment, star_norm_report
    g = _grid(cfg)
    p, facts = _pair(cfg, g)
    sn = star_norm_report(p, check=False)
    dom = sn.domination
    em = exp_moment(p.phi, Mask.whole_ball(g), cfg.c, cfg.alpha)
    claims = [claim("domination violation fraction", dom.violation_fraction, 1e-3, None,
                    "dphi ^ d^c phi <= dd^c psi node-wise"),
              claim("exp moment", em.value, None, None, "finite")]
    if not cfg.normalize:
        measured = {"dominator_mass": sn.mass, "l1_norm": sn.l1}
        for f in facts:
            if f.quantity in measured:
                claims.append(claim(f.quantity, measured[f.quantity], f.value, f.tolerance, f.oracle))
    cols = ["quantity", "value"]
    rows = [["witness_norm", sn.value], ["l1", sn.l1], ["mass", sn.mass], ["exp_moment", em.value],
            ["log_exp_moment", em.log_value], ["violating_nodes", dom.n_violating], ["checked_nodes", dom.n_checked]]
    return claims, {"provenance": p.provenance, "facts": [f.as_dict() for f in facts]}, cols, rows


def run_verify(cfg):
    from .acceptance import run_suite
    results = run_suite(cfg.profile, cfg.seed, only=[int(x) for x in cfg.only], skip=[int(x) for x in cfg.skip],
                        echo=lambda s: print(s, flush=True))
    claims, rows = [], []
    for r in results:
        for c in r.checks:
            claims.append({"name": f"{r.number}: {c.name}", "value": c.value, "target": c.target,
                           "tolerance": c.tolerance, "oracle": c.oracle, "status": c.status})
            rows.append([r.number, r.title, c.name, c.value, c.target, c.tolerance, c.oracle, c.status])
    cols = ["criterion", "title", "check", "value", "target", "tolerance", "oracle", "status"]
    return claims, {"criteria": [r.as_dict() for r in results]}, cols, rows


RUNNERS = {"capacity": run_capacity, "envelope": run_envelope, "majorant": run_majorant, "energy": run_energy,
           "lebesgue": run_lebesgue, "wstar": run_wstar, "verify": run_verify}


# ------------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pplab", description="Grid laboratory for pluripotential theory.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path)
    common.add_argument("--out", type=str)
    common.add_argument("--threads", type=int)
    common.add_argument("--resolution", type=int, help="grid nodes per axis")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify":
            sp.add_argument("--profile", choices=("full", "quick"))
            sp.add_argument("--only", type=int, nargs="*")
            sp.add_argument("--skip", type=int, nargs="*")
        elif name == "gallery":
            sp.add_argument("action", choices=("list", "show"))
            sp.add_argument("name", nargs="?", default="")
        else:
            sp.add_argument("--k", type=int)
            sp.add_argument("--entry")
    return ap


def resolve_config(args, environ=None) -> ExperimentConfig:
    cfg = ExperimentConfig(subcommand=args.subcommand)
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError("config readable", f"cannot read {args.config}: {exc}") from exc
        try:
            cfg = ExperimentConfig.from_ini(text, cfg)
        except configparser.Error as exc:
            raise ConfigError("config syntax", str(exc)) from exc
        cfg.subcommand = args.subcommand
    cfg = env_overrides(cfg, environ)
    flag_map = {"out": "out", "threads": "threads", "resolution": "n_per_axis", "seed": "seed", "profile": "profile",
                "only": "only", "skip": "skip", "k": "k", "entry": "entry", "action": "action", "name": "name"}
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, key, v)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        validate(cfg)
    except ConfigError as exc:
        err = {"error": "config", "constraint": exc.constraint, "message": str(exc), "schema_version": SCHEMA_VERSION}
        print(json.dumps(err, sort_keys=True))
        out = getattr(args, "out", None)
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(json.dumps(err, indent=2, sort_keys=True) + "\n")
        return EXIT_CONFIG

    import warnings

    import numba
    with warnings.catch_warnings():
        # numba warns about an old TBB while picking a threading layer; the kernels here are serial
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))

    if cfg.subcommand == "gallery":
        from . import gallery
        if cfg.action == "list":
            print(json.dumps([gallery.get(n).describe() for n in gallery.names()], indent=2, sort_keys=True))
        else:
            print(json.dumps(gallery.get(cfg.name).describe(), indent=2, sort_keys=True))
        return EXIT_PASS

    from .wstar import ConvergenceError
    try:
        claims, scalars, cols, rows = RUNNERS[cfg.subcommand](cfg)
    except (NonConvergence, ConvergenceError) as exc:
        err = {"error": "nonconvergence", "message": str(exc), "schema_version": SCHEMA_VERSION}
        print(json.dumps(err, sort_keys=True))
        return EXIT_NONCONVERGED
    write_outputs(Path(cfg.out), cfg.subcommand, cfg, claims, scalars, cols, rows)
    failed = [c["name"] for c in claims if c["status"] == "fail"]
    if failed:
        log.warning("failed checks: %s", ", ".join(failed))
        return EXIT_FAIL
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())

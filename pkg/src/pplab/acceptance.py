"""The acceptance suite: eleven criteria, each a list of numeric checks with tolerance and oracle.

``run_suite`` returns the results in a fixed order; nothing in them depends on
timing, so repeated runs serialize to identical bytes.  The "quick" profile
shrinks every resolution for smoke runs; its numbers are not expected to meet
the tolerances.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as spi
from scipy.special import gamma, gammaincc

from . import gallery
from .calculus import OMEGA_K_DENSITY, ddc_mass
from .capacity import cap_bt, cap_decay_fit
from .energy import default_dictionary, growth_exponent, probe_I, probe_J
from .envelope import relative_extremal
from .grid import GridDomain, Mask, ScalarField, ball_mask, integrate, make_ball_grid
from .lebesgue import lebesgue_ratio, mollifier_convergence
from .majorant import budget_sets, build_majorant, default_lambda, level_sets
from .wstar import exp_moment, normalize_pair, star_norm_report

log = logging.getLogger(__name__)

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"

PROFILES = {
    "full": {"c1": (513, 65), "c2": (513, 65), "c3": (1025, 65, 257), "c4": 1025, "c5": (257, 513),
             "c7": 257, "c8": (513, 1025), "c10": (257, 513)},
    "quick": {"c1": (65, 17), "c2": (65, 17), "c3": (129, 17, 65), "c4": 129, "c5": (65, 129),
              "c7": 65, "c8": (129, 257), "c10": (65, 129)},
}


@dataclass
class Check:
    name: str
    value: float
    target: float | None
    tolerance: float | None
    oracle: str
    status: str


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        states = {c.status for c in self.checks}
        if FAIL in states or not states:
            return FAIL
        if states == {VACUOUS}:
            return VACUOUS
        return PASS

    def line(self) -> str:
        failed = [c.name for c in self.checks if c.status == FAIL]
        vac = [c.name for c in self.checks if c.status == VACUOUS]
        extra = ""
        if failed:
            extra += " failed: " + ", ".join(failed)
        if vac:
            extra += " vacuous: " + ", ".join(vac)
        return f"[{self.status.upper():7s}] criterion {self.number:2d} {self.title}{extra}"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "status": self.status,
                "checks": [asdict(c) for c in self.checks], "notes": list(self.notes)}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def rel_check(name: str, value: float, target: float, tol: float, oracle: str) -> Check:
    ok = np.isfinite(value) and _rel(value, target) <= tol
    return Check(name, float(value), float(target), tol, oracle, PASS if ok else FAIL)


def bound_check(name: str, value: float, bound: float, oracle: str, upper: bool = True) -> Check:
    ok = np.isfinite(value) and (value <= bound if upper else value >= bound)
    return Check(name, float(value), float(bound), None, oracle, PASS if ok else FAIL)


def flag_check(name: str, ok: bool, oracle: str, value: float = float("nan")) -> Check:
    return Check(name, float(value), None, None, oracle, PASS if ok else FAIL)


def extremal_closed_form(g: GridDomain, r: float) -> np.ndarray:
    """u*(z) = max(log|z| / log(1/r), -1) for the centered ball of radius r."""
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(g.radius) / np.log(1.0 / r), -1.0)


class Suite:
    """Runs the criteria, caching shared fields between them."""

    def __init__(self, profile: str = "full", seed: int = 0, tol: float = 1e-9):
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
        self.profile = profile
        self.res = PROFILES[profile]
        self.seed = seed
        self.tol = tol
        self._cache: dict = {}

    def _k2_ball_envelope(self, n: int):
        key = ("k2ball", n)
        if key not in self._cache:
            g = make_ball_grid(2, n)
            E = ball_mask(g, [0, 0], 0.5)
            self._cache[key] = (g, E, relative_extremal(E, g, tol=self.tol))
        return self._cache[key]

    # -------------------------------------------------------------- criteria

    def c1(self) -> CriterionResult:
        out = CriterionResult(1, "normalization")
        for k, n, tol in ((1, self.res["c1"][0], 0.03), (2, self.res["c1"][1], 0.15)):
            g = make_ball_grid(k, n)
            vol = integrate(ScalarField.constant(g, 1.0), Mask.whole_ball(g)).value * OMEGA_K_DENSITY[k]
            out.checks.append(rel_check(f"omega^k volume k={k} n={n}", vol, 1.0, 0.01, "int_B omega^k = 1"))
            with np.errstate(divide="ignore"):
                f = ScalarField(g, np.maximum(np.log(g.radius), -3.0))
            mass = ddc_mass(f, Mask.interior_of(g)).value
            out.checks.append(rel_check(f"dd^c max(log|z|,-3) mass k={k} n={n}", mass, 1.0, tol,
                                        "dd^c log|z| ^ omega^{k-1} is a unit Dirac mass"))
        return out

    def c2(self) -> CriterionResult:
        out = CriterionResult(2, "relative extremal functions")
        n1, n2 = self.res["c2"]
        g = make_ball_grid(1, n1)
        res = relative_extremal(ball_mask(g, [0], 0.3), g, tol=self.tol)
        err = float(np.max(np.abs(res.u.values - extremal_closed_form(g, 0.3))[g.ball]))
        out.checks.append(bound_check(f"k=1 disc 0.3 sup error n={n1}", err, 1e-2,
                                      "max(log|z|/log(1/0.3), -1)"))
        g2, _, res2 = self._k2_ball_envelope(n2)
        err2 = float(np.max(np.abs(res2.u.values - extremal_closed_form(g2, 0.5))[g2.ball]))
        out.checks.append(bound_check(f"k=2 ball 0.5 sup error n={n2}", err2, 3e-2,
                                      "max(log|z|/log 2, -1)"))
        out.notes.append(f"k=2 envelope: {res2.iterations} sweeps, residual {res2.residual:.3e}")
        return out

    def c3(self) -> CriterionResult:
        out = CriterionResult(3, "capacity")
        n1, n2, nm = self.res["c3"]
        g = make_ball_grid(1, n1)
        c = cap_bt(ball_mask(g, [0], 0.3), g, tol=self.tol)
        out.checks.append(rel_check(f"Cap(disc 0.3) n={n1}", c.value, 1 / np.log(1 / 0.3), 0.03,
                                    "1/log(1/r) for a centered disc"))
        g2, E2, env = self._k2_ball_envelope(n2)
        c2 = cap_bt(E2, g2, envelope=env)
        out.checks.append(rel_check(f"Cap(ball 0.5) k=2 n={n2}", c2.value, 1 / np.log(2) ** 2, 0.15,
                                    "(1/log(1/r))^2 for a centered ball in C^2"))
        out.notes.append(f"k=2 capacity raw {c2.raw_value:.4f}, clipped fraction {c2.clipped_fraction:.3f}")
        gm = make_ball_grid(1, nm)
        caps = [cap_bt(ball_mask(gm, [0], r), gm, tol=self.tol).value for r in (0.1, 0.2, 0.3, 0.4, 0.5)]
        mono = all(a <= 1.05 * b for a, b in zip(caps, caps[1:]))
        out.checks.append(flag_check(f"monotone over 5 nested discs n={nm}", mono,
                                     "E subset F implies Cap(E) <= Cap(F), 5% slack", min(np.diff(caps))))
        return out

    def c4(self) -> CriterionResult:
        out = CriterionResult(4, "loglog dominator mass")
        delta = 0.1
        b = 0.5 - delta
        closed = gallery.loglog_mass(delta)
        # gradient form density (2/pi) b^2 t^{-1-2 delta} |z|^-2 over B(0,1/2), t = -log|z|^2;
        # in polar form 4 b^2 t^{-1-2 delta} dr/r, and dr/r = -dt/2
        quad, _ = spi.quad(lambda t: 2 * b * b * t ** (-1 - 2 * delta), gallery.LOG4, np.inf)
        out.checks.append(rel_check("closed form vs quadrature", closed, quad, 1e-3, "radial quadrature"))
        n = self.res["c4"]
        g = make_ball_grid(1, n)
        p, _ = gallery.instantiate("loglog", g, delta=delta)
        mass = star_norm_report(p).mass
        out.checks.append(rel_check(f"star-norm mass term n={n}", mass, closed, 0.01,
                                    "b^2 (2 log 2)^(-2 delta) / delta"))
        return out

    def _loglog_majorant(self, n: int):
        key = ("maj", n)
        if key not in self._cache:
            g = make_ball_grid(1, n)
            p, _ = gallery.instantiate("loglog", g)
            p = normalize_pair(p)
            K = ball_mask(g, [0], 0.5)
            self._cache[key] = (g, p, K, build_majorant(p, K, 1.5, N=8, tol=self.tol))
        return self._cache[key]

    def c5(self) -> CriterionResult:
        out = CriterionResult(5, "psh majorant")
        na, nb = self.res["c5"]
        ga, _, _, ma = self._loglog_majorant(na)
        gb, _, _, mb = self._loglog_majorant(nb)
        ra, rb = ma.report, mb.report
        out.checks.append(bound_check(f"(a) psh residual n={nb}", rb.psh_residual, 8 * self.tol,
                                      "u is a sum of psh terms"))
        out.notes.append(f"(a) residual including {rb.input_defect_nodes} nodes where psi itself "
                         f"fails the submean test: {rb.psh_residual_all:.3e}")
        if rb.certified_nodes == 0:
            out.checks.append(Check(f"(b) violation fraction n={nb}", 0.0, 1e-3, None,
                                    "no node has phi >= 2 inside K", VACUOUS))
        else:
            out.checks.append(bound_check(f"(b) violation fraction n={nb}", rb.violation_fraction, 1e-3,
                                          "2^alpha u <= -phi^alpha off a pluripolar set"))
        va, vb = ma.violation_mask, mb.violation_mask
        if va.is_empty() and vb.is_empty():
            out.checks.append(Check("(b) violation capacity halves", 0.0, None, None,
                                    "both violation masks are empty", VACUOUS))
        else:
            ca = cap_bt(va, ga, tol=self.tol).value if not va.is_empty() else 0.0
            cb = cap_bt(vb, gb, tol=self.tol).value if not vb.is_empty() else 0.0
            out.checks.append(flag_check("(b) violation capacity halves", cb <= ca / 2,
                                         "violations concentrate on a pluripolar set", cb))
        out.checks.append(rel_check(f"(c) L1(K) n={nb} vs n={na}", rb.l1_norm, ra.l1_norm, 0.10,
                                    "resolution stability"))
        out.checks.append(flag_check("(c) finiteness witness", np.isfinite(rb.witness_value),
                                     "u(x0) > -inf at the argmax node", rb.witness_value))
        bud = budget_sets(mb.u_fields, 1.5, gb, n0=4)
        out.checks.append(bound_check(f"(d) budget sum_(n>=4) Leb(B_n) n={nb}", bud.tail_measure, bud.ball_measure,
                                      "Leb of the unit ball"))
        return out

    def c6(self) -> CriterionResult:
        out = CriterionResult(6, "capacity decay of level sets")
        n = self.res["c5"][1]
        g, p, K, _ = self._loglog_majorant(n)
        lam = default_lambda(1.5)
        Ks = level_sets(p.phi, p.psi, K, lam, 5)
        caps = [(i, cap_bt(Kn, g, tol=self.tol).value) for i, Kn in enumerate(Ks, start=1)]
        out.notes.append("capacities: " + ", ".join(f"n={i}: {c:.4g}" for i, c in caps))
        try:
            fit = cap_decay_fit(caps)
        except ValueError as exc:
            out.checks.append(flag_check("decay fit", False, str(exc)))
            return out
        out.checks.append(bound_check("fitted slope", fit.slope, fit.bound_slope(lam) + 0.1, "m log(lambda/4) + 0.1"))
        out.checks.append(bound_check("fit r^2", fit.r2, 0.9, "linear fit quality", upper=False))
        return out

    def c7(self) -> CriterionResult:
        out = CriterionResult(7, "energy probe growth")
        n = self.res["c7"]
        g = make_ball_grid(1, n)
        p, _ = gallery.instantiate("loglog", g)
        p = normalize_pair(p)
        K = ball_mask(g, [0], 0.5)
        ns = list(range(1, 17))
        exps: dict[str, list[float]] = {}
        for seed in (self.seed, self.seed + 1):
            d = default_dictionary(g, seed)
            series = {"J(m=1,p=0)": [probe_J(p, None, j, 1, 0, K, d).value for j in ns],
                      "I(m=1,p=0)": [probe_I(p, None, j, 1, 0, K, d).value for j in ns],
                      "I(m=1,p=1)": [probe_I(p, None, j, 1, 1, K, d).value for j in ns]}
            for name, vals in series.items():
                e = growth_exponent(ns, vals).exponent
                exps.setdefault(name, []).append(e)
                out.checks.append(bound_check(f"{name} exponent, dictionary seed {seed}", e, 1.3,
                                              "c n^m growth with m=1, plus 0.3"))
        for name, (e0, e1) in exps.items():
            out.checks.append(bound_check(f"{name} exponent spread", abs(e0 - e1), 0.2, "two dictionaries agree"))
        return out

    def c8(self) -> CriterionResult:
        out = CriterionResult(8, "Lebesgue points and mollifiers")
        n1, n2 = self.res["c8"]
        g = make_ball_grid(1, n1)
        h = g.h
        p, _ = gallery.instantiate("loglog", g)
        rng = np.random.default_rng(self.seed)
        pts = []
        while len(pts) < 20:
            r, th = rng.uniform(0.2, 0.6), rng.uniform(0, 2 * np.pi)
            pts.append(g.nearest_node([r * np.exp(1j * th)]))
        eps = [2 * h, 4 * h, 8 * h, 16 * h]
        slopes = [np.polyfit(np.log(eps), np.log(lebesgue_ratio(p.phi, x, eps)), 1)[0] for x in pts]
        out.checks.append(bound_check("min log-log slope of A(x, eps) at 20 points", min(slopes), 0.9,
                                      "Lipschitz phi gives A ~ eps", upper=False))
        rows = mollifier_convergence(p.phi, pts, eps_list=[2 * h, 16 * h])
        cross = {(r["point"], r["eps"]): r["cross_deviation"] for r in rows}
        shrink = max(cross[(i, 2 * h)] / cross[(i, 16 * h)] for i in range(len(pts)))
        out.checks.append(bound_check("cross-kernel deviation ratio eps=2h vs 16h", shrink, 0.1,
                                      "both kernels converge at Lebesgue points"))
        half = ScalarField(g, np.broadcast_to(g.coord(0) >= 0, g.shape).astype(float))
        A = lebesgue_ratio(half, g.center_index, [64 * h])[0]
        out.checks.append(rel_check("half-space edge A(0, 64h)", A, 0.5, 0.02, "half of the ball lies below"))
        g2 = make_ball_grid(1, n2)
        h2 = g2.h
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (-np.log(g2.r2)) ** 0.4
        v[g2.r2 == 0] = np.nan
        f = ScalarField(g2, np.where(g2.ball, v, 0.0))
        eps2 = [4 * h2, 8 * h2, 16 * h2]
        A2 = lebesgue_ratio(f, g2.center_index, eps2, value=0.0)
        for e, a in zip(eps2, A2):
            L = -2 * np.log(e)
            exact = np.exp(L) * gamma(1.4) * gammaincc(1.4, L)
            out.checks.append(rel_check(f"A(0, {e:.4g}) vs radial integral", a, exact, 0.05,
                                        "e^L Gamma(1.4, L), L = -2 log eps"))
        out.checks.append(rel_check(f"A(0, {eps2[0]:.4g}) vs (-2 log eps)^0.4", A2[0], (-2 * np.log(eps2[0])) ** 0.4,
                                    0.05, "leading asymptotics"))
        return out

    def c9(self) -> CriterionResult:
        out = CriterionResult(9, "alpha > 2 failure witness")
        g = make_ball_grid(1, 33)
        r_list = [2.0**-j for j in range(2, 13)]
        w = gallery.alpha2_failure_witness(g, 0.1, 3.0, r_list)
        out.checks.append(flag_check("ratio strictly increasing as r -> 0", w.increasing and not w.inconclusive,
                                     "beta = alpha (1/2 - delta) > 1"))
        err = max(_rel(row.ratio, row.closed_form) for row in w.rows)
        out.checks.append(bound_check("max relative error vs 2 (2 log(1/r))^0.2", err, 0.02,
                                      "circle mean of -(2 log(1/r))^1.2 over log(1/r)"))
        return out

    def c10(self) -> CriterionResult:
        out = CriterionResult(10, "exponential moments")
        na, nb = self.res["c10"]
        c, alpha = 0.5, 1.5
        for name in ("linear", "loglog", "logmax", "logsum", "log_single"):
            vals = []
            for n in (na, nb):
                g = make_ball_grid(1, n)
                p = normalize_pair(gallery.instantiate(name, g)[0])
                vals.append(exp_moment(p.phi, Mask.whole_ball(g), c, alpha).value)
            out.checks.append(rel_check(f"{name}: n={nb} vs n={na}", vals[1], vals[0], 0.05,
                                        "finite and resolution stable"))
        return out

    def c11(self) -> CriterionResult:
        import contextlib
        import io
        import tempfile
        from pathlib import Path

        from .cli import main
        out = CriterionResult(11, "determinism")
        blobs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as d:
                with contextlib.redirect_stdout(io.StringIO()):
                    main(["verify", "--profile", "quick", "--skip", "11", "--out", d, "--seed", str(self.seed)])
                blobs.append({f.name: f.read_bytes() for f in sorted(Path(d).iterdir())})
        out.checks.append(flag_check("quick verify reports byte-identical", blobs[0] == blobs[1] and bool(blobs[0]),
                                     "two runs with the same seed"))
        return out

    def criteria(self) -> dict[int, Callable[[], CriterionResult]]:
        return {i: getattr(self, f"c{i}") for i in range(1, 12)}


def run_suite(profile: str = "full", seed: int = 0, only=None, skip=(), echo=None) -> list[CriterionResult]:
    suite = Suite(profile, seed)
    results = []
    for i, fn in suite.criteria().items():
        if (only and i not in only) or i in skip:
            continue
        log.info("criterion %d", i)
        r = fn()
        results.append(r)
        if echo is not None:
            echo(r.line())
    return results

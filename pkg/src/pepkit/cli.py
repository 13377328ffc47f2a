"""Command line front end: ``pepkit {bound,optimize,verify,table}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import appendix_verify as av
from .bounds import (
    BoundRangeError,
    BoundReport,
    REFERENCE,
    analytic_gm_bound,
    attained_gm_factors,
    gm_certificate,
    initial_point_bound,
    nesterov_factor,
    numeric_bound,
    verify_certificate,
    write_table,
)
from .schedule import fgm_schedule, gm_schedule, hbm_schedule, load_schedule, save_schedule
from .sdp import SolverConfig
from .simulate import (
    cocoercivity_check,
    phi1_oracle,
    phi2_oracle,
    random_quadratic_oracle,
    run_fgm_native,
    run_fo,
    scaled_gradient,
)
from .stepopt import RecoveryError, crosscheck, recover_steps, render_schedule, solve_lin

log = logging.getLogger("pepkit")

DEFAULT_SEED = 20130211


@dataclass
class RunConfig:
    method: str = "gm"
    n: list = field(default_factory=lambda: [1])
    h: float = 1.0
    alpha: float = 1.0
    beta: float = 0.5
    variant: str | None = None
    numeric: bool = False
    tol: float = 1e-8
    max_iter: int = 200
    fmt: str = "csv"
    out: str | None = None
    digits: int = 10
    seed: int = DEFAULT_SEED
    iter_log: str | None = None

    def __post_init__(self):
        if not self.n:
            raise ValueError("the n grid is empty")
        if any(k < 1 for k in self.n):
            raise ValueError("every n must be positive")
        if not 3 <= self.digits <= 17:
            raise ValueError("digits must lie in [3, 17]")

    def solver(self) -> SolverConfig:
        return SolverConfig.from_env(tol=self.tol, max_iter=self.max_iter)


def parse_grid(text: str) -> list[int]:
    """'1,2,5' or '1-5' or a mix such as '1-5,10,20'."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _numeric(s, cfg: RunConfig, params: dict, name: str, n: int | None = None) -> BoundReport:
    rep = numeric_bound(s, cfg.solver())
    rep.method, rep.params = name, params
    rep.n = s.n if n is None else n
    if cfg.iter_log and "history" in rep.diagnostics:
        Path(cfg.iter_log).mkdir(parents=True, exist_ok=True)
        _write_history(rep.diagnostics["history"], Path(cfg.iter_log) / f"{name}_n{s.n}.csv")
    if not rep.ok:
        log.warning("%s n=%d: %s", name, s.n, rep.diagnostics.get("message", rep.status))
    return rep


def _write_history(hist, path):
    with open(path, "w") as fh:
        fh.write("iteration,gap,primal_res,dual_res\n")
        for it, gap, pr, dr in hist:
            fh.write(f"{it},{gap:.6e},{pr:.6e},{dr:.6e}\n")


def _failed(name, n, params, exc) -> BoundReport:
    return BoundReport(float("nan"), "error", name, n, params, status="error",
                       diagnostics={"message": str(exc)})


def bound_rows(cfg: RunConfig) -> list[BoundReport]:
    rows = []
    m = cfg.method
    if m not in ("gm", "hbm", "fgm") and not m.startswith("file:"):
        raise ValueError(f"unknown method {m!r}")
    for n in cfg.n:
        try:
            if m == "gm":
                params = {"h": cfg.h}
                try:
                    rows.append(analytic_gm_bound(n, cfg.h))
                except BoundRangeError:
                    rows.append(_numeric(gm_schedule(n, cfg.h), cfg, params, "gm"))
                else:
                    if cfg.numeric:
                        rows.append(_numeric(gm_schedule(n, cfg.h), cfg, params, "gm"))
            elif m == "hbm":
                params = {"alpha": cfg.alpha, "beta": cfg.beta}
                rows.append(_numeric(hbm_schedule(n, cfg.alpha, cfg.beta), cfg, params, "hbm"))
            elif m == "fgm":
                if cfg.variant in (None, "main"):
                    rows.append(_numeric(fgm_schedule(n, "main"), cfg, {"variant": "main"}, "fgm-main"))
                if cfg.variant in (None, "aux"):
                    if n == 1:
                        # y_1 = x_0: the zero-step bound
                        r = initial_point_bound()
                        r.method, r.n, r.params = "fgm-aux", 1, {"variant": "aux"}
                        rows.append(r)
                    else:
                        rows.append(_numeric(fgm_schedule(n, "aux"), cfg, {"variant": "aux"}, "fgm-aux", n))
                rows.append(BoundReport(nesterov_factor(n), REFERENCE, "fgm-classical", n))
            elif m.startswith("file:"):
                s = load_schedule(m[5:])
                if n != s.n:
                    log.warning("schedule file has n=%d, ignoring requested n=%d", s.n, n)
                rows.append(_numeric(s, cfg, {"file": m[5:]}, s.label or "file"))
                break
        except (ValueError, RuntimeError) as exc:
            log.error("n=%d: %s", n, exc)
            rows.append(_failed(m, n, {}, exc))
    return rows


def optimize_rows(cfg: RunConfig, out_dir: str | None = None) -> list[dict]:
    rows = []
    for n in cfg.n:
        row = {"n": n}
        try:
            sol = solve_lin(n, cfg.solver())
        except RuntimeError as exc:
            row.update(status="solver-failure", message=str(exc))
            rows.append(row)
            continue
        row.update(factor=sol.factor, inverse_factor=sol.inverse_factor)
        try:
            rec = recover_steps(sol)
        except RecoveryError as exc:
            row.update(status="recovery-failure", message=str(exc))
            rows.append(row)
            continue
        cc = crosscheck(rec.schedule, sol, cfg.solver())
        row.update(recovery=rec.path, schedule_factor=cc.schedule_factor,
                   crosscheck_diff=cc.diff, status="ok" if cc.ok else "crosscheck-failure")
        if out_dir:
            d = Path(out_dir)
            d.mkdir(parents=True, exist_ok=True)
            save_schedule(rec.schedule, d / f"optimal_n{n}.json")
            (d / f"optimal_n{n}.txt").write_text(render_schedule(rec.schedule) + "\n")
        rows.append(row)
    return rows


# verification suites --------------------------------------------------------------


@dataclass
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def suite_gradient(cfg: RunConfig) -> list[Check]:
    out = []
    for h in (0.1, 0.25, 0.5, 0.75, 1.0):
        for n in cfg.n:
            exact = 1.0 / (4 * n * h + 2)
            num = numeric_bound(gm_schedule(n, h), cfg.solver())
            cert = verify_certificate(gm_schedule(n, h), gm_certificate(n, h))
            ok = num.ok and abs(num.factor - exact) <= 1e-5 and cert.passed
            out.append(Check("gradient", f"n={n} h={h}", ok,
                             f"numeric={num.factor:.10g} exact={exact:.10g} lmi_min_eig={cert.lmi_min_eig:.3e}"))
    for h in (0.5, 1.0, 1.5):
        for n in (1, 5, 20, 50):
            a1, a2 = attained_gm_factors(n, h)
            e1, e2 = 1.0 / (4 * n * h + 2), 0.5 * (1 - h) ** (2 * n)
            ok = abs(a1 - e1) <= 1e-12 and abs(a2 - e2) <= 1e-12
            out.append(Check("gradient", f"attained n={n} h={h}", ok, f"phi1={a1:.12g} phi2={a2:.12g}"))
    return out


def suite_appendix(cfg: RunConfig) -> list[Check]:
    return [Check("appendix", f"{c.identity} N={c.N} k={c.k}", c.passed, f"{c.residual:.3e}")
            for c in av.full_report()]


def suite_fgm_equiv(cfg: RunConfig, cases: int = 100) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    for case in range(cases):
        d = int(rng.integers(1, 9))
        n = int(rng.integers(1, 16))
        seed = int(rng.integers(2**31))
        o = random_quadratic_oracle(d, 1.0, seed)
        x0 = np.random.default_rng(seed + 1).standard_normal(d)
        nat = run_fgm_native(o, n, x0)
        tr = run_fo(o, fgm_schedule(n, "main"), x0)
        err = np.abs(tr.points[-1] - nat.x[-1]).max() / max(1.0, np.abs(nat.x).max())
        if n >= 2:
            aux = run_fo(o, fgm_schedule(n, "aux"), x0)
            err = max(err, np.abs(aux.points[1:] - nat.y[1:]).max() / max(1.0, np.abs(nat.y).max()))
        out.append(Check("fgm-equiv", f"case={case} d={d} n={n}", err <= 1e-8, f"{err:.3e}"))
    return out


def suite_cocoercivity(cfg: RunConfig) -> list[Check]:
    out = []
    oracles = [phi1_oracle(n, h) for n in (1, 5, 20) for h in (0.5, 1.0, 1.5)]
    oracles += [phi2_oracle()] + [random_quadratic_oracle(6, 1.0, cfg.seed + i) for i in range(3)]
    for o in oracles:
        r = cocoercivity_check(o, 1000, cfg.seed)
        out.append(Check("cocoercivity", o.name, r.ok, f"max_violation={r.max_violation:.3e}"))
    bad = cocoercivity_check(scaled_gradient(phi1_oracle(5, 1.0), 1.5), 1000, cfg.seed)
    out.append(Check("cocoercivity", "corrupted gradient is flagged", not bad.ok,
                     f"violations={bad.num_violations}"))
    return out


SUITES = {
    "gradient": suite_gradient,
    "appendix": suite_appendix,
    "fgm-equiv": suite_fgm_equiv,
    "cocoercivity": suite_cocoercivity,
}


def run_suites(names, cfg: RunConfig) -> list[Check]:
    if "all" in names:
        names = list(SUITES)
    out = []
    for name in names:
        out.extend(SUITES[name](cfg))
    return out


# tables ----------------------------------------------------------------------------

METHOD_TABLE_N = [1, 2, 3, 4, 5, 10, 20, 40]


def methods_table(cfg: RunConfig) -> list[dict]:
    """Inverse factors of HBM, both FGM sequences and the classical FGM rate."""
    rows = []
    for n in cfg.n:
        sub = RunConfig(method="fgm", n=[n], tol=cfg.tol, max_iter=cfg.max_iter)
        fgm = {r.method: r for r in bound_rows(sub)}
        hbm = bound_rows(RunConfig(method="hbm", n=[n], alpha=cfg.alpha, beta=cfg.beta,
                                   tol=cfg.tol, max_iter=cfg.max_iter))[0]
        rows.append({
            "n": n,
            "hbm": hbm.inverse_factor,
            "fgm_main": fgm["fgm-main"].inverse_factor,
            "fgm_aux": fgm["fgm-aux"].inverse_factor,
            "fgm_classical": fgm["fgm-classical"].inverse_factor,
        })
    return rows


def optimal_table(cfg: RunConfig) -> list[dict]:
    rows = []
    for n in cfg.n:
        sol = solve_lin(n, cfg.solver())
        rows.append({"n": n, "optimal": sol.inverse_factor, "gm_h1": 4 * n + 2})
    return rows


def _emit(rows, cfg: RunConfig):
    if cfg.out:
        write_table(rows, cfg.out, cfg.fmt, cfg.digits)
    else:
        write_table(rows, sys.stdout, cfg.fmt, cfg.digits)


# argparse ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=parse_grid, default=None, help="grid such as 1-5,10,20")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None)
    common.add_argument("--digits", type=int, default=10)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--iter-log", default=None, help="directory for per-solve iteration logs")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pepkit", description="Worst-case bounds for fixed-step first-order methods.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", parents=[common], help="bound factors of a method over an n grid")
    b.add_argument("--method", default="gm", help="gm, hbm, fgm or file:<path>")
    b.add_argument("--h", type=float, default=1.0)
    b.add_argument("--alpha", type=float, default=1.0)
    b.add_argument("--beta", type=float, default=0.5)
    b.add_argument("--variant", choices=("main", "aux"), default=None)
    b.add_argument("--numeric", action="store_true", help="also solve the dual SDP when a closed form exists")

    o = sub.add_parser("optimize", parents=[common], help="optimal step sizes per n")
    o.add_argument("--schedule-dir", default="schedules", help="where recovered schedules are written")

    v = sub.add_parser("verify", parents=[common], help="run invariant suites")
    v.add_argument("--suite", action="append", choices=(*SUITES, "all"), default=None)

    t = sub.add_parser("table", parents=[common], help="tables of inverse factors")
    t.add_argument("--kind", choices=("methods", "optimal"), default="methods")
    t.add_argument("--alpha", type=float, default=1.0)
    t.add_argument("--beta", type=float, default=0.5)
    return p


def _config(args, default_n) -> RunConfig:
    return RunConfig(
        method=getattr(args, "method", "gm"),
        n=args.n or default_n,
        h=getattr(args, "h", 1.0),
        alpha=getattr(args, "alpha", 1.0),
        beta=getattr(args, "beta", 0.5),
        variant=getattr(args, "variant", None),
        numeric=getattr(args, "numeric", False),
        tol=args.tol,
        max_iter=args.max_iter,
        fmt=args.format,
        out=args.out,
        digits=args.digits,
        seed=args.seed,
        iter_log=args.iter_log,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bound":
            cfg = _config(args, [1])
            rows = bound_rows(cfg)
            _emit(rows, cfg)
            return 0 if all(r.ok for r in rows) else 1
        if args.command == "optimize":
            cfg = _config(args, [5])
            rows = optimize_rows(cfg, args.schedule_dir)
            _emit(rows, cfg)
            return 0 if all(r.get("status") == "ok" for r in rows) else 1
        if args.command == "verify":
            cfg = _config(args, list(range(1, 26)))
            checks = run_suites(args.suite or ["all"], cfg)
            failed = [c for c in checks if not c.passed]
            rows = [{"suite": c.suite, "check": c.name, "pass": c.passed, "detail": c.detail}
                    for c in (checks if args.verbose else failed)]
            if rows:
                _emit(rows, cfg)
            print(f"{len(checks) - len(failed)}/{len(checks)} checks passed", file=sys.stderr)
            return 0 if not failed else 1
        if args.command == "table":
            cfg = _config(args, METHOD_TABLE_N)
            rows = methods_table(cfg) if args.kind == "methods" else optimal_table(cfg)
            _emit(rows, cfg)
            return 0
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())

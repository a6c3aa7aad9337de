"""Command-line front end.

Exit codes: 0 when every check passes, 2 when an inequality check fails,
1 on usage or I/O errors. A human summary goes to stdout; data goes to
``--out`` (relative paths are resolved against ``$WEHRL_EUR_OUTDIR``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, eur, fock, symplectic as sp, wehrl
from ._kernels import BACKEND
from .errors import WehrlEURError

OUTDIR_ENV = "WEHRL_EUR_OUTDIR"
DEFAULT_CUTOFF = 40
DEFAULT_RADIAL = 24
DEFAULT_ANGULAR = 24
ORACLE_TOL = 2e-3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    tolerance_gaussian: float = eur.GAUSSIAN_TOL
    tolerance_oracle: float = ORACLE_TOL
    radial_order: int = DEFAULT_RADIAL
    angular_order: int = DEFAULT_ANGULAR
    cutoff: int = DEFAULT_CUTOFF
    out: str | None = None
    format: str = "csv"
    jobs: int = 1
    options: dict = field(default_factory=dict)

    def describe(self) -> str:
        return (f"config: command={self.command} seed={self.seed} tol={self.tolerance_gaussian:g} "
                f"oracle_tol={self.tolerance_oracle:g} radial={self.radial_order} angular={self.angular_order} "
                f"cutoff={self.cutoff} format={self.format} backend={BACKEND}")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _write(cfg: RunConfig, csv_text: str | None, json_text: str) -> None:
    path = _resolve_out(cfg.out)
    if path is None:
        return
    text = json_text if cfg.format == "json" or csv_text is None else csv_text
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _map(func, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))


# ---------------------------------------------------------------------------
# state sources


def _add_state_source(p: argparse.ArgumentParser, random_ok: bool = True) -> None:
    g = p.add_argument_group("state source (pick one)")
    g.add_argument("--state", metavar="FILE", help="covariance JSON document")
    g.add_argument("--s", type=float, help="optimal-family parameter s (with --a)")
    g.add_argument("--a", type=float, help="two-mode squeezing parameter a >= 1")
    g.add_argument("--kappa", type=float, help="amplifier gain on A applied to the TMSV (instead of --s)")
    g.add_argument("--M", type=int, default=1, help="modes per subsystem for the optimal family")
    if random_ok:
        g.add_argument("--random", type=int, metavar="N", help="number of seeded random states")
        g.add_argument("--modes-a", type=int, default=1)
        g.add_argument("--modes-b", type=int, default=1)
        g.add_argument("--max-nu", type=float, default=3.0)
        g.add_argument("--max-squeeze", type=float, default=1.0)


def _single_state(args) -> tuple[sp.GaussianState, str, dict]:
    if args.state:
        try:
            text = Path(args.state).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.state}: {exc}") from None
        return sp.GaussianState.from_json(text), "file", {}
    if args.a is None:
        raise UsageError("need --state FILE or --a (with --s or --kappa)")
    if args.s is not None:
        return sp.optimal_sequence_state(args.s, args.a, args.M), "thm5", {"s": args.s, "a": args.a}
    kappa = 1.0 if args.kappa is None else args.kappa
    st = sp.amplifier(sp.two_mode_squeezed(args.a, args.M), "A", kappa)
    return st, "tmsv", {"a": args.a, "kappa": kappa}


def _bipartite_one(task):
    sd, ma, mb, max_nu, max_sq, family = task
    part = sp.ModePartition.of(A=ma, B=mb)
    st = sp.random_state(ma + mb, sd, max_nu, max_sq, partition=part)
    return eur.verify_bipartite(st, family=family, seed=sd)


def _tripartite_one(task):
    sd, ma, mb, max_nu, max_sq, family = task
    part = sp.ModePartition.of(A=ma, B=mb)
    st = sp.random_state(ma + mb, sd, max_nu, max_sq, partition=part)
    return eur.verify_tripartite(st, purify=True, family=family, seed=sd)


def _random_tasks(args, family):
    seeds = np.random.SeedSequence(args.seed).generate_state(args.random, dtype=np.uint32)
    return [(int(sd), args.modes_a, args.modes_b, args.max_nu, args.max_squeeze, family) for sd in seeds]


def _summarize(records, cfg: RunConfig, label: str) -> int:
    summary = eur.suite_summary(records)
    print(cfg.describe())
    print(f"{label}: {summary['passed']}/{summary['count']} pass, worst gap {summary['worst_gap']!r}")
    return 0 if summary["failed"] == 0 else 2


# ---------------------------------------------------------------------------
# commands


def cmd_verify_bipartite(args, cfg: RunConfig) -> int:
    if args.random:
        family = f"random-{args.modes_a}+{args.modes_b}"
        records = _map(_bipartite_one, _random_tasks(args, family), cfg.jobs)
    else:
        st, family, params = _single_state(args)
        records = [eur.verify_bipartite(st, family=family, params=params)]
    _write(cfg, eur.records_to_csv(records), eur.report_json(records, asdict(cfg)))
    return _summarize(records, cfg, "bipartite")


def cmd_verify_tripartite(args, cfg: RunConfig) -> int:
    if args.random:
        family = f"random-{args.modes_a}+{args.modes_b}-purified"
        records = _map(_tripartite_one, _random_tasks(args, family), cfg.jobs)
    else:
        st, family, params = _single_state(args)
        if "C" in st.partition.labels:
            records = [eur.verify_tripartite(st, family=family, params=params)]
        else:
            records = [eur.verify_tripartite(st, purify=True, family=family, params=params)]
    _write(cfg, eur.records_to_csv(records), eur.report_json(records, asdict(cfg)))
    return _summarize(records, cfg, "tripartite")


def cmd_sweep(args, cfg: RunConfig) -> int:
    records = eur.saturation_sweep(args.s, args.a, args.M)
    _write(cfg, eur.records_to_csv(records), eur.report_json(records, asdict(cfg)))
    for r in records:
        print(f"a={r.params['a']:<10g} S(A|B)={r.S_AB_cond:.9f} S(Z|B)={r.S_Z_given_B:.9f} gap={r.gap:.3e}")
    return _summarize(records, cfg, "sweep")


def cmd_tri_sweep(args, cfg: RunConfig) -> int:
    records = eur.tripartite_sweep(args.a, args.M)
    _write(cfg, eur.records_to_csv(records), eur.report_json(records, asdict(cfg)))
    for r in records:
        print(f"a={r.params['a']:<10g} sum={r.sum:.9f} cosh={r.cosh_bound:.9f} ln4={r.ln4_bound:.9f}")
    return _summarize(records, cfg, "tri-sweep")


def cmd_witness(args, cfg: RunConfig) -> int:
    st, family, params = _single_state(args)
    verdict = eur.witness(st)
    bundle = wehrl.conditional_wehrl_gaussian(st, "A", "B")
    M = st.partition.modes("A")
    doc = {"config": asdict(cfg), "family": family, "params": params, "verdict": verdict,
           "S_Z_given_B": bundle.S_Z_given_B, "threshold": M * math.log(2.0)}
    if M == 1 and st.partition.modes("B") == 1:
        doc["ppt_violated"] = eur.ppt_violated(st)
    _write(cfg, None, json.dumps(doc, indent=2, sort_keys=True))
    print(cfg.describe())
    print(f"witness: {verdict} (S(Z|B) = {bundle.S_Z_given_B:.9f}, threshold M ln 2 = {M * math.log(2.0):.9f})")
    return 0


def oracle_case(a: float, kappa: float, cutoff: int, radial: int, angular: int) -> dict:
    """Fock-quadrature vs Gaussian closed form for the amplified TMSV."""
    rho = fock.tmsv_fock(a, fock.FockSpace(2, cutoff)).density()
    st = sp.amplifier(sp.two_mode_squeezed(a, 1), "A", kappa)
    grid = wehrl.grid_for_covariance(sp.marginal(st, "A").sigma, radial, angular)
    bf = wehrl.conditional_wehrl_fock(rho, 1, grid, kappa=kappa)
    bg = wehrl.conditional_wehrl_gaussian(st, "A", "B")
    return {"a": a, "kappa": kappa, "fock": bf.to_dict(), "gaussian": bg.to_dict(),
            "difference": abs(bf.S_Z_given_B - bg.S_Z_given_B), "husimi_norm_error": abs(bf.husimi_norm - 1.0)}


def cmd_oracle_check(args, cfg: RunConfig) -> int:
    cases = []
    status = 0
    print(cfg.describe())
    for a in args.a:
        for k in args.kappa:
            c = oracle_case(a, k, cfg.cutoff, cfg.radial_order, cfg.angular_order)
            ok = c["difference"] <= args.tol and c["husimi_norm_error"] <= 1e-6
            c["pass"] = ok
            cases.append(c)
            status = status if ok else 2
            print(f"a={a:g} kappa={k:g}: S(Z|B) fock={c['fock']['S_Z_given_B']:.9f} "
                  f"gaussian={c['gaussian']['S_Z_given_B']:.9f} |diff|={c['difference']:.2e} "
                  f"norm err={c['husimi_norm_error']:.1e} {'ok' if ok else 'FAIL'}")
    _write(cfg, None, json.dumps({"config": asdict(cfg), "cases": cases}, indent=2, sort_keys=True))
    return status


def cmd_minimize(args, cfg: RunConfig) -> int:
    res = eur.minimize_gap(args.s, args.M, args.family, a_max=args.a_max, max_evals=args.max_evals, seed=cfg.seed)
    doc = {"config": asdict(cfg), "infimum": res.value, "argmin": res.argmin, "evaluations": res.evaluations,
           "budget_exhausted": res.budget_exhausted, "min_gap_seen": res.min_gap_seen}
    _write(cfg, None, json.dumps(doc, indent=2, sort_keys=True, default=float))
    print(cfg.describe())
    print(f"minimize ({args.family}, s={args.s:g}): infimum gap {res.value!r} after {res.evaluations} evaluations"
          f"{' (budget exhausted)' if res.budget_exhausted else ''}; smallest gap seen {res.min_gap_seen!r}")
    return 0 if res.min_gap_seen >= -eur.GAUSSIAN_TOL else 2


def cmd_state_show(args, cfg: RunConfig) -> int:
    if args.random is not None:
        st = sp.random_state(args.modes_a + args.modes_b, args.random, args.max_nu, args.max_squeeze,
                             partition=sp.ModePartition.of(A=args.modes_a, B=args.modes_b))
    else:
        st, _, _ = _single_state(args)
    report = sp.validate(st)
    nu = sp.symplectic_eigenvalues(st)
    doc = {"state": st.to_dict(), "valid": report.valid, "min_eigenvalue": report.min_eigenvalue,
           "symplectic_eigenvalues": [float(v) for v in nu],
           "entropy": sp.von_neumann_entropy(st) if report.valid else None}
    _write(cfg, None, json.dumps(doc, indent=2))
    print(json.dumps(doc, indent=2))
    return 0 if report.valid else 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="data output path (CSV or JSON)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent records")
    common.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    common.add_argument("--radial-order", type=int, default=DEFAULT_RADIAL)
    common.add_argument("--angular-order", type=int, default=DEFAULT_ANGULAR)

    parser = _Parser(prog="wehrl-eur", description="Conditional Wehrl entropy uncertainty relations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("verify-bipartite", parents=[common], help="check S(Z|B) >= M ln(exp(S(A|B)/M) + 1)")
    _add_state_source(p)
    p.set_defaults(func=cmd_verify_bipartite)

    p = sub.add_parser("verify-tripartite", parents=[common], help="check S(Z|B) + S(Z|C) >= M ln 4")
    _add_state_source(p)
    p.set_defaults(func=cmd_verify_tripartite)

    p = sub.add_parser("sweep", parents=[common], help="saturation sweep along the optimal family")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--a", type=_floats, default=list(eur.DEFAULT_A_VALUES))
    p.add_argument("--M", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tri-sweep", parents=[common], help="tripartite sweep on purified optimal states")
    p.add_argument("--a", type=_floats, default=list(eur.DEFAULT_A_VALUES))
    p.add_argument("--M", type=int, default=1)
    p.set_defaults(func=cmd_tri_sweep)

    p = sub.add_parser("witness", parents=[common], help="entanglement witness S(Z|B) < M ln 2")
    _add_state_source(p, random_ok=False)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle-check", parents=[common], help="Fock oracle vs Gaussian closed form")
    p.add_argument("--a", type=_floats, default=[1.5, 3.0])
    p.add_argument("--kappa", type=_floats, default=[1.0, 2.0])
    p.add_argument("--tol", type=float, default=ORACLE_TOL)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("minimize", parents=[common], help="numerical infimum of the bipartite gap")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--family", choices=("thm5-family", "random-family"), default="thm5-family")
    p.add_argument("--a-max", type=float, default=1e3)
    p.add_argument("--max-evals", type=int, default=2000)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("state", help="state utilities")
    ssub = p.add_subparsers(dest="state_command", parser_class=_Parser)
    ps = ssub.add_parser("show", parents=[common], help="print a covariance matrix and its invariants")
    _add_state_source(ps, random_ok=False)
    ps.add_argument("--random", type=int, metavar="SEED", help="seeded random state")
    ps.add_argument("--modes-a", type=int, default=1)
    ps.add_argument("--modes-b", type=int, default=1)
    ps.add_argument("--max-nu", type=float, default=3.0)
    ps.add_argument("--max-squeeze", type=float, default=1.0)
    ps.set_defaults(func=cmd_state_show)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return 1
        name = args.command if args.command != "state" else "state show"
        cfg = RunConfig(name, args.seed, cutoff=args.cutoff, radial_order=args.radial_order,
                        angular_order=args.angular_order, out=args.out, format=args.format, jobs=args.jobs)
        if cfg.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        return args.func(args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (WehrlEURError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())

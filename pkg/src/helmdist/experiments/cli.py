"""Command line entry point: ``helmdist {solve,sweep,validate-mean,demo}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, HelmdistError, NumericalError
from ..sources import estimate_zeta, mean_condition_scan
from .config import load_case
from .demos import DEMOS, run_demo
from .output import emit_csv, emit_fits, emit_rate_svg, emit_svg, emit_transform_csv, Heatmap, Line
from .sweep import fit_rate, run_case, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helmdist", description="Distance fields from screened Poisson solves.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="one solve and transform")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--a", required=True, type=float)
    s.add_argument("--out", required=True, type=Path, help="CSV with x[,y],computed,oracle,error")
    s.add_argument("--svg", type=Path, help="optional plot")

    w = sub.add_parser("sweep", help="sweep over the configured a-list, fit rates and plot")
    w.add_argument("--config", required=True, type=Path)
    w.add_argument("--out-dir", required=True, type=Path)
    w.add_argument("--no-timings", action="store_true", help="leave wall_time blank (reproducible CSV)")
    w.add_argument("--workers", type=int, default=1)

    m = sub.add_parser("validate-mean", help="scan the small-ball mean condition on f")
    m.add_argument("--config", required=True, type=Path)
    m.add_argument("--zeta", required=True, type=float)
    m.add_argument("--p", required=True, type=int, choices=(1, 2))
    m.add_argument("--eps", type=_floats, default=[0.1, 0.05, 0.02, 0.01])
    m.add_argument("--samples", type=int, default=64)

    d = sub.add_parser("demo", help="shipped reproductions")
    d.add_argument("--name", required=True, choices=DEMOS)
    d.add_argument("--out-dir", type=Path, default=Path("."))
    d.add_argument("--a", type=float)
    return p


def _solve(args) -> int:
    case = load_case(args.config)
    run = run_case(case, args.a)
    emit_transform_csv(run.transform.distance, run.oracle, args.out, run.region)
    t = run.transform
    print(f"a={args.a:g} nodes={run.grid.size} sup_error={run.sup_error:.6g} "
          f"beta={t.beta:.6g} scaled_log_beta={t.scaled_log_beta:.6g} excluded={t.excluded}")
    if args.svg:
        if run.grid.dim == 1:
            x = run.grid.axes[0]
            sel = run.region.values & t.validity.values
            emit_svg([Line(x[sel], t.distance.values[sel], "computed", "."),
                      Line(x[sel], run.oracle.values[sel], "exact", "--")], args.svg, title=case.name)
        else:
            emit_svg(Heatmap(t.distance), args.svg, title=case.name)
    return EXIT_OK


def _sweep(args) -> int:
    case = load_case(args.config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    table = run_sweep(case, workers=args.workers)
    emit_csv(table, args.out_dir / "sweep.csv", timings=not args.no_timings)
    for r in table.rows:
        status = "ok" if r.ok else r.error
        print(f"a={r.a:<8g} spacing={r.spacing:.4g} sup_error={r.sup_error:.6g} "
              f"scaled_log_beta={r.scaled_log_beta:.4g} [{status}]")
    fits = []
    if len(table.successful()) >= 3:
        fits = [fit_rate(table, "power"), fit_rate(table, "sqrtlog")]
        emit_fits(fits, args.out_dir / "fits.csv")
        p, c = fits
        print(f"power exponent {p.value:.4f} (R^2 {p.r2:.4f})")
        print(f"sqrt(a) log(1/a) constant {c.value:.4f} (R^2 {c.r2:.4f}, centered {c.r2_centered:.4f})")
    else:
        print("fewer than 3 successful rows: fits skipped")
    if table.successful():
        emit_rate_svg(table, args.out_dir / "rate.svg", fits)
    if table.trend_inversions():
        print(f"warning: sup_error increases after rows {table.trend_inversions()}")
    return EXIT_OK


def _validate_mean(args) -> int:
    case = load_case(args.config)
    shape = case.domain.shape
    rep = mean_condition_scan(case.source, shape, args.zeta, args.p, args.eps, args.samples)
    print(f"eps={','.join(f'{e:g}' for e in rep.eps)} zeta={args.zeta:g} p={args.p}")
    print(f"inf={rep.inf:.6g} sup={rep.sup:.6g} ratio={rep.ratio:.4g} passes={'yes' if rep.passes else 'no'}")
    eps = sorted(set(args.eps))
    if len(eps) >= 4 and max(eps) / min(eps) >= 10:
        print(f"estimated zeta={estimate_zeta(case.source, shape, eps, args.samples):.4f}")
    return EXIT_OK


def _demo(args) -> int:
    rep = run_demo(args.name, args.out_dir, args.a)
    print("\n".join(rep.lines()))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"solve": _solve, "sweep": _sweep, "validate-mean": _validate_mean, "demo": _demo}[args.command]
    try:
        return handler(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, HelmdistError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

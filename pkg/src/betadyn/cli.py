"""Command line entry point: ``betadyn <mode> --config FILE [overrides]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import experiments as ex
from .entropy import count_words
from .errors import BetadynError, ConfigError, DomainError, NotAttainable, NumericalError
from .interval_maps import GenParams
from .measures import parry_density, ulam_density
from .normality import density_integrals, empirical_record, suite_by_name
from .numerics import format_number, parse_real
from .symbolic import code, kneading, kneading_gen

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="betadyn", description="Symbolic dynamics of beta-transformations.")
    ap.add_argument("mode", choices=ex.MODES)
    ap.add_argument("--config", help="flat key = value file; '#' starts a comment")
    ap.add_argument("--alpha")
    ap.add_argument("--beta")
    ap.add_argument("--n", type=int)
    ap.add_argument("--x0")
    ap.add_argument("--u", help="eventually periodic word digits:preperiod,period; ';' separates several")
    ap.add_argument("--signs", help="lap orientations, e.g. +- for the tent family")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--precision-bits", type=int, dest="precision_bits")
    return ap


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _lines(*rows) -> str:
    return "".join(r + "\n" for r in rows)


def _code(cfg: ex.RunConfig) -> str:
    m = cfg.point()
    x0 = parse_real(cfg.x0) if cfg.x0 != "random" else ex.random_point(cfg.seed, 0, cfg.depth, m.beta)
    w = code(m, x0, cfg.depth)
    rows = [f"map {m.describe()}", f"x0 {format_number(x0)}", f"digits {w}"]
    if w.stop is not None:
        rows.append(f"stopped {w.stop}")
    return _lines(*rows)


def _knead(cfg: ex.RunConfig) -> str:
    m = cfg.point()
    if isinstance(m, GenParams):
        kd = kneading_gen(m, cfg.depth)
        return _lines(f"map {m.describe()}", f"eta {kd.eta.prefix(cfg.depth)}")
    kd = kneading(m, cfg.depth)
    return _lines(f"map {m.describe()}", f"u {kd.u.prefix(cfg.depth)}", f"v {kd.v.prefix(cfg.depth)}")


def _density(cfg: ex.RunConfig) -> str:
    m = cfg.point()
    if isinstance(m, GenParams):
        return ulam_density(m, cfg.bins).to_csv()
    return parry_density(m, cfg.n_terms).to_csv()


def _ulam(cfg: ex.RunConfig) -> str:
    return ulam_density(cfg.point(), cfg.bins).to_csv()


def _normality(cfg: ex.RunConfig) -> str:
    m = cfg.point()
    suite = suite_by_name(cfg.suite)
    density = ulam_density(m, cfg.bins) if isinstance(m, GenParams) else parry_density(m, cfg.n_terms)
    x0 = parse_real(cfg.x0) if cfg.x0 != "random" else ex.random_point(cfg.seed, 0, cfg.n, m.beta)
    rec = empirical_record(m, x0, suite, cfg.n, density, integrals=density_integrals(suite, density),
                           max_bits=cfg.precision_bits)
    if cfg.x0 == "random":
        rec.x0 = float(x0)
    return rec.to_csv()


def _curve(cfg: ex.RunConfig) -> str:
    rows = ex.run_curve_fibration(cfg.u_list(), cfg.beta_values(), cfg)
    return ex.curve_rows_csv(rows, cfg)


def _entropy(cfg: ex.RunConfig) -> str:
    m = cfg.point()
    kd = kneading_gen(m, cfg.n_max + 8) if isinstance(m, GenParams) else kneading(m, cfg.n_max + 8)
    return count_words(kd, n_max=cfg.n_max).to_csv()


def _separation(cfg: ex.RunConfig) -> str:
    lo, hi = cfg.beta_range()
    family = cfg.signs if cfg.signs is not None else "tab"
    pairs = ex.random_pairs(cfg.seed, lo, hi, cfg.pairs, parse_real(cfg.max_gap))
    alpha = parse_real(cfg.alpha) if cfg.alpha is not None else 0
    x0 = parse_real(cfg.x0) if cfg.x0 != "random" else ex.random_point(cfg.seed, 0, 64, hi)
    rows = ex.run_separation_audit(family, pairs, x0, alpha)
    return ex.separation_rows_csv(rows, cfg)


def _sweep(cfg: ex.RunConfig) -> str:
    report = ex.run_sweep(cfg)
    if cfg.out is not None:
        return _lines(f"rows {len(report.rows)}", f"excluded {len(report.excluded)}",
                      *(f"{k} {v:.6g}" for k, v in report.summary().items()))
    body = [",".join(ex.SWEEP_COLUMNS)] + [",".join(ex._row_text(r)) for r in report.rows]
    return _lines(*ex._header_lines(cfg, "sweep"), *body)


HANDLERS = {
    "code": _code, "knead": _knead, "density": _density, "normality": _normality, "curve": _curve,
    "entropy": _entropy, "sweep": _sweep, "separation": _separation, "ulam": _ulam,
}


def run(argv: Optional[Sequence[str]] = None) -> str:
    """Parse arguments, run the mode and return its text output (also written to ``--out``)."""
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("alpha", "beta", "n", "x0", "u", "signs", "out", "seed",
                                               "precision_bits")}
    overrides["mode"] = args.mode
    if args.mode == "sweep":
        # a single alpha or beta on the command line collapses that axis of the grid
        if args.alpha is not None:
            overrides.update(alpha_min=args.alpha, alpha_max=args.alpha, alpha_steps=1)
        if args.beta is not None:
            overrides.update(beta_min=args.beta, beta_max=args.beta, beta_steps=1)
    cfg = ex.load_config(args.config, **overrides)
    text = HANDLERS[args.mode](cfg)
    # a sweep with --out streams rows to the file itself; print its summary instead
    _emit(text, None if args.mode == "sweep" else cfg.out)
    return text


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        run(argv)
    except (ConfigError, DomainError, NotAttainable, ValueError) as exc:
        print(f"betadyn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, BetadynError, ArithmeticError) as exc:
        print(f"betadyn: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

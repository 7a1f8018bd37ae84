"""Batch harness: run configs, sweeps, curve fibrations, separation audits and plot data."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .curves import curve_defect_demo, verify_constant_coding_detail
from .errors import (
    BetadynError,
    BreakpointHit,
    ConfigError,
    DomainError,
    NotAttainable,
    NumericalError,
    OutsideParameterSpace,
)
from .interval_maps import GenParams, Params, SignSeq, orbit_floats
from .measures import StepDensity, parry_density, ulam_density
from .normality import defect_profile, density_integrals, normality_defect, suite_by_name, trend_slope
from .numerics import parse_real
from .symbolic import EventuallyPeriodic, separation_check, separation_check_gen

MODES = ("code", "knead", "density", "normality", "curve", "entropy", "sweep", "separation", "ulam")

THRESHOLD_NOTE = ("# defect thresholds 0.05 (sweep, off-curve) and 0.01 (spot checks) are "
                  "artifact-level acceptance knobs, not statements about the dynamics")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run; two equal configs produce identical output."""

    mode: str = "sweep"
    alpha: Optional[str] = None
    beta: Optional[str] = None
    alpha_min: str = "0"
    alpha_max: str = "0.95"
    alpha_steps: int = 20
    beta_min: str = "1.2"
    beta_max: str = "3"
    beta_steps: int = 20
    n: int = 10_000
    x0: str = "random"
    suite: str = "default"
    seed: int = 0
    out: Optional[str] = None
    precision_bits: int = 4096
    n_terms: int = 80
    u: str = "0:0,1;01:0,2;001:0,3"
    signs: Optional[str] = None
    family: str = "tab"
    epsilon: str = "0.001"
    depth: int = 64
    bins: int = 256
    n_max: int = 24
    pairs: int = 50
    max_gap: str = "0.05"
    resume: bool = False
    exact_limit: int = 2048

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.alpha_steps < 1 or self.beta_steps < 1:
            raise ConfigError("grid counts must be at least 1")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.precision_bits < 64:
            raise ConfigError("precision_bits must be at least 64")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.family not in ("tab", "gen"):
            raise ConfigError("family must be tab or gen")
        try:
            lo, hi = self.beta_range()
            alo, ahi = self.alpha_range()
        except (ValueError, SyntaxError, BetadynError) as exc:
            raise ConfigError(f"bad parameter range: {exc}") from exc
        if not (1 < lo <= hi):
            raise ConfigError(f"beta range [{self.beta_min}, {self.beta_max}] must be nonempty and above 1")
        if not (0 <= alo <= ahi < 1):
            raise ConfigError(f"alpha range [{self.alpha_min}, {self.alpha_max}] must be nonempty inside [0, 1)")

    def beta_range(self):
        return parse_real(self.beta_min), parse_real(self.beta_max)

    def alpha_range(self):
        return parse_real(self.alpha_min), parse_real(self.alpha_max)

    def grid(self) -> list[tuple]:
        """Grid points ``(alpha, beta)`` in row-major order (alpha outer), exact."""
        alo, ahi = self.alpha_range()
        blo, bhi = self.beta_range()
        alphas = [alo + (ahi - alo) * Fraction(i, self.alpha_steps - 1) if self.alpha_steps > 1 else alo
                  for i in range(self.alpha_steps)]
        betas = [blo + (bhi - blo) * Fraction(j, self.beta_steps - 1) if self.beta_steps > 1 else blo
                 for j in range(self.beta_steps)]
        return [(a, b) for a in alphas for b in betas]

    def beta_values(self) -> list:
        blo, bhi = self.beta_range()
        if self.beta_steps == 1:
            return [blo]
        return [blo + (bhi - blo) * Fraction(j, self.beta_steps - 1) for j in range(self.beta_steps)]

    def u_list(self) -> list[EventuallyPeriodic]:
        try:
            return [EventuallyPeriodic.parse(t) for t in self.u.split(";") if t.strip()]
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def sign_seq(self) -> Optional[SignSeq]:
        if self.signs is None:
            return None
        try:
            return SignSeq.parse(self.signs)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def point(self):
        """The single map selected by ``alpha``/``beta``/``signs``."""
        try:
            beta = parse_real(self.beta if self.beta is not None else self.beta_min)
            if self.signs is not None:
                return GenParams(beta, self.sign_seq())
            alpha = parse_real(self.alpha if self.alpha is not None else self.alpha_min)
            return Params(alpha, beta)
        except (ValueError, SyntaxError, DomainError) as exc:
            raise ConfigError(f"bad map parameters: {exc}") from exc

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def describe(self) -> list[str]:
        """``key = value`` lines of every field, used as a reproducibility header."""
        out = []
        for f in fields(self):
            if f.name in ("out", "resume"):
                continue
            out.append(f"{f.name} = {getattr(self, f.name)}")
        return out


def _coerce(name: str, text: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    t = types[name]
    text = text.strip()
    if t == "int":
        try:
            return int(text.replace("_", ""))
        except ValueError as exc:
            raise ConfigError(f"{name} expects an integer, got {text!r}") from exc
    if t == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name} expects a boolean, got {text!r}")
    return text


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = _coerce(key, value)
    return values


def load_config(path: Optional[str] = None, **overrides) -> RunConfig:
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values = parse_config(text)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def worker_count() -> int:
    """Worker processes for sweeps: ``BETADYN_THREADS`` if set, else the CPU count."""
    env = os.environ.get("BETADYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"BETADYN_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def random_point(seed: int, index: int, n: int, beta) -> Fraction:
    """A uniformly random dyadic point with enough bits to look generic for ``n`` steps.

    The stream depends only on ``(seed, index)`` (numpy PCG64).
    """
    bits = int(math.ceil(n * math.log2(float(beta)))) + 64
    rng = np.random.default_rng([seed, index])
    nbytes = (bits + 7) // 8
    value = int.from_bytes(rng.bytes(nbytes), "little")
    return Fraction(value, 1 << (8 * nbytes))


def _rational_in(rng, lo, hi, den: int = 1000) -> Fraction:
    a = math.ceil(lo * den)
    b = math.floor(hi * den)
    return Fraction(int(rng.integers(a, b + 1)), den)


# ---------------------------------------------------------------- sweep


SWEEP_COLUMNS = ["index", "alpha", "beta", "n", "x0_random", "defect_random", "defect_zero",
                 "trend_slope", "truncated", "status"]


@dataclass
class SweepReport:
    """Rows of a sweep (grid order), excluded points and summary quantiles."""

    rows: list
    excluded: list = field(default_factory=list)
    config: Optional[RunConfig] = None

    def defects(self, key: str = "defect_random") -> np.ndarray:
        vals = [r[key] for r in self.rows if r.get(key) is not None and r.get("status") == "ok"]
        return np.array(vals, dtype=float)

    def fraction_below(self, threshold: float, key: str = "defect_random") -> float:
        d = self.defects(key)
        return float(np.mean(d < threshold)) if len(d) else float("nan")

    def summary(self, key: str = "defect_random") -> dict:
        d = self.defects(key)
        if not len(d):
            return {}
        q = np.quantile(d, [0.1, 0.5, 0.9])
        return {"q10": float(q[0]), "median": float(q[1]), "q90": float(q[2]),
                "below_0.05": float(np.mean(d < 0.05)), "below_0.01": float(np.mean(d < 0.01))}


def _sweep_point(args):
    cfg, index, alpha, beta = args
    suite = suite_by_name(cfg.suite)
    n = cfg.n
    row = {"index": index, "alpha": alpha, "beta": beta, "n": n, "x0_random": None,
           "defect_random": None, "defect_zero": None, "trend_slope": None, "truncated": False, "status": "ok"}
    excluded = None
    try:
        if cfg.family == "gen":
            g = GenParams(beta, cfg.sign_seq() or SignSeq.increasing(math.ceil(beta)))
            density = ulam_density(g, cfg.bins)
            ints = density_integrals(suite, density)
            fo = orbit_floats(g, 1, n, exact_limit=cfg.exact_limit, max_guard_bits=cfg.precision_bits)
            if fo.truncated_at is not None:
                return None, {"index": index, "alpha": alpha, "beta": beta, "step": fo.truncated_at}
            m = g
            x_zero = 1
        else:
            m = Params(alpha, beta)
            density = parry_density(m, cfg.n_terms)
            ints = density_integrals(suite, density)
            x_zero = 0
        x0 = random_point(cfg.seed, index, n, beta) if cfg.x0 == "random" else parse_real(cfg.x0)
        row["x0_random"] = x0
        n_list = sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), n})
        prof = defect_profile(m, x0, suite, n_list, density, integrals=ints, max_bits=cfg.precision_bits)
        row["defect_random"] = prof[-1][1]
        row["trend_slope"] = trend_slope(prof)
        fz = orbit_floats(m, x_zero, n, exact_limit=cfg.exact_limit, max_guard_bits=cfg.precision_bits)
        row["truncated"] = fz.truncated_at is not None
        row["defect_zero"] = normality_defect(m, x_zero, suite, n, density, integrals=ints,
                                              max_bits=cfg.precision_bits)
    except BreakpointHit as exc:
        excluded = {"index": index, "alpha": alpha, "beta": beta, "step": exc.step}
        return None, excluded
    except BetadynError as exc:
        row["status"] = f"error:{type(exc).__name__}"
    return row, excluded


def _row_text(row: dict) -> list[str]:
    out = []
    for c in SWEEP_COLUMNS:
        v = row.get(c)
        if c == "x0_random":
            out.append("" if v is None else _fmt(v))
        elif c == "status":
            out.append(str(v))
        else:
            out.append(_fmt(v))
    return out


def _header_lines(cfg: RunConfig, title: str) -> list[str]:
    return [f"# betadyn {title}", THRESHOLD_NOTE] + [f"# {line}" for line in cfg.describe()]


def _read_existing(path: Path, header: list[str]) -> list[list[str]]:
    """Data rows of a partial sweep file written under the same config, in order."""
    if not path.exists():
        return []
    text = path.read_text(encoding="utf-8").splitlines()
    if [l for l in text if l.startswith("#")] != header:
        return []
    lines = [l for l in text if l and not l.startswith("#")]
    if not lines or lines[0].split(",") != SWEEP_COLUMNS:
        return []
    rows = []
    for line in lines[1:]:
        parts = next(csv.reader([line]))
        if len(parts) != len(SWEEP_COLUMNS) or not (parts[-1] == "ok" or parts[-1].startswith("error:")):
            break
        rows.append(parts)
    return rows


def _parse_row(parts: list[str], grid) -> dict:
    row = dict(zip(SWEEP_COLUMNS, parts))
    i = int(row["index"])
    out = {"index": i, "alpha": grid[i][0], "beta": grid[i][1],
           "n": int(row["n"]), "status": row["status"], "truncated": row["truncated"] == "true"}
    for c in ("x0_random", "defect_random", "defect_zero", "trend_slope"):
        out[c] = float(row[c]) if row[c] not in ("", "nan") else (float("nan") if row[c] == "nan" else None)
    return out


def run_sweep(cfg: RunConfig) -> SweepReport:
    """Defects of a random point and of the critical point at every grid point.

    Rows are written in grid order as they complete, so an interrupted run
    resumes (``resume = true``) from the rows already on disk.  Points whose
    critical orbit hits a breakpoint (generalized maps) go to the exclusions
    file with the step index instead.
    """
    grid = cfg.grid()
    out = Path(cfg.out) if cfg.out else None
    excl_path = Path(str(out) + ".exclusions") if out else None
    done_rows: list[dict] = []
    excluded: list[dict] = []
    kept_lines: list[str] = []
    kept_excl: list[str] = []
    if out and cfg.resume:
        existing = _read_existing(out, _header_lines(cfg, "sweep"))
        done_rows = [_parse_row(p, grid) for p in existing]
        kept_lines = [",".join(p) for p in existing]
        if excl_path.exists():
            for line in excl_path.read_text(encoding="utf-8").splitlines()[1:]:
                parts = line.split(",")
                if len(parts) != 4 or not parts[0].isdigit():
                    break
                i = int(parts[0])
                excluded.append({"index": i, "alpha": grid[i][0], "beta": grid[i][1],
                                 "step": int(parts[3]) if parts[3] else None})
                kept_excl.append(line)
    seen = [r["index"] for r in done_rows] + [e["index"] for e in excluded]
    start = max(seen) + 1 if seen else 0
    fh = efh = None
    if out:
        # rewrite the valid prefix so a torn last line from an interrupted run disappears
        out.parent.mkdir(parents=True, exist_ok=True)
        fh = open(out, "w", encoding="utf-8", newline="")
        for line in _header_lines(cfg, "sweep") + [",".join(SWEEP_COLUMNS)] + kept_lines:
            fh.write(line + "\n")
        fh.flush()
        efh = open(excl_path, "w", encoding="utf-8", newline="")
        for line in ["index,alpha,beta,step"] + kept_excl:
            efh.write(line + "\n")
        efh.flush()
    tasks = [(cfg, i, a, b) for i, (a, b) in enumerate(grid) if i >= start]
    workers = worker_count()
    rows = list(done_rows)
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = pool.map(_sweep_point, tasks, chunksize=1)
                _collect(results, rows, excluded, fh, efh)
        else:
            _collect(map(_sweep_point, tasks), rows, excluded, fh, efh)
    finally:
        if fh:
            fh.close()
        if efh:
            efh.close()
    return SweepReport(rows, excluded, cfg)


def _collect(results, rows, excluded, fh, efh):
    for row, exc in results:
        if row is not None:
            rows.append(row)
            if fh:
                fh.write(",".join(_row_text(row)) + "\n")
                fh.flush()
        if exc is not None:
            excluded.append(exc)
            if efh:
                efh.write(f"{exc['index']},{_fmt(exc['alpha'])},{_fmt(exc['beta'])},"
                          f"{'' if exc['step'] is None else exc['step']}\n")
                efh.flush()


def recheck_trend(report: SweepReport, count: int = 20, n_small: int = 1000, n_large: int = 100_000,
                  seed: Optional[int] = None) -> tuple[float, float, list]:
    """Median defect of ``count`` evenly spaced sweep points at ``n_small`` and ``n_large``.

    The random point of each grid point is drawn with enough bits for ``n_large``.
    """
    cfg = report.config or RunConfig()
    seed = cfg.seed if seed is None else seed
    ok = [r for r in report.rows if r["status"] == "ok"]
    if not ok:
        raise DomainError("no successful rows to recheck")
    step = max(1, len(ok) // count)
    picked = ok[::step][:count]
    suite = suite_by_name(cfg.suite)
    small, large, detail = [], [], []
    for r in picked:
        p = Params(r["alpha"], r["beta"])
        d = parry_density(p, cfg.n_terms)
        ints = density_integrals(suite, d)
        x0 = random_point(seed, r["index"] + 1_000_003, n_large, r["beta"])
        prof = defect_profile(p, x0, suite, [n_small, n_large], d, integrals=ints)
        small.append(prof[0][1])
        large.append(prof[1][1])
        detail.append((r["alpha"], r["beta"], prof[0][1], prof[1][1]))
    return float(np.median(small)), float(np.median(large)), detail


# ---------------------------------------------------------------- curves


CURVE_COLUMNS = ["u", "beta", "alpha", "valid", "defect", "asymptotic_defect", "alpha_off", "defect_off", "note"]


def run_curve_fibration(u_list: Sequence, betas: Sequence, cfg: RunConfig) -> list[dict]:
    """For every ``u`` and ``beta``: the curve point, its coding check and the defect of 0 on and off the curve."""
    suite = suite_by_name(cfg.suite)
    eps = parse_real(cfg.epsilon)
    rows = []
    for u in u_list:
        u = u if isinstance(u, EventuallyPeriodic) else EventuallyPeriodic.parse(u)
        for beta in betas:
            row = {"u": str(u), "beta": beta, "alpha": None, "valid": False, "defect": None,
                   "asymptotic_defect": None, "alpha_off": None, "defect_off": None, "note": ""}
            try:
                check = verify_constant_coding_detail(u, beta, cfg.depth)
                row["alpha"] = check.alpha
                row["valid"] = check.valid
                if check.alpha is None:
                    row["note"] = "outside parameter space"
                    rows.append(row)
                    continue
                if not check.valid:
                    row["note"] = "not attainable: " + check.reason
                else:
                    demo = curve_defect_demo(u, beta, cfg.n, suite, cfg.n_terms)
                    row["defect"] = demo.defect
                    row["asymptotic_defect"] = demo.asymptotic_defect
                    if check.boundary_hits:
                        row["note"] = f"orbit of 0 meets breakpoints ({len(check.boundary_hits)} hits, right-continuous)"
                a_off = check.alpha + eps
                if a_off < 1:
                    p = Params(a_off, beta)
                    d = parry_density(p, cfg.n_terms)
                    row["alpha_off"] = a_off
                    row["defect_off"] = normality_defect(p, 0, suite, cfg.n, d)
            except (NotAttainable, OutsideParameterSpace) as exc:
                row["note"] = str(exc)
            except NumericalError as exc:
                row["note"] = f"error:{type(exc).__name__}"
            rows.append(row)
    return rows


def curve_rows_csv(rows: list[dict], cfg: Optional[RunConfig] = None) -> str:
    buf = io.StringIO()
    if cfg is not None:
        for line in _header_lines(cfg, "curve fibration"):
            buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for r in rows:
        w.writerow([r["u"], _fmt(r["beta"]), "" if r["alpha"] is None else _fmt(r["alpha"]),
                    _fmt(r["valid"]), _fmt(r["defect"]), _fmt(r["asymptotic_defect"]),
                    "" if r["alpha_off"] is None else _fmt(r["alpha_off"]), _fmt(r["defect_off"]), r["note"]])
    return buf.getvalue()


# ---------------------------------------------------------------- separation


SEPARATION_COLUMNS = ["beta1", "beta2", "l", "bound", "ok", "k_used", "k_tight", "in_hypothesis", "truncated"]


def random_pairs(seed: int, lo, hi, count: int, max_gap=Fraction(1, 20), den: int = 1000) -> list[tuple]:
    """``count`` seeded rational pairs ``beta1 < beta2`` in ``[lo, hi]`` with gap at most ``max_gap``."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < count:
        b1 = _rational_in(rng, lo, hi, den)
        gap = Fraction(int(rng.integers(1, max(2, int(max_gap * den) + 1))), den)
        b2 = b1 + gap
        if b2 <= hi:
            pairs.append((b1, b2))
    return pairs


def run_separation_audit(family, pairs: Sequence[tuple], x0=Fraction(1, 2), alpha=Fraction(0),
                         probe: int = 256) -> list[dict]:
    """One row per slope pair; ``ok = false`` inside the hypothesis region is a discrepancy.

    ``family`` is ``'tab'`` or a sign string such as ``'+-'``.
    """
    rows = []
    for b1, b2 in pairs:
        if family == "tab":
            r = separation_check(Params(alpha, b1), Params(alpha, b2), x0, probe)
        else:
            signs = family if isinstance(family, SignSeq) else SignSeq.parse(family)
            r = separation_check_gen(GenParams(b1, signs), GenParams(b2, signs), probe)
        rows.append({"beta1": b1, "beta2": b2, "l": r.l, "bound": r.bound, "ok": r.bound_ok,
                     "k_used": r.k_used, "k_tight": r.k_tight, "in_hypothesis": r.in_hypothesis,
                     "truncated": r.truncated})
    return rows


def separation_rows_csv(rows: list[dict], cfg: Optional[RunConfig] = None) -> str:
    buf = io.StringIO()
    if cfg is not None:
        for line in _header_lines(cfg, "separation audit"):
            buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SEPARATION_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r["beta1"]), _fmt(r["beta2"]), r["l"], _fmt(r["bound"]),
                    _fmt(r["ok"]), _fmt(r["k_used"]), _fmt(r["k_tight"]), _fmt(r["in_hypothesis"]),
                    _fmt(r["truncated"])])
    return buf.getvalue()


# ---------------------------------------------------------------- plot data


def emit_plotdata(report, kind: str, prefix) -> list[Path]:
    """Whitespace separated data files for gnuplot plus a ``.legend`` sidecar each.

    ``kind``: ``density`` (a ``StepDensity``), ``curve`` (rows from
    ``run_curve_fibration``; one file per ``u``) or ``sweep-heatmap`` (a
    ``SweepReport``; blank line between alpha blocks).
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []

    def write(path: Path, lines: list[str], legend: list[str]):
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        Path(str(path) + ".legend").write_text("\n".join(legend) + "\n", encoding="utf-8")
        written.append(path)

    if kind == "density":
        if not isinstance(report, StepDensity):
            raise DomainError("density plot data needs a StepDensity")
        lines = []
        for i, h in enumerate(report.heights):
            lines.append(f"{_fmt(report.breakpoints[i])} {_fmt(h)}")
            lines.append(f"{_fmt(report.breakpoints[i + 1])} {_fmt(h)}")
        write(Path(str(prefix) + ".dat"), lines,
              ["column 1: x", "column 2: normalized density height", "pairs of rows draw each step",
               f"pieces: {report.pieces}"])
    elif kind == "curve":
        by_u: dict = {}
        for r in report:
            by_u.setdefault(r["u"], []).append(r)
        for u, rows in by_u.items():
            tag = u.replace(":", "_").replace(",", "-")
            lines = [f"{_fmt(r['beta'])} {_fmt(r['alpha']) if r['alpha'] is not None else 'nan'} "
                     f"{1 if r['valid'] else 0} {_fmt(r['defect']) if r['defect'] is not None else 'nan'}"
                     for r in rows]
            write(Path(f"{prefix}_{tag}.dat"), lines,
                  [f"curve u = {u}", "column 1: beta", "column 2: alpha(beta)",
                   "column 3: coding of 0 equals u (1/0)", "column 4: defect of x0 = 0"])
    elif kind == "sweep-heatmap":
        lines = []
        last = None
        for r in report.rows:
            if last is not None and r["alpha"] != last:
                lines.append("")
            last = r["alpha"]
            d = r.get("defect_random")
            lines.append(f"{_fmt(r['alpha'])} {_fmt(r['beta'])} {_fmt(d) if d is not None else 'nan'}")
        write(Path(str(prefix) + ".dat"), lines,
              ["column 1: alpha", "column 2: beta", "column 3: defect of a random point",
               "blank lines separate alpha blocks (pm3d)"])
    else:
        raise DomainError(f"unknown plot kind {kind!r}")
    return written

"""Command-line frontend: `xxz <subcommand> [flags]`."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import droplet, gapbound, groundstates, interface, perturb, spectra
from .spinchain import AnisotropyParams

USAGE_ERROR, ASSERTION_FAILURE = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# --------------------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str
    spin: float
    length: int | None
    params: AnisotropyParams | None
    sector: int | None
    boundary: str
    grid: list | None
    fmt: str
    out: str | None
    tol: float
    jobs: int
    seed: int


def parse_grid(text: str) -> list[float]:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("--grid needs step > 0 and b >= a")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 12) for i in range(n)]


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _config(ns) -> RunConfig:
    if ns.delta is not None and ns.q is not None:
        raise UsageError("give at most one of --delta, --q")
    try:
        p = (AnisotropyParams.from_delta(ns.delta) if ns.delta is not None
             else AnisotropyParams.from_q(ns.q) if ns.q is not None else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if ns.tol <= 0:
        raise UsageError("--tol must be > 0")
    if ns.spin <= 0 or abs(2 * ns.spin - round(2 * ns.spin)) > 1e-12:
        raise UsageError("--spin must be a positive half-integer")
    grid = parse_grid(ns.grid) if ns.grid else None
    return RunConfig(ns.command, ns.spin, ns.length, p, ns.sector, ns.boundary, grid, ns.format, ns.out,
                     ns.tol, ns.jobs, ns.seed)


def _need(cfg: RunConfig, *names):
    for n in names:
        if (cfg.params if n == "delta" else getattr(cfg, n)) is None:
            raise UsageError(f"{cfg.command} needs --{'delta or --q' if n == 'delta' else n}")


# --------------------------------------------------------------------------- output


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _csv_cell(x) -> str:
    x = _num(x)
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, (list, dict)):
        return json.dumps(x, sort_keys=True)
    return str(x)


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_num(rows), indent=1, sort_keys=True) + "\n"
    if not rows:
        return ""
    cols = list(rows[0])
    for r in rows[1:]:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


def emit(rows: list[dict], cfg: RunConfig) -> None:
    text = render(rows, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------- subcommands


def _delta_of_inv(t: float) -> float:
    return math.inf if t == 0 else 1.0 / t


def cmd_spectrum(cfg: RunConfig) -> int:
    _need(cfg, "length")
    grid = cfg.grid if cfg.grid is not None else ([cfg.params.inv_delta] if cfg.params else None)
    if grid is None:
        raise UsageError("spectrum needs --grid (over 1/Delta) or --delta/--q")
    sectors = [cfg.sector] if cfg.sector is not None else None
    emit(spectra.delta_sweep(cfg.length, cfg.spin, cfg.boundary, grid, sectors=sectors, tol=cfg.tol), cfg)
    return 0


def cmd_gap(cfg: RunConfig) -> int:
    _need(cfg, "length", "delta")
    two_s = int(round(2 * cfg.spin))
    N = cfg.sector if cfg.sector is not None else two_s * cfg.length // 2
    g = spectra.finite_gap(cfg.length, cfg.spin, N, cfg.params.delta, cfg.boundary, tol=cfg.tol, seed=cfg.seed)
    emit([{"L": cfg.length, "S": cfg.spin, "N": N, "delta": cfg.params.delta, "boundary": cfg.boundary,
           "gap": g}], cfg)
    return 0


def cmd_lowerbound(cfg: RunConfig) -> int:
    two_s = int(round(2 * cfg.spin))
    grid = cfg.grid if cfg.grid is not None else parse_grid("0.05:0.95:0.05")
    n0 = cfg.sector if cfg.sector is not None else 0
    rows = []
    for t in grid:
        if not 0 <= t < 1:
            raise UsageError("lowerbound grid over 1/Delta must lie in [0, 1)")
        p = AnisotropyParams.from_delta(_delta_of_inv(t))
        if cfg.length is not None:
            rm = gapbound.reduced_matrix(cfg.length, two_s, n0, p.q)
        elif t == 0:
            raise UsageError("1/Delta = 0 needs --length (the bi-infinite limit needs q > 0)")
        else:
            rm = gapbound.reduced_matrix_limit("bi_infinite", two_s, p.q, n0=n0)
        b = gapbound.gap_lower_bound(rm, cfg.spin, p.delta)
        rows.append({"delta_inv": t, "one_minus_delta": b.deficit, "lower_bound": b.bound})
    emit(rows, cfg)
    return 0


def cmd_perturb(cfg: RunConfig) -> int:
    two_s = int(round(2 * cfg.spin))
    rows = []
    tabulated = perturb.E2_TABLE.get(cfg.spin if two_s % 2 else int(cfg.spin), {})
    for n in range(two_s + 1):
        if two_s == 2 and n == 1:
            val = "**"
        else:
            val = perturb.e2_coefficient(cfg.spin, n)
        row = {"S": str(Fraction(two_s, 2)), "n": n, "E2": val if isinstance(val, (str, Fraction)) else str(val),
               "E2_tabulated": tabulated.get(n, "")}
        if cfg.length is not None and n == (cfg.sector if cfg.sector is not None else 0) and val != "**":
            c = perturb.curvature_check(cfg.spin, n, cfg.length)
            row.update(numeric_d2=c["numeric_d2"], two_E2=c["analytic"])
        rows.append(row)
    emit(rows, cfg)
    return 0


def cmd_droplet(cfg: RunConfig) -> int:
    _need(cfg, "length", "sector", "delta")
    geometry = {"pp": "open", "droplet": "open", "open": "open", "periodic": "ring",
                "ring": "ring"}.get(cfg.boundary)
    if geometry is None:
        raise UsageError("droplet supports --boundary pp (open) or periodic")
    r = droplet.droplet_band_check(cfg.length, cfg.sector, cfg.params.delta, geometry, assert_band=False)
    emit([r.as_dict()], cfg)
    return 0 if r.kappa < 10 and r.margin > 0 else ASSERTION_FAILURE


def cmd_profile(cfg: RunConfig) -> int:
    _need(cfg, "delta")
    n = cfg.sector if cfg.sector is not None else 0
    q = cfg.params.q
    grid = cfg.grid if cfg.grid is not None else parse_grid(f"{n - 8}:{n + 8}:1")
    rows = []
    for x in grid:
        xi = int(round(x))
        cl = groundstates.classical_kink_profile(xi - n - 0.5, 1.0, q)[2]
        rows.append({"x": xi, "quantum_s3": groundstates.magnetization_profile(xi, n, q), "classical_s3": cl / 2})
    emit(rows, cfg)
    return 0


def cmd_ensemble(cfg: RunConfig, ns) -> int:
    _need(cfg, "length", "delta")
    q = cfg.params.q
    if not 0 < q < 1:
        raise UsageError("ensemble needs 0 < q < 1")
    if ns.sticks is not None:
        if cfg.sector is None:
            raise UsageError("certificates need --sector (number of down spins n)")
        certs = interface.ensemble_certificates(cfg.length, ns.sticks, cfg.sector, q)
        cfg.fmt = "json"
        emit(certs, cfg)
        return 0 if all(c["pass"] is not False for c in certs) else ASSERTION_FAILURE
    grid = cfg.grid if cfg.grid is not None else parse_grid("-1:1:0.25")
    rows = []
    for mu in grid:
        st = interface.stick_stats(cfg.length, mu, q)
        rows.append({"mu": mu, "mean": st.mean, "F_L": st.F_L, "F_inf": interface.F_infinity(mu, q),
                     "sigma2": st.sigma2})
    emit(rows, cfg)
    return 0


def cmd_spinwave(cfg: RunConfig, ns) -> int:
    _need(cfg, "delta")
    grid = cfg.grid if cfg.grid is not None else parse_grid("80:400:40")
    rows = []
    for R in grid:
        r = interface.spinwave_gap_bound(R, cfg.params.delta, ns.mu, ns.shape)
        rows.append({"R": R} | r)
    emit(rows, cfg)
    return 0


def cmd_verify(cfg: RunConfig, ns) -> int:
    from .verify import run_suite

    results = run_suite(ns.suite, seed=cfg.seed)
    rows = [{"check": name, "result": "PASS" if ok else "FAIL", "detail": detail} for name, ok, detail in results]
    emit(rows, cfg)
    return 0 if all(ok for _, ok, _ in results) else ASSERTION_FAILURE


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spin", type=_float, default=0.5)
    common.add_argument("--length", type=int)
    common.add_argument("--delta", type=_float)
    common.add_argument("--q", type=_float)
    common.add_argument("--sector", type=int)
    common.add_argument("--boundary", default="kink")
    common.add_argument("--grid")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")
    common.add_argument("--tol", type=_float, default=1e-10)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    p = _Parser(prog="xxz", description="Ferromagnetic XXZ spectra, ground states and bounds")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("spectrum", "gap", "lowerbound", "perturb", "droplet", "profile"):
        sub.add_parser(name, parents=[common])
    e = sub.add_parser("ensemble", parents=[common])
    e.add_argument("--sticks", type=int, help="cylinder cross-section A; emits certificates")
    s = sub.add_parser("spinwave", parents=[common])
    s.add_argument("--mu", type=_float, default=0.0)
    s.add_argument("--shape", choices=("disk", "strip"), default="disk")
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--suite", choices=("small", "full"), default="small")
    return p


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        ns = build_parser().parse_args(argv)
        cfg = _config(ns)
        simple = {"spectrum": cmd_spectrum, "gap": cmd_gap, "lowerbound": cmd_lowerbound,
                  "perturb": cmd_perturb, "droplet": cmd_droplet, "profile": cmd_profile}
        if cfg.command in simple:
            return simple[cfg.command](cfg)
        return {"ensemble": cmd_ensemble, "spinwave": cmd_spinwave, "verify": cmd_verify}[cfg.command](cfg, ns)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return USAGE_ERROR
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ValueError, ArithmeticError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

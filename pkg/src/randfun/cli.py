"""Command-line front door: config parsing, experiment dispatch, file output.

Every subcommand writes a ``<name>_summary.json`` (config echo, seed, config
hash, summary statistics) and, when rows exist, a ``<name>_rows.csv`` into
the output directory; some write extra files (zeros.csv, covariance.json,
sample.json).  With ``--emit-plots`` a static SVG derived purely from the CSV
rows is added.  Exit codes: 0 pass, 2 assertion/pass-flag failure, 1 usage or
config error.  All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from pathlib import Path

from . import experiments as ex
from .covariance import circulant_eigenvalues, det_sigma_lower_check
from .errors import RandfunError
from .growth import (
    CoefficientSequence,
    S_bounds_check,
    growth_profile,
    hayman_window,
)
from .sampling import EnsembleSpec, sample
from .zeros import argument_principle_count, find_zeros_disk

COMMANDS = (
    "growth", "sample", "zeros", "hole", "sectors", "concentration",
    "lacunary", "realzeros", "covariance", "moments", "khinchin", "turan",
    "kahane", "counterexample", "asymptotics", "gn",
)

_FLAG_KEYS = {
    "seq", "alpha", "ensemble", "r", "r_grid", "trials", "seed", "threads",
    "out", "emit_plots", "tol_tail", "eta", "config", "values", "n_sectors",
    "degree", "k", "m_max", "patterns", "q_list", "p_list", "dim", "n_freq",
    "b_list", "beta", "n_max", "rho", "n_points", "n_list",
}


class UsageError(Exception):
    pass


def make_sequence(name: str, alpha=None, values=None) -> CoefficientSequence:
    """Sequence from its CLI name: gef, gamma, gausssq, lacunary, explicit,
    holeblocks; parameters either inline (gamma:0.5) or via flags."""
    base, _, inline = name.partition(":")
    base = base.lower()
    if base == "gef":
        return CoefficientSequence.gef()
    if base == "gamma":
        a = float(inline) if inline else alpha
        if a is None:
            raise UsageError("--seq gamma needs --alpha or gamma:<alpha>")
        return CoefficientSequence.gamma_type(a)
    if base == "gausssq":
        a = float(inline) if inline else alpha
        if a is None:
            raise UsageError("--seq gausssq needs --alpha or gausssq:<alpha>")
        return CoefficientSequence.gauss_squared(a)
    if base == "lacunary":
        return CoefficientSequence.lacunary()
    if base == "explicit":
        vals = inline or values
        if vals is None:
            raise UsageError("--seq explicit needs values, e.g. explicit:1,0.5")
        if isinstance(vals, str):
            vals = [float(v) for v in vals.split(",") if v]
        return CoefficientSequence.explicit(vals)
    if base == "holeblocks":
        if not inline:
            raise UsageError("--seq holeblocks:<a>,<b>,<blocks>")
        a, b, m = inline.split(",")
        return CoefficientSequence.hole_blocks(float(a), float(b), int(m))
    if base == "unitdisk":
        return ex.unit_disk_profile()
    raise UsageError(f"unknown sequence {name!r}")


def _parse_grid(text):
    return [float(x) for x in str(text).split(",") if x]


def _build_parser():
    p = argparse.ArgumentParser(
        prog="randfun",
        description="random Taylor series: growth, zeros, hole probability",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI config file, one section per command")
    p.add_argument("--seq", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--values", default=None, help="explicit magnitudes a,b,c")
    p.add_argument("--ensemble", default=None,
                   choices=["gaussian", "rademacher", "steinhaus"])
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--r-grid", dest="r_grid", default=None,
                   help="comma-separated radii")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--emit-plots", dest="emit_plots", action="store_true",
                   default=None)
    p.add_argument("--tol-tail", dest="tol_tail", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--n-sectors", dest="n_sectors", type=int, default=None)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m-max", dest="m_max", type=int, default=None)
    p.add_argument("--patterns", default=None)
    p.add_argument("--q-list", dest="q_list", default=None)
    p.add_argument("--p-list", dest="p_list", default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--n-freq", dest="n_freq", type=int, default=None)
    p.add_argument("--b-list", dest="b_list", default=None,
                   help="complex values, e.g. 0,1+1j")
    p.add_argument("--beta", default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--n-points", dest="n_points", type=int, default=None)
    p.add_argument("--n-list", dest="n_list", default=None)
    return p


def _merge_config(args):
    """INI values fill unset flags; flags win; unknown keys rejected."""
    merged = vars(args).copy()
    if args.config:
        cp = configparser.ConfigParser()
        read = cp.read(args.config)
        if not read:
            raise UsageError(f"config file {args.config!r} not readable")
        for section in cp.sections():
            if section != args.command and section != "common":
                continue
            for key, value in cp.items(section):
                key = key.replace("-", "_")
                if key not in _FLAG_KEYS:
                    raise UsageError(
                        f"unknown config key {key!r} in section [{section}]"
                    )
                if merged.get(key) is None:
                    merged[key] = value
    return merged


def _defaults(cfg):
    out = {
        "seq": cfg.get("seq") or "gef",
        "ensemble": cfg.get("ensemble") or "gaussian",
        "seed": int(cfg["seed"]) if cfg.get("seed") is not None else 0,
        "trials": int(cfg["trials"]) if cfg.get("trials") is not None else None,
        "threads": int(cfg["threads"]) if cfg.get("threads") is not None else 1,
        "tol_tail": float(cfg["tol_tail"]) if cfg.get("tol_tail") is not None
        else 1e-9,
        "eta": float(cfg["eta"]) if cfg.get("eta") is not None else 0.25,
        "emit_plots": bool(cfg.get("emit_plots")),
    }
    for key in ("alpha", "values", "r", "r_grid", "n_sectors", "degree", "k",
                "m_max", "patterns", "q_list", "p_list", "dim", "n_freq",
                "b_list", "beta", "n_max", "rho", "n_points", "n_list"):
        out[key] = cfg.get(key)
    out_dir = os.environ.get("RANDFUN_OUT") or cfg.get("out") or "."
    out["out"] = Path(out_dir)
    return out


def _write_report(report, out_dir: Path, emit_plots: bool, plot_kind=None):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{report.name}_summary.json").write_text(report.to_json())
    csv_text = report.rows_csv()
    csv_path = None
    if csv_text:
        csv_path = out_dir / f"{report.name}_rows.csv"
        csv_path.write_text(csv_text)
    if emit_plots and plot_kind and csv_path is not None:
        try:
            path = emit_plot(csv_path, plot_kind, out_dir)
            print(f"plot: {path}")
        except Exception as exc:  # plot failures downgrade to a warning
            print(f"warning: plot generation failed: {exc}", file=sys.stderr)


def emit_plot(csv_path: Path, kind: str, out_dir: Path) -> Path:
    """Render a static SVG purely from CSV rows (never from internal state).

    Kinds: 'zeros' (scatter in the disk), 'growth' (S(r)/r^4 with the e^2/4
    line), 'sectors' (sector histogram), 'hole' (-log P vs S overlay).
    """
    import csv as _csv

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path) as fh:
        data_lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(_csv.DictReader(data_lines))
    fig, ax = plt.subplots(figsize=(5, 4))
    if kind == "zeros":
        xs = [float(r["re"]) for r in rows]
        ys = [float(r["im"]) for r in rows]
        rad = max((math.hypot(x, y) for x, y in zip(xs, ys)), default=1.0)
        ax.scatter(xs, ys, s=8)
        circle = plt.Circle((0, 0), rad, fill=False, color="gray")
        ax.add_patch(circle)
        ax.set_aspect("equal")
        ax.set_title("zeros")
    elif kind == "growth":
        rs = [float(r["r"]) for r in rows]
        ratio = [float(r["S"]) / float(r["r"]) ** 4 for r in rows]
        ax.plot(rs, ratio, marker="o")
        ax.axhline(math.e ** 2 / 4, color="red", linestyle="--",
                   label="e^2/4")
        ax.set_xlabel("r")
        ax.set_ylabel("S(r)/r^4")
        ax.legend()
    elif kind == "sectors":
        sector_cols = [c for c in rows[0] if c.startswith("sector_")]
        totals = [sum(float(r[c]) for r in rows) / len(rows)
                  for c in sector_cols]
        ax.bar(range(len(totals)), totals)
        ax.set_xlabel("sector")
        ax.set_ylabel("mean zero count")
    elif kind == "hole":
        # per-trial rows give -log P(hole); the S(r) overlay comes from the
        # sibling summary file (also a written artifact, never from memory)
        hole_cols = [c for c in rows[0] if c.startswith("hole_")]
        rs = [float(c.split("_")[1]) for c in hole_cols]
        neg_log = []
        for c in hole_cols:
            p = sum(float(r[c]) for r in rows if r.get(c)) / len(rows)
            neg_log.append(-math.log(p) if p > 0 else float("nan"))
        ax.plot(rs, neg_log, marker="o", label="-log P(hole)")
        summary_path = csv_path.with_name("hole_mc_summary.json")
        if summary_path.exists():
            payload = json.loads(summary_path.read_text())
            per_r = payload["summary"]["per_radius"]
            ss = [per_r[f"{r:g}"]["S"] for r in rs if f"{r:g}" in per_r]
            if len(ss) == len(rs):
                ax.plot(rs, ss, marker="s", linestyle="--", label="S(r)")
        ax.set_xlabel("r")
        ax.legend()
    else:
        plt.close(fig)
        raise ValueError(f"unknown plot kind {kind!r}")
    path = out_dir / f"{kind}.svg"
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def _cmd_growth(cfg):
    seq = make_sequence(cfg["seq"], cfg.get("alpha") and float(cfg["alpha"]),
                        cfg.get("values"))
    if cfg.get("r_grid"):
        radii = _parse_grid(cfg["r_grid"])
    elif cfg.get("r") is not None:
        radii = [float(cfg["r"])]
    else:
        raise UsageError("growth needs --r or --r-grid")
    if any(r <= 0 for r in radii):
        raise UsageError("--r must be positive")
    eta = cfg["eta"]
    rows = []
    for r in radii:
        gp = growth_profile(seq, r, eta=eta)
        row = {
            "r": r, "sigma": gp.sigma, "s": gp.s, "S": gp.S,
            "n": gp.n_count, "m": gp.m_weight, "delta": gp.delta,
            "hayman_ok": hayman_window(seq, r, eta=eta),
        }
        try:
            sb = S_bounds_check(seq, r, eta=eta)
            row.update(lower_ok=sb.lower_ok, growth_ok=sb.growth_ok,
                       scaling_gap=sb.scaling_gap)
        except RandfunError:
            row.update(lower_ok=None, growth_ok=None, scaling_gap=None)
        rows.append(row)
        print(f"r={r:g}: sigma={gp.sigma:.6g} s={gp.s:.6g} S={gp.S:.6g} "
              f"n={gp.n_count} m={gp.m_weight}")
    report = ex.ExperimentReport(
        name="growth",
        config={"seq": seq.describe(), "radii": radii, "eta": eta},
        seed=cfg["seed"], rows=rows,
        summary={"radii": radii, "S": [row["S"] for row in rows]},
    )
    _write_report(report, cfg["out"], cfg["emit_plots"], "growth")
    return 0


def _cmd_sample(cfg):
    seq = make_sequence(cfg["seq"], cfg.get("alpha") and float(cfg["alpha"]),
                        cfg.get("values"))
    r = float(cfg["r"]) if cfg.get("r") else 2.0
    ens = EnsembleSpec(cfg["ensemble"], seed=cfg["seed"])
    smpl = sample(seq, ens, r_max=r, tail_tol=cfg["tol_tail"],
                  degree=int(cfg["degree"]) if cfg.get("degree") else None)
    cfg["out"].mkdir(parents=True, exist_ok=True)
    path = cfg["out"] / "sample.json"
    path.write_text(smpl.to_json())
    print(f"degree={smpl.degree} tail_log_bound={smpl.tail_log_bound:.6g} "
          f"-> {path}")
    return 0


def _cmd_zeros(cfg):
    seq = make_sequence(cfg["seq"], cfg.get("alpha") and float(cfg["alpha"]),
                        cfg.get("values"))
    r = float(cfg["r"]) if cfg.get("r") else 2.0
    trials = cfg["trials"] or 1
    ens = EnsembleSpec(cfg["ensemble"], seed=cfg["seed"])
    rows = []
    mismatches = 0
    for t in range(trials):
        smpl = sample(seq, ens, r_max=r, tail_tol=cfg["tol_tail"], trial=t)
        zs = find_zeros_disk(smpl, r)
        n_ap = argument_principle_count(smpl, r)
        if n_ap != zs.total_count:
            mismatches += 1
        for z, mult in zs.roots:
            rows.append({
                "trial_id": t, "re": z.real, "im": z.imag,
                "modulus": abs(z), "multiplicity": mult,
                "method": zs.method,
            })
        print(f"trial {t}: count={zs.total_count} argument_principle={n_ap}")
    report = ex.ExperimentReport(
        name="zeros",
        config={"seq": seq.describe(), "ensemble": cfg["ensemble"], "r": r,
                "trials": trials, "tol_tail": cfg["tol_tail"]},
        seed=cfg["seed"], rows=rows,
        summary={"total_roots": len(rows), "method_mismatches": mismatches},
    )
    cfg["out"].mkdir(parents=True, exist_ok=True)
    (cfg["out"] / "zeros.csv").write_text(report.rows_csv())
    (cfg["out"] / "zeros_summary.json").write_text(report.to_json())
    if cfg["emit_plots"]:
        try:
            emit_plot(cfg["out"] / "zeros.csv", "zeros", cfg["out"])
        except Exception as exc:
            print(f"warning: plot generation failed: {exc}", file=sys.stderr)
    return 2 if mismatches else 0


def _cmd_covariance(cfg):
    seq = make_sequence(cfg["seq"], cfg.get("alpha") and float(cfg["alpha"]),
                        cfg.get("values"))
    r = float(cfg["rho"] or cfg["r"] or 2.0)
    check = det_sigma_lower_check(seq, r, seed=cfg["seed"])
    lam = circulant_eigenvalues(seq, r, check.config.n_points)
    payload = {
        "rho": r,
        "n": check.config.n_points,
        "angles": list(check.config.angles),
        "log_det": check.log_det,
        "S_r": check.S_r,
        "ok": check.ok,
        "circulant_eigenvalues_equispaced": [float(x) for x in lam],
    }
    cfg["out"].mkdir(parents=True, exist_ok=True)
    (cfg["out"] / "covariance.json").write_text(json.dumps(payload, indent=1))
    print(f"log_det={check.log_det:.6g} S={check.S_r:.6g} ok={check.ok}")
    return 0 if check.ok else 2


def _experiment_command(cfg):
    cmd = cfg["command"]
    seed = cfg["seed"]
    threads = cfg["threads"]
    seq = make_sequence(cfg["seq"], cfg.get("alpha") and float(cfg["alpha"]),
                        cfg.get("values"))
    if cmd == "hole":
        radii = _parse_grid(cfg["r_grid"]) if cfg.get("r_grid") else \
            [float(cfg["r"])] if cfg.get("r") else [0.25, 0.5, 0.75, 1.0]
        rep = ex.exp_hole_mc(seq, radii, cfg["trials"] or 10 ** 4, seed=seed,
                             ensemble_kind=cfg["ensemble"],
                             tail_tol=cfg["tol_tail"], threads=threads)
        plot = "hole"
        ok = rep.summary["neg_log_p_strictly_increasing"]
    elif cmd == "sectors":
        radii = _parse_grid(cfg["r_grid"]) if cfg.get("r_grid") else \
            [float(cfg["r"])] if cfg.get("r") else [4.0]
        rep = ex.exp_equidistribution(
            seq, cfg["ensemble"], radii, int(cfg["n_sectors"] or 8),
            cfg["trials"] or 200, seed=seed, tail_tol=cfg["tol_tail"],
            threads=threads,
        )
        plot = "sectors"
        ok = rep.summary["passed"]
    elif cmd == "concentration":
        radii = _parse_grid(cfg["r_grid"]) if cfg.get("r_grid") else \
            [float(cfg["r"])] if cfg.get("r") else [2.0, 4.0]
        rep = ex.exp_zero_concentration(
            seq, cfg["ensemble"], radii, cfg["trials"] or 200, seed=seed,
            tail_tol=cfg["tol_tail"], threads=threads,
        )
        plot = None
        ok = rep.summary["methods_agree_all"]
    elif cmd == "lacunary":
        rep = ex.exp_lacunary_discrepancy(int(cfg["k"] or 6), seed=seed)
        plot = None
        ok = rep.summary["passed"]
    elif cmd == "realzeros":
        patterns = cfg.get("patterns") or "all"
        if patterns != "all":
            patterns = int(patterns)
        rep = ex.exp_real_zeros(
            float(cfg["alpha"] or 1.1), int(cfg["m_max"] or 3),
            sign_patterns=patterns, k=int(cfg["k"] or 10), seed=seed,
            threads=threads,
        )
        plot = None
        ok = rep.summary["passed"] is not False
    elif cmd == "moments":
        q_list = _parse_grid(cfg["q_list"]) if cfg.get("q_list") else [1, 2]
        prof = [1.0] * 63
        rep = ex.exp_log_moments(prof, q_list, cfg["trials"] or 500, seed=seed)
        plot = None
        ok = rep.summary["passed"]
    elif cmd == "khinchin":
        p_list = _parse_grid(cfg["p_list"]) if cfg.get("p_list") else [2, 4, 8]
        rep = ex.exp_khinchin(p_list, int(cfg["dim"] or 64),
                              cfg["trials"] or 10 ** 4, seed=seed)
        plot = None
        ok = rep.summary["passed"]
    elif cmd == "turan":
        rep = ex.exp_turan_diagnostic(int(cfg["n_freq"] or 2),
                                      cfg["trials"] or 10 ** 3, seed=seed)
        plot = None
        ok = rep.summary["passed"]
    elif cmd == "kahane":
        radii = _parse_grid(cfg["r_grid"]) if cfg.get("r_grid") else [0.7, 0.9]
        b_list = [complex(b) for b in (cfg["b_list"].split(",")
                  if cfg.get("b_list") else ["0", "1+1j"])]
        profile = None if cfg["seq"] == "gef" else seq
        rep = ex.exp_kahane_range(profile, radii, b_list,
                                  cfg["trials"] or 10, seed=seed,
                                  threads=threads)
        plot = None
        ok = rep.summary["means_increasing"]
    elif cmd == "counterexample":
        rep = ex.exp_counterexample_r0(cfg["trials"] or 10 ** 3,
                                       degree=int(cfg["degree"] or 80),
                                       seed=seed, threads=threads)
        plot = None
        ok = rep.summary["all_vanish_within_r0_hat"]
    elif cmd == "asymptotics":
        beta = complex(cfg["beta"]) if cfg.get("beta") else 1.0
        rep = ex.exp_coeff_asymptotics(beta, int(cfg["n_max"] or 400))
        plot = None
        ok = rep.summary["passed"] is not False
    elif cmd == "gn":
        n_list = [int(x) for x in _parse_grid(cfg["n_list"])] \
            if cfg.get("n_list") else [1, 2, 3, 4, 5]
        rep = ex.exp_gN_sharpness(n_list)
        plot = None
        ok = rep.summary["passed"]
    else:  # pragma: no cover
        raise UsageError(f"unhandled command {cmd}")
    _write_report(rep, cfg["out"], cfg["emit_plots"], plot)
    for key, value in rep.summary.items():
        if not isinstance(value, (dict, list)):
            print(f"{key}: {value}")
    return 0 if ok else 2


def run(argv) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code == 0 else 1
        cfg = _merge_config(args)
        cfg = {**_defaults(cfg), "command": args.command}
        if args.command == "growth":
            return _cmd_growth(cfg)
        if args.command == "sample":
            return _cmd_sample(cfg)
        if args.command == "zeros":
            return _cmd_zeros(cfg)
        if args.command == "covariance":
            return _cmd_covariance(cfg)
        return _experiment_command(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RandfunError as exc:
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:  # pragma: no cover
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()

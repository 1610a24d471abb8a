"""Command-line front end: ``alrd-doa {spectrum,sweep,selftest}``.

Exit codes: 0 success, 1 selftest failure, 2 config error, 3 estimator failure.
"""
import argparse
import logging
import os
import sys

import numpy as np

from ._jit import set_threads
from .alrd import alrd_scan
from .baselines import BaselineConfig, capon_spectrum, music_spectrum, prepare_covariance
from .config import load_config
from .errors import ConfigError, DomainError, HarnessError, SingularityError
from .harness import RLS_METHODS, run_sweep
from .malrd import malrd_scan
from .selftest import run_selftest
from .signal_model import generate_snapshots
from .spectrum import angle_grid

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
SPECTRUM_HEADER = "angle_deg,power"
SWEEP_HEADER = "method,snr_db,trials,resolution_prob,rmse_deg,rmse_resolved_only_deg,crb_deg,mean_op_count"

log = logging.getLogger("alrd_doa")


def _fmt(x):
    # shortest repr that round-trips; locale independent
    x = float(x)
    if np.isnan(x):
        return "nan"
    return repr(x)


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def compute_spectrum(cfg, method):
    """Spectrum of ``method`` on the config's batch at ``scenario.snr``."""
    spec = cfg.estimator(method)
    if spec.method == "esprit":
        raise ConfigError("esprit has no spectrum; use 'sweep' or a spectral method")
    batch = generate_snapshots(cfg.geometry, cfg.scenario)
    grid = angle_grid(*cfg.grid)
    if spec.method in RLS_METHODS:
        scan = alrd_scan if spec.method == "alrd" else malrd_scan
        return scan(spec.rls, batch, cfg.geometry, grid=grid)
    bcfg = BaselineConfig(spec.num_sources or cfg.scenario.num_sources, spec.use_fba, *cfg.grid)
    R = prepare_covariance(batch, spec.use_fba)
    return (capon_spectrum if spec.method == "capon" else music_spectrum)(R, cfg.geometry, bcfg)


def cmd_spectrum(cfg, method, out_dir):
    spectrum = compute_spectrum(cfg, method)
    for angle, tag in spectrum.diagnostics:
        log.warning("%s at %s deg: %s", method, angle, tag)
    rows = [(f"{a:.6f}", f"{p:.15e}") for a, p in zip(spectrum.angles_deg, spectrum.power)]
    path = os.path.join(out_dir, f"spectrum_{method}.csv")
    _write_csv(path, SPECTRUM_HEADER, rows)
    return path


def sweep_rows(reports):
    rows = []
    for rep in reports:
        for i, snr in enumerate(rep.snr_grid_db):
            rows.append((
                rep.method,
                _fmt(snr),
                str(rep.trials),
                _fmt(rep.resolution_prob[i]),
                _fmt(rep.rmse_deg[i]),
                _fmt(rep.rmse_resolved_only_deg[i]),
                _fmt(rep.crb_deg[i]),
                _fmt(rep.mean_op_count[i]),
            ))
    return rows


PLOT_SCRIPT = '''"""Plot resolution probability and RMSE from {csv}."""
import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "{csv}"))))
methods = list(dict.fromkeys(r["method"] for r in rows))
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for m in methods:
    sel = [r for r in rows if r["method"] == m]
    snr = [float(r["snr_db"]) for r in sel]
    ax1.plot(snr, [float(r["resolution_prob"]) for r in sel], marker="o", label=m)
    ax2.semilogy(snr, [float(r["rmse_deg"]) for r in sel], marker="o", label=m)
crb = [r for r in rows if r["method"] == methods[0]]
ax2.semilogy([float(r["snr_db"]) for r in crb], [float(r["crb_deg"]) for r in crb], "k--", label="CRB")
ax1.set_xlabel("SNR (dB)")
ax1.set_ylabel("probability of resolution")
ax2.set_xlabel("SNR (dB)")
ax2.set_ylabel("RMSE (deg)")
ax1.legend()
ax2.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, "sweep.png"), dpi=150)
'''


def cmd_sweep(cfg, out_dir, workers=1):
    reports = run_sweep(
        cfg.estimators, cfg.scenario, cfg.geometry, cfg.snr_list, cfg.trials,
        cfg.scenario.rng_seed, grid=cfg.grid, workers=workers,
    )
    path = os.path.join(out_dir, "sweep.csv")
    _write_csv(path, SWEEP_HEADER, sweep_rows(reports))
    if cfg.emit_plot_script:
        with open(os.path.join(out_dir, "plot_sweep.py"), "w", encoding="ascii", newline="\n") as fh:
            fh.write(PLOT_SCRIPT.format(csv="sweep.csv"))
    return path


def cmd_selftest(alpha=0.998, stream=None):
    stream = stream or sys.stdout
    rows = run_selftest(alpha)
    width = max(len(r[0]) for r in rows)
    for name, ok, detail, secs in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {secs:7.3f}s  {detail}", file=stream)
    failed = [r[0] for r in rows if not r[1]]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed", file=stream)
    if failed:
        print("failed: " + ", ".join(failed), file=stream)
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="alrd-doa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML experiment config")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    common.add_argument("--seed", type=int, help="master seed (overrides scenario.seed)")

    sp = sub.add_parser("spectrum", parents=[common], help="write one spatial spectrum as CSV")
    sp.add_argument("--method", required=True, help="estimator method or label")
    sub.add_parser("sweep", parents=[common], help="Monte Carlo SNR sweep to CSV")
    st = sub.add_parser("selftest", help="run the oracle checks")
    st.add_argument("--threads", type=int, default=0, help=argparse.SUPPRESS)
    st.add_argument("--corrupt-alpha", type=float, default=0.998, help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_CONFIG
    set_threads(args.threads)
    if args.command == "selftest":
        return cmd_selftest(args.corrupt_alpha)

    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, seed_override=args.seed)
        out_dir = args.out or cfg.out_dir
        if args.command == "spectrum":
            path = cmd_spectrum(cfg, args.method, out_dir)
        else:
            workers = args.threads or (os.cpu_count() or 1)
            path = cmd_sweep(cfg, out_dir, workers=workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularityError, HarnessError, DomainError, np.linalg.LinAlgError) as exc:
        print(f"estimator failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: phase-line sweeps, sphere fields, animation frames,
analytic formula tables and the acceptance-check runner.

All data files are CSV with a header row; floats are serialized with 17
significant digits so reruns with the same configuration are byte-identical.
Every run writes a manifest.json with the resolved configuration and sha256
checksums of the emitted files (written last, atomically)."""

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

from . import __version__
from .errors import ConfigError, NumericalError, SpinPhaseError
from .models import (ModelSpec, ground_state, ti_classical_energy, ti_classical_mx,
                     ti_classical_mz, ti_thermo_energy, ti_thermo_mx, ti_thermo_mz,
                     xy_factorization_angle, xy_factorization_point)
from .qcore import label_name, parse_label
from .analysis import (SweepConfig, canonical_labels, find_derivative_extrema, find_jumps,
                       find_parity_crossings, first_derivative, sweep)
from .wigner import SphereGrid, sphere_field

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def fmt(x):
    """17-significant-digit decimal form; round-trips double precision."""
    return f"{float(x):.17g}"


def _atomic_write(path, data: bytes):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def write_json(path, payload):
    _atomic_write(path, (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, config, files, critical_points=None, started=None):
    manifest = {
        "tool": "spinphase",
        "version": __version__,
        "config": config,
        "started_utc": started,
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "files": {os.path.basename(p): _sha256(p) for p in files},
    }
    if critical_points is not None:
        manifest["critical_points"] = critical_points
    write_json(os.path.join(outdir, "manifest.json"), manifest)


def _utcnow():
    return datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# configuration handling

DEFAULTS = {
    "model": None,
    "n": 6,
    "h": 1.0,
    "gamma": 1.0,
    "j": 1.0,
    "param-start": None,
    "param-stop": None,
    "param-step": 0.01,
    "param-value": None,
    "values": None,
    "labels": None,
    "policy": "symmetric",
    "phase-theta": 0.0,
    "phase-phi": 0.0,
    "grid-theta": 181,
    "grid-phi": 360,
    "out": ".",
    "seed": 0,
    "jump-factor": 50.0,
}

_FLOAT_KEYS = {"h", "gamma", "j", "param-start", "param-stop", "param-step", "param-value",
               "phase-theta", "phase-phi", "jump-factor"}
_INT_KEYS = {"n", "grid-theta", "grid-phi", "seed"}


def read_config_file(path):
    """Flat `key = value` file; keys match the long flag names without dashes."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                key = key.replace("_", "-")
                if key not in DEFAULTS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _coerce(key, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def resolve_config(args):
    """Merge precedence: command line > config file > defaults."""
    cfg = dict(DEFAULTS)
    if args.config:
        for key, value in read_config_file(args.config).items():
            cfg[key] = _coerce(key, value)
    for key in DEFAULTS:
        attr = key.replace("-", "_")
        value = getattr(args, attr, None)
        if value is not None:
            cfg[key] = value
    cfg["subcommand"] = args.subcommand
    return cfg


def _model_spec(cfg, param_value=None):
    family = cfg["model"]
    if family is None:
        raise ConfigError("--model is required")
    spec = ModelSpec(family=family, n=cfg["n"], h=cfg["h"], gamma=cfg["gamma"], j=cfg["j"])
    if param_value is not None:
        spec = spec.with_param(param_value)
    return spec


def _labels(cfg, n):
    if cfg["labels"] is None:
        return [tuple(l) for l in canonical_labels(n)]
    try:
        return [parse_label(tok, n) for tok in cfg["labels"].split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _sweep_config(cfg):
    if cfg["param-start"] is None or cfg["param-stop"] is None:
        raise ConfigError("--param-start and --param-stop are required for this command")
    policy = cfg["policy"].replace("-", "_")
    return SweepConfig(spec=_model_spec(cfg), start=cfg["param-start"], stop=cfg["param-stop"],
                       step=cfg["param-step"], labels=tuple(_labels(cfg, cfg["n"])),
                       policy=policy, theta=cfg["phase-theta"], phi=cfg["phase-phi"])


def _ensure_outdir(cfg):
    outdir = cfg["out"]
    os.makedirs(outdir, exist_ok=True)
    if not os.access(outdir, os.W_OK):
        raise ConfigError(f"output directory {outdir} is not writable")
    return outdir


def _critical_point_payload(points):
    return [{"kind": p.kind, "location": p.location, "magnitude": p.magnitude,
             "label": p.label, "detail": p.detail} for p in points]


def _parity_cell(value):
    return "" if math.isnan(value) else str(int(value))


PHASELINE_PLOT_STUB = '''\
#!/usr/bin/env python3
"""Render phaseline.csv produced alongside this script.

Columns:
  param      -- swept coupling (lambda for ti/xy, delta for xxz)
  label      -- correlation subset ("1", "12", ..., "tot")
  value      -- equal-angle Wigner value of the reduced state at the phase point
  energy     -- ground-state energy at this parameter
  degeneracy -- ground-space dimension within the degeneracy tolerance
  parity     -- spin-parity quantum number (+1/-1, empty when indefinite)
  gap        -- energy gap between the two lowest levels

derivative.csv carries the same layout with `dvalue`, the finite-difference
first derivative of `value` with respect to `param`.
"""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(lambda: ([], []))
with open("phaseline.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        xs, ys = series[row["label"]]
        xs.append(float(row["param"]))
        ys.append(float(row["value"]))

for label, (xs, ys) in sorted(series.items(), key=lambda kv: (len(kv[0]), kv[0])):
    plt.plot(xs, ys, label=label)
plt.xlabel("sweep parameter")
plt.ylabel("equal-angle Wigner value")
plt.legend(fontsize=7, ncol=2)
plt.tight_layout()
plt.savefig("phaseline.png", dpi=200)
'''

SPHERE_PLOT_STUB = '''\
#!/usr/bin/env python3
"""Render the sphere_<label>.csv files produced alongside this script.

Columns (theta-major ordering):
  theta -- polar angle in [0, pi], inclusive endpoints
  phi   -- azimuthal angle in [0, 2*pi), exclusive endpoint
  value -- equal-angle Wigner value of the reduced state at (theta, phi)

Values are raw (not clipped or normalized); aligned product states exceed 1.
"""
import csv
import glob

import matplotlib.pyplot as plt
import numpy as np

for path in sorted(glob.glob("sphere_*.csv")):
    thetas, phis, values = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            thetas.append(float(row["theta"]))
            phis.append(float(row["phi"]))
            values.append(float(row["value"]))
    n_theta = len(sorted(set(thetas)))
    n_phi = len(values) // n_theta
    grid = np.array(values).reshape(n_theta, n_phi)
    plt.figure()
    plt.imshow(grid, extent=(0, 2 * np.pi, np.pi, 0), aspect="auto", cmap="RdBu_r")
    plt.colorbar(label="equal-angle Wigner value")
    plt.xlabel("phi")
    plt.ylabel("theta")
    plt.title(path)
    plt.savefig(path.replace(".csv", ".png"), dpi=150)
    plt.close()
'''


def _write_plot_stub(outdir, stub):
    name = "plot_phaseline.py" if stub is PHASELINE_PLOT_STUB else "plot_sphere.py"
    path = os.path.join(outdir, name)
    _atomic_write(path, stub.encode("utf-8"))
    return path


# ---------------------------------------------------------------------------
# subcommands


def cmd_phaseline(cfg):
    started = _utcnow()
    outdir = _ensure_outdir(cfg)
    sweep_cfg = _sweep_config(cfg)
    line = sweep(sweep_cfg)
    n = sweep_cfg.spec.n

    rows = []
    for i, p in enumerate(line.params):
        for sites in sweep_cfg.labels:
            rows.append((fmt(p), label_name(sites, n), fmt(line.values[sites][i]),
                         fmt(line.energy[i]), str(int(line.degeneracy[i])),
                         _parity_cell(line.parity[i]), fmt(line.gap[i])))
    phaseline_path = os.path.join(outdir, "phaseline.csv")
    write_csv(phaseline_path, ("param", "label", "value", "energy", "degeneracy",
                               "parity", "gap"), rows)

    rows = []
    derivatives = {sites: first_derivative(line, sites) for sites in sweep_cfg.labels}
    for i, p in enumerate(line.params):
        for sites in sweep_cfg.labels:
            rows.append((fmt(p), label_name(sites, n), fmt(derivatives[sites][i])))
    derivative_path = os.path.join(outdir, "derivative.csv")
    write_csv(derivative_path, ("param", "label", "dvalue"), rows)

    points = []
    for sites in sweep_cfg.labels:
        points.extend(find_jumps(line, sites, jump_factor=cfg["jump-factor"]))
        if len(line.params) >= 5:  # extremum refinement needs interior points
            points.extend(find_derivative_extrema(line, sites))
    try:
        points.extend(find_parity_crossings(sweep_cfg))
    except ConfigError:
        pass  # model without spin-parity symmetry: no crossing scan
    payload = _critical_point_payload(points)
    critical_path = os.path.join(outdir, "criticalpoints.json")
    write_json(critical_path, {"critical_points": payload})

    files = [phaseline_path, derivative_path, critical_path,
             _write_plot_stub(outdir, PHASELINE_PLOT_STUB)]
    write_manifest(outdir, cfg, files, critical_points=payload, started=started)
    return files


def _write_sphere_files(outdir, rho, labels, grid, n):
    files = []
    for sites in labels:
        fld = sphere_field(rho, sites, grid, n=n)
        rows = []
        for i, theta in enumerate(grid.thetas):
            for jj, phi in enumerate(grid.phis):
                rows.append((fmt(theta), fmt(phi), fmt(fld.values[i, jj])))
        path = os.path.join(outdir, f"sphere_{label_name(sites, n)}.csv")
        write_csv(path, ("theta", "phi", "value"), rows)
        files.append(path)
    return files


def cmd_sphere(cfg):
    started = _utcnow()
    outdir = _ensure_outdir(cfg)
    if cfg["param-value"] is None:
        raise ConfigError("--param-value is required for the sphere command")
    spec = _model_spec(cfg, cfg["param-value"])
    labels = _labels(cfg, spec.n)
    grid = SphereGrid(cfg["grid-theta"], cfg["grid-phi"])
    policy = cfg["policy"].replace("-", "_")
    gs = ground_state(spec, policy=policy)
    files = _write_sphere_files(outdir, gs.state, labels, grid, spec.n)
    files.append(_write_plot_stub(outdir, SPHERE_PLOT_STUB))
    write_manifest(outdir, cfg, files, started=started)
    return files


def cmd_animate(cfg):
    started = _utcnow()
    outdir = _ensure_outdir(cfg)
    sweep_cfg = _sweep_config(cfg)
    grid = SphereGrid(cfg["grid-theta"], cfg["grid-phi"])
    policy = cfg["policy"].replace("-", "_")
    files = []
    index_rows = []
    for idx, value in enumerate(sweep_cfg.params):
        frame_dir = os.path.join(outdir, f"frame_{idx:04d}")
        os.makedirs(frame_dir, exist_ok=True)
        spec = sweep_cfg.spec.with_param(value)
        gs = ground_state(spec, policy=policy)
        files.extend(_write_sphere_files(frame_dir, gs.state, sweep_cfg.labels, grid, spec.n))
        index_rows.append((str(idx), fmt(value)))
    index_path = os.path.join(outdir, "frames.csv")
    write_csv(index_path, ("frame", "param"), index_rows)
    files.append(index_path)
    files.append(_write_plot_stub(outdir, SPHERE_PLOT_STUB))
    write_manifest(outdir, cfg, files, started=started)
    return files


def _formula_values(cfg):
    if cfg["values"] is not None:
        try:
            return [float(tok) for tok in cfg["values"].split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --values list: {cfg['values']!r}") from exc
    if cfg["param-start"] is None or cfg["param-stop"] is None:
        raise ConfigError("formulas needs --values or --param-start/--param-stop")
    count = int(math.floor((cfg["param-stop"] - cfg["param-start"]) / cfg["param-step"] + 1e-9))
    return [cfg["param-start"] + k * cfg["param-step"] for k in range(count + 1)]


def cmd_formulas(cfg):
    started = _utcnow()
    outdir = _ensure_outdir(cfg)
    family = cfg["model"]
    values = _formula_values(cfg)
    if family == "ti":
        header = ("lambda", "energy_classical", "mx_classical", "mz_classical",
                  "energy_thermo", "mx_thermo", "mz_thermo")
        rows = [(fmt(v), fmt(ti_classical_energy(v)), fmt(ti_classical_mx(v)),
                 fmt(ti_classical_mz(v)), fmt(ti_thermo_energy(v)), fmt(ti_thermo_mx(v)),
                 fmt(ti_thermo_mz(v))) for v in values]
    elif family == "xy":
        header = ("gamma", "factorization_lambda", "alignment_angle")
        rows = []
        for v in values:
            lam_f = xy_factorization_point(v)
            rows.append((fmt(v), "inf" if math.isinf(lam_f) else fmt(lam_f),
                         fmt(xy_factorization_angle(v))))
    else:
        raise ConfigError("formulas is defined for --model ti or xy only")
    print("\t".join(header))
    for row in rows:
        print("\t".join(row))
    path = os.path.join(outdir, "formulas.csv")
    write_csv(path, header, rows)
    write_manifest(outdir, cfg, [path], started=started)
    return [path]


def cmd_verify(cfg):
    from .acceptance import run_all

    results = run_all(seed=cfg["seed"])
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} criterion {res.ident}: {res.description} [{res.detail}]")
    return all(res.passed for res in results)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinphase",
        description="Equal-angle spin Wigner phase lines, sphere fields and "
                    "critical-point detection for cyclic spin-1/2 chains.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_shared(p):
        p.add_argument("--model", choices=("ti", "xy", "xxz"), help="chain family")
        p.add_argument("--n", type=int, help="number of sites (default 6)")
        p.add_argument("--h", type=float, help="transverse field strength (default 1)")
        p.add_argument("--gamma", type=float, help="xy anisotropy")
        p.add_argument("--j", type=float, help="xxz coupling strength (default 1)")
        p.add_argument("--param-start", type=float, help="sweep start value")
        p.add_argument("--param-stop", type=float, help="sweep stop value")
        p.add_argument("--param-step", type=float, help="sweep step (default 0.01)")
        p.add_argument("--labels", help="comma list of site subsets, e.g. 1,12,135,tot")
        p.add_argument("--policy", choices=("symmetric", "mixture", "aligned-up"),
                       help="degenerate ground-space policy (default symmetric)")
        p.add_argument("--phase-theta", type=float, help="phase point theta (default 0)")
        p.add_argument("--phase-phi", type=float, help="phase point phi (default 0)")
        p.add_argument("--grid-theta", type=int, help="sphere grid theta samples (default 181)")
        p.add_argument("--grid-phi", type=int, help="sphere grid phi samples (default 360)")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="random seed for verification draws")

    p = sub.add_parser("phaseline", help="sweep a parameter and export phase lines")
    add_shared(p)
    p.add_argument("--jump-factor", type=float, help="jump detection factor (default 50)")

    p = sub.add_parser("sphere", help="export sphere-sampled Wigner fields at one parameter")
    add_shared(p)
    p.add_argument("--param-value", type=float, help="parameter value (lambda or delta)")

    p = sub.add_parser("animate", help="sphere fields at every sweep value (frame directories)")
    add_shared(p)

    p = sub.add_parser("formulas", help="evaluate closed-form reference formulas")
    add_shared(p)
    p.add_argument("--values", help="comma list of parameter values")

    p = sub.add_parser("verify", help="run the acceptance checks")
    add_shared(p)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.subcommand == "phaseline":
            cmd_phaseline(cfg)
        elif args.subcommand == "sphere":
            cmd_sphere(cfg)
        elif args.subcommand == "animate":
            cmd_animate(cfg)
        elif args.subcommand == "formulas":
            cmd_formulas(cfg)
        elif args.subcommand == "verify":
            if not cmd_verify(cfg):
                return EXIT_NUMERICAL
        return EXIT_OK
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpinPhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

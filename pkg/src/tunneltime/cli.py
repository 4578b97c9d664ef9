"""Command-line entry point ``tunnel``.

Subcommands read one JSON run configuration (or a shipped preset):

``scan``       sweep d, l0, lg(d/l0) or k0 and tabulate channel averages
``params``     T, R, J, F and their k-derivatives along a k-grid
``moments``    position and momentum moments of every packet kind
``times``      transit, delay, standard wave-packet and window times (JSON)
``propagate``  grid evolution with density snapshots and a JSON summary

Exit codes: 0 success, 2 configuration error, 3 numerical failure (for
``scan``: every point failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .channels import (delay_times, montecarlo_sort, scattering_window, swpa_times,
                       transit_times)
from .core import HALF_QUANTUM, HBAR, DomainError, QuadratureError, ResolutionError, k_from_energy
from .packets import SHAPES, ChannelEmpty, PacketKind, PacketSpec, k_sample, moments, norms
from .potential import PotentialProfile, rectangular
from .scatter import tunneling_params

SCHEMA_VERSION = 1
DIGITS = 12
PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5")
SCAN_PARAMETERS = ("d", "l0", "log_d_over_l0", "k0")
NUMERICAL_ERRORS = (DomainError, QuadratureError, ResolutionError, ArithmeticError)

SCAN_COLUMNS = (
    "parameter", "value", "d_nm", "l0_nm", "k0_invnm", "a_nm", "T_bar", "R_bar",
    "k_tr_over_k0", "k_ref_over_k0", "x_tr_nm", "x_ref_nm", "Jp_tr_nm", "Jp_ref_nm",
    "tau_del_tr_fs", "tau_del_ref_fs", "t_start_fs", "t_end_fs", "tau_scatt_fs",
    "tau_narrow_fs", "completed", "tr_under_fraction", "error",
)
PARAM_COLUMNS = ("k", "T", "R", "J", "F", "Tp", "Jp", "Fp")
MOMENT_COLUMNS = ("kind", "norm", "mean_k", "var_k", "x_slope", "x_intercept", "varx_c0",
                  "varx_c1", "varx_c2")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the line or field."""


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ScanSpec:
    parameter: str
    start: float
    stop: float
    steps: int
    log: bool = False

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    """Barrier, packet, optional sweep and time-report settings.

    ``a_nm`` may be left out, in which case every point uses
    ``max(20 l0, 100)`` nm.
    """

    barrier: dict
    l0_nm: float
    m_eff: float
    E0_eV: Optional[float] = None
    k0_invnm: Optional[float] = None
    shape: str = "gaussian"
    scan: Optional[ScanSpec] = None
    L1_nm: float = 0.0
    L2_nm: float = 0.0
    samples: int = 0
    seed: int = 0
    outputs: dict = field(default_factory=dict)

    @property
    def k0(self) -> float:
        if self.k0_invnm is not None:
            return self.k0_invnm
        return k_from_energy(self.E0_eV, self.m_eff)

    @property
    def a_fixed(self) -> Optional[float]:
        return self.barrier.get("a_nm")

    def a_for(self, l0: float) -> float:
        a = self.a_fixed
        return float(a) if a is not None else max(20.0 * l0, 100.0)

    def point(self, value: Optional[float] = None):
        """(PacketSpec, PotentialProfile) at one scan value, or the base point."""
        k0, l0 = self.k0, self.l0_nm
        d = self.barrier.get("d_nm")
        par = self.scan.parameter if (self.scan and value is not None) else None
        if par == "d":
            d = value
        elif par == "l0":
            l0 = value
        elif par == "log_d_over_l0":
            l0 = d / 10.0 ** value
        elif par == "k0":
            k0 = value
        spec = PacketSpec(k0, l0, self.m_eff, shape=self.shape)
        a = self.a_for(l0)
        if self.barrier.get("type", "rectangular") == "rectangular":
            p = rectangular(self.barrier["V0_eV"], a, d)
        else:
            p = PotentialProfile(a, tuple(tuple(s) for s in self.barrier["segments"]))
        return spec, p


def _require_number(data, key, path, positive=False, allow_zero=False):
    if key not in data:
        raise ConfigError(f"field '{path}{key}': missing")
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"field '{path}{key}': expected a finite number, got {v!r}")
    if positive and not (v > 0 or (allow_zero and v == 0)):
        raise ConfigError(f"field '{path}{key}': must be {'non-negative' if allow_zero else 'positive'}")
    return float(v)


def parse_config(text: str) -> RunConfig:
    """Validate a JSON configuration string."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("line 1: the configuration must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema_version': unsupported version {version!r}")

    barrier = data.get("barrier")
    if not isinstance(barrier, dict):
        raise ConfigError("field 'barrier': missing or not an object")
    kind = barrier.get("type", "rectangular")
    if kind == "rectangular":
        _require_number(barrier, "V0_eV", "barrier.")
        _require_number(barrier, "d_nm", "barrier.", positive=True)
    elif kind == "segments":
        segs = barrier.get("segments")
        if not isinstance(segs, list) or not segs:
            raise ConfigError("field 'barrier.segments': expected a non-empty list")
        for i, s in enumerate(segs):
            if (not isinstance(s, list) or len(s) != 2
                    or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in s)):
                raise ConfigError(f"field 'barrier.segments[{i}]': expected [width_nm, V_eV]")
            if not s[0] > 0:
                raise ConfigError(f"field 'barrier.segments[{i}]': width must be positive")
        barrier = dict(barrier, d_nm=float(sum(s[0] for s in segs)))
    else:
        raise ConfigError(f"field 'barrier.type': unknown type {kind!r}")
    if "a_nm" in barrier:
        _require_number(barrier, "a_nm", "barrier.", positive=True)

    packet = data.get("packet")
    if not isinstance(packet, dict):
        raise ConfigError("field 'packet': missing or not an object")
    has_e, has_k = "E0_eV" in packet, "k0_invnm" in packet
    if has_e == has_k:
        raise ConfigError("field 'packet': give exactly one of E0_eV and k0_invnm")
    E0 = _require_number(packet, "E0_eV", "packet.", positive=True) if has_e else None
    k0 = _require_number(packet, "k0_invnm", "packet.", positive=True) if has_k else None
    l0 = _require_number(packet, "l0_nm", "packet.", positive=True)
    m = _require_number(packet, "m_eff", "packet.", positive=True)
    shape = packet.get("shape", "gaussian")
    if shape not in SHAPES:
        raise ConfigError(f"field 'packet.shape': unknown shape {shape!r}")

    scan = None
    if data.get("scan") is not None:
        sc = data["scan"]
        if not isinstance(sc, dict):
            raise ConfigError("field 'scan': expected an object")
        par = sc.get("parameter")
        if par not in SCAN_PARAMETERS:
            raise ConfigError(f"field 'scan.parameter': expected one of {SCAN_PARAMETERS}")
        lo = _require_number(sc, "from", "scan.")
        hi = _require_number(sc, "to", "scan.")
        steps = sc.get("steps")
        if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
            raise ConfigError("field 'scan.steps': expected a positive integer")
        if not hi >= lo:
            raise ConfigError("field 'scan.to': range must be ordered (from <= to)")
        log = bool(sc.get("log", False))
        if log and not lo > 0:
            raise ConfigError("field 'scan.from': a log-spaced range must be positive")
        if par in ("d", "l0", "k0") and not lo > 0:
            raise ConfigError(f"field 'scan.from': {par} must stay positive")
        if par == "d" and kind != "rectangular":
            raise ConfigError("field 'scan.parameter': a d sweep needs a rectangular barrier")
        scan = ScanSpec(par, lo, hi, steps, log)

    times = data.get("times", {})
    L1 = _require_number(times, "L1_nm", "times.", positive=True, allow_zero=True) \
        if "L1_nm" in times else 0.0
    L2 = _require_number(times, "L2_nm", "times.", positive=True, allow_zero=True) \
        if "L2_nm" in times else 0.0
    samples = int(times.get("samples", 0))
    seed = int(times.get("seed", 0))
    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("field 'outputs': expected an object")
    if outputs.get("format", "csv") not in ("csv", "json"):
        raise ConfigError("field 'outputs.format': expected 'csv' or 'json'")
    return RunConfig(barrier=barrier, l0_nm=l0, m_eff=m, E0_eV=E0, k0_invnm=k0, shape=shape,
                     scan=scan, L1_nm=L1, L2_nm=L2, samples=samples, seed=seed,
                     outputs=outputs)


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("tunneltime").joinpath("presets", f"{name}.json").read_text()


def load_config(path: Optional[str] = None, preset: Optional[str] = None) -> RunConfig:
    if (path is None) == (preset is None):
        raise ConfigError("give exactly one of --config and --preset")
    if preset is not None:
        return parse_config(preset_text(preset))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# ---------------------------------------------------------------- evaluation

def _under_fraction(spec: PacketSpec, p: PotentialProfile) -> float:
    """Share of the transmitted packet with energy below the highest segment."""
    s = k_sample(spec, p)
    v_max = max(v for _, v in p.segments)
    if v_max <= 0 or not s.has_tr:
        return 0.0
    k_top = k_from_energy(v_max, spec.mass_ratio)
    return float(s.tr((np.abs(s.k) < k_top).astype(float)))


def scan_point(cfg: RunConfig, value: Optional[float]) -> dict:
    """One row of a sweep; numerical failures land in the ``error`` column."""
    row = {c: float("nan") for c in SCAN_COLUMNS}
    row["parameter"] = cfg.scan.parameter if cfg.scan else ""
    row["value"] = value if value is not None else float("nan")
    row["error"] = ""
    row["completed"] = 0
    try:
        spec, p = cfg.point(value)
        row.update(d_nm=p.d, l0_nm=spec.l0, k0_invnm=spec.k0, a_nm=p.a)
        s = k_sample(spec, p)
        d = s.data
        row.update(T_bar=s.T_bar, R_bar=s.R_bar)
        if s.has_tr:
            row.update(k_tr_over_k0=s.tr(s.k) / spec.k0, Jp_tr_nm=s.tr(d.Jp),
                       x_tr_nm=s.tr(d.Jp) - p.d)
        if s.has_ref:
            row.update(k_ref_over_k0=s.ref(s.k) / spec.k0, Jp_ref_nm=s.ref(d.Jp),
                       x_ref_nm=s.ref(d.Jp - d.Fp) - p.d)
        row["tr_under_fraction"] = _under_fraction(spec, p)
        dt = delay_times(spec, p)
        row.update(tau_del_tr_fs=dt.tau_tr, tau_del_ref_fs=dt.tau_ref_minus)
        w = scattering_window(spec, p)
        row.update(t_start_fs=w.t_start, t_end_fs=w.t_end, tau_scatt_fs=w.tau_scatt,
                   tau_narrow_fs=w.tau_narrow, completed=int(w.completed))
    except NUMERICAL_ERRORS as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_scan(cfg: RunConfig, threads: int = 1) -> list:
    """Rows of the configured sweep, in input order."""
    values = list(cfg.scan.values()) if cfg.scan else [None]
    if threads <= 1:
        return [scan_point(cfg, v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda v: scan_point(cfg, v), values))


def params_rows(cfg: RunConfig, k_from: float, k_to: float, k_steps: int) -> list:
    spec, p = cfg.point()
    k = np.linspace(k_from, k_to, k_steps)
    data = tunneling_params(p, k, spec.mass_ratio, k_scale=spec.k_scale)
    cols = [np.atleast_1d(getattr(data, c)) for c in PARAM_COLUMNS]
    return [dict(zip(PARAM_COLUMNS, vals)) for vals in zip(*cols)]


def moment_rows(cfg: RunConfig) -> list:
    spec, p = cfg.point()
    rows = []
    for kind in PacketKind:
        try:
            m = moments(spec, p, kind)
            vals = (m.norm, m.mean_k, m.var_k, *m.x_of_t, *m.var_x_coeffs)
        except ChannelEmpty:
            vals = (0.0,) + (float("nan"),) * 7
        rows.append(dict(zip(MOMENT_COLUMNS, (kind.value, *vals))))
    return rows


def _with_ps(report: dict) -> dict:
    out = dict(report)
    for key, v in report.items():
        if key.endswith("_fs"):
            out[key[:-3] + "_ps"] = v / 1000.0 if v is not None else None
    return out


def times_report(cfg: RunConfig, samples: Optional[int] = None, seed: Optional[int] = None,
                 L1: Optional[float] = None, L2: Optional[float] = None) -> dict:
    spec, p = cfg.point()
    L1 = cfg.L1_nm if L1 is None else L1
    L2 = cfg.L2_nm if L2 is None else L2
    samples = cfg.samples if samples is None else samples
    seed = cfg.seed if seed is None else seed
    T, R = norms(spec, p)
    tt = transit_times(spec, p, L1, L2)
    dt = delay_times(spec, p)
    w = scattering_window(spec, p)
    with warnings.catch_warnings():
        # the a-dependence is the point of these times; the size warning is noise here
        warnings.simplefilter("ignore", RuntimeWarning)
        swpa_tr, swpa_ref = swpa_times(spec, p, L1, L2)
    report = {
        "a_nm": p.a, "d_nm": p.d, "l0_nm": spec.l0, "k0_invnm": spec.k0,
        "L1_nm": L1, "L2_nm": L2, "T_bar": T, "R_bar": R,
        "transit_tr_fs": tt.tau_tr, "transit_ref_minus_fs": tt.tau_ref_minus,
        "transit_ref_plus_fs": tt.tau_ref_plus, "non_measurable": tt.non_measurable,
        "delay_tr_fs": dt.tau_tr, "delay_ref_minus_fs": dt.tau_ref_minus,
        "delay_ref_plus_fs": dt.tau_ref_plus, "x_tr_nm": dt.x_tr, "x_ref_nm": dt.x_ref,
        "x_ref_inverted_nm": dt.x_ref_inverted,
        "swpa_tr_fs": swpa_tr, "swpa_ref_fs": swpa_ref,
        "t_start_fs": w.t_start, "t_end_fs": w.t_end, "tau_scatt_fs": w.tau_scatt,
        "tau_narrow_fs": w.tau_narrow, "completed": w.completed,
    }
    report = _with_ps(report)
    if samples:
        mc = montecarlo_sort(spec, p, samples, seed)
        report["montecarlo"] = {
            "n_samples": mc.n_samples, "seed": seed, "n_tr": mc.n_tr, "n_ref": mc.n_ref,
            "mean_k_tr": mc.mean_k_tr, "mean_k_ref": mc.mean_k_ref, "se_tr": mc.se_tr,
            "se_ref": mc.se_ref,
        }
    return report


def propagate_report(cfg: RunConfig, t_max: float, snapshot_every: float, dx: float, dt: float,
                     scheme: str, decimate: int = 10):
    """(snapshot rows, summary dict) of a grid run."""
    from .propagator import GridConfig, cm_trajectory, fit_line, run

    spec, p = cfg.point()
    grid = GridConfig(dx=dx, dt=dt, scheme=scheme)
    snaps = []

    def keep(state):
        x, rho = state.x[::decimate], np.abs(state.psi[::decimate]) ** 2
        snaps.extend({"t": state.t, "x": xi, "|psi|^2": ri} for xi, ri in zip(x, rho))

    rec = run(spec, p, t_max, snapshot_every, grid, snapshot=keep if snapshot_every else None)
    T, R = norms(spec, p)
    summary = {
        "t_max_fs": float(rec.times[-1]), "dx_nm": rec.final.dx, "dt_fs": dt, "scheme": scheme,
        "n_points": rec.final.n_points, "max_leak": rec.max_leak,
        "norm_left": rec.norms[-1][0], "norm_barrier": rec.norms[-1][1],
        "norm_right": rec.norms[-1][2], "T_bar": T, "R_bar": R,
        "norm_drift": float(np.max(np.abs(rec.total_norm - 1.0))),
        "energy_drift": float(np.ptp(rec.energy) / abs(rec.energy[0])),
    }
    t_fit = 0.5 * t_max
    for region, kind in (("right", PacketKind.TRANSMITTED), ("left", PacketKind.REFLECTED)):
        try:
            slope, icpt = fit_line(*cm_trajectory(rec, region), t_from=t_fit)
        except DomainError:
            slope = icpt = None
        try:
            m = moments(spec, p, kind)
            ps, pi = m.x_of_t
        except ChannelEmpty:
            ps = pi = None
        summary[f"{region}_slope"] = slope
        summary[f"{region}_intercept"] = icpt
        summary[f"{region}_slope_predicted"] = ps
        summary[f"{region}_intercept_predicted"] = pi
    summary["fit_from_fs"] = t_fit
    return snaps, summary


# ------------------------------------------------------------------- output

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{DIGITS}g}"
    return str(v)


def _json_value(v):
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.{DIGITS}g}") if math.isfinite(v) else None
    return v


def to_csv(rows: list, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def to_json(rows: list, columns, metadata: dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "metadata": _json_value(metadata),
           "columns": list(columns), "rows": [_json_value({c: r[c] for c in columns})
                                              for r in rows]}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def _metadata(cfg: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "barrier": cfg.barrier,
        "packet": {"E0_eV": cfg.E0_eV, "k0_invnm": cfg.k0, "l0_nm": cfg.l0_nm,
                   "m_eff": cfg.m_eff, "shape": cfg.shape},
        "a_nm_policy": "fixed" if cfg.a_fixed is not None else "max(20*l0, 100)",
        "units": {"length": "nm", "time": "fs", "energy": "eV", "mass": "m_e"},
    }


def _table(rows, columns, fmt_name, cfg, command):
    if fmt_name == "json":
        return to_json(rows, columns, _metadata(cfg, command))
    return to_csv(rows, columns)


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    units = (f"units: nm, fs, eV, m_e; hbar = {HBAR} eV fs, "
             f"hbar^2/(2 m_e) = {HALF_QUANTUM} eV nm^2")
    parser = argparse.ArgumentParser(prog="tunnel", description=__doc__.splitlines()[0],
                                     epilog=units)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--preset", choices=PRESETS, help="shipped configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("scan", parents=[common], help="parameter sweep")
    pp = sub.add_parser("params", parents=[common], help="tunneling parameters on a k-grid")
    pp.add_argument("--k-from", type=float, required=True)
    pp.add_argument("--k-to", type=float, required=True)
    pp.add_argument("--k-steps", type=int, required=True)
    sub.add_parser("moments", parents=[common], help="packet moments of every kind")
    tp = sub.add_parser("times", parents=[common], help="characteristic times (JSON)")
    tp.add_argument("--L1", type=float, default=None)
    tp.add_argument("--L2", type=float, default=None)
    tp.add_argument("--samples", type=int, default=None)
    gp = sub.add_parser("propagate", parents=[common], help="grid evolution")
    gp.add_argument("--t-max", type=float, required=True)
    gp.add_argument("--snapshot-every", type=float, default=0.0)
    gp.add_argument("--dx", type=float, default=0.1)
    gp.add_argument("--dt", type=float, default=0.2)
    gp.add_argument("--scheme", choices=("cn", "split"), default="cn")
    gp.add_argument("--summary", help="JSON summary path (default: stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.preset)
        fmt_name = args.format or cfg.outputs.get("format", "csv")
        out = args.out or cfg.outputs.get("path")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "scan":
            rows = run_scan(cfg, args.threads)
            emit(_table(rows, SCAN_COLUMNS, fmt_name, cfg, "scan"), out)
            if rows and all(r["error"] for r in rows):
                print("every scan point failed", file=sys.stderr)
                return 3
        elif args.command == "params":
            if args.k_steps < 1 or not args.k_to >= args.k_from:
                raise ConfigError("--k-from/--k-to/--k-steps must describe an ordered grid")
            rows = params_rows(cfg, args.k_from, args.k_to, args.k_steps)
            emit(_table(rows, PARAM_COLUMNS, fmt_name, cfg, "params"), out)
        elif args.command == "moments":
            emit(_table(moment_rows(cfg), MOMENT_COLUMNS, fmt_name, cfg, "moments"), out)
        elif args.command == "times":
            report = times_report(cfg, args.samples, args.seed, args.L1, args.L2)
            doc = {"schema_version": SCHEMA_VERSION, "metadata": _metadata(cfg, "times"),
                   "times": report}
            emit(json.dumps(_json_value(doc), indent=1, allow_nan=False) + "\n", out)
        elif args.command == "propagate":
            snaps, summary = propagate_report(cfg, args.t_max, args.snapshot_every, args.dx,
                                              args.dt, args.scheme)
            doc = {"schema_version": SCHEMA_VERSION, "metadata": _metadata(cfg, "propagate"),
                   "summary": summary}
            text = json.dumps(_json_value(doc), indent=1, allow_nan=False) + "\n"
            if out is not None:
                emit(to_csv(snaps, ("t", "x", "|psi|^2")), out)
            emit(text, args.summary)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

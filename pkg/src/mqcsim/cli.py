"""Command-line driver: structured configs in, CSV and JSON out.

Config files are flat ``key = value`` text with units spelled out in the key
names (unit mistakes are the classic failure mode of physics CLIs), e.g.::

    temperature_K   = 320
    wavelength_m    = 790e-9
    gamma_rad_per_s = 3.81199e7
    rbar_m          = 10e-6
    theta_pi        = 0.14

Exactly one of rbar_m or density_per_m3 may be given; a density converts via
rbar = 0.554 * n^(-1/3).  All frequencies are logged in both rad/s and Hz.
Outputs are deterministic: identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__, averaging, spectra, validate
from .liouville import PhysicalParams, SingularResolventError

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_DEFAULTS = {
    "temperature_K": 320.0,
    "mass_kg": 1.443e-25,
    "wavelength_m": 790e-9,
    "gamma_rad_per_s": 2.0 * np.pi * 6.067e6,
    "rbar_m": None,
    "density_per_m3": None,
    "theta_pi": 0.14,
    "channel": "par",
    "khat": "y",
    "kappa": "1",
    "tensor": "far",
    "sphere_polar": 16,
    "sphere_azimuth": 32,
    "hermite_order": 64,
    "omega_points": 801,
    "omega_span": 8.0,
    "include_double": True,
    "normalized": False,
}

_CHOICES = {"channel": ("par", "perp"), "khat": ("x", "y"), "tensor": ("far", "full")}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated run settings; see module docstring for the file format."""

    temperature_K: float = _DEFAULTS["temperature_K"]
    mass_kg: float = _DEFAULTS["mass_kg"]
    wavelength_m: float = _DEFAULTS["wavelength_m"]
    gamma_rad_per_s: float = _DEFAULTS["gamma_rad_per_s"]
    rbar_m: float | None = None
    density_per_m3: float | None = None
    theta_pi: float = _DEFAULTS["theta_pi"]
    channel: str = "par"
    khat: str = "y"
    kappa: tuple = (1,)
    tensor: str = "far"
    sphere_polar: int = 16
    sphere_azimuth: int = 32
    hermite_order: int = 64
    omega_points: int = 801
    omega_span: float = 8.0
    include_double: bool = True
    normalized: bool = False

    def __post_init__(self):
        if (self.rbar_m is None) == (self.density_per_m3 is None):
            if self.rbar_m is None:
                self.rbar_m = 10e-6            # reference value; density unset
            else:
                raise ConfigError("give exactly one of rbar_m or density_per_m3")
        if self.density_per_m3 is not None:
            self.rbar_m = 0.554 * self.density_per_m3 ** (-1.0 / 3.0)
        for key, choices in _CHOICES.items():
            if getattr(self, key) not in choices:
                raise ConfigError(f"{key} must be one of {choices}")
        if not all(k in (1, 2) for k in self.kappa):
            raise ConfigError("kappa entries must be 1 or 2")
        if self.omega_points < 1:
            raise ConfigError("omega_points must be at least 1")
        if self.theta_pi < 0:
            raise ConfigError("theta_pi must be nonnegative")

    @property
    def tensor_mode(self) -> str:
        return {"far": "far_field", "full": "full"}[self.tensor]

    def physical_params(self) -> PhysicalParams:
        return PhysicalParams(gamma=self.gamma_rad_per_s, wavelength=self.wavelength_m,
                              temperature=self.temperature_K, mass=self.mass_kg,
                              rbar=self.rbar_m)

    def sphere_quad(self) -> averaging.SphereQuadrature:
        return averaging.SphereQuadrature(self.sphere_polar, self.sphere_azimuth)

    def metadata(self) -> dict:
        p = self.physical_params()
        md = asdict(self)
        md.update({
            "code_version": __version__,
            "xibar": p.xibar,
            "dbar_rad_per_s": p.dbar,
            "dbar_Hz": p.dbar / (2.0 * np.pi),
            "gamma_Hz": p.gamma / (2.0 * np.pi),
            "dbar_over_gamma": p.dbar_over_gamma,
            "seed_env_reserved": os.environ.get("MQC_SIM_SEED"),
        })
        return md


def _parse_value(raw: str):
    low = raw.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        f = float(raw)
        return int(f) if f.is_integer() and "." not in raw and "e" not in low else f
    except ValueError:
        return raw.strip()


def read_config(path: str | None, overrides: dict) -> RunConfig:
    values: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in body.split("=", 1))
            if key not in _DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    kappa = values.get("kappa", _DEFAULTS["kappa"])
    if isinstance(kappa, (int, float)):
        kappa = (int(kappa),)
    else:
        kappa = tuple(int(part) for part in str(kappa).split(",") if part.strip())
    values["kappa"] = kappa
    try:
        return RunConfig(**{k: values.get(k, v) for k, v in _DEFAULTS.items()}
                         | {"kappa": kappa})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                             for cell in row])


def _write_sidecar(path: Path, cfg: RunConfig, extra: dict) -> None:
    payload = {"config": cfg.metadata(), **extra}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def _moment_guard(cfg: RunConfig) -> float:
    """Relative change of the exchange moments under order doubling."""
    from .liouville import stripped_tensor
    from .scattering import sym_components
    p = cfg.physical_params()
    fn = lambda n: sym_components(stripped_tensor(p.xibar, n, cfg.tensor_mode))
    a = averaging.exchange_moment_matrix(fn, cfg.sphere_quad(), check=False)
    b = averaging.exchange_moment_matrix(fn, cfg.sphere_quad().doubled(), check=False)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out_dir: Path, jobs: int = 1) -> int:
    params = cfg.physical_params()
    quad = cfg.sphere_quad()
    guard = _moment_guard(cfg)
    for kappa in cfg.kappa:
        result = spectra.spectrum(kappa, cfg.channel, cfg.khat, cfg.theta_pi * np.pi,
                                  params, tensor_mode=cfg.tensor_mode,
                                  include_double=cfg.include_double, sphere_quad=quad,
                                  npoints=cfg.omega_points, span=cfg.omega_span)
        tag = f"k{kappa}_{cfg.khat}_{cfg.channel}"
        rows = zip(result.detuning, result.values.real, result.values.imag)
        _write_csv(out_dir / f"spectrum_{tag}.csv",
                   ["detuning_over_gamma", "re", "im"], rows)
        _write_sidecar(out_dir / f"spectrum_{tag}.json", cfg,
                       {"kappa": kappa, "peak_re": float(np.max(result.values.real)),
                        "moment_guard_rel_change": guard})
    return 0


def _scan_grid(cfg: RunConfig, theta_min_pi: float, theta_max_pi: float, steps: int):
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    if theta_max_pi <= theta_min_pi:
        raise ConfigError("theta_max_pi must exceed theta_min_pi")
    return np.linspace(theta_min_pi, theta_max_pi, steps) * np.pi


def _scan_signals(cfg: RunConfig, thetas: np.ndarray, jobs: int) -> dict:
    params = cfg.physical_params()
    quad = cfg.sphere_quad()

    def one(name):
        kappa, channel, khat = spectra._SIGNAL_SPECS[name]
        return name, np.asarray(spectra.peak_amplitude(
            kappa, channel, khat, thetas, params,
            tensor_mode=cfg.tensor_mode, sphere_quad=quad))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            pairs = list(pool.map(one, spectra.SIGNAL_NAMES))
    else:
        pairs = [one(name) for name in spectra.SIGNAL_NAMES]
    return dict(pairs)


def cmd_peakscan(cfg: RunConfig, out_dir: Path, theta_min_pi: float,
                 theta_max_pi: float, steps: int, jobs: int = 1) -> int:
    thetas = _scan_grid(cfg, theta_min_pi, theta_max_pi, steps)
    scans = _scan_signals(cfg, thetas, jobs)
    header = ["theta_over_pi", *spectra.SIGNAL_NAMES]
    columns = [scans[name] for name in spectra.SIGNAL_NAMES]
    if cfg.normalized:
        header += [f"norm_{name}" for name in spectra.SIGNAL_NAMES]
        columns += [col / np.max(np.abs(col)) for col in scans.values()]
    rows = zip(thetas / np.pi, *columns)
    _write_csv(out_dir / "peakscan.csv", header, rows)
    _write_sidecar(out_dir / "peakscan.json", cfg,
                   {"theta_min_pi": theta_min_pi, "theta_max_pi": theta_max_pi,
                    "steps": steps})
    return 0


def cmd_harmonics(cfg: RunConfig, out_dir: Path, n_max: int = 12, jobs: int = 1) -> int:
    params = cfg.physical_params()
    quad = cfg.sphere_quad()
    rows = []
    for name in spectra.SIGNAL_NAMES:
        kappa, channel, khat = spectra._SIGNAL_SPECS[name]

        def peak_fn(th, _spec=(kappa, channel, khat)):
            vals = np.asarray(spectra.peak_amplitude(*_spec, th, params,
                                                     tensor_mode=cfg.tensor_mode,
                                                     sphere_quad=quad))
            return vals / np.max(np.abs(vals))

        series = spectra.harmonic_coefficients(peak_fn, n_max=n_max)
        for n, a in series["coefficients"].items():
            rows.append([name, str(n), a, series["residual"]])
    _write_csv(out_dir / "harmonics.csv", ["signal", "n", "A_n", "residual"], rows)
    _write_sidecar(out_dir / "harmonics.json", cfg, {"n_max": n_max})
    return 0


def cmd_oracle(cfg: RunConfig, out_dir: Path) -> int:
    params = cfg.physical_params()
    u = np.linspace(-25.0, 25.0, 101)
    td = spectra.time_domain_spectrum(cfg.channel, cfg.khat, cfg.theta_pi * np.pi, 0.0, u)
    sc = spectra.single_config_spectrum(0.0, 0.0, params.xibar, [0, 0, 1.0], 1,
                                        cfg.channel, cfg.khat, cfg.theta_pi * np.pi,
                                        u, include_double=False)
    scale = np.max(np.abs(sc.values))
    dev = float(np.max(np.abs(td.values - sc.values)) / scale) if scale > 0 else 0.0
    rows = zip(u, td.values.real, td.values.imag, sc.values.real, sc.values.imag)
    _write_csv(out_dir / "oracle.csv",
               ["detuning_over_gamma", "re_time_domain", "im_time_domain",
                "re_resolvent", "im_resolvent"], rows)
    _write_sidecar(out_dir / "oracle.json", cfg, {"max_rel_deviation": dev})
    return 0


def cmd_validate(cfg: RunConfig, out_dir: Path, tolerances: str | None) -> int:
    try:
        report = validate.run_all(cfg.physical_params(), tolerances_path=tolerances)
    except validate.ToleranceFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    (out_dir / "validate.json").write_text(
        json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    for rec in report["criteria"]:
        print(f"[{'PASS' if rec['passed'] else 'FAIL'}] {rec['id']:>2}  {rec['description']}")
    print(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mqcsim",
                                 description="demodulated fluorescence spectra of a "
                                             "dipole-coupled atom pair")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--kappa", choices=["1", "2", "1,2"], default=None)
        sp.add_argument("--channel", choices=["par", "perp"], default=None)
        sp.add_argument("--khat", choices=["x", "y"], default=None)
        sp.add_argument("--theta-pi", type=float, default=None, dest="theta_pi")
        sp.add_argument("--tensor", choices=["far", "full"], default=None)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("spectrum", help="demodulated spectrum on a detuning grid")
    common(sp)
    sp = sub.add_parser("peakscan", help="peak amplitudes versus pulse area")
    common(sp)
    sp.add_argument("--theta-min-pi", type=float, default=0.0)
    sp.add_argument("--theta-max-pi", type=float, default=4.0)
    sp.add_argument("--steps", type=int, default=81)
    sp.add_argument("--normalized", action="store_true")
    sp = sub.add_parser("harmonics", help="half-angle series of the normalized peaks")
    common(sp)
    sp.add_argument("--n-max", type=int, default=12)
    sp = sub.add_parser("oracle", help="time-domain cross-check of single scattering")
    common(sp)
    sp = sub.add_parser("validate", help="run the acceptance criteria")
    common(sp)
    sp.add_argument("--tolerances", default=None, help="alternate tolerance table")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {key: getattr(args, key, None)
                 for key in ("kappa", "channel", "khat", "theta_pi", "tensor")}
    if getattr(args, "normalized", False):
        overrides["normalized"] = True
    try:
        cfg = read_config(args.config, overrides)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out_dir, args.jobs)
        if args.command == "peakscan":
            return cmd_peakscan(cfg, out_dir, args.theta_min_pi, args.theta_max_pi,
                                args.steps, args.jobs)
        if args.command == "harmonics":
            return cmd_harmonics(cfg, out_dir, args.n_max, args.jobs)
        if args.command == "oracle":
            return cmd_oracle(cfg, out_dir)
        if args.command == "validate":
            return cmd_validate(cfg, out_dir, args.tolerances)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (averaging.QuadratureError, SingularResolventError) as exc:
        print(f"numerical-convergence error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""``mr-qmem`` command line: simulate, sweep, compare, peaks.

Configuration is a flat ``key = value`` file (``#`` starts a comment); any key
can be overridden with ``--key value``.  Outputs are CSV files whose first line
is ``# mr-qmem config-hash=<hex>`` followed by a header row.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, dynamics, full_model, reduced_ode
from .core import AmplitudeVector, ParameterError, SystemParams, normalize, rect_comb_init

log = logging.getLogger("mr_qmem")

MODELS = ("analytic", "reduced", "full")
OUTPUTS = ("amplitudes", "efficiency", "e12", "spectra", "collective")

DEFAULTS = {
    "model": "reduced",
    "n_resonators": "7",
    "comb_spacing": "1.0",
    "units": "rad/s",
    "coupling": "optimal",
    "light_speed": "1.0",
    "carrier_wavenumber": "10000",
    "band_halfwidth": "120",
    "spacing": "",
    "init": "rect",
    "init_values": "",
    "t_max": "1.0",
    "samples": "2048",
    "modes_per_band": "512",
    "branch_scale": "matched",
    "outputs": "efficiency,e12",
    "e12_pair": "0,1",
    "prominence": str(dynamics.DEFAULT_PROMINENCE),
    "variant": "printed",
    "g_min": "",
    "g_max": "",
    "count": "201",
}


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


class NumericalError(Exception):
    """Non-finite results; maps to exit code 1."""


def parse_config_text(text: str, source: str = "<config>") -> dict[str, tuple[str, str]]:
    """Parse ``key = value`` lines into ``{key: (value, location)}``."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        entries[key] = (value, f"{source}:{lineno}")
    return entries


def parse_overrides(extra: list[str]) -> dict[str, tuple[str, str]]:
    entries = {}
    it = iter(extra)
    for token in it:
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            try:
                value = next(it)
            except StopIteration:
                raise ConfigError(f"--{key}: missing value") from None
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"--{key}: unknown key")
        entries[key] = (value.strip(), f"--{key}")
    return entries


@dataclass
class RunConfig:
    model: str
    params: SystemParams
    init: AmplitudeVector
    t_max: float
    samples: int
    modes_per_band: int
    branch_scale: float
    outputs: tuple[str, ...]
    e12_pair: tuple[int, int]
    prominence: float
    variant: str
    g_min: float
    g_max: float
    count: int
    raw: dict[str, str] = field(default_factory=dict)
    pair_error: str | None = None

    def config_hash(self) -> str:
        canonical = "".join(f"{k}={self.raw[k]}\n" for k in sorted(self.raw))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max * self.params.echo_time, self.samples)


def _number(entries, key, kind=float):
    value, where = entries[key]
    try:
        out = kind(value)
    except ValueError:
        raise ConfigError(f"{where}: {key}: cannot parse {value!r} as {kind.__name__}") from None
    if kind is float and not np.isfinite(out):
        raise ConfigError(f"{where}: {key}: must be finite")
    return out


def _complex_list(text: str, where: str) -> list[complex]:
    values = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{where}: init_values: expected 're,im' pairs, got {item!r}")
        try:
            values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"{where}: init_values: bad number in {item!r}") from None
    return values


def build_config(entries: dict[str, tuple[str, str]]) -> RunConfig:
    merged = {k: (v, "default") for k, v in DEFAULTS.items()}
    merged.update(entries)
    raw = {k: v for k, (v, _) in merged.items()}

    model, where = merged["model"]
    if model not in MODELS:
        raise ConfigError(f"{where}: model: expected one of {MODELS}, got {model!r}")

    units, where = merged["units"]
    units = units.lower()
    if units not in ("rad/s", "hz"):
        raise ConfigError(f"{where}: units: expected 'rad/s' or 'hz', got {units!r}")
    delta = _number(merged, "comb_spacing")
    if units == "hz":
        delta *= 2 * np.pi

    n_res = _number(merged, "n_resonators", int)
    light = _number(merged, "light_speed")
    coupling_text, where = merged["coupling"]
    spacing = _number(merged, "spacing") if merged["spacing"][0] else None
    try:
        if coupling_text == "optimal":
            g = np.sqrt(light * delta) / np.pi if light > 0 and delta > 0 else 0.0
        else:
            g = _number(merged, "coupling")
        params = SystemParams(n_res, delta, g, light,
                              _number(merged, "carrier_wavenumber"),
                              _number(merged, "band_halfwidth"), spacing)
    except ParameterError as exc:
        raise ConfigError(f"parameters: {exc}") from None

    init_kind, where = merged["init"]
    if init_kind == "rect":
        init = rect_comb_init(params)
    elif init_kind == "custom":
        values = _complex_list(*merged["init_values"])
        if len(values) != params.n_resonators:
            raise ConfigError(
                f"{merged['init_values'][1]}: init_values: expected {params.n_resonators} "
                f"amplitudes, got {len(values)}")
        try:
            init = normalize(values)
        except ValueError as exc:
            raise ConfigError(f"{merged['init_values'][1]}: init_values: {exc}") from None
        norm_sq = sum(abs(v) ** 2 for v in values)
        if abs(norm_sq - 1.0) > 1e-12:
            log.info("custom init rescaled from norm^2 %.6g to 1", norm_sq)
    else:
        raise ConfigError(f"{where}: init: expected 'rect' or 'custom', got {init_kind!r}")

    outputs = tuple(o.strip() for o in merged["outputs"][0].split(",") if o.strip())
    for o in outputs:
        if o not in OUTPUTS:
            raise ConfigError(f"{merged['outputs'][1]}: outputs: unknown output {o!r}")
    if "spectra" in outputs and model != "full":
        raise ConfigError(f"{merged['outputs'][1]}: outputs: 'spectra' requires model = full")

    pair_text, where = merged["e12_pair"]
    try:
        n1, n2 = (int(p) for p in pair_text.split(","))
    except ValueError as exc:
        raise ConfigError(f"{where}: e12_pair: {exc}") from None
    pair_error = None
    try:
        params.position(n1)
        params.position(n2)
    except IndexError as exc:
        pair_error = f"{where}: e12_pair: {exc}"
    if n1 == n2:
        pair_error = f"{where}: e12_pair: indices must differ"
    # a bad pair is reported only by commands that compute e12, so
    # single-resonator runs can keep the default pair
    if pair_error and "e12_pair" in entries:
        raise ConfigError(pair_error)

    scale_text, where = merged["branch_scale"]
    if scale_text == "matched":
        branch_scale = full_model.MATCHED_BRANCH_SCALE
    elif scale_text == "literal":
        branch_scale = full_model.LITERAL_BRANCH_SCALE
    else:
        branch_scale = _number(merged, "branch_scale")
        if branch_scale <= 0:
            raise ConfigError(f"{where}: branch_scale: must be > 0")

    t_max = _number(merged, "t_max")
    samples = _number(merged, "samples", int)
    modes = _number(merged, "modes_per_band", int)
    if t_max <= 0:
        raise ConfigError(f"{merged['t_max'][1]}: t_max: must be > 0")
    if samples < 2:
        raise ConfigError(f"{merged['samples'][1]}: samples: need at least 2")
    if modes < full_model.MIN_MODES_PER_BAND:
        raise ConfigError(
            f"{merged['modes_per_band'][1]}: modes_per_band: need at least "
            f"{full_model.MIN_MODES_PER_BAND}")

    variant, where = merged["variant"]
    if variant not in ("printed", "pi_squared"):
        raise ConfigError(f"{where}: variant: expected 'printed' or 'pi_squared'")

    g_star = analytic.optimal_coupling(params)
    g_min = _number(merged, "g_min") if merged["g_min"][0] else g_star / 10
    g_max = _number(merged, "g_max") if merged["g_max"][0] else g_star * 10
    count = _number(merged, "count", int)

    return RunConfig(model, params, init, t_max, samples, modes, branch_scale, outputs,
                     (n1, n2), _number(merged, "prominence"), variant, g_min, g_max,
                     count, raw, pair_error)


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    entries = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        entries.update(parse_config_text(text, path))
    entries.update(parse_overrides(overrides))
    return build_config(entries)


def fmt(x) -> str:
    """Shortest round-trip decimal."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, config: RunConfig, header: list[str], rows,
              comments: tuple[str, ...] = ()) -> Path:
    lines = [f"# mr-qmem config-hash={config.config_hash()}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _check_finite(name: str, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"{name}: non-finite values in result")


def model_trajectory(config: RunConfig, model: str | None = None):
    """Trajectory of the configured model; full runs also return the propagator."""
    model = model or config.model
    times = config.times()
    params = config.params
    if model == "analytic":
        return analytic.analytic_trajectory(times, config.init, params, config.variant), None
    if model == "reduced":
        return reduced_ode.propagate(config.init, times, params), None
    grid = full_model.discretize_waveguide(params, config.modes_per_band)
    prop = full_model.FullPropagator(grid, params, config.branch_scale)
    start = full_model.initial_state(config.init, grid, params)
    full = prop.trajectory(start, times)
    return full.resonators, (prop, start, full)


def run_simulate(config: RunConfig, out: Path) -> list[Path]:
    if config.pair_error and "e12" in config.outputs:
        raise ConfigError(config.pair_error)
    traj, extra = model_trajectory(config)
    _check_finite("trajectory", traj.states)
    times = traj.times
    echo = times / config.params.echo_time
    written = []
    for output in config.outputs:
        if output == "amplitudes":
            header = ["time", "time_echo"]
            for n in config.params.indices:
                header += [f"re_{n}", f"im_{n}"]
            cols = [times, echo]
            for j in range(config.params.n_resonators):
                cols += [traj.states[:, j].real, traj.states[:, j].imag]
            written.append(write_csv(out / "amplitudes.csv", config, header, zip(*cols)))
        elif output == "efficiency":
            eff = dynamics.efficiency_curve(traj)
            written.append(write_csv(out / "efficiency.csv", config,
                                     ["time", "time_echo", "efficiency"],
                                     zip(times, echo, eff.values)))
        elif output == "e12":
            e = dynamics.energy_difference(traj, *config.e12_pair)
            written.append(write_csv(out / "e12.csv", config, ["time", "e12", "valid"],
                                     zip(times, e.values, e.valid)))
        elif output == "collective":
            col = dynamics.collective_amplitude(traj)
            written.append(write_csv(out / "collective.csv", config,
                                     ["time", "time_echo", "collective"],
                                     zip(times, echo, col.values)))
        elif output == "spectra":
            prop, start, full = extra
            state = prop.evolve(start, float(times[-1]))
            emission = full_model.emission_spectra(state, prop.grid)
            _check_finite("spectra", emission.forward, emission.backward)
            rows = [("forward", k, d) for k, d in zip(emission.forward_k, emission.forward)]
            rows += [("backward", k, d) for k, d in zip(emission.backward_k, emission.backward)]
            written.append(_write_spectra(out / "spectra.csv", config, rows, emission))
    final_eff = 1.0 - float(traj.norms()[-1])
    print(f"model={config.model} N={config.params.n_resonators} "
          f"final efficiency={final_eff:.6f} at t={times[-1]:.6g} "
          f"({echo[-1]:.6g} echo times)")
    if extra is not None:
        print(f"full model: max total-norm error={extra[2].max_norm_error:.3e}")
    return written


def _write_spectra(path, config, rows, emission):
    lines = [f"# mr-qmem config-hash={config.config_hash()}",
             f"# asymmetry={fmt(emission.asymmetry)}",
             "branch,k,density"]
    lines += [f"{b},{fmt(k)},{fmt(d)}" for b, k, d in rows]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def run_sweep(config: RunConfig, out: Path, jobs: int = 1) -> Path:
    if not 0 < config.g_min < config.g_max:
        raise ConfigError(f"sweep: need 0 < g_min < g_max, got {config.g_min}, {config.g_max}")
    if config.count < 3:
        raise ConfigError(f"sweep: count must be >= 3, got {config.count}")
    grid = np.geomspace(config.g_min, config.g_max, config.count)
    result = dynamics.sweep_coupling(config.params, grid, config.init, jobs=jobs)
    _check_finite("sweep", result.eta_echo)
    path = write_csv(out / "sweep.csv", config, ["g", "eta_echo", "eta0_analytic"],
                     zip(result.couplings, result.eta_echo, result.eta0))
    print(f"argmax g={result.best_coupling:.6g} eta={result.eta_echo[result.argmax]:.6f} "
          f"optimum g*={result.optimum:.6g} relative offset={result.relative_offset:+.4%}")
    if result.at_boundary:
        log.warning("sweep maximum at grid boundary (g=%.6g); optimum may lie outside "
                    "[%.6g, %.6g]", result.best_coupling, config.g_min, config.g_max)
    return path


def run_compare(config: RunConfig, out: Path) -> Path:
    ana, _ = model_trajectory(config, "analytic")
    red, _ = model_trajectory(config, "reduced")
    full, extra = model_trajectory(config, "full")
    _check_finite("compare", ana.states, red.states, full.states)
    d_ar = dynamics.relative_deviation(ana.states, red.states)
    d_rf = dynamics.relative_deviation(full.states, red.states)
    times = red.times
    path = write_csv(out / "compare.csv", config,
                     ["time", "time_echo", "analytic_vs_reduced", "reduced_vs_full"],
                     zip(times, times / config.params.echo_time, d_ar, d_rf))
    n = config.params.n_resonators
    print(f"N={n}: max analytic-vs-reduced deviation={d_ar.max():.3e}; "
          f"max reduced-vs-full deviation={d_rf.max():.3e}; "
          f"full-model norm error={extra[2].max_norm_error:.2e}")
    return path


def run_peaks(config: RunConfig, out: Path) -> Path:
    if config.pair_error:
        raise ConfigError(config.pair_error)
    traj, _ = model_trajectory(config)
    _check_finite("trajectory", traj.states)
    e = dynamics.energy_difference(traj, *config.e12_pair)
    peaks = dynamics.detect_peaks(e, config.prominence)
    path = write_csv(out / "peaks.csv", config, ["time", "height", "width"],
                     [(p.time, p.height, p.width) for p in peaks])
    pulse = config.params.pulse_duration
    widest = max((p.width for p in peaks), default=0.0)
    print(f"{len(peaks)} peaks with prominence >= {config.prominence}; "
          f"max width={widest:.4g} vs pulse duration 2pi/(N Delta)={pulse:.4g} "
          f"({'narrower' if widest < pulse else 'NOT narrower'})")
    return path


def _default_out() -> str:
    return os.environ.get("MR_QMEM_OUT", "mr-qmem-out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mr-qmem",
        description="Multiresonator quantum-memory simulations (CSV output).",
        epilog="Any config key may be overridden with --key value.")
    parser.add_argument("command", choices=("simulate", "sweep", "compare", "peaks"))
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", default=None, help="output directory (default $MR_QMEM_OUT)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    out = Path(args.out or _default_out())
    try:
        config = load_config(args.config, extra)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.command == "simulate":
            run_simulate(config, out)
        elif args.command == "sweep":
            run_sweep(config, out, args.jobs)
        elif args.command == "compare":
            run_compare(config, out)
        else:
            run_peaks(config, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

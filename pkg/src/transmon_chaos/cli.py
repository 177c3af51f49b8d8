"""Batch front-end: ``transmon-chaos <command> --config run.json --out dir``.

Commands map one-to-one onto the analyses: ``simulate`` builds and caches
the checkpointed propagator, and ``spectra``, ``curvature``,
``populations``, ``otoc``, ``sweep`` consume the cache (building it on
demand) and emit figure-ready CSV tables plus a cumulative ``report.json``.

The run config is a JSON object; every key can be overridden by an
environment variable ``TRANSMON_CHAOS_<KEY>`` (nested keys join with
``__``, e.g. ``TRANSMON_CHAOS_GRID__DT=0.002``), and the most common knobs
also by flags. Exit codes: 0 ok, 2 config error, 3 numerical failure,
4 I/O error.
"""

import argparse
import json
import os
import sys

import numpy as np

from .curvature import segment_analysis
from .diagnostics import (builtin_otoc_operators, fock_conditional,
                          level_count_fraction, occupation_spectrum, otoc,
                          reduced_occupations, subspace_weight)
from .errors import ConfigError, NumericalError, TransmonChaosError
from .gates import DeviationSpec, make_target, robustness_sweep
from .hilbert import SystemConfig, dressed_basis, drift_hamiltonian
from .propagator import TimeGrid, evolve, load_series, save_series, series_key
from .pulse import load_pulse, synth_test_pulse
from .spectral import (BinnedDistribution, compute_frames, default_bin_edges,
                       normalized_kl_pair, ratio_samples, windowed_kl)

ENV_PREFIX = "TRANSMON_CHAOS_"
ANALYSES = ("spectra", "curvature", "populations", "otoc", "sweep")

DEFAULT_CONFIG = {
    "system": {},
    "pulse": {"synth": {"kind": "gaussian_flattop", "duration": 50.0,
                        "amplitude": 0.3, "rise": 5.0}},
    "grid": {"t0": 0.0, "t1": 50.0, "dt": 0.001, "checkpoint_every": 25},
    "analyses": list(ANALYSES),
    "output_dir": "out",
    "kl_windows": 250,
    "curvature_segment_ns": 0.5,
    "p_threshold": 0.01,
    "initial_state": "00",
    "otoc_choices": ["quadrature", "number"],
    "sweep": {"parameter": "g", "factors": [-0.02, -0.01, 0.0, 0.01, 0.02],
              "target": "bgate"},
    "threads": 1,
    "seed": 0,
}


class RunConfig:
    """Validated run configuration assembled from defaults, a JSON file,
    environment overrides, and CLI flags."""

    def __init__(self, raw):
        self.raw = raw
        system = raw.get("system", {})
        if isinstance(system, str):
            self.system = SystemConfig.from_file(system)
        else:
            self.system = SystemConfig.from_dict(system)
        self.pulse = self._build_pulse(raw.get("pulse", {}))
        self.grid = TimeGrid.from_dict(raw.get("grid", {}))
        analyses = raw.get("analyses", list(ANALYSES))
        bad = set(analyses) - set(ANALYSES)
        if bad or not analyses:
            raise ConfigError(f"analyses must be a non-empty subset of {ANALYSES}")
        self.analyses = list(analyses)
        self.output_dir = str(raw.get("output_dir", "out"))
        self.kl_windows = int(raw.get("kl_windows", 250))
        self.segment_ns = float(raw.get("curvature_segment_ns", 0.5))
        self.p_threshold = float(raw.get("p_threshold", 0.01))
        self.initial_state = str(raw.get("initial_state", "00"))
        self.otoc_choices = list(raw.get("otoc_choices", ["quadrature", "number"]))
        self.sweep = dict(raw.get("sweep", DEFAULT_CONFIG["sweep"]))
        self.threads = int(raw.get("threads", 1))
        self.seed = int(raw.get("seed", 0))

    @staticmethod
    def _build_pulse(spec):
        if "path" in spec:
            path = spec["path"]
            if not os.path.exists(path):
                raise ConfigError(f"pulse file not found: {path}")
            return load_pulse(path)
        synth = dict(spec.get("synth", DEFAULT_CONFIG["pulse"]["synth"]))
        kind = synth.pop("kind", "zero")
        duration = float(synth.pop("duration", 50.0))
        amplitude = synth.pop("amplitude", 0.0)
        if isinstance(amplitude, (list, tuple)):
            amplitude = complex(amplitude[0], amplitude[1])
        return synth_test_pulse(kind, duration, amplitude, **synth)

    @property
    def key(self):
        return series_key(self.system, self.pulse, self.grid)

    def logical_label(self):
        s = self.initial_state
        if len(s) != 2 or any(c not in "01" for c in s):
            raise ConfigError(f"initial_state must be two bits, got {s!r}")
        return int(s[0]), int(s[1])


def _deep_set(d, keys, value):
    for k in keys[:-1]:
        d = d.setdefault(k, {})
    d[keys[-1]] = value


def apply_env_overrides(raw, environ=None):
    env = os.environ if environ is None else environ
    for name, value in sorted(env.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        _deep_set(raw, path, parsed)
    return raw


def load_run_config(args, environ=None):
    raw = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(raw.get(key), dict):
                raw[key].update(value)
            else:
                raw[key] = value
    apply_env_overrides(raw, environ)
    if args.out:
        raw["output_dir"] = args.out
    if args.dt is not None:
        raw.setdefault("grid", {})["dt"] = args.dt
    if args.windows is not None:
        raw["kl_windows"] = args.windows
    if args.threads is not None:
        raw["threads"] = args.threads
    if args.seed is not None:
        raw["seed"] = args.seed
    if getattr(args, "target", None):
        raw.setdefault("sweep", {})["target"] = args.target
    if getattr(args, "target_file", None):
        raw.setdefault("sweep", {})["target"] = {"file": args.target_file}
    return RunConfig(raw)


# --- output helpers ----------------------------------------------------------

def _write_csv(path, header, rows, config_hash):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# config_hash: {config_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _update_report(out_dir, section, payload):
    path = os.path.join(out_dir, "report.json")
    report = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    report[section] = payload
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)


def _require_enabled(cfg, analysis):
    if analysis not in cfg.analyses:
        raise ConfigError(f"analysis {analysis!r} is disabled in this config "
                          f"(enabled: {cfg.analyses})")


# --- commands ----------------------------------------------------------------

def _cache_dir(cfg):
    return os.path.join(cfg.output_dir, "cache")


def get_series(cfg, build=True):
    series = load_series(_cache_dir(cfg), cfg.key)
    if series is None and build:
        series = evolve(cfg.system, cfg.pulse, cfg.grid)
        _store(cfg, series)
    return series


def _store(cfg, series):
    dims = cfg.system.dims
    save_series(series, _cache_dir(cfg), cfg.key,
                extra={"dims": [dims.n1, dims.n2, dims.nc],
                       "system": cfg.system.to_dict(),
                       "pulse": cfg.pulse.describe()})


def cmd_simulate(cfg):
    series = get_series(cfg)
    manifest = {
        "config_hash": cfg.key,
        "checkpoint_count": len(series),
        "max_unitarity_defect": float(series.defects.max()),
    }
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    print(f"simulate: {len(series)} checkpoints, "
          f"max defect {manifest['max_unitarity_defect']:.3e}, cache {cfg.key[:12]}")
    return manifest


def cmd_spectra(cfg):
    _require_enabled(cfg, "spectra")
    series = get_series(cfg)
    frames = compute_frames(series, threads=cfg.threads)
    kl = windowed_kl(series, n_windows=cfg.kl_windows, frames=frames)
    rows = zip(kl.midpoints, kl.d_poi, kl.d_gue, kl.n_samples)
    _write_csv(os.path.join(cfg.output_dir, "kl.csv"),
               ["t_mid_ns", "d_poi", "d_gue", "n_samples"], rows, cfg.key)
    pooled = np.concatenate([ratio_samples(f.phases).values for f in frames])
    dist = BinnedDistribution.from_samples(pooled, default_bin_edges())
    _write_csv(os.path.join(cfg.output_dir, "ratio_histogram.csv"),
               ["bin_lo", "bin_hi", "mass"],
               zip(dist.edges[:-1], dist.edges[1:], dist.masses), cfg.key)
    d_poi_all, d_gue_all = normalized_kl_pair(dist)
    summary = {
        "min_d_poi": float(kl.d_poi.min()),
        "max_d_poi": float(kl.d_poi.max()),
        "min_d_gue": float(kl.d_gue.min()),
        "max_d_gue": float(kl.d_gue.max()),
        "t_of_min_d_gue": float(kl.midpoints[int(np.argmin(kl.d_gue))]),
        "n_windows_gue_below_poi": int(np.sum(kl.d_gue < kl.d_poi)),
        "whole_run_d_poi": float(d_poi_all),
        "whole_run_d_gue": float(d_gue_all),
        "n_clamped": kl.n_clamped,
    }
    _update_report(cfg.output_dir, "spectra", summary)
    print(f"spectra: {cfg.kl_windows} windows, min d_poi {summary['min_d_poi']:.3f}, "
          f"min d_gue {summary['min_d_gue']:.3f}")
    return summary


def cmd_curvature(cfg):
    _require_enabled(cfg, "curvature")
    series = get_series(cfg)
    frames = compute_frames(series, threads=cfg.threads)
    segments = segment_analysis(frames, segment_len=cfg.segment_ns)
    rows = []
    fits = {}
    for seg in segments:
        mass = seg.hist_counts / max(seg.hist_counts.sum(), 1)
        for lo, hi, m in zip(seg.hist_edges[:-1], seg.hist_edges[1:], mass):
            rows.append((seg.index, seg.t_lo, seg.t_hi, lo, hi, m, seg.d_poi))
        fits[str(seg.index)] = None if seg.tail is None else {
            "beta_tilde": seg.tail.beta_tilde,
            "stderr": seg.tail.stderr,
            "k_min": seg.tail.k_min,
            "n_bins": seg.tail.n_bins,
            "d_poi": seg.d_poi,
            "d_gue": seg.d_gue,
        }
    _write_csv(os.path.join(cfg.output_dir, "curvature.csv"),
               ["segment_idx", "t_lo", "t_hi", "bin_lo_k", "bin_hi_k", "mass",
                "d_poi"], rows, cfg.key)
    with open(os.path.join(cfg.output_dir, "tail_fits.json"), "w",
              encoding="utf-8") as fh:
        json.dump(fits, fh, indent=1, sort_keys=True)
    fitted = {k: v["beta_tilde"] for k, v in fits.items() if v}
    _update_report(cfg.output_dir, "curvature", {
        "n_segments": len(segments),
        "beta_tilde_by_segment": fitted,
    })
    print(f"curvature: {len(segments)} segments, {len(fitted)} tail fits")
    return segments


def cmd_populations(cfg):
    _require_enabled(cfg, "populations")
    series = get_series(cfg)
    dims = cfg.system.dims
    dressed = dressed_basis(drift_hamiltonian(cfg.system), dims)
    i1, i2 = cfg.logical_label()
    psi0 = dressed.state(i1, i2, 0)
    state_tag = cfg.initial_state

    p_sub = subspace_weight(series, dressed)
    _write_csv(os.path.join(cfg.output_dir, "p_sub.csv"), ["t", "p_sub"],
               zip(series.times, p_sub), cfg.key)

    frames = compute_frames(series, threads=cfg.threads)
    occ_rows, spec_rows, frac_rows = [], [], []
    cond = {"q1": [], "q2": [], "cavity": []}
    for frame, u in zip(frames, series.unitaries):
        evolved = u @ psi0
        occ = reduced_occupations(evolved, dims, t=frame.t)
        for mode, values in (("q1", occ.q1), ("q2", occ.q2), ("cavity", occ.cavity)):
            occ_rows.extend((frame.t, mode, lvl, val)
                            for lvl, val in enumerate(values))
        spectrum = occupation_spectrum(frame, evolved)
        spec_rows.extend((frame.t, n, frame.phases[n], spectrum.p[n])
                         for n in range(dims.total))
        frac_rows.append((frame.t, level_count_fraction(spectrum, cfg.p_threshold)))
        _, m1, m2, mc = fock_conditional(frame, spectrum, dims)
        for mode, marg in (("q1", m1), ("q2", m2), ("cavity", mc)):
            cond[mode].extend((frame.t, lvl, val) for lvl, val in enumerate(marg))

    _write_csv(os.path.join(cfg.output_dir, "occupations.csv"),
               ["t", "mode", "level", "population"], occ_rows, cfg.key)
    _write_csv(os.path.join(cfg.output_dir, "spectrum.csv"),
               ["t", "n", "phase", "p_n"], spec_rows, cfg.key)
    _write_csv(os.path.join(cfg.output_dir, "level_fraction.csv"),
               ["t", "fraction"], frac_rows, cfg.key)
    for mode, rows in cond.items():
        _write_csv(os.path.join(cfg.output_dir, f"conditional_{mode}.csv"),
                   ["t", "level", "P"], rows, cfg.key)
    _update_report(cfg.output_dir, "populations", {
        "initial_state": state_tag,
        "min_p_sub": float(p_sub.min()),
        "max_level_fraction": float(max(f for _, f in frac_rows)),
        "p_threshold": cfg.p_threshold,
    })
    print(f"populations: initial |{state_tag}>, min p_sub {p_sub.min():.4f}")
    return p_sub


def cmd_otoc(cfg):
    _require_enabled(cfg, "otoc")
    series = get_series(cfg)
    dims = cfg.system.dims
    dressed = dressed_basis(drift_hamiltonian(cfg.system), dims)
    labels = ["00", "01", "10", "11"]
    results = {}
    for choice in cfg.otoc_choices:
        v, w = builtin_otoc_operators(dims, choice)
        rows = []
        for label in labels:
            psi = dressed.state(int(label[0]), int(label[1]), 0)
            res = otoc(series, v, w, psi, choice=choice, initial_state=label)
            rows.extend((t, f, choice, label)
                        for t, f in zip(res.times, res.values))
            results[f"{choice}/{label}"] = float(res.values.min())
        _write_csv(os.path.join(cfg.output_dir, f"otoc_{choice}.csv"),
                   ["t", "F", "choice", "initial_state"], rows, cfg.key)
    _update_report(cfg.output_dir, "otoc", {"min_F": results})
    print(f"otoc: choices {cfg.otoc_choices} for states {labels}")
    return results


def _sweep_target(cfg):
    target = cfg.sweep.get("target", "bgate")
    if isinstance(target, dict) and "file" in target:
        path = target["file"]
        if not os.path.exists(path):
            raise ConfigError(f"target gate file not found: {path}")
        text = open(path, "r", encoding="utf-8").read()
        numbers = [float(tok) for tok in text.replace(",", " ").split()
                   if tok.strip()]
        if len(numbers) != 32:
            raise ConfigError(
                f"target file must hold 16 complex entries as re,im pairs "
                f"(32 numbers), found {len(numbers)}")
        flat = np.array(numbers[0::2]) + 1j * np.array(numbers[1::2])
        matrix = flat.reshape(4, 4)
        from .gates import LogicalGate
        return LogicalGate(matrix=matrix)
    return make_target(target)


def cmd_sweep(cfg):
    _require_enabled(cfg, "sweep")
    target = _sweep_target(cfg)
    spec = DeviationSpec(parameter=cfg.sweep.get("parameter", "g"),
                         factors=tuple(cfg.sweep.get("factors", (0.0,))))
    rows = robustness_sweep(cfg.system, cfg.pulse, cfg.grid, target, spec,
                            workers=cfg.threads)
    _write_csv(os.path.join(cfg.output_dir, "sweep.csv"),
               ["parameter", "deviation", "li_error", "leakage", "avg_fidelity",
                "status"],
               ((r.parameter, r.deviation, r.li_error, r.leakage,
                 r.avg_fidelity, r.status) for r in rows), cfg.key)
    baseline = next((r for r in rows if r.deviation == 0.0), None)
    ratios = {}
    if baseline and baseline.status == "ok" and baseline.li_error > 0:
        for r in rows:
            if r.status == "ok" and r.deviation != 0.0:
                ratios[repr(r.deviation)] = r.li_error / baseline.li_error
    _update_report(cfg.output_dir, "sweep", {
        "parameter": spec.parameter,
        "baseline_error": None if baseline is None else baseline.li_error,
        "error_ratio_vs_baseline": ratios,
        "n_failed": sum(r.status != "ok" for r in rows),
    })
    print(f"sweep: {spec.parameter}, {len(rows)} rows, "
          f"{sum(r.status != 'ok' for r in rows)} failed")
    return rows


COMMANDS = {
    "simulate": cmd_simulate,
    "spectra": cmd_spectra,
    "curvature": cmd_curvature,
    "populations": cmd_populations,
    "otoc": cmd_otoc,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="transmon-chaos",
        description="Propagate driven transmon-cavity dynamics and run "
                    "chaos diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker pool size")
        p.add_argument("--dt", type=float, help="integration step (ns)")
        p.add_argument("--windows", type=int, help="number of KL windows")
        p.add_argument("--seed", type=int, help="seed recorded in the config")
        if name == "sweep":
            p.add_argument("--target", help="named target gate (e.g. bgate)")
            p.add_argument("--target-file",
                           help="CSV of 16 complex entries, row-major re,im pairs")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args)
        os.makedirs(cfg.output_dir, exist_ok=True)
        COMMANDS[args.command](cfg)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except TransmonChaosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Settings come from three layers, later ones winning: built-in defaults, an
optional JSON config file (``--config``), then explicit command-line flags.

Exit codes: 0 success, 2 invalid arguments or config, 3 infeasible physics
(geometry, fabrication limit), 4 numerical failure or regression mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from .correlation import (
    InputState,
    StateKind,
    correlation_for,
    peak_normalize,
    single_particle_distribution,
)
from .errors import GlauberFockError, InfeasibleGeometryError, InvalidArgumentError, InvalidPlanError, NumericalError
from .estimator import PhasePlan, classical_estimate_noon, classical_estimate_separable
from .lattice import (
    CALIBRATIONS,
    DEFAULT_MAX_COUPLING,
    Calibration,
    build_glauber_fock_profile,
    coupling_matrix,
    couplings_from_geometry,
    design_geometry,
    lattice_to_dict,
    load_lattice,
    validate_fabrication,
)
from .propagation import (
    TAIL_LEAKAGE_WARNING,
    FieldState,
    count_maxima,
    evolution_operator,
    intensity_map,
    tail_leakage,
)

log = logging.getLogger("glauberfock")

DEFAULTS = {
    "sites": 59,
    "coupling": None,
    "geometry": None,
    "calibration": "633",
    "d1": None,
    "kappa": None,
    "wavelength": None,
    "max_coupling": DEFAULT_MAX_COUPLING,
    "length_cm": 10.0,
    "z_samples": 201,
    "input": "0",
    "state": None,
    "out_dir": ".",
    "format": "csv,json,pgm",
    "normalize": "raw",
    "seed": 0,
    "phases": "60",
    "amplitude_jitter": 0.0,
    "phase_jitter": 0.0,
    "gamma": 1.0,
    "pgm_bits": 8,
    "pgm_scale": "global",
    "tail_width": 5,
}

FORMATS = {"csv", "json", "pgm", "png"}
DEFAULT_COUPLING = 0.37
DEFAULT_STATE = {"propagate": "single", "correlate": "boson", "estimate": "boson"}


# -- configuration --------------------------------------------------------------


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidArgumentError(f"config {path} must be a JSON object")
    doc = {key.replace("-", "_"): value for key, value in doc.items()}
    unknown = set(doc) - set(DEFAULTS)
    if unknown:
        raise InvalidArgumentError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


def resolve_config(command: str, cli: dict, file_doc: dict | None = None) -> dict:
    """Merge defaults < config file < explicit flags into one settings dict."""
    file_doc = file_doc or {}
    explicit = {key: value for key, value in cli.items() if value is not None and key in DEFAULTS}
    cfg = dict(DEFAULTS)
    cfg.update(file_doc)
    cfg.update(explicit)
    given = {**file_doc, **explicit}
    if given.get("coupling") is not None and given.get("geometry") is not None:
        raise InvalidArgumentError("give either a base coupling or a geometry file, not both")
    if cfg["state"] is None:
        cfg["state"] = DEFAULT_STATE.get(command, "single")
    cfg["formats"] = parse_formats(cfg["format"])
    if int(cfg["z_samples"]) < 1:
        raise InvalidArgumentError("z_samples must be >= 1")
    return cfg


def parse_formats(text) -> set:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    formats = {item.strip().lower() for item in items if item.strip()}
    bad = formats - FORMATS
    if bad:
        raise InvalidArgumentError(f"unknown output format(s): {', '.join(sorted(bad))}")
    return formats


def parse_input(text, state: str) -> InputState:
    if isinstance(text, (list, tuple)):
        parts = [int(p) for p in text]
    else:
        try:
            parts = [int(p) for p in str(text).split(",") if p.strip()]
        except ValueError:
            raise InvalidArgumentError(f"cannot parse --input {text!r}; expected k or k,l") from None
    kind = StateKind(state) if state in {s.value for s in StateKind} else None
    if kind is None:
        raise InvalidArgumentError(f"unknown state {state!r}")
    if kind is StateKind.SINGLE:
        if len(parts) != 1:
            raise InvalidArgumentError("a single-site input takes exactly one index")
        return InputState.single(parts[0])
    if len(parts) != 2:
        raise InvalidArgumentError(f"a {state} input takes two indices k,l")
    return InputState(kind, parts[0], parts[1])


def calibration_from_config(cfg) -> Calibration:
    preset = cfg["calibration"]
    if isinstance(preset, dict):
        base = Calibration(
            d1=float(preset["d1"]),
            kappa=float(preset["kappa"]),
            base_coupling=float(preset["base_coupling"]),
            wavelength=preset.get("wavelength"),
        )
    else:
        key = str(preset).removesuffix("nm")
        if key not in CALIBRATIONS:
            raise InvalidArgumentError(f"unknown calibration {preset!r}; choose from {', '.join(CALIBRATIONS)}")
        base = CALIBRATIONS[key]
    return Calibration(
        d1=float(cfg["d1"]) if cfg["d1"] is not None else base.d1,
        kappa=float(cfg["kappa"]) if cfg["kappa"] is not None else base.kappa,
        base_coupling=base.base_coupling,
        wavelength=cfg["wavelength"] if cfg["wavelength"] is not None else base.wavelength,
    )


def profile_from_config(cfg):
    if cfg.get("geometry"):
        profile, cal, geom = load_lattice(cfg["geometry"])
        if geom is None or cal is None:
            raise InvalidArgumentError(f"{cfg['geometry']} needs separations and a calibration (d1, kappa)")
        return couplings_from_geometry(geom, cal)
    coupling = cfg["coupling"] if cfg["coupling"] is not None else DEFAULT_COUPLING
    return build_glauber_fock_profile(int(cfg["sites"]), float(coupling))


def _out(cfg, name) -> Path:
    return Path(cfg["out_dir"]) / name


def _write_image(cfg, stem, values, scale=None, written=None):
    scale = scale or cfg["pgm_scale"]
    paths = []
    if "pgm" in cfg["formats"]:
        paths.append(gio.write_pgm(_out(cfg, stem + ".pgm"), values, scale, int(cfg["pgm_bits"]), float(cfg["gamma"])))
    if "png" in cfg["formats"]:
        from .figures import write_png

        paths.append(write_png(_out(cfg, stem + ".png"), values, scale=scale, gamma=float(cfg["gamma"])))
    if written is not None:
        written.extend(paths)
    return paths


# -- commands -------------------------------------------------------------------


def run_design(cfg) -> dict:
    cal = calibration_from_config(cfg)
    coupling = cfg["coupling"] if cfg["coupling"] is not None else cal.base_coupling
    profile = build_glauber_fock_profile(int(cfg["sites"]), float(coupling))
    geom = design_geometry(profile, cal)
    report = validate_fabrication(profile, float(cfg["max_coupling"]))
    written = []
    doc = lattice_to_dict(profile, cal, geom)
    doc["feasible"] = report.feasible
    doc["max_site"] = report.max_site
    doc["max_coupling_limit"] = report.limit
    if "json" in cfg["formats"]:
        written.append(gio.write_json(_out(cfg, "geometry.json"), doc))
    if "csv" in cfg["formats"]:
        lines = ["n,d_n,position,C_n", f"0,,{gio._fmt(0.0)},"]
        for n in range(1, profile.n_sites):
            lines.append(
                f"{n},{gio._fmt(geom.separations[n - 1])},{gio._fmt(geom.positions[n])},"
                f"{gio._fmt(profile.couplings[n - 1])}"
            )
        written.append(gio.atomic_write(_out(cfg, "geometry.csv"), ("\n".join(lines) + "\n").encode("ascii")))
    return {"profile": profile, "geometry": geom, "report": report, "written": written}


def run_propagate(cfg) -> dict:
    state = parse_input(cfg["input"], cfg["state"])
    if state.kind is not StateKind.SINGLE:
        raise InvalidArgumentError("propagate takes a single-site input (--state single)")
    profile = profile_from_config(cfg)
    matrix = coupling_matrix(profile)
    start = FieldState.single_site(profile.n_sites, state.k)
    length = float(cfg["length_cm"])
    samples = 1 if length == 0 else int(cfg["z_samples"])
    z = np.linspace(0.0, length, samples) if samples > 1 else np.array([length])
    imap = intensity_map(matrix, start, z)
    final = FieldState(evolution_operator(matrix, length).entries @ start.amplitudes, length)
    width = min(int(cfg["tail_width"]), profile.n_sites - 1)
    leakage = tail_leakage(final, width) if width >= 1 else 0.0
    maxima = count_maxima(final.intensities)
    written = []
    data = imap.intensities
    if cfg["normalize"] == "peak":
        data = data / data.max()
    if "csv" in cfg["formats"]:
        out = type(imap)(imap.z_samples, data)
        written.append(gio.write_intensity_csv(_out(cfg, "intensity_map.csv"), out))
        rows = np.column_stack([np.arange(profile.n_sites), final.intensities])
        written.append(gio.atomic_write(
            _out(cfg, "output_profile.csv"),
            ("site,intensity\n" + "".join(f"{int(n)},{gio._fmt(v)}\n" for n, v in rows)).encode("ascii"),
        ))
    _write_image(cfg, "intensity_map", imap.intensities, written=written)
    summary = {
        "command": "propagate",
        "input": {"state": "single", "k": state.k},
        "N": profile.n_sites,
        "C1": profile.base_coupling,
        "length_cm": length,
        "z_samples": samples,
        "maxima": maxima,
        "tail_width": width,
        "tail_leakage": leakage,
        "normalization": cfg["normalize"],
        "truncation_warning": bool(leakage > TAIL_LEAKAGE_WARNING),
    }
    if "json" in cfg["formats"]:
        written.append(gio.write_json(_out(cfg, "intensity_map.json"), summary))
    return {"map": imap, "final": final, "summary": summary, "written": written}


def run_correlate(cfg) -> dict:
    state = parse_input(cfg["input"], cfg["state"])
    if not state.is_pair:
        raise InvalidArgumentError("correlate needs a pair input (--state boson|noon+|noon-|fermion)")
    profile = profile_from_config(cfg)
    U = evolution_operator(coupling_matrix(profile), float(cfg["length_cm"]))
    if max(state.k, state.l) >= U.dim:
        raise InvalidArgumentError(f"input sites {state.k},{state.l} out of range for {U.dim} sites")
    raw = correlation_for(U, state)
    if state.kind is StateKind.FERMION and np.abs(np.diag(raw.entries)).max() >= 1e-20:
        raise NumericalError("fermion correlation has a non-zero diagonal")
    peak = peak_normalize(raw)
    written = []
    if "csv" in cfg["formats"]:
        written.append(gio.write_matrix_csv(_out(cfg, "correlation_raw.csv"), raw.entries))
        written.append(gio.write_matrix_csv(_out(cfg, "correlation_peak.csv"), peak.entries))
        marg = np.column_stack([
            single_particle_distribution(U, state.k),
            single_particle_distribution(U, state.l),
        ])
        written.append(gio.write_csv(_out(cfg, "single_particle.csv"), marg, header=[f"p_{state.k}", f"p_{state.l}"]))
    _write_image(cfg, "correlation", peak.entries, scale="global", written=written)
    sidecar = raw.sidecar(state=state.kind.value, total=raw.total(), argmax=list(raw.argmax()))
    if "json" in cfg["formats"]:
        written.append(gio.write_json(_out(cfg, "correlation.json"), sidecar))
    return {"raw": raw, "peak": peak, "summary": sidecar, "written": written}


def plan_from_config(cfg, state: InputState) -> PhasePlan:
    plan = PhasePlan.parse(cfg["phases"], seed=int(cfg["seed"]))
    noise = {
        "amplitude_jitter_std": float(cfg["amplitude_jitter"]),
        "phase_jitter_std": float(cfg["phase_jitter"]),
    }
    if plan.mode == "grid":
        plan = PhasePlan.uniform_grid(plan.num_points, seed=int(cfg["seed"]), **noise)
    else:
        plan = PhasePlan.random_uniform(plan.num_samples, seed=int(cfg["seed"]), **noise)
    if state.sign is not None and plan.mode != "grid":
        raise InvalidPlanError("N00N estimation needs controlled phases; use --phases grid:P with P >= 5")
    return plan


def run_estimate(cfg) -> dict:
    state = parse_input(cfg["input"], cfg["state"])
    if state.kind not in (StateKind.BOSON, StateKind.NOON_PLUS, StateKind.NOON_MINUS):
        raise InvalidArgumentError("estimate supports --state boson, noon+ or noon-")
    plan = plan_from_config(cfg, state)
    profile = profile_from_config(cfg)
    U = evolution_operator(coupling_matrix(profile), float(cfg["length_cm"]))
    if max(state.k, state.l) >= U.dim:
        raise InvalidArgumentError(f"input sites {state.k},{state.l} out of range for {U.dim} sites")
    if state.sign is None:
        report = classical_estimate_separable(U, state.k, state.l, plan)
    else:
        report = classical_estimate_noon(U, state.k, state.l, state.sign, plan.num_points, plan)
    est, ref = report.estimate, report.reference
    if cfg["normalize"] == "peak":
        est, ref = peak_normalize(est), peak_normalize(ref)
    written = []
    if "csv" in cfg["formats"]:
        written.append(gio.write_matrix_csv(_out(cfg, "estimate.csv"), est.entries))
        written.append(gio.write_matrix_csv(_out(cfg, "exact.csv"), ref.entries))
    _write_image(cfg, "estimate", est.entries, scale="global", written=written)
    _write_image(cfg, "exact", ref.entries, scale="global", written=written)
    summary = report.summary()
    summary["state"] = state.kind.value
    summary["N"] = U.dim
    summary["normalization"] = cfg["normalize"]
    if "json" in cfg["formats"]:
        written.append(gio.write_json(_out(cfg, "estimate_report.json"), summary))
    return {"report": report, "summary": summary, "written": written}


# -- argument parsing -----------------------------------------------------------


def _common(p):
    g = p.add_argument_group("lattice")
    g.add_argument("--config", help="JSON config file; flags override its values")
    g.add_argument("--sites", type=int, help="number of waveguides N (default 59)")
    g.add_argument("--coupling", type=float, help="base coupling C1 in 1/cm (default 0.37; design: calibration's C1)")
    g.add_argument("--geometry", help="lattice JSON with separations + calibration, instead of --coupling")
    g.add_argument("--length-cm", dest="length_cm", type=float, help="propagation length in cm (default 10)")
    o = p.add_argument_group("output")
    o.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")
    o.add_argument("--format", help="comma list of csv,json,pgm,png (default csv,json,pgm)")
    o.add_argument("--normalize", choices=["raw", "peak"], help="scaling of written maps (default raw)")
    o.add_argument("--gamma", type=float, help="display gamma for image outputs (default 1 = linear)")
    o.add_argument("--pgm-bits", dest="pgm_bits", type=int, choices=[8, 16])
    o.add_argument("--pgm-scale", dest="pgm_scale", choices=["global", "row"], help="peak used for image scaling")
    o.add_argument("-v", "--verbose", action="store_true")


def _state_flags(p, choices):
    p.add_argument("--input", help="input site(s), k or k,l")
    p.add_argument("--state", choices=choices)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glauberfock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="waveguide separations for a square-root coupling profile")
    _common(p)
    p.add_argument("--calibration", help="calibration preset: 633 or 800 (default 633)")
    p.add_argument("--d1", type=float, help="separation (um) giving the calibration's C1")
    p.add_argument("--kappa", type=float, help="coupling decay length (um)")
    p.add_argument("--wavelength", type=float)
    p.add_argument("--max-coupling", dest="max_coupling", type=float, help="fabrication limit in 1/cm (default 5.5)")

    p = sub.add_parser("propagate", help="intensity evolution for single-guide excitation")
    _common(p)
    _state_flags(p, ["single"])
    p.add_argument("--z-samples", dest="z_samples", type=int, help="rows of the intensity map (default 201)")
    p.add_argument("--tail-width", dest="tail_width", type=int, help="sites used for the leakage check (default 5)")

    p = sub.add_parser("correlate", help="exact two-particle correlation map")
    _common(p)
    _state_flags(p, ["boson", "noon+", "noon-", "fermion"])

    p = sub.add_parser("estimate", help="classical intensity-correlation estimate vs exact map")
    _common(p)
    _state_flags(p, ["boson", "noon+", "noon-"])
    p.add_argument("--phases", help="M random phases, or grid:P controlled phases (default 60)")
    p.add_argument("--seed", type=int, help="seed of the PCG64 phase generator (default 0)")
    p.add_argument("--amplitude-jitter", dest="amplitude_jitter", type=float, help="relative amplitude noise std")
    p.add_argument("--phase-jitter", dest="phase_jitter", type=float, help="phase noise std in radians")

    p = sub.add_parser("reproduce-paper", help="regenerate the canonical figure maps and check fixtures")
    p.add_argument("--out-dir", dest="out_dir", default="paper_figures")
    p.add_argument("--format", default="csv,json,pgm")
    p.add_argument("--update-fixtures", dest="update_fixtures", action="store_true",
                   help="rewrite the stored hashes instead of checking them")
    p.add_argument("--fixtures", help="fixture file (default: bundled)")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _print_design(result):
    rep = result["report"]
    geom = result["geometry"]
    prof = result["profile"]
    print(f"N = {prof.n_sites}, C1 = {prof.base_coupling:g} 1/cm, max coupling {rep.max_coupling:.4f} 1/cm")
    if geom.separations.size:
        print(f"d_1 = {geom.separations[0]:.3f} um, d_{prof.n_sites - 1} = {geom.separations[-1]:.3f} um, "
              f"width {geom.positions[-1]:.1f} um")
    state = "feasible" if rep.feasible else "INFEASIBLE"
    print(f"fabrication: {state} (limit {rep.limit:g} 1/cm, max sites {rep.max_site})")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "reproduce-paper":
            from .reproduce import run_reproduce

            return run_reproduce(
                args.out_dir, formats=args.format, fixtures=args.fixtures, update=args.update_fixtures
            )
        file_doc = load_config_file(args.config) if args.config else None
        cfg = resolve_config(args.command, vars(args), file_doc)
        if args.command == "design":
            result = run_design(cfg)
            _print_design(result)
            if not result["report"].feasible:
                print(f"error: profile exceeds the {result['report'].limit:g} 1/cm fabrication limit", file=sys.stderr)
                return InfeasibleGeometryError.exit_code
        elif args.command == "propagate":
            s = run_propagate(cfg)["summary"]
            print(f"k = {s['input']['k']}: {s['maxima']} maxima, tail leakage {s['tail_leakage']:.3e}")
            if s["truncation_warning"]:
                log.warning("tail leakage %.3e exceeds %.0e; lattice too short for a semi-infinite ladder",
                            s["tail_leakage"], TAIL_LEAKAGE_WARNING)
        elif args.command == "correlate":
            s = run_correlate(cfg)["summary"]
            print(f"{s['provenance']} ({s['k']},{s['l']}): sum {s['total']:.12f}, argmax {tuple(s['argmax'])}")
        elif args.command == "estimate":
            s = run_estimate(cfg)["summary"]
            print(f"estimate vs exact: max abs error {s['max_abs_error']:.3e}, rms error {s['rms_error']:.3e}")
    except GlauberFockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

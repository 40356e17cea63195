"""Command-line pipelines: ``simulate``, ``tomo``, ``witness``, ``fit`` and ``mask``.

Exit codes: 0 success, 2 input or validation error, 3 I/O or system error.
Every command writes ``<out>.manifest.json`` next to its output.
"""

import argparse
import hashlib
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import OamSimError
from .fitting import fit_lorentzian, read_fit_csv
from .measurement_sim import CoincidenceTable, Setting, measure, model_state, simulate_coincidence_matrix, simulate_witness_data
from .oam_optics import (
    FieldGrid,
    QUTRIT_MODES,
    qutrit_tomo_states,
    superposition_intensity,
    superposition_phase_mask,
    write_intensity_pgm,
    write_phase_pgm,
)
from .quantum_state import uhlmann_fidelity
from .rng import resolve_seed
from .source_model import ExperimentConfig
from .tomography import N_STATES, TomoDataset, ideal_state, mle_reconstruct, monte_carlo
from .witness import CONVENTIONS, schmidt_threshold_check, witness_report

EXIT_OK, EXIT_INPUT, EXIT_IO = 0, 2, 3


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_text(path, text):
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _dump_json(doc):
    return json.dumps(doc, indent=2) + "\n"


def _write_manifest(out, command, argv, inputs, outputs, seed=None, config=None):
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": None if config is None else str(config),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "seed": seed,
        "version": __version__,
    }
    _write_text(f"{out}.manifest.json", _dump_json(manifest))


def reference_values():
    """Published experimental values shipped with the package (annotation only)."""
    text = resources.files("oamsim").joinpath("data/reference_values.json").read_text(encoding="utf-8")
    return json.loads(text)


def parse_modes(text):
    """``"2,1,0,-1"`` or an inclusive range ``"-5:5"``."""
    text = text.strip()
    if ":" in text:
        lo, hi = (int(v) for v in text.split(":"))
        return list(range(lo, hi + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def load_config(path):
    text = Path(path).read_text(encoding="utf-8")
    return ExperimentConfig.from_json(text)


def tomo_settings(modes):
    """The 81 qutrit product settings embedded in the mode basis ``modes``, labelled ``t1``..``t9``."""
    modes = list(modes)
    missing = [m for m in QUTRIT_MODES if m not in modes]
    if missing:
        raise OamSimError(f"mode range must contain {QUTRIT_MODES} for tomography")
    embedded = []
    for s in qutrit_tomo_states():
        v = np.zeros(len(modes), dtype=complex)
        for amp, m in zip(s, QUTRIT_MODES):
            v[modes.index(m)] = amp
        embedded.append(v)
    return [
        Setting(embedded[j], embedded[k], f"t{j + 1}", f"t{k + 1}")
        for j in range(N_STATES)
        for k in range(N_STATES)
    ]


def simulate_tomo_dataset(config, stored=False, seed=0, exact=False):
    table = measure(
        model_state(config, stored),
        tomo_settings(config.modes),
        config.effective_pair_rate(stored),
        config.acquisition_seconds,
        config.floor_rate,
        seed=seed,
        exact=exact,
        tag=("tomography", bool(stored)),
    )
    return TomoDataset(table.counts.reshape(N_STATES, N_STATES), config.acquisition_seconds)


# --- commands ------------------------------------------------------------------


def cmd_simulate(args, argv):
    config = load_config(args.config)
    seed = resolve_seed(args.seed, config.seed)
    if args.kind == "correlation":
        text = simulate_coincidence_matrix(config, args.stored, seed=seed, exact=args.exact).to_csv()
    elif args.kind == "witness":
        modes = parse_modes(args.modes) if args.modes else None
        text = simulate_witness_data(config, modes, args.stored, seed=seed, exact=args.exact).to_csv()
    else:
        text = simulate_tomo_dataset(config, args.stored, seed=seed, exact=args.exact).to_csv()
    _write_text(args.out, text)
    _write_manifest(args.out, "simulate", argv, [args.config], [args.out], seed, args.config)


def _read_tomo(path):
    return TomoDataset.from_csv(Path(path).read_text(encoding="utf-8"))


def cmd_tomo(args, argv):
    data = _read_tomo(args.counts)
    seed = resolve_seed(args.seed)
    ideal = ideal_state()
    result = mle_reconstruct(data)
    fid = uhlmann_fidelity(result.rho, ideal)
    doc = result.to_json()
    inputs = [args.counts]

    def fid_to_ideal(d):
        return uhlmann_fidelity(mle_reconstruct(d).rho, ideal)

    fid_doc = {"value": fid}
    if args.mc >= 2:
        mean, std = monte_carlo(data, fid_to_ideal, args.mc, seed=seed)
        fid_doc.update(mc_mean=mean, std=std)
    passed, margin = schmidt_threshold_check(fid)
    doc["fidelity_to_ideal"] = fid_doc
    doc["schmidt_rank_threshold"] = {"threshold": 2.0 / 3.0, "passed": bool(passed), "margin": margin}

    if args.compare:
        other = _read_tomo(args.compare)
        inputs.append(args.compare)
        other_result = mle_reconstruct(other)
        f2 = {"value": uhlmann_fidelity(other_result.rho, result.rho)}
        if args.mc >= 2:
            stacked = np.stack([np.asarray(data.counts), np.asarray(other.counts)])

            def between(c):
                return uhlmann_fidelity(mle_reconstruct(c[1]).rho, mle_reconstruct(c[0]).rho)

            mean, std = monte_carlo(stacked, between, args.mc, seed=seed)
            f2.update(mc_mean=mean, std=std)
        doc["compared_to"] = other_result.to_json()
        doc["fidelity_between"] = f2

    _write_text(args.out, _dump_json(doc))
    _write_manifest(args.out, "tomo", argv, inputs, [args.out], seed)


def _read_tables(paths):
    tables = [CoincidenceTable.from_csv(Path(p).read_text(encoding="utf-8")) for p in paths]
    if len(tables) == 1:
        return tables[0]
    counts = np.concatenate([t.counts.astype(float) for t in tables])
    return CoincidenceTable(
        [l for t in tables for l in t.labels_a],
        [l for t in tables for l in t.labels_b],
        counts,
        np.concatenate([t.seconds for t in tables]),
    )


def cmd_witness(args, argv):
    table = _read_tables(args.counts)
    seed = resolve_seed(args.seed)
    modes = parse_modes(args.modes)
    report = witness_report(table, modes, args.k_sigma, args.convention, args.mc, seed)
    _write_text(args.out, report.dumps())
    text_path = str(Path(args.out).with_suffix(".txt"))
    reference = None
    if args.annotate:
        ref = reference_values()["witness"]
        reference = {k: v for k, v in ref.items() if k.startswith(("M_", "W_", "certified"))}
    _write_text(text_path, report.summary(reference))
    _write_manifest(args.out, "witness", argv, args.counts, [args.out, text_path], seed)


def cmd_fit(args, argv):
    xs, ys, weights = read_fit_csv(Path(args.input).read_text(encoding="utf-8"))
    if weights is None and args.poisson:
        weights = "poisson"
    result = fit_lorentzian(xs, ys, weights)
    _write_text(args.out, _dump_json(result.to_json()))
    _write_manifest(args.out, "fit", argv, [args.input], [args.out])


def _mask_theta(args):
    if args.basis is None:
        return args.m1, args.m2, args.theta
    sign = 0 if args.outcome == "+" else 1
    if args.basis == "x":
        return args.m1, args.m2, math.pi * sign
    if args.basis == "y":
        return args.m1, args.m2, math.pi / 2 + math.pi * sign
    # z: a single mode; the other amplitude is switched off
    m = args.m1 if sign == 0 else args.m2
    return m, m, 0.0


def cmd_mask(args, argv):
    grid = FieldGrid(args.size, args.extent, args.waist)
    m1, m2, theta = _mask_theta(args)
    phase, _ = superposition_phase_mask(m1, m2, theta, grid)
    intensity = superposition_intensity(m1, m2, theta, grid)
    phase_path = f"{args.out}_phase.pgm"
    inten_path = f"{args.out}_intensity.pgm"
    write_phase_pgm(phase_path, phase)
    write_intensity_pgm(inten_path, intensity)
    _write_manifest(args.out, "mask", argv, [], [phase_path, inten_path])


def build_parser():
    p = _ArgumentParser(prog="oamsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    s = sub.add_parser("simulate", help="simulate coincidence data from an experiment config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--stored", action="store_true", help="simulate after storage of one arm")
    s.add_argument("--kind", choices=("correlation", "witness", "tomo"), default="correlation")
    s.add_argument("--modes", help="measured modes for --kind witness, e.g. 2,1,0,-1 or -5:5")
    s.add_argument("--seed", type=int)
    s.add_argument("--exact", action="store_true", help="write expected counts instead of sampling")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("tomo", help="reconstruct a qutrit-qutrit state from j,k,counts data")
    t.add_argument("counts")
    t.add_argument("--compare", help="second dataset; reports the fidelity between both reconstructions")
    t.add_argument("--mc", type=int, default=1000, help="Monte Carlo replicates (0 disables)")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_tomo)

    w = sub.add_parser("witness", help="entanglement and dimensionality witnesses from MUB counts")
    w.add_argument("counts", nargs="+")
    w.add_argument("--modes", required=True, help="e.g. 2,1,0,-1 or -5:5 (use --modes=-5:5)")
    w.add_argument("--k-sigma", type=float, default=3.0)
    w.add_argument("--convention", choices=CONVENTIONS, default="claims")
    w.add_argument("--mc", type=int, default=1000)
    w.add_argument("--annotate", action="store_true", help="append published reference values to the text report")
    w.add_argument("--seed", type=int)
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_witness)

    f = sub.add_parser("fit", help="fit the Lorentzian fit function to x,y[,weight] data")
    f.add_argument("input")
    f.add_argument("--poisson", action="store_true", help="weight by 1/max(y, 1)")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("mask", help="render phase and intensity PGMs of a two-mode superposition")
    m.add_argument("--m1", type=int, required=True)
    m.add_argument("--m2", type=int, required=True)
    m.add_argument("--theta", type=float, default=0.0)
    m.add_argument("--basis", choices=("x", "y", "z"))
    m.add_argument("--outcome", choices=("+", "-"), default="+")
    m.add_argument("--size", type=int, default=512)
    m.add_argument("--extent", type=float, default=3.0)
    m.add_argument("--waist", type=float, default=1.0)
    m.add_argument("--out", required=True, help="output prefix")
    m.set_defaults(func=cmd_mask)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        args.func(args, argv)
    except OamSimError as exc:
        print(f"oamsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"oamsim {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - exit-code contract allows no other codes
        print(f"oamsim {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def replay(manifest_path):
    """Re-run the command recorded in a manifest; returns the exit code."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    return main(manifest["argv"])


if __name__ == "__main__":
    sys.exit(main())

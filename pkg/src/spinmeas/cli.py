"""Command line front end.

Subcommands: ``povm``, ``errors``, ``ks-check``, ``experiment``.  Options can
also come from a flat ``key = value`` config file (``--config``); explicit
flags win over file values, which win over built-in defaults.  Angles are in
radians.  Exit codes: 0 success, 1 numerical failure, 2 usage or config
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .contextsim import (
    CORRELATED,
    INDEPENDENT,
    AlignmentDistribution,
    contextuality_experiment,
    default_valuation,
    find_illegal_triad,
    summary_dict,
    trial_csv_rows,
)
from .errmetrics import (
    predictive_error_povm,
    retrodictive_error_povm,
    small_angle_errors,
)
from .kscolor import (
    RayFileError,
    RaySet,
    Unsatisfiable,
    check_coloring,
    find_legal_coloring,
    ortho_structure,
    peres_rays,
)
from .linalg import operator_norm
from .measurement import (
    contemporaneous_unitary,
    povm,
    povm_to_jsonable,
    sequential_unitary,
    small_angle_povm_elements,
)
from .spin1 import squared_projection, triad_from_angles

# Small-angle approximants are emitted only below this tilt.
SMALL_ANGLE_LIMIT = 0.2


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


_DEFAULTS: dict[str, dict[str, str | None]] = {
    "povm": {
        "psi": None,
        "theta": None,
        "phi": None,
        "model": "sequential",
        "format": "json",
        "output": None,
    },
    "errors": {
        "angles": "0.003,0.01,0.03",
        "phis": "0.0,0.7853981633974483,1.5707963267948966,2.0",
        "model": "sequential",
        "format": "csv",
        "output": None,
    },
    "ks-check": {
        "set": None,
        "file": None,
        "tol": "1e-9",
        "format": "text",
        "output": None,
    },
    "experiment": {
        "sigma": "0.01",
        "trials": "10000",
        "samples": "10000",
        "seed": "0",
        "mode": "independent",
        "model": "sequential",
        "rays": "peres33",
        "state": "1,1,1",
        "output": None,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmeas",
        description="Approximate joint measurements of spin-1 projections and "
        "Kochen-Specker contextuality experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_povm = sub.add_parser("povm", help="exact POVM of a triad measurement")
    p_povm.add_argument("--psi", type=float, help="tilt of axis 2 (radians)")
    p_povm.add_argument("--theta", type=float, help="tilt of axis 3 (radians)")
    p_povm.add_argument("--phi", type=float, help="azimuth of axis 3 (radians)")
    p_povm.add_argument("--model", choices=["sequential", "contemporaneous"])
    p_povm.add_argument("--format", choices=["json", "csv"])

    p_err = sub.add_parser("errors", help="error metrics over an angle grid")
    p_err.add_argument("--angles", help="comma-separated tilt values (psi = theta)")
    p_err.add_argument("--phis", help="comma-separated azimuth values")
    p_err.add_argument("--model", choices=["sequential", "contemporaneous"])
    p_err.add_argument("--format", choices=["json", "csv"])

    p_ks = sub.add_parser("ks-check", help="colourability of a ray set")
    p_ks.add_argument("--set", choices=["peres33"], help="builtin ray set")
    p_ks.add_argument("--file", help="ray file: one ray per line, 3 numbers")
    p_ks.add_argument("--tol", type=float, help="orthogonality tolerance")
    p_ks.add_argument("--format", choices=["text", "json"])

    p_exp = sub.add_parser("experiment", help="hidden-vs-quantum misalignment run")
    p_exp.add_argument("--sigma", type=float, help="alignment error size (radians)")
    p_exp.add_argument("--trials", type=int)
    p_exp.add_argument("--samples", type=int, help="samples per single-axis estimate")
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--mode", choices=["independent", "correlated"])
    p_exp.add_argument("--model", choices=["sequential", "contemporaneous"])
    p_exp.add_argument("--rays", help="'peres33' or a ray file path")
    p_exp.add_argument("--state", help="three comma-separated real amplitudes")

    for sp in (p_povm, p_err, p_ks, p_exp):
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--output", help="write the main table here instead of stdout")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge flag > config > default, converting config strings."""
    defaults = _DEFAULTS[command]
    merged: dict[str, str | None] = dict(defaults)
    if args.config:
        cfg = _read_config(args.config)
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        merged.update(cfg)
    for key in defaults:
        flag_value = getattr(args, key.replace("-", "_"), None)
        if flag_value is not None:
            merged[key] = flag_value
    out: dict = {}
    for key, value in merged.items():
        if value is None or isinstance(value, (int, float)):
            out[key] = value
            continue
        kind = _OPTION_TYPES.get((command, key), str)
        try:
            out[key] = kind(value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    return out


_OPTION_TYPES = {
    ("povm", "psi"): float,
    ("povm", "theta"): float,
    ("povm", "phi"): float,
    ("ks-check", "tol"): float,
    ("experiment", "sigma"): float,
    ("experiment", "trials"): int,
    ("experiment", "samples"): int,
    ("experiment", "seed"): int,
}


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad number list: {text!r}") from exc


def _write_text(opts: dict, text: str) -> None:
    if opts.get("output"):
        with open(opts["output"], "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_povm(opts: dict) -> int:
    for key in ("psi", "theta", "phi"):
        if opts[key] is None:
            raise UsageError(f"--{key} is required (or set {key} in the config file)")
    psi, theta, phi = opts["psi"], opts["theta"], opts["phi"]
    triad = triad_from_angles(psi, theta, phi)
    build = sequential_unitary if opts["model"] == "sequential" else contemporaneous_unitary
    exact = povm(build(triad))
    small = opts["model"] == "sequential" and max(abs(psi), abs(theta)) <= SMALL_ANGLE_LIMIT
    approx = small_angle_povm_elements(psi, theta, phi) if small else None
    deviations = (
        {a: operator_norm(exact.elements[a] - approx[a]) for a in exact.outcomes}
        if approx is not None
        else None
    )

    if opts["format"] == "json":
        doc = povm_to_jsonable(exact)
        doc["angles"] = {"psi": psi, "theta": theta, "phi": phi}
        doc["model"] = opts["model"]
        if approx is not None:
            doc["approx_elements"] = {
                a: [[float(z.real), float(z.imag)] for z in approx[a].reshape(-1)]
                for a in exact.outcomes
            }
            doc["approx_deviation_opnorm"] = deviations
        _write_text(opts, _json_text(doc))
        return 0

    header = ["outcome", "i", "j", "exact_re", "exact_im", "approx_re", "approx_im", "deviation_opnorm"]
    rows = [header]
    for outcome in exact.outcomes:
        element = exact.elements[outcome]
        for i in range(element.shape[0]):
            for j in range(element.shape[1]):
                row = [outcome, str(i), str(j), repr(element[i, j].real), repr(element[i, j].imag)]
                if approx is not None:
                    row += [
                        repr(float(approx[outcome][i, j].real)),
                        repr(float(approx[outcome][i, j].imag)),
                        repr(deviations[outcome]),
                    ]
                else:
                    row += ["", "", ""]
                rows.append(row)
    _write_text(opts, _csv_text(rows))
    return 0


def _relative_deviation(value: float, reference: float) -> float:
    """|value - reference| / |reference|, or the absolute value when the
    reference is exactly zero."""
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def cmd_errors(opts: dict) -> int:
    angles = _float_list(opts["angles"])
    phis = _float_list(opts["phis"])
    if not angles or not phis:
        raise UsageError("--angles and --phis must be non-empty")
    header = [
        "psi",
        "theta",
        "phi",
        "r",
        "delta_ei",
        "delta_ei_closed",
        "delta_ei_dev",
        "delta_ef",
        "delta_ef_closed",
        "delta_ef_dev",
    ]
    rows = [header]
    docs = []
    for angle in angles:
        for phi in phis:
            triad = triad_from_angles(angle, angle, phi)
            build = sequential_unitary if opts["model"] == "sequential" else contemporaneous_unitary
            p = povm(build(triad))
            for r, axis in enumerate(triad.axes, start=1):
                a_op = squared_projection(axis)
                delta_ei = retrodictive_error_povm(p, r, a_op)
                delta_ef = predictive_error_povm(p, r, a_op)
                closed_ei, closed_ef = small_angle_errors(r, angle, angle, phi)
                record = {
                    "psi": angle,
                    "theta": angle,
                    "phi": phi,
                    "r": r,
                    "delta_ei": delta_ei,
                    "delta_ei_closed": closed_ei,
                    "delta_ei_dev": _relative_deviation(delta_ei, closed_ei),
                    "delta_ef": delta_ef,
                    "delta_ef_closed": closed_ef,
                    "delta_ef_dev": _relative_deviation(delta_ef, closed_ef),
                }
                docs.append(record)
                rows.append(
                    [
                        repr(record["psi"]),
                        repr(record["theta"]),
                        repr(record["phi"]),
                        str(r),
                        repr(record["delta_ei"]),
                        repr(record["delta_ei_closed"]),
                        repr(record["delta_ei_dev"]),
                        repr(record["delta_ef"]),
                        repr(record["delta_ef_closed"]),
                        repr(record["delta_ef_dev"]),
                    ]
                )
    if opts["format"] == "json":
        _write_text(opts, _json_text(docs))
    else:
        _write_text(opts, _csv_text(rows))
    return 0


def cmd_ks_check(opts: dict) -> int:
    if opts["set"] == "peres33":
        rayset = peres_rays()
    elif opts["file"]:
        rayset = RaySet.load(opts["file"])
    else:
        raise UsageError("one of --set peres33 or --file PATH is required")
    structure = ortho_structure(rayset, opts["tol"])
    result = find_legal_coloring(structure)

    if isinstance(result, Unsatisfiable):
        doc = {
            "satisfiable": False,
            "rays": len(rayset),
            "pairs": len(structure.pairs),
            "triads": len(structure.triads),
            "contradictions": result.contradictions,
        }
        text = (
            f"UNSAT rays={len(rayset)} pairs={len(structure.pairs)} "
            f"triads={len(structure.triads)} contradictions={result.contradictions}\n"
        )
    else:
        violations = check_coloring(structure, result)
        if violations:
            raise RuntimeError("solver returned a colouring with violations")
        doc = {
            "satisfiable": True,
            "rays": len(rayset),
            "pairs": len(structure.pairs),
            "triads": len(structure.triads),
            "coloring": {rayset.labels[i]: result.values[i] for i in range(len(rayset))},
        }
        lines = [
            f"SAT rays={len(rayset)} pairs={len(structure.pairs)} triads={len(structure.triads)}"
        ]
        lines += [f"{rayset.labels[i]} {result.values[i]}" for i in range(len(rayset))]
        text = "\n".join(lines) + "\n"
    _write_text(opts, _json_text(doc) if opts["format"] == "json" else text)
    return 0


def cmd_experiment(opts: dict) -> int:
    if opts["trials"] < 1:
        raise UsageError("trials must be >= 1")
    if opts["samples"] < 1:
        raise UsageError("samples must be >= 1")
    if opts["sigma"] < 0:
        raise UsageError("sigma must be >= 0")
    kind = INDEPENDENT if opts["mode"] == "independent" else CORRELATED
    dist = AlignmentDistribution(kind=kind, sigma=opts["sigma"], seed=opts["seed"])
    rayset = peres_rays() if opts["rays"] == "peres33" else RaySet.load(opts["rays"])
    amplitudes = np.asarray(_float_list(opts["state"]), dtype=float)
    if amplitudes.shape != (3,) or not np.linalg.norm(amplitudes) > 0:
        raise UsageError("--state needs three real amplitudes, not all zero")
    state = amplitudes / np.linalg.norm(amplitudes)

    valuation = default_valuation()
    found = find_illegal_triad(valuation, dist, rayset, opts["samples"])
    if found is None:
        raise RuntimeError("no forbidden triad found in the ray set")
    target, _ = found
    report = contextuality_experiment(
        target,
        valuation,
        dist,
        state,
        trials=opts["trials"],
        samples=opts["samples"],
        model=opts["model"],
    )
    _write_text(opts, _csv_text(trial_csv_rows(report)))
    sys.stdout.write(_json_text(summary_dict(report)))
    return 0


_DISPATCH = {
    "povm": cmd_povm,
    "errors": cmd_errors,
    "ks-check": cmd_ks_check,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve(args.command, args)
        return _DISPATCH[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RayFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical or internal failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

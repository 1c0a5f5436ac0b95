"""Command-line entry point.

Every command prints JSON on stdout.  ``-o PATH`` additionally writes the
result to a file: JSON for ``.json`` paths, and for ``ensemble`` a CSV
table (plus a sidecar manifest) for ``.csv`` paths.

Exit status: 0 on success, 2 on invalid input, 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .collapse_walk import LatticeWalkState, Rounding, SimplexPoint, WalkConfig, absorption_oracle, run_collapse
from .detector_imaging import (
    antisymmetrize_fermion,
    born_weights,
    build_sea,
    decompose_exchange,
    dropped_term_fraction,
    extract_image,
    form_bound_state,
    hole_reduce,
    no_cloning_witness,
    self_pairing_amplitude,
    symmetrize_boson,
)
from .ensemble import EnsembleConfig, export, run_ensemble, run_rng
from .exceptions import ExportError, QImagesError, ValidationError
from .state_algebra import PureState, component_residual

_NUM = r"[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?"
_COMPLEX = re.compile(rf"^\s*([+-]?{_NUM})\s*(?:([+-])\s*({_NUM})?\s*i)?\s*$")


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` (e.g. ``0.6+0.0i``, ``-0.5-0.5i``) or a bare real number."""
    m = _COMPLEX.match(text)
    if not m:
        raise ValidationError(f"malformed complex literal {text!r}; expected re+imi, e.g. 0.6+0.0i")
    re_part, sign, im_part = m.groups()
    im = 0.0
    if sign is not None:
        im = float(im_part) if im_part is not None else 1.0
        im = -im if sign == "-" else im
    return complex(float(re_part), im)


def parse_amplitudes(text: str, normalize: bool) -> np.ndarray:
    amps = np.array([parse_complex(t) for t in text.split(",")], dtype=np.complex128)
    if amps.size < 2:
        raise ValidationError("need at least two amplitudes")
    n2 = float(np.sum(np.abs(amps) ** 2))
    if normalize:
        if n2 == 0.0:
            raise ValidationError("cannot normalize an all-zero amplitude list")
        return amps / np.sqrt(n2)
    if abs(n2 - 1.0) > 1e-9:
        raise ValidationError(f"amplitudes have squared norm {n2:.12g}; pass --normalize to rescale")
    return amps


def _counts(text: str) -> list[int]:
    try:
        counts = [int(t) for t in text.split(",")]
    except ValueError:
        raise ValidationError(f"malformed counts {text!r}; expected e.g. 5,3,2") from None
    return counts


def _pair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def cmd_symmetrize(args) -> dict:
    sea = build_sea(args.n)
    if args.stats == "bose":
        state = symmetrize_boson(args.i, sea)
        dec = decompose_exchange(args.i, sea)
        return {
            "statistics": "bose",
            "N": args.n,
            "i": args.i,
            "terms": state.dump().splitlines(),
            "norm": state.norm(),
            **dec.to_dict(),
        }
    state = antisymmetrize_fermion(args.i, sea)
    hole_form, lam = hole_reduce(args.i, sea)
    return {
        "statistics": "fermi",
        "N": args.n,
        "i": args.i,
        "terms": state.dump().splitlines(),
        "norm": state.norm(),
        "proportionality": lam,
        "residual": component_residual(hole_form, state * lam),
        "self_pairing_amplitude": self_pairing_amplitude(state),
        "dropped_term_fraction": dropped_term_fraction(args.i, sea),
    }


def cmd_image(args) -> dict:
    psi = PureState(parse_amplitudes(args.amps, args.normalize))
    image = extract_image(psi)
    sd = form_bound_state(psi, image, partner="S")
    dd = form_bound_state(psi, image, partner="D")
    return {
        "image": [_pair(a) for a in image.state.amplitudes],
        "labels": [str(lab) for lab in image.state.labels],
        **sd.to_dict(),
        "weights_dd": [float(w) for w in dd.weights],
        "cross_fraction": sd.cross_fraction,
        "born": [float(x) for x in born_weights(sd).coords],
    }


def cmd_witness(args) -> dict:
    psi = PureState(parse_amplitudes(args.amps_a, args.normalize))
    phi = PureState(parse_amplitudes(args.amps_b, args.normalize))
    return {"overlap": _pair(psi.inner(phi)), "witness": no_cloning_witness(psi, phi)}


def _simplex(args) -> SimplexPoint:
    amps = parse_amplitudes(args.amps, args.normalize)
    return SimplexPoint(np.abs(amps) ** 2)


def _walk_config(args) -> WalkConfig:
    return WalkConfig(M=args.m, max_steps=args.max_steps, rounding=Rounding(args.rounding))


def cmd_collapse(args) -> dict:
    outcome = run_collapse(_simplex(args), _walk_config(args), run_rng(args.seed, 0))
    return outcome.to_dict()


def cmd_ensemble(args) -> dict:
    cfg = EnsembleConfig(
        runs=args.runs,
        master_seed=args.seed,
        walk=_walk_config(args),
        efficiency=args.efficiency,
        workers=args.workers,
    )
    stats = run_ensemble(_simplex(args), cfg)
    if args.output is not None:
        export(stats, args.output)
    return stats.to_dict()


def cmd_oracle(args) -> dict:
    counts = _counts(args.counts)
    state = LatticeWalkState.from_counts(counts)
    if args.m is not None and args.m != state.M:
        raise ValidationError(f"counts sum to {state.M}, but --m {args.m} was given")
    return {
        "counts": list(state.counts),
        "M": state.M,
        "absorption": [float(x) for x in absorption_oracle(state)],
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qimages",
        description="Quantum images, symmetrized detector states and first-passage collapse walks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("-o", "--output", type=Path, help="also write the result to this file")

    def add_amps(p, *names):
        for name in names:
            p.add_argument(name, required=True, help="comma-separated complex amplitudes, re+imi")
        p.add_argument("--normalize", action="store_true", help="rescale amplitudes to unit norm")

    def add_walk(p):
        p.add_argument("--m", type=int, default=100, help="lattice resolution (default 100)")
        p.add_argument("--seed", type=int, required=True, help="master seed (required)")
        p.add_argument("--max-steps", type=int, default=None)
        p.add_argument("--rounding", choices=[r.value for r in Rounding], default=Rounding.LARGEST_REMAINDER.value)

    p = sub.add_parser("symmetrize", help="system-detector (anti)symmetrization and its identities")
    p.add_argument("--n", type=int, required=True, help="number of detector states")
    p.add_argument("--i", type=int, required=True, help="index of the incoming state")
    p.add_argument("--stats", choices=["bose", "fermi"], required=True)
    add_output(p)
    p.set_defaults(func=cmd_symmetrize)

    p = sub.add_parser("image", help="conjugate image and bound-state weights")
    add_amps(p, "--amps")
    add_output(p)
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("witness", help="no-cloning inner-product witness")
    add_amps(p, "--amps-a", "--amps-b")
    add_output(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("collapse", help="one collapse walk")
    add_amps(p, "--amps")
    add_walk(p)
    add_output(p)
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("ensemble", help="an ensemble of collapse walks")
    add_amps(p, "--amps")
    add_walk(p)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by $COLLAPSE_WALK_THREADS)")
    add_output(p)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("oracle", help="exact absorption probabilities from a lattice state")
    p.add_argument("--counts", required=True, help="comma-separated occupation counts")
    p.add_argument("--m", type=int, default=None, help="optional check on the total")
    add_output(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result = args.func(args)
        text = json.dumps(result, indent=2)
        if args.output is not None and args.command != "ensemble":
            if args.output.suffix.lower() != ".json":
                raise ValidationError("only .json output is supported for this command")
            try:
                args.output.write_text(text + "\n")
            except OSError as exc:
                raise ExportError(f"cannot write {args.output}: {exc}") from exc
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QImagesError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line workbench.

Subcommands: verify, search, build-set, interlace, torus-set, density,
gowers, spectrum, converge, extract, pipeline.  Reports go to stdout as JSON
with sorted keys, embedding {seed, budget, version} where meaningful, so runs
are byte-identical for identical arguments.  Exit codes: 0 success / property
holds, 1 property violated (a witness is reported), 2 usage, I/O or format
errors.

Budget environment overrides: APLAB_CELL_BUDGET (interlacing cells),
APLAB_EXACT_WORK (exact decomposition work), APLAB_MC_BATCH (sampling batch).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .colorings import (
    CYCLIC,
    Coloring,
    coloring_from_text,
    coloring_to_text,
    search_coloring,
    tensor_power,
    verify_abab_abba_free,
    verify_binomial_pattern_free,
    verify_mono_pattern_free,
    verify_sym_a_ap_free,
    verify_symmetric_ap_free,
)
from .errors import BudgetExceededError, FormatError
from .patterns import PatternSpec, a_binomial_system, k_binomial_system
from .pipelines import run_pipeline
from .sets import (
    base9_set,
    behrend_set,
    greedy_solution_free_set,
    residue_set_from_text,
    residue_set_to_text,
    verify_solution_free,
)
from .torus import (
    build_torus_set,
    interlace_k,
    interlace_m,
    lambda_tilde_certificate,
    lambda_tilde_mc,
    pattern_probability_exact,
    pattern_probability_mc,
    torus_coloring_from_text,
    torus_coloring_to_text,
    torus_set_from_text,
    torus_set_to_text,
    ConstantField,
    DiagonalStrip,
    SlabIndicator,
)
from .uniformity import (
    extract_coloring,
    convergence_experiment,
    gowers_norm,
    grid_from_text,
    grid_to_text,
    lambda_exact,
    spectrum,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2


def _env_int(name, default):
    val = os.environ.get(name)
    return int(val) if val else default


def _emit(payload: dict):
    payload = dict(payload)
    payload["version"] = __version__
    print(json.dumps(payload, sort_keys=True))


def _rat(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _load_coloring(path):
    return coloring_from_text(_read(path))


def _load_torus_coloring(path):
    return torus_coloring_from_text(_read(path))


def _load_torus_set(path):
    base_dir = Path(path).parent

    def load(ref):
        ref_path = Path(ref)
        if not ref_path.is_absolute():
            ref_path = base_dir / ref_path
        return torus_coloring_from_text(_read(str(ref_path)))

    return torus_set_from_text(_read(path), load)


def _witness_dict(w):
    out = {
        "kind": w.kind,
        "n": w.n,
        "d": w.d,
        "points": list(w.points),
        "colors": list(w.colors),
    }
    out.update({k: list(v) if isinstance(v, tuple) else v for k, v in w.detail.items()})
    return out


def _field_arg(args):
    """Torus function from --torus-set / --slab / --diag / --const flags."""
    chosen = [x for x in (args.torus_set, args.slab, args.diag, getattr(args, "const", None)) if x]
    if len(chosen) != 1:
        raise FormatError("choose exactly one of --torus-set/--slab/--diag/--const")
    if args.torus_set:
        return _load_torus_set(args.torus_set)
    if args.slab:
        return SlabIndicator(Fraction(args.slab))
    if args.diag:
        return DiagonalStrip(Fraction(args.diag))
    return ConstantField(Fraction(args.const))


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_verify(args) -> int:
    c = _load_coloring(args.input)
    if args.pattern == "symmetric":
        w = verify_symmetric_ap_free(c, args.k)
    elif args.pattern == "sym-a":
        w = verify_sym_a_ap_free(c, PatternSpec.from_string(args.spec))
    elif args.pattern == "mono":
        w = verify_mono_pattern_free(c, args.k)
    elif args.pattern == "binomial":
        w = verify_binomial_pattern_free(c, PatternSpec.from_string(args.spec))
    elif args.pattern == "abab-abba":
        w = verify_abab_abba_free(c, args.a_bound)
    else:  # pragma: no cover - argparse restricts choices
        raise FormatError(f"unknown pattern {args.pattern!r}")
    report = {"input": args.input, "pattern": args.pattern, "ok": w is None}
    if w is not None:
        report["witness"] = _witness_dict(w)
    _emit(report)
    return EXIT_OK if w is None else EXIT_VIOLATION


def cmd_search(args) -> int:
    pattern = PatternSpec.from_string(args.spec) if args.spec else args.k
    res = search_coloring(
        args.N, pattern, args.r, args.ambient, args.mode, args.budget, args.seed
    )
    report = {
        "status": res.status,
        "N": args.N,
        "r": args.r,
        "nodes": res.nodes,
        "seed": args.seed,
        "budget": args.budget,
    }
    if res.coloring is not None and args.out:
        Path(args.out).write_text(coloring_to_text(res.coloring))
        report["out"] = args.out
    elif res.coloring is not None:
        report["coloring"] = coloring_to_text(res.coloring)
    _emit(report)
    return EXIT_OK if res.status == "found" else EXIT_VIOLATION


def cmd_build_set(args) -> int:
    if args.kind == "behrend":
        s = behrend_set(args.N, args.k)
        extra = {}
    elif args.kind == "base9":
        s = base9_set(args.r, args.m)
        extra = {}
    else:
        system = (
            a_binomial_system(PatternSpec.from_string(args.spec))
            if args.spec
            else k_binomial_system(args.k)
        )
        res = greedy_solution_free_set(system, args.m, args.r)
        s = res.set
        extra = {"complete": res.complete, "scanned": res.scanned}
        if not res.complete:
            _emit({"kind": args.kind, "infeasible_at_budget": True, **extra})
            return EXIT_VIOLATION
    Path(args.out).write_text(residue_set_to_text(s))
    _emit({"kind": args.kind, "modulus": s.modulus, "size": len(s), "out": args.out, **extra})
    return EXIT_OK


def cmd_interlace(args) -> int:
    phi = _load_coloring(args.input)
    cap = _env_int("APLAB_CELL_BUDGET", 100_000)
    if args.m is not None:
        tc = interlace_m(phi, args.m, cap)
    else:
        tc = interlace_k(phi, args.k, cap)
    Path(args.out).write_text(torus_coloring_to_text(tc))
    _emit({"D": tc.D, "colors": tc.r, "out": args.out})
    return EXIT_OK


def cmd_torus_set(args) -> int:
    Phi = _load_torus_coloring(args.coloring)
    S = residue_set_from_text(_read(args.set))
    width = Fraction(args.width) if args.width else None
    ts = build_torus_set(Phi, S, args.k, width)
    Path(args.out).write_text(torus_set_to_text(ts, args.coloring))
    _emit(
        {
            "out": args.out,
            "marginal": _rat(ts.first_marginal),
            "m": ts.m,
            "colors": Phi.r,
        }
    )
    return EXIT_OK


def cmd_density(args) -> int:
    spec = (
        PatternSpec.from_string(args.spec) if args.spec else PatternSpec.ap(args.k)
    )
    if args.lambda_exact:
        grids = [grid_from_text(_read(p)) for p in args.grid.split(",")]
        fs = grids[0] if len(grids) == 1 else grids
        val = lambda_exact(fs, spec)
        exact = isinstance(val, Fraction)
        report = {"value": float(val), "exact": exact, "kind": "lambda-exact"}
        if exact:
            report["value_rational"] = _rat(val)
        _emit(report)
        return EXIT_OK
    if args.lambda_mc:
        F = _field_arg(args)
        est = lambda_tilde_mc(F, spec, args.samples, args.seed)
        _emit(
            {
                "mean": est.mean,
                "stderr": est.stderr,
                "samples": est.samples,
                "seed": est.seed,
                "exact": False,
                "kind": "lambda-mc",
            }
        )
        return EXIT_OK
    if args.pattern_exact or args.pattern_mc:
        Phi = _load_torus_coloring(args.torus_coloring)
        if args.pattern_exact:
            val = pattern_probability_exact(
                Phi, spec, args.predicate, work_cap=_env_int("APLAB_EXACT_WORK", 300_000_000)
            )
            _emit(
                {
                    "value": float(val),
                    "value_rational": _rat(val),
                    "exact": True,
                    "kind": "pattern-exact",
                    "predicate": args.predicate,
                }
            )
        else:
            est = pattern_probability_mc(Phi, spec, args.predicate, args.samples, args.seed)
            _emit(
                {
                    "mean": est.mean,
                    "stderr": est.stderr,
                    "samples": est.samples,
                    "seed": est.seed,
                    "exact": False,
                    "kind": "pattern-mc",
                    "predicate": args.predicate,
                }
            )
        return EXIT_OK
    if args.certificate:
        Phi = _load_torus_coloring(args.torus_coloring)
        S = residue_set_from_text(_read(args.set))
        width = Fraction(args.width) if args.width else None
        val = lambda_tilde_certificate(Phi, S, spec, width)
        _emit(
            {
                "value": float(val),
                "value_rational": _rat(val),
                "exact": True,
                "kind": "certificate",
            }
        )
        return EXIT_OK
    raise FormatError("choose a density mode flag")


def cmd_gowers(args) -> int:
    f = grid_from_text(_read(args.input))
    val = gowers_norm(f, args.s, args.center)
    _emit({"value": val, "s": args.s, "center": args.center})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    f = grid_from_text(_read(args.input))
    rep = spectrum(f)
    _emit({"alpha": rep.alpha, "max_nonzero": rep.max_nonzero})
    return EXIT_OK


def cmd_converge(args) -> int:
    spec = PatternSpec.from_string(args.spec) if args.spec else PatternSpec.ap(args.k)
    F = _field_arg(args)
    ns = [int(tok) for tok in args.N_list.replace(",", " ").split()]
    reference = float(args.reference) if args.reference else None
    table = convergence_experiment(F, spec, ns, reference, args.samples, args.seed)
    _emit({**table, "seed": args.seed, "samples": args.samples})
    return EXIT_OK


def cmd_extract(args) -> int:
    F = _field_arg(args)
    res = extract_coloring(
        F, Fraction(args.alpha), args.k, args.r, args.N, args.seed, args.attempts
    )
    report = {
        "succeeded": res.coloring is not None,
        "succeeded_at": res.succeeded_at,
        "attempts": res.attempts,
        "undefined_failures": res.undefined_failures,
        "rejected": res.rejected,
        "seed": args.seed,
    }
    if res.coloring is not None and args.out:
        Path(args.out).write_text(coloring_to_text(res.coloring))
        report["out"] = args.out
    _emit(report)
    return EXIT_OK if res.coloring is not None else EXIT_VIOLATION


def cmd_pipeline(args) -> int:
    kwargs = {"samples": args.samples, "seed": args.seed}
    if args.name in ("thm2_6", "thm2_7"):
        kwargs["ell"] = args.ell
    if args.name == "thm2_7":
        kwargs["k"] = args.k or 4
    if args.name == "thm2_5":
        kwargs["k"] = args.k or 5
        kwargs["base_n"] = args.base_n
    if args.name == "lemma7_10" and args.spec:
        kwargs["a"] = PatternSpec.from_string(args.spec).a
    if args.base_coloring and args.name != "thm2_5":
        kwargs["base"] = _load_coloring(args.base_coloring)
    result = run_pipeline(args.name, **kwargs)
    cert = result.certificate()
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "base_coloring.txt").write_text(coloring_to_text(result.base))
        (out / "interlaced.txt").write_text(torus_coloring_to_text(result.interlaced))
        (out / "residues.txt").write_text(residue_set_to_text(result.residues))
        (out / "torus_set.txt").write_text(
            torus_set_to_text(result.torus_set, "interlaced.txt")
        )
        (out / "certificate.json").write_text(
            json.dumps({**cert, "version": __version__}, sort_keys=True, indent=2) + "\n"
        )
        cert["out_dir"] = args.out_dir
    _emit(cert)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="aplab", description=__doc__)
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check a coloring file against a pattern family")
    p.add_argument("input")
    p.add_argument("--pattern", required=True,
                   choices=["symmetric", "sym-a", "mono", "binomial", "abab-abba"])
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--spec")
    p.add_argument("--a-bound", type=int, default=4)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("search", help="search for a symmetric-pattern-free coloring")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--spec")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--ambient", choices=["cyclic", "interval"], default=CYCLIC)
    p.add_argument("--mode", choices=["exhaustive", "randomized"], default="exhaustive")
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("build-set", help="construct a residue set file")
    p.add_argument("--kind", required=True, choices=["behrend", "base9", "greedy"])
    p.add_argument("--N", type=int, help="modulus for behrend")
    p.add_argument("--m", type=int, help="modulus for base9/greedy")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--spec")
    p.add_argument("--r", type=int, help="target size")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build_set)

    p = sub.add_parser("interlace", help="lift a coloring to the circle")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=4, help="block interlacing with k^2 N cells")
    p.add_argument("--m", type=int, help="phase interlacing with m N cells")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_interlace)

    p = sub.add_parser("torus-set", help="build a rectangle set from coloring + residues")
    p.add_argument("--coloring", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--width", help="slab width as p/q (default 1/(2^k m))")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_torus_set)

    p = sub.add_parser("density", help="progression densities and certificates")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--lambda-exact", action="store_true")
    mode.add_argument("--lambda-mc", action="store_true")
    mode.add_argument("--pattern-exact", action="store_true")
    mode.add_argument("--pattern-mc", action="store_true")
    mode.add_argument("--certificate", action="store_true")
    p.add_argument("--grid", help="grid file (comma-separate for multilinear)")
    p.add_argument("--torus-coloring")
    p.add_argument("--torus-set")
    p.add_argument("--set")
    p.add_argument("--slab", help="slab indicator of this width")
    p.add_argument("--diag", help="diagonal strip of this width")
    p.add_argument("--const", help="constant field of this value")
    p.add_argument("--width")
    p.add_argument("--predicate", default="binomial",
                   choices=["binomial", "symmetric", "mono"])
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--spec")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("gowers", help="box norm of a grid file")
    p.add_argument("--input", required=True)
    p.add_argument("--s", type=int, required=True, choices=[2, 3])
    p.add_argument("--center", action="store_true")
    p.set_defaults(fn=cmd_gowers)

    p = sub.add_parser("spectrum", help="Fourier report of a grid file")
    p.add_argument("--input", required=True)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("converge", help="density/uniformity table over a list of N")
    p.add_argument("--torus-set")
    p.add_argument("--slab")
    p.add_argument("--diag")
    p.add_argument("--const")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--spec")
    p.add_argument("--N-list", required=True)
    p.add_argument("--reference")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_converge)

    p = sub.add_parser("extract", help="randomized extraction of an interval coloring")
    p.add_argument("--torus-set")
    p.add_argument("--slab")
    p.add_argument("--diag")
    p.add_argument("--const")
    p.add_argument("--alpha", required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--attempts", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("pipeline", help="end-to-end construction with certificate")
    p.add_argument("--name", required=True,
                   choices=["thm2_6", "thm2_7", "thm2_5", "lemma7_10"])
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--k", type=int)
    p.add_argument("--spec", help="offsets for lemma7_10")
    p.add_argument("--base-n", type=int, default=1, help="base modulus for thm2_5")
    p.add_argument("--base-coloring", help="coloring file overriding the bundled base")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(fn=cmd_pipeline)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors already
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (FormatError, BudgetExceededError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

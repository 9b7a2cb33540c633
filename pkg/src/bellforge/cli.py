"""Command-line front end.

JSON in, JSON out: every output file embeds a run manifest and is written
canonically (17-significant-digit floats, stable key order), so fixed-seed
reruns are byte-identical. Exit codes: 0 success, 2 validation error,
3 numeric failure.
"""

import argparse
import os
import sys

from . import certificates, search as search_mod
from .bargmann import ConditionalState, DetectionPattern, four_photon_terms, postselect
from .circuit import CircuitSpec, GaussianBargmann, compile_circuit, gaussian_state
from .crosscheck import oracle_diff
from .entanglement import BellTarget, bell_fidelity
from .errors import NumericError, SchemaViolation, ValidationError
from .manifest import build_manifest, load_json, write_output

__all__ = ["main"]


def _parse_int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x != "")
    except ValueError as exc:
        raise SchemaViolation(f"expected comma-separated integers, got {text!r}") from exc


def _thread_count(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("BELLFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise SchemaViolation(f"BELLFORGE_THREADS={env!r} is not an integer") from exc
    return os.cpu_count() or 1


def _load_state(path):
    return GaussianBargmann.from_json_obj(load_json(path))


def _pattern_for(state, detected, output):
    return DetectionPattern.standard(state.n_modes, detected, output=output)


def _humanize_seconds(seconds):
    if seconds < 60.0:
        return f"{seconds:.2f} seconds/event"
    if seconds < 3600.0:
        return f"{seconds / 60.0:.2f} minutes/event"
    if seconds < 48.0 * 3600.0:
        return f"{seconds / 3600.0:.2f} hours/event"
    return f"{seconds / 86400.0:.2f} days/event"


def _cmd_simulate(args):
    spec = CircuitSpec.from_json_obj(load_json(args.circuit))
    state = gaussian_state(compile_circuit(spec))
    manifest = build_manifest("simulate", {"circuit": args.circuit}, inputs=[args.circuit])
    write_output(args.out, state.to_json_obj(), manifest, pretty=args.pretty)
    print(f"wrote state: {state.n_modes} modes, xi_scale = {state.xi_scale:.6g}")
    return 0


def _cmd_postselect(args):
    state = _load_state(args.state)
    detected = _parse_int_list(args.detect)
    output = _parse_int_list(args.output_modes) if args.output_modes else None
    cond = postselect(state, _pattern_for(state, detected, output))
    manifest = build_manifest(
        "postselect",
        {"state": args.state, "detect": list(detected)},
        inputs=[args.state],
    )
    write_output(args.out, cond.to_json_obj(), manifest, pretty=args.pretty)
    print(f"conditional degree {cond.poly.max_degree}, {len(cond.poly.terms)} terms")
    return 0


def _cmd_entangle(args):
    cond = ConditionalState.from_json_obj(load_json(args.conditional))
    target = BellTarget(target=args.target.replace("-", "_"))
    report = bell_fidelity(cond, target, cutoff=args.cutoff)
    manifest = build_manifest(
        "entangle",
        {"conditional": args.conditional, "target": args.target, "cutoff": args.cutoff},
        inputs=[args.conditional],
    )
    write_output(args.report, report.to_json_obj(), manifest, pretty=args.pretty)
    print(f"bell_fidelity = {report.bell_fidelity:.12g}")
    return 0


def _cmd_certify(args):
    state = _load_state(args.state)
    detected = _parse_int_list(args.detect)
    output = _parse_int_list(args.output_modes) if args.output_modes else None
    cert = certificates.certify_two_photon_nogo(state, detected, output=output)
    manifest = build_manifest(
        "certify", {"state": args.state, "detect": list(detected)}, inputs=[args.state]
    )
    write_output(args.out, cert.to_json_obj(), manifest, pretty=args.pretty)
    print(f"verdict: {cert.verdict} (rank {cert.rank}, |det| = {abs(cert.det):.3e})")
    return 0


def _cmd_four_terms(args):
    state = _load_state(args.state)
    detected = _parse_int_list(args.detect)
    output = _parse_int_list(args.output_modes) if args.output_modes else None
    pattern = _pattern_for(state, detected, output)
    terms = four_photon_terms(state, pattern)
    payload = {
        "detected": list(pattern.detected),
        "terms": [
            {
                "pairs": [list(p) for p in t.pairs],
                "singles": list(t.singles),
                "poly": t.poly.to_json_terms(),
            }
            for t in terms
        ],
    }
    manifest = build_manifest(
        "four-terms", {"state": args.state, "detect": list(detected)}, inputs=[args.state]
    )
    if args.out:
        write_output(args.out, payload, manifest, pretty=args.pretty)
    else:
        from .manifest import dumps_canonical

        print(dumps_canonical(payload, indent=2))
    return 0


def _cmd_search(args):
    cfg = search_mod.SearchConfig.from_json_obj(load_json(args.config))
    threads = _thread_count(args)
    result = search_mod.optimize(cfg, threads=threads)
    manifest = build_manifest(
        "search",
        cfg.to_json_obj(),
        seed=cfg.seed,
        inputs=[args.config],
        deterministic=True,
    )
    write_output(args.out, result.to_json_obj(), manifest, pretty=args.pretty)
    if args.trace_csv:
        with open(args.trace_csv, "w", encoding="utf-8") as fh:
            fh.write("eval_index,best_fidelity\n")
            for idx, fid in result.trace:
                fh.write(f"{idx},{fid!r}\n")
    print(
        f"best fidelity {result.best_fidelity:.12g} "
        f"({cfg.budget} evaluations, {result.wall_time:.1f} s wall)",
        file=sys.stderr,
    )
    return 0


def _cmd_rate(args):
    per_second, seconds_per = search_mod.rate_estimate(
        args.xi2, args.rep_rate, args.pairs, args.efficiency
    )
    print(f"events_per_second: {per_second!r}")
    print(f"seconds_per_event: {seconds_per!r}")
    print(_humanize_seconds(seconds_per))
    return 0


def _cmd_oracle_diff(args):
    spec = CircuitSpec.from_json_obj(load_json(args.circuit))
    patterns = []
    if args.detect:
        detected = _parse_int_list(args.detect)
        patterns.append(DetectionPattern.standard(spec.n_modes, detected))
    report = oracle_diff(spec, args.cutoff, patterns=patterns)
    print(f"max amplitude diff = {report['max_abs_diff']:.3e} (cutoff {args.cutoff})")
    print(f"normalization modulus error = {report['ratio_modulus_error']:.3e}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bellforge",
        description="Post-selected linear-optical entanglement: simulation and certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        for flag, kwargs in flags.items():
            p.add_argument(flag, **kwargs)
        p.add_argument("--pretty", action="store_true", help="indent output JSON")
        p.set_defaults(fn=fn)
        return p

    add(
        "simulate",
        _cmd_simulate,
        **{"--circuit": {"required": True}, "--out": {"required": True}},
    )
    add(
        "postselect",
        _cmd_postselect,
        **{
            "--state": {"required": True},
            "--detect": {"required": True},
            "--out": {"required": True},
            "--output-modes": {"default": None},
        },
    )
    add(
        "entangle",
        _cmd_entangle,
        **{
            "--conditional": {"required": True},
            "--target": {"default": "psi-minus"},
            "--report": {"required": True},
            "--cutoff": {"type": int, "default": 12},
        },
    )
    add(
        "certify",
        _cmd_certify,
        **{
            "--state": {"required": True},
            "--detect": {"required": True},
            "--out": {"required": True},
            "--output-modes": {"default": None},
        },
    )
    add(
        "four-terms",
        _cmd_four_terms,
        **{
            "--state": {"required": True},
            "--detect": {"required": True},
            "--out": {"default": None},
            "--output-modes": {"default": None},
        },
    )
    add(
        "search",
        _cmd_search,
        **{
            "--config": {"required": True},
            "--out": {"required": True},
            "--threads": {"type": int, "default": None},
            "--trace-csv": {"default": None},
        },
    )
    add(
        "rate",
        _cmd_rate,
        **{
            "--xi2": {"type": float, "required": True},
            "--rep-rate": {"type": float, "required": True},
            "--pairs": {"type": int, "required": True},
            "--efficiency": {"type": float, "default": 1.0},
        },
    )
    add(
        "oracle-diff",
        _cmd_oracle_diff,
        **{
            "--circuit": {"required": True},
            "--cutoff": {"type": int, "required": True},
            "--detect": {"default": None},
        },
    )
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""``convexp`` command line.

Exit codes: 0 ok, 1 check failure, 2 usage error, 3 I/O error,
4 numerical-domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ca, checks, kernels as kn, spectral as sp
from .config import ConfigError, build_run, load_kernel_source, load_run_config
from .export import csv_text, pgm_bytes
from .field import CfldFormatError, NumericalDomainError, load_fields, parse_shape, save_field, write_cfld
from .lift import DEFAULT_CAP
from .rnn import StepError, run

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


def _kernel(args) -> np.ndarray:
    shape = parse_shape(args.shape) if args.shape else None
    src = args.kernel
    if not Path(src).exists() and shape is None:
        shape = (16,)
    return load_kernel_source(src, shape, args.seed)


def _summary(K) -> str:
    tags = ",".join(kn.classify(K)) or "general"
    shape = "x".join(str(e) for e in K.shape)
    return f"shape={shape} sum={complex(K.sum()):.6g} classes={tags}"


def cmd_gen_kernel(args) -> int:
    src = args.stencil
    shape = parse_shape(args.shape)
    if Path(src).exists():
        K = kn.embed(kn.parse_core(Path(src).read_text()), shape)
    else:
        K = kn.builtin_kernel(src, shape, args.seed)
    save_field(args.out, K)
    print(_summary(K))
    return EXIT_OK


def _print_moments(K) -> None:
    m2 = sp.second_moments(K).real
    print(" ".join(f"second_moment[{i}]={v:.9f}" for i, v in enumerate(m2)))


def cmd_exp(args) -> int:
    K = _kernel(args)
    E = sp.conv_exp(K, args.t)
    save_field(args.out, E)
    print(_summary(E))
    if args.moments:
        _print_moments(E)
    return EXIT_OK


def cmd_trig(args) -> int:
    K = _kernel(args)
    c, s = sp.conv_cos(K, args.t), sp.conv_sin(K, args.t)
    save_field(f"{args.out}.cos.cfld", c)
    save_field(f"{args.out}.sin.cfld", s)
    print(f"cos: {_summary(c)}")
    print(f"sin: {_summary(s)}")
    if args.moments:
        _print_moments(c)
    return EXIT_OK


def cmd_bipartite(args) -> int:
    K = _kernel(args)
    b = sp.bipartite_exp(K, args.t)
    for name in ("xx", "xp", "px", "pp"):
        save_field(f"{args.out}.{name}.cfld", getattr(b, name))
    print(f"t={args.t:g} max|xp + px|={float(np.max(np.abs(b.xp + b.px))):.3e}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    plan = build_run(cfg)
    traj = run(plan.recurrence, plan.initial, plan.steps, plan.record)
    if plan.norms_path is not None:
        plan.norms_path.write_text(traj.norm_csv())
    if plan.states_path is not None:
        with open(plan.states_path, "wb") as fh:
            for st in traj.states:
                write_cfld(fh, st.as_field())
    ratio = traj.norms[-1] / traj.norms[0] if traj.norms[0] else float("nan")
    print(json.dumps({"model": plan.recurrence.model, "steps": plan.steps,
                      "initial_norm": traj.norms[0], "final_norm": traj.norms[-1], "ratio": ratio}))
    return EXIT_OK


def cmd_check(args) -> int:
    reports = checks.run_checks(args.scope, args.cap)
    for r in reports:
        print(r.to_text() if args.text else r.to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_export(args) -> int:
    fields = load_fields(args.field)
    if not fields:
        raise CfldFormatError(f"{args.field}: no records")
    f = fields[args.index]
    if args.format == "pgm":
        Path(args.out).write_bytes(pgm_bytes(f, use_abs=args.abs, center=args.center))
    else:
        Path(args.out).write_text(csv_text(f))
    return EXIT_OK


def cmd_ca(args) -> int:
    cfg = ca.EmbeddingConfig(args.variant, args.sigma)
    rep = ca.stability_experiment(args.length, args.steps, args.noise, args.trials, cfg, args.seed, args.jobs)
    print(rep.to_json())
    if args.pgm:
        rng = np.random.default_rng(args.seed)
        row = rng.integers(0, 2, args.length).astype(float)
        Path(args.pgm).write_bytes(pgm_bytes(ca.space_time(row, args.steps, cfg)))
    return EXIT_OK


def _kernel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("kernel", help="builtin stencil name, .cfld kernel file, or kernel-core text file")
    p.add_argument("shape", nargs="?", help="grid shape such as 64x64 (not needed for .cfld)")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convexp", description="Convolutional exponentials and unitary/orthogonal convolutional RNNs.")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for independent trials")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-kernel", help="write a full-grid kernel")
    p.add_argument("stencil", help=f"one of {', '.join(kn.BUILTINS)} or a kernel-core file")
    p.add_argument("shape")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default="kernel.cfld")
    p.set_defaults(func=cmd_gen_kernel)

    p = sub.add_parser("exp", help="convolutional exponential exp(tK)")
    _kernel_args(p)
    p.add_argument("--moments", action="store_true", help="print per-axis second moments")
    p.add_argument("-o", "--out", default="exp.cfld")
    p.set_defaults(func=cmd_exp)

    p = sub.add_parser("trig", help="convolutional cosine and sine")
    _kernel_args(p)
    p.add_argument("--moments", action="store_true")
    p.add_argument("-o", "--out", default="trig", help="output prefix")
    p.set_defaults(func=cmd_trig)

    p = sub.add_parser("bipartite", help="four-kernel orthogonal X/P block")
    _kernel_args(p)
    p.add_argument("-o", "--out", default="bipartite", help="output prefix")
    p.set_defaults(func=cmd_bipartite)

    p = sub.add_parser("run", help="roll out a cuRNN/coRNN from a config file")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="run the invariant catalog")
    p.add_argument("scope", nargs="?", default="all", choices=("all",) + checks.SCOPES)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest lifted matrix size")
    p.add_argument("--text", action="store_true", help="human-readable lines instead of JSON")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("export", help="export a CFLD field as CSV or PGM")
    p.add_argument("field")
    p.add_argument("--format", choices=("csv", "pgm"), default="csv")
    p.add_argument("--abs", action="store_true", help="PGM of the modulus instead of the real part")
    p.add_argument("--center", action="store_true", help="move the origin to the image centre")
    p.add_argument("--index", type=int, default=0, help="record index in a CFLD sequence")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("ca", help="Rule 110 embedding stability experiment")
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--variant", choices=("table-map", "sigmoid-product"), default="table-map")
    p.add_argument("--sigma", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pgm", help="write a space-time diagram of one embedded run")
    p.set_defaults(func=cmd_ca)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalDomainError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StepError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc.cause, NumericalDomainError) else EXIT_USAGE
    except (CfldFormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

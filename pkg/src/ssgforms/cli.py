"""Command line: ``ssgforms {net,seq,exp} <command> [flags]``.

Exit status: 0 success, 1 an experiment row failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass


from . import engine, experiments
from . import mp_sequence as mps
from . import topology as tp
from .experiments import fmt
from .functions import function_from_spec
from .network import build_ssg, form_components, energy

DEFAULT_SEQ = '{"family":"geometric","c":0.5,"q":0.5}'


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


@dataclass
class RunConfig:
    seq: mps.MatchingSequence
    m: int | None
    n: int
    func: dict | None
    out: str | None
    format: str
    tol: float | None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        seq = mps.parse_sequence(args.seq)
        func = None
        if getattr(args, "func", None):
            try:
                func = json.loads(args.func)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--func: malformed JSON ({exc.msg})") from exc
        m = getattr(args, "m", None)
        if m is not None:
            tp.check_level(m)
        n = getattr(args, "n", 1)
        if n < 1:
            raise ConfigError("--n must be >= 1")
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        return cls(seq, m, n, func, args.out, args.format, args.tol)


def _table(columns, rows, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps({"columns": columns, "rows": rows}, indent=2) + "\n"
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return out.getvalue()


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- handlers -------------------------------------------------------------------


def _net_build(args, cfg):
    net = build_ssg(cfg.seq, args.m, cfg.n)
    if cfg.format == "json":
        rows = [[str(a), str(b), c, str(t)] for (a, b, c), t in zip(net.edges(), net.tags)]
        return _table(["u", "v", "conductance", "tag"], rows, "json"), 0
    return net.to_csv(), 0


def _net_trace(args, cfg):
    if not 0 <= args.onto <= args.m:
        raise ConfigError(f"--onto must be between 0 and --m ({args.m})")
    tf = engine.trace(build_ssg(cfg.seq, args.m, cfg.n), tp.vertex_set(args.onto))
    if cfg.format == "json":
        return json.dumps({"boundary": [str(v) for v in tf.boundary], "matrix": tf.matrix.tolist()}, indent=2) + "\n", 0
    return tf.to_csv(), 0


def _net_resistance(args, cfg):
    net = build_ssg(cfg.seq, args.m, cfg.n)
    a, b = tp.Address.parse(getattr(args, "from")), tp.Address.parse(args.to)
    for v in (a, b):
        if v not in net.index:
            raise ConfigError(f"address {v} is not a vertex of V_{args.m}")
    r = engine.effective_resistance(net, a, b)
    if cfg.format == "json":
        return json.dumps({"from": str(a), "to": str(b), "resistance": r}) + "\n", 0
    return fmt(r) + "\n", 0


def _net_diameter(args, cfg):
    d = engine.resistance_diameter(build_ssg(cfg.seq, args.m, 1))
    if cfg.format == "json":
        return json.dumps({"m": args.m, "diameter": d}) + "\n", 0
    return fmt(d) + "\n", 0


def _net_energy(args, cfg):
    if cfg.func is None:
        raise ConfigError("net energy needs --func")
    f = function_from_spec(cfg.func, args.m, cfg.n)
    fc = form_components(cfg.seq, args.m, f)
    rows = [["network_energy", energy(build_ssg(cfg.seq, args.m, cfg.n), f)], ["q_sigma", fc.q_sigma]]
    rows += [[f"q_line_{k + 1}", float(x)] for k, x in enumerate(fc.q_line)]
    rows += [[f"d_line_{k + 1}", float(x)] for k, x in enumerate(fc.d_line)]
    rows += [["total", fc.total]]
    return _table(["quantity", "value"], rows, cfg.format), 0


def _seq_derive(args, cfg):
    rows = []
    for m in range(1, args.m + 1):
        d = mps.derive(cfg.seq, m)
        rows.append([m, d.r, d.rho, d.delta, d.gamma, d.P, d.eta])
    return _table(["m", "r", "rho", "delta", "gamma", "P", "eta"], rows, cfg.format), 0


def _seq_project(args, cfg):
    sig = mps.project(cfg.seq, args.terms)
    rows = [[m, p.r, p.rho] for m, p in enumerate(sig.pairs(args.terms), start=1)]
    return _table(["m", "s", "sigma"], rows, cfg.format), 0


def _run_experiment(name):
    def handler(args, cfg):
        seq = cfg.seq
        if name == "compat":
            rep = experiments.exp_compat_chain(seq, args.mmax, args.break_at)
        elif name == "sgpart":
            rep = experiments.exp_sg_part(seq, args.boundary, args.mmax)
        elif name == "decomp":
            rep = experiments.exp_decomposition(seq, args.m, cfg.n)
        elif name == "projection":
            rep = experiments.exp_projection(seq, args.terms)
        elif name == "diameter":
            rep = experiments.exp_diameter(seq, args.mmax)
        else:
            rep = experiments.exp_symmetry(seq, args.m, args.seed, cfg.n)
        if cfg.tol is not None:
            rep = rep.with_tolerance(cfg.tol)
        text = rep.to_json() + "\n" if cfg.format == "json" else rep.to_csv()
        return text, 0 if rep.passed else 1

    return handler


def _boundary(text: str):
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"boundary must be three comma-separated numbers, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("boundary needs exactly three values")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seq", default=DEFAULT_SEQ, help="matching sequence as JSON")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, help="override the abs/rel row tolerance")

    parser = _Parser(prog="ssgforms", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    net = groups.add_parser("net", help="network operations").add_subparsers(dest="cmd", required=True)
    p = net.add_parser("build", parents=[common], help="edge list of E_{R,m}")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(handler=_net_build)
    p = net.add_parser("trace", parents=[common], help="trace onto V_k as a conductance matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--onto", type=int, default=0, help="target level k")
    p.set_defaults(handler=_net_trace)
    p = net.add_parser("resistance", parents=[common], help="effective resistance between two addresses")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--from", required=True, help="address 'w:i'")
    p.add_argument("--to", required=True, help="address 'w:i'")
    p.set_defaults(handler=_net_resistance)
    p = net.add_parser("diameter", parents=[common], help="resistance diameter of V_m")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(handler=_net_diameter)
    p = net.add_parser("energy", parents=[common], help="form components of a function spec")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--func", required=True, help="function spec as JSON")
    p.set_defaults(handler=_net_energy)

    seq = groups.add_parser("seq", help="sequence calculus").add_subparsers(dest="cmd", required=True)
    p = seq.add_parser("derive", parents=[common], help="derived scales for m = 1..M")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(handler=_seq_derive)
    p = seq.add_parser("project", parents=[common], help="line-part sequence L(R)")
    p.add_argument("--terms", type=int, default=30)
    p.set_defaults(handler=_seq_project)

    exp = groups.add_parser("exp", help="verification experiments").add_subparsers(dest="cmd", required=True)
    p = exp.add_parser("compat", parents=[common])
    p.add_argument("--mmax", type=int, default=4)
    p.add_argument("--break-at", type=int, default=None, help="replace this pair by a non-matching one")
    p.set_defaults(handler=_run_experiment("compat"))
    p = exp.add_parser("sgpart", parents=[common])
    p.add_argument("--mmax", type=int, default=6)
    p.add_argument("--boundary", type=_boundary, default=(1.0, 0.0, 0.0))
    p.set_defaults(handler=_run_experiment("sgpart"))
    p = exp.add_parser("decomp", parents=[common])
    p.add_argument("--m", type=int, default=6)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(handler=_run_experiment("decomp"))
    p = exp.add_parser("projection", parents=[common])
    p.add_argument("--terms", type=int, default=30)
    p.set_defaults(handler=_run_experiment("projection"))
    p = exp.add_parser("diameter", parents=[common])
    p.add_argument("--mmax", type=int, default=4)
    p.set_defaults(handler=_run_experiment("diameter"))
    p = exp.add_parser("symmetry", parents=[common])
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(handler=_run_experiment("symmetry"))
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig.from_args(args)
        text, code = args.handler(args, cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ConfigError, mps.SequenceError, tp.LevelError, ValueError, KeyError, IndexError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"ssgforms: error: {msg}", file=sys.stderr)
        return 2
    _emit(text, cfg)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

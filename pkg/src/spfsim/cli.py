"""Command-line front end.

Exit codes: 0 success, 2 invalid netlist/parameters/arguments, 3 event budget
exceeded.
"""

import argparse
import json
import os
import sys

from .analysis import (
    SPFConfig,
    Unbounded,
    dep_graph,
    discrepancy,
    ev_sweep,
    ev_table_csv,
    k_of_delta,
    least_n_for_delta,
    measure_points,
    spf_check,
)
from .channel import PID, ChannelError, ChannelSpec, Inertial, PiecewiseConstant
from .circuit import (
    CircuitError,
    CnfParams,
    InvalidCircuit,
    ParamViolation,
    build_paper_circuit,
    check,
    load_netlist,
    save_netlist,
)
from .engine import DEFAULT_BUDGET, HorizonExceededBudget, execute
from .signal import SignalError, make_pulse
from .timebase import ParseError, QTime, format_approx, format_time, parse
from .waveform import read_csv, write_csv, write_vcd

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3


class UsageError(ValueError):
    pass


def qtime(text):
    return parse(text.strip())


def qlist(text):
    """Comma-separated times; ``a,b,...,z`` continues the ratio of ``a`` and ``b`` up to ``z``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if "..." not in parts:
        return [qtime(p) for p in parts]
    k = parts.index("...")
    if k < 2 or k != len(parts) - 2:
        raise UsageError("use 'a,b,...,z' for a geometric list")
    head = [qtime(p) for p in parts[:k]]
    last = qtime(parts[-1])
    ratio = head[1] / head[0]
    if ratio <= 0 or ratio == 1:
        raise UsageError("geometric list needs a positive ratio other than 1")
    out = list(head)
    while len(out) < 10 ** 4:
        nxt = out[-1] * ratio
        if (ratio < 1 and nxt < last) or (ratio > 1 and nxt > last):
            break
        out.append(nxt)
    if out[-1] != last:
        raise UsageError(f"{format_time(last)} is not reached by the geometric list")
    return out


def _pulse(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--pulse expects T,Delta")
    return make_pulse(qtime(parts[0]), qtime(parts[1]))


def _delay(args):
    chosen = [x for x in (args.inertial, args.piecewise, args.pid) if x]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --inertial, --piecewise, --pid")
    if args.inertial:
        d0, t0 = args.inertial.split(",")
        return Inertial(qtime(d0), qtime(t0))
    if args.pid:
        vals = args.pid.split(",")
        if len(vals) not in (3, 4):
            raise UsageError("--pid expects tp0,tau,T0[,bits]")
        bits = int(vals[3]) if len(vals) == 4 else 48
        return PID(qtime(vals[0]), qtime(vals[1]), qtime(vals[2]), bits)
    # "thr:val;thr:val;tail"
    pieces = [p for p in args.piecewise.split(";") if p.strip()]
    bps = []
    for p in pieces[:-1]:
        thr, val = p.split(":")
        bps.append((qtime(thr), qtime(val)))
    return PiecewiseConstant(bps, qtime(pieces[-1]))


def _params(text):
    fields = {}
    for item in text.split(","):
        key, _, val = item.partition("=")
        fields[key.strip()] = qtime(val)
    renames = {"eps'": "eps_prime", "epsp": "eps_prime", "delta": "Delta"}
    fields = {renames.get(k, k): v for k, v in fields.items()}
    return CnfParams(**fields)


def cmd_simulate(args):
    c = check(load_netlist(args.netlist))
    if len(c.inputs) > 1:
        raise UsageError("simulate drives a single input port")
    if args.input and args.pulse:
        raise UsageError("give --input or --pulse, not both")
    if args.input:
        s = read_csv(args.input)
    elif args.pulse:
        s = _pulse(args.pulse)
    else:
        raise UsageError("an input waveform (--input or --pulse) is required")
    exe = execute(c, {c.inputs[0]: s} if c.inputs else {}, qtime(args.horizon), args.budget)
    os.makedirs(args.out, exist_ok=True)
    for vid, sig in exe.signals.items():
        write_csv(sig, os.path.join(args.out, f"{vid}.csv"))
    if args.vcd:
        write_vcd(exe.signals, args.vcd, qtime(args.vcd_scale))
    for o in c.outputs:
        print(f"{o}: {len(exe.signals[o]) - 1} event(s), final value {exe.signals[o].final_value}")
    return EXIT_OK


def cmd_build(args):
    kind = args.kind.lower()
    ch = None
    if kind in ("cff", "cnf", "cnc"):
        sem = args.semantics or ("forgetful" if kind == "cff" else "nonforgetful")
        ch = ChannelSpec(sem, _delay(args), args.x)
    params = _params(args.params) if args.params else None
    c = build_paper_circuit(
        kind, ch, params,
        eps=qtime(args.eps) if args.eps else None,
        alpha=qtime(args.alpha) if args.alpha else None,
        case=args.case,
    )
    if args.out:
        save_netlist(c, args.out)
    else:
        sys.stdout.write(c.dumps() + "\n")
    return EXIT_OK


def cmd_spf(args):
    c = check(load_netlist(args.netlist))
    cfg = SPFConfig(
        pulse_lengths=qlist(args.lengths) if args.lengths else None,
        pulse_starts=qlist(args.starts) if args.starts else None,
        horizon=qtime(args.horizon) if args.horizon else None,
        eps_grid=qlist(args.eps_grid) if args.eps_grid else None,
        k_bound=qtime(args.k_bound) if args.k_bound else None,
        guard=qtime(args.guard) if args.guard else None,
        budget=args.budget,
        jobs=args.jobs,
    )
    rep = spf_check(c, cfg)
    text = rep.dumps() + "\n"
    _emit(text, args.out)
    for name, v in rep.verdicts.items():
        print(f"{name}: {v.status}", file=sys.stderr)
    return EXIT_OK


def cmd_discrepancy(args):
    alpha = qtime(args.alpha)
    out = {"alpha": format_time(alpha),
           "discrepancy": [discrepancy(alpha, n).to_json() for n in args.N]}
    if args.deltas:
        table = []
        for d in qlist(args.deltas):
            entry = {"delta": format_time(d)}
            try:
                entry["K"] = k_of_delta(alpha, d, args.budget)
                entry["bound"] = format_time(alpha * entry["K"] + d + 2)
            except Unbounded:
                entry["K"] = None
                entry["bound"] = None
            try:
                entry["N"] = least_n_for_delta(alpha, d, args.budget)
            except Unbounded:
                entry["N"] = None
            table.append(entry)
        out["delta_table"] = table
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_depgraph(args):
    c = check(load_netlist(args.netlist))
    t = qtime(args.time)
    g = dep_graph(c, t)
    margin = g.stability_margin()

    def node(n):
        return [n[0], format_time(n[1])]

    out = {
        "t": format_time(t),
        "root": node(g.root),
        "nodes": sorted((node(n) for n in g.nodes), key=lambda x: (x[0], x[1])),
        "edges": sorted([[kind, node(ref) if kind == "node" else ref, node(parent), k]
                         for (kind, ref), parent, k in g.edges()], key=str),
        "input_leaves": [node(n) for n in g.input_leaves(c)],
        "constant_leaves": g.constant_leaves(),
        "measure_points": [format_time(x) for x in measure_points(c, t)],
        "stability_margin": None if margin is None else format_time(margin),
    }
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_ev_sweep(args):
    alpha = qtime(args.alpha)
    deltas = qlist(args.deltas)
    rows = ev_sweep(alpha, deltas, margin=qtime(args.margin), budget=args.budget)
    _emit(ev_table_csv(rows), args.out)
    for r in rows:
        if isinstance(r.measured_T, QTime):
            print(f"delta={format_approx(r.delta)} K={r.K} bound={format_approx(r.bound)} "
                  f"T={format_approx(r.measured_T)}", file=sys.stderr)
    return EXIT_OK


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser():
    p = argparse.ArgumentParser(prog="spfsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a netlist on an input waveform")
    s.add_argument("--netlist", required=True)
    s.add_argument("--input", help="waveform CSV for the input port")
    s.add_argument("--pulse", help="input pulse as T,Delta")
    s.add_argument("--horizon", required=True)
    s.add_argument("--out", required=True, help="directory for per-vertex CSV files")
    s.add_argument("--vcd", help="also write a VCD file")
    s.add_argument("--vcd-scale", default="1000", help="time multiplier before rounding down")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("build", help="write a netlist for a reference circuit")
    b.add_argument("kind", choices=["cff", "cnf", "cnc", "cev", "fig3"], type=str.lower)
    b.add_argument("--inertial", help="delta0,T0")
    b.add_argument("--piecewise", help="thr:val;...;tail")
    b.add_argument("--pid", help="tp0,tau,T0[,bits]")
    b.add_argument("--semantics", choices=["forgetful", "nonforgetful"])
    b.add_argument("--x", type=int, default=0, choices=[0, 1], help="initial value of c*")
    b.add_argument("--eps")
    b.add_argument("--alpha")
    b.add_argument("--params", help="A=..,B=..,C=..,D=..,E=..,F=..,eps=..,eps_prime=..[,Delta=..]")
    b.add_argument("--case", choices=["case1", "case2.1"])
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    f = sub.add_parser("spf", help="sweep input pulses and report SPF verdicts")
    f.add_argument("--netlist", required=True)
    f.add_argument("--lengths")
    f.add_argument("--starts")
    f.add_argument("--horizon")
    f.add_argument("--eps-grid")
    f.add_argument("--k-bound")
    f.add_argument("--guard")
    f.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--out")
    f.set_defaults(func=cmd_spf)

    d = sub.add_parser("discrepancy", help="discrepancy of {n alpha} and the K/N tables")
    d.add_argument("--alpha", required=True)
    d.add_argument("--N", type=int, nargs="+", required=True)
    d.add_argument("--deltas")
    d.add_argument("--budget", type=int, default=10 ** 6)
    d.add_argument("--out")
    d.set_defaults(func=cmd_discrepancy)

    g = sub.add_parser("depgraph", help="dependence graph and measure points at time t")
    g.add_argument("--netlist", required=True)
    g.add_argument("--time", required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_depgraph)

    e = sub.add_parser("ev-sweep", help="stabilization time table of the eventual filter")
    e.add_argument("--alpha", default="r2")
    e.add_argument("--deltas", required=True)
    e.add_argument("--margin", default="4")
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--out")
    e.set_defaults(func=cmd_ev_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidCircuit as err:
        print("invalid netlist:", file=sys.stderr)
        for v in err.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INVALID
    except ParamViolation as err:
        print("parameter violation:", file=sys.stderr)
        for v in err.violations:
            print(f"  {v.code} {v.message}", file=sys.stderr)
        return EXIT_INVALID
    except HorizonExceededBudget as err:
        print(f"budget exceeded: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ParseError, ChannelError, CircuitError, SignalError,
            ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

"""Dependence graphs, SPF property sweeps, and discrepancy/stabilization tools."""

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import _kernels
from .channel import Semantics
from .circuit import GATE, INPUT, SOURCE, clock_signal
from .engine import DEFAULT_BUDGET, EngineError, execute
from .signal import ZERO_SIGNAL, make_pulse, min_closed_pulse_length, pulses_of
from .timebase import ONE, POS_INF, QTime, ZERO, format_approx, format_time


class NonConstantChannelPresent(ValueError):
    pass


def _q(x):
    return QTime.coerce(x)


# -- dependence graphs --------------------------------------------------------


@dataclass(frozen=True)
class DependenceGraph:
    """``DG(t)`` of a constant-delay circuit.

    ``children[(v, tau)]`` lists, in input order, either ``("node", (u, tau2))``
    or ``("const", x)``.  Node keys do not mention ``t``, so two graphs compare
    equal exactly when they have the same structure.
    """

    t: QTime
    root: tuple
    children: dict

    @property
    def nodes(self):
        return set(self.children) | {ref for kids in self.children.values()
                                     for kind, ref in kids if kind == "node"}

    def input_leaves(self, circuit):
        return sorted((n for n in self.nodes if circuit.vertices[n[0]].role == INPUT),
                      key=lambda n: (n[0], n[1]))

    def constant_leaves(self):
        return sorted({x for kids in self.children.values() for kind, x in kids if kind == "const"})

    def edges(self):
        out = set()
        for parent, kids in self.children.items():
            for k, (kind, ref) in enumerate(kids):
                out.add((("node", ref) if kind == "node" else ("const", ref), parent, k))
        return out

    def stability_margin(self):
        """Smallest positive ``delta(u,v) + tau - t`` over intermediate nodes.

        The graph is unchanged on ``[t, t + margin)``; ``None`` means it never
        changes.
        """
        return self._margin

    def __eq__(self, other):
        if not isinstance(other, DependenceGraph):
            return NotImplemented
        return self.root == other.root and self.children == other.children

    def __hash__(self):
        return hash((self.root, frozenset(self.children)))


def _require_constant(c):
    for e in c.edges.values():
        if e.channel.semantics is not Semantics.CONSTANT:
            raise NonConstantChannelPresent(f"edge {e.id} is not constant-delay")


def dep_graph(c, t, output=None):
    _require_constant(c)
    t = _q(t)
    if t < ZERO:
        raise ValueError("dependence graphs are defined for t >= 0")
    o = output or _single(c.outputs, "output")
    root = (o, ZERO)
    children = {}
    margin = None
    stack = [root]
    while stack:
        node = stack.pop()
        if node in children:
            continue
        v, tau = node
        if c.vertices[v].role in (INPUT, SOURCE):
            continue
        kids = []
        for e in c.in_edges(v):
            reach = tau + e.channel.delay.d
            if reach <= t:
                child = (e.src, reach)
                kids.append(("node", child))
                if child not in children:
                    stack.append(child)
            else:
                kids.append(("const", e.channel.initial_value))
                gap = reach - t
                if margin is None or gap < margin:
                    margin = gap
        children[node] = tuple(kids)
    g = DependenceGraph(t, root, children)
    object.__setattr__(g, "_margin", margin)
    return g


def _single(ids, what):
    if len(ids) != 1:
        raise ValueError(f"expected exactly one {what} port, found {len(ids)}")
    return ids[0]


def measure_points(c, t, output=None):
    t = _q(t)
    g = dep_graph(c, t, output)
    return sorted({t - tau for v, tau in g.input_leaves(c)})


def predict_output(c, s_i, t, output=None, sources=None):
    """Output value at ``t`` from the input's values at the measure points."""
    t = _q(t)
    g = dep_graph(c, t, output)
    sources = dict(sources or {})
    memo = {}

    def leaf(v, tau):
        role = c.vertices[v].role
        if role == INPUT:
            return s_i.value_at(t - tau)
        if v not in sources:
            sources[v] = clock_signal(c.vertices[v].clock, t)
        return sources[v].value_at(t - tau)

    # children always have larger tau, so evaluating in decreasing tau is bottom-up
    for node in sorted(g.nodes, key=lambda n: n[1], reverse=True):
        v, tau = node
        if c.vertices[v].role in (INPUT, SOURCE):
            memo[node] = leaf(v, tau)
            continue
        bits = [memo[ref] if kind == "node" else ref for kind, ref in g.children[node]]
        if c.vertices[v].role == GATE:
            k = 0
            for j, b in enumerate(bits):
                k |= b << j
            memo[node] = int(c.vertices[v].table[k])
        else:
            memo[node] = bits[0]
    return memo[g.root]


# -- SPF sweeps -------------------------------------------------------------------

PASS = "evidence_pass"
FALSIFIED = "falsified"
INAPPLICABLE = "inapplicable"
INCONCLUSIVE = "inconclusive"


@dataclass
class Verdict:
    status: str
    detail: str = ""
    witness: dict = None

    def to_json(self):
        out = {"status": self.status, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class SPFConfig:
    pulse_lengths: list = None
    pulse_starts: list = None
    horizon: QTime = None
    eps_grid: list = None
    k_bound: QTime = None
    guard: QTime = None
    budget: int = DEFAULT_BUDGET
    jobs: int = 1

    def resolved(self):
        lengths = [_q(x) for x in (self.pulse_lengths or default_pulse_lengths())]
        starts = [_q(x) for x in (self.pulse_starts or [ZERO])]
        grid = sorted((_q(x) for x in (self.eps_grid or [Fraction(1, 2 ** j) for j in range(6)])),
                      reverse=True)
        horizon = _q(self.horizon) if self.horizon is not None else _q(60)
        guard = _q(self.guard) if self.guard is not None else _q(4)
        k_bound = _q(self.k_bound) if self.k_bound is not None else None
        return lengths, starts, grid, horizon, guard, k_bound


def default_pulse_lengths(thresholds=(1,)):
    """Pulse lengths bracketing each threshold from both sides, plus a coarse range."""
    out = set()
    for th in thresholds:
        th = _q(th)
        for j in range(7):
            out.add(th / (2 ** j))
            out.add(th * (1 + Fraction(1, 2 ** j)))
    for x in (2, 3, 5):
        out.add(_q(x))
    return sorted(out)


@dataclass
class SweepRow:
    start: QTime
    length: QTime
    output_events: int
    min_pulse: QTime
    last_event: QTime
    final_value: int
    settled: bool
    error: str = None
    pulses: list = field(default_factory=list)

    def to_json(self):
        def fmt(x):
            return None if x is None else format_time(x)
        return {"start": fmt(self.start), "length": fmt(self.length),
                "output_events": self.output_events, "min_pulse": fmt(self.min_pulse),
                "last_event": fmt(self.last_event), "final_value": self.final_value,
                "settled": self.settled, "error": self.error}


@dataclass
class SPFReport:
    verdicts: dict
    eps_witness: QTime
    K_witness: QTime
    Ke_witness: QTime
    eps_e: QTime
    min_output_pulse: QTime
    horizon: QTime
    pulse_lengths: list
    pulse_starts: list
    eps_grid: list
    rows: list = field(default_factory=list)

    def ok(self, *names):
        return all(self.verdicts[n].status == PASS for n in names)

    def to_json(self):
        def fmt(x):
            return None if x is None else format_time(x)
        return {
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "eps_witness": fmt(self.eps_witness),
            "K_witness": fmt(self.K_witness),
            "Ke_witness": fmt(self.Ke_witness),
            "eps_e": fmt(self.eps_e),
            "min_output_pulse": fmt(self.min_output_pulse),
            "horizon": fmt(self.horizon),
            "pulse_lengths": [fmt(x) for x in self.pulse_lengths],
            "pulse_starts": [fmt(x) for x in self.pulse_starts],
            "eps_grid": [fmt(x) for x in self.eps_grid],
            "rows": [r.to_json() for r in self.rows],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def _sweep_one(args):
    c, start, length, horizon, guard, budget = args
    try:
        exe = execute(c, {c.inputs[0]: make_pulse(start, length)}, horizon, budget)
    except EngineError as err:
        return SweepRow(start, length, 0, None, None, 0, False, str(err))
    out = exe.output()
    last = out.last_event_time()
    settled = last is None or last <= horizon - guard
    return SweepRow(start, length, len(out) - 1, min_closed_pulse_length(out), last,
                    out.final_value, settled, pulses=pulses_of(out))


def _pulse_witness(start, length, horizon):
    return {"input": [[format_time(start), format_time(length)]],
            "window": ["0/1+0/1*r2", format_time(horizon)]}


def spf_check(c, cfg=None):
    """Sweep-based SPF verdicts; passing verdicts are evidence, never proofs."""
    cfg = cfg or SPFConfig()
    lengths, starts, grid, horizon, guard, k_bound = cfg.resolved()
    verdicts = {}
    f1 = len(c.inputs) == 1 and len(c.outputs) == 1
    verdicts["F1"] = Verdict(PASS if f1 else FALSIFIED,
                             f"{len(c.inputs)} input port(s), {len(c.outputs)} output port(s)")
    report = SPFReport(verdicts, None, None, None, None, None, horizon, lengths, starts, grid)
    if not f1:
        for name in ("F2", "F3", "F4", "F5", "F6", "F5e"):
            verdicts[name] = Verdict(INAPPLICABLE, "needs exactly one input and one output")
        return report

    try:
        zero = execute(c, {c.inputs[0]: ZERO_SIGNAL}, horizon, cfg.budget).output()
        verdicts["F3"] = (Verdict(PASS, "constant-zero input gives constant-zero output")
                          if zero.is_constant(0) else
                          Verdict(FALSIFIED, f"output {zero!r} for constant-zero input",
                                  {"input": [], "window": ["0/1+0/1*r2", format_time(horizon)]}))
    except EngineError as err:
        verdicts["F3"] = Verdict(INCONCLUSIVE, str(err))

    jobs = [(c, s, L, horizon, guard, cfg.budget) for s in starts for L in lengths]
    if cfg.jobs and cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    report.rows = rows
    failed = [r for r in rows if r.error]
    verdicts["F2"] = (Verdict(PASS, f"{len(rows)} pulse executions computed") if not failed else
                      Verdict(INCONCLUSIVE, f"{len(failed)} execution(s) hit the event budget",
                              _pulse_witness(failed[0].start, failed[0].length, horizon)))
    good = [r for r in rows if not r.error]

    active = [r for r in good if r.output_events > 0]
    verdicts["F4"] = (Verdict(PASS, f"{len(active)} of {len(good)} pulses reach the output",
                              _pulse_witness(active[0].start, active[0].length, horizon))
                      if active else Verdict(INCONCLUSIVE, "no swept pulse reached the output"))

    closed = [r for r in good if r.min_pulse is not None]
    shortest = min(closed, key=lambda r: r.min_pulse) if closed else None
    report.min_output_pulse = shortest.min_pulse if shortest else None
    if shortest is None:
        report.eps_witness = grid[0]
        verdicts["F5"] = Verdict(PASS, "no closed output pulse in the sweep")
    else:
        fits = [e for e in grid if e <= shortest.min_pulse]
        if fits:
            report.eps_witness = fits[0]
            verdicts["F5"] = Verdict(PASS, f"shortest output pulse {format_approx(shortest.min_pulse)}")
        else:
            verdicts["F5"] = Verdict(
                FALSIFIED,
                f"output pulse of length {format_approx(shortest.min_pulse)} is below every grid epsilon",
                _pulse_witness(shortest.start, shortest.length, horizon))

    unsettled = [r for r in good if not r.settled]
    stab = [max(ZERO, r.last_event - (r.start + r.length)) for r in good if r.last_event is not None]
    report.K_witness = max(stab) if stab else ZERO
    if unsettled:
        w = unsettled[0]
        verdicts["F6"] = Verdict(INCONCLUSIVE, "an output still changes within the guard margin",
                                 _pulse_witness(w.start, w.length, horizon))
    elif k_bound is not None and report.K_witness > k_bound:
        w = max(good, key=lambda r: (r.last_event or ZERO) - r.start - r.length)
        verdicts["F6"] = Verdict(FALSIFIED, f"stabilization {format_approx(report.K_witness)} exceeds K",
                                 _pulse_witness(w.start, w.length, horizon))
    else:
        verdicts["F6"] = Verdict(PASS, f"stabilized within K = {format_approx(report.K_witness)}")

    # eventual variant: short pulses may occur, but only before a common T + K
    report.eps_e = grid[0]
    late = ZERO
    for r in good:
        for s, L in r.pulses:
            if L.is_finite and L < report.eps_e:
                late = max(late, s + L - r.start - r.length)
    report.Ke_witness = late
    if unsettled:
        verdicts["F5e"] = Verdict(INCONCLUSIVE, "an output still changes within the guard margin")
    else:
        verdicts["F5e"] = Verdict(PASS, f"no pulse shorter than {format_approx(report.eps_e)} after "
                                        f"T + {format_approx(late)}")
    return report


# -- discrepancy and stabilization ---------------------------------------------


class Unbounded(ArithmeticError):
    """No finite ``K`` exists (or none was found within the budget)."""


class NotStabilized:
    def __repr__(self):
        return "NOT_STABILIZED"


NOT_STABILIZED = NotStabilized()


def _triple(x):
    x = _q(x)
    if not x.is_finite:
        raise ValueError("expected a finite value")
    return x._p, x._q, x._d


@dataclass
class DiscrepancyReport:
    alpha: QTime
    N: int
    D_N: QTime
    x: QTime
    y: QTime
    x_left_limit: bool
    y_left_limit: bool
    over: bool
    K_table: dict = field(default_factory=dict)
    T_bounds: dict = field(default_factory=dict)

    @property
    def approached(self):
        return self.x_left_limit or self.y_left_limit

    @property
    def ratio(self):
        return self.D_N / self.N

    def to_json(self):
        return {
            "alpha": format_time(self.alpha), "N": self.N, "D_N": format_time(self.D_N),
            "D_N_approx": format_approx(self.D_N), "ratio_approx": format_approx(self.ratio),
            "interval": [format_time(self.x), format_time(self.y)],
            "x_left_limit": self.x_left_limit, "y_left_limit": self.y_left_limit,
            "approached": self.approached, "too_many_points": self.over,
            "K_table": {format_time(k): v for k, v in self.K_table.items()},
            "T_bounds": {format_time(k): format_time(v) for k, v in self.T_bounds.items()},
        }


def discrepancy(alpha, N):
    """``D_N(alpha)`` by scanning the counting function at every point and left limit."""
    if N < 1:
        raise ValueError("N must be positive")
    alpha = _q(alpha)
    a, b, d = _triple(alpha)
    ps, qs = _kernels.sorted_orbit(a, b, d, N)
    vp, vq, xi, yi, xl, yl, over = _kernels.discrepancy_scan(ps, qs, d, N)

    def pos(j):
        if j < 0:
            return ZERO
        if j >= len(ps):
            return ONE
        return QTime._raw(ps[j], qs[j], d)

    return DiscrepancyReport(alpha, N, QTime._raw(vp, vq, d), pos(xi), pos(yi), bool(xl), bool(yl),
                             bool(over))


def discrepancy_bruteforce(alpha, N):
    """Slow cross-check: evaluate ``|A(x,y;N) - (y-x)N|`` over all candidate endpoint pairs.

    Endpoints range over ``{0, 1}`` and the orbit points, each either exactly
    or as a left limit (modelled by counting with ``< q`` instead of ``<= q``).
    """
    alpha = _q(alpha)
    pts = []
    for n in range(1, N + 1):
        f = (alpha * n).frac()
        pts.append(f if f != ZERO else ONE)
    cands = [(ZERO, False), (ONE, False)] + [(p, lim) for p in pts for lim in (False, True)]

    def count(u, lim):
        return sum(1 for p in pts if (p < u if lim else p <= u))

    best = ZERO
    for x, xl in cands:
        for y, yl in cands:
            if y < x or (y == x and not (xl and not yl)):
                continue
            val = abs(_q(count(y, yl) - count(x, xl)) - (y - x) * N)
            best = max(best, val)
    return best


def k_of_delta(alpha, Delta, budget=10 ** 6):
    """Least ``K`` such that every window of length ``Delta`` on the circle holds some ``frac(k alpha)``, ``k <= K``.

    Raises :class:`Unbounded` when no such ``K`` exists or the budget runs out.
    """
    alpha, Delta = _q(alpha), _q(Delta)
    if Delta <= ZERO:
        raise ValueError("Delta must be positive")
    if Delta >= ONE:
        return 0
    a, b, d = _triple(alpha)
    if b == 0:
        # rational alpha: the orbit repeats after its denominator, so stop there
        budget = min(budget, Fraction(a, d).denominator)
    tp, tq, td = _triple(Delta)
    K = _kernels.max_gap_search(a, b, d, tp, tq, td, budget)
    if K < 0:
        raise Unbounded(f"no K <= {budget} for alpha={alpha}, Delta={Delta}")
    return K


def k_of_delta_sampled(alpha, Delta, samples):
    """Reference for :func:`k_of_delta` using the window formulation at sample points ``t``.

    For each ``K`` checks that every sampled ``t`` has some ``k <= K`` with
    ``k alpha`` in ``(t - Delta, t] + Z``.  Sampling only yields a lower bound.
    """
    alpha, Delta = _q(alpha), _q(Delta)
    K = 0
    pts = [ZERO]
    while True:
        if all(any(((t - p).frac() < Delta) for p in pts) for t in samples):
            return K
        K += 1
        pts.append((alpha * K).frac())


def stabilization_bound(alpha, Delta, budget=10 ** 6):
    alpha, Delta = _q(alpha), _q(Delta)
    return alpha * k_of_delta(alpha, Delta, budget) + Delta + 2


def least_n_for_delta(alpha, Delta, budget=10 ** 6):
    """Least ``N`` with ``D_N(alpha)/N < Delta/2``; raises :class:`Unbounded`."""
    a, b, d = _triple(alpha)
    tp, tq, td = _triple(_q(Delta) / 2)
    N, _, _ = _kernels.discrepancy_threshold_search(a, b, d, tp, tq, td, budget)
    if N < 0:
        raise Unbounded(f"D_N/N stayed above Delta/2 up to N = {budget}")
    return N


def measured_stabilization(exe, output_id=None, guard=ZERO, value=1):
    """Time of the last output event when the output settles at ``value``; else ``NOT_STABILIZED``."""
    out = exe.output(output_id)
    if out.final_value != value:
        return NOT_STABILIZED
    last = out.last_event_time()
    if last is None:
        return ZERO
    if exe.horizon - last < _q(guard):
        return NOT_STABILIZED
    return last


def ev_exec_value(alpha, s_i, t):
    """``1`` iff ``s_i(t - (alpha k + l) - 2) = 1`` for some integers ``k, l >= 0``."""
    alpha, t = _q(alpha), _q(t)
    top = t - 2
    if top < ZERO:
        return 0
    runs = pulses_of(s_i)
    if s_i.initial_value == 1:
        first = s_i.events[1].time if len(s_i) > 1 else POS_INF
        runs = [(ZERO, first)] + runs
    k = 0
    while True:
        base = top - alpha * k
        if base < ZERO:
            return 0
        for start, length in runs:
            # need an integer l >= 0 with start <= base - l < start + length
            hi = base - start
            if hi < ZERO:
                continue
            ell = hi.floor()
            if not length.is_finite or _q(ell) > hi - length:
                return 1
        k += 1


def cev_measure_points(alpha, t):
    """``{t - (alpha k + l) - 2 >= 0}``, sorted."""
    alpha, t = _q(alpha), _q(t)
    out = []
    k = 0
    while t - 2 - alpha * k >= ZERO:
        base = t - 2 - alpha * k
        for ell in range(base.floor() + 1):
            out.append(base - ell)
        k += 1
    return sorted(set(out))


@dataclass
class EvRow:
    delta: QTime
    K: int
    bound: QTime
    measured_T: object
    N: int = None

    def csv_row(self):
        m = self.measured_T
        return [format_time(self.delta), self.K, format_time(self.bound),
                format_time(m) if isinstance(m, QTime) else "NOT_STABILIZED"]


def ev_sweep(alpha, deltas, margin=4, budget=DEFAULT_BUDGET, with_n=False):
    """Measured stabilization of the eventual filter against the gap bound, per pulse length."""
    from .circuit import build_paper_circuit

    alpha = _q(alpha)
    c = build_paper_circuit("Cev", alpha=alpha)
    rows = []
    for Delta in deltas:
        Delta = _q(Delta)
        K = k_of_delta(alpha, Delta)
        bound = alpha * K + Delta + 2
        horizon = bound + margin
        exe = execute(c, {"i": make_pulse(ZERO, Delta)}, horizon, budget)
        T = measured_stabilization(exe, "o", guard=margin)
        N = least_n_for_delta(alpha, Delta) if with_n and Delta <= ONE else None
        rows.append(EvRow(Delta, K, bound, T, N))
    return rows


def ev_table_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["delta", "K", "bound", "measured_T"])
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def loglog_slope(rows):
    """Least-squares slope of ``log T`` against ``log Delta``."""
    xs = [math.log(float(r.delta)) for r in rows]
    ys = [math.log(float(r.measured_T)) for r in rows]
    return statistics.linear_regression(xs, ys).slope

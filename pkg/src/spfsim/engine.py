"""Compute the execution of a validated circuit up to a finite horizon.

The plan condenses the circuit into strongly connected components.  A
component without a cycle is evaluated by applying whole-list channel
transformers to its finished upstream signals.  A component with a cycle can
only contain constant-delay channels, so it runs on a time-ordered event
queue: constant-delay channels never cancel an event once scheduled.

Each vertex ``v`` is computed exactly up to ``req[v]``.  A single-history
channel needs its input exact up to ``req[dst] + max(0, -delta_inf)``: no
input event later than that can create or delete an output event at or before
``req[dst]``.
"""

import heapq
from dataclasses import dataclass, field

import networkx as nx

from .circuit import GATE, INPUT, OUTPUT, SOURCE, check, clock_signal
from .signal import Event, Signal, gate_combine
from .timebase import NEG_INF, QTime, ZERO

DEFAULT_BUDGET = 10 ** 6


class EngineError(RuntimeError):
    pass


class HorizonExceededBudget(EngineError):
    def __init__(self, budget, where):
        super().__init__(f"event budget of {budget} exceeded while computing {where}")
        self.budget = budget
        self.where = where


class ArityMismatch(ValueError):
    pass


class MissingInput(ValueError):
    pass


@dataclass(frozen=True)
class Component:
    members: tuple
    mode: str  # "acyclic" or "loop"


@dataclass(frozen=True)
class ExecutionPlan:
    components: tuple
    # per edge: extra input horizon needed beyond the destination's horizon
    lookback: dict

    def component_of(self, vid):
        for comp in self.components:
            if vid in comp.members:
                return comp
        raise KeyError(vid)


def plan(c):
    """Topologically ordered components and per-channel lookback."""
    g = nx.DiGraph()
    g.add_nodes_from(c.vertices)
    for e in c.edges.values():
        g.add_edge(e.src, e.dst)
    cond = nx.condensation(g)
    order = list(nx.lexicographical_topological_sort(
        cond, key=lambda n: min(list(c.vertices).index(v) for v in cond.nodes[n]["members"])))
    index = {vid: k for k, vid in enumerate(c.vertices)}
    comps = []
    for n in order:
        members = tuple(sorted(cond.nodes[n]["members"], key=index.__getitem__))
        looped = len(members) > 1 or g.has_edge(members[0], members[0])
        comps.append(Component(members, "loop" if looped else "acyclic"))
    lookback = {eid: e.channel.lookback() for eid, e in c.edges.items()}
    return ExecutionPlan(tuple(comps), lookback)


def required_horizons(c, p, horizon):
    """``req[v]``: the time up to which ``s_v`` must be exact."""
    req = {vid: horizon for vid in c.vertices}
    for comp in reversed(p.components):
        level = max(req[v] for v in comp.members)
        for v in comp.members:
            req[v] = level
        for v in comp.members:
            for e in c.in_edges(v):
                if e.src not in comp.members:
                    need = level + p.lookback[e.id]
                    if need > req[e.src]:
                        req[e.src] = need
    return req


@dataclass
class Execution:
    circuit: object
    horizon: QTime
    signals: dict
    channel_outputs: dict
    event_count: int = 0
    req: dict = field(default_factory=dict)

    def __getitem__(self, vid):
        return self.signals[vid]

    def value(self, vid, t):
        t = QTime.coerce(t)
        if t > self.horizon:
            raise ValueError(f"time {t} lies past the horizon {self.horizon}")
        return self.signals[vid].value_at(t)

    def output(self, vid=None):
        if vid is None:
            outs = self.circuit.outputs
            if len(outs) != 1:
                raise ValueError("circuit has more than one output; name it")
            vid = outs[0]
        return self.signals[vid]


def gate_output(table, incoming):
    """Zero-time Boolean combination of the incoming channel outputs."""
    if isinstance(table, str):
        table = [int(ch) for ch in table]
    if len(table) != 1 << len(incoming):
        raise ArityMismatch(f"truth table of size {len(table)} for {len(incoming)} inputs")
    return gate_combine(table, list(incoming))


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spend(self, n, where):
        self.used += n
        if self.used > self.limit:
            raise HorizonExceededBudget(self.limit, where)


def execute(c, inputs, horizon, budget=DEFAULT_BUDGET, validate=True):
    """The unique execution of ``c`` on ``[0, horizon]``."""
    if validate:
        check(c)
    horizon = QTime.coerce(horizon)
    if not horizon.is_finite or horizon < ZERO:
        raise ValueError("horizon must be finite and non-negative")
    missing = [i for i in c.inputs if i not in inputs]
    if missing:
        raise MissingInput(f"no signal for input port(s) {', '.join(missing)}")
    p = plan(c)
    req = required_horizons(c, p, horizon)
    cost = _Budget(budget)
    signals = {}
    chan = {}

    def channel_out(e, limit):
        out = e.channel.apply(signals[e.src]).restrict(limit)
        cost.spend(len(out), e.id)
        chan[e.id] = out
        return out

    for comp in p.components:
        if comp.mode == "loop":
            _run_loop(c, comp, req, signals, chan, channel_out, cost)
            continue
        vid = comp.members[0]
        v = c.vertices[vid]
        if v.role == INPUT:
            s = inputs[vid].restrict(req[vid])
        elif v.role == SOURCE:
            s = clock_signal(v.clock, req[vid])
        else:
            incoming = [channel_out(e, req[vid]) for e in c.in_edges(vid)]
            s = incoming[0] if v.role == OUTPUT else gate_output(v.table, incoming)
        cost.spend(len(s), vid)
        signals[vid] = s

    shown = {vid: s.restrict(horizon) for vid, s in signals.items()}
    shown_chan = {eid: s.restrict(horizon) for eid, s in chan.items()}
    return Execution(c, horizon, shown, shown_chan, cost.used, req)


def _run_loop(c, comp, req, signals, chan, channel_out, cost):
    members = set(comp.members)
    limit = req[comp.members[0]]
    ext = {}
    internal = []
    for vid in comp.members:
        for e in c.in_edges(vid):
            if e.src in members:
                internal.append(e)
            else:
                ext[e.id] = channel_out(e, limit)

    edge_val = {}
    for vid in comp.members:
        for e in c.in_edges(vid):
            edge_val[e.id] = ext[e.id].initial_value if e.id in ext else e.channel.initial_value

    def evaluate(vid):
        v = c.vertices[vid]
        bits = [edge_val[e.id] for e in c.in_edges(vid)]
        if v.role == GATE:
            k = 0
            for j, b in enumerate(bits):
                k |= b << j
            return int(v.table[k])
        return bits[0]

    value = {vid: evaluate(vid) for vid in comp.members}
    events = {vid: [Event(NEG_INF, value[vid])] for vid in comp.members}
    out_internal = {vid: [e for e in c.out_edges(vid) if e.dst in members] for vid in comp.members}

    queue = []
    seq = 0
    for eid, s in ext.items():
        for ev in s.events[1:]:
            heapq.heappush(queue, (ev.time, seq, eid, ev.value))
            seq += 1
    for e in internal:
        # the channel shows s_src(0) from time delta on; a change at 0 is pushed later and wins
        heapq.heappush(queue, (e.channel.delay.d, seq, e.id, value[e.src]))
        seq += 1

    dst_of = {e.id: e.dst for vid in comp.members for e in c.in_edges(vid)}
    while queue and queue[0][0] <= limit:
        t = queue[0][0]
        touched = []
        while queue and queue[0][0] == t:
            _, _, eid, val = heapq.heappop(queue)
            edge_val[eid] = val
            touched.append(dst_of[eid])
        cost.spend(len(touched), "loop " + ",".join(comp.members))
        for vid in dict.fromkeys(touched):
            new = evaluate(vid)
            if new == value[vid]:
                continue
            value[vid] = new
            events[vid].append(Event(t, new))
            for e in out_internal[vid]:
                heapq.heappush(queue, (t + e.channel.delay.d, seq, e.id, new))
                seq += 1

    for vid in comp.members:
        signals[vid] = Signal(events[vid])
    for e in internal:
        chan[e.id] = e.channel.apply(signals[e.src]).restrict(limit)


# -- audit ------------------------------------------------------------------


def audit(exe):
    """Recheck the execution conditions at event times and midpoints.

    Returns a list of ``(vertex, time, expected, found)`` mismatches.
    """
    c = exe.circuit
    H = exe.horizon
    bad = []
    for vid, v in c.vertices.items():
        if v.role in (INPUT, SOURCE):
            continue
        edges = c.in_edges(vid)
        outs = [e.channel.apply(exe.signals[e.src]) for e in edges]
        # inputs are cut at H, so each channel output is exact only up to H - lookback
        top = H - max((e.channel.lookback() for e in edges), default=ZERO)
        times = sorted({t for s in outs + [exe.signals[vid]] for t in s.times()
                        if ZERO <= t <= top} | {ZERO})
        probes = list(times)
        probes += [(a + b) / 2 for a, b in zip(times, times[1:])]
        if times and times[-1] < top:
            probes.append(top)
        for t in probes:
            bits = [s.value_at(t) for s in outs]
            if v.role == GATE:
                k = 0
                for j, b in enumerate(bits):
                    k |= b << j
                want = int(v.table[k])
            else:
                want = bits[0]
            got = exe.signals[vid].value_at(t)
            if want != got:
                bad.append((vid, t, want, got))
    return bad

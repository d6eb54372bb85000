"""Circuit model, validation, clock sources, netlists and the reference circuits.

A circuit is a directed multigraph.  Vertices are input ports, output ports,
Boolean gates and periodic clock sources; every edge carries a channel.
Gate inputs are ordered by edge id (``input_order``), which lets two edges
join the same pair of vertices, as the delayed-AND stage of ``Cnc`` needs.

Truth tables are bitstrings: character ``k`` is the gate output for the input
vector whose bit ``j`` is the value on the ``j``-th ordered input.
"""

import json
from dataclasses import dataclass

import networkx as nx

from .channel import (
    Case,
    ChannelSpec,
    Semantics,
    constant_channel,
    gamma_bracket,
)
from .signal import constant, make_signal
from .timebase import NEG_INF, QTime, ZERO, SQRT2

INPUT = "input"
OUTPUT = "output"
GATE = "gate"
SOURCE = "source"
ROLES = (INPUT, OUTPUT, GATE, SOURCE)

OR2 = "0111"
AND2 = "0001"
OR3 = "01111111"
NOT = "10"
BUF = "01"


class CircuitError(ValueError):
    pass


class InvalidCircuit(CircuitError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ParamViolation(CircuitError):
    """Builder parameters break one or more named assumptions."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def tags(self):
        return [v.code for v in self.violations]


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.subject}: {self.message}"


def _q(x):
    return QTime.coerce(x)


@dataclass(frozen=True)
class ClockSpec:
    period: QTime
    high_intervals: tuple = ()
    phase: QTime = ZERO

    def __post_init__(self):
        object.__setattr__(self, "period", _q(self.period))
        object.__setattr__(self, "phase", _q(self.phase))
        hi = tuple(sorted((_q(o), _q(l)) for o, l in self.high_intervals))
        object.__setattr__(self, "high_intervals", hi)
        if self.period <= ZERO or not self.period.is_finite:
            raise CircuitError("clock period must be positive")
        if self.phase < ZERO:
            raise CircuitError("clock phase must be non-negative")
        end = ZERO
        for off, length in hi:
            if length <= ZERO:
                raise CircuitError("clock high intervals need positive length")
            if off < end:
                raise CircuitError("clock high intervals must be disjoint and sorted")
            end = off + length
        if end > self.period:
            raise CircuitError("clock high intervals must fit in one period")

    def to_json(self):
        return {
            "period": str(self.period),
            "high": [[str(o), str(l)] for o, l in self.high_intervals],
            "phase": str(self.phase),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["period"], tuple(tuple(x) for x in obj.get("high", [])), obj.get("phase", "0"))


def clock_signal(spec, horizon):
    """Materialize the clock waveform on ``[0, horizon]``; value 0 before ``phase``."""
    horizon = _q(horizon)
    if not horizon.is_finite:
        raise CircuitError("clock horizon must be finite")
    raw = [(NEG_INF, 0)]
    if not spec.high_intervals:
        return constant(0)
    k = 0
    while True:
        base = spec.phase + spec.period * k
        if base > horizon:
            break
        for off, length in spec.high_intervals:
            start = base + off
            if start > horizon:
                break
            raw.append((start, 1))
            raw.append((start + length, 0))
        k += 1
    # touching intervals (end of one == start of the next) merge into one high run
    merged = [raw[0]]
    for t, v in raw[1:]:
        if merged[-1][0] == t and merged[-1][1] != v and len(merged) > 1:
            merged.pop()
            continue
        merged.append((t, v))
    return make_signal(merged)


@dataclass(frozen=True)
class Vertex:
    id: str
    role: str
    table: str = None
    clock: ClockSpec = None

    def to_json(self):
        out = {"id": self.id, "role": self.role}
        if self.role == GATE:
            out["table"] = self.table
        if self.role == SOURCE:
            out["clock"] = self.clock.to_json()
        return out

    @classmethod
    def from_json(cls, obj):
        role = obj["role"]
        clock = ClockSpec.from_json(obj["clock"]) if role == SOURCE else None
        return cls(obj["id"], role, obj.get("table"), clock)


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    channel: ChannelSpec

    def to_json(self):
        return {"id": self.id, "from": self.src, "to": self.dst, "channel": self.channel.to_json()}

    @classmethod
    def from_json(cls, obj):
        src, dst = obj["from"], obj["to"]
        return cls(obj.get("id", f"{src}->{dst}"), src, dst, ChannelSpec.from_json(obj["channel"]))


class Circuit:
    """Immutable circuit; build with :class:`CircuitBuilder` or :meth:`from_json`."""

    def __init__(self, vertices, edges, input_order=None, name=None, meta=None):
        self.name = name
        self.meta = dict(meta or {})
        self.vertices = {}
        self._dupes = []
        for v in vertices:
            if v.id in self.vertices:
                self._dupes.append(("vertex", v.id))
            self.vertices[v.id] = v
        self.edges = {}
        for e in edges:
            if e.id in self.edges:
                self._dupes.append(("edge", e.id))
            self.edges[e.id] = e
        self._in = {vid: [] for vid in self.vertices}
        self._out = {vid: [] for vid in self.vertices}
        for e in self.edges.values():
            self._in.setdefault(e.dst, []).append(e.id)
            self._out.setdefault(e.src, []).append(e.id)
        order = dict(input_order or {})
        self.input_order = {}
        for vid in self.vertices:
            self.input_order[vid] = tuple(order.pop(vid, self._in.get(vid, [])))
        self._stray_order = order

    def in_edges(self, vid):
        """Incoming edges of ``vid`` in input order."""
        return [self.edges[eid] for eid in self.input_order[vid]]

    def out_edges(self, vid):
        return [self.edges[eid] for eid in self._out.get(vid, [])]

    def ids(self, role):
        return [vid for vid, v in self.vertices.items() if v.role == role]

    @property
    def inputs(self):
        return self.ids(INPUT)

    @property
    def outputs(self):
        return self.ids(OUTPUT)

    @property
    def gates(self):
        return self.ids(GATE)

    @property
    def sources(self):
        return self.ids(SOURCE)

    def graph(self):
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.vertices)
        for e in self.edges.values():
            g.add_edge(e.src, e.dst, key=e.id)
        return g

    def all_constant_delay(self):
        return all(e.channel.semantics is Semantics.CONSTANT for e in self.edges.values())

    def to_json(self):
        out = {
            "vertices": [v.to_json() for v in self.vertices.values()],
            "edges": [e.to_json() for e in self.edges.values()],
            "input_order": {vid: list(order) for vid, order in self.input_order.items() if order},
        }
        if self.name:
            out["name"] = self.name
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, obj):
        vertices = [Vertex.from_json(v) for v in obj["vertices"]]
        edges = [Edge.from_json(e) for e in obj["edges"]]
        return cls(vertices, edges, obj.get("input_order"), obj.get("name"), obj.get("meta"))

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.vertices == other.vertices and self.edges == other.edges
                and self.input_order == other.input_order)

    def __hash__(self):
        return hash((tuple(self.vertices.items()), tuple(self.edges)))

    def __repr__(self):
        return f"Circuit({self.name or ''} |V|={len(self.vertices)} |E|={len(self.edges)})"


class CircuitBuilder:
    def __init__(self, name=None):
        self.name = name
        self._vertices = []
        self._edges = []
        self._order = {}
        self.meta = {}

    def input(self, vid):
        self._vertices.append(Vertex(vid, INPUT))
        return vid

    def output(self, vid):
        self._vertices.append(Vertex(vid, OUTPUT))
        return vid

    def gate(self, vid, table):
        self._vertices.append(Vertex(vid, GATE, table))
        return vid

    def source(self, vid, clock):
        self._vertices.append(Vertex(vid, SOURCE, clock=clock))
        return vid

    def connect(self, src, dst, channel, eid=None):
        if not isinstance(channel, ChannelSpec):
            channel = constant_channel(channel)
        eid = eid or f"{src}->{dst}"
        self._edges.append(Edge(eid, src, dst, channel))
        return eid

    def order(self, vid, edge_ids):
        self._order[vid] = list(edge_ids)

    def build(self):
        return Circuit(self._vertices, self._edges, self._order, self.name, self.meta)


def validate(c):
    """All structural violations of ``c``; an empty list means valid."""
    out = []
    for kind, ident in c._dupes:
        out.append(Violation("ID", ident, f"duplicate {kind} id"))
    for vid, v in c.vertices.items():
        if v.role not in ROLES:
            out.append(Violation("C1", vid, f"unknown role {v.role!r}"))
    for e in c.edges.values():
        for end in (e.src, e.dst):
            if end not in c.vertices:
                out.append(Violation("REF", e.id, f"edge endpoint {end!r} is not a vertex"))
    for vid in c._stray_order:
        out.append(Violation("REF", vid, "input order given for an unknown vertex"))
    if any(v.code == "REF" for v in out):
        return out

    for vid, v in c.vertices.items():
        indeg = len(c._in[vid])
        if v.role in (INPUT, SOURCE) and indeg != 0:
            out.append(Violation("C4", vid, f"{v.role} has in-degree {indeg}, expected 0"))
        if v.role == OUTPUT and indeg != 1:
            out.append(Violation("C5", vid, f"output port has in-degree {indeg}, expected 1"))
        if v.role == GATE:
            table = v.table or ""
            if len(table) != 1 << indeg or set(table) - {"0", "1"}:
                out.append(Violation("C2", vid, f"truth table {table!r} does not fit {indeg} inputs"))
        order = c.input_order[vid]
        if sorted(order) != sorted(c._in[vid]) or len(set(order)) != len(order):
            out.append(Violation("C6", vid, "input order is not a permutation of the incoming edges"))
        if v.role == SOURCE and v.clock is None:
            out.append(Violation("C1", vid, "clock source without a clock spec"))

    g = c.graph()
    for comp in nx.strongly_connected_components(g):
        for e in c.edges.values():
            if e.src in comp and e.dst in comp and (len(comp) > 1 or e.src == e.dst):
                if e.channel.semantics is not Semantics.CONSTANT:
                    out.append(Violation("CYCLE", e.id,
                                         "a channel on a directed cycle must be constant-delay"))
    return out


def check(c):
    """Raise :class:`InvalidCircuit` unless ``c`` is valid; returns ``c``."""
    problems = validate(c)
    if problems:
        raise InvalidCircuit(problems)
    return c


# -- assumption systems for the clocked filter -----------------------------


@dataclass(frozen=True)
class CnfParams:
    A: QTime
    B: QTime
    C: QTime
    D: QTime
    E: QTime
    F: QTime
    eps: QTime
    eps_prime: QTime
    Delta: QTime = None

    def __post_init__(self):
        for name in ("A", "B", "C", "D", "E", "F", "eps", "eps_prime"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if self.Delta is not None:
            object.__setattr__(self, "Delta", _q(self.Delta))

    @property
    def period(self):
        return self.A + self.B + self.C + self.D

    def to_json(self):
        return {k: (str(getattr(self, k)) if getattr(self, k) is not None else None)
                for k in ("A", "B", "C", "D", "E", "F", "eps", "eps_prime", "Delta")}


def validate_cnf_params(f, case, p):
    """Failed assumptions as :class:`Violation` records tagged ``(i)`` ... ``(vi)``."""
    case = Case(case)
    lim = f.limits()
    dinf, dinfty = lim.inf, lim.infinity
    bad = []

    def need(tag, ok, msg):
        if not ok:
            bad.append(Violation(tag, case.value, msg))

    def d(T):
        return f(T)

    if case is Case.CASE1:
        D_ = p.Delta
        if D_ is None:
            return [Violation("(i)", case.value, "Delta is required")]
        need("(i)", p.C > 0 and p.D > 0 and ZERO < D_ < dinfty
             and d(p.C + p.D - dinf) <= dinfty - D_,
             "C, D > 0, 0 < Delta < delta_inf(ty) and delta(C+D-delta_inf) <= delta_infty - Delta")
        need("(ii)", p.eps > 0 and p.eps_prime > 0 and dinfty - p.eps_prime >= dinf + p.eps + p.C
             and p.eps_prime < D_ / 4,
             "delta_infty - eps' >= delta_inf + eps + C and eps' < Delta/4")
        need("(iii)", p.C + p.eps_prime - dinfty > -dinfty
             and d(p.C + p.eps_prime - dinfty) <= dinf + p.eps,
             "delta(C + eps' - delta_infty) <= delta_inf + eps")
        need("(iv)", p.A == p.B and p.A > max(p.eps_prime, D_, dinfty - dinf)
             and d(p.A - dinfty) >= dinfty - p.eps_prime,
             "A = B > max(eps', Delta, delta_infty - delta_inf) and delta(A - delta_infty) >= delta_infty - eps'")
        need("(v)", p.E == dinfty - D_ and p.F == D_ / 2,
             "E = delta_infty - Delta and F = Delta/2")
    elif case is Case.CASE2_1:
        need("(i)", p.A == p.D and p.A > max(ZERO, dinfty - dinf) and d(p.A - dinfty) == dinfty,
             "A = D > max(0, delta_infty - delta_inf) and delta(A - delta_infty) = delta_infty")
        need("(ii)", p.B > 0 and p.C > 0 and p.eps > 0 and p.B + p.C + p.eps + dinf <= dinfty,
             "B, C, eps > 0 and B + C + eps + delta_inf <= delta_infty")
        need("(iii)", ZERO < p.eps_prime < p.B + p.C, "0 < eps' < B + C")
        need("(iv)", -dinf - p.eps > -dinfty and d(-dinf - p.eps) >= dinfty - p.eps_prime,
             "delta(-delta_inf - eps) >= delta_infty - eps'")
        need("(v)", p.B + p.C - dinfty > -dinfty and d(p.B + p.C - dinfty) <= dinf + p.eps,
             "delta(B + C - delta_infty) <= delta_inf + eps")
        need("(vi)", p.E == p.A + dinfty and p.F == p.B + p.C - p.eps_prime,
             "E = A + delta_infty and F = B + C - eps'")
    else:
        raise CircuitError("the clocked filter covers Case 1 and Case 2.1 only")
    if p.E + p.F > p.period:
        bad.append(Violation("clock", case.value, "E + F must fit in one period"))
    return bad


# -- reference circuits -----------------------------------------------------


def figure3_circuit():
    """OR gate with a feedback loop: input delay 1, loop delay 2, output delay 1."""
    b = CircuitBuilder("fig3")
    b.input("i")
    b.gate("OR", OR2)
    b.output("o")
    b.connect("i", "OR", 1)
    b.connect("OR", "OR", 2)
    b.connect("OR", "o", 1)
    b.order("OR", ["i->OR", "OR->OR"])
    return check(b.build())


def _cff(ch, eps):
    eps = _q(eps)
    if ch is None:
        raise ParamViolation([Violation("channel", "Cff", "a channel c* is required")])
    problems = []
    if ch.semantics is not Semantics.FORGETFUL:
        problems.append(Violation("channel", "Cff", "c* must be a forgetful single-history channel"))
    elif ch.delay.is_constant():
        problems.append(Violation("channel", "Cff", "c* must have a non-constant delay"))
    if eps <= ZERO:
        problems.append(Violation("eps", "Cff", "eps > 0"))
    if not problems:
        lo, _ = gamma_bracket(ch)
        if not eps < lo:
            problems.append(Violation("eps<gamma", "Cff", f"eps < gamma(c*) (eps={eps}, gamma>={lo})"))
    if problems:
        raise ParamViolation(problems)
    b = CircuitBuilder("Cff")
    b.input("i")
    b.gate("OR", OR2)
    b.output("o")
    b.connect("i", "OR", 1)
    b.connect("OR", "OR", constant_channel(eps))
    if ch.initial_value == 0:
        b.connect("OR", "o", ch, "c*")
    else:
        # invert around c* so that the stored value passes through with the right polarity
        b.gate("NOT1", NOT)
        b.gate("NOT2", NOT)
        b.connect("OR", "NOT1", 1)
        b.connect("NOT1", "NOT2", ch, "c*")
        b.connect("NOT2", "o", 1)
    b.order("OR", ["i->OR", "OR->OR"])
    b.meta = {"eps": str(eps)}
    return check(b.build())


def _cnf(ch, params, case=None):
    if ch is None or params is None:
        raise ParamViolation([Violation("params", "Cnf", "channel and CnfParams are required")])
    if ch.semantics is not Semantics.NONFORGETFUL:
        raise ParamViolation([Violation("channel", "Cnf", "c* must be non-forgetful")])
    if ch.initial_value != 0:
        raise ParamViolation([Violation("channel", "Cnf", "c* must have initial value 0")])
    actual = ch.delay.classify()
    if case is not None and Case(case) is not actual:
        raise ParamViolation([Violation("case", "Cnf", f"delay is {actual.value}, not {Case(case).value}")])
    if actual is Case.CASE2_2:
        raise ParamViolation([Violation("case", "Cnf", "Case 2.2 delays need the Cnc circuit")])
    bad = validate_cnf_params(ch.delay, actual, params)
    if bad:
        raise ParamViolation(bad)
    p = params
    P = p.period
    b = CircuitBuilder("Cnf")
    b.input("i")
    b.source("CLK_A", ClockSpec(P, ((ZERO, p.A),)))
    b.source("CLK_C", ClockSpec(P, ((p.A + p.B, p.C),)))
    b.source("CLK_F", ClockSpec(P, ((p.E, p.F),)))
    b.gate("AND2", AND2)
    b.gate("OR", OR2)
    b.gate("AND", AND2)
    b.output("o")
    b.connect("i", "AND2", 1)
    b.connect("CLK_C", "AND2", 1)
    b.connect("CLK_A", "OR", 2)
    b.connect("AND2", "OR", 1)
    b.connect("OR", "AND", ch, "c*")
    b.connect("CLK_F", "AND", 2)
    b.connect("AND", "o", 1)
    b.order("AND2", ["i->AND2", "CLK_C->AND2"])
    b.order("OR", ["CLK_A->OR", "AND2->OR"])
    b.order("AND", ["c*", "CLK_F->AND"])
    b.meta = {"case": actual.value, "params": p.to_json()}
    return check(b.build())


def _cnc(ch, eps):
    if ch is None:
        raise ParamViolation([Violation("channel", "Cnc", "a channel c* is required")])
    if ch.semantics is not Semantics.NONFORGETFUL or ch.initial_value != 0:
        raise ParamViolation([Violation("channel", "Cnc", "c* must be non-forgetful with x = 0")])
    if ch.delay.classify() is not Case.CASE2_2:
        raise ParamViolation([Violation("case", "Cnc", "c* must fall under Case 2.2")])
    lim = ch.delay.limits()
    eps_prime = max(ZERO, lim.minus - lim.inf)
    upper = lim.infinity - lim.inf - eps_prime
    if eps is None:
        eps = upper / 2
    eps = _q(eps)
    if not (ZERO < eps < upper):
        raise ParamViolation([Violation("eps", "Cnc", f"0 < eps < delta_infty - delta_inf - eps' = {upper}")])
    b = CircuitBuilder("Cnc")
    b.input("i")
    b.gate("BUF", BUF)
    b.gate("ANDx", AND2)
    b.gate("OR", OR2)
    b.output("o")
    b.connect("i", "BUF", ch, "c*")
    b.connect("BUF", "ANDx", 1, "BUF->ANDx#1")
    b.connect("BUF", "ANDx", constant_channel(eps_prime + 1), "BUF->ANDx#2")
    b.connect("ANDx", "OR", 1)
    b.connect("OR", "OR", constant_channel(eps))
    b.connect("OR", "o", 1)
    b.order("ANDx", ["BUF->ANDx#1", "BUF->ANDx#2"])
    b.order("OR", ["ANDx->OR", "OR->OR"])
    b.meta = {"eps": str(eps), "eps_prime": str(eps_prime)}
    return check(b.build())


def _cev(alpha):
    alpha = SQRT2 if alpha is None else _q(alpha)
    if alpha <= ZERO:
        raise ParamViolation([Violation("alpha", "Cev", "alpha must be positive")])
    b = CircuitBuilder("Cev")
    b.input("i")
    b.gate("OR", OR3)
    b.output("o")
    b.connect("OR", "OR", constant_channel(alpha), "OR->OR#alpha")
    b.connect("i", "OR", 1)
    b.connect("OR", "OR", 1, "OR->OR#1")
    b.connect("OR", "o", 1)
    b.order("OR", ["OR->OR#alpha", "i->OR", "OR->OR#1"])
    b.meta = {"alpha": str(alpha)}
    return check(b.build())


def build_paper_circuit(kind, channel=None, params=None, *, eps=None, alpha=None, case=None):
    """Build one of ``Cff``, ``Cnf``, ``Cnc``, ``Cev``; raises :class:`ParamViolation`."""
    key = kind.lower()
    if key == "cff":
        return _cff(channel, eps if eps is not None else params)
    if key == "cnf":
        return _cnf(channel, params, case)
    if key == "cnc":
        return _cnc(channel, eps if eps is not None else params)
    if key == "cev":
        return _cev(alpha if alpha is not None else params)
    if key == "fig3":
        return figure3_circuit()
    raise CircuitError(f"unknown circuit kind {kind!r}")


def load_netlist(path):
    with open(path, encoding="utf-8") as fh:
        return Circuit.loads(fh.read())


def save_netlist(c, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(c.dumps())
        fh.write("\n")

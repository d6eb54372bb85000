"""Waveform files: exact CSV (read and write) and a lossy VCD export."""

import csv
import io
from fractions import Fraction

from .signal import make_signal
from .timebase import QTime, format_approx, format_time, parse

CSV_HEADER = ["time", "value", "time_approx"]


def signal_to_csv(s):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for e in s.events:
        w.writerow([format_time(e.time), e.value, format_approx(e.time)])
    return buf.getvalue()


def signal_from_csv(text):
    """Read a waveform CSV; only ``time`` and ``value`` are used."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("waveform CSV has no rows")
    raw = [(parse(r["time"]), int(r["value"])) for r in rows]
    return make_signal(raw)


def write_csv(s, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(signal_to_csv(s))


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        return signal_from_csv(fh.read())


def _vcd_ids():
    k = 0
    while True:
        n = k
        ident = ""
        while True:
            ident = chr(33 + n % 94) + ident
            n = n // 94 - 1
            if n < 0:
                break
        yield ident
        k += 1


def signals_to_vcd(signals, scale=Fraction(1000), timescale="1 ps"):
    """VCD text with each event time multiplied by ``scale`` and rounded down.

    Rounding is lossy: two events closer than ``1/scale`` may land on the same
    tick, in which case the later value wins.
    """
    scale = QTime.coerce(scale)
    ids = dict(zip(signals, _vcd_ids()))
    lines = [f"$timescale {timescale} $end", "$scope module top $end"]
    for name, ident in ids.items():
        lines.append(f"$var wire 1 {ident} {name} $end")
    lines += ["$upscope $end", "$enddefinitions $end"]
    ticks = {}
    for name, s in signals.items():
        for e in s.events[1:]:
            ticks.setdefault(max(0, (e.time * scale).floor()), {})[name] = e.value
    lines.append("#0")
    lines.append("$dumpvars")
    for name, s in signals.items():
        lines.append(f"{ticks.get(0, {}).get(name, s.initial_value)}{ids[name]}")
    lines.append("$end")
    for tick in sorted(ticks):
        if tick == 0:
            continue
        lines.append(f"#{tick}")
        for name, v in ticks[tick].items():
            lines.append(f"{v}{ids[name]}")
    return "\n".join(lines) + "\n"


def write_vcd(signals, path, scale=Fraction(1000), timescale="1 ps"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(signals_to_vcd(signals, scale, timescale))

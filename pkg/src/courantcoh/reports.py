"""Report assembly and rendering.

A report is an ordered list of sections; each section holds key/value rows,
simple tables and pass/fail checks.  The text rendering and the JSON dump
contain identical numbers, and both are byte-deterministic for identical
inputs (sorted keys, no timestamps).
"""

from __future__ import annotations

import json


class Report:
    def __init__(self, title):
        self.title = title
        self.sections = []
        self.failed = False

    def section(self, name):
        sec = ReportSection(name, self)
        self.sections.append(sec)
        return sec

    def ok(self):
        return not self.failed

    # ---- rendering ----

    def to_dict(self):
        return {
            "title": self.title,
            "ok": self.ok(),
            "sections": [s.to_dict() for s in self.sections],
        }

    def render_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def render_text(self):
        lines = [self.title, "=" * len(self.title)]
        for sec in self.sections:
            lines.append("")
            lines.append(f"[{sec.name}]")
            for kind, payload in sec.rows:
                if kind == "kv":
                    k, v = payload
                    lines.append(f"  {k}: {_fmt(v)}")
                elif kind == "check":
                    k, passed, detail = payload
                    mark = "pass" if passed else "FAIL"
                    lines.append(f"  {mark:4s}  {k}" + (f"  ({detail})" if detail else ""))
                elif kind == "table":
                    k, headers, rows = payload
                    lines.append(f"  {k}:")
                    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows
                              else len(str(h)) for i, h in enumerate(headers)]
                    lines.append("    " + "  ".join(str(h).ljust(w)
                                                    for h, w in zip(headers, widths)))
                    for r in rows:
                        lines.append("    " + "  ".join(str(x).ljust(w)
                                                        for x, w in zip(r, widths)))
                elif kind == "note":
                    lines.append(f"  note: {payload}")
        lines.append("")
        lines.append("RESULT: " + ("pass" if self.ok() else "FAIL"))
        return "\n".join(lines)


class ReportSection:
    def __init__(self, name, report):
        self.name = name
        self.report = report
        self.rows = []

    def kv(self, key, value):
        self.rows.append(("kv", (key, value)))

    def check(self, key, passed, detail=""):
        self.rows.append(("check", (key, bool(passed), str(detail))))
        if not passed:
            self.report.failed = True

    def table(self, key, headers, rows):
        self.rows.append(("table", (key, list(headers), [list(r) for r in rows])))

    def note(self, text):
        self.rows.append(("note", str(text)))

    def to_dict(self):
        out = {"name": self.name, "rows": []}
        for kind, payload in self.rows:
            if kind == "kv":
                out["rows"].append({"kind": "kv", "key": payload[0],
                                    "value": _jsonable(payload[1])})
            elif kind == "check":
                out["rows"].append({"kind": "check", "key": payload[0],
                                    "ok": payload[1], "detail": payload[2]})
            elif kind == "table":
                out["rows"].append({"kind": "table", "key": payload[0],
                                    "headers": payload[1],
                                    "rows": [[_jsonable(x) for x in r]
                                             for r in payload[2]]})
            else:
                out["rows"].append({"kind": "note", "text": payload})
        return out


def _fmt(v):
    return str(v)


def format_label(label):
    return "(" + ", ".join(str(x) for x in label) + ")"


def _jsonable(v):
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return str(v)


def betti_section(sec, result):
    """Standard rendering of a CohomologyResult."""
    sec.kv("degrees", f"0..{result.n_max}")
    if result.approximate:
        sec.note("APPROXIMATE: " + "; ".join(result.annotations))
    if result.essential_rank == 0:
        sec.table("dimensions", ["n"] + list(range(result.n_max + 1)),
                  [["dim H^n"] + result.totals()])
    else:
        sec.note(f"essential character modes form a rank-{result.essential_rank} "
                 f"lattice spanned by {result.s_basis}; dimensions below are per "
                 "essential class, uniformly across the lattice")
        rows = []
        for label, dims in sorted(result.nonzero_classes().items()):
            rows.append([format_label(label)] + dims)
        if not rows:
            rows = [["(all classes)"] + [0] * (result.n_max + 1)]
        sec.table("dimensions per class", ["class"] + list(range(result.n_max + 1)),
                  rows)

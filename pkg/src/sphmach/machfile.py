"""The machine text format and the mapping-class-biset JSON format.

Machine files carry a group block, one row per generator in the GAP
session style  name=<w1,...,wd>(cycles),  and optional multicurve and
automorphism blocks:

    group: x1,x2,x3,x4,x5,x6,x7
    relator: x1*x2*x3*x4*x5*x6*x7
    x1=<,x3*x4,x4^-1*x3^-1,x2*x3*x4*x5,x5^-1*x4^-1*x3^-1*x2^-1,x1>(2,3)(4,5)
    ...
    curves: x3*x4, x2*x3*x4*x5
    auto sigma = x1,x2,x3^(x3*x4),x4^(x3*x4),x5,x6,x7

Parsing then printing then parsing is the identity on the canonical
form.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from . import perms
from .words import Word, EPSILON, SphereGroup, Automorphism, reduce_word
from .machine import SphereMachine, WreathElement, BasisChange
from .mcbiset import MappingClassBiset, TableEdge
from .multicurve import Multicurve


class ParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}"
                                          if column is not None else "")
        super().__init__(message + where)


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"-?\d+")


class _WordParser:
    """word ::= factor ("*" factor)* ; factor ::= name ("^" exponent)? ;
    exponent ::= int | name | "(" word ")" """

    def __init__(self, text, index, line=None):
        self.text = text
        self.pos = 0
        self.index = index
        self.line = line

    def error(self, msg):
        raise ParseError(msg, self.line, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_word(self) -> list[int]:
        letters = self.parse_factor()
        while self.peek() == "*":
            self.pos += 1
            letters += self.parse_factor()
        return letters

    def parse_factor(self) -> list[int]:
        self.skip_ws()
        m = _NAME.match(self.text, self.pos)
        if not m:
            self.error(f"expected a generator name, found "
                       f"{self.text[self.pos:self.pos + 8]!r}")
        name = m.group(0)
        if name not in self.index:
            self.error(f"unknown generator {name!r}")
        self.pos = m.end()
        base = [self.index[name]]
        if self.peek() != "^":
            return base
        self.pos += 1
        self.skip_ws()
        m = _INT.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            k = int(m.group(0))
            x = base[0]
            return [x if k > 0 else -x] * abs(k)
        if self.peek() == "(":
            self.pos += 1
            exp = self.parse_word()
            if self.peek() != ")":
                self.error("missing ')' in exponent")
            self.pos += 1
        else:
            exp = self.parse_factor()
        return [-x for x in reversed(exp)] + base + exp

    def expect_end(self):
        self.skip_ws()
        if self.pos < len(self.text):
            self.error(f"unexpected {self.text[self.pos:self.pos + 8]!r}")


def parse_word(text: str, group: SphereGroup, line=None) -> Word:
    p = _WordParser(text, {nm: i + 1 for i, nm in enumerate(group.names)}, line)
    if not text.strip():
        return EPSILON
    w = p.parse_word()
    p.expect_end()
    return group.normal_form(w)


_ROW = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*<(.*)>\s*((?:\([0-9,\s]*\))*)\s*$")
_CYCLE = re.compile(r"\(([0-9,\s]*)\)")


@dataclass
class MachineFile:
    machine: SphereMachine
    curves: Multicurve | None = None
    autos: dict[str, Automorphism] = field(default_factory=dict)

    def __eq__(self, other):
        return (isinstance(other, MachineFile)
                and self.machine == other.machine
                and (self.curves.labels() if self.curves else None)
                == (other.curves.labels() if other.curves else None)
                and self.autos == other.autos)


def _split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def parse_machine_file(text: str) -> MachineFile:
    source_names = None
    relator = None
    orders: dict[str, int] = {}
    target_names = None
    target_relator = None
    degree = None
    rows_raw: list[tuple[str, str, str, int]] = []
    curve_text = None
    auto_raw: list[tuple[str, str, int]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low.startswith("group:"):
            source_names = [x.strip() for x in line[6:].split(",") if x.strip()]
        elif low.startswith("relator:"):
            relator = (line[8:].strip(), ln)
        elif low.startswith("orders:"):
            for item in line[7:].split(","):
                if not item.strip():
                    continue
                if "=" not in item:
                    raise ParseError("orders entries look like name=k", ln)
                nm, k = item.split("=", 1)
                try:
                    orders[nm.strip()] = int(k)
                except ValueError:
                    raise ParseError(f"bad order {k.strip()!r}", ln)
        elif low.startswith("target:"):
            target_names = [x.strip() for x in line[7:].split(",") if x.strip()]
        elif low.startswith("target_relator:"):
            target_relator = (line[15:].strip(), ln)
        elif low.startswith("degree:"):
            degree = int(line[7:].strip())
        elif low.startswith("curves:"):
            curve_text = (line[7:].strip(), ln)
        elif low.startswith("auto "):
            body = line[5:]
            if "=" not in body:
                raise ParseError("automorphism line needs name = images", ln)
            name, images = body.split("=", 1)
            auto_raw.append((name.strip(), images.strip(), ln))
        else:
            m = _ROW.match(line)
            if not m:
                raise ParseError(f"cannot parse line {raw.strip()!r}", ln)
            rows_raw.append((m.group(1), m.group(2), m.group(3), ln))
    if source_names is None:
        raise ParseError("missing 'group:' line")
    if not set(orders) <= set(source_names):
        raise ParseError("orders given for unknown generators")
    rel_line = None
    if relator is not None:
        # the relator line lists each generator once, in cyclic order
        rel_line = [x.strip() for x in relator[0].split("*")]
    try:
        source = SphereGroup(source_names, orders=orders, relator=rel_line)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad group block: {exc}",
                         relator[1] if relator else None)
    if target_names is None:
        target = source
    else:
        target = SphereGroup(target_names)
        if target_relator is not None:
            rel_line = [x.strip() for x in target_relator[0].split("*")]
            target = SphereGroup(target_names, relator=rel_line)
    by_name: dict[str, tuple] = {}
    for name, entries_text, cycles_text, ln in rows_raw:
        if name not in source._index:
            raise ParseError(f"row for unknown generator {name!r}", ln)
        if name in by_name:
            raise ParseError(f"duplicate row for {name!r}", ln)
        entries = [parse_word(e, target, ln)
                   for e in _split_top_level(entries_text)]
        if degree is None:
            degree = len(entries)
        if len(entries) != degree:
            raise ParseError(
                f"row has {len(entries)} entries, declared degree {degree}", ln)
        cycles = []
        for cm in _CYCLE.finditer(cycles_text):
            pts = [int(x) for x in cm.group(1).split(",") if x.strip()]
            if any(not 1 <= p <= degree for p in pts):
                raise ParseError("cycle point outside 1..degree", ln)
            cycles.append(pts)
        try:
            perm = perms.from_cycles(cycles, degree)
        except ValueError as exc:
            raise ParseError(str(exc), ln)
        by_name[name] = (entries, perm)
    missing = [nm for nm in source.names if nm not in by_name]
    if missing:
        raise ParseError(f"missing rows for {', '.join(missing)}")
    rows = [WreathElement(tuple(by_name[nm][0]), by_name[nm][1])
            for nm in source.names]
    machine = SphereMachine(source, target, rows)
    curves = None
    if curve_text is not None:
        reps = [parse_word(x.strip(), source, curve_text[1])
                for x in _split_top_level(curve_text[0])]
        curves = Multicurve(source, reps)
    autos = {}
    for name, images_text, ln in auto_raw:
        images = [parse_word(x, source, ln)
                  for x in _split_top_level(images_text)]
        if len(images) != source.n:
            raise ParseError(
                f"automorphism {name} needs {source.n} images", ln)
        try:
            autos[name] = Automorphism(source, images)
        except ValueError as exc:
            raise ParseError(f"automorphism {name}: {exc}", ln)
    return MachineFile(machine, curves, autos)


def print_machine_file(mf: MachineFile) -> str:
    M = mf.machine
    lines = [f"group: {','.join(M.source.names)}"]
    lines.append("relator: " + "*".join(
        M.source.names[i - 1] for i in M.source.relator))
    finite = [(nm, o) for nm, o in zip(M.source.names, M.source.orders)
              if o is not None]
    if finite:
        lines.append("orders: " + ",".join(f"{nm}={o}" for nm, o in finite))
    if M.target != M.source:
        lines.append(f"target: {','.join(M.target.names)}")
        lines.append("target_relator: " + "*".join(
            M.target.names[i - 1] for i in M.target.relator))
    lines.extend(M.text_rows())
    if mf.curves is not None:
        lines.append("curves: " + ", ".join(mf.curves.labels()))
    for name, a in mf.autos.items():
        lines.append(f"auto {name} = " + ",".join(
            M.source.word_str(w) for w in a.images))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# mapping class biset JSON

def _twist_word_str(alphabet, w) -> str:
    from .mcbiset import twist_word_str

    return twist_word_str(alphabet, w)


def parse_twist_word(text: str, alphabet) -> tuple[int, ...]:
    index = {nm: i + 1 for i, nm in enumerate(alphabet)}
    if not text.strip():
        return EPSILON
    p = _WordParser(text, index)
    w = p.parse_word()
    p.expect_end()
    return reduce_word(w)


def mcb_to_json(mcb: MappingClassBiset) -> dict:
    data: dict = {
        "alphabet": list(mcb.alphabet),
        "basis": list(mcb.basis_names),
        "base": mcb.basis_names[mcb.base],
        "table": [],
    }
    for (gen, k) in sorted(mcb.table, key=lambda e: (e[1], e[0])):
        edge = mcb.table[(gen, k)]
        rec = {
            "gen": gen,
            "from": mcb.basis_names[edge.source],
            "to": mcb.basis_names[edge.target],
        }
        if edge.knitting_word is not None:
            rec["knitting"] = _twist_word_str(mcb.alphabet, edge.knitting_word)
        if edge.knitting_auto is not None:
            G = edge.knitting_auto.group
            rec["knitting_images"] = [G.word_str(w)
                                      for w in edge.knitting_auto.images]
        if edge.basis_change is not None:
            H = mcb.machines[0].target if mcb.machines else None
            rec["basis_change"] = {
                "conjugators": [H.word_str(w)
                                for w in edge.basis_change.conjugators],
                "relabel": [p + 1 for p in edge.basis_change.relabel],
            }
        data["table"].append(rec)
    if mcb.machines is not None:
        M0 = mcb.machines[0]
        data["group"] = {
            "generators": list(M0.source.names),
            "relator": [M0.source.names[i - 1] for i in M0.source.relator],
        }
        data["machines"] = [m.text_rows() for m in mcb.machines]
        data["generators"] = {
            name: [a.group.word_str(w) for w in a.images]
            for name, a in mcb.gens.items()
        }
    return data


def mcb_from_json(data: dict) -> MappingClassBiset:
    alphabet = tuple(data["alphabet"])
    basis = tuple(data["basis"])
    pos = {nm: i for i, nm in enumerate(basis)}
    machines = None
    gens: dict[str, Automorphism] = {}
    group = None
    if "group" in data:
        group = SphereGroup(data["group"]["generators"],
                            relator=data["group"].get("relator"))
        machines = []
        for rows_text in data["machines"]:
            text = "group: " + ",".join(group.names) + "\n" + \
                "relator: " + "*".join(group.names[i - 1]
                                       for i in group.relator) + "\n" + \
                "\n".join(rows_text)
            machines.append(parse_machine_file(text).machine)
        for name, images in data.get("generators", {}).items():
            gens[name] = Automorphism(
                group, [parse_word(w, group) for w in images])
    table: dict[tuple[str, int], TableEdge] = {}
    for rec in data["table"]:
        src, dst = pos[rec["from"]], pos[rec["to"]]
        edge = TableEdge(rec["gen"], src, dst)
        if "knitting" in rec:
            edge.knitting_word = parse_twist_word(rec["knitting"], alphabet)
        if "knitting_images" in rec and group is not None:
            edge.knitting_auto = Automorphism(
                group, [parse_word(w, group) for w in rec["knitting_images"]])
        if "basis_change" in rec and group is not None:
            bc = rec["basis_change"]
            edge.basis_change = BasisChange(
                tuple(parse_word(w, group) for w in bc["conjugators"]),
                tuple(p - 1 for p in bc["relabel"]))
        table[(rec["gen"], src)] = edge
    base = pos[data.get("base", basis[0])]
    return MappingClassBiset(alphabet, basis, table, machines, gens, base)


def load_mcb(path: str) -> MappingClassBiset:
    with open(path) as fh:
        return mcb_from_json(json.load(fh))


def save_mcb(mcb: MappingClassBiset, path: str):
    with open(path, "w") as fh:
        json.dump(mcb_to_json(mcb), fh, indent=1, sort_keys=True)
        fh.write("\n")

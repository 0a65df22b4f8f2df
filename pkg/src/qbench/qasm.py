"""OpenQASM 2.0 subset parser and emitter.

Supported: one quantum register, one classical register, the fixed gate set
(h x y z s sdg t tdg rx ry rz cx cz swap), barrier, and measure. Angle
expressions may use numbers, pi, + - * / and parentheses. OpenQASM 3,
classical control flow, and gate definitions are out of scope.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuits import Circuit, Gate, GateKind
from .errors import QasmError, UnsupportedConstructError

_GATE_NAMES = {
    "h": GateKind.H, "x": GateKind.X, "y": GateKind.Y, "z": GateKind.Z,
    "s": GateKind.S, "sdg": GateKind.SDG, "t": GateKind.T, "tdg": GateKind.TDG,
    "rx": GateKind.RX, "ry": GateKind.RY, "rz": GateKind.RZ,
    "cx": GateKind.CX, "cz": GateKind.CZ, "swap": GateKind.SWAP,
}
_ROTATIONS = {"rx", "ry", "rz"}

_TOKEN_RE = re.compile(
    r"(?P<float>\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<str>\"[^\"]*\")"
    r"|(?P<arrow>->)"
    r"|(?P<punct>[\[\](){},;+\-*/])"
)


@dataclass(frozen=True)
class _Token:
    text: str
    kind: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("//", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(line, pos)
            if not m:
                raise QasmError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
            tokens.append(_Token(m.group(0), m.lastgroup, lineno, pos + 1))
            pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self, expect: str | None = None) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise QasmError(
                f"unexpected end of input{f', expected {expect!r}' if expect else ''}",
                last.line if last else 1, last.col if last else 1,
            )
        if expect is not None and tok.text != expect:
            raise QasmError(f"expected {expect!r}, got {tok.text!r}", tok.line, tok.col)
        self.i += 1
        return tok

    def error(self, message: str) -> QasmError:
        tok = self.peek() or (self.tokens[-1] if self.tokens else None)
        return QasmError(message, tok.line if tok else 1, tok.col if tok else 1)


def _parse_angle(cur: _Cursor) -> float:
    # expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
    # factor := ['-'|'+'] (number | 'pi' | '(' expr ')')
    def factor() -> float:
        tok = cur.peek()
        if tok is None:
            raise cur.error("unexpected end of angle expression")
        if tok.text in ("+", "-"):
            cur.next()
            value = factor()
            return value if tok.text == "+" else -value
        if tok.text == "(":
            cur.next()
            value = expr()
            cur.next(")")
            return value
        if tok.kind in ("float", "int"):
            cur.next()
            return float(tok.text)
        if tok.text == "pi":
            cur.next()
            return math.pi
        raise cur.error(f"bad angle token {tok.text!r}")

    def term() -> float:
        value = factor()
        while (tok := cur.peek()) is not None and tok.text in ("*", "/"):
            cur.next()
            rhs = factor()
            if tok.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise cur.error("division by zero in angle expression")
                value /= rhs
        return value

    def expr() -> float:
        value = term()
        while (tok := cur.peek()) is not None and tok.text in ("+", "-"):
            cur.next()
            rhs = term()
            value = value + rhs if tok.text == "+" else value - rhs
        return value

    return expr()


def _parse_index(cur: _Cursor) -> int:
    cur.next("[")
    tok = cur.next()
    if tok.kind != "int":
        raise QasmError(f"expected an index, got {tok.text!r}", tok.line, tok.col)
    cur.next("]")
    return int(tok.text)


def parse_qasm(text: str) -> Circuit:
    """Parse an OpenQASM 2.0 subset program into a greedily layered circuit."""
    cur = _Cursor(_tokenize(text))
    tok = cur.next()
    if tok.text != "OPENQASM":
        raise QasmError("program must start with 'OPENQASM 2.0;'", tok.line, tok.col)
    ver = cur.next()
    if ver.text != "2.0":
        raise QasmError(f"unsupported OpenQASM version {ver.text!r}", ver.line, ver.col)
    cur.next(";")

    qreg_name: str | None = None
    qreg_size = 0
    creg_name: str | None = None
    creg_size = 0
    gates: list[Gate] = []

    def qubit_ref() -> int:
        tok = cur.next()
        if qreg_name is None:
            raise QasmError("quantum register used before declaration", tok.line, tok.col)
        if tok.text != qreg_name:
            raise QasmError(f"unknown register {tok.text!r}", tok.line, tok.col)
        idx = _parse_index(cur)
        if idx >= qreg_size:
            raise QasmError(f"index {idx} out of range for {qreg_name}[{qreg_size}]", tok.line, tok.col)
        return idx

    while (tok := cur.peek()) is not None:
        if tok.text == "include":
            cur.next()
            cur.next()  # the quoted filename; contents are assumed to be qelib1
            cur.next(";")
            continue
        if tok.text in ("qreg", "creg"):
            cur.next()
            name_tok = cur.next()
            if name_tok.kind != "id":
                raise QasmError(f"expected a register name, got {name_tok.text!r}", name_tok.line, name_tok.col)
            size = _parse_index(cur)
            cur.next(";")
            if tok.text == "qreg":
                if qreg_name is not None:
                    raise QasmError("only one quantum register is supported", tok.line, tok.col)
                qreg_name, qreg_size = name_tok.text, size
            else:
                if creg_name is not None:
                    raise QasmError("only one classical register is supported", tok.line, tok.col)
                creg_name, creg_size = name_tok.text, size
            continue
        if tok.text == "measure":
            cur.next()
            reg_tok = cur.next()
            if qreg_name is None or reg_tok.text != qreg_name:
                raise QasmError(f"unknown register {reg_tok.text!r}", reg_tok.line, reg_tok.col)
            broadcast = cur.peek() is not None and cur.peek().text != "["
            if broadcast:
                qubits = list(range(qreg_size))
            else:
                idx = _parse_index(cur)
                if idx >= qreg_size:
                    raise QasmError(f"index {idx} out of range for {qreg_name}[{qreg_size}]",
                                    reg_tok.line, reg_tok.col)
                qubits = [idx]
            cur.next("->")
            ctok = cur.next()
            if creg_name is None or ctok.text != creg_name:
                raise QasmError(f"unknown classical register {ctok.text!r}", ctok.line, ctok.col)
            if broadcast:
                if creg_size != qreg_size:
                    raise QasmError(
                        f"register size mismatch: {qreg_name}[{qreg_size}] -> {creg_name}[{creg_size}]",
                        ctok.line, ctok.col)
                cbits = list(range(creg_size))
            else:
                cidx = _parse_index(cur)
                if cidx >= creg_size:
                    raise QasmError(f"index {cidx} out of range for {creg_name}[{creg_size}]",
                                    ctok.line, ctok.col)
                cbits = [cidx]
            cur.next(";")
            gates.extend(Gate(GateKind.MEASURE, (q,), cbit=c) for q, c in zip(qubits, cbits))
            continue
        if tok.text == "barrier":
            cur.next()
            targets: list[int] = []
            first = cur.peek()
            if first is not None and first.text == qreg_name:
                nxt = cur.tokens[cur.i + 1] if cur.i + 1 < len(cur.tokens) else None
                if nxt is not None and nxt.text != "[":
                    cur.next()
                    targets = list(range(qreg_size))
            if not targets:
                targets.append(qubit_ref())
                while cur.peek() is not None and cur.peek().text == ",":
                    cur.next(",")
                    targets.append(qubit_ref())
            cur.next(";")
            gates.append(Gate(GateKind.BARRIER, tuple(targets)))
            continue
        if tok.kind == "id":
            name = tok.text
            kind = _GATE_NAMES.get(name)
            if kind is None:
                raise QasmError(f"unsupported gate {name!r}", tok.line, tok.col)
            cur.next()
            angle = None
            if name in _ROTATIONS:
                cur.next("(")
                angle = _parse_angle(cur)
                cur.next(")")
            if kind in (GateKind.CX, GateKind.CZ, GateKind.SWAP):
                a = qubit_ref()
                cur.next(",")
                b = qubit_ref()
                if a == b:
                    raise QasmError(f"{name} targets must be distinct", tok.line, tok.col)
                cur.next(";")
                gates.append(Gate(kind, (a, b)))
            else:
                nxt = cur.peek()
                broadcast = (nxt is not None and nxt.text == qreg_name
                             and (cur.i + 1 >= len(cur.tokens) or cur.tokens[cur.i + 1].text != "["))
                if broadcast:
                    cur.next()
                    qs = list(range(qreg_size))
                else:
                    qs = [qubit_ref()]
                cur.next(";")
                gates.extend(Gate(kind, (q,), angle=angle) for q in qs)
            continue
        raise QasmError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    if qreg_name is None:
        raise QasmError("program declares no quantum register", 1, 1)
    return Circuit.from_gates(qreg_size, gates, metadata={"source": "qasm"})


def emit_qasm(circuit: Circuit) -> str:
    """Deterministic OpenQASM 2.0 text for a subset-expressible circuit.

    Pauli layers are lowered to x/y/z gates (the overall sign is a global
    phase); U2Q gates are not expressible and raise.
    """
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    measures = [g for g in circuit.all_gates() if g.kind is GateKind.MEASURE]
    if measures:
        lines.append(f"creg c[{max(g.cbit for g in measures) + 1}];")
    for layer in circuit.layers:
        for g in layer:
            if g.kind is GateKind.U2Q:
                raise UnsupportedConstructError("u2q gates cannot be emitted as OpenQASM 2.0")
            if g.kind is GateKind.MEASURE:
                continue
            if g.kind is GateKind.BARRIER:
                refs = ",".join(f"q[{t}]" for t in g.targets)
                lines.append(f"barrier {refs};")
            elif g.kind is GateKind.PAULI:
                for t, letter in zip(g.targets, g.paulis):
                    if letter != "I":
                        lines.append(f"{letter.lower()} q[{t}];")
            elif g.angle is not None:
                lines.append(f"{g.kind.value}({g.angle!r}) q[{g.targets[0]}];")
            elif len(g.targets) == 2:
                lines.append(f"{g.kind.value} q[{g.targets[0]}],q[{g.targets[1]}];")
            else:
                lines.append(f"{g.kind.value} q[{g.targets[0]}];")
    for g in sorted(measures, key=lambda g: g.cbit):
        lines.append(f"measure q[{g.targets[0]}] -> c[{g.cbit}];")
    return "\n".join(lines) + "\n"

"""Small gate-level IR: registers, gates with polarity controls, circuits."""
from __future__ import annotations

from dataclasses import dataclass, field
import math

KINDS = ("H", "X", "Z", "RY", "SWAP", "INC")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """One gate. ``controls`` holds (qubit, polarity) pairs, polarity True for |1>.

    RY(angle) maps |0> to cos(angle/2)|0> + sin(angle/2)|1>. INC adds ``step``
    (+1 or -1) modulo 2^m to the register ``targets`` (least significant first).
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, bool], ...] = ()
    angle: float = 0.0
    step: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        n_t = {"H": 1, "X": 1, "Z": 1, "RY": 1, "SWAP": 2}.get(self.kind)
        if n_t is not None and len(self.targets) != n_t:
            raise CircuitError(f"{self.kind} takes {n_t} target(s), got {self.targets}")
        if self.kind == "INC" and (not self.targets or self.step not in (1, -1)):
            raise CircuitError("INC needs a nonempty register and step +-1")
        ctrl_q = [q for q, _ in self.controls]
        if len(set(ctrl_q)) != len(ctrl_q) or set(ctrl_q) & set(self.targets):
            raise CircuitError(f"controls must be distinct from each other and the targets: {self}")
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError("repeated target qubit")
        if not math.isfinite(self.angle):
            raise CircuitError("non-finite angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def with_controls(self, extra) -> "Gate":
        return Gate(self.kind, self.targets, self.controls + tuple(extra), self.angle, self.step)

    def to_text(self) -> str:
        kind = self.kind if self.kind != "INC" else ("INC" if self.step == 1 else "DEC")
        s = f"{kind} {','.join(map(str, self.targets))}"
        if self.kind == "RY":
            s += f" @ {self.angle:.17g}"
        if self.controls:
            s += " | " + " ".join(f"ctrl:{'+' if p else '-'}{q}" for q, p in self.controls)
        return s


def X(t, controls=()):
    return Gate("X", (t,), tuple(controls))


def H(t):
    return Gate("H", (t,))


def RY(t, angle, controls=()):
    return Gate("RY", (t,), tuple(controls), float(angle))


def SWAP(a, b, controls=()):
    return Gate("SWAP", (a, b), tuple(controls))


def INC(reg, step=1, controls=()):
    return Gate("INC", tuple(reg), tuple(controls), step=step)


def eq_controls(qubits, value: int) -> list[tuple[int, bool]]:
    """Controls requiring the register (LSB first) to hold ``value``."""
    return [(q, bool((value >> i) & 1)) for i, q in enumerate(qubits)]


@dataclass
class RegisterLayout:
    """Ordered named registers; qubit i is bit i of the basis index."""

    registers: dict[str, tuple[int, int]] = field(default_factory=dict)   # name -> (start, width)
    system: tuple[str, ...] = ()
    _next: int = 0

    def add(self, name: str, width: int, system: bool = False) -> tuple[int, ...]:
        if name in self.registers:
            raise CircuitError(f"register {name!r} already defined")
        if width < 0:
            raise CircuitError("negative register width")
        self.registers[name] = (self._next, width)
        self._next += width
        if system:
            self.system = self.system + (name,)
        return self[name]

    def __getitem__(self, name: str) -> tuple[int, ...]:
        start, width = self.registers[name]
        return tuple(range(start, start + width))

    def __contains__(self, name: str) -> bool:
        return name in self.registers

    def width(self, name: str) -> int:
        return self.registers[name][1] if name in self.registers else 0

    @property
    def n_qubits(self) -> int:
        return self._next

    def system_qubits(self) -> tuple[int, ...]:
        return tuple(q for n in self.system for q in self[n])

    def ancilla_qubits(self) -> tuple[int, ...]:
        sys_q = set(self.system_qubits())
        return tuple(q for q in range(self.n_qubits) if q not in sys_q)

    def copy(self) -> "RegisterLayout":
        return RegisterLayout(dict(self.registers), self.system, self._next)


@dataclass
class Circuit:
    layout: RegisterLayout
    gates: list[Gate] = field(default_factory=list)
    subnorm: float = 1.0
    lowered: bool = False

    def __post_init__(self):
        if not self.subnorm > 0:
            raise CircuitError("subnormalization must be positive")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        n = self.layout.n_qubits
        if any(q < 0 or q >= n for q in g.qubits):
            raise CircuitError(f"gate {g.to_text()} acts outside the {n}-qubit layout")

    def append(self, g: Gate):
        self._check(g)
        self.gates.append(g)

    def extend(self, gates):
        for g in gates:
            self.append(g)

    def __len__(self):
        return len(self.gates)

    def to_text(self) -> str:
        head = [f"# qubits {self.layout.n_qubits} subnorm {self.subnorm:.17g}"]
        for name, (start, width) in self.layout.registers.items():
            head.append(f"# reg {name} {start} {width}{' system' if name in self.layout.system else ''}")
        return "\n".join(head + [g.to_text() for g in self.gates]) + "\n"

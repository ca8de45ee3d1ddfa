"""Lowering to {X, CNOT, Toffoli, H, Z, RY, controlled RY, SWAP} and gate counting.

Rules:
  * negative controls are conjugated with X;
  * X with k >= 3 controls: AND ladder of k - 1 Toffolis into clean work
    qubits, one CNOT onto the target, ladder uncomputed (2(k - 1) Toffolis);
  * RY with k >= 2 controls: the same ladder around a singly controlled RY;
  * controlled SWAP(a, b): CNOT(b -> a), X on b controlled on the controls and a, CNOT(b -> a);
  * m-bit increment: carry ladder with 2(m - 1) Toffolis (controls first
    combined into one work qubit); decrement = X^m increment X^m.
Work qubits are shared between gates, so the work register is as wide as the
largest single request.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict, field

from .ir import Circuit, CircuitError, Gate, H, RY, X


@dataclass
class _Builder:
    work_base: int
    out: list = field(default_factory=list)
    max_work: int = 0

    def _work(self, k: int) -> list[int]:
        self.max_work = max(self.max_work, k)
        return [self.work_base + i for i in range(k)]

    def emit(self, g: Gate):
        self.out.append(g)

    def _flip_negatives(self, controls):
        for q, pol in controls:
            if not pol:
                self.emit(X(q))

    def _and_ladder(self, qubits: list[int], offset: int = 0) -> tuple[int, list[Gate]]:
        """Compute the AND of >= 2 qubits into a work qubit; returns (qubit, gates to undo)."""
        work = self._work(offset + len(qubits) - 1)[offset:]
        gates = [X(work[0], [(qubits[0], True), (qubits[1], True)])]
        for i, q in enumerate(qubits[2:]):
            gates.append(X(work[i + 1], [(work[i], True), (q, True)]))
        for g in gates:
            self.emit(g)
        return work[-1], gates[::-1]

    def mcx(self, target: int, controls, offset: int = 0):
        self._flip_negatives(controls)
        qs = [q for q, _ in controls]
        if len(qs) <= 2:
            self.emit(X(target, [(q, True) for q in qs]))
        else:
            w, undo = self._and_ladder(qs, offset)
            self.emit(X(target, [(w, True)]))
            for g in undo:
                self.emit(g)
        self._flip_negatives(controls)

    def ry(self, g: Gate):
        self._flip_negatives(g.controls)
        qs = [q for q, _ in g.controls]
        t = g.targets[0]
        if len(qs) <= 1:
            self.emit(RY(t, g.angle, [(q, True) for q in qs]))
        else:
            w, undo = self._and_ladder(qs)
            self.emit(RY(t, g.angle, [(w, True)]))
            for u in undo:
                self.emit(u)
        self._flip_negatives(g.controls)

    def swap(self, g: Gate):
        a, b = g.targets
        if not g.controls:
            self.emit(g)
            return
        self.emit(X(a, [(b, True)]))
        self.mcx(b, list(g.controls) + [(a, True)])
        self.emit(X(a, [(b, True)]))

    def inc(self, g: Gate):
        reg = list(g.targets)
        if g.step == -1:
            for q in reg:
                self.emit(X(q))
        self._flip_negatives(g.controls)
        qs = [q for q, _ in g.controls]
        undo_ctrl: list[Gate] = []
        offset = 0
        if len(qs) >= 2:
            ctrl, undo_ctrl = self._and_ladder(qs)
            offset = len(qs) - 1
        else:
            ctrl = qs[0] if qs else None
        m = len(reg)
        # carries[k] holds ctrl AND x_0 .. x_{k-1}; None means constant 1
        carries: list = [ctrl]
        compute: list[Gate] = []
        n_new = sum(1 for k in range(1, m) if not (k == 1 and ctrl is None))
        work = self._work(offset + n_new)[offset:]
        wi = 0
        for k in range(1, m):
            prev = carries[-1]
            if prev is None:
                carries.append(reg[0])
                compute.append(None)
            else:
                w = work[wi]
                wi += 1
                gate = X(w, [(prev, True), (reg[k - 1], True)])
                self.emit(gate)
                carries.append(w)
                compute.append(gate)
        for k in range(m - 1, -1, -1):
            c = carries[k]
            self.emit(X(reg[k]) if c is None else X(reg[k], [(c, True)]))
            if k >= 1 and compute[k - 1] is not None:
                self.emit(compute[k - 1])
        for u in undo_ctrl:
            self.emit(u)
        self._flip_negatives(g.controls)
        if g.step == -1:
            for q in reg:
                self.emit(X(q))

    def lower(self, g: Gate):
        if g.kind == "X":
            self.mcx(g.targets[0], g.controls)
        elif g.kind == "RY":
            self.ry(g)
        elif g.kind == "SWAP":
            self.swap(g)
        elif g.kind == "INC":
            self.inc(g)
        elif g.kind in ("H", "Z"):
            if g.controls:
                raise CircuitError(f"controlled {g.kind} is not supported by the lowering")
            self.emit(g)
        else:
            raise CircuitError(f"cannot lower {g.kind}")


def lower(circuit: Circuit) -> Circuit:
    """Equivalent circuit over primitive gates plus a clean work register."""
    if circuit.lowered:
        return circuit
    b = _Builder(work_base=circuit.layout.n_qubits)
    for g in circuit.gates:
        b.lower(g)
    lay = circuit.layout.copy()
    lay.add("work", b.max_work)
    return Circuit(lay, b.out, circuit.subnorm, lowered=True)


@dataclass(frozen=True)
class GateCounts:
    toffoli: int
    cnot: int
    x: int
    h: int
    ry: int
    z: int
    swap: int
    qubits_total: int
    qubits_ancilla: int

    def as_dict(self) -> dict:
        return asdict(self)


def count_gates(circuit: Circuit) -> GateCounts:
    """Gate tallies after lowering (lowers first if needed)."""
    c = lower(circuit)
    tally = dict(toffoli=0, cnot=0, x=0, h=0, ry=0, z=0, swap=0)
    for g in c.gates:
        if g.kind == "X":
            key = {0: "x", 1: "cnot", 2: "toffoli"}.get(len(g.controls))
            if key is None:
                raise CircuitError("unlowered multi-controlled X")
            tally[key] += 1
        elif g.kind == "RY":
            tally["ry"] += 1
        elif g.kind == "H":
            tally["h"] += 1
        elif g.kind == "Z":
            tally["z"] += 1
        elif g.kind == "SWAP":
            tally["swap"] += 1
        else:
            raise CircuitError(f"unlowered {g.kind}")
    n = c.layout.n_qubits
    return GateCounts(**tally, qubits_total=n, qubits_ancilla=n - len(c.layout.system_qubits()))

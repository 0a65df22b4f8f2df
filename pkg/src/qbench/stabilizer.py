"""Stabilizer-tableau simulation for Clifford circuits.

The tableau keeps 2n generator rows (n destabilizers, n stabilizers) as X/Z
bit matrices plus a sign bit per row, updated with the usual CHP-style rules.
Sampling does not measure qubit by qubit; instead the computational-basis
outcome distribution of a stabilizer state is uniform over an affine GF(2)
subspace, which is extracted once by Gaussian elimination and then sampled
with vectorized bit algebra. The same row representation doubles as an exact
group-element encoding for Clifford enumeration.
"""
from __future__ import annotations

import numpy as np

from .circuits import CLIFFORD_KINDS, Circuit, Gate, GateKind
from .distributions import SampleSet
from .errors import NonCliffordError, ValidationError
from .noise import NoiseModel

STABILIZER_WIDTH_CAP = 1000


class StabilizerTableau:
    """2n x (2n+1) binary tableau: rows 0..n-1 destabilizers, n..2n-1 stabilizers."""

    __slots__ = ("n", "x", "z", "r")

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError("tableau needs at least one qubit")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        idx = np.arange(n)
        self.x[idx, idx] = 1
        self.z[n + idx, idx] = 1

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    def key(self) -> bytes:
        """Exact canonical encoding; equal keys iff equal Clifford group elements."""
        return self.x.tobytes() + self.z.tobytes() + self.r.tobytes()

    # -- single-gate conjugation updates --------------------------------------

    def _h(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.x[:, a], self.z[:, a] = self.z[:, a].copy(), self.x[:, a].copy()

    def _s(self, a: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def _sdg(self, a: int) -> None:
        self.r ^= self.x[:, a] & (self.z[:, a] ^ 1)
        self.z[:, a] ^= self.x[:, a]

    def _cx(self, a: int, b: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, b] & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    def _pauli(self, a: int, letter: str) -> None:
        if letter == "X":
            self.r ^= self.z[:, a]
        elif letter == "Z":
            self.r ^= self.x[:, a]
        elif letter == "Y":
            self.r ^= self.x[:, a] ^ self.z[:, a]

    def apply_gate(self, gate: Gate) -> None:
        k = gate.kind
        if k is GateKind.H:
            self._h(gate.targets[0])
        elif k is GateKind.S:
            self._s(gate.targets[0])
        elif k is GateKind.SDG:
            self._sdg(gate.targets[0])
        elif k in (GateKind.X, GateKind.Y, GateKind.Z):
            self._pauli(gate.targets[0], k.value.upper())
        elif k is GateKind.CX:
            self._cx(*gate.targets)
        elif k is GateKind.CZ:
            a, b = gate.targets
            self._h(b)
            self._cx(a, b)
            self._h(b)
        elif k is GateKind.SWAP:
            a, b = gate.targets
            for m in (self.x, self.z):
                m[:, [a, b]] = m[:, [b, a]]
        elif k is GateKind.PAULI:
            for t, letter in zip(gate.targets, gate.paulis):
                self._pauli(t, letter)
        elif k in (GateKind.BARRIER, GateKind.MEASURE):
            pass
        else:
            raise NonCliffordError(f"gate {k.value} is not a Clifford tableau operation")

    def apply_circuit(self, circuit: Circuit) -> None:
        for g in circuit.all_gates():
            self.apply_gate(g)

    # -- measurement-outcome structure ----------------------------------------

    def outcome_space(self) -> tuple[np.ndarray, np.ndarray]:
        """(c0, basis): measurement outcomes are uniform over c0 xor span(basis).

        Bit vectors are indexed by qubit; an empty basis means the outcome is
        deterministic. Derivation: stabilizer rows with no X part force the
        parity of the outcome on their Z support, everything else is free.
        """
        n = self.n
        sx = self.x[n:].copy()
        sz = self.z[n:].copy()
        sr = self.r[n:].copy()

        # Row-reduce on X parts with sign-exact row multiplication.
        pivots: list[tuple[int, int]] = []
        row = 0
        for col in range(n):
            pivot = None
            for i in range(row, n):
                if sx[i, col]:
                    pivot = i
                    break
            if pivot is None:
                continue
            if pivot != row:
                for m in (sx, sz):
                    m[[pivot, row]] = m[[row, pivot]]
                sr[[pivot, row]] = sr[[row, pivot]]
            for i in range(n):
                if i != row and sx[i, col]:
                    sr[i] = _rowmult_phase(sx[i], sz[i], sr[i], sx[row], sz[row], sr[row])
                    sx[i] ^= sx[row]
                    sz[i] ^= sz[row]
            pivots.append((row, col))
            row += 1

        k = row  # rank of the X block = number of random outcome bits
        z_rows = sz[k:]
        z_par = sr[k:]

        c0 = _gf2_solve(z_rows, z_par)
        basis = _gf2_nullspace(z_rows, n)
        if basis.shape[0] != k:
            raise ValidationError("inconsistent stabilizer outcome space")
        return c0, basis

    def sample_bits(self, shots: int, rng: np.random.Generator) -> np.ndarray:
        """(shots, n) outcome bit array, exact stabilizer measurement statistics."""
        c0, basis = self.outcome_space()
        out = np.broadcast_to(c0, (shots, self.n)).copy()
        if basis.shape[0]:
            picks = rng.integers(0, 2, size=(shots, basis.shape[0]), dtype=np.uint8)
            out ^= (picks @ basis) & 1
        return out


def _rowmult_phase(xh, zh, rh, xi, zi, ri) -> np.uint8:
    """Sign bit of row h := row h * row i, mod-4 Pauli phase bookkeeping."""
    xh64 = xh.astype(np.int64)
    zh64 = zh.astype(np.int64)
    g = np.zeros(xh.shape, dtype=np.int64)
    m_y = (xi == 1) & (zi == 1)
    m_x = (xi == 1) & (zi == 0)
    m_z = (xi == 0) & (zi == 1)
    g[m_y] = (zh64 - xh64)[m_y]
    g[m_x] = (zh64 * (2 * xh64 - 1))[m_x]
    g[m_z] = (xh64 * (1 - 2 * zh64))[m_z]
    total = (2 * int(rh) + 2 * int(ri) + int(g.sum())) % 4
    if total not in (0, 2):
        raise ValidationError("anticommuting rows multiplied in tableau reduction")
    return np.uint8(total // 2)


def _gf2_solve(rows: np.ndarray, parity: np.ndarray) -> np.ndarray:
    """One solution c of rows @ c = parity over GF(2); rows may be empty."""
    n = rows.shape[1]
    a = np.concatenate([rows.copy(), parity.reshape(-1, 1).astype(np.uint8)], axis=1)
    m = a.shape[0]
    piv_cols = []
    row = 0
    for col in range(n):
        pivot = None
        for i in range(row, m):
            if a[i, col]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[pivot, row]] = a[[row, pivot]]
        for i in range(m):
            if i != row and a[i, col]:
                a[i] ^= a[row]
        piv_cols.append(col)
        row += 1
    if np.any(a[row:, -1]):
        raise ValidationError("inconsistent GF(2) system")
    c = np.zeros(n, dtype=np.uint8)
    for i, col in enumerate(piv_cols):
        c[col] = a[i, -1]
    return c


def _gf2_nullspace(rows: np.ndarray, n: int) -> np.ndarray:
    """Basis (as rows) of the nullspace of `rows` over GF(2)^n."""
    a = rows.copy()
    m = a.shape[0]
    piv_cols: list[int] = []
    row = 0
    for col in range(n):
        pivot = None
        for i in range(row, m):
            if a[i, col]:
                pivot = i
                break
        if pivot is None:
            continue
        a[[pivot, row]] = a[[row, pivot]]
        for i in range(m):
            if i != row and a[i, col]:
                a[i] ^= a[row]
        piv_cols.append(col)
        row += 1
    free_cols = [c for c in range(n) if c not in piv_cols]
    basis = np.zeros((len(free_cols), n), dtype=np.uint8)
    for bi, fc in enumerate(free_cols):
        basis[bi, fc] = 1
        for ri, pc in enumerate(piv_cols):
            if a[ri, fc]:
                basis[bi, pc] = 1
    return basis


def _require_clifford(circuit: Circuit) -> None:
    for g in circuit.all_gates():
        if g.kind not in CLIFFORD_KINDS and g.kind not in (GateKind.MEASURE, GateKind.BARRIER):
            raise NonCliffordError(f"gate {g.kind.value} is not Clifford")
    if circuit.metadata.get("mid_measure"):
        raise NonCliffordError("mid-circuit measurement is not supported by the tableau sampler")


def _bits_to_measured_indices(bits: np.ndarray, circuit: Circuit) -> np.ndarray:
    measured = circuit.measured_qubits() or tuple(range(circuit.n_qubits))
    k = len(measured)
    out = np.zeros(bits.shape[0], dtype=np.int64)
    for pos, q in enumerate(measured):
        out |= bits[:, q].astype(np.int64) << (k - 1 - pos)
    return out


def evolve_tableau(circuit: Circuit) -> StabilizerTableau:
    _require_clifford(circuit)
    if circuit.n_qubits > STABILIZER_WIDTH_CAP:
        raise ValidationError(f"width {circuit.n_qubits} exceeds the tableau cap {STABILIZER_WIDTH_CAP}")
    tab = StabilizerTableau(circuit.n_qubits)
    tab.apply_circuit(circuit)
    return tab


def deterministic_outcome(circuit: Circuit) -> str | None:
    """The single outcome bitstring when measurement is deterministic, else None."""
    tab = evolve_tableau(circuit)
    c0, basis = tab.outcome_space()
    if basis.shape[0]:
        return None
    measured = circuit.measured_qubits() or tuple(range(circuit.n_qubits))
    return "".join(str(int(c0[q])) for q in measured)


def stabilizer_sample(circuit: Circuit, shots: int, rng: np.random.Generator,
                      noise: NoiseModel | None = None) -> SampleSet:
    """Sample measurement outcomes of a Clifford circuit.

    With a noise model, each shot evolves its own tableau with stochastic
    Pauli injections after noisy gates plus readout flips, mirroring the
    statevector sampler's channel exactly.
    """
    _require_clifford(circuit)
    if shots <= 0:
        raise ValidationError("shots must be positive")
    if circuit.n_qubits > STABILIZER_WIDTH_CAP:
        raise ValidationError(f"width {circuit.n_qubits} exceeds the tableau cap {STABILIZER_WIDTH_CAP}")
    n = circuit.n_qubits
    measured = circuit.measured_qubits() or tuple(range(n))
    n_bits = len(measured)

    if noise is None or noise.is_trivial:
        tab = evolve_tableau(circuit)
        bits = tab.sample_bits(shots, rng)
        return SampleSet.from_indices(_bits_to_measured_indices(bits, circuit), n_bits)

    offsets = noise.drift.offsets_for(shots) if noise.drift is not None else np.zeros(shots)
    indices = np.empty(shots, dtype=np.int64)
    pauli_1q = ("X", "Y", "Z")
    pauli_2q = tuple(a + b for a in "IXYZ" for b in "IXYZ")[1:]
    for shot in range(shots):
        tab = StabilizerTableau(n)
        for gate in circuit.all_gates():
            if gate.kind in (GateKind.MEASURE, GateKind.BARRIER):
                continue
            tab.apply_gate(gate)
            rate = min(1.0, max(0.0, noise.error_for(gate.kind, gate.targets) + offsets[shot]))
            if rate > 0 and rng.random() < rate:
                if len(gate.targets) == 1:
                    word = pauli_1q[rng.integers(0, 3)]
                else:
                    word = pauli_2q[rng.integers(0, 15)]
                for t, letter in zip(gate.targets, word):
                    if letter != "I":
                        tab._pauli(t, letter)
        bits = tab.sample_bits(1, rng)[0]
        for q in measured:
            ro = min(1.0, max(0.0, noise.readout_for(q) + offsets[shot]))
            if ro > 0 and rng.random() < ro:
                bits[q] ^= 1
        idx = 0
        for pos, q in enumerate(measured):
            idx |= int(bits[q]) << (n_bits - 1 - pos)
        indices[shot] = idx
    return SampleSet.from_indices(indices, n_bits)

"""Exact-uniform Clifford group tables for one and two qubits.

The group is enumerated once by breadth-first search over exact tableau keys
(24 elements for n=1, 11520 for n=2), so sampling by uniform index is exactly
uniform and every element carries a canonical shortest gate sequence.
Inversion is a table lookup on the tableau key of the inverted sequence, with
no floating-point hashing anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import CX, Gate, H, S, gate_unitary, inverse_gate, pauli_matrix
from .errors import ValidationError
from .stabilizer import StabilizerTableau

GROUP_SIZES = {1: 24, 2: 11520}

_GENERATORS = {
    1: (H(0), S(0)),
    2: (H(0), H(1), S(0), S(1), CX(0, 1), CX(1, 0)),
}


@dataclass(frozen=True)
class CliffordElement:
    index: int
    gates: tuple[Gate, ...]
    key: bytes


def _sequence_key(n: int, gates: tuple[Gate, ...]) -> bytes:
    tab = StabilizerTableau(n)
    for g in gates:
        tab.apply_gate(g)
    return tab.key()


def _sequence_unitary(n: int, gates: tuple[Gate, ...]) -> np.ndarray:
    u = np.eye(1 << n, dtype=complex)
    for g in gates:
        gu = gate_unitary(g)
        if len(g.targets) == n and g.targets == tuple(range(n)):
            full = gu
        elif n == 2 and len(g.targets) == 1:
            full = np.kron(gu, np.eye(2)) if g.targets[0] == 0 else np.kron(np.eye(2), gu)
        elif n == 2 and g.targets == (1, 0):
            perm = [0, 2, 1, 3]  # reorder basis so the gate sees |q1 q0>
            full = gu[np.ix_(perm, perm)]
        else:
            raise ValidationError(f"unexpected targets {g.targets} in a {n}-qubit table sequence")
        u = full @ u
    return u


class CliffordGroup:
    """Enumerated n-qubit Clifford group (n in {1, 2}) with canonical sequences."""

    def __init__(self, n: int):
        if n not in _GENERATORS:
            raise ValidationError(f"clifford tables exist for 1 or 2 qubits, not {n}")
        self.n = n
        elements: list[CliffordElement] = []
        index_of: dict[bytes, int] = {}
        identity = StabilizerTableau(n)
        frontier: list[tuple[StabilizerTableau, tuple[Gate, ...]]] = [(identity, ())]
        index_of[identity.key()] = 0
        elements.append(CliffordElement(0, (), identity.key()))
        while frontier:
            next_frontier = []
            for tab, gates in frontier:
                for gen in _GENERATORS[n]:
                    new = tab.copy()
                    new.apply_gate(gen)
                    key = new.key()
                    if key not in index_of:
                        idx = len(elements)
                        index_of[key] = idx
                        elements.append(CliffordElement(idx, gates + (gen,), key))
                        next_frontier.append((new, gates + (gen,)))
            frontier = next_frontier
        if len(elements) != GROUP_SIZES[n]:
            raise ValidationError(
                f"clifford enumeration found {len(elements)} elements, expected {GROUP_SIZES[n]}")
        self.elements = tuple(elements)
        self._index_of = index_of
        self._unitaries: dict[int, np.ndarray] = {}
        self._conjugation: dict[int, dict[str, tuple[str, int]]] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def unitary(self, index: int) -> np.ndarray:
        u = self._unitaries.get(index)
        if u is None:
            u = _sequence_unitary(self.n, self.elements[index].gates)
            u.setflags(write=False)
            self._unitaries[index] = u
        return u

    def index_of_key(self, key: bytes) -> int:
        return self._index_of[key]

    def inverse_index(self, gates: tuple[Gate, ...]) -> int:
        """Index of the group element equal to the inverse of `gates` (exact lookup)."""
        inv = tuple(inverse_gate(g) for g in reversed(gates))
        return self._index_of[_sequence_key(self.n, inv)]

    def sample(self, rng: np.random.Generator) -> CliffordElement:
        return self.elements[int(rng.integers(0, len(self.elements)))]

    def conjugated_pauli(self, index: int, letter: str) -> tuple[str, int]:
        """(letter, sign) of U P U^dagger for a single-qubit element U."""
        if self.n != 1:
            raise ValidationError("pauli conjugation table is for the 1-qubit group")
        table = self._conjugation.get(index)
        if table is None:
            u = self.unitary(index)
            table = {}
            for p in "XYZ":
                q = u @ pauli_matrix(p) @ u.conj().T
                for cand in "XYZ":
                    if np.allclose(q, pauli_matrix(cand), atol=1e-9):
                        table[p] = (cand, 1)
                        break
                    if np.allclose(q, -pauli_matrix(cand), atol=1e-9):
                        table[p] = (cand, -1)
                        break
                else:
                    raise ValidationError("clifford conjugation did not yield a signed pauli")
            self._conjugation[index] = table
        return table[letter]


@lru_cache(maxsize=None)
def clifford_group(n: int) -> CliffordGroup:
    return CliffordGroup(n)

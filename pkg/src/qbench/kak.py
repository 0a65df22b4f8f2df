"""Cartan (KAK) decomposition of two-qubit unitaries and 3-CX synthesis.

The decomposition runs in the magic (Bell) basis: conjugating U into that
basis, the symmetric unitary W = U~^T U~ is diagonalized by a real orthogonal
matrix, which splits U into local factors around a canonical interaction
exp(i(a XX + b YY + c ZZ)).

Synthesis of an arbitrary U with exactly three CX gates works in two steps:
first a one-parameter corrector CX * (local rotation) is chosen so that the
remainder has a vanishing interaction coordinate (the obstruction
Im tr[V (YY) V^T (YY)] is sinusoidal in the corrector angle and always has a
root), then the remainder is emitted with the exact two-CX identity
exp(i(a XX + c ZZ)) = CX (Rx(-2a) x Rz(-2c)) CX. Every synthesis is verified
against its input to 1e-9 before being returned.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import TranspileError

_SQ2 = 1.0 / math.sqrt(2.0)

MAGIC = np.array(
    [[1, 0, 0, 1j],
     [0, 1j, 1, 0],
     [0, 1j, -1, 0],
     [1, 0, 0, -1j]], dtype=complex) * _SQ2

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_XX = np.kron(_X, _X)
_YY = np.kron(_Y, _Y)
_ZZ = np.kron(_Z, _Z)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_PP = {"x": _XX, "y": _YY, "z": _ZZ}

# Rows: eigenvalues of (XX, YY, ZZ) on the four magic-basis columns.
_EIG_SIGNS = np.array([
    [float((MAGIC[:, j].conj() @ P @ MAGIC[:, j]).real) for P in (_XX, _YY, _ZZ)]
    for j in range(4)
])


def _rz(t: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]])


def _rx(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def canonical_matrix(a: float, b: float, c: float) -> np.ndarray:
    """exp(i(a XX + b YY + c ZZ)) from commuting closed forms."""
    out = np.eye(4, dtype=complex)
    for coeff, pp in ((a, _XX), (b, _YY), (c, _ZZ)):
        out = (math.cos(coeff) * np.eye(4) + 1j * math.sin(coeff) * pp) @ out
    return out


def _to_su4(u: np.ndarray) -> tuple[np.ndarray, complex]:
    """(U/phase, phase) with det(U/phase) = 1, principal fourth-root branch."""
    det = np.linalg.det(u)
    phase = cmath.exp(1j * cmath.phase(det) / 4) * abs(det) ** 0.25
    return u / phase, phase


def _simultaneously_diagonalize(w: np.ndarray) -> np.ndarray:
    """Real orthogonal O (det +1) with O^T w O diagonal, for symmetric unitary w."""
    a, b = w.real.copy(), w.imag.copy()
    vals, vecs = np.linalg.eigh(a)
    o = vecs
    # Refine inside degenerate eigenspaces of the real part using the imaginary part.
    groups: list[list[int]] = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][0]] < 1e-7:
            groups[-1].append(i)
        else:
            groups.append([i])
    for grp in groups:
        if len(grp) == 1:
            continue
        idx = np.ix_(grp, grp)
        sub = o[:, grp]
        _, inner = np.linalg.eigh((sub.T @ b @ sub))
        o[:, grp] = sub @ inner
    diag = o.T @ w @ o
    if np.max(np.abs(diag - np.diag(np.diagonal(diag)))) > 1e-9:
        raise TranspileError("failed to diagonalize the magic-basis symmetric form")
    if np.linalg.det(o) < 0:
        o[:, 0] = -o[:, 0]
    return o


def _split_local(k: np.ndarray) -> tuple[np.ndarray, np.ndarray, complex]:
    """Split an exact tensor product into (k0, k1, phase), k0 and k1 in SU(2)."""
    r = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    if s[1] > 1e-8:
        raise TranspileError("matrix is not a tensor product of single-qubit unitaries")
    k0 = (u[:, 0] * math.sqrt(s[0])).reshape(2, 2)
    k1 = (vh[0, :] * math.sqrt(s[0])).reshape(2, 2)
    for m in (k0, k1):
        pass
    d0 = np.linalg.det(k0)
    k0 = k0 / cmath.sqrt(d0)
    d1 = np.linalg.det(k1)
    k1 = k1 / cmath.sqrt(d1)
    rebuilt = np.kron(k0, k1)
    ref = np.unravel_index(np.argmax(np.abs(rebuilt)), rebuilt.shape)
    phase = k[ref] / rebuilt[ref]
    if abs(abs(phase) - 1.0) > 1e-8 or np.max(np.abs(phase * rebuilt - k)) > 1e-8:
        raise TranspileError("tensor-product split failed")
    return k0, k1, phase


@dataclass
class WeylDecomposition:
    """u = phase * (k1l x k1r) @ canonical(a, b, c) @ (k2l x k2r)."""

    k1l: np.ndarray
    k1r: np.ndarray
    coords: tuple[float, float, float]
    k2l: np.ndarray
    k2r: np.ndarray
    phase: complex

    def reconstruct(self) -> np.ndarray:
        return self.phase * np.kron(self.k1l, self.k1r) @ canonical_matrix(*self.coords) \
            @ np.kron(self.k2l, self.k2r)


def weyl_decompose(u: np.ndarray) -> WeylDecomposition:
    """Cartan decomposition of a 4x4 unitary (coordinates not canonicalized)."""
    u = np.asarray(u, dtype=complex)
    u_su, phase0 = _to_su4(u)
    up = MAGIC.conj().T @ u_su @ MAGIC
    w = up.T @ up
    o = _simultaneously_diagonalize(w)
    d = np.diagonal(o.T @ w @ o)
    theta = np.angle(d) / 2.0
    p = up @ o @ np.diag(np.exp(-1j * theta))
    if np.max(np.abs(p.imag)) > 1e-8:
        raise TranspileError("left factor of the Cartan decomposition is not real")
    p = p.real.astype(float)
    if np.linalg.det(p) < 0:
        # Flip one half-phase branch by pi; keeps exp(i theta) and realness, fixes det.
        theta[0] += math.pi
        p[:, 0] = -p[:, 0]
    # The sign-pattern matrix spans the zero-sum subspace; normalize sum(theta) to 0.
    theta[0] -= round(float(theta.sum()) / (2 * math.pi)) * 2 * math.pi

    coords, *_ = np.linalg.lstsq(_EIG_SIGNS, theta, rcond=None)
    if np.max(np.abs(_EIG_SIGNS @ coords - theta)) > 1e-8:
        raise TranspileError("canonical coordinates are inconsistent with the phases")

    k1 = MAGIC @ p @ MAGIC.conj().T
    k2 = MAGIC @ o.T @ MAGIC.conj().T
    k1l, k1r, ph1 = _split_local(k1)
    k2l, k2r, ph2 = _split_local(k2)
    dec = WeylDecomposition(k1l, k1r, tuple(float(x) for x in coords), k2l, k2r,
                            phase0 * ph1 * ph2)
    if np.max(np.abs(dec.reconstruct() - u)) > 1e-8:
        raise TranspileError("Cartan decomposition failed to reconstruct its input")
    return dec


# -- exactly-3-CX synthesis ----------------------------------------------------

def _gamma_trace_im(u_su: np.ndarray) -> float:
    g = u_su @ _YY @ u_su.T @ _YY
    return float(np.trace(g).imag)


def _corrector(variant: int, delta: float) -> np.ndarray:
    if variant == 0:
        return np.kron(np.eye(2), _rz(delta)) @ _CX
    if variant == 1:
        return np.kron(_rx(delta), np.eye(2)) @ _CX
    if variant == 2:
        return _CX @ np.kron(np.eye(2), _rz(delta))
    return _CX @ np.kron(_rx(delta), np.eye(2))


def _solve_corrector(u: np.ndarray) -> tuple[int, float]:
    """Variant and angle so that u @ corrector has a two-CX interaction class."""
    for variant in range(4):
        def f(delta: float) -> float:
            return _gamma_trace_im(_to_su4(u @ _corrector(variant, delta))[0])

        f0, f1, f2 = f(0.0), f(math.pi / 2), f(math.pi)
        k0 = 0.5 * (f0 + f2)
        kc = 0.5 * (f0 - f2)
        ks = f1 - k0
        r = math.hypot(kc, ks)
        if r < 1e-14:
            if abs(k0) < 1e-10:
                return variant, 0.0
            continue
        ratio = -k0 / r
        if abs(ratio) > 1.0:
            if abs(ratio) > 1.0 + 1e-12:
                continue
            ratio = math.copysign(1.0, ratio)
        phi = math.atan2(ks, kc)
        for delta in sorted(((phi + math.acos(ratio)) % (2 * math.pi),
                             (phi - math.acos(ratio)) % (2 * math.pi))):
            if abs(f(delta)) < 1e-9:
                return variant, float(delta)
    raise TranspileError("no three-CX corrector angle found")


@dataclass
class TwoQubitSequence:
    """Flat op list: ("u", qubit, 2x2 matrix) and ("cx",) entries, plus a phase."""

    ops: list[tuple]
    phase: complex


def _shift_reduce(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray, complex]:
    """Reduce each coordinate into [0, pi/2); returns (reduced, right-compensation, phase).

    canonical(c) = canonical(c') @ comp, comp a Pauli-pair product times a phase.
    """
    comp = np.eye(4, dtype=complex)
    reduced = coords.copy()
    for k, pp in enumerate((_XX, _YY, _ZZ)):
        m = math.floor(reduced[k] / (math.pi / 2) + 1e-9)
        if reduced[k] - m * math.pi / 2 > math.pi / 2 - 1e-9:
            m += 1  # value sitting just under the next pi/2 boundary wraps to ~0
        if m:
            reduced[k] -= m * math.pi / 2
            # exp(i (m pi/2) PP) = (i PP)^m
            if m % 4:
                comp = np.linalg.matrix_power(1j * pp, m % 4) @ comp
        reduced[k] = max(reduced[k], 0.0)
    return reduced, comp, 1.0 + 0.0j


def _two_cx_ops(dec: WeylDecomposition) -> TwoQubitSequence:
    """Emit a two-CX-class decomposition as u/cx ops (exactly 2 cx entries)."""
    coords = np.array(dec.coords, dtype=float)
    reduced, comp, _ = _shift_reduce(coords)
    zero_k = int(np.argmin(np.abs(np.sin(2 * reduced))))
    if abs(math.sin(2 * reduced[zero_k])) > 1e-6:
        raise TranspileError("remainder is not in the two-CX class")
    reduced[zero_k] = 0.0

    a, b, c = reduced
    pre = np.eye(4, dtype=complex)
    post = np.eye(4, dtype=complex)
    if zero_k == 1:
        alpha, gamma = a, c
    elif zero_k == 0:
        # swap XX and YY roles with S x S conjugation
        s = np.diag([1, 1j]).astype(complex)
        pre, post = np.kron(s, s), np.kron(s, s).conj().T
        alpha, gamma = b, c
    else:
        # swap YY and ZZ roles with Rx(pi/2) x Rx(pi/2) conjugation
        w = _rx(math.pi / 2)
        pre, post = np.kron(w, w), np.kron(w, w).conj().T
        alpha, gamma = a, b

    # canonical(alpha, 0, gamma) = CX (Rx(-2 alpha) x Rz(-2 gamma)) CX
    ops: list[tuple] = []
    # order: post-locals of the whole product come first in circuit order
    right = post @ comp @ np.kron(dec.k2l, dec.k2r)
    r0, r1, ph_r = _split_local(right)
    ops.append(("u", 0, r0))
    ops.append(("u", 1, r1))
    ops.append(("cx",))
    ops.append(("u", 0, _rx(-2 * alpha)))
    ops.append(("u", 1, _rz(-2 * gamma)))
    ops.append(("cx",))
    left = np.kron(dec.k1l, dec.k1r) @ pre
    l0, l1, ph_l = _split_local(left)
    ops.append(("u", 0, l0))
    ops.append(("u", 1, l1))
    return TwoQubitSequence(ops, dec.phase * ph_l * ph_r)


def synthesize_two_qubit(u: np.ndarray) -> TwoQubitSequence:
    """Express a 4x4 unitary as exactly three CX gates plus 1q unitaries.

    The result is verified against the input (up to global phase) to 1e-9.
    """
    u = np.asarray(u, dtype=complex)
    variant, delta = _solve_corrector(u)
    corr = _corrector(variant, delta)
    remainder = u @ corr
    seq = _two_cx_ops(weyl_decompose(remainder))
    # u = remainder @ corr^dagger, so the corrector inverse runs first in circuit order.
    rot = _rz(-delta) if variant in (0, 2) else _rx(-delta)
    qubit = 1 if variant in (0, 2) else 0
    if variant in (0, 1):
        # corr = rot @ CX  ->  corr^dagger = CX @ rot^dagger (rot^dagger applies first)
        corr_ops = [("u", qubit, rot), ("cx",)]
    else:
        # corr = CX @ rot  ->  corr^dagger = rot^dagger @ CX (CX applies first)
        corr_ops = [("cx",), ("u", qubit, rot)]
    out = TwoQubitSequence(corr_ops + list(seq.ops), seq.phase)
    check = sequence_matrix(out)
    inner = np.trace(check.conj().T @ u)
    phase = inner / abs(inner) if abs(inner) > 1e-12 else 1.0
    if np.max(np.abs(phase * check - u)) > 1e-9:
        raise TranspileError("three-CX synthesis failed verification")
    return out


def sequence_matrix(seq: TwoQubitSequence) -> np.ndarray:
    """4x4 matrix of an op list (targets fixed as qubits 0 and 1)."""
    m = np.eye(4, dtype=complex)
    for op in seq.ops:
        if op[0] == "cx":
            m = _CX @ m
        else:
            _, qubit, u2 = op
            full = np.kron(u2, np.eye(2)) if qubit == 0 else np.kron(np.eye(2), u2)
            m = full @ m
    return seq.phase * m


def euler_zyz(u: np.ndarray) -> tuple[float, float, float, float]:
    """(alpha, beta, gamma, phase) with u = e^{i phase} Rz(alpha) Ry(beta) Rz(gamma)."""
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    phase = cmath.phase(det) / 2
    su = u * cmath.exp(-1j * phase)
    beta = 2.0 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    if abs(su[1, 0]) < 1e-12:
        alpha = -2.0 * cmath.phase(su[0, 0])
        gamma = 0.0
    elif abs(su[0, 0]) < 1e-12:
        alpha = 2.0 * cmath.phase(su[1, 0])
        gamma = 0.0
    else:
        sum_ag = -2.0 * cmath.phase(su[0, 0])
        diff_ag = 2.0 * cmath.phase(su[1, 0])
        alpha = 0.5 * (sum_ag + diff_ag)
        gamma = 0.5 * (sum_ag - diff_ag)
    return alpha, beta, gamma, phase

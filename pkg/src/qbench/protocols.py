"""End-to-end benchmark protocols composing generation, transpilation,
simulation, and metrics: quantum volume, volumetric grids, randomized
benchmarking, mirror benchmarking, CLOPS, classical shadows, the collision
test, and XEB device verification.

Every protocol takes an explicit SeedStream and records the substream path of
each work item, so any item can be regenerated bit-for-bit from the report.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .circuits import Circuit, GateKind, PauliString, measure_all
from .cliffords import clifford_group
from .device import DeviceModel
from .distributions import ProbDist, SampleSet
from .errors import DegenerateInputError, ValidationError
from .metrics import (
    CollisionStats, collision_volume, hellinger_distance, hog_probability, l1_distance,
    xeb_alpha,
)
from .noise import NoiseModel
from .randgen import (
    VolumetricShape, layered_model_circuit, make_mirror_circuit, qv_model_circuit,
    random_clifford_circuit, volumetric_family,
)
from .rng import SeedStream
from .stabilizer import stabilizer_sample
from .statevector import DEFAULT_WIDTH_CAP, apply_unitary_batch, ideal_distribution, run_statevector, sample_counts
from .transpile import TranspileConfig, run_pipeline

#: one-sided 97.5% normal quantile used by the quantum-volume pass rule
Z_975 = 1.959963984540054

QV_PASS_THRESHOLD = 2.0 / 3.0
QV_MIN_CIRCUITS = 100


def _transpile(circuit: Circuit, device: DeviceModel,
               config: TranspileConfig | None) -> Circuit:
    out, _ = run_pipeline(circuit, device, config or TranspileConfig())
    return out


def counts_digest(samples: SampleSet) -> str:
    """Stable hash of a sample set, for exact re-execution comparisons."""
    blob = json.dumps(samples.to_json(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- quantum volume -------------------------------------------------------------


@dataclass
class QvWidthRecord:
    width: int
    circuits: int
    hogs: list[float]
    mean_hog: float
    lower_bound: float
    passed: bool
    sample_hashes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"width": self.width, "circuits": self.circuits, "hogs": self.hogs,
                "mean_hog": self.mean_hog, "lower_bound": self.lower_bound,
                "passed": self.passed, "sample_hashes": self.sample_hashes}


@dataclass
class QvResult:
    records: list[QvWidthRecord]
    largest_passing_width: int
    quantum_volume: int
    conformant: bool
    shots: int
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "quantum_volume",
            "config": {"shots": self.shots, "conformant": self.conformant},
            "seeds": self.seeds,
            "items": [r.to_json() for r in self.records],
            "aggregate": {"largest_passing_width": self.largest_passing_width,
                          "quantum_volume": self.quantum_volume},
        }


def qv_lower_bound(hogs: list[float]) -> float:
    """One-sided 97.5% lower confidence bound on the mean heavy-output score."""
    arr = np.asarray(hogs, dtype=float)
    if arr.size < 2:
        raise ValidationError("the confidence bound needs at least 2 circuits")
    return float(arr.mean() - Z_975 * arr.std(ddof=1) / math.sqrt(arr.size))


def run_quantum_volume(device: DeviceModel, noise: NoiseModel | None, max_width: int,
                       circuits_per_width: int, shots: int, stream: SeedStream,
                       strict: bool = True, transpile: TranspileConfig | None = None,
                       cap: int = DEFAULT_WIDTH_CAP) -> QvResult:
    """Heavy-output test per square width; QV = 2^D for the largest passing prefix.

    A width passes when the one-sided 97.5% lower confidence bound of the mean
    heavy-output probability exceeds 2/3. Fewer than 100 circuits per width is
    refused in strict mode and marks the result non-conformant otherwise.
    """
    if max_width < 2:
        raise ValidationError("quantum volume starts at width 2")
    if max_width > cap:
        raise ValidationError(
            f"width {max_width} is not practical for the exact heavy-set oracle (cap {cap})")
    if circuits_per_width < QV_MIN_CIRCUITS and strict:
        raise ValidationError(
            f"{circuits_per_width} circuits/width < {QV_MIN_CIRCUITS}; pass strict=False "
            "to run a non-conformant estimate")
    records = []
    for width in range(2, max_width + 1):
        hogs = []
        hashes = []
        for k in range(circuits_per_width):
            item = stream.child(width, k)
            circuit = qv_model_circuit(width, item.child(0))
            p_ideal = ideal_distribution(circuit, cap=cap)
            executed = _transpile(measure_all(circuit), device, transpile)
            samples = sample_counts(executed, shots, noise, item.child(1).generator(), cap=cap)
            hogs.append(hog_probability(samples, p_ideal))
            if k == 0:
                hashes.append(counts_digest(samples))
        bound = qv_lower_bound(hogs)
        records.append(QvWidthRecord(width, circuits_per_width, hogs,
                                     float(np.mean(hogs)), bound,
                                     bound > QV_PASS_THRESHOLD, hashes))
    largest = 0
    for rec in records:
        if rec.passed:
            largest = rec.width
        else:
            break
    return QvResult(records, largest, 1 << largest,
                    circuits_per_width >= QV_MIN_CIRCUITS, shots, stream.as_record())


# -- volumetric grids -----------------------------------------------------------


@dataclass
class VolumetricRow:
    width: int
    depth: int
    metric: str
    value: float
    passed: bool | None

    def to_json(self) -> dict:
        return {"width": self.width, "depth": self.depth, "metric": self.metric,
                "value": self.value, "passed": self.passed}


@dataclass
class VolumetricTable:
    shape: str
    rows: list[VolumetricRow]
    shots: int
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "volumetric",
            "config": {"shape": self.shape, "shots": self.shots},
            "seeds": self.seeds,
            "items": [r.to_json() for r in self.rows],
            "aggregate": {"rows": len(self.rows)},
        }


def run_volumetric(device: DeviceModel, noise: NoiseModel | None,
                   shape: VolumetricShape | str, widths: list[int], metric: str,
                   shots: int, stream: SeedStream,
                   transpile: TranspileConfig | None = None,
                   cap: int = DEFAULT_WIDTH_CAP) -> VolumetricTable:
    """One metric evaluated over a (width, depth) grid of one volumetric class."""
    if metric not in ("hog", "hellinger", "l1", "xeb"):
        raise ValidationError(f"unknown volumetric metric {metric!r}")
    rows = []
    for width, depth, circuit in volumetric_family(shape, widths, stream.child(0)):
        p_ideal = ideal_distribution(circuit, cap=cap)
        executed = _transpile(measure_all(circuit), device, transpile)
        samples = sample_counts(executed, shots, noise,
                                stream.child(1, width, depth).generator(), cap=cap)
        passed: bool | None = None
        if metric == "hog":
            value = hog_probability(samples, p_ideal)
            passed = value > QV_PASS_THRESHOLD
        elif metric == "hellinger":
            value = hellinger_distance(samples.empirical(), p_ideal)
        elif metric == "l1":
            value = l1_distance(samples.empirical(), p_ideal)
        else:
            value = xeb_alpha(samples, p_ideal).alpha_tilde
        rows.append(VolumetricRow(width, depth, metric, float(value), passed))
    shape_value = VolumetricShape(shape).value
    return VolumetricTable(shape_value, rows, shots, stream.as_record())


# -- randomized benchmarking ------------------------------------------------------

_PAULI_1 = [np.array(m, dtype=complex) for m in (
    [[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]])]


def _pauli_ops(n: int) -> list[np.ndarray]:
    if n == 1:
        return _PAULI_1
    ops = []
    eye = np.eye(2, dtype=complex)
    singles = [eye] + _PAULI_1
    for i, a in enumerate(singles):
        for j, b in enumerate(singles):
            if i == 0 and j == 0:
                continue
            ops.append(np.kron(a, b))
    return ops


@dataclass
class RbResult:
    n_qubits: int
    lengths: list[int]
    survival_means: list[float]
    survivals: list[list[float]]
    amplitude: float
    decay: float
    offset: float
    error_per_clifford: float
    fit_residual: float
    shots: int
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "rb",
            "config": {"n_qubits": self.n_qubits, "lengths": self.lengths, "shots": self.shots},
            "seeds": self.seeds,
            "items": [{"length": m, "survivals": s, "mean": mu}
                      for m, s, mu in zip(self.lengths, self.survivals, self.survival_means)],
            "aggregate": {"amplitude": self.amplitude, "decay": self.decay,
                          "offset": self.offset,
                          "error_per_clifford": self.error_per_clifford,
                          "fit_residual": self.fit_residual},
        }


def fit_rb_decay(lengths: list[int], survival_means: list[float],
                 n_qubits: int) -> tuple[float, float, float, float]:
    """(A, p, B, residual) least-squares fit of F(m) = A p^m + B, B seeded at 1/2^n."""
    dim = 1 << n_qubits

    def model(m, amplitude, decay, offset):
        return amplitude * decay ** m + offset

    x = np.asarray(lengths, dtype=float)
    y = np.asarray(survival_means, dtype=float)
    p0 = (1.0 - 1.0 / dim, 0.99, 1.0 / dim)
    with warnings.catch_warnings():
        # constant (noiseless-ceiling) data makes the covariance singular
        warnings.simplefilter("ignore", OptimizeWarning)
        params, _ = curve_fit(model, x, y, p0=p0,
                              bounds=([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]), maxfev=20000)
    residual = float(np.sqrt(np.mean((model(x, *params) - y) ** 2)))
    return float(params[0]), float(params[1]), float(params[2]), residual


def run_rb(device: DeviceModel, noise: NoiseModel | None, n_qubits: int,
           lengths: list[int], sequences_per_length: int, shots: int,
           stream: SeedStream) -> RbResult:
    """Standard randomized benchmarking on 1 or 2 qubits.

    Each sampled Clifford element counts as one noisy unit with the noise
    model's per-element depolarizing rate; the closing element is the exact
    group inverse of the sequence, so the noiseless survival is 1.
    """
    if n_qubits not in (1, 2):
        raise ValidationError("randomized benchmarking supports 1 or 2 qubits")
    if len(set(lengths)) < 2:
        raise ValidationError("need at least 2 distinct sequence lengths to fit a decay")
    group = clifford_group(n_qubits)
    paulis = _pauli_ops(n_qubits)
    dim = 1 << n_qubits
    rate = noise.element_error(n_qubits) if noise is not None else 0.0
    readout = [noise.readout_for(q) for q in range(n_qubits)] if noise is not None else [0.0] * n_qubits

    survivals: list[list[float]] = []
    for li, m in enumerate(lengths):
        per_seq = []
        for s in range(sequences_per_length):
            rng = stream.child(li, s).generator()
            indices = [int(i) for i in rng.integers(0, len(group), size=m)]
            gates = tuple(g for idx in indices for g in group.elements[idx].gates)
            inverse = group.inverse_index(gates)
            unitaries = [group.unitary(i) for i in indices] + [group.unitary(inverse)]

            states = np.zeros((shots, dim), dtype=complex)
            states[:, 0] = 1.0
            offsets = noise.drift.offsets_for(shots) if noise is not None and noise.drift else None
            for u in unitaries:
                states = states @ u.T
                eff = rate if offsets is None else np.clip(rate + offsets, 0.0, 1.0)
                hit = rng.random(shots) < eff
                choice = rng.integers(0, len(paulis), size=shots)
                if np.any(hit):
                    for pi in np.unique(choice[hit]):
                        rows = np.nonzero(hit & (choice == pi))[0]
                        states[rows] = states[rows] @ paulis[pi].T
            outcomes = _sample_batch(states, rng)
            for q, ro in enumerate(readout):
                if ro > 0:
                    flips = rng.random(shots) < ro
                    outcomes ^= flips.astype(np.int64) << (n_qubits - 1 - q)
            per_seq.append(float(np.mean(outcomes == 0)))
        survivals.append(per_seq)

    means = [float(np.mean(s)) for s in survivals]
    amplitude, decay, offset, residual = fit_rb_decay(list(lengths), means, n_qubits)
    error = (dim - 1) * (1.0 - decay) / dim
    return RbResult(n_qubits, list(lengths), means, survivals, amplitude, decay, offset,
                    error, residual, shots, stream.as_record())


def _sample_batch(states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    probs = np.abs(states) ** 2
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1][:, None]
    u = rng.random(states.shape[0])
    return (cum < u[:, None]).sum(axis=1).astype(np.int64)


# -- mirror benchmarking -----------------------------------------------------------


@dataclass
class MirrorRecord:
    width: int
    depth: int
    success: float
    polarization: float
    expected: str

    def to_json(self) -> dict:
        return {"width": self.width, "depth": self.depth, "success": self.success,
                "polarization": self.polarization, "expected": self.expected}


@dataclass
class MirrorResult:
    records: list[MirrorRecord]
    mean_success: float
    mean_polarization: float
    shots: int
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "mirror",
            "config": {"shots": self.shots},
            "seeds": self.seeds,
            "items": [r.to_json() for r in self.records],
            "aggregate": {"mean_success": self.mean_success,
                          "mean_polarization": self.mean_polarization},
        }


def run_mirror_benchmark(device: DeviceModel, noise: NoiseModel | None,
                         base_widths: list[int], base_depths: list[int],
                         randomizations_per_base: int, shots: int,
                         stream: SeedStream) -> MirrorResult:
    """Mirror-circuit success probabilities on the tableau simulator.

    Runs entirely on the stabilizer path, so widths far beyond the dense cap
    are legal; the noiseless success probability is exactly 1.
    """
    records = []
    for width in base_widths:
        if width > device.n_qubits:
            raise ValidationError(f"base width {width} exceeds the device ({device.n_qubits})")
        for depth in base_depths:
            for r in range(randomizations_per_base):
                item = stream.child(width, depth, r)
                base = random_clifford_circuit(width, depth, item.child(0))
                spec = make_mirror_circuit(base, item.child(1))
                samples = stabilizer_sample(spec.circuit, shots, item.child(2).generator(),
                                            noise=noise)
                success = samples.counts.get(spec.expected, 0) / shots
                floor = 1.0 / (1 << width)
                records.append(MirrorRecord(width, depth, success,
                                            (success - floor) / (1.0 - floor),
                                            spec.expected))
    return MirrorResult(records, float(np.mean([r.success for r in records])),
                        float(np.mean([r.polarization for r in records])),
                        shots, stream.as_record())


# -- CLOPS -------------------------------------------------------------------------


@dataclass
class ClopsResult:
    width: int
    layers_executed: int
    elapsed_seconds: float
    layers_per_second: float
    shots: int
    batch: int
    host_relative: bool
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "clops",
            "config": {"width": self.width, "shots": self.shots, "batch": self.batch,
                       "host_relative": self.host_relative},
            "seeds": self.seeds,
            "items": [],
            "aggregate": {"layers_executed": self.layers_executed,
                          "elapsed_seconds": self.elapsed_seconds,
                          "layers_per_second": self.layers_per_second},
        }


def run_clops(device: DeviceModel, noise: NoiseModel | None, width: int,
              layers_total: int, batch: int, stream: SeedStream, shots: int = 100,
              transpile: TranspileConfig | None = None,
              cap: int = DEFAULT_WIDTH_CAP) -> ClopsResult:
    """Model-circuit layers per second, wall clock, including generation,
    transpilation, execution, and readout. The number benchmarks this host's
    simulator, so results are only comparable on equal machines."""
    if layers_total < 1 or batch < 1:
        raise ValidationError("need layers_total >= 1 and batch >= 1")
    executed = 0
    k = 0
    start = time.perf_counter()
    while executed < layers_total:
        for _ in range(batch):
            if executed >= layers_total:
                break
            item = stream.child(k)
            circuit = qv_model_circuit(width, item.child(0))
            transpiled = _transpile(measure_all(circuit), device, transpile)
            sample_counts(transpiled, shots, noise, item.child(1).generator(), cap=cap)
            executed += circuit.depth
            k += 1
    elapsed = time.perf_counter() - start
    return ClopsResult(width, executed, elapsed, executed / elapsed, shots, batch,
                       True, stream.as_record())


# -- classical shadows ---------------------------------------------------------------


@dataclass
class ShadowEstimate:
    observable: str
    estimate: float
    variance_bound: float
    snapshots: int

    def to_json(self) -> dict:
        return {"observable": self.observable, "estimate": self.estimate,
                "variance_bound": self.variance_bound, "snapshots": self.snapshots}


def shadow_estimate(prep: Circuit, observables: list[PauliString], snapshots: int,
                    stream: SeedStream, cap: int = DEFAULT_WIDTH_CAP) -> list[ShadowEstimate]:
    """Classical-shadow estimates of Pauli observables on the state prep|0...0>.

    Each snapshot applies an independent uniformly random single-qubit
    Clifford per qubit and measures; the product-form inverse channel gives a
    per-qubit factor of 3<b|U P U^dagger|b> for non-identity letters. The
    variance bound is 3^weight / snapshots.
    """
    if snapshots < 1:
        raise ValidationError("need at least one snapshot")
    if any(g.kind is GateKind.MEASURE for g in prep.all_gates()):
        raise ValidationError("the preparation circuit must be measurement-free")
    n = prep.n_qubits
    for obs in observables:
        if obs.n_qubits != n:
            raise ValidationError("observable width does not match the preparation circuit")
    psi = run_statevector(prep, cap=cap).amps
    group = clifford_group(1)
    rng = stream.generator()
    sums = np.zeros(len(observables))
    for _ in range(snapshots):
        chosen = [int(i) for i in rng.integers(0, len(group), size=n)]
        amps = psi[None, :].copy()
        for q, idx in enumerate(chosen):
            amps = apply_unitary_batch(amps, group.unitary(idx), (q,), n)
        probs = np.abs(amps[0]) ** 2
        outcome = int(np.searchsorted(np.cumsum(probs), rng.random() * probs.sum()))
        bits = [(outcome >> (n - 1 - q)) & 1 for q in range(n)]
        for oi, obs in enumerate(observables):
            value = 1.0
            for q, letter in enumerate(obs.letters):
                if letter == "I":
                    continue
                image, sign = group.conjugated_pauli(chosen[q], letter)
                if image != "Z":
                    value = 0.0
                    break
                value *= 3.0 * sign * (1.0 - 2.0 * bits[q])
            sums[oi] += value * obs.sign
    return [
        ShadowEstimate(str(obs), float(sums[oi] / snapshots),
                       (3.0 ** obs.weight) / snapshots, snapshots)
        for oi, obs in enumerate(observables)
    ]


# -- collision test ------------------------------------------------------------------


@dataclass
class CollisionTestResult:
    n_qubits: int
    shots: int
    stats: CollisionStats
    passed: bool
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "collision",
            "config": {"n_qubits": self.n_qubits, "shots": self.shots},
            "seeds": self.seeds,
            "items": [self.stats.to_json()],
            "aggregate": {"delta_hat": self.stats.delta_hat, "passed": self.passed},
        }


def collision_shots(n_qubits: int) -> int:
    """The 2^(n/2 + 5) sample-size rule."""
    return int(round(2.0 ** (n_qubits / 2.0 + 5)))


def run_collision_test(device: DeviceModel, noise: NoiseModel | None, n_qubits: int,
                       stream: SeedStream, transpile: TranspileConfig | None = None,
                       cap: int = DEFAULT_WIDTH_CAP) -> CollisionTestResult:
    """Collision-volume test on a fresh random model circuit; pass iff
    delta_hat >= 1/2 with the prescribed 2^(n/2+5) shot budget."""
    shots = collision_shots(n_qubits)
    circuit = layered_model_circuit(n_qubits, n_qubits, stream.child(0))
    executed = _transpile(measure_all(circuit), device, transpile)
    samples = sample_counts(executed, shots, noise, stream.child(1).generator(), cap=cap)
    stats = collision_volume(samples)
    return CollisionTestResult(n_qubits, shots, stats, stats.delta_hat >= 0.5,
                               stream.as_record())


# -- XEB device verification ----------------------------------------------------------


@dataclass
class XebVerifyResult:
    n_qubits: int
    alphas: list[float]
    alpha_mean: float
    stderr: float
    threshold: float
    verified: bool
    shots: int
    seeds: dict

    def to_record(self) -> dict:
        return {
            "protocol": "xeb_verify",
            "config": {"n_qubits": self.n_qubits, "shots": self.shots,
                       "threshold": self.threshold},
            "seeds": self.seeds,
            "items": [{"alpha_tilde": a} for a in self.alphas],
            "aggregate": {"alpha_mean": self.alpha_mean, "stderr": self.stderr,
                          "verified": self.verified},
        }


def xeb_verify_device(device: DeviceModel, noise: NoiseModel | None, n_qubits: int,
                      circuits: int, shots: int, stream: SeedStream,
                      threshold: float = 0.9, transpile: TranspileConfig | None = None,
                      cap: int = DEFAULT_WIDTH_CAP) -> XebVerifyResult:
    """Cross-entropy verification gate: mean alpha over fresh random circuits
    must reach the threshold before a benchmark run proceeds."""
    if circuits < 1:
        raise ValidationError("need at least one verification circuit")
    alphas = []
    for k in range(circuits):
        item = stream.child(k)
        circuit = layered_model_circuit(n_qubits, n_qubits, item.child(0))
        p_ideal = ideal_distribution(circuit, cap=cap)
        executed = _transpile(measure_all(circuit), device, transpile)
        samples = sample_counts(executed, shots, noise, item.child(1).generator(), cap=cap)
        alphas.append(xeb_alpha(samples, p_ideal).alpha_tilde)
    mean = float(np.mean(alphas))
    stderr = float(np.std(alphas, ddof=1) / math.sqrt(len(alphas))) if len(alphas) > 1 \
        else 1.0 / math.sqrt(shots)
    return XebVerifyResult(n_qubits, [float(a) for a in alphas], mean, stderr,
                           threshold, mean >= threshold, shots, stream.as_record())

"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""
import copy
import math
import time

import numpy as np
import pytest

from qbench.circuits import CX, Circuit, H, PauliString, measure_all
from qbench.device import DeviceModel
from qbench.distributions import ProbDist, SampleSet, index_to_bits
from qbench.metrics import (
    collision_delta, hog_probability, shots_for_precision, xeb_alpha,
)
from qbench.noise import NoiseModel
from qbench.protocols import (
    run_collision_test, run_mirror_benchmark, run_quantum_volume, run_rb,
    shadow_estimate, fit_rb_decay,
)
from qbench.randgen import layered_model_circuit, qv_model_circuit, random_clifford_circuit
from qbench.report import (
    Report, RunConfig, canonical_json, run_benchmark_suite, self_verify_report,
    strip_volatile,
)
from qbench.rng import SeedStream
from qbench.stabilizer import stabilizer_sample
from qbench.statevector import ideal_distribution, sample_counts
from qbench.transpile import TranspileConfig, run_pipeline


def _report(num: int, passed: bool, budget_s: float, elapsed: float, detail: str) -> None:
    verdict = "PASS" if passed and elapsed < budget_s else "FAIL"
    print(f"\nACCEPTANCE {num:>2} {verdict}: {detail} [{elapsed:.1f}s / budget {budget_s:.0f}s]")
    assert passed, detail
    assert elapsed < budget_s, f"criterion {num} exceeded its {budget_s:.0f}s budget ({elapsed:.1f}s)"


def _multinomial_samples(p: ProbDist, shots: int, rng) -> SampleSet:
    counts = rng.multinomial(shots, p.probs)
    return SampleSet(p.n_bits, {index_to_bits(int(i), p.n_bits): int(c)
                                for i, c in enumerate(counts) if c})


def test_criterion_1_hog_constants():
    t0 = time.perf_counter()
    ideal_hogs, uniform_hogs = [], []
    uniform = ProbDist.uniform(6)
    for k in range(200):
        p = ideal_distribution(qv_model_circuit(6, SeedStream(0xA1, (k,))))
        ideal_hogs.append(hog_probability(p, p))
        uniform_hogs.append(hog_probability(uniform, p))
    mean_ideal = float(np.mean(ideal_hogs))
    mean_uniform = float(np.mean(uniform_hogs))
    ok = 0.826 <= mean_ideal <= 0.866 and 0.49 <= mean_uniform <= 0.51
    _report(1, ok, 120, time.perf_counter() - t0,
            f"ideal-sampler HOG {mean_ideal:.4f} in [0.826, 0.866] "
            f"(target (1+ln2)/2 = {(1 + math.log(2)) / 2:.4f}); "
            f"uniform-sampler HOG {mean_uniform:.4f} in [0.49, 0.51]")


def test_criterion_2_quantum_volume_end_to_end():
    t0 = time.perf_counter()
    device = DeviceModel.complete(5)
    clean = run_quantum_volume(device, None, 5, 100, 1000, SeedStream(0xA2))
    noisy = run_quantum_volume(device, NoiseModel.uniform(p2=0.05), 5, 100, 1000,
                               SeedStream(0xA2, (1,)))
    ok = clean.quantum_volume == 32 and noisy.quantum_volume < clean.quantum_volume
    _report(2, ok, 300, time.perf_counter() - t0,
            f"noiseless QV = {clean.quantum_volume} (expected 32, widths "
            f"{[r.passed for r in clean.records]}); with 2q depolarizing 0.05 "
            f"QV = {noisy.quantum_volume} < 32")


def test_criterion_3_xeb_calibration():
    t0 = time.perf_counter()
    m = 100_000
    band = 3 / math.sqrt(m)
    circuit = layered_model_circuit(8, 8, SeedStream(0xA3))
    p = ideal_distribution(circuit)
    # The per-circuit ideal constant H(uniform, p) - H(p), exactly computable.
    const = -float(np.log(p.probs).mean()) + float((p.probs * np.log(p.probs)).sum())
    rng = SeedStream(0xA3, (1,)).generator()
    alpha_ideal = xeb_alpha(_multinomial_samples(p, m, rng), p).alpha_tilde
    alpha_uniform = xeb_alpha(_multinomial_samples(ProbDist.uniform(8), m, rng), p).alpha_tilde
    ok = abs(alpha_ideal - const) <= band and abs(alpha_uniform) <= band \
        and 0.8 <= const <= 1.3
    _report(3, ok, 60, time.perf_counter() - t0,
            f"ideal sampling alpha {alpha_ideal:.4f} within {band:.4f} of the derived "
            f"constant {const:.4f} (~1); uniform sampling alpha {alpha_uniform:+.4f} "
            f"within {band:.4f} of 0")


def test_criterion_4_collision_volume():
    t0 = time.perf_counter()
    n, runs = 14, 50
    m = 4096
    device = DeviceModel.complete(n)

    deltas_ideal = []
    for k in range(runs):
        result = run_collision_test(device, None, n, SeedStream(0xA4, (k,)))
        assert result.shots == m, "sample-size rule 2^(n/2+5) violated"
        deltas_ideal.append(result.stats.delta_hat)
    mean_ideal = float(np.mean(deltas_ideal))

    rng = SeedStream(0xA4, (999,)).generator()
    deltas_uniform = []
    for _ in range(runs):
        idx = rng.integers(0, 1 << n, size=m)
        distinct = len(np.unique(idx))
        deltas_uniform.append(collision_delta(m - distinct, m, 1 << n))
    mean_uniform = float(np.mean(deltas_uniform))

    flip = run_collision_test(device, NoiseModel.uniform(readout=0.5), n,
                              SeedStream(0xA4, (1000,)))
    one_pass = run_collision_test(device, None, n, SeedStream(0xA4, (0,)))
    ok = 0.8 <= mean_ideal <= 1.2 and -0.2 <= mean_uniform <= 0.2 \
        and one_pass.passed and not flip.passed
    _report(4, ok, 120, time.perf_counter() - t0,
            f"ideal Porter-Thomas mean delta {mean_ideal:.3f} in [0.8, 1.2]; uniform "
            f"mean delta {mean_uniform:+.3f} in [-0.2, 0.2]; test pass/fail flips "
            f"({one_pass.passed}/{flip.passed})")


def test_criterion_5_mirror_ceiling():
    t0 = time.perf_counter()
    device = DeviceModel.complete(50)
    result = run_mirror_benchmark(device, None, [6, 20, 50], [10], 20, 50,
                                  SeedStream(0xA5))
    successes = [r.success for r in result.records]
    ok = len(successes) == 60 and all(s == 1.0 for s in successes)
    _report(5, ok, 60, time.perf_counter() - t0,
            f"noiseless mirror success exactly 1.0 on all {len(successes)} runs "
            f"(20 bases x widths 6/20/50, tableau path)")


def test_criterion_6_rb_error_recovery():
    t0 = time.perf_counter()
    q = 0.01
    lengths = [2, 4, 8, 16, 32, 64, 128]
    result = run_rb(DeviceModel.complete(2), NoiseModel.uniform(p1=q), 1, lengths, 30,
                    200, SeedStream(0xA6))

    # Density-matrix oracle: exact survival curve of the same per-element
    # channel (uniform Pauli injection with probability q), then the same fit.
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]),
              np.array([[1, 0], [0, -1]])]
    survivals = []
    for length in lengths:
        rho = np.array([[1, 0], [0, 0]], dtype=complex)
        for _ in range(length + 1):
            # averaged over random Cliffords the unitary factor drops out of
            # the diagonal decay; apply only the noise channel
            rho = (1 - q) * rho + (q / 3) * sum(P @ rho @ P.conj().T for P in paulis)
        survivals.append(float(rho[0, 0].real))
    # survival toward 1/2 with decay (1 - 4q/3): fit it the same way
    _, p_oracle, _, _ = fit_rb_decay(lengths, survivals, 1)
    r_oracle = 0.5 * (1 - p_oracle)
    ok = abs(result.error_per_clifford - r_oracle) <= 0.2 * r_oracle
    _report(6, ok, 120, time.perf_counter() - t0,
            f"recovered error/Clifford {result.error_per_clifford:.5f} within 20% of "
            f"density-matrix oracle {r_oracle:.5f} (decay {result.decay:.5f})")


def test_criterion_7_simulator_cross_oracle():
    t0 = time.perf_counter()
    shots = 20_000
    worst_margin = -1e9
    all_ok = True
    rng_master = SeedStream(0xA7)
    for k in range(50):
        n = 4 + k % 5  # widths 4..8
        circuit = measure_all(random_clifford_circuit(n, 8, rng_master.child(k, 0)))
        p = ideal_distribution(circuit).probs
        sv = sample_counts(circuit, shots, None, rng_master.child(k, 1).generator())
        st = stabilizer_sample(circuit, shots, rng_master.child(k, 2).generator())
        tvd = 0.5 * float(np.abs(sv.empirical().probs - st.empirical().probs).sum())
        # Two-sample TVD bound: E|p1_i - p2_i| ~ sqrt(2/pi) sqrt(2 p(1-p)/m)
        # per outcome (conservative for sparse cells), sigma from bounded
        # differences is 1/sqrt(2m).
        expected = 0.5 * float(np.sum(np.sqrt(2 / math.pi) * np.sqrt(2 * p * (1 - p) / shots)))
        bound = expected + 3 / math.sqrt(2 * shots)
        if tvd > bound:
            all_ok = False
        worst_margin = max(worst_margin, tvd - bound)

    from qbench.circuits import GateKind

    device = DeviceModel.linear(6, native_gates=(GateKind.RZ, GateKind.RX, GateKind.CX))
    worst_dist = 0.0
    for k in range(20):
        width = 3 + k % 4  # 3..6
        circuit = measure_all(qv_model_circuit(width, SeedStream(0xA7, (100 + k,))))
        out, _ = run_pipeline(circuit, device, TranspileConfig())
        diff = float(np.max(np.abs(ideal_distribution(circuit).probs
                                   - ideal_distribution(out).probs)))
        worst_dist = max(worst_dist, diff)
    ok = all_ok and worst_dist < 1e-8
    _report(7, ok, 180, time.perf_counter() - t0,
            f"stabilizer vs statevector TVD within bound on 50 Clifford circuits "
            f"(worst margin {worst_margin:+.4f}); transpiled-vs-original ideal "
            f"distributions agree to {worst_dist:.2e} < 1e-8 on 20 circuits")


def test_criterion_8_shadows():
    t0 = time.perf_counter()
    snapshots = 10_000
    prep = Circuit.from_gates(3, [H(0), CX(0, 1), CX(1, 2)])
    zz, z = shadow_estimate(prep, [PauliString(3, "ZZI"), PauliString(3, "ZII")],
                            snapshots, SeedStream(0xA8))
    band_zz = 3 * math.sqrt(9 / snapshots)
    band_z = 3 * math.sqrt(3 / snapshots)
    ok = (abs(zz.estimate - 1.0) <= band_zz and abs(z.estimate) <= band_z
          and zz.variance_bound == 9 / snapshots and z.variance_bound == 3 / snapshots)
    _report(8, ok, 60, time.perf_counter() - t0,
            f"GHZ(3): <ZZI> = {zz.estimate:.4f} (1 +/- {band_zz:.3f}), <ZII> = "
            f"{z.estimate:+.4f} (0 +/- {band_z:.3f}); variance bounds exactly 3^k/N")


def _acceptance_config(seed: int = 0xA9) -> RunConfig:
    return RunConfig.from_json({
        "schema": "runcfg/1",
        "device": DeviceModel.complete(4).to_json(),
        "protocols": [
            {"name": "quantum_volume", "max_width": 3, "circuits_per_width": 10,
             "shots": 200, "strict": False},
            {"name": "mirror", "widths": [4], "depths": [4], "randomizations": 3,
             "shots": 100},
            {"name": "rb", "n_qubits": 1, "lengths": [2, 4, 8], "sequences_per_length": 5,
             "shots": 80},
        ],
        "verification": {"n": 4, "circuits": 5, "shots": 3000, "threshold": 0.7},
        "noise": {"ideal": True},
        "master_seed": seed,
    })


def test_criterion_9_reproducibility_and_self_verification():
    t0 = time.perf_counter()
    first = run_benchmark_suite(_acceptance_config())
    second = run_benchmark_suite(_acceptance_config())
    identical = canonical_json(strip_volatile(first.doc)) == \
        canonical_json(strip_volatile(second.doc))

    clean = self_verify_report(first)
    tampered_doc = copy.deepcopy(first.doc)
    for record in tampered_doc["base"]:
        if record["protocol"] == "mirror":
            record["aggregate"]["mean_success"] -= 1e-3
    tampered = self_verify_report(Report(tampered_doc))
    ok = identical and clean.ok and not tampered.ok
    _report(9, ok, 120, time.perf_counter() - t0,
            f"identical config+seed -> canonical reports identical modulo timing "
            f"({identical}); untampered self-verify ok ({clean.ok}); 1e-3 aggregate "
            f"perturbation detected ({not tampered.ok})")


def test_criterion_10_cramer_rao_plan():
    t0 = time.perf_counter()
    plan = shots_for_precision(0.5, 0.005)
    rng = SeedStream(0xAA).generator()
    estimates = rng.binomial(plan.shots, 0.5, size=200) / plan.shots
    std = float(np.std(estimates, ddof=1))
    ok = plan.shots == 10_000 and std <= 0.0055
    _report(10, ok, 60, time.perf_counter() - t0,
            f"shots_for_precision(0.5, 0.005) = {plan.shots} (expected 10000); Monte "
            f"Carlo std of p-hat over 200 repetitions = {std:.5f} <= 0.0055")

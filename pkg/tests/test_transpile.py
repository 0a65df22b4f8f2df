import numpy as np
import pytest

from qbench.circuits import (
    CX, Circuit, GateKind, H, Rz, SWAP, U2Q, inverse_circuit, measure_all,
)
from qbench.device import DeviceModel, validate_against_device
from qbench.errors import EquivalenceProbeError, TranspileError
from qbench.kak import sequence_matrix, synthesize_two_qubit, weyl_decompose
from qbench.randgen import haar_unitary, qv_model_circuit, random_clifford_circuit
from qbench.rng import SeedStream
from qbench.statevector import ideal_distribution, run_statevector
from qbench.transpile import (
    PASS_REGISTRY, TranspileConfig, cancel_inverse_gates, decompose_to_native,
    register_pass, route_swaps, run_pipeline,
)

RXCX = (GateKind.RZ, GateKind.RX, GateKind.CX)
RYCZ = (GateKind.RZ, GateKind.RY, GateKind.CZ)


class TestKak:
    def test_reconstruction_on_haar_samples(self):
        rng = SeedStream(60).generator()
        for _ in range(200):
            u = haar_unitary(4, rng)
            dec = weyl_decompose(u)
            assert np.max(np.abs(dec.reconstruct() - u)) < 1e-9

    def test_synthesis_uses_exactly_three_cx(self):
        rng = SeedStream(61).generator()
        for _ in range(100):
            u = haar_unitary(4, rng)
            seq = synthesize_two_qubit(u)
            assert sum(1 for op in seq.ops if op[0] == "cx") == 3
            m = sequence_matrix(seq)
            inner = np.trace(m.conj().T @ u)
            phase = inner / abs(inner)
            assert np.max(np.abs(phase * m - u)) < 1e-9

    def test_synthesis_of_clifford_specials(self):
        from qbench.circuits import gate_unitary

        for gate in (CX(0, 1), SWAP(0, 1)):
            u = gate_unitary(gate)
            seq = synthesize_two_qubit(u)
            m = sequence_matrix(seq)
            inner = np.trace(m.conj().T @ u)
            phase = inner / abs(inner)
            assert np.max(np.abs(phase * m - u)) < 1e-9


class TestRouting:
    def test_line_distance_two_needs_one_swap(self):
        c = measure_all(Circuit.from_gates(3, [CX(0, 2)]))
        routed = route_swaps(c, DeviceModel.linear(3))
        assert sum(1 for g in routed.all_gates() if g.kind is GateKind.SWAP) == 1

    def test_conformant_circuit_unchanged(self):
        c = measure_all(Circuit.from_gates(3, [H(0), CX(0, 1), CX(1, 2)]))
        routed = route_swaps(c, DeviceModel.linear(3))
        assert routed == c

    def test_distribution_preserved_after_relabeling(self):
        for k in range(20):
            c = measure_all(random_clifford_circuit(5, 6, SeedStream(62 + k)))
            routed = route_swaps(c, DeviceModel.linear(6))
            before = ideal_distribution(c).probs
            after = ideal_distribution(routed).probs
            assert np.max(np.abs(before - after)) < 1e-10

    def test_connectivity_violations_all_fixed(self):
        c = measure_all(random_clifford_circuit(5, 8, SeedStream(80)))
        routed = route_swaps(c, DeviceModel.linear(6))
        assert [v for v in validate_against_device(routed, DeviceModel.linear(6))
                if v.category == "connectivity"] == []

    def test_route_output_validates_clean_for_native_circuits(self):
        # Circuits over native kinds only: routing alone must leave zero violations.
        rng = SeedStream(81).generator()
        device = DeviceModel.linear(6, native_gates=(GateKind.H, GateKind.RZ,
                                                     GateKind.CX, GateKind.SWAP))
        for k in range(10):
            gates = []
            for _ in range(15):
                if rng.random() < 0.5:
                    gates.append(H(int(rng.integers(0, 5))))
                else:
                    a, b = rng.choice(5, size=2, replace=False)
                    gates.append(CX(int(a), int(b)))
            c = measure_all(Circuit.from_gates(5, gates))
            routed = route_swaps(c, device)
            assert validate_against_device(routed, device) == []

    def test_swaps_per_gate_bounded_by_diameter(self):
        device = DeviceModel.linear(7)
        diameter = 6
        for k in range(5):
            c = measure_all(random_clifford_circuit(7, 6, SeedStream(70 + k)))
            routed = route_swaps(c, device)
            swaps = routed.metadata["swaps_added"]
            two_q = sum(1 for g in c.all_gates() if len(g.targets) == 2)
            assert two_q == 0 or swaps / two_q <= diameter - 1

    def test_too_small_component_rejected(self):
        dev = DeviceModel(n_qubits=4, working=(True, True, False, True),
                          edges=((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)),
                          native_gates=frozenset({GateKind.CX, GateKind.H}))
        with pytest.raises(TranspileError):
            route_swaps(Circuit.from_gates(3, [CX(0, 2)]), dev)


class TestDecompose:
    def test_swap_with_native_cx_becomes_three_cx(self):
        dev = DeviceModel.linear(2, native_gates=RXCX)
        out = decompose_to_native(Circuit.from_gates(2, [SWAP(0, 1)]), dev)
        assert [g.kind for g in out.all_gates()] == [GateKind.CX] * 3

    def test_h_becomes_rz_rx_rz_equivalent(self):
        dev = DeviceModel.linear(1, native_gates=(GateKind.RZ, GateKind.RX))
        out = decompose_to_native(Circuit.from_gates(1, [H(0)]), dev)
        assert [g.kind for g in out.all_gates()] == [GateKind.RZ, GateKind.RX, GateKind.RZ]
        got = run_statevector(Circuit.from_gates(1, [H(0)])).amps
        lowered = run_statevector(out).amps
        phase = np.vdot(lowered, got)
        phase /= abs(phase)
        assert np.max(np.abs(phase * lowered - got)) < 1e-10

    def test_haar_u2q_distributions_match_to_1e_8(self):
        dev = DeviceModel.linear(2, native_gates=RXCX)
        rng = SeedStream(63).generator()
        for _ in range(20):
            u = haar_unitary(4, rng)
            c = measure_all(Circuit.from_gates(2, [U2Q(0, 1, u)]))
            out = decompose_to_native(c, dev)
            assert np.max(np.abs(ideal_distribution(c).probs
                                 - ideal_distribution(out).probs)) < 1e-8
            assert sum(1 for g in out.all_gates() if g.kind is GateKind.CX) == 3

    def test_cz_native_family(self):
        dev = DeviceModel.linear(2, native_gates=RYCZ)
        u = haar_unitary(4, SeedStream(64).generator())
        c = measure_all(Circuit.from_gates(2, [U2Q(0, 1, u), CX(1, 0)]))
        out = decompose_to_native(c, dev)
        assert validate_against_device(out, dev) == []
        assert np.max(np.abs(ideal_distribution(c).probs
                             - ideal_distribution(out).probs)) < 1e-8

    def test_non_universal_native_set_rejected(self):
        dev = DeviceModel.linear(2, native_gates=(GateKind.H, GateKind.CX))
        with pytest.raises(TranspileError):
            decompose_to_native(Circuit.from_gates(1, [Rz(0, 0.3)]), dev)


class TestPipeline:
    def test_base_on_conformant_circuit_unchanged_with_four_log_entries(self):
        dev = DeviceModel.linear(3, native_gates=RXCX)
        c = measure_all(Circuit.from_gates(3, [Rz(0, 0.4), CX(0, 1), CX(1, 2)]))
        out, log = run_pipeline(c, dev, TranspileConfig())
        assert out == c
        assert [e.name for e in log.entries] == ["validate", "route", "decompose", "validate"]
        assert log.entries[-1].violations == 0
        assert log.entries[-1].gates_out == out.gate_count()

    def test_base_determinism(self):
        dev = DeviceModel.linear(4, native_gates=RXCX)
        c = measure_all(qv_model_circuit(3, SeedStream(65)))
        out1, _ = run_pipeline(c, dev, TranspileConfig(seed=7))
        out2, _ = run_pipeline(c, dev, TranspileConfig(seed=7))
        assert out1 == out2

    def test_semantic_preservation_through_full_pipeline(self):
        dev = DeviceModel.linear(6, native_gates=RXCX)
        for k in range(6):
            c = measure_all(qv_model_circuit(4 + (k % 3), SeedStream(66 + k)))
            out, _ = run_pipeline(c, dev, TranspileConfig())
            assert validate_against_device(out, dev) == []
            assert np.max(np.abs(ideal_distribution(c).probs
                                 - ideal_distribution(out).probs)) < 1e-8

    def test_base_config_refuses_overrides(self):
        with pytest.raises(TranspileError):
            TranspileConfig(mode="base", passes=("route",))

    def test_peak_cancellation_beats_base_on_roundtrip_circuit(self):
        dev = DeviceModel.linear(3, native_gates=RXCX)
        base_circuit = random_clifford_circuit(3, 4, SeedStream(67))
        loop = measure_all(Circuit(3, base_circuit.layers + inverse_circuit(base_circuit).layers))
        out_base, _ = run_pipeline(loop, dev, TranspileConfig())
        peak_cfg = TranspileConfig(mode="peak",
                                   passes=("validate", "route", "decompose",
                                           "cancel_inverses", "validate"))
        out_peak, log = run_pipeline(loop, dev, peak_cfg)
        assert out_peak.gate_count() < out_base.gate_count()
        assert np.max(np.abs(ideal_distribution(loop).probs
                             - ideal_distribution(out_peak).probs)) < 1e-8

    def test_probe_rejects_non_equivalent_pass(self):
        def drop_last_gate(circuit, device, entry):
            gates = list(circuit.all_gates())
            body = [g for g in gates if g.kind is not GateKind.MEASURE]
            keep = body[:-1] + [g for g in gates if g.kind is GateKind.MEASURE]
            return Circuit.from_gates(circuit.n_qubits, keep, metadata=dict(circuit.metadata))

        register_pass("drop_last_gate", drop_last_gate)
        try:
            dev = DeviceModel.linear(3, native_gates=RXCX)
            c = measure_all(Circuit.from_gates(3, [H(0), CX(0, 1)]))
            cfg = TranspileConfig(mode="peak",
                                  passes=("route", "decompose", "drop_last_gate", "validate"))
            with pytest.raises(EquivalenceProbeError):
                run_pipeline(c, dev, cfg)
        finally:
            PASS_REGISTRY.pop("drop_last_gate", None)

    def test_unknown_pass_rejected(self):
        dev = DeviceModel.linear(2, native_gates=RXCX)
        cfg = TranspileConfig(mode="peak", passes=("no_such_pass",))
        with pytest.raises(TranspileError):
            run_pipeline(measure_all(Circuit.from_gates(2, [CX(0, 1)])), dev, cfg)


class TestCancellation:
    def test_adjacent_inverse_pairs_cancel_through_cascade(self):
        c = random_clifford_circuit(4, 6, SeedStream(68))
        loop = Circuit(4, c.layers + inverse_circuit(c).layers)
        assert cancel_inverse_gates(loop).gate_count() == 0

    def test_rotations_cancel_only_on_opposite_angles(self):
        c = Circuit.from_gates(1, [Rz(0, 0.3), Rz(0, -0.3)])
        assert cancel_inverse_gates(c).gate_count() == 0
        c2 = Circuit.from_gates(1, [Rz(0, 0.3), Rz(0, 0.3)])
        assert cancel_inverse_gates(c2).gate_count() == 2

    def test_intervening_gate_blocks_cancellation(self):
        c = Circuit.from_gates(2, [CX(0, 1), H(0), CX(0, 1)])
        assert cancel_inverse_gates(c).gate_count() == 3

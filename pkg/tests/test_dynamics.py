"""Recall dynamics: fields, parallel updates, attractors, margins."""

import numpy as np
import pytest

from gan_attractor.characteristic import CharacteristicSpec
from gan_attractor.core import GanSpec, PatternSet, build_network, random_pattern_set
from gan_attractor.dynamics import (
    local_field,
    pack_state,
    run_to_attractor,
    stability_margins,
    step_continuous,
    step_reference,
    step_sync,
    unpack_state,
)
from gan_attractor.learning import LearnConfig, hebb_weights
from gan_attractor.seeding import RunSeed

PARITY = CharacteristicSpec.parity()


def _random_network(rng, n, q, interacting=False, integer_weights=False):
    spec = GanSpec(n, q, PARITY, interacting=interacting)
    if integer_weights:
        w = rng.integers(-3, 4, size=(q, n, n)).astype(float)
    else:
        w = rng.normal(size=(q, n, n))
    for a in range(q):
        np.fill_diagonal(w[a], 0.0)
    l = None
    if interacting:
        l = rng.integers(-2, 3, size=(n, q, q)).astype(float) if integer_weights \
            else rng.normal(size=(n, q, q))
        idx = np.arange(q)
        l[:, idx, idx] = 0.0
    return build_network(spec, w, couplings=l)


def _random_state(rng, n, q):
    return (rng.random((n, q)) < 0.5).astype(np.uint8)


class TestPacking:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        bits = _random_state(rng, 17, 5)
        assert np.array_equal(unpack_state(pack_state(bits), 5), bits)

    def test_code_convention(self):
        """Variable a sits at bit a of the code (LSB first)."""
        bits = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8)
        assert list(pack_state(bits)) == [0b101, 0b110]


class TestLocalField:
    def test_zero_network_gives_zero_field(self):
        net = build_network(GanSpec(4, 2, PARITY), np.zeros((2, 4, 4)))
        bits = np.ones((4, 2), dtype=np.uint8)
        assert local_field(net, bits, 0, 0) == 0.0

    def test_hand_computed_three_neuron_instance(self):
        """N=3, Q=1, parity (f = the bit itself), hand-set weights."""
        spec = GanSpec(3, 1, PARITY)
        w = np.zeros((1, 3, 3))
        w[0, 0, 1], w[0, 0, 2] = 2.0, -1.5
        w[0, 1, 0], w[0, 1, 2] = 0.5, 0.25
        net = build_network(spec, w, thresholds=np.array([[0.1], [0.0], [0.0]]))
        bits = np.array([[1], [1], [0]], dtype=np.uint8)
        # field(0,0) = 2*f1 + (-1.5)*f2 - 0.1 = 2*1 - 1.5*0 - 0.1
        assert local_field(net, bits, 0, 0) == pytest.approx(1.9)
        # field(1,0) = 0.5*f0 + 0.25*f2 = 0.5
        assert local_field(net, bits, 1, 0) == pytest.approx(0.5)

    def test_interacting_term_adds_exactly(self):
        """Same instance extended with hand-set internal couplings."""
        spec = GanSpec(3, 2, PARITY, interacting=True)
        w = np.zeros((2, 3, 3))
        l = np.zeros((3, 2, 2))
        l[0, 0, 1] = 4.0
        net_int = build_network(spec, w, couplings=l)
        net_plain = build_network(GanSpec(3, 2, PARITY), w)
        bits = np.array([[0, 1], [1, 0], [1, 1]], dtype=np.uint8)
        base = local_field(net_plain, bits, 0, 0)
        assert local_field(net_int, bits, 0, 0) == pytest.approx(base + 4.0 * bits[0, 1])


class TestStepSync:
    def test_zero_fields_turn_every_bit_on(self):
        """H(0) = 1: the boundary belongs to the active side."""
        net = build_network(GanSpec(5, 3, PARITY), np.zeros((3, 5, 5)))
        rng = np.random.default_rng(1)
        out = step_sync(net, _random_state(rng, 5, 3))
        assert (out == 1).all()

    def test_single_stored_pattern_is_fixed(self):
        """Centered Hebb with one pattern: the pattern reproduces itself."""
        spec = GanSpec(10, 2, PARITY)
        ps = random_pattern_set(10, 2, 1, 0.5, RunSeed(21))
        net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
        assert np.array_equal(step_sync(net, ps.bits[0]), ps.bits[0])

    def test_antistate_maps_to_pattern_in_one_step(self):
        """Even-Q parity is flip-invariant, so the anti-state shares fields."""
        spec = GanSpec(10, 2, PARITY)
        ps = random_pattern_set(10, 2, 1, 0.5, RunSeed(21))
        net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
        anti = (1 - ps.bits[0]).astype(np.uint8)
        assert np.array_equal(step_sync(net, anti), ps.bits[0])

    def test_antistate_trajectories_coincide_from_step_one(self):
        rng = np.random.default_rng(3)
        net = _random_network(rng, 12, 2)
        s = _random_state(rng, 12, 2)
        assert np.array_equal(step_sync(net, s), step_sync(net, (1 - s).astype(np.uint8)))

    def test_positive_rescaling_leaves_trajectories_unchanged(self):
        rng = np.random.default_rng(4)
        spec = GanSpec(9, 2, PARITY, interacting=True)
        w = rng.normal(size=(2, 9, 9))
        for a in range(2):
            np.fill_diagonal(w[a], 0.0)
        l = rng.normal(size=(9, 2, 2))
        l[:, [0, 1], [0, 1]] = 0.0
        theta = rng.normal(size=(9, 2))
        net1 = build_network(spec, w, couplings=l, thresholds=theta)
        net2 = build_network(spec, 3.7 * w, couplings=3.7 * l, thresholds=3.7 * theta)
        s = _random_state(rng, 9, 2)
        for _ in range(10):
            s1, s2 = step_sync(net1, s), step_sync(net2, s)
            assert np.array_equal(s1, s2)
            s = s1

    def test_packed_equals_reference(self):
        """Spot check; the acceptance suite runs 1000 instances."""
        rng = np.random.default_rng(5)
        for interacting in (False, True):
            for integer_weights in (False, True):
                net = _random_network(rng, 14, 3, interacting, integer_weights)
                s = _random_state(rng, 14, 3)
                for _ in range(5):
                    a, b = step_sync(net, s), step_reference(net, s)
                    assert np.array_equal(a, b)
                    s = a

    def test_large_q_falls_back_to_per_neuron_evaluation(self):
        """Beyond the table limit (Q > 20) the stepper evaluates f per neuron
        and must still match the reference path."""
        rng = np.random.default_rng(15)
        q = 22
        spec = GanSpec(3, q, PARITY)
        w = rng.normal(size=(q, 3, 3))
        for a in range(q):
            np.fill_diagonal(w[a], 0.0)
        net = build_network(spec, w)
        assert net.f_table is None
        s = _random_state(rng, 3, q)
        for _ in range(3):
            a, b = step_sync(net, s), step_reference(net, s)
            assert np.array_equal(a, b)
            s = a


class TestRunToAttractor:
    def test_fixed_point_detected_immediately(self):
        spec = GanSpec(10, 2, PARITY)
        ps = random_pattern_set(10, 2, 1, 0.5, RunSeed(21))
        net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
        res = run_to_attractor(net, ps.bits[0], ps.bits[0], max_iters=10)
        assert res.cycle_length == 1
        assert res.iterations <= 1
        assert res.d_f == 0.0

    def test_zero_weight_network_reaches_all_ones(self):
        net = build_network(GanSpec(6, 2, PARITY), np.zeros((2, 6, 6)))
        rng = np.random.default_rng(6)
        res = run_to_attractor(net, _random_state(rng, 6, 2), np.ones((6, 2), np.uint8), 10)
        assert res.cycle_length == 1
        assert res.iterations <= 2
        assert (res.final_state == 1).all()
        assert res.d_f == 0.0

    def test_two_cycle_detected(self):
        """Mutual inverters under Q=1 parity: (0,0) <-> (1,1)."""
        spec = GanSpec(2, 1, PARITY)
        w = np.array([[[0.0, -2.0], [-2.0, 0.0]]])
        theta = np.full((2, 1), -1.0)
        net = build_network(spec, w, thresholds=theta)
        start = np.zeros((2, 1), dtype=np.uint8)
        res = run_to_attractor(net, start, start, max_iters=50)
        assert res.cycle_length == 2
        assert {res.d_f, res.d_f_cycle_min} == {0.0, 1.0} or res.d_f_cycle_min <= res.d_f

    def test_reapplying_cycle_length_steps_reproduces_final_state(self):
        """For any detected attractor, cycle_length further steps return to it."""
        rng = np.random.default_rng(7)
        nets = [_random_network(rng, 10, 2) for _ in range(20)]
        for seed in range(10):  # Hebb nets converge, covering cycle_length 1
            ps = random_pattern_set(10, 2, 1, 0.5, RunSeed(seed))
            spec = GanSpec(10, 2, PARITY)
            nets.append(build_network(spec, hebb_weights(ps, spec, LearnConfig())))
        checked = 0
        for net in nets:
            start = _random_state(rng, 10, 2)
            res = run_to_attractor(net, start, start, max_iters=200)
            if res.cycle_length >= 1:
                state = res.final_state
                for _ in range(res.cycle_length):
                    state = step_sync(net, state)
                assert np.array_equal(state, res.final_state)
                checked += 1
        assert checked > 10

    def test_nonconvergence_reported_not_raised(self):
        spec = GanSpec(2, 1, PARITY)
        w = np.array([[[0.0, -2.0], [-2.0, 0.0]]])
        net = build_network(spec, w, thresholds=np.full((2, 1), -1.0))
        res = run_to_attractor(net, np.zeros((2, 1), np.uint8), np.zeros((2, 1), np.uint8),
                               max_iters=1)
        assert res.cycle_length == 0
        assert res.iterations == 1

    def test_max_iters_must_be_positive(self):
        net = build_network(GanSpec(4, 2, PARITY), np.zeros((2, 4, 4)))
        s = np.zeros((4, 2), np.uint8)
        with pytest.raises(ValueError):
            run_to_attractor(net, s, s, max_iters=0)

    def test_dimension_mismatch(self):
        net = build_network(GanSpec(4, 2, PARITY), np.zeros((2, 4, 4)))
        with pytest.raises(ValueError):
            run_to_attractor(net, np.zeros((4, 2), np.uint8), np.zeros((5, 2), np.uint8), 5)


class TestConcurrentTrajectories:
    def test_shared_network_is_safe_for_parallel_runs(self):
        """Distinct trajectories on one immutable network: thread-pool results
        equal sequential results exactly (stepping never mutates the network)."""
        from concurrent.futures import ThreadPoolExecutor
        rng = np.random.default_rng(14)
        net = _random_network(rng, 16, 2)
        starts = [_random_state(rng, 16, 2) for _ in range(24)]
        ref = starts[0]
        sequential = [run_to_attractor(net, s, ref, max_iters=60).d_f for s in starts]
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = list(pool.map(lambda s: run_to_attractor(net, s, ref, 60).d_f, starts))
        assert sequential == threaded


class TestStabilityMargins:
    def test_zero_network_margins_are_zero(self):
        net = build_network(GanSpec(5, 2, PARITY), np.zeros((2, 5, 5)))
        ps = random_pattern_set(5, 2, 3, 0.5, RunSeed(1))
        report = stability_margins(net, ps)
        assert report.min_margin == 0.0
        assert (report.margins == 0.0).all()
        assert report.n_zero_fields == 3 * 5 * 2

    def test_single_hebb_pattern_has_positive_margins(self):
        spec = GanSpec(50, 2, PARITY)
        ps = random_pattern_set(50, 2, 1, 0.5, RunSeed(8))
        net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
        report = stability_margins(net, ps)
        assert report.min_margin > 0
        assert report.fixed_point_mask.all()

    def test_fixed_point_mask_matches_dynamics(self):
        """The mask is exactly 'one update leaves the pattern unchanged'."""
        rng = np.random.default_rng(9)
        for _ in range(30):
            net = _random_network(rng, 8, 2)
            ps = PatternSet(_random_state(rng, 8, 2)[None, :, :], 0.5)
            report = stability_margins(net, ps)
            is_fixed = np.array_equal(step_sync(net, ps.bits[0]), ps.bits[0])
            assert report.fixed_point_mask[0] == is_fixed

    def test_strictly_positive_margins_imply_fixed_point(self):
        """Low-load Hebb networks: every all-positive-margin pattern is fixed."""
        spec = GanSpec(30, 2, PARITY)
        found = 0
        for seed in range(30):
            ps = random_pattern_set(30, 2, 2, 0.5, RunSeed(seed))
            net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
            report = stability_margins(net, ps)
            for mu in range(2):
                if report.margins[mu].min() > 0:
                    found += 1
                    assert np.array_equal(step_sync(net, ps.bits[mu]), ps.bits[mu])
        assert found > 10  # the property was actually exercised

    def test_margin_demand_flag(self):
        spec = GanSpec(30, 2, PARITY)
        ps = random_pattern_set(30, 2, 1, 0.5, RunSeed(12))
        net = build_network(spec, hebb_weights(ps, spec, LearnConfig()))
        report = stability_margins(net, ps, kappa=1e9)
        assert not report.meets_demand
        report2 = stability_margins(net, ps, kappa=0.0)
        assert report2.meets_demand


class TestContinuousMode:
    def test_outputs_in_unit_interval(self):
        rng = np.random.default_rng(11)
        spec = GanSpec(7, 3, CharacteristicSpec.linear((0.2, 0.3, 0.5)))
        w = rng.normal(size=(3, 7, 7))
        for a in range(3):
            np.fill_diagonal(w[a], 0.0)
        net = build_network(spec, w)
        out = step_continuous(net, rng.random((7, 3)))
        assert ((out > 0) & (out < 1)).all()

    def test_requires_linear_kind(self):
        net = build_network(GanSpec(4, 2, PARITY), np.zeros((2, 4, 4)))
        with pytest.raises(ValueError, match="linear"):
            step_continuous(net, np.zeros((4, 2)))

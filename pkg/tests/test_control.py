from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthosim.control import (
    Bwa,
    ControllerState,
    GraspLatch,
    MotorState,
    Passive,
    Pwa,
    Region,
    RegionThresholds,
    Twa,
    bwa_step,
    classify_region,
    controller_step,
    pwa_step,
    twa_step,
)
from orthosim.errors import InvalidInputError
from orthosim.kinematics import WristSample

THR = RegionThresholds()
DT = 0.01

angles = st.floats(min_value=-120.0, max_value=120.0, allow_nan=False)
angle_streams = st.lists(angles, min_size=1, max_size=300)
modes = st.sampled_from([Twa(), Bwa(), Pwa(), Passive()])


def _wrist(t: float, angle: float) -> WristSample:
    return WristSample(timestamp=t, angle_deg=angle)


def _run_stream(mode, stream, motor=None):
    state = ControllerState(mode=mode, thresholds=THR, motor=motor or MotorState())
    states = []
    for i, angle in enumerate(stream):
        state = controller_step(state, _wrist(i * DT, angle), DT)
        states.append(state)
    return states


class TestClassifyRegion:
    def test_beyond_close_threshold_is_close(self):
        assert classify_region(20.0, THR) is Region.CLOSE

    def test_interior_is_neutral(self):
        assert classify_region(0.0, THR) is Region.NEUTRAL

    def test_boundary_maps_to_neutral(self):
        assert classify_region(15.0, THR) is Region.NEUTRAL
        assert classify_region(-15.0, THR) is Region.NEUTRAL

    def test_beyond_open_threshold_is_open(self):
        assert classify_region(-20.0, THR) is Region.OPEN

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(InvalidInputError):
            classify_region(bad, THR)

    def test_invalid_thresholds_rejected(self):
        with pytest.raises(InvalidInputError):
            RegionThresholds(open_deg=5.0, close_deg=15.0)

    @given(angles)
    def test_partition_is_total(self, angle):
        assert classify_region(angle, THR) in (Region.OPEN, Region.NEUTRAL, Region.CLOSE)


class TestTwaStep:
    def test_close_integrates_up(self):
        motor = MotorState(position=0.5, speed=0.25)
        assert twa_step(Region.CLOSE, motor, 0.1).position == pytest.approx(0.525)

    def test_neutral_holds_bit_identically(self):
        motor = MotorState(position=0.5)
        assert twa_step(Region.NEUTRAL, motor, DT).position == 0.5

    def test_close_clamps_at_upper_limit(self):
        motor = MotorState(position=1.0, speed=0.25, upper_limit=1.0)
        assert twa_step(Region.CLOSE, motor, DT).position == 1.0

    def test_open_clamps_at_zero(self):
        motor = MotorState(position=0.0)
        assert twa_step(Region.OPEN, motor, DT).position == 0.0

    def test_bad_dt_rejected(self):
        with pytest.raises(InvalidInputError):
            twa_step(Region.CLOSE, MotorState(), 0.0)


class TestBwaStep:
    def test_above_close_latches_grasping(self):
        latched, motor = bwa_step(20.0, THR, GraspLatch.RELAXED, MotorState(), DT)
        assert latched is GraspLatch.GRASPING
        assert motor.position == pytest.approx(0.25 * DT)

    def test_latch_holds_between_thresholds(self):
        latched, motor = bwa_step(0.0, THR, GraspLatch.GRASPING, MotorState(position=0.5), DT)
        assert latched is GraspLatch.GRASPING
        assert motor.position > 0.5  # still slewing toward the upper limit

    def test_below_open_latches_relaxed(self):
        latched, motor = bwa_step(-20.0, THR, GraspLatch.GRASPING, MotorState(position=0.5), DT)
        assert latched is GraspLatch.RELAXED
        assert motor.position < 0.5

    @given(angle_streams)
    @settings(max_examples=50, deadline=None)
    def test_setpoint_is_always_an_extreme(self, stream):
        # the motor under binary control only ever heads to 0 or upper_limit
        latched = GraspLatch.RELAXED
        motor = MotorState()
        for i, angle in enumerate(stream):
            before = motor.position
            latched, motor = bwa_step(angle, THR, latched, motor, DT)
            target = motor.upper_limit if latched is GraspLatch.GRASPING else 0.0
            moved = motor.position - before
            if moved != 0.0:
                assert math.copysign(1.0, moved) == math.copysign(1.0, target - before)
            else:
                assert before in (0.0, motor.upper_limit) or abs(target - before) < 1e-15


class TestPwaStep:
    def test_midpoint_setpoint(self):
        mode = Pwa(map_min_deg=0.0, map_max_deg=40.0)
        motor = MotorState(position=0.5, speed=1000.0)  # fast enough to reach in one tick
        out = pwa_step(20.0, mode, motor, DT)
        assert out.position == pytest.approx(0.5)

    def test_clamps_below_and_above(self):
        mode = Pwa(map_min_deg=0.0, map_max_deg=40.0)
        fast = MotorState(position=0.5, speed=1000.0)
        assert pwa_step(-10.0, mode, fast, DT).position == 0.0
        assert pwa_step(40.0, mode, fast, DT).position == 1.0

    def test_steady_state_stays_within_one_tick_of_setpoint(self):
        mode = Pwa()
        motor = MotorState()
        for i in range(600):
            motor = pwa_step(20.0, mode, motor, DT)
        assert abs(motor.position - 0.5) <= motor.speed * DT

    def test_invalid_map_rejected(self):
        with pytest.raises(InvalidInputError):
            Pwa(map_min_deg=40.0, map_max_deg=0.0)


class TestControllerStep:
    def test_passive_pins_motor_at_zero(self):
        state = ControllerState(mode=Passive(), thresholds=THR, motor=MotorState(position=0.7))
        out = controller_step(state, _wrist(0.0, 35.0), DT)
        assert out.motor.position == 0.0

    def test_twa_close_increases_position(self):
        state = ControllerState(mode=Twa(), thresholds=THR, motor=MotorState(position=0.5))
        out = controller_step(state, _wrist(0.0, 20.0), DT)
        assert out.motor.position > 0.5
        assert out.region is Region.CLOSE

    def test_pwa_slews_toward_zero_at_neutral_wrist(self):
        state = ControllerState(mode=Pwa(), thresholds=THR, motor=MotorState(position=0.5))
        out = controller_step(state, _wrist(0.0, 0.0), DT)
        assert out.motor.position < 0.5

    def test_bwa_latch_carried_in_returned_mode(self):
        state = ControllerState(mode=Bwa(), thresholds=THR, motor=MotorState())
        out = controller_step(state, _wrist(0.0, 20.0), DT)
        assert isinstance(out.mode, Bwa)
        assert out.mode.latched is GraspLatch.GRASPING


class TestInvariants:
    @given(modes, angle_streams)
    @settings(max_examples=80, deadline=None)
    def test_safety_clamp_under_any_stream(self, mode, stream):
        for state in _run_stream(mode, stream):
            assert 0.0 <= state.motor.position <= state.motor.upper_limit

    @given(st.lists(st.floats(min_value=-15.0, max_value=15.0, allow_nan=False),
                    min_size=2, max_size=100))
    @settings(max_examples=50, deadline=None)
    def test_twa_holds_bit_identical_through_neutral(self, stream):
        motor = MotorState(position=0.37)
        states = _run_stream(Twa(), stream, motor=motor)
        positions = {s.motor.position for s in states}
        assert positions == {0.37}

    @given(st.lists(st.floats(min_value=15.1, max_value=120.0, allow_nan=False),
                    min_size=2, max_size=100))
    @settings(max_examples=50, deadline=None)
    def test_twa_monotone_in_close(self, stream):
        states = _run_stream(Twa(), stream)
        positions = [s.motor.position for s in states]
        assert positions == sorted(positions)

    @given(st.lists(st.floats(min_value=-120.0, max_value=-15.1, allow_nan=False),
                    min_size=2, max_size=100))
    @settings(max_examples=50, deadline=None)
    def test_twa_monotone_in_open(self, stream):
        motor = MotorState(position=0.9)
        states = _run_stream(Twa(), stream, motor=motor)
        positions = [s.motor.position for s in states]
        assert positions == sorted(positions, reverse=True)

    @given(modes, angle_streams)
    @settings(max_examples=30, deadline=None)
    def test_identical_streams_give_identical_trajectories(self, mode, stream):
        first = [s.motor.position for s in _run_stream(mode, stream)]
        second = [s.motor.position for s in _run_stream(mode, stream)]
        assert first == second

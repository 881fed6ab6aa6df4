import pytest

from orthosim.control import MotorState, Region, RegionThresholds, Twa, ControllerState
from orthosim.engine import HoldTracker, advance_tick
from orthosim.plant import CalibrationAnchors, calibrate_plant

TICK = 0.01


def feed(tracker: HoldTracker, series):
    """Feed (time, force) samples; returns the tick at which success fired."""
    for t, force in series:
        tracker.update(force, t)
        if tracker.succeeded:
            return t
    return None


def synthetic(segments):
    """Build a (t, force) series from (duration, force) segments at the tick."""
    series = []
    t = 0.0
    for duration, force in segments:
        for _ in range(round(duration / TICK)):
            series.append((round(t, 10), force))
            t += TICK
    return series


class TestHoldTracker:
    def _tracker(self):
        return HoldTracker(target=5.0, band=1.0, hold=3.0, tick=TICK)

    def test_entering_and_holding_reports_the_entry_time(self):
        tracker = self._tracker()
        series = synthetic([(4.2, 0.0), (4.0, 5.0)])
        assert feed(tracker, series) is not None
        assert tracker.entry_t == pytest.approx(4.2)

    def test_never_in_band_never_succeeds(self):
        tracker = self._tracker()
        series = synthetic([(30.0, 9.0)])
        assert feed(tracker, series) is None
        assert tracker.entry_t is None

    def test_short_visit_resets_and_reentry_counts_fresh(self):
        # in band during [2, 3), out again, back in at 10 and holding
        tracker = self._tracker()
        series = synthetic([(2.0, 0.0), (1.0, 5.0), (7.0, 0.0), (4.0, 5.0)])
        assert feed(tracker, series) is not None
        assert tracker.entry_t == pytest.approx(10.0)

    def test_band_edges_count_as_in_band(self):
        tracker = self._tracker()
        series = synthetic([(4.0, 6.0)])  # exactly target + band
        assert feed(tracker, series) is not None
        assert tracker.entry_t == pytest.approx(0.0)

    def test_hold_progress_caps_at_the_requirement(self):
        tracker = self._tracker()
        for t, force in synthetic([(5.0, 5.0)]):
            tracker.update(force, t)
        assert tracker.hold_progress == pytest.approx(3.0)


class TestAdvanceTick:
    def test_controller_then_plant_in_one_tick(self):
        params = calibrate_plant(CalibrationAnchors())
        ctrl = ControllerState(
            mode=Twa(), thresholds=RegionThresholds(), motor=MotorState(position=0.5)
        )
        ctrl2, plant = advance_tick(ctrl, 20.0, 0.0, params, TICK)
        assert ctrl2.region is Region.CLOSE
        assert ctrl2.motor.position == pytest.approx(0.5 + 0.25 * TICK)
        # the plant sees the already-advanced motor position
        expected_device = params.contact.device_stiffness * (
            ctrl2.motor.position - params.contact.contact_excursion
        )
        assert plant.device_force == pytest.approx(expected_device)

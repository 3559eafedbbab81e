import numpy as np
import pytest

from teletwin.footboard import (
    FootSample,
    PedalId,
    PedalLayout,
    PedalRegion,
    PedalState,
    Side,
    default_layout,
    detect_pedals,
    minimap,
)


@pytest.fixture
def layout():
    return default_layout()


def region_center(layout, pedal):
    r = next(r for r in layout.regions if r.pedal == pedal)
    return (r.min_corner + r.max_corner) / 2.0


def foot(side, pos, height=0.0, valid=True):
    return FootSample(side, np.asarray(pos, dtype=float), height, valid)


class TestDetect:
    def test_feet_outside_all_regions(self, layout):
        feet = [foot(Side.LEFT, [5.0, 5.0]), foot(Side.RIGHT, [-5.0, -5.0])]
        state = detect_pedals(feet, layout, PedalState.empty())
        assert not any(state.pressed.values())
        assert state.edges == ()

    def test_press_with_edge(self, layout):
        feet = [foot(Side.LEFT, region_center(layout, PedalId.CLUTCH), height=0.0)]
        state = detect_pedals(feet, layout, PedalState.empty())
        assert state.is_pressed(PedalId.CLUTCH)
        assert (Side.LEFT, PedalId.CLUTCH) in state.edges

    def test_height_at_threshold_not_pressed(self, layout):
        pos = region_center(layout, PedalId.CAMERA)
        feet = [foot(Side.RIGHT, pos, height=0.02)]
        state = detect_pedals(feet, layout, PedalState.empty())
        assert not state.is_pressed(PedalId.CAMERA)

    def test_hold_has_no_second_edge(self, layout):
        feet = [foot(Side.LEFT, region_center(layout, PedalId.CLUTCH))]
        first = detect_pedals(feet, layout, PedalState.empty())
        second = detect_pedals(feet, layout, first)
        assert second.is_pressed(PedalId.CLUTCH)
        assert second.edges == ()

    def test_invalid_tracking_excluded_and_warned(self, layout):
        feet = [foot(Side.LEFT, region_center(layout, PedalId.CLUTCH), valid=False)]
        state = detect_pedals(feet, layout, PedalState.empty())
        assert not state.is_pressed(PedalId.CLUTCH)
        assert state.tracking_warning

    def test_invalid_height_rejected(self):
        with pytest.raises(ValueError):
            foot(Side.LEFT, [0, 0], height=-0.1, valid=True)

    def test_stateless_replay(self, layout):
        rng = np.random.default_rng(3)
        stream = [[foot(Side.LEFT, rng.uniform(-0.3, 0.3, 2), float(rng.uniform(0, 0.05))),
                   foot(Side.RIGHT, rng.uniform(-0.3, 0.3, 2), float(rng.uniform(0, 0.05)))]
                  for _ in range(200)]

        def run():
            out, prev = [], PedalState.empty()
            for feet in stream:
                prev = detect_pedals(feet, layout, prev)
                out.append((tuple(sorted((p.value, v) for p, v in prev.pressed.items())),
                            prev.edges))
            return out

        assert run() == run()

    def test_boundary_resolves_to_smallest_id(self):
        # two regions sharing an edge: a foot exactly on it picks "camera" < "clutch"
        a = PedalRegion(PedalId.CLUTCH, np.array([0.0, 0.0]), np.array([1.0, 1.0]))
        b = PedalRegion(PedalId.CAMERA, np.array([1.0, 0.0]), np.array([2.0, 1.0]))
        layout = PedalLayout((a, b))
        state = detect_pedals([foot(Side.LEFT, [1.0, 0.5])], layout, PedalState.empty())
        assert state.is_pressed(PedalId.CAMERA)
        assert not state.is_pressed(PedalId.CLUTCH)

    def test_overlapping_layout_rejected(self):
        a = PedalRegion(PedalId.CLUTCH, np.array([0.0, 0.0]), np.array([1.0, 1.0]))
        b = PedalRegion(PedalId.CAMERA, np.array([0.5, 0.5]), np.array([1.5, 1.5]))
        with pytest.raises(ValueError):
            PedalLayout((a, b))


class TestMinimap:
    def test_scale_one_at_zero_height(self, layout):
        feet = [foot(Side.LEFT, [0.0, 0.0], height=0.0)]
        model = minimap(feet, layout, PedalState.empty(), k=2.0)
        assert model.foot_icons[0].scale == 1.0

    def test_scale_formula(self, layout):
        feet = [foot(Side.LEFT, [0.0, 0.0], height=0.05)]
        model = minimap(feet, layout, PedalState.empty(), k=2.0)
        assert model.foot_icons[0].scale == pytest.approx(1.1)

    def test_black_iff_pressed(self, layout):
        feet = [foot(Side.LEFT, region_center(layout, PedalId.ENERGY2))]
        pedals = detect_pedals(feet, layout, PedalState.empty())
        model = minimap(feet, layout, pedals, k=2.0)
        for icon in model.pedal_icons:
            assert icon.black == (icon.pedal is PedalId.ENERGY2)

    def test_click_on_edge_only(self, layout):
        feet = [foot(Side.RIGHT, region_center(layout, PedalId.SWITCH))]
        first = detect_pedals(feet, layout, PedalState.empty())
        assert minimap(feet, layout, first, k=2.0).click_event
        second = detect_pedals(feet, layout, first)
        assert not minimap(feet, layout, second, k=2.0).click_event

    def test_invalid_foot_hidden(self, layout):
        feet = [foot(Side.LEFT, [0.0, 0.0], height=0.3, valid=False)]
        model = minimap(feet, layout, PedalState.empty(), k=2.0)
        assert not model.foot_icons[0].visible
        assert model.foot_icons[0].scale == 1.0

    def test_bad_gain_rejected(self, layout):
        with pytest.raises(ValueError):
            minimap([], layout, PedalState.empty(), k=0.0)

import numpy as np
import pytest

from app.exceptions import DimensionMismatchError, ValueRangeError
from app.models.imaging import FlowField, Frame
from app.utils.warp_utils import backward_warp, forward_warp, synthesize_candidates

from tests.conftest import shifted_triplet


def splat_oracle(src: np.ndarray, u: np.ndarray, v: np.ndarray, threshold: float):
    """Scalar reference splatting, one source pixel and one corner at a time."""
    height, width, channels = src.shape
    weights = np.zeros((height, width))
    colors = np.zeros((height, width, channels))
    for y in range(height):
        for x in range(width):
            tx, ty = x + u[y, x], y + v[y, x]
            x0, y0 = int(np.floor(tx)), int(np.floor(ty))
            fx, fy = tx - x0, ty - y0
            for cx, cy, w in ((x0, y0, (1 - fx) * (1 - fy)), (x0 + 1, y0, fx * (1 - fy)),
                              (x0, y0 + 1, (1 - fx) * fy), (x0 + 1, y0 + 1, fx * fy)):
                if 0 <= cx < width and 0 <= cy < height:
                    weights[cy, cx] += w
                    colors[cy, cx] += w * src[y, x]
    holes = weights < threshold
    out = np.zeros_like(colors)
    out[~holes] = colors[~holes] / weights[~holes, None]
    return out, holes


def test_zero_flow_is_identity(rng):
    src = Frame(data=rng.random((9, 7, 3)))
    out, holes = forward_warp(src, FlowField.zeros(7, 9))
    assert np.array_equal(out.data, src.data)
    assert not holes.h.any()


def test_integer_shift(rng):
    data = rng.random((6, 8, 3))
    out, holes = forward_warp(Frame(data=data), FlowField.uniform(8, 6, 1.0, 0.0))
    assert np.array_equal(out.data[:, 1:], data[:, :-1])
    assert holes.h[:, 0].all()
    assert not holes.h[:, 1:].any()
    assert np.all(out.data[:, 0] == 0)


def test_half_pixel_shift_matches_oracle(rng):
    data = rng.random((8, 8, 1))
    flow = FlowField.uniform(8, 8, 0.5, 0.0)
    out, holes = forward_warp(Frame(data=data), flow)
    expected, expected_holes = splat_oracle(data, flow.u, flow.v, 0.25)
    assert np.max(np.abs(out.data - expected)) < 1e-6
    assert np.array_equal(holes.h, expected_holes)
    # interior pixels average the two half-weight contributions
    assert np.allclose(out.data[:, 3, 0], 0.5 * (data[:, 2, 0] + data[:, 3, 0]))


@pytest.mark.parametrize("seed", range(5))
def test_random_flow_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    data = rng.random((8, 8, 3))
    flow = FlowField(u=rng.uniform(-2, 2, (8, 8)), v=rng.uniform(-2, 2, (8, 8)))
    out, holes = forward_warp(Frame(data=data), flow)
    expected, expected_holes = splat_oracle(data, flow.u, flow.v, 0.25)
    assert np.max(np.abs(out.data - expected)) < 1e-6
    assert np.array_equal(holes.h, expected_holes)


def test_convex_hull_property(rng):
    data = 0.2 + 0.5 * rng.random((10, 10, 3))
    flow = FlowField(u=rng.uniform(-3, 3, (10, 10)), v=rng.uniform(-3, 3, (10, 10)))
    out, holes = forward_warp(Frame(data=data), flow)
    covered = out.data[~holes.h]
    assert covered.min() >= data.min() - 1e-12
    assert covered.max() <= data.max() + 1e-12


def test_mass_conservation_for_integer_flow(rng):
    data = rng.random((6, 6, 1))
    out, holes = forward_warp(Frame(data=data), FlowField.uniform(6, 6, 2.0, 1.0))
    kept = data[:-1, :-2]  # sources landing inside the frame
    assert out.data[~holes.h].sum() == pytest.approx(kept.sum(), rel=1e-12)


def test_forward_warp_validation():
    src = Frame(data=np.zeros((4, 4)))
    with pytest.raises(ValueRangeError):
        forward_warp(src, FlowField.zeros(4, 4), coverage_threshold=0.0)
    with pytest.raises(DimensionMismatchError):
        forward_warp(src, FlowField.zeros(5, 4))


def test_backward_warp():
    width = 6
    ramp = np.tile(np.arange(width) / width, (3, 1))
    src = Frame(data=ramp)
    assert np.array_equal(backward_warp(src, FlowField.zeros(width, 3)).data, src.data)
    shifted = backward_warp(src, FlowField.uniform(width, 3, 1.0, 0.0)).data[:, :, 0]
    assert np.allclose(shifted[:, :-1], ramp[:, 1:])
    assert np.allclose(shifted[:, -1], ramp[:, -1])
    constant = Frame(data=np.full((5, 5, 3), 0.4))
    rng = np.random.default_rng(0)
    flow = FlowField(u=rng.normal(size=(5, 5)) * 3, v=rng.normal(size=(5, 5)) * 3)
    assert np.allclose(backward_warp(constant, flow).data, 0.4)


def test_candidates_for_identical_frames(rng):
    f = Frame(data=rng.random((6, 6, 3)))
    I1t, H1t, I3t, H3t = synthesize_candidates(f, f, FlowField.zeros(6, 6), FlowField.zeros(6, 6), 0.5)
    assert np.array_equal(I1t.data, f.data) and np.array_equal(I3t.data, f.data)
    assert not H1t.h.any() and not H3t.h.any()


def test_candidates_reproduce_middle_frame_under_translation():
    f1, f2, f3 = shifted_triplet(height=16, width=20, step=1)
    F13 = FlowField.uniform(20, 16, 2.0, 0.0)
    F31 = FlowField.uniform(20, 16, -2.0, 0.0)
    I1t, H1t, I3t, H3t = synthesize_candidates(f1, f3, F13, F31, 0.5)
    overlap = ~(H1t.h | H3t.h)
    assert np.max(np.abs(I1t.data[overlap] - I3t.data[overlap])) < 1e-6
    assert np.max(np.abs(I1t.data[overlap] - f2.data[overlap])) < 1e-6
    assert np.array_equal(H1t.h, H3t.h[:, ::-1])


def test_candidates_reject_endpoint_t(rng):
    f = Frame(data=rng.random((4, 4)))
    with pytest.raises(ValueRangeError):
        synthesize_candidates(f, f, FlowField.zeros(4, 4), FlowField.zeros(4, 4), 1.0)

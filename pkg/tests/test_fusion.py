import time

import numpy as np
import pytest

from app.exceptions import DimensionMismatchError, VFIError
from app.models.imaging import FlowField, Frame, HoleMask, MaskMap
from app.utils.fusion_utils import (attention_fuse, blend_average, contribution_mask, fill_joint_holes,
                                    interpolate, interpolate_detailed, oracle_mask)
from app.utils.metrics_utils import masked_psnr

from tests.conftest import shifted_triplet, smooth_texture


def _dyadic_mask(rng, shape):
    return MaskMap(w=rng.integers(0, 1025, size=shape) / 1024.0)


def _crop(frame: Frame, fraction: float = 0.9) -> Frame:
    h, w = frame.height, frame.width
    my, mx = int(round(h * (1 - fraction) / 2)), int(round(w * (1 - fraction) / 2))
    return Frame(data=frame.data[my:h - my, mx:w - mx])


def test_fuse_identities(rng):
    for _ in range(100):
        a = Frame(data=rng.random((5, 6, 3)))
        b = Frame(data=rng.random((5, 6, 3)))
        w = _dyadic_mask(rng, (5, 6))
        assert np.array_equal(attention_fuse(a, b, MaskMap.constant(6, 5, 1.0)).data, a.data)
        assert np.array_equal(attention_fuse(a, b, MaskMap.constant(6, 5, 0.0)).data, b.data)
        swapped = attention_fuse(b, a, MaskMap(w=1.0 - w.w))
        assert np.array_equal(attention_fuse(a, b, w).data, swapped.data)
        fused = attention_fuse(a, b, w).data
        assert np.all(fused >= np.minimum(a.data, b.data) - 1e-12)
        assert np.all(fused <= np.maximum(a.data, b.data) + 1e-12)


def test_fuse_arithmetic_and_self_fusion(rng):
    a = Frame(data=np.full((3, 3, 1), 0.2))
    b = Frame(data=np.full((3, 3, 1), 0.6))
    assert np.allclose(attention_fuse(a, b, MaskMap.constant(3, 3, 0.5)).data, 0.4)
    frame = Frame(data=rng.random((4, 4, 3)))
    w = MaskMap(w=rng.random((4, 4)))
    assert np.allclose(attention_fuse(frame, frame, w).data, frame.data, atol=1e-12)


def test_fuse_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        attention_fuse(Frame(data=np.zeros((2, 2))), Frame(data=np.zeros((2, 3))), MaskMap.constant(2, 2, 0.5))


def _mask_inputs(holes1, holes3):
    shape = holes1.shape
    frame = Frame(data=np.zeros(shape))
    flow = FlowField.zeros(shape[1], shape[0])
    return frame, frame, flow, flow, HoleMask(h=holes1), HoleMask(h=holes3)


def test_contribution_mask_without_holes_is_base_weight():
    none = np.zeros((7, 7), dtype=bool)
    w = contribution_mask(*_mask_inputs(none, none), 0.5)
    assert np.allclose(w.w, 0.5)
    w = contribution_mask(*_mask_inputs(none, none), 0.25)
    assert np.allclose(w.w, 0.75)


def test_contribution_mask_exclusive_hole_overrides():
    holes1 = np.zeros((9, 9), dtype=bool)
    holes3 = np.zeros((9, 9), dtype=bool)
    holes1[4, 2] = True
    holes3[4, 6] = True
    holes1[0, 0] = holes3[0, 0] = True
    w = contribution_mask(*_mask_inputs(holes1, holes3), 0.5)
    assert w.w[4, 2] == 0.0
    assert w.w[4, 6] == 1.0
    assert 0.0 < w.w[0, 0] < 1.0
    assert w.w.min() >= 0.0 and w.w.max() <= 1.0


def test_fill_joint_holes_cases():
    frame = Frame(data=np.full((5, 5, 1), 0.5))
    assert fill_joint_holes(frame, HoleMask.empty(5, 5)) is frame
    holes = np.zeros((5, 5), dtype=bool)
    holes[2, 2] = True
    data = np.full((5, 5, 1), 0.5)
    data[2, 2] = 0.0
    filled = fill_joint_holes(Frame(data=data), HoleMask(h=holes))
    assert filled.data[2, 2, 0] == pytest.approx(0.5)


def test_fill_joint_holes_inside_ramp_stays_within_ring():
    ramp = np.tile(np.arange(6) / 10.0, (6, 1))[:, :, None]
    holes = np.zeros((6, 6), dtype=bool)
    holes[2:4, 2:4] = True
    data = ramp.copy()
    data[holes] = 0.0
    filled = fill_joint_holes(Frame(data=data), HoleMask(h=holes)).data[:, :, 0]
    ring = ramp[1:5, 1:5, 0][~holes[1:5, 1:5]]
    assert filled[holes].min() >= ring.min()
    assert filled[holes].max() <= ring.max()
    assert np.array_equal(filled[~holes], ramp[~holes][:, 0])


def test_fill_joint_holes_rejects_all_holes():
    with pytest.raises(VFIError):
        fill_joint_holes(Frame(data=np.zeros((3, 3))), HoleMask(h=np.ones((3, 3), dtype=bool)))


def test_oracle_mask_closed_form_cases(rng):
    in1 = Frame(data=rng.random((6, 6, 3)))
    in2 = Frame(data=rng.random((6, 6, 3)))
    assert np.allclose(oracle_mask(in1, in2, in1).w, 1.0)
    mid = Frame(data=(in1.data + in2.data) / 2)
    assert np.allclose(oracle_mask(in1, in2, mid).w, 0.5)
    assert np.all(oracle_mask(in1, in1, in2).w == 0.5)


def test_oracle_mask_dominates_constant_masks():
    grid = np.linspace(0.0, 1.0, 101)
    violations = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        in1, in2, gt = (Frame(data=rng.random((8, 8, 3))) for _ in range(3))
        best = oracle_mask(in1, in2, gt).w[:, :, None]
        oracle_err = np.sum((best * in1.data + (1 - best) * in2.data - gt.data) ** 2, axis=2)
        for w in grid:
            err = np.sum((w * in1.data + (1 - w) * in2.data - gt.data) ** 2, axis=2)
            violations += int(np.sum(oracle_err > err + 1e-12))
        raw = np.minimum(np.sum((in1.data - gt.data) ** 2, axis=2), np.sum((in2.data - gt.data) ** 2, axis=2))
        violations += int(np.sum(oracle_err > raw + 1e-12))
    assert violations == 0


def test_interpolate_identical_frames():
    f = Frame(data=smooth_texture(24, 24, seed=5, channels=3))
    out = interpolate(f, f)
    assert np.max(np.abs(out.data - f.data)) < 1e-3


def test_interpolate_with_zero_flows_averages(rng):
    f1 = Frame(data=rng.random((8, 8, 3)))
    f3 = Frame(data=rng.random((8, 8, 3)))
    zero = FlowField.zeros(8, 8)
    out = interpolate(f1, f3, 0.5, flows=(zero, zero))
    assert np.allclose(out.data, 0.5 * f1.data + 0.5 * f3.data, atol=1e-12)
    assert np.allclose(blend_average(f1, f3, 0.5).data, out.data, atol=1e-12)


def test_interpolate_translation_with_exact_flows():
    f1, f2, f3 = shifted_triplet(height=40, width=40, step=1)
    flows = (FlowField.uniform(40, 40, 2.0, 0.0), FlowField.uniform(40, 40, -2.0, 0.0))
    out = interpolate(f1, f3, 0.5, flows=flows)
    assert masked_psnr(_crop(out), _crop(f2)) > 40.0


def test_interpolate_translation_with_estimated_flows():
    f1, f2, f3 = shifted_triplet(height=64, width=64, step=1, sigma=3.0)
    start = time.perf_counter()
    out = interpolate(f1, f3, 0.5)
    assert time.perf_counter() - start < 10.0
    assert masked_psnr(_crop(out), _crop(f2)) > 30.0


def test_interpolate_is_deterministic():
    f1, _, f3 = shifted_triplet(height=24, width=24)
    first = interpolate_detailed(f1, f3)
    second = interpolate_detailed(f1, f3)
    assert np.array_equal(first.frame.data, second.frame.data)
    assert first.contribution.w.shape == (24, 24)


@pytest.mark.parametrize("shape", [(1, 16), (16, 1)])
def test_interpolate_single_row_and_column(shape):
    x = np.arange(16, dtype=np.float64)
    first = 0.5 + 0.3 * np.sin(x / 2.5)
    last = 0.5 + 0.3 * np.sin((x - 1.0) / 2.5)
    f1 = Frame(data=np.repeat(first.reshape(shape)[:, :, None], 3, axis=2))
    f3 = Frame(data=np.repeat(last.reshape(shape)[:, :, None], 3, axis=2))
    out = interpolate(f1, f3, 0.5)
    assert out.size == (shape[1], shape[0])
    assert np.all(np.isfinite(out.data))

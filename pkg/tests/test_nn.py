import math

import numpy as np
import pytest

from smoothcert import rng
from smoothcert.nn import (
    Gradients,
    MlpModel,
    SgdState,
    backward,
    backward_batch,
    cross_entropy_batch,
    cross_entropy_loss,
    forward,
    forward_batch,
    forward_with_cache,
    init_model,
    plain_step,
    sgd_step,
)

from conftest import central_diff, loop_forward, rand_model, relative_error


def model_of(*mats):
    return MlpModel(tuple(np.asarray(m, dtype=float) for m in mats))


# ---------------------------------------------------------------- forward

def test_forward_single_layer_is_linear():
    m = model_of([[2.0, 0.0], [0.0, 3.0]])
    assert np.allclose(forward(m, [1.0, 1.0]), [2.0, 3.0])


def test_forward_relu_kills_negative_hidden_coordinate():
    m = model_of(np.eye(2), np.eye(2))
    assert np.allclose(forward(m, [-1.0, 2.0]), [0.0, 2.0])


def test_forward_no_relu_on_output_layer():
    m = model_of([[1.0, 0.0], [0.0, 1.0]])
    out = forward(m, [-5.0, 1.0])
    assert out[0] == -5.0  # stays negative


def test_forward_matches_loop_oracle(tiny_model):
    g = rng.stream(1, 98)
    for _ in range(20):
        x = g.standard_normal(6)
        got = forward(tiny_model, x)
        want = loop_forward(tiny_model, x)
        assert relative_error(got, want) < 1e-12


def test_forward_dimension_mismatch():
    m = model_of([[1.0, 2.0]])
    with pytest.raises(ValueError):
        forward(m, [1.0, 2.0, 3.0])


def test_forward_batch_matches_single(tiny_model):
    X = rng.stream(2, 98).standard_normal((9, 6))
    logits, _ = forward_batch(tiny_model, X)
    for i in range(9):
        assert np.allclose(logits[i], forward(tiny_model, X[i]), atol=0, rtol=1e-14)


# ---------------------------------------------------------------- backward

def test_backward_zero_upstream_gives_zero_grads(tiny_model):
    x = rng.stream(3, 98).standard_normal(6)
    _, cache = forward_with_cache(tiny_model, x)
    grads = backward(tiny_model, cache, np.zeros(3))
    for g in grads.layers:
        assert np.all(g == 0.0)


def test_backward_finite_difference():
    model = rand_model((5, 4, 4, 3), seed=11)
    g = rng.stream(4, 98)
    x = g.standard_normal(5)
    # keep away from ReLU kinks: nudge x until no pre-activation is near 0
    _, cache = forward_with_cache(model, x)
    target = g.standard_normal(3)

    def loss_of(model_):
        out = forward(model_, x)
        return float(out @ target)

    _, cache = forward_with_cache(model, x)
    grads = backward(model, cache, target)
    for li in range(len(model.layers)):
        def f(w, li=li):
            layers = list(model.layers)
            layers[li] = w
            return loss_of(MlpModel(tuple(layers)))

        fd = central_diff(f, model.layers[li].copy(), step=1e-5)
        assert relative_error(grads.layers[li], fd) < 1e-6


def test_backward_batch_sums_per_sample_grads():
    model = rand_model((4, 3, 2), seed=5)
    X = rng.stream(6, 98).standard_normal((7, 4))
    U = rng.stream(7, 98).standard_normal((7, 2))
    _, cache = forward_batch(model, X)
    got = backward_batch(model, cache, U)
    want = [np.zeros_like(L) for L in model.layers]
    for i in range(7):
        _, ci = forward_with_cache(model, X[i])
        gi = backward(model, ci, U[i])
        for j, gl in enumerate(gi.layers):
            want[j] += gl
    for j in range(len(want)):
        assert np.allclose(got.layers[j], want[j], rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------- optimizer

def test_sgd_single_step_plain():
    m = model_of([[1.0]])
    st = SgdState(velocities=tuple(np.zeros((1, 1)) for _ in range(1)))
    g = Gradients(layers=(np.array([[1.0]]),))
    out = sgd_step(m, g, st, lr=0.1, momentum=0.0, weight_decay=0.0)
    assert out.layers[0][0, 0] == pytest.approx(0.9, abs=0)


def test_sgd_two_steps_momentum_hand_recurrence():
    # v1 = 1, w1 = -0.1 ; v2 = 0.9 + 1 = 1.9, w2 = -0.1 - 0.19 = -0.29
    m = model_of([[0.0]])
    st = SgdState(velocities=(np.zeros((1, 1)),))
    g = Gradients(layers=(np.array([[1.0]]),))
    m = sgd_step(m, g, st, lr=0.1, momentum=0.9)
    m = sgd_step(m, g, st, lr=0.1, momentum=0.9)
    assert m.layers[0][0, 0] == pytest.approx(-0.29, abs=1e-15)


def test_sgd_lr_zero_leaves_model_unchanged(tiny_model):
    st = SgdState(velocities=tuple(np.zeros_like(L) for L in tiny_model.layers))
    g = Gradients(layers=tuple(np.ones_like(L) for L in tiny_model.layers))
    out = sgd_step(tiny_model, g, st, lr=0.0, momentum=0.9)
    for a, b in zip(out.layers, tiny_model.layers):
        assert np.array_equal(a, b)


def test_sgd_weight_decay_shrinks_weights():
    m = model_of([[2.0]])
    st = SgdState(velocities=(np.zeros((1, 1)),))
    g = Gradients(layers=(np.array([[0.0]]),))
    out = sgd_step(m, g, st, lr=0.1, momentum=0.0, weight_decay=0.5)
    # v = 0 + 0 + 0.5*2 = 1 ; w = 2 - 0.1
    assert out.layers[0][0, 0] == pytest.approx(1.9, abs=1e-15)


def test_sgd_rejects_nonfinite_gradient():
    m = model_of([[1.0]])
    st = SgdState(velocities=(np.zeros((1, 1)),))
    g = Gradients(layers=(np.array([[np.nan]]),))
    with pytest.raises(FloatingPointError):
        sgd_step(m, g, st, lr=0.1)


def test_plain_step():
    m = model_of([[1.0, 2.0]])
    g = Gradients(layers=(np.array([[1.0, -1.0]]),))
    out = plain_step(m, g, 0.5)
    assert np.allclose(out.layers[0], [[0.5, 2.5]])


# ---------------------------------------------------------------- loss

def test_cross_entropy_uniform_logits():
    loss, _ = cross_entropy_loss(np.zeros(10), 3)
    assert loss == pytest.approx(math.log(10.0), rel=1e-15)


def test_cross_entropy_gradient_finite_difference():
    z = rng.stream(8, 98).standard_normal(6)
    _, grad = cross_entropy_loss(z, 2)

    def f(z_):
        return cross_entropy_loss(z_, 2)[0]

    fd = central_diff(f, z.copy(), step=1e-6)
    assert relative_error(grad, fd) < 1e-6


def test_cross_entropy_gradient_sums_to_zero():
    z = rng.stream(9, 98).standard_normal(4)
    _, grad = cross_entropy_loss(z, 0)
    assert abs(grad.sum()) < 1e-14


def test_cross_entropy_shift_invariance():
    z = rng.stream(10, 98).standard_normal(5)
    a, _ = cross_entropy_loss(z, 1)
    b, _ = cross_entropy_loss(z + 1000.0, 1)
    assert a == pytest.approx(b, rel=1e-12)


def test_cross_entropy_batch_is_mean_of_singles():
    Z = rng.stream(11, 98).standard_normal((6, 4))
    y = np.array([0, 1, 2, 3, 0, 1])
    loss, grad = cross_entropy_batch(Z, y)
    singles = [cross_entropy_loss(Z[i], int(y[i])) for i in range(6)]
    assert loss == pytest.approx(np.mean([s[0] for s in singles]), rel=1e-14)
    want = np.stack([s[1] for s in singles]) / 6.0
    assert np.allclose(grad, want, rtol=1e-14, atol=1e-16)


# ---------------------------------------------------------------- init

def test_init_model_deterministic():
    a = init_model((8, 5, 3), seed=4)
    b = init_model((8, 5, 3), seed=4)
    for la, lb in zip(a.layers, b.layers):
        assert np.array_equal(la, lb)
    c = init_model((8, 5, 3), seed=5)
    assert not np.array_equal(a.layers[0], c.layers[0])


def test_init_model_shapes_and_scale():
    m = init_model((100, 50, 10), seed=0)
    assert [L.shape for L in m.layers] == [(50, 100), (10, 50)]
    # He init: std ~ sqrt(2/fan_in)
    assert np.std(m.layers[0]) == pytest.approx(math.sqrt(2.0 / 100.0), rel=0.1)


def test_init_model_needs_two_dims():
    with pytest.raises(ValueError):
        init_model((5,))

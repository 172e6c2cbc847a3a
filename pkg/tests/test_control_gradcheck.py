import numpy as np
import pytest

from sketchpipe.control.branch import ZeroConv
from sketchpipe.control.fusion import FusionParams
from sketchpipe.control.gradcheck import ProjectionLayer, grad_check, sum_squares_loss


def test_sum_squares_loss():
    assert sum_squares_loss(np.array([3.0, 4.0])) == 25.0
    assert sum_squares_loss(np.zeros((2, 2))) == 0.0


def test_projection_layer_passes():
    rng = np.random.default_rng(1)
    layer = ProjectionLayer(rng.standard_normal((12, 20)))
    x = rng.standard_normal(20)
    assert grad_check(layer, x, step=1e-4, samples=20) < 1e-4


def test_fusion_projection_passes():
    layer = ProjectionLayer(FusionParams.seeded().projection)
    x = np.random.default_rng(2).standard_normal(784)
    assert grad_check(layer, x, samples=25) < 1e-4


def test_zero_conv_passes_at_nonzero_weights():
    # move the layer off its all-zero init so the gradients are non-trivial
    zc = ZeroConv(5)
    rng = np.random.default_rng(3)
    zc.weight[:] = rng.standard_normal(zc.weight.shape) * 0.1
    zc.bias[:] = rng.standard_normal(zc.bias.shape) * 0.1
    x = rng.standard_normal((6, 6, 5))
    assert grad_check(zc, x, samples=15) < 1e-4


def test_zero_conv_passes_at_init_too():
    zc = ZeroConv(4)
    x = np.random.default_rng(4).standard_normal((3, 3, 4))
    assert grad_check(zc, x, samples=10) < 1e-4


class BrokenProjection(ProjectionLayer):
    """Deliberately wrong backward (dropped factor of 2 via halved grads)."""

    def backward(self, x, upstream):
        grads, dx = super().backward(x, upstream)
        return [g * 0.5 for g in grads], dx


def test_grad_check_catches_corrupted_gradients():
    rng = np.random.default_rng(5)
    layer = BrokenProjection(rng.standard_normal((8, 8)))
    x = rng.standard_normal(8)
    assert grad_check(layer, x, samples=10) > 0.2


class MismatchedLayer(ProjectionLayer):
    def backward(self, x, upstream):
        grads, dx = super().backward(x, upstream)
        return grads + [np.zeros(1)], dx


def test_wrong_gradient_list_length():
    layer = MismatchedLayer(np.eye(3))
    with pytest.raises(ValueError, match="wrong length"):
        grad_check(layer, np.ones(3))


def test_check_is_deterministic_for_a_seed():
    rng = np.random.default_rng(6)
    layer = ProjectionLayer(rng.standard_normal((10, 10)))
    x = rng.standard_normal(10)
    assert grad_check(layer, x, seed=42) == grad_check(layer, x, seed=42)


def test_samples_capped_by_parameter_count():
    layer = ProjectionLayer(np.array([[2.0]]))
    assert grad_check(layer, np.array([1.5]), samples=50) < 1e-6

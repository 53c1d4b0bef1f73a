import numpy as np
import pytest

from stutterkit.errors import NonFiniteGradient
from stutterkit.nnet import FC, Adam, AdamConfig, Sequential


def _net(seed=0):
    return Sequential([FC(3, 2, rng=np.random.default_rng(seed))])


def test_zero_gradient_fixed_point():
    net = _net()
    before = {k: v.copy() for k, v in net.state_dict().items()}
    opt = Adam(net.named_params())
    net.zero_grads()
    opt.step()
    for k, v in net.state_dict().items():
        np.testing.assert_array_equal(v, before[k])


def test_first_step_closed_form():
    # constant unit gradient: bias-corrected m-hat = v-hat = 1,
    # so the first update is -lr / (1 + eps)
    net = _net()
    cfg = AdamConfig(lr=0.01)
    opt = Adam(net.named_params(), cfg)
    layer = net.layers[0]
    before = layer.params["W"].copy()
    layer.grads["W"][...] = 1.0
    opt.step()
    delta = layer.params["W"] - before
    np.testing.assert_allclose(delta, -cfg.lr / (1.0 + cfg.eps), atol=1e-12)


def test_deterministic_trajectories():
    def run():
        net = _net(seed=4)
        opt = Adam(net.named_params())
        rng = np.random.default_rng(11)
        for _ in range(20):
            net.zero_grads()
            x = rng.normal(size=(4, 3))
            y, _ = net.forward(x, train=True)
            net.backward(np.ones_like(y))
            opt.step()
        return net.state_dict()

    a, b = run(), run()
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])


def test_non_finite_gradient_reports_name():
    net = _net()
    opt = Adam(net.named_params())
    net.layers[0].grads["W"][0, 0] = np.nan
    before = net.layers[0].params["W"].copy()
    with pytest.raises(NonFiniteGradient) as err:
        opt.step()
    assert "W" in str(err.value)
    # the aborted step must not have touched the parameter
    np.testing.assert_array_equal(net.layers[0].params["W"], before)

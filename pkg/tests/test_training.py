import pytest

from hivemind.ann import Neuron, NetworkSpec, encode_network, evaluate
from hivemind.errors import ShapeMismatch
from hivemind.training import TrainConfig, gradients, init_network, mse, sample_loss, train

XOR = [([0.0, 0.0], [0.0]), ([0.0, 1.0], [1.0]),
       ([1.0, 0.0], [1.0]), ([1.0, 1.0], [0.0])]
XOR_SEED = 42  # recorded working seed for the [2,2,1] topology


def perturbed(net, li, ni, wi, eps):
    """Copy of net with one parameter nudged; wi=None nudges the threshold."""
    layers = []
    for l, layer in enumerate(net.layers):
        row = []
        for n, neuron in enumerate(layer):
            if (l, n) == (li, ni):
                if wi is None:
                    row.append(Neuron(weights=neuron.weights, threshold=neuron.threshold + eps))
                else:
                    ws = list(neuron.weights)
                    ws[wi] += eps
                    row.append(Neuron(weights=tuple(ws), threshold=neuron.threshold))
            else:
                row.append(neuron)
        layers.append(tuple(row))
    return NetworkSpec(net.version, net.activation, net.input_count, tuple(layers))


def central_difference(net, x, t, li, ni, wi, eps=1e-5):
    hi = sample_loss(perturbed(net, li, ni, wi, +eps), x, t)
    lo = sample_loss(perturbed(net, li, ni, wi, -eps), x, t)
    return (hi - lo) / (2 * eps)


class TestGradients:
    def test_matches_central_finite_differences(self):
        cfg = TrainConfig(topology=(2, 3, 2), seed=7)
        net = init_network(cfg)
        x, t = [0.3, -0.8], [1.0, 0.0]
        dw, dt = gradients(net, x, t)
        for li, layer in enumerate(net.layers):
            for ni in range(len(layer)):
                for wi in range(len(layer[ni].weights)):
                    fd = central_difference(net, x, t, li, ni, wi)
                    analytic = dw[li][ni][wi]
                    assert analytic == pytest.approx(fd, rel=1e-6, abs=1e-10)
                fd = central_difference(net, x, t, li, ni, None)
                assert dt[li][ni] == pytest.approx(fd, rel=1e-6, abs=1e-10)

    def test_matches_on_several_random_nets(self):
        for seed in (1, 12, 123):
            net = init_network(TrainConfig(topology=(2, 3, 2), seed=seed))
            x, t = [1.0, 0.5], [0.2, 0.9]
            dw, dt = gradients(net, x, t)
            for li, layer in enumerate(net.layers):
                for ni in range(len(layer)):
                    for wi in range(len(layer[ni].weights)):
                        fd = central_difference(net, x, t, li, ni, wi)
                        assert dw[li][ni][wi] == pytest.approx(fd, rel=1e-6, abs=1e-10)


class TestTrain:
    def test_xor_converges_with_recorded_seed(self):
        cfg = TrainConfig(topology=(2, 2, 1), learning_rate=0.5,
                          max_epochs=20000, target_error=0.01, seed=XOR_SEED)
        result = train(cfg, XOR)
        assert result.converged
        for x, t in XOR:
            assert (evaluate(result.network, x)[0] >= 0.5) == (t[0] >= 0.5)
        assert result.network.activation == "logistic"

    def test_bit_reproducible(self):
        cfg = TrainConfig(topology=(2, 2, 1), max_epochs=50, target_error=0.0, seed=5)
        a = train(cfg, XOR)
        b = train(cfg, XOR)
        assert encode_network(a.network) == encode_network(b.network)
        assert a.final_error == b.final_error

    def test_already_satisfied_target_returns_immediately(self):
        cfg = TrainConfig(topology=(1, 1), max_epochs=100, target_error=1.0, seed=1)
        result = train(cfg, [([1.0], [0.5])])
        assert result.epochs == 0
        assert result.final_error <= 1.0

    def test_non_convergence_is_not_an_error(self):
        cfg = TrainConfig(topology=(2, 2, 1), max_epochs=2, target_error=0.0, seed=1)
        result = train(cfg, XOR)
        assert not result.converged
        assert result.epochs == 2
        assert result.final_error > 0.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ShapeMismatch):
            train(TrainConfig(topology=(2, 1)), [])

    def test_vector_size_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            train(TrainConfig(topology=(2, 1)), [([1.0], [0.0])])

    def test_bad_topology_rejected(self):
        with pytest.raises(ShapeMismatch):
            TrainConfig(topology=(3,))
        with pytest.raises(ShapeMismatch):
            TrainConfig(topology=(2, 0, 1))

    def test_init_weights_within_half(self):
        net = init_network(TrainConfig(topology=(3, 4, 2), seed=99))
        for layer in net.layers:
            for neuron in layer:
                assert -0.5 <= neuron.threshold <= 0.5
                assert all(-0.5 <= w <= 0.5 for w in neuron.weights)

    def test_error_decreases_on_xor(self):
        cfg = TrainConfig(topology=(2, 2, 1), max_epochs=200, target_error=0.0, seed=XOR_SEED)
        net0 = init_network(cfg)
        result = train(cfg, XOR)
        assert result.final_error < mse(net0, XOR)

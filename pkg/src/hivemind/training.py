"""Backpropagation trainer that packages results into the ASCII notation.

Plain-Python MLP training on mean squared error with logistic units. The
threshold of each neuron is the (negated) bias and is trained alongside the
weights. Per-sample updates in dataset order; everything is seeded through
the repo's xorshift generator, so a fixed (seed, config, dataset) gives a
bit-reproducible result.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ann import NetworkSpec, Neuron, logistic
from .errors import ShapeMismatch
from .rng import Rng

Dataset = list[tuple[list[float], list[float]]]


@dataclass(frozen=True)
class TrainConfig:
    topology: tuple[int, ...]
    learning_rate: float = 0.5
    max_epochs: int = 20000
    target_error: float = 0.01
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "topology", tuple(self.topology))
        if len(self.topology) < 2 or any(n < 1 for n in self.topology):
            raise ShapeMismatch("topology needs >= 2 positive layer sizes")
        if self.learning_rate <= 0 or self.max_epochs < 1 or self.target_error < 0:
            raise ShapeMismatch("bad hyperparameters")


@dataclass
class TrainResult:
    network: NetworkSpec
    epochs: int
    final_error: float
    converged: bool


def init_network(config: TrainConfig) -> NetworkSpec:
    """Weights and thresholds uniform in [-0.5, 0.5] from the seeded PRNG."""
    rng = Rng(config.seed)
    layers = []
    for prev, size in zip(config.topology, config.topology[1:]):
        layer = []
        for _ in range(size):
            weights = tuple(rng.uniform_range(-0.5, 0.5) for _ in range(prev))
            layer.append(Neuron(weights=weights, threshold=rng.uniform_range(-0.5, 0.5)))
        layers.append(tuple(layer))
    return NetworkSpec(version=1, activation="logistic",
                       input_count=config.topology[0], layers=tuple(layers))


def _forward(net: NetworkSpec, x: list[float]) -> list[list[float]]:
    """Activations per layer, including the input as element 0."""
    acts = [list(x)]
    for layer in net.layers:
        prev = acts[-1]
        acts.append([logistic(sum(w * p for w, p in zip(n.weights, prev)) - n.threshold)
                     for n in layer])
    return acts


def sample_loss(net: NetworkSpec, x: list[float], target: list[float]) -> float:
    out = _forward(net, x)[-1]
    return sum((o - t) ** 2 for o, t in zip(out, target)) / len(target)


def mse(net: NetworkSpec, dataset: Dataset) -> float:
    return sum(sample_loss(net, x, t) for x, t in dataset) / len(dataset)


def gradients(net: NetworkSpec, x: list[float], target: list[float]):
    """Backprop gradients of the single-sample MSE.

    Returns (dw, dt): dw[l][j][i] matches net.layers[l][j].weights[i] and
    dt[l][j] matches the threshold (bias sign already folded in).
    """
    acts = _forward(net, x)
    out = acts[-1]
    n_out = len(target)
    # delta = dLoss/d(pre-activation), with loss = mean squared error
    delta = [(o - t) * 2.0 / n_out * o * (1.0 - o) for o, t in zip(out, target)]
    dw = [None] * len(net.layers)
    dt = [None] * len(net.layers)
    for li in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[li]
        prev = acts[li]
        dw[li] = [[d * p for p in prev] for d in delta]
        dt[li] = [-d for d in delta]  # pre = sum(w*x) - t
        if li > 0:
            below = acts[li]
            new_delta = []
            for i in range(len(below)):
                s = sum(delta[j] * layer[j].weights[i] for j in range(len(layer)))
                new_delta.append(s * below[i] * (1.0 - below[i]))
            delta = new_delta
    return dw, dt


def _apply(net: NetworkSpec, dw, dt, lr: float) -> NetworkSpec:
    layers = []
    for li, layer in enumerate(net.layers):
        new_layer = []
        for j, neuron in enumerate(layer):
            weights = tuple(w - lr * g for w, g in zip(neuron.weights, dw[li][j]))
            new_layer.append(Neuron(weights=weights, threshold=neuron.threshold - lr * dt[li][j]))
        layers.append(tuple(new_layer))
    return NetworkSpec(version=net.version, activation=net.activation,
                       input_count=net.input_count, layers=tuple(layers))


def train(config: TrainConfig, dataset: Dataset) -> TrainResult:
    if not dataset:
        raise ShapeMismatch("dataset is empty")
    for x, t in dataset:
        if len(x) != config.topology[0] or len(t) != config.topology[-1]:
            raise ShapeMismatch("dataset vector sizes do not match topology")
    net = init_network(config)
    epochs = 0
    error = mse(net, dataset)
    if error <= config.target_error:
        return TrainResult(net, 0, error, True)
    for epoch in range(1, config.max_epochs + 1):
        for x, t in dataset:
            dw, dt = gradients(net, x, t)
            net = _apply(net, dw, dt, config.learning_rate)
        epochs = epoch
        error = mse(net, dataset)
        if error <= config.target_error:
            return TrainResult(net, epochs, error, True)
    return TrainResult(net, epochs, error, False)

"""ASCII notation codec and evaluator for packed feed-forward networks.

The notation is a restricted JSON-like text form: a network object with keys
in the fixed order v, act, in, layers; each neuron is an object with an
optional threshold "t" (default 0.5) and a weight list "w". The decoder is a
hand-rolled recursive descent parser so syntax errors can report exact byte
offsets and so canonical key order is actually enforced.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import InvalidNetwork, MalformedNotation, NonFiniteValue, ShapeMismatch

DEFAULT_THRESHOLD = 0.5
ACTIVATIONS = ("step", "logistic")

_NUM_RE = re.compile(rb"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INT_RE = re.compile(rb"\d+")
_WS = b" \t\r\n"


@dataclass(frozen=True)
class Neuron:
    weights: tuple[float, ...]
    threshold: float = DEFAULT_THRESHOLD


@dataclass(frozen=True)
class NetworkSpec:
    version: int
    activation: str
    input_count: int
    layers: tuple[tuple[Neuron, ...], ...]

    @property
    def output_count(self) -> int:
        return len(self.layers[-1])


@dataclass
class ValidationIssue:
    code: str
    layer: int | None
    neuron: int | None
    message: str


def validate_network(net: NetworkSpec) -> list[ValidationIssue]:
    """Returns one issue per invariant violation; empty list means valid."""
    issues: list[ValidationIssue] = []
    if net.version < 1:
        issues.append(ValidationIssue("invalid_network", None, None, "version must be positive"))
    if net.activation not in ACTIVATIONS:
        issues.append(ValidationIssue("invalid_network", None, None, f"unknown activation {net.activation!r}"))
    if net.input_count < 1:
        issues.append(ValidationIssue("invalid_network", None, None, "input_count must be positive"))
    if not net.layers:
        issues.append(ValidationIssue("shape_mismatch", None, None, "network has no layers"))
        return issues
    prev = net.input_count
    for li, layer in enumerate(net.layers, start=1):
        if not layer:
            issues.append(ValidationIssue("shape_mismatch", li, None, f"layer {li} is empty"))
            continue
        for ni, neuron in enumerate(layer, start=1):
            if len(neuron.weights) != prev:
                issues.append(ValidationIssue(
                    "shape_mismatch", li, ni,
                    f"layer {li} neuron {ni} has {len(neuron.weights)} weights, expected {prev}"))
            if not math.isfinite(neuron.threshold):
                issues.append(ValidationIssue("non_finite_value", li, ni, f"layer {li} neuron {ni} threshold not finite"))
            for w in neuron.weights:
                if not math.isfinite(w):
                    issues.append(ValidationIssue("non_finite_value", li, ni, f"layer {li} neuron {ni} weight not finite"))
                    break
        prev = len(layer)
    return issues


def check_network(net: NetworkSpec) -> None:
    issues = validate_network(net)
    if issues:
        first = issues[0]
        if first.code == "non_finite_value":
            raise NonFiniteValue(first.message)
        if first.code == "shape_mismatch":
            raise ShapeMismatch(first.message)
        raise InvalidNetwork(first.message)


class _Parser:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def fail(self, what: str):
        raise MalformedNotation(f"expected {what} at byte {self.pos}", self.pos)

    def skip_ws(self):
        while self.pos < len(self.data) and self.data[self.pos] in _WS:
            self.pos += 1

    def literal(self, lit: bytes):
        self.skip_ws()
        if not self.data.startswith(lit, self.pos):
            self.fail(lit.decode())
        self.pos += len(lit)

    def peek(self) -> int:
        self.skip_ws()
        return self.data[self.pos] if self.pos < len(self.data) else -1

    def parse_int(self) -> int:
        self.skip_ws()
        m = _INT_RE.match(self.data, self.pos)
        if not m:
            self.fail("integer")
        self.pos = m.end()
        return int(m.group())

    def parse_num(self) -> float:
        self.skip_ws()
        start = self.pos
        m = _NUM_RE.match(self.data, self.pos)
        if not m:
            self.fail("number")
        self.pos = m.end()
        value = float(m.group())
        if not math.isfinite(value):
            raise NonFiniteValue(f"non-finite literal at byte {start}", {"offset": start})
        return value

    def parse_neuron(self) -> Neuron:
        self.literal(b"{")
        threshold = DEFAULT_THRESHOLD
        if self.peek() == ord('"') and self.data.startswith(b'"t"', self.pos):
            self.literal(b'"t"')
            self.literal(b":")
            threshold = self.parse_num()
            self.literal(b",")
        self.literal(b'"w"')
        self.literal(b":")
        self.literal(b"[")
        weights = [self.parse_num()]
        while self.peek() == ord(","):
            self.literal(b",")
            weights.append(self.parse_num())
        self.literal(b"]")
        self.literal(b"}")
        return Neuron(weights=tuple(weights), threshold=threshold)

    def parse_layer(self) -> tuple[Neuron, ...]:
        self.literal(b"[")
        neurons = [self.parse_neuron()]
        while self.peek() == ord(","):
            self.literal(b",")
            neurons.append(self.parse_neuron())
        self.literal(b"]")
        return tuple(neurons)

    def parse_network(self) -> NetworkSpec:
        self.literal(b"{")
        self.literal(b'"v"')
        self.literal(b":")
        version = self.parse_int()
        self.literal(b",")
        activation = "step"
        if self.data.startswith(b'"act"', self._ws_pos()):
            self.literal(b'"act"')
            self.literal(b":")
            self.skip_ws()
            if self.data.startswith(b'"step"', self.pos):
                self.pos += len(b'"step"')
            elif self.data.startswith(b'"logistic"', self.pos):
                activation = "logistic"
                self.pos += len(b'"logistic"')
            else:
                self.fail('"step" or "logistic"')
            self.literal(b",")
        self.literal(b'"in"')
        self.literal(b":")
        input_count = self.parse_int()
        self.literal(b",")
        self.literal(b'"layers"')
        self.literal(b":")
        self.literal(b"[")
        layers = [self.parse_layer()]
        while self.peek() == ord(","):
            self.literal(b",")
            layers.append(self.parse_layer())
        self.literal(b"]")
        self.literal(b"}")
        self.skip_ws()
        if self.pos != len(self.data):
            self.fail("end of input")
        return NetworkSpec(version=version, activation=activation,
                           input_count=input_count, layers=tuple(layers))

    def _ws_pos(self) -> int:
        self.skip_ws()
        return self.pos


def decode_network(data: bytes | str) -> NetworkSpec:
    if isinstance(data, str):
        data = data.encode("ascii")
    try:
        data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedNotation(f"non-ASCII byte at offset {exc.start}", exc.start) from None
    net = _Parser(data).parse_network()
    check_network(net)
    return net


def _fmt(value: float) -> str:
    # repr() of a Python float is the shortest decimal that round-trips
    return repr(value)


def encode_network(net: NetworkSpec) -> bytes:
    check_network(net)
    parts = ['{"v":%d,"act":"%s","in":%d,"layers":[' % (net.version, net.activation, net.input_count)]
    for li, layer in enumerate(net.layers):
        if li:
            parts.append(",")
        parts.append("[")
        for ni, neuron in enumerate(layer):
            if ni:
                parts.append(",")
            parts.append('{"t":%s,"w":[%s]}' % (_fmt(neuron.threshold), ",".join(_fmt(w) for w in neuron.weights)))
        parts.append("]")
    parts.append("]}")
    return "".join(parts).encode("ascii")


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def evaluate(net: NetworkSpec, inputs: list[float] | tuple[float, ...]) -> list[float]:
    """Forward pass. The threshold acts as a bias: activation(sum(w*x) - t)."""
    if len(inputs) != net.input_count:
        raise ShapeMismatch(f"expected {net.input_count} inputs, got {len(inputs)}")
    current = list(inputs)
    for layer in net.layers:
        nxt = []
        for neuron in layer:
            a = 0.0
            for w, x in zip(neuron.weights, current):
                a += w * x
            if net.activation == "step":
                nxt.append(1.0 if a >= neuron.threshold else 0.0)
            else:
                nxt.append(logistic(a - neuron.threshold))
        current = nxt
    return current

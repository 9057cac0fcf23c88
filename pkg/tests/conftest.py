import math

import pytest
from hypothesis import strategies as st

from hivemind.ann import NetworkSpec, Neuron

finite_floats = st.floats(allow_nan=False, allow_infinity=False, width=64)
small_floats = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@st.composite
def network_specs(draw, max_layers=3, max_width=4, max_inputs=4):
    input_count = draw(st.integers(1, max_inputs))
    activation = draw(st.sampled_from(["step", "logistic"]))
    n_layers = draw(st.integers(1, max_layers))
    widths = [draw(st.integers(1, max_width)) for _ in range(n_layers)]
    layers = []
    prev = input_count
    for width in widths:
        layer = tuple(
            Neuron(weights=tuple(draw(st.lists(finite_floats, min_size=prev, max_size=prev))),
                   threshold=draw(finite_floats))
            for _ in range(width))
        layers.append(layer)
        prev = width
    return NetworkSpec(version=draw(st.integers(1, 9)), activation=activation,
                       input_count=input_count, layers=tuple(layers))


@pytest.fixture
def store(tmp_path):
    from hivemind.store import Store
    return Store(tmp_path / "db")


@pytest.fixture
def mem_store():
    from hivemind.store import Store
    return Store(None)


@pytest.fixture
def graph(mem_store):
    from hivemind.concepts import ConceptGraph
    return ConceptGraph(mem_store)


@pytest.fixture
def client(mem_store):
    from fastapi.testclient import TestClient
    from hivemind.services import create_app
    return TestClient(create_app(mem_store))


def seeded_building_graph(graph):
    """The shipped building fixture, built through the domain API."""
    from hivemind.concepts import StrengthGrade

    names = ["building", "wall", "roof", "door", "knob", "open"]
    ids = {n: graph.create_concept(n, f"{n} concept")["id"] for n in names}
    for src, kind, tgt, mean, std in [
        ("building", "attribute", "wall", 0.9, 0.05),
        ("building", "attribute", "roof", 0.8, 0.05),
        ("building", "attribute", "door", 0.7, 0.05),
        ("door", "attribute", "knob", 0.8, 0.05),
        ("door", "attribute", "wall", 0.4, 0.1),
        ("door", "action", "open", 0.6, 0.1),
        ("knob", "action", "open", 0.5, 0.1),
    ]:
        graph.map_relation(ids[src], kind, ids[tgt], StrengthGrade(mean, std))
    return ids

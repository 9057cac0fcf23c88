import math
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hivemind import ann
from hivemind.ann import NetworkSpec, Neuron, decode_network, encode_network, evaluate, validate_network
from hivemind.errors import MalformedNotation, NonFiniteValue, ShapeMismatch

from conftest import network_specs

MINIMAL = b'{"v":1,"act":"step","in":2,"layers":[[{"t":0.5,"w":[1.0,1.0]}]]}'


class TestDecode:
    def test_minimal_document(self):
        net = decode_network(MINIMAL)
        assert net.version == 1
        assert net.activation == "step"
        assert net.input_count == 2
        assert len(net.layers) == 1 and len(net.layers[0]) == 1
        assert net.layers[0][0] == Neuron(weights=(1.0, 1.0), threshold=0.5)

    def test_missing_threshold_defaults_to_half(self):
        net = decode_network(b'{"v":1,"act":"step","in":2,"layers":[[{"w":[0.4,0.4]}]]}')
        assert net.layers[0][0].threshold == 0.5

    def test_missing_act_defaults_to_step(self):
        net = decode_network(b'{"v":1,"in":1,"layers":[[{"w":[1.0]}]]}')
        assert net.activation == "step"

    def test_empty_weight_list_rejected(self):
        with pytest.raises((MalformedNotation, ShapeMismatch)):
            decode_network(b'{"v":1,"act":"step","in":2,"layers":[[{"t":0.5,"w":[]}]]}')

    def test_interstitial_whitespace_tolerated(self):
        text = b'{ "v" : 1 ,\n "act" : "step" , "in" : 2 ,\t"layers" : [ [ { "t" : 0.5 , "w" : [ 1.0 , 1.0 ] } ] ] }'
        assert decode_network(text) == decode_network(MINIMAL)

    def test_syntax_error_reports_offset(self):
        with pytest.raises(MalformedNotation) as exc:
            decode_network(b'{"v":1,"in":2,"layers":!')
        assert exc.value.offset == 23

    def test_weight_count_mismatch(self):
        with pytest.raises(ShapeMismatch):
            decode_network(b'{"v":1,"in":2,"layers":[[{"w":[1.0,1.0,1.0]}]]}')

    def test_second_layer_shape_checked(self):
        with pytest.raises(ShapeMismatch):
            decode_network(b'{"v":1,"in":1,"layers":[[{"w":[1.0]},{"w":[1.0]}],[{"w":[1.0]}]]}')

    def test_overflowing_literal_is_non_finite(self):
        with pytest.raises(NonFiniteValue):
            decode_network(b'{"v":1,"in":1,"layers":[[{"w":[1e999]}]]}')

    def test_non_ascii_rejected(self):
        with pytest.raises(MalformedNotation):
            decode_network('{"v":1,"in":1,"layers":[[{"w":[1.0é]}]]}'.encode("utf-8"))

    def test_trailing_garbage_rejected(self):
        with pytest.raises(MalformedNotation):
            decode_network(MINIMAL + b"x")


class TestEncode:
    def test_canonical_form(self):
        net = decode_network(MINIMAL)
        assert encode_network(net) == MINIMAL

    def test_canonical_always_writes_act_and_t(self):
        net = decode_network(b'{"v":1,"in":2,"layers":[[{"w":[0.4,0.4]}]]}')
        assert encode_network(net) == b'{"v":1,"act":"step","in":2,"layers":[[{"t":0.5,"w":[0.4,0.4]}]]}'

    @given(network_specs())
    @settings(max_examples=200)
    def test_roundtrip_value_exact(self, net):
        assert decode_network(encode_network(net)) == net

    @given(network_specs())
    def test_encode_decode_encode_fixed_point(self, net):
        once = encode_network(net)
        assert encode_network(decode_network(once)) == once

    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_shortest_roundtrip_decimal(self, value):
        net = NetworkSpec(1, "step", 1, ((Neuron(weights=(value,), threshold=value),),))
        decoded = decode_network(encode_network(net))
        assert struct.pack("<d", decoded.layers[0][0].weights[0]) == struct.pack("<d", value)

    def test_invalid_network_refused(self):
        bad = NetworkSpec(1, "step", 2, ((Neuron(weights=(1.0,)),),))
        with pytest.raises(ShapeMismatch):
            encode_network(bad)


class TestEvaluate:
    def test_and_neuron(self):
        net = decode_network(b'{"v":1,"act":"step","in":2,"layers":[[{"t":0.5,"w":[0.4,0.4]}]]}')
        assert evaluate(net, [1.0, 1.0]) == [1.0]
        assert evaluate(net, [1.0, 0.0]) == [0.0]

    def test_logistic_at_zero_is_half(self):
        net = NetworkSpec(1, "logistic", 1, ((Neuron(weights=(0.0,), threshold=0.0),),))
        for x in (-3.0, 0.0, 7.5):
            assert evaluate(net, [x]) == [0.5]

    def test_hand_built_xor(self):
        # hidden: OR (t=0.5, w=1,1) and NAND (t=-1.5, w=-1,-1); output: AND
        net = NetworkSpec(1, "step", 2, (
            (Neuron(weights=(1.0, 1.0), threshold=0.5),
             Neuron(weights=(-1.0, -1.0), threshold=-1.5)),
            (Neuron(weights=(1.0, 1.0), threshold=1.5),),
        ))
        for a in (0.0, 1.0):
            for b in (0.0, 1.0):
                expected = 1.0 if (a != b) else 0.0
                assert evaluate(net, [a, b]) == [expected]

    def test_input_length_checked(self):
        net = decode_network(MINIMAL)
        with pytest.raises(ShapeMismatch):
            evaluate(net, [1.0])

    @given(network_specs(), st.data())
    @settings(max_examples=100)
    def test_outputs_in_activation_range(self, net, data):
        xs = data.draw(st.lists(st.floats(-5, 5), min_size=net.input_count,
                                max_size=net.input_count))
        out = evaluate(net, xs)
        assert len(out) == len(net.layers[-1])
        for v in out:
            if net.activation == "step":
                assert v in (0.0, 1.0)
            else:
                assert 0.0 <= v <= 1.0

    def test_pure_function(self):
        net = decode_network(MINIMAL)
        assert evaluate(net, [0.3, 0.4]) == evaluate(net, [0.3, 0.4])


class TestValidate:
    def test_valid_net_empty_report(self):
        assert validate_network(decode_network(MINIMAL)) == []

    def test_wrong_weight_count_names_position(self):
        net = NetworkSpec(1, "step", 1, (
            (Neuron(weights=(1.0,)),),
            (Neuron(weights=(1.0,)), Neuron(weights=(1.0, 2.0))),
        ))
        report = validate_network(net)
        assert len(report) == 1
        assert report[0].code == "shape_mismatch"
        assert (report[0].layer, report[0].neuron) == (2, 2)

    def test_nan_weight_reported(self):
        net = NetworkSpec(1, "step", 1, ((Neuron(weights=(math.nan,)),),))
        assert any(i.code == "non_finite_value" for i in validate_network(net))

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhnl.exceptions import ParameterError
from rhnl.layer import (
    NeuronKind,
    NeuronLayout,
    Scheme,
    build_layout,
    canonical_name,
    logistic_count,
    parse_architecture,
    round_half_up,
)

L, G = NeuronKind.LOGISTIC, NeuronKind.GLS


def n_logistic(layout):
    return sum(k is L for k in layout.kinds)


class TestBuildLayout:
    def test_quarter_of_four(self):
        layout = build_layout(4, Scheme.RANDOM_HETEROGENEOUS, 0.25, seed=7)
        assert n_logistic(layout) == 1 and layout.n == 4

    def test_zero_proportion_is_all_gls(self):
        rh = build_layout(13, Scheme.RANDOM_HETEROGENEOUS, 0.0, seed=0)
        assert rh.kinds == build_layout(13, Scheme.HOMOGENEOUS_GLS).kinds

    def test_ionosphere_three_quarters(self):
        # 0.75 * 34 = 25.5 rounds half up to 26
        layout = build_layout(34, Scheme.RANDOM_HETEROGENEOUS, 0.75, seed=1)
        assert n_logistic(layout) == 26
        assert layout.n - n_logistic(layout) == 8

    def test_odd_even(self):
        layout = build_layout(5, Scheme.ODD_EVEN)
        assert layout.kinds == (G, L, G, L, G)

    def test_homogeneous_logistic(self):
        assert build_layout(3, "HomogeneousLogistic").kinds == (L, L, L)

    @pytest.mark.parametrize("n", [0, -3])
    def test_empty_layer(self, n):
        with pytest.raises(ParameterError):
            build_layout(n, Scheme.HOMOGENEOUS_GLS)

    @pytest.mark.parametrize("p", [-0.01, 1.01])
    def test_bad_proportion(self, p):
        with pytest.raises(ParameterError):
            build_layout(4, Scheme.RANDOM_HETEROGENEOUS, p)

    def test_count_law(self):
        for n in range(1, 201):
            for p in (0.0, 0.25, 0.5, 0.75, 1.0):
                expected = math.floor(p * n + 0.5)
                assert n_logistic(build_layout(n, Scheme.RANDOM_HETEROGENEOUS, p, seed=n)) == expected

    @given(n=st.integers(1, 200), p=st.floats(0.0, 1.0), seed=st.integers(0, 2**64 - 1))
    def test_count_law_property(self, n, p, seed):
        layout = build_layout(n, Scheme.RANDOM_HETEROGENEOUS, p, seed)
        assert n_logistic(layout) == logistic_count(n, p)
        assert layout.n == n

    def test_seed_determinism(self):
        a = build_layout(21, Scheme.RANDOM_HETEROGENEOUS, 0.5, seed=99)
        b = build_layout(21, Scheme.RANDOM_HETEROGENEOUS, 0.5, seed=99)
        assert a == b

    def test_different_seeds_differ(self):
        differ = sum(
            build_layout(8, Scheme.RANDOM_HETEROGENEOUS, 0.5, seed=2 * i).kinds
            != build_layout(8, Scheme.RANDOM_HETEROGENEOUS, 0.5, seed=2 * i + 1).kinds
            for i in range(100)
        )
        # 70 equally likely layouts: a collision has probability 1/70 per pair
        assert differ >= 95

    def test_uniform_positions(self):
        freq = np.zeros(8)
        for seed in range(10_000):
            freq += build_layout(8, Scheme.RANDOM_HETEROGENEOUS, 0.25, seed).logistic_mask
        freq /= 10_000
        assert np.all(np.abs(freq - 0.25) <= 0.02)


class TestRounding:
    @pytest.mark.parametrize("x, expected", [(0.5, 1), (1.5, 2), (2.5, 3), (25.5, 26), (3.25, 3), (0.0, 0)])
    def test_round_half_up(self, x, expected):
        assert round_half_up(x) == expected

    def test_float_product_near_half(self):
        # 0.3 * 5 is 1.4999999999999998 in binary floating point
        assert logistic_count(5, 0.3) == 2


class TestSerialization:
    def test_json_round_trip(self):
        layout = build_layout(9, Scheme.RANDOM_HETEROGENEOUS, 0.25, seed=3)
        data = json.loads(json.dumps(layout.to_dict()))
        assert set(data) == {"scheme", "n", "proportion_logistic", "seed", "kinds"}
        assert data["n"] == 9 and data["scheme"] == "RandomHeterogeneous"
        assert NeuronLayout.from_dict(data) == layout

    def test_permuted(self):
        layout = build_layout(4, Scheme.ODD_EVEN)
        assert layout.permuted([1, 0, 3, 2]).kinds == (L, G, L, G)


class TestArchitectureNames:
    @pytest.mark.parametrize(
        "name, scheme, p",
        [
            ("RH25L75G", Scheme.RANDOM_HETEROGENEOUS, 0.25),
            ("RH50L50G", Scheme.RANDOM_HETEROGENEOUS, 0.5),
            ("rh75l25g", Scheme.RANDOM_HETEROGENEOUS, 0.75),
            ("RH25L50G", Scheme.RANDOM_HETEROGENEOUS, 0.25),
            ("RH:0.4", Scheme.RANDOM_HETEROGENEOUS, 0.4),
            ("GLS", Scheme.HOMOGENEOUS_GLS, 0.0),
            ("Logistic", Scheme.HOMOGENEOUS_LOGISTIC, 1.0),
            ("HNL", Scheme.ODD_EVEN, 0.5),
            ("OddEven", Scheme.ODD_EVEN, 0.5),
            ("HomogeneousGLS", Scheme.HOMOGENEOUS_GLS, 0.0),
        ],
    )
    def test_parse(self, name, scheme, p):
        assert parse_architecture(name) == (scheme, p)

    def test_unknown(self):
        with pytest.raises(ParameterError):
            parse_architecture("RH200L0G")
        with pytest.raises(ParameterError):
            parse_architecture("banana")

    def test_canonical(self):
        assert canonical_name(Scheme.RANDOM_HETEROGENEOUS, 0.25) == "RH25L75G"
        assert canonical_name(Scheme.ODD_EVEN, 0.5) == "HNL"
        assert canonical_name(*parse_architecture("RH:0.333")) == "RH:0.333"

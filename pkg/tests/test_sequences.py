import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactinfer.equilibrium import Economy
from exactinfer.errors import InvalidBox, MalformedDataset
from exactinfer.prefs import PreferenceSpec, demand
from exactinfer.revealed import check_sarp
from exactinfer.sequences import (
    DemandObservation,
    Generator,
    SequenceConfig,
    gen_demand_dataset,
    gen_economy_dataset,
    gen_prices,
    read_dataset,
    validate_demand_dataset,
    write_dataset,
)

BOX = SequenceConfig.square(2, 0.5, 2.0)


def radical_inverse(k: int, base: int) -> Fraction:
    """Van der Corput digit reversal, computed exactly."""
    out, scale = Fraction(0), Fraction(1, base)
    while k:
        k, digit = divmod(k, base)
        out += digit * scale
        scale /= base
    return out


class TestConfig:
    def test_inverted_box_rejected(self):
        with pytest.raises(InvalidBox):
            SequenceConfig(price_box=((2.0, 1.0), (0.5, 2.0)))

    def test_nonpositive_price_box_rejected(self):
        with pytest.raises(InvalidBox):
            SequenceConfig(price_box=((0.0, 1.0), (0.5, 2.0)))

    def test_dict_round_trip(self):
        cfg = SequenceConfig.square(2, 0.2, 5.0, seed=7, generator=Generator.UNIFORM_RANDOM, income_box=((0.5, 2.0),))
        assert SequenceConfig.from_dict(cfg.to_dict()) == cfg


class TestPrices:
    def test_empty(self):
        assert gen_prices(BOX, 0) == []

    def test_halton_by_hand(self):
        got = np.array(gen_prices(BOX, 3))
        unit = np.array([[float(radical_inverse(k, 2)), float(radical_inverse(k, 3))] for k in (1, 2, 3)])
        np.testing.assert_allclose(unit, [[1 / 2, 1 / 3], [1 / 4, 2 / 3], [3 / 4, 1 / 9]])
        np.testing.assert_allclose(got, 0.5 + 1.5 * unit, rtol=1e-15)

    def test_halton_long_prefix_by_hand(self):
        got = np.array(gen_prices(BOX, 200))
        unit = np.array([[float(radical_inverse(k, 2)), float(radical_inverse(k, 3))] for k in range(1, 201)])
        np.testing.assert_allclose(got, 0.5 + 1.5 * unit, rtol=1e-14)

    def test_uniform_deterministic_and_inside(self):
        cfg = SequenceConfig.square(2, 0.5, 2.0, seed=42, generator=Generator.UNIFORM_RANDOM)
        a, b = np.array(gen_prices(cfg, 100)), np.array(gen_prices(cfg, 100))
        assert a.tobytes() == b.tobytes()
        assert np.all((a >= 0.5) & (a <= 2.0))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 300), st.integers(0, 300), st.sampled_from(list(Generator)), st.integers(0, 2**31))
    def test_prefix_property(self, n, m, gen, seed):
        n, m = sorted((n, m))
        cfg = SequenceConfig.square(2, 0.2, 5.0, seed=seed, generator=gen)
        short, long = gen_prices(cfg, n), gen_prices(cfg, m)
        assert all(np.array_equal(a, b) for a, b in zip(short, long[:n]))

    def test_density_proxy(self):
        pts = (np.array(gen_prices(BOX, 4096)) - 0.5) / 1.5
        cells = np.minimum((pts * 16).astype(int), 15)
        occupied = np.zeros((16, 16), dtype=bool)
        occupied[cells[:, 0], cells[:, 1]] = True
        assert occupied.all()


class TestDemandDataset:
    def test_empty(self):
        assert gen_demand_dataset(PreferenceSpec.cobb_douglas([0.5, 0.5]), BOX, 0) == []

    def test_symmetric_split(self):
        data = gen_demand_dataset(PreferenceSpec.cobb_douglas([0.5, 0.5]), BOX, 40)
        for obs in data:
            np.testing.assert_allclose(obs.p * obs.x, [0.5, 0.5], rtol=1e-14)

    def test_observations_are_demands(self):
        spec = PreferenceSpec.ces([0.3, 0.7], -1.0)
        for obs in gen_demand_dataset(spec, BOX, 30):
            np.testing.assert_array_equal(obs.x, demand(spec, obs.p, 1.0))

    @pytest.mark.parametrize(
        "spec",
        [PreferenceSpec.cobb_douglas([0.3, 0.7]), PreferenceSpec.ces([0.5, 0.5], 0.5), PreferenceSpec.ces([0.6, 0.4], -4.0)],
    )
    def test_generated_data_is_rational(self, spec):
        assert check_sarp(gen_demand_dataset(spec, BOX, 50)).holds

    def test_arrays_read_only(self):
        obs = gen_demand_dataset(PreferenceSpec.cobb_douglas([0.5, 0.5]), BOX, 1)[0]
        with pytest.raises(ValueError):
            obs.x[0] = 3.0

    def test_validation_flags_budget(self):
        bad = [DemandObservation(0, np.array([1.0, 1.0]), np.array([0.7, 0.7]))]
        with pytest.raises(MalformedDataset):
            validate_demand_dataset(bad)


class TestEconomyDataset:
    def test_identical_individuals(self):
        spec = PreferenceSpec.cobb_douglas([0.4, 0.6])
        eco = Economy([spec, spec], [[1.0, 0.0], [0.0, 1.0]])
        cfg = SequenceConfig.square(2, 0.5, 2.0, income_box=((1.0, 1.0), (1.0, 1.0)))
        for obs in gen_economy_dataset(eco, cfg, 10):
            np.testing.assert_allclose(obs.D, 2 * demand(spec, obs.p, obs.w[0]), rtol=1e-14)

    def test_aggregate_walras(self):
        eco = Economy([PreferenceSpec.cobb_douglas([0.6, 0.4]), PreferenceSpec.cobb_douglas([0.2, 0.8])], [[1, 0], [0, 1]])
        cfg = SequenceConfig.square(2, 0.5, 2.0, income_box=((0.5, 2.0), (0.5, 2.0)))
        data = gen_economy_dataset(eco, cfg, 20)
        assert len(data) == 20
        for obs in data:
            assert abs(obs.p @ obs.D - obs.w.sum()) <= 1e-9 * obs.w.sum()
            assert np.all((obs.w >= 0.5) & (obs.w <= 2.0))

    def test_prefix_and_determinism(self):
        eco = Economy([PreferenceSpec.cobb_douglas([0.6, 0.4]), PreferenceSpec.cobb_douglas([0.2, 0.8])], [[1, 0], [0, 1]])
        cfg = SequenceConfig.square(2, 0.5, 2.0, income_box=((0.5, 2.0), (0.5, 2.0)), generator=Generator.UNIFORM_RANDOM, seed=3)
        a, b = gen_economy_dataset(eco, cfg, 12), gen_economy_dataset(eco, cfg, 30)
        assert a == b[:12]


class TestTextFormat:
    def test_demand_round_trip_exact(self):
        data = gen_demand_dataset(PreferenceSpec.ces([0.3, 0.7], 0.25), BOX, 25)
        buf = io.StringIO()
        write_dataset(data, buf)
        buf.seek(0)
        assert read_dataset(buf) == data

    def test_economy_round_trip_exact(self, tmp_path):
        eco = Economy([PreferenceSpec.cobb_douglas([0.6, 0.4]), PreferenceSpec.cobb_douglas([0.2, 0.8])], [[1, 0], [0, 1]])
        data = gen_economy_dataset(eco, SequenceConfig.square(2, 0.5, 2.0, income_box=((0.5, 2.0), (0.5, 2.0))), 9)
        path = tmp_path / "eco.csv"
        write_dataset(data, path)
        assert read_dataset(path) == data

    def test_malformed_text(self):
        with pytest.raises(MalformedDataset):
            read_dataset(io.StringIO("# L=2,H=0,n=1\nk,p_1,p_2,x_1,x_2\n0,1.0,oops,0.5,0.5\n"))

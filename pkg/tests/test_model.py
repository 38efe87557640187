import json

import numpy as np
import pytest

from msrate import model, systems
from msrate.errors import DimensionMismatch, InvalidSigma, ParseError

from conftest import random_spec


def write_config(path, **overrides):
    data = model.spec_to_dict(systems.two_dim(2.0))
    data.update(overrides)
    path.write_text(json.dumps(data))
    return path


def test_two_dim_is_nondegenerate():
    report = model.validate(systems.two_dim(1.0))
    assert report.nondegenerate and report.stacked_rank == 1
    assert report.R0_min_eig > 0


def test_zero_inputs_are_degenerate():
    spec = model.SystemSpec(np.eye(2), np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((2, 1)), 1.0)
    report = model.validate(spec)
    assert not report.nondegenerate
    assert report.stacked_rank == 0


def test_scalar_C_A():
    spec = systems.scalar(1.0, 0.0, 1.0, 0.0, 1.0)
    assert model.validate(spec).C_A == pytest.approx(1.0)
    spec = systems.scalar(1.0, 0.5, 1.0, 0.0, 2.0)
    assert model.validate(spec).C_A == pytest.approx(1.0 + 4.0 * 0.25)


def test_load_two_dim_config(tmp_path):
    spec = model.load_spec(write_config(tmp_path / "c.json"))
    assert (spec.n, spec.m) == (2, 1)
    assert spec == systems.two_dim(2.0)


def test_shipped_configs_load():
    assert model.load_spec("configs/two_dim.json") == systems.two_dim(2.0)
    assert model.load_spec("configs/four_dim.json") == systems.four_dim()


@pytest.mark.parametrize("sigma", [0, 0.0, -1.0])
def test_nonpositive_sigma_rejected(tmp_path, sigma):
    with pytest.raises(InvalidSigma):
        model.load_spec(write_config(tmp_path / "c.json", sigma=sigma))


def test_wrong_B_rows_rejected(tmp_path):
    with pytest.raises(DimensionMismatch):
        model.load_spec(write_config(tmp_path / "c.json", B=[[1.0], [0.7], [0.1]]))


def test_n_m_must_match_shapes(tmp_path):
    with pytest.raises(DimensionMismatch):
        model.load_spec(write_config(tmp_path / "c.json", m=2))


def test_unknown_and_missing_keys_rejected(tmp_path):
    with pytest.raises(ParseError):
        model.load_spec(write_config(tmp_path / "c.json", extra=1))
    data = model.spec_to_dict(systems.two_dim())
    del data["A_bar"]
    path = tmp_path / "d.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ParseError):
        model.load_spec(path)


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        model.load_spec(path)


def test_round_trip_is_bit_identical(tmp_path, rng):
    for n, m in [(1, 1), (3, 2), (5, 3)]:
        spec = random_spec(rng, n, m)
        path = tmp_path / f"s{n}{m}.json"
        model.dump_spec(spec, path)
        back = model.load_spec(path)
        for key in ("A", "A_bar", "B", "B_bar"):
            assert np.array_equal(getattr(back, key), getattr(spec, key))
        assert back.sigma == spec.sigma


def test_scale_A():
    spec = systems.four_dim()
    assert model.scale_A(spec, 1.0) == spec
    scaled = model.scale_A(spec, 0.95)
    np.testing.assert_array_equal(scaled.A, 0.95 * spec.A)
    for key in ("A_bar", "B", "B_bar"):
        np.testing.assert_array_equal(getattr(scaled, key), getattr(spec, key))
    assert scaled.sigma == spec.sigma
    assert model.scale_A(systems.scalar(0.5, 0, 1, 0, 1), 2.0).A[0, 0] == 1.0


def test_scaling_preserves_nondegeneracy(rng):
    specs = [random_spec(rng, 3, 2) for _ in range(5)]
    specs.append(model.SystemSpec(np.eye(2), np.eye(2), np.zeros((2, 1)), np.zeros((2, 1)), 1.0))
    for spec in specs:
        base = model.validate(spec).nondegenerate
        for theta in (0.1, 0.95, 1.0, 3.0):
            assert model.validate(model.scale_A(spec, theta)).nondegenerate == base


def test_spec_is_immutable():
    spec = systems.two_dim()
    with pytest.raises(ValueError):
        spec.A[0, 0] = 1.0
    with pytest.raises(AttributeError):
        spec.sigma = 3.0


def test_constructor_dimension_checks():
    with pytest.raises(DimensionMismatch):
        model.SystemSpec(np.eye(2), np.eye(3), np.ones((2, 1)), np.ones((2, 1)), 1.0)
    with pytest.raises(InvalidSigma):
        model.SystemSpec(np.eye(2), np.eye(2), np.ones((2, 1)), np.ones((2, 1)), 0.0)

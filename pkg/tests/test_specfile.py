import json
import math

import numpy as np
import pytest

from measure_schroed.generators import delta_comb
from measure_schroed.measures import Interval, Measure, difference_tv, scale_pushforward
from measure_schroed.specfile import (
    SpecError,
    dump_measure,
    load_measure,
    measure_from_spec,
    measure_to_spec,
    read_json,
)

from randomized import random_measure, random_periodic_measure


def test_single_part_spec():
    mu = measure_from_spec({"period": 1.0, "atoms": [{"pos": 0.5, "weight": 1.0}],
                            "density": [{"from": 0.0, "to": 0.25, "value": 2.0}]})
    assert mu.period == 1.0
    assert [(a.pos, a.weight) for a in mu.atoms] == [(0.5, 1.0)]
    assert [(d.lo, d.hi, d.value) for d in mu.density] == [(0.0, 0.25, 2.0)]


def test_empty_spec_is_zero():
    assert measure_from_spec({}).is_zero


def test_infinite_density_allowed_when_aperiodic():
    mu = measure_from_spec({"density": [{"from": "-inf", "to": "inf", "value": 1.0}]})
    assert mu.density[0].lo == -math.inf


@pytest.mark.parametrize("doc,field", [
    ({"atoms": [{"pos": 1.0, "weight": 1.0}, {"pos": 0.5, "weight": 1.0}]}, "atoms[1].pos"),
    ({"atoms": [{"pos": "x", "weight": 1.0}]}, "atoms[0]"),
    ({"density": [{"from": 1.0, "to": 0.0, "value": 1.0}]}, "density[0]"),
    ({"density": [{"from": 0.0, "to": 1.0, "value": 1.0}, {"from": 0.5, "to": 2.0, "value": 1.0}]},
     "density[1]"),
    ({"period": -1.0}, "period"),
    ({"perod": 1.0}, "<root>"),
    ({"period": 1.0, "density": [{"from": 0.0, "to": "inf", "value": 1.0}]}, "density[0]"),
    ({"components": [{"atoms": [{"pos": 0.0}]}]}, "components[0].atoms[0]"),
])
def test_diagnostics_name_the_field(doc, field):
    with pytest.raises(SpecError) as info:
        measure_from_spec(doc)
    assert info.value.field.startswith(field)
    assert field in str(info.value)


def test_round_trip_random():
    rng = np.random.default_rng(21)
    for _ in range(20):
        mu = random_periodic_measure(rng) if rng.random() < 0.5 else random_measure(rng, span=10)
        back = measure_from_spec(json.loads(json.dumps(measure_to_spec(mu))))
        assert difference_tv(mu, back, Interval(-15, 15)) == 0.0
        assert back.period == mu.period


def test_round_trip_components():
    mu = delta_comb(1.0, 0.5, 1.0) + scale_pushforward(delta_comb(1.0, 0.0, 2.0), math.sqrt(2) - 1)
    spec = measure_to_spec(mu)
    assert "components" in spec
    back = measure_from_spec(spec)
    assert len(back.parts) == 2
    assert difference_tv(mu, back, Interval(-50, 50)) == 0.0


def test_file_io(tmp_path):
    path = tmp_path / "comb.json"
    dump_measure(delta_comb(1.0, 0.5, 1.0), path)
    assert load_measure(path).period == 1.0
    with pytest.raises(FileNotFoundError, match="no such file"):
        load_measure(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"period": 1.0,\n "atoms": [}\n')
    with pytest.raises(SpecError) as info:
        read_json(bad)
    assert f"{bad}:2" in str(info.value)


def test_spec_error_is_value_error():
    assert issubclass(SpecError, ValueError)
    assert isinstance(SpecError("a", "b"), ValueError)


def test_measure_from_spec_rejects_non_objects():
    with pytest.raises(SpecError):
        measure_from_spec([1, 2])
    with pytest.raises(SpecError):
        measure_from_spec({"atoms": {}})
    assert isinstance(measure_from_spec({"atoms": []}), Measure)

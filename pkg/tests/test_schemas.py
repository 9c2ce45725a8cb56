import json

import pytest

from meshmetrics.core import MetricId
from meshmetrics.errors import InvariantViolation, SchemaError
from meshmetrics.harness import Scenario
from meshmetrics.linksim import BernoulliLoss, FadingSnr, GilbertElliott
from meshmetrics.schemas import (
    apply_overrides,
    metric_id_from_string,
    parse_scenario_file,
    scenario_from_dict,
    scenario_to_dict,
)

from helpers import random_scenario

MINIMAL = {
    "nodes": [0, 1],
    "links": [{"from": 0, "to": 1}],
    "flow": {"src": 0, "dst": 1},
}


def write_scenario(tmp_path, document, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return path


class TestParseScenario:
    def test_minimal_file_gets_defaults(self, tmp_path):
        scenario = parse_scenario_file(write_scenario(tmp_path, MINIMAL))
        assert scenario.measurement.window_s == 10
        assert scenario.measurement.duration_s == 100
        truth = next(iter(scenario.truths.values()))
        assert truth.max_retry == 7
        assert isinstance(truth.loss_model, BernoulliLoss)
        assert scenario.metrics[0][0] == MetricId.ETX
        config = scenario.metrics[0][1]
        assert config.beta == 0.5 and config.w1 == 0.0 and config.w2 == 1.0
        assert scenario.seed == 0

    def test_beta_out_of_bounds(self, tmp_path):
        document = dict(MINIMAL, metrics=[{"id": "wcett", "config": {"beta": 1.5}}])
        with pytest.raises(InvariantViolation):
            parse_scenario_file(write_scenario(tmp_path, document))

    def test_missing_flow_destination_names_field(self, tmp_path):
        document = {"nodes": [0, 1], "links": [{"from": 0, "to": 1}], "flow": {"src": 0}}
        with pytest.raises(SchemaError) as err:
            parse_scenario_file(write_scenario(tmp_path, document))
        assert "dst" in str(err.value)

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"nodes": [0, 1],\n  "links": [}')
        with pytest.raises(SchemaError) as err:
            parse_scenario_file(path)
        assert "line 2" in str(err.value)

    def test_file_not_found(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_scenario_file(tmp_path / "absent.json")

    def test_unknown_metric_id(self, tmp_path):
        document = dict(MINIMAL, metrics=[{"id": "bogus"}])
        with pytest.raises(SchemaError) as err:
            parse_scenario_file(write_scenario(tmp_path, document))
        assert "bogus" in str(err.value)

    def test_unknown_link_field_rejected(self, tmp_path):
        document = dict(MINIMAL, links=[{"from": 0, "to": 1, "rate": 1e6}])
        with pytest.raises(SchemaError):
            parse_scenario_file(write_scenario(tmp_path, document))

    def test_dangling_link_is_invariant_violation(self, tmp_path):
        document = dict(MINIMAL, links=[{"from": 0, "to": 9}])
        with pytest.raises(InvariantViolation):
            parse_scenario_file(write_scenario(tmp_path, document))

    def test_loss_models_parse(self, tmp_path):
        document = dict(
            MINIMAL,
            nodes=[0, 1, 2],
            links=[
                {"from": 0, "to": 1, "loss": {"model": "gilbert_elliott", "p_good": 0.1,
                                              "p_bad": 0.9, "t_gb": 0.05, "t_bg": 0.2}},
                {"from": 1, "to": 2, "loss": {"model": "fading_snr", "mean_snr_db": 12,
                                              "sigma_db": 3, "coherence_slots": 6}},
            ],
        )
        scenario = parse_scenario_file(write_scenario(tmp_path, document))
        models = [type(t.loss_model) for t in scenario.truths.values()]
        assert GilbertElliott in models and FadingSnr in models


class TestRoundTrip:
    def test_minimal_round_trip(self):
        scenario = scenario_from_dict(MINIMAL)
        assert scenario_from_dict(scenario_to_dict(scenario)) == scenario

    def test_random_scenarios_round_trip(self):
        for seed in range(25):
            scenario = random_scenario(seed, metric_ids=(MetricId.ETX, MetricId.WCETT))
            document = scenario_to_dict(scenario)
            assert scenario_from_dict(document) == scenario
            # serialization itself is stable
            assert scenario_to_dict(scenario_from_dict(document)) == document

    def test_config_fields_survive(self):
        document = dict(
            MINIMAL,
            channels=3,
            metrics=[{"id": "mcr", "config": {"beta": 0.7, "switching_delay_s": 8e-5,
                                              "interface_usage": {"0": 0.2, "2": 0.4}}}],
        )
        document["links"] = [dict(document["links"][0], channel=2)]
        scenario = scenario_from_dict(document)
        mid, config = scenario.metrics[0]
        assert mid == MetricId.MCR
        assert config.beta == 0.7
        assert config.interface_usage == {0: 0.2, 2: 0.4}
        assert scenario_from_dict(scenario_to_dict(scenario)) == scenario


class TestOverrides:
    def test_seed_override(self):
        scenario = scenario_from_dict(MINIMAL)
        assert apply_overrides(scenario, seed=99).seed == 99
        assert apply_overrides(scenario).seed == scenario.seed

    def test_metric_filter_keeps_file_config(self):
        document = dict(MINIMAL, metrics=[{"id": "wcett", "config": {"beta": 0.9}},
                                          {"id": "etx"}])
        scenario = scenario_from_dict(document)
        filtered = apply_overrides(scenario, metric_ids=["ett", "wcett"])
        assert [m.value for m, _ in filtered.metrics] == ["ett", "wcett"]
        assert dict(filtered.metrics)[MetricId.WCETT].beta == 0.9

    def test_unknown_filter_metric(self):
        scenario = scenario_from_dict(MINIMAL)
        with pytest.raises(SchemaError):
            apply_overrides(scenario, metric_ids=["nope"])


def check_scenario_round_trip(n: int = 25) -> None:
    for seed in range(n):
        scenario = random_scenario(seed, metric_ids=(MetricId.ETX, MetricId.WCETT))
        assert scenario_from_dict(scenario_to_dict(scenario)) == scenario


def test_metric_id_from_string():
    assert metric_id_from_string("etx") == MetricId.ETX
    with pytest.raises(SchemaError):
        metric_id_from_string("ETX")

"""Configuration layering: parse, serialize, merge, environment, validation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcalc.config import (
    CONFIG_SECTIONS,
    ConfigError,
    default_config,
    env_overrides,
    gamma_from_config,
    load_config,
    merge_config,
    parse_config_text,
    serialize_config,
    solver_from_config,
    validate_config,
)
from gcalc.pde import SolverConfig
from gcalc.uncertainty import DiagonalBox, Interval1D


SAMPLE = """
[gamma]
kind = "interval1d"
sigma_low = 0.25
sigma_high = 2.0

[pde]
n_points = 801
cfl_factor = 0.4

[sde]
name = "affine"

[sde.params]
drift_slope = -0.5
noise_slope = 1.0

[suite]
tolerance = 0.01

[[suite.battery]]
times = [1.0]
lower = { template = "call", strike = 0.25 }
upper = { template = "abs_last" }
"""


def test_defaults_validate():
    doc = default_config()
    assert validate_config(doc) is doc
    assert set(doc) == set(CONFIG_SECTIONS)


def test_parse_rejects_unknown_section():
    with pytest.raises(ConfigError, match=r"unknown section \[pricing\]"):
        parse_config_text("[pricing]\nmodel = 1\n")


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown key pde.n_cells"):
        parse_config_text("[pde]\nn_cells = 100\n")


def test_parse_rejects_top_level_scalar():
    with pytest.raises(ConfigError, match="must be a table"):
        parse_config_text("pde = 3\n")


def test_parse_rejects_bad_toml():
    with pytest.raises(ConfigError, match="not valid TOML"):
        parse_config_text("[pde\nn_points = 3\n")


def test_gamma_section_is_free_form():
    doc = parse_config_text('[gamma]\nkind = "diagonal_box"\nlows = [0.1]\nhighs = [1.0]\n')
    assert gamma_from_config(merge_config(default_config(), doc)) == DiagonalBox.of(
        [(0.1, 1.0)]
    )


def test_serialize_parse_is_identity_on_parsed_documents():
    first = parse_config_text(SAMPLE)
    assert parse_config_text(serialize_config(first)) == first


def test_serialize_covers_full_default_document():
    doc = default_config()
    assert parse_config_text(serialize_config(doc)) == doc


def test_serialize_rejects_unserializable_values():
    doc = default_config()
    doc["pde"]["n_points"] = object()
    with pytest.raises(ConfigError, match="pde.n_points"):
        serialize_config(doc)


@settings(max_examples=50, deadline=None)
@given(
    n_points=st.integers(min_value=3, max_value=10_000),
    cfl=st.floats(min_value=0.05, max_value=1.0, allow_nan=False),
    horizon=st.floats(min_value=1e-6, max_value=1e6, allow_nan=False),
    tolerance=st.floats(min_value=1e-12, max_value=1.0, allow_nan=False),
)
def test_serialize_round_trips_numeric_fields(n_points, cfl, horizon, tolerance):
    doc = default_config()
    doc["pde"]["n_points"] = n_points
    doc["pde"]["cfl_factor"] = cfl
    doc["paths"]["horizon"] = horizon
    doc["suite"]["tolerance"] = tolerance
    again = parse_config_text(serialize_config(doc))
    assert again == doc


class TestEnvOverrides:
    def test_basic_integer(self):
        out = env_overrides({"GCALC_PDE_N_POINTS": "801"})
        assert out == {"pde": {"n_points": 801}}

    def test_bare_string_fallback(self):
        out = env_overrides({"GCALC_GAMMA_KIND": "interval1d"})
        assert out == {"gamma": {"kind": "interval1d"}}

    def test_toml_literals(self):
        out = env_overrides(
            {
                "GCALC_PATHS_HORIZON": "2.5",
                "GCALC_SDE_X0": "[1.0, 2.0]",
                "GCALC_GAMMA_SIGMA_LOW": "0.25",
            }
        )
        assert out["paths"]["horizon"] == 2.5
        assert out["sde"]["x0"] == [1.0, 2.0]
        assert out["gamma"]["sigma_low"] == 0.25

    def test_unrelated_variables_ignored(self):
        assert env_overrides({"PATH": "/usr/bin", "GCALCX_PDE_N_POINTS": "7"}) == {}

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="GCALC_PRICING_MODEL"):
            env_overrides({"GCALC_PRICING_MODEL": "1"})

    def test_missing_field_rejected(self):
        with pytest.raises(ConfigError, match="GCALC_PDE"):
            env_overrides({"GCALC_PDE": "3"})


def test_merge_is_deep_for_tables_and_replacing_for_lists():
    base = {"sde": {"params": {"a": 1.0, "b": 2.0}, "x0": [1.0, 2.0]}}
    out = merge_config(base, {"sde": {"params": {"b": 3.0}, "x0": [5.0]}})
    assert out["sde"]["params"] == {"a": 1.0, "b": 3.0}
    assert out["sde"]["x0"] == [5.0]
    # the input documents are left untouched
    assert base["sde"]["params"]["b"] == 2.0


def test_load_config_layering_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[pde]\nn_points = 101\ncfl_factor = 0.3\n[paths]\nseed = 7\n")
    doc = load_config(
        cfg,
        environ={"GCALC_PDE_N_POINTS": "201", "GCALC_PATHS_N_STEPS": "500"},
        cli_overrides={"pde": {"n_points": 301}},
    )
    assert doc["pde"]["n_points"] == 301  # CLI beats environment beats file
    assert doc["paths"]["n_steps"] == 500  # environment beats defaults
    assert doc["pde"]["cfl_factor"] == 0.3  # file beats defaults
    assert doc["paths"]["seed"] == 7
    assert doc["paths"]["horizon"] == 1.0  # untouched default survives


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="config file not found"):
        load_config("/nonexistent/run.toml", environ={})


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d["pde"].update(n_points=2), "pde"),
        (lambda d: d["pde"].update(boundary_policy="mirror"), "pde"),
        (lambda d: d["paths"].update(horizon=0.0), "paths.horizon"),
        (lambda d: d["paths"].update(n_paths=1), "paths.n_paths"),
        (lambda d: d["paths"].update(seed=-1), "paths.seed"),
        (lambda d: d["sde"].update(name=3), "sde.name"),
        (lambda d: d["sde"].update(x0=True), "sde.x0"),
        (lambda d: d["sde"].update(x0=[]), "sde.x0"),
        (lambda d: d["sde"].update(params=[1.0]), "sde.params"),
        (lambda d: d["sde"].update(iterations=0), "sde.iterations"),
        (lambda d: d["suite"].update(tolerance=0.0), "suite.tolerance"),
        (lambda d: d["suite"].update(battery=[3]), "suite.battery"),
        (lambda d: d["gamma"].update(sigma_low=-1.0), "gamma"),
        (lambda d: d.pop("paths"), r"missing section \[paths\]"),
    ],
)
def test_validate_names_the_offending_field(mutate, fragment):
    doc = default_config()
    mutate(doc)
    with pytest.raises(ConfigError, match=fragment):
        validate_config(doc)


def test_typed_accessors():
    doc = default_config()
    gamma = gamma_from_config(doc)
    assert gamma == Interval1D(0.5, 1.0)
    solver = solver_from_config(doc)
    assert isinstance(solver, SolverConfig)
    assert solver.n_points == 401
    assert solver.cfl_factor == 0.5


def test_gamma_accessor_wraps_parse_errors():
    doc = default_config()
    doc["gamma"] = {"kind": "triangle"}
    with pytest.raises(ConfigError, match="gamma"):
        gamma_from_config(doc)

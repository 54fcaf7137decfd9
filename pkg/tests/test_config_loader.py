from pathlib import Path

import pytest
import yaml

from config.config_loader import ConfigLoader, parse_config
from core.errors import ConfigError

REPO = Path(__file__).resolve().parents[1]


def _config(**sections):
    base = {
        "engine": {"c_max": 50, "mn_cap": 1000, "workers": 8},
        "coeffs": {"weight": 12, "n_max": 2000},
        "transforms": {"test_function": "gauss13"},
        "exp_sums": {"max_table_bytes": 1024},
        "suites": {"run": ["gamma", "sieve"], "primes": [[2, 3]], "s_values": ["1.5"]},
        "output": {"sinks": []},
        "logging": {"version": 1},
    }
    base.update(sections)
    return base


def test_parse_config_defaults_and_flags(monkeypatch):
    monkeypatch.delenv("RECIP_THREADS", raising=False)
    run = parse_config(_config(), {"p": 5, "q": 2, "s": ["1.4+0.3i"], "c_max": 20, "sabotage": True, "json": None})
    assert run.suites == ("gamma", "sieve")
    assert run.primes == ((5, 2),)
    assert run.s_values == (complex(1.4, 0.3),)
    assert (run.c_max, run.mn_cap, run.n_max, run.workers) == (20, 1000, 2000, 8)
    assert run.sabotage is True
    assert run.json_path is None
    assert run.options("sieve") == {}


@pytest.mark.parametrize("overrides, field", [
    ({"suites": ["nope"]}, "suites"),
    ({"p": 3, "q": 3}, "primes"),
    ({"p": 4, "q": 3}, "primes"),
    ({"p": 2}, "primes"),
    ({"s": ["1.2"]}, "s"),
    ({"s": ["abc"]}, "s"),
    ({"mn_cap": 5000}, "engine.mn_cap"),
    ({"rel_tol": 0.0}, "engine.rel_tol"),
    ({"suites": ["lfe"], "d": 2}, "c"),
    ({"suites": ["dgfe"], "c": 5, "a": 2}, "a"),
    ({"suites": ["lfe"], "c": 0}, "c"),
])
def test_parse_config_rejects(overrides, field):
    with pytest.raises(ConfigError) as info:
        parse_config(_config(), overrides)
    assert info.value.field == field


def test_small_sigma_is_fine_for_primitive_suites():
    run = parse_config(_config(), {"suites": ["gamma", "lfe"], "s": ["0.5"]})
    assert run.s_values == (0.5 + 0j,)


def test_threads_env_caps_workers(monkeypatch):
    monkeypatch.setenv("RECIP_THREADS", "2")
    assert parse_config(_config()).workers == 2
    monkeypatch.setenv("RECIP_THREADS", "many")
    with pytest.raises(ConfigError) as info:
        parse_config(_config())
    assert info.value.field == "RECIP_THREADS"


def test_load_from_recip_home(tmp_path, monkeypatch):
    monkeypatch.setenv("RECIP_HOME", str(tmp_path))
    (tmp_path / "ok.yaml").write_text(yaml.safe_dump(_config()))
    config = ConfigLoader.load("ok.yaml")
    assert config["recip_home"] == str(tmp_path.resolve())
    assert config["_config_file"].endswith("ok.yaml")

    broken = _config()
    del broken["transforms"]
    (tmp_path / "broken.yaml").write_text(yaml.safe_dump(broken))
    with pytest.raises(ValueError, match="transforms"):
        ConfigLoader.load("broken.yaml")

    (tmp_path / "sink.yaml").write_text(yaml.safe_dump(_config(output={"sinks": [{"class": "LedSink"}]})))
    with pytest.raises(ValueError, match="LedSink"):
        ConfigLoader.load("sink.yaml")

    with pytest.raises(FileNotFoundError):
        ConfigLoader.load("missing.yaml")


def test_missing_recip_home(monkeypatch):
    monkeypatch.delenv("RECIP_HOME", raising=False)
    with pytest.raises(ValueError, match="RECIP_HOME"):
        ConfigLoader.load("config/dev.yaml")


@pytest.mark.parametrize("name", ["dev", "prod", "github"])
def test_shipped_configs_are_valid(monkeypatch, name):
    monkeypatch.setenv("RECIP_HOME", str(REPO))
    monkeypatch.delenv("RECIP_THREADS", raising=False)
    config = ConfigLoader.load(f"config/{name}.yaml")
    run = parse_config(config)
    assert run.suites
    assert run.mn_cap <= run.n_max
    assert all(s.real > 1.25 for s in run.s_values)


def test_cutoff_and_tolerance_flags(monkeypatch):
    monkeypatch.delenv("RECIP_THREADS", raising=False)
    run = parse_config(_config(coeffs={"weight": 12, "n_max": 100_000}),
                       {"suites": ["reciprocity"], "p": 2, "q": 3, "s": ["1.5"], "test_function": "gauss13",
                        "c_max": 600, "rel_tol": 1e-3, "json": "out.json"})
    assert (run.c_max, run.rel_tol, run.json_path) == (600, 1e-3, "out.json")
    assert parse_config(_config(engine={"c_max": 50, "mn_cap": 1000, "rel_tol": 0.05})).rel_tol == 0.05


def test_twist_flags_replace_the_lfe_and_dgfe_cases():
    run = parse_config(_config(), {"suites": ["lfe"], "c": 5, "d": 2, "s": ["0.5+2i"]})
    assert run.options("lfe") == {"moduli": [5], "numerators": [2], "strip_points": ["0.5+2i"]}
    assert run.options("dgfe") == {}

    run = parse_config(_config(), {"suites": ["dgfe"], "c": 5, "a": 2, "b": 3, "s": ["0.6+1i"]})
    assert run.options("dgfe") == {"cases": [[2, 3, 5]], "s_values": ["0.6+1i"]}
    assert run.options("lfe")["moduli"] == [5]

import math
from pathlib import Path

import numpy as np
import pytest

from brim.config import (
    brim_config_from_text,
    brim_config_to_text,
    build_brim_config,
    format_flat,
    parse_flat,
    resolve,
)
from brim.dynamics import bifurcation_leak, integrate, stable_dt
from brim.errors import ConfigError
from brim.graph import gen_random_graph, maxcut_to_ising

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_parse_flat_comments_and_spacing():
    text = "# header\n a = 1 \nb=two # trailing\n\n"
    assert parse_flat(text) == {"a": "1", "b": "two"}


@pytest.mark.parametrize("text", ["a = 1\na = 2\n", "novalue\n", " = 3\n"])
def test_parse_flat_errors(text):
    with pytest.raises(ConfigError, match="line"):
        parse_flat(text)


def test_resolve_defaults_and_types():
    s = resolve("brim", {"t_end": "20", "normalize": "false", "weight_bits": "4"})
    assert s["t_end"] == 20.0 and s["normalize"] is False and s["weight_bits"] == 4
    assert s["leak"] == "auto" and s["perturb.period"] == math.inf
    assert resolve("sa")["sweeps"] == 1000
    assert resolve("asa", {"solver": "asa", "instance": "x"})["p0"] == 0.2


@pytest.mark.parametrize(
    "solver, flat",
    [("brim", {"nosuch": "1"}), ("brim", {"t_end": "abc"}), ("sa", {"solver": "brim"}),
     ("nosuch", {})],
)
def test_resolve_rejects(solver, flat):
    with pytest.raises(ConfigError):
        resolve(solver, flat)


def test_auto_values_resolved_against_instance():
    J = maxcut_to_ising(gen_random_graph(40, 0.2, "pm1", seed=0))
    cfg = build_brim_config(resolve("brim", {"t_end": "30"}), J)
    Jn = J.normalized()
    assert cfg.leak == pytest.approx(bifurcation_leak(Jn, 1.0, 0.3))
    assert cfg.integrator.dt == pytest.approx(stable_dt(Jn, 1.0, cfg.leak))
    assert cfg.schedule.tau_a == pytest.approx(6.0)


def test_brim_config_text_roundtrip():
    J = maxcut_to_ising(gen_random_graph(12, 0.5, "int:-2:2", seed=1))
    flat = {"t_end": "7.5", "perturb.period": "1.25", "perturb.nodes_per_event": "2",
            "init.vector": ",".join(str(x) for x in np.linspace(-0.1, 0.1, 12)),
            "weight_bits": "3", "integrator.method": "rk45", "seed": "9"}
    cfg = build_brim_config(resolve("brim", flat), J)
    text = brim_config_to_text(cfg)
    again = brim_config_from_text(text, J)
    assert brim_config_to_text(again) == text
    a, ta = integrate(cfg)
    b, tb = integrate(again)
    assert np.array_equal(a.v, b.v) and ta.to_csv() == tb.to_csv()


def test_format_flat_values():
    assert format_flat({"a": True, "b": math.inf, "c": None, "d": 0.1}) == (
        "a = true\nb = inf\nc = none\nd = 0.1\n")


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    flat = parse_flat(path.read_text())
    resolve(flat["solver"], flat)

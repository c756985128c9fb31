from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhdshock.config import ConfigError, Discretization, Filter, RunConfig, dumps, load, loads
from qhdshock.hydro import GasParams

pos = st.floats(1e-6, 1e3, allow_nan=False)


@st.composite
def configs(draw):
    rm = draw(st.floats(0.2, 3.0))
    eps = draw(st.lists(st.floats(1e-4, 0.99), min_size=0, max_size=4, unique=True))
    return RunConfig(
        gas=GasParams(draw(st.floats(1.0, 3.5)), draw(pos), draw(st.floats(0.01, 5.0))),
        r_minus=rm,
        s=tuple(draw(st.lists(pos, min_size=1, max_size=3))),
        eps=tuple(sorted({e * rm for e in eps}, reverse=True)),
        discretization=Discretization(n=draw(st.integers(16, 5000)), scheme=draw(st.sampled_from(["fd4", "spectral"])),
                                      rel_tol=draw(pos)),
        filter=Filter(max_track=draw(st.integers(1, 100)), filter_tol=draw(pos)),
        figures=draw(st.booleans()),
        out_dir=draw(st.text("abc/_-", min_size=1, max_size=8)),
        seed=draw(st.integers(0, 2**31)),
    )


@settings(max_examples=60)
@given(configs())
def test_round_trip(cfg):
    assert loads(dumps(cfg)) == cfg


def test_defaults():
    cfg = loads("")
    assert cfg == RunConfig()
    assert cfg.gas.k == pytest.approx(math.sqrt(2.0)) and cfg.eps == (0.05,)
    flat = cfg.flat()
    assert flat["discretization.n"] == 2000 and flat["gas.gamma"] == 1.5


def test_file_load(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("r_minus: 0.7\ns: [1.0, 1.2]\neps: [0.1, 0.05]\n")
    cfg = load(p)
    assert cfg.s == (1.0, 1.2) and cfg.eps == (0.1, 0.05)


def test_yaml_errors_name_the_line():
    with pytest.raises(ConfigError, match="line 3"):
        loads("r_minus: 0.7\ns: [1.0\neps: : 0.1\n")


@pytest.mark.parametrize(
    "text, match",
    [
        ("bogus: 1\n", "unknown keys: bogus"),
        ("discretization:\n  n: 100\n  grid: 3\n", "discretization"),
        ("gas:\n  gamma: 0.5\n", "gas"),
        ("gas:\n  cv: 1\n", "gas"),
        ("eps: [0.05, 0.1]\n", "strictly decreasing"),
        ("eps: [0.1, 0.1]\n", "strictly decreasing"),
        ("eps: [0.9]\n", "below r_minus"),
        ("s: []\n", "shock speed"),
        ("s: [-1.0]\n", "s: must be a positive"),
        ("discretization:\n  scheme: fd8\n", "scheme"),
        ("discretization:\n  n: 8\n", "discretization.n"),
        ("filter:\n  max_track: 0\n", "filter.max_track"),
        ("filter:\n  filter_tol: nope\n", "filter.filter_tol: not a number"),
        ("kappa:\n  gamma_min: 3\n  gamma_max: 2\n", "kappa"),
        ("r_plus: [0.6]\neps: [0.1]\n", "either eps or r_plus"),
        ("- 1\n- 2\n", "mapping"),
        ("seed: 1.5\n", "seed"),
    ],
)
def test_invalid_documents(text, match):
    with pytest.raises(ConfigError, match=match):
        loads(text)


def test_r_plus_alternative():
    cfg = loads("r_minus: 0.7\nr_plus: [0.65, 0.6]\n")
    assert cfg.eps == pytest.approx((0.1, 0.05))


def test_exponent_strings_are_numbers():
    # plain YAML reads 1e-11 as a string
    cfg = loads("discretization:\n  rel_tol: 1e-11\nr_minus: 7e-1\n")
    assert cfg.discretization.rel_tol == 1e-11 and cfg.r_minus == 0.7

"""RunConfig settings, config files, and the qualitative term table."""

from __future__ import annotations

from datetime import date
from fractions import Fraction

import pytest

from quint.config import DEFAULT_TERMS, RunConfig, TermTable, load_config
from quint.errors import UnresolvedTerm, ValidationError


def test_default_terms():
    terms = TermTable()
    assert terms.bound("validity", "high") == Fraction("0.65")
    assert terms.bound("validity", "MEDIUM") == Fraction("0.40")
    assert terms.bound("timeliness", "low") == 0
    assert DEFAULT_TERMS["high"] == Fraction("0.65")


def test_term_overrides_beat_defaults():
    terms = TermTable()
    terms.define("high", Fraction("0.9"), feature="timeliness")
    assert terms.bound("timeliness", "high") == Fraction("0.9")
    assert terms.bound("validity", "high") == Fraction("0.65")
    terms.define("strict", Fraction("0.99"))
    assert terms.bound("accuracy", "strict") == Fraction("0.99")


def test_term_table_rejects_bad_definitions():
    terms = TermTable()
    with pytest.raises(UnresolvedTerm):
        terms.bound("validity", "gigantic")
    with pytest.raises(ValidationError):
        terms.define("big", Fraction(2))
    with pytest.raises(ValidationError):
        terms.define("", Fraction(1, 2))
    with pytest.raises(ValidationError):
        terms.define("big", Fraction(1, 2), feature="speed")


def test_config_set_core_keys():
    config = RunConfig()
    config.set("as_of", "2/2/2016")
    config.set("age_mode", "months30")
    config.set("score_precision", "3")
    config.set("scoring", "min")
    config.set("output", "csv")
    config.set("max_sources", "8")
    assert config.as_of == date(2016, 2, 2)
    assert config.age_mode == "months30"
    assert config.score_precision == 3
    assert config.scoring == "min"
    assert config.output == "csv"
    assert config.max_sources == 8
    config.set("score_precision", "full")
    assert config.score_precision is None
    config.set("score_precision", "none")
    assert config.score_precision is None


def test_config_set_weights_and_terms():
    config = RunConfig()
    config.set("weight.fact_completeness", "2")
    config.set("weight.fact completeness", "3")  # same feature, overwrites
    assert config.weights == {"fact_completeness": Fraction(3)}
    config.set("term.high", "0.7")
    assert config.terms.bound("validity", "high") == Fraction("0.7")
    config.set("term.timeliness.high", "0.9")
    assert config.terms.bound("timeliness", "high") == Fraction("0.9")


def test_config_set_rejects_unknowns():
    config = RunConfig()
    for key, value in [
        ("age_mode", "weeks"),
        ("scoring", "product"),
        ("output", "json"),
        ("max_sources", "0"),
        ("score_precision", "44"),
        ("weight.speed", "1"),
        ("term.speed.high", "0.5"),
        ("term.a.b.c", "0.5"),
        ("weight.validity", "fast"),
        ("color", "red"),
    ]:
        with pytest.raises((ValidationError, ValueError)):
            config.set(key, value)


def test_load_config_file(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text(
        """
        # sample settings
        as_of = 2/2/2016
        age_mode = months30
        term.high = 0.75
        weight.timeliness = 2
        """
    )
    config = load_config(path)
    assert config.as_of == date(2016, 2, 2)
    assert config.age_mode == "months30"
    assert config.terms.bound("validity", "high") == Fraction("0.75")
    assert config.weights == {"timeliness": Fraction(2)}

    bad = tmp_path / "bad.conf"
    bad.write_text("as_of 2/2/2016\n")
    with pytest.raises(ValidationError):
        load_config(bad)

import pytest

from app.core.exceptions import ConfigurationError
from app.schemas.model import InputRepr
from app.utils.helpers import format_table, load_model_config, parse_key_values, read_jsonl, write_jsonl


def test_parse_key_values():
    text = "# model\nbeam_width = 5\n\nencoder_hidden=32  # smaller\n"
    assert parse_key_values(text) == {"beam_width": "5", "encoder_hidden": "32"}


def test_parse_key_values_rejects_bare_words():
    with pytest.raises(ConfigurationError):
        parse_key_values("beam_width 5")


def test_load_model_config(tmp_path):
    path = tmp_path / "model.cfg"
    path.write_text("input_repr=m_old_and_m_new\nbeam_width=5\nuse_features=false\n")
    config = load_model_config(path)
    assert config.input_repr == InputRepr.M_OLD_AND_M_NEW
    assert config.beam_width == 5
    assert config.use_features is False


@pytest.mark.parametrize("text", ["hidden_size=3\n", "beam_width=many\n"])
def test_load_model_config_errors(tmp_path, text):
    path = tmp_path / "model.cfg"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_model_config(path)


def test_read_jsonl_skips_bad_lines(tmp_path):
    path = tmp_path / "rows.jsonl"
    path.write_text('{"a": 1}\nnot json\n\n{"a": 2}\n')
    assert [row["a"] for row in read_jsonl(path)] == [1, 2]


def test_write_jsonl_creates_parents(tmp_path):
    path = tmp_path / "nested" / "rows.jsonl"
    assert write_jsonl(path, [{"a": 1}, {"a": 2}]) == 2
    assert path.exists()


def test_format_table():
    table = format_table([{"model": "copy", "xmatch": 0.0}, {"model": "edit", "xmatch": 18.8}], ["model", "xmatch"])
    lines = table.splitlines()
    assert lines[0].split() == ["model", "xmatch"]
    assert set(lines[1].replace(" ", "")) == {"-"}
    assert lines[3].split() == ["edit", "18.800"]

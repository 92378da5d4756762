import random

import numpy as np

from app.core import editlex
from app.core.features import (
    BOOLEAN_FIELDS,
    ENUM_FIELDS,
    FEATURE_WIDTH,
    STOP_WORDS,
    feature_columns,
    featurize_code,
    featurize_comment,
    lexicon_tagger,
    to_onehot,
    to_tsv,
)
from app.core.tokenizer import lex_method, tokenize_comment
from app.schemas.features import SUBTOKEN_INDEX_CAP, PosTag, SpanMembership, VersionMatch


def _rows_by_token(matrix):
    return {row.token: row for row in matrix.rows}


def test_code_rows_align_with_serialization(rot_x_example):
    matrix = featurize_code(rot_x_example.m_edit, rot_x_example.c_old, rot_x_example.m_old, rot_x_example.m_new)
    serialized = editlex.serialize(rot_x_example.m_edit)
    assert [row.token for row in matrix.rows] == serialized

    for row in matrix.rows:
        if editlex.is_edit_keyword(row.token):
            assert row.is_edit_keyword
            assert row.span_membership == SpanMembership.NONE


def test_inserted_code_token(rot_x_example):
    matrix = featurize_code(rot_x_example.m_edit, rot_x_example.c_old, rot_x_example.m_old, rot_x_example.m_new)
    math = next(row for row in matrix.rows if row.token == "math")
    assert math.span_membership == SpanMembership.INSERT
    assert not math.matches_comment_token
    assert not math.is_java_keyword

    degrees = next(row for row in matrix.rows if row.token == "degrees")
    assert degrees.is_subtoken and degrees.subtoken_index == 1

    double = next(row for row in matrix.rows if row.token == "double")
    assert double.is_java_keyword
    assert double.matches_comment_token
    assert double.span_membership == SpanMembership.KEEP


def test_comment_features(rot_x_example):
    matrix = featurize_comment(rot_x_example.c_old, rot_x_example.m_edit, rot_x_example.m_old, rot_x_example.m_new)
    assert [row.token for row in matrix.rows] == rot_x_example.c_old.texts()
    rows = _rows_by_token(matrix)

    angle = rows["angle"]
    assert not angle.appears_multiple
    assert not angle.matches_inserted_code
    assert angle.return_stmt_match == VersionMatch.NONE

    assert rows["double"].return_type_match == VersionMatch.BOTH
    assert rows["the"].is_stop_word
    assert rows["the"].pos_tag == PosTag.DET
    assert rows["."].pos_tag == PosTag.PUNCT


def test_return_statement_versions(toy_examples):
    example = next(e for e in toy_examples if e.c_old.texts() == ["true", "if", "size", "is", "zero"])
    rows = _rows_by_token(featurize_comment(example.c_old, example.m_edit, example.m_old, example.m_new))
    assert rows["size"].return_stmt_match == VersionMatch.UNIQUE_OLD
    assert rows["size"].matches_replaced_code or rows["size"].matches_deleted_code


def test_custom_tagger(rot_x_example):
    matrix = featurize_comment(
        rot_x_example.c_old, rot_x_example.m_edit, rot_x_example.m_old, rot_x_example.m_new,
        tagger=lambda tokens: [PosTag.NOUN] * len(tokens),
    )
    assert {row.pos_tag for row in matrix.rows} == {PosTag.NOUN}


def test_lexicon_tagger():
    assert lexicon_tagger(["the", "value", "of", "it", "3", "quickly", "returns", ","]) == [
        PosTag.DET, PosTag.NOUN, PosTag.PREP, PosTag.PRON, PosTag.NUM, PosTag.ADV, PosTag.VERB, PosTag.PUNCT,
    ]


def test_stop_words_are_lowercase():
    assert all(word == word.lower() for word in STOP_WORDS)


def test_onehot_layout(rot_x_example):
    columns = feature_columns()
    assert len(columns) == FEATURE_WIDTH == len(set(columns))

    code = to_onehot(featurize_code(rot_x_example.m_edit, rot_x_example.c_old, rot_x_example.m_old, rot_x_example.m_new))
    comment = to_onehot(featurize_comment(rot_x_example.c_old, rot_x_example.m_edit, rot_x_example.m_old, rot_x_example.m_new))
    assert code.shape[1] == comment.shape[1] == FEATURE_WIDTH
    assert code.dtype == np.float32
    # each enum group and the subtoken index contribute exactly one hot column
    enum_columns = [i for i, c in enumerate(columns) if "=" in c]
    assert np.all(comment[:, enum_columns].sum(axis=1) == 5)
    assert np.all(code[:, enum_columns].sum(axis=1) == 5)


def test_tsv(rot_x_example):
    text = to_tsv(featurize_comment(rot_x_example.c_old, rot_x_example.m_edit, rot_x_example.m_old, rot_x_example.m_new))
    lines = text.strip().split("\n")
    assert lines[0].split("\t")[0] == "token"
    assert len(lines) == len(rot_x_example.c_old) + 1
    assert lines[1].split("\t")[0] == "double"


TYPES = ["int", "long", "double", "String", "List<String>", "Node", "boolean"]
NAMES = ["getCount", "getRollAngle", "max_value", "isEmpty", "nextNode", "size"]
EXPRESSIONS = [
    "count", "count + 1", "Math.toDegrees(angle)", "items.size() == 0", "node == null ? root : node.next",
    "\"name\"", "values.get(index)", "-1", "total_count / 2",
]
WORDS = ["the", "count", "roll", "angle", "in", "degrees", "node", "or", "null", "if", "empty", "list", "of", "items",
         "value", ",", ".", "maxValue", "total_count", "true"]


def _random_pair(rng):
    def method():
        name = rng.choice(NAMES)
        body = " ".join(f"if ({rng.choice(EXPRESSIONS)}) {{ return {rng.choice(EXPRESSIONS)}; }}" for _ in range(rng.randint(0, 2)))
        return f"public {rng.choice(TYPES)} {name}() {{ {body} return {rng.choice(EXPRESSIONS)}; }}"

    comment = "@return " + " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 10)))
    m_old, m_new = lex_method(method()), lex_method(method())
    return m_old, m_new, tokenize_comment(comment)


def _check_domain(matrix):
    for row in matrix.rows:
        for name in BOOLEAN_FIELDS:
            assert isinstance(getattr(row, name), bool), name
        for name, enum_type in ENUM_FIELDS:
            assert isinstance(getattr(row, name), enum_type), name
        assert row.subtoken_index is None or 0 <= row.subtoken_index <= SUBTOKEN_INDEX_CAP
        assert row.is_subtoken or row.subtoken_index is None

    onehot = to_onehot(matrix)
    assert set(np.unique(onehot)) <= {0.0, 1.0}
    col = len(BOOLEAN_FIELDS)
    for _, enum_type in ENUM_FIELDS:
        assert np.all(onehot[:, col:col + len(enum_type)].sum(axis=1) == 1)
        col += len(enum_type)
    assert np.all(onehot[:, col:].sum(axis=1) == 1)


def test_random_inputs_stay_in_domain_and_are_reproducible():
    rng = random.Random(11)
    for _ in range(300):
        m_old, m_new, c_old = _random_pair(rng)
        m_edit = editlex.encode_code_edits(m_old, m_new)

        code = featurize_code(m_edit, c_old, m_old, m_new)
        comment = featurize_comment(c_old, m_edit, m_old, m_new)
        assert len(code) == len(editlex.serialize(m_edit))
        assert len(comment) == len(c_old)
        _check_domain(code)
        _check_domain(comment)

        assert np.array_equal(to_onehot(code), to_onehot(featurize_code(m_edit, c_old, m_old, m_new)))
        assert np.array_equal(to_onehot(comment), to_onehot(featurize_comment(c_old, m_edit, m_old, m_new)))

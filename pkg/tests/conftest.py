from typing import Dict, List

import pytest

from app.schemas.corpus import ChangeRecord
from app.schemas.edits import EditAction, EditKind
from app.services.corpus_service import corpus_service

ROT_X_RECORD = {
    "project": "orientation",
    "commit_before": "a1",
    "commit_after": "a2",
    "m_old": "public double getRotX() {\n    return mOrientation.getRotationX();\n}",
    "m_new": "public double getRotX() {\n    return Math.toDegrees(mOrientation.getRotationX());\n}",
    "c_old": "@return double the roll euler angle.",
    "c_new": "@return double the roll euler angle in degrees.",
}

# (old, new, expected condensed actions) on single-letter tokens
LETTER_PAIRS = [
    ("AB", "AC", [EditAction(kind=EditKind.REPLACE, old_span=["B"], new_span=["C"])]),
    ("ABCB", "ADCB", [EditAction(kind=EditKind.REPLACE_KEEP_BEFORE, old_span=["A", "B"], new_span=["A", "D"])]),
    ("ABCAB", "ADCAB", [EditAction(kind=EditKind.REPLACE_KEEP_AFTER, old_span=["B", "C"], new_span=["D", "C"])]),
    ("AB", "ABC", [EditAction(kind=EditKind.INSERT_KEEP_BEFORE, old_span=["B"], new_span=["B", "C"])]),
    ("AB", "CAB", [EditAction(kind=EditKind.INSERT_KEEP_AFTER, old_span=["A"], new_span=["C", "A"])]),
    ("AB", "A", [EditAction(kind=EditKind.DELETE, old_span=["B"])]),
    ("ABCB", "ACB", [EditAction(kind=EditKind.DELETE_KEEP_BEFORE, old_span=["A", "B"], new_span=["A"])]),
    ("ABCAB", "ACAB", [EditAction(kind=EditKind.DELETE_KEEP_AFTER, old_span=["B", "C"], new_span=["C"])]),
]


def _method(return_type: str, name: str, body: str, params: str = "") -> str:
    return f"public {return_type} {name}({params}) {{\n    {body}\n}}"


TOY_RECORDS: List[Dict[str, str]] = [
    ROT_X_RECORD,
    {
        "project": "orientation",
        "m_old": _method("int", "getCount", "return count;"),
        "m_new": _method("long", "getCount", "return count;"),
        "c_old": "@return the count",
        "c_new": "@return the count as a long",
    },
    {
        "project": "orientation",
        "m_old": _method("String", "getName", "return name;"),
        "m_new": _method("String", "getName", 'return name == null ? "" : name;'),
        "c_old": "@return the name",
        "c_new": "@return the name or an empty string",
    },
    {
        "project": "adapters",
        "m_old": _method("List<String>", "getItems", "return items;"),
        "m_new": _method("Set<String>", "getItems", "return items;"),
        "c_old": "@return list of items",
        "c_new": "@return set of items",
    },
    {
        "project": "adapters",
        "m_old": _method("Object", "getItem", "return items.get(position);", "int position"),
        "m_new": _method("Item", "getItem", "return items.get(position);", "int position"),
        "c_old": "@return item in given position",
        "c_new": "@return item at given position",
    },
    {
        "project": "adapters",
        "m_old": _method("boolean", "isEmpty", "return size == 0;"),
        "m_new": _method("boolean", "isEmpty", "return items.isEmpty();"),
        "c_old": "@return true if size is zero",
        "c_new": "@return true if there are no items",
    },
    {
        "project": "layout",
        "m_old": _method("int", "getWidth", "return width;"),
        "m_new": _method("float", "getWidth", "return width;"),
        "c_old": "@return the width in pixels",
        "c_new": "@return the width in dp",
    },
    {
        "project": "layout",
        "m_old": _method("Node", "getParent", "return parent;"),
        "m_new": _method("Node", "getParent", "return parent == null ? root : parent;"),
        "c_old": "@return the parent node",
        "c_new": "@return the parent node or the root",
    },
    {
        "project": "layout",
        "m_old": _method("double", "getScale", "return scale;"),
        "m_new": _method("double", "getScale", "return scale * density;"),
        "c_old": "@return the scale",
        "c_new": "@return the scale times density",
    },
    {
        "project": "widgets",
        "m_old": _method("String", "getTitle", "return title;"),
        "m_new": _method("CharSequence", "getTitle", "return title;"),
        "c_old": "@return the title string",
        "c_new": "@return the title char sequence",
    },
]


@pytest.fixture
def rot_x_record() -> ChangeRecord:
    return ChangeRecord.model_validate(ROT_X_RECORD)


@pytest.fixture
def rot_x_example(rot_x_record):
    return corpus_service.build_example(rot_x_record)


@pytest.fixture
def letter_pairs():
    return [(list(old), list(new), expected) for old, new, expected in LETTER_PAIRS]


@pytest.fixture
def toy_records() -> List[Dict[str, str]]:
    return [dict(r) for r in TOY_RECORDS]


@pytest.fixture
def toy_examples(toy_records):
    return corpus_service.ingest(toy_records)


@pytest.fixture
def records_file(tmp_path, toy_records):
    from app.utils.helpers import write_jsonl

    path = tmp_path / "records.jsonl"
    write_jsonl(path, toy_records)
    return path

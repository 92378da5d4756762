import pytest

from app.core.exceptions import EmptyComment, NoSignature, UnbalancedDelimiters
from app.core.tokenizer import (
    extract_if_statements,
    extract_method_name,
    extract_return_statements,
    extract_return_type,
    lex_method,
    subtokenize,
    tokenize_comment,
)
from app.schemas.tokens import TokenKind
from tests.conftest import ROT_X_RECORD


class TestSubtokenize:
    def test_camel_case(self):
        assert subtokenize("camelCase") == [("camel", 0), ("case", 1)]

    def test_unsplittable(self):
        assert subtokenize("x") == [("x", None)]

    def test_snake_case(self):
        assert subtokenize("snake_case_id") == [("snake", 0), ("case", 1), ("id", 2)]

    def test_digits_split(self):
        assert subtokenize("utf8") == [("utf", 0), ("8", 1)]

    def test_acronym_then_word(self):
        assert [p for p, _ in subtokenize("parseHTMLString")] == ["parse", "html", "string"]

    def test_idempotent_on_lowercase_subtoken(self):
        for piece, _ in subtokenize("getRotationX"):
            assert subtokenize(piece) == [(piece, None)]


class TestLexMethod:
    def test_return_statement(self):
        seq = lex_method("return get(i);")
        assert seq.texts() == ["return", "get", "(", "i", ")", ";"]
        assert seq.tokens[0].kind == TokenKind.KEYWORD
        assert seq.tokens[1].kind == TokenKind.IDENTIFIER

    def test_subtoken_metadata(self):
        seq = lex_method("Math.toDegrees(x)")
        assert seq.texts() == ["math", ".", "to", "degrees", "(", "x", ")"]
        to, degrees = seq.tokens[2], seq.tokens[3]
        assert (to.parent_index, to.parent_text) == (0, "toDegrees")
        assert (degrees.parent_index, degrees.parent_text) == (1, "toDegrees")
        assert seq.tokens[0].parent_index is None

    def test_signature(self):
        assert lex_method("public double getRotX()").texts() == ["public", "double", "get", "rot", "x", "(", ")"]

    def test_literals_and_comments(self):
        seq = lex_method('String s = "a b"; // trailing\n/* block */ char c = \'x\';')
        texts = seq.texts()
        assert '"a_b"' in texts
        assert "'x'" in texts
        assert "trailing" not in texts and "block" not in texts

    def test_unbalanced(self):
        with pytest.raises(UnbalancedDelimiters):
            lex_method("int f() { return (1;")
        with pytest.raises(UnbalancedDelimiters):
            lex_method("int f() }")

    def test_relex_fixpoint(self):
        first = lex_method(ROT_X_RECORD["m_new"]).texts()
        second = lex_method(" ".join(first)).texts()
        assert lex_method(" ".join(second)).texts() == second

    def test_siblings_rejoin_parent(self):
        seq = lex_method("int my_var_name = getRotationX();")
        groups = {}
        for token in seq.tokens:
            if token.parent_text is not None:
                groups.setdefault(token.parent_text, []).append(token.text)
        for parent, pieces in groups.items():
            assert "".join(pieces) == parent.replace("_", "").lower()


class TestTokenizeComment:
    def test_rot_x_comment(self):
        assert tokenize_comment("@return double the roll euler angle.").texts() == [
            "double", "the", "roll", "euler", "angle", ".",
        ]

    def test_html_and_subtokens(self):
        assert tokenize_comment("@return <code>maxValue</code>").texts() == ["max", "value"]

    def test_plain(self):
        assert tokenize_comment("@return item in given position").texts() == ["item", "in", "given", "position"]

    def test_javadoc_decoration_and_inline_tags(self):
        text = "/**\n * @return the {@code rowCount} of {@link Table}\n */"
        assert tokenize_comment(text).texts() == ["the", "row", "count", "of", "table"]

    def test_empty(self):
        with pytest.raises(EmptyComment):
            tokenize_comment("@return <p></p>")


class TestSignatureQueries:
    def test_return_type(self):
        assert extract_return_type(lex_method(ROT_X_RECORD["m_old"])) == ["double"]
        assert extract_return_type(lex_method("List<String> f() { return null; }")) == ["list", "string"]
        assert extract_return_type(lex_method("public int[] values() { return v; }")) == ["int"]

    def test_constructor_has_no_return_type(self):
        with pytest.raises(NoSignature):
            extract_return_type(lex_method("public Foo() { }"))

    def test_method_name(self):
        assert extract_method_name(lex_method(ROT_X_RECORD["m_old"])) == "getrotx"
        with pytest.raises(NoSignature):
            extract_method_name(lex_method("x = 1;"))

    def test_return_statements(self):
        spans = extract_return_statements(lex_method(ROT_X_RECORD["m_old"]))
        assert [s.texts() for s in spans] == [["m", "orientation", ".", "get", "rotation", "x", "(", ")"]]
        assert extract_return_statements(lex_method("void f() { x(); }")) == []

        two = lex_method("int f(int a) { if (a > 0) { return a; } return -a; }")
        assert [s.texts() for s in extract_return_statements(two)] == [["a"], ["-", "a"]]

    def test_if_statements(self):
        method = lex_method("Foo f() { if (x == null) { return null; } return x; }")
        spans = extract_if_statements(method)
        assert len(spans) == 1
        assert spans[0].texts() == ["x", "==", "null", "return", "null", ";"]

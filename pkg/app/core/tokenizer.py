"""Lexing and subtokenization of Java-like methods and of @return comments.

Identifiers are split on camelCase / snake_case / letter-digit boundaries and
lowercased; every piece of a split identifier remembers its position and the
original compound so shared features can be computed later.
"""
import html
import logging
from typing import Iterator, List, Optional, Tuple

import regex as re

from app.core.exceptions import EmptyComment, NoSignature, UnbalancedDelimiters
from app.schemas.tokens import SequenceSource, Token, TokenKind, TokenSeq

logger = logging.getLogger(__name__)

JAVA_KEYWORDS = frozenset({
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
    "class", "const", "continue", "default", "do", "double", "else", "enum",
    "extends", "final", "finally", "float", "for", "goto", "if", "implements",
    "import", "instanceof", "int", "interface", "long", "native", "new",
    "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "void", "volatile", "while", "var", "record", "yield",
})

JAVA_LITERAL_WORDS = frozenset({"true", "false", "null"})

MODIFIERS = frozenset({
    "public", "private", "protected", "static", "final", "abstract",
    "synchronized", "native", "strictfp", "default", "transient", "volatile",
})

PRIMITIVE_TYPES = frozenset({
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void", "var",
})

OPERATORS = frozenset({
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||",
    "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "?", ":",
    "&", "|", "^",
})

PUNCTUATION = frozenset({"(", ")", "{", "}", "[", "]", ";", ",", ".", "@"})

_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {v: k for k, v in _OPENERS.items()}

_METHOD_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<text_block>\"\"\".*?\"\"\")
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<char>'(?:\\.|[^'\\\n])+')
  | (?P<number>0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|(?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?)
  | (?P<ident>[\p{L}_$][\p{L}\p{N}_$]*)
  | (?P<op>>>>=|<<=|>>=|>>>|\.\.\.|->|::|\+\+|--|&&|\|\||==|!=|<=|>=|\+=|-=|\*=|/=|%=|&=|\|=|\^=|<<|>>|[+\-*/%=<>!~?:&|^])
  | (?P<punct>[(){}\[\];,.@])
  | (?P<other>\S)
    """,
    re.VERBOSE | re.DOTALL,
)

_SUBTOKEN_RE = re.compile(r"\p{Lu}+(?=\p{Lu}\p{Ll})|\p{Lu}?\p{Ll}+|\p{Lu}+|\p{N}+|[^\p{L}\p{N}_]+")

_INLINE_TAG_RE = re.compile(r"\{@(?:code|link|linkplain|literal|value)\s*([^}]*)\}")
_HTML_TAG_RE = re.compile(r"<[^>]*>")
_RETURN_TAG_RE = re.compile(r"^\s*@return\b", re.IGNORECASE)
_COMMENT_TOKEN_RE = re.compile(r"[\p{L}\p{N}_$]+|[^\s\p{L}\p{N}_$]")


def subtokenize(token_text: str) -> List[Tuple[str, Optional[int]]]:
    """Split on case transitions, digits and underscores.

    Returns (subtoken, index) pairs; a token that does not split yields a single
    pair whose index is None.
    """
    pieces = [p.lower() for p in _SUBTOKEN_RE.findall(token_text)]
    if not pieces:
        return [(token_text.lower(), None)]
    if len(pieces) == 1:
        return [(pieces[0], None)]
    return [(piece, index) for index, piece in enumerate(pieces)]


def _split_identifier(text: str, kind: TokenKind) -> List[Token]:
    parts = subtokenize(text)
    if len(parts) == 1:
        return [Token(text=parts[0][0], kind=kind)]
    return [Token(text=piece, kind=kind, parent_index=index, parent_text=text) for piece, index in parts]


def _normalize_literal(text: str) -> str:
    return re.sub(r"\s+", "_", text)


def lex_method(source_text: str) -> TokenSeq:
    """Tokenize a method (signature plus body); comments are dropped"""
    tokens: List[Token] = []
    stack: List[str] = []

    for match in _METHOD_TOKEN_RE.finditer(source_text):
        group = match.lastgroup
        text = match.group()
        if group in ("ws", "comment"):
            continue

        if group in ("text_block", "string", "char", "number"):
            tokens.append(Token(text=_normalize_literal(text), kind=TokenKind.LITERAL))
        elif group == "ident":
            if text in JAVA_KEYWORDS:
                tokens.append(Token(text=text, kind=TokenKind.KEYWORD))
            elif text in JAVA_LITERAL_WORDS:
                tokens.append(Token(text=text, kind=TokenKind.LITERAL))
            else:
                tokens.extend(_split_identifier(text, TokenKind.IDENTIFIER))
        elif group == "op":
            tokens.append(Token(text=text, kind=TokenKind.OPERATOR))
        elif group == "punct":
            if text in _OPENERS:
                stack.append(text)
            elif text in _CLOSERS:
                if not stack or stack[-1] != _CLOSERS[text]:
                    raise UnbalancedDelimiters(
                        f"Unexpected '{text}' at offset {match.start()}"
                    )
                stack.pop()
            tokens.append(Token(text=text, kind=TokenKind.PUNCTUATION))
        else:
            tokens.append(Token(text=text, kind=TokenKind.OPERATOR))

    if stack:
        raise UnbalancedDelimiters(f"Unclosed '{stack[-1]}' at end of method")

    return TokenSeq(tokens=tokens, source=SequenceSource.METHOD)


def clean_comment_text(comment_text: str) -> str:
    """Strip Javadoc decoration, inline tags, HTML and the leading @return"""
    lines = []
    for line in comment_text.splitlines():
        line = line.strip()
        line = re.sub(r"^/\*\*+", "", line)
        line = re.sub(r"\*+/$", "", line)
        line = re.sub(r"^\*+", "", line)
        lines.append(line.strip())
    text = " ".join(lines)
    text = _INLINE_TAG_RE.sub(lambda m: f" {m.group(1).replace('#', ' ')} ", text)
    text = _HTML_TAG_RE.sub(" ", text)
    text = html.unescape(text)
    text = _RETURN_TAG_RE.sub("", text, count=1)
    return text.strip()


def tokenize_comment(comment_text: str) -> TokenSeq:
    text = clean_comment_text(comment_text)
    tokens: List[Token] = []
    for raw in _COMMENT_TOKEN_RE.findall(text):
        if raw[0].isalnum() or raw[0] in "_$":
            tokens.extend(_split_identifier(raw, TokenKind.WORD))
        else:
            tokens.append(Token(text=raw, kind=TokenKind.PUNCTUATION))

    if not tokens:
        raise EmptyComment(f"Nothing left of comment after cleaning: {comment_text!r}")
    return TokenSeq(tokens=tokens, source=SequenceSource.COMMENT)


def _units(tokens: List[Token]) -> Iterator[Tuple[int, int]]:
    """Yield (start, end) ranges that regroup subtokens into their original compound token"""
    i, n = 0, len(tokens)
    while i < n:
        j = i + 1
        if tokens[i].parent_index == 0:
            while (
                j < n
                and tokens[j].parent_text == tokens[i].parent_text
                and tokens[j].parent_index == tokens[j - 1].parent_index + 1
            ):
                j += 1
        yield i, j
        i = j


def _unit_text(tokens: List[Token], span: Tuple[int, int]) -> str:
    first = tokens[span[0]]
    return first.parent_text if first.parent_text is not None else first.text


def _locate_name(tokens: List[Token]) -> Tuple[List[Tuple[int, int]], int]:
    units = list(_units(tokens))
    texts = [_unit_text(tokens, u) for u in units]
    for k, text in enumerate(texts):
        if text in ("{", ";"):
            break
        if k + 1 >= len(units) or texts[k + 1] != "(":
            continue
        kind = tokens[units[k][0]].kind
        if kind != TokenKind.IDENTIFIER:
            continue
        if k > 0 and texts[k - 1] in ("@", ".", "new"):
            continue
        return units, k
    raise NoSignature("No method name followed by a parameter list")


def extract_method_name(method: TokenSeq) -> str:
    units, k = _locate_name(method.tokens)
    return _unit_text(method.tokens, units[k]).lower()


def _return_type_units(method: TokenSeq) -> List[Tuple[int, int]]:
    tokens = method.tokens
    units, name = _locate_name(tokens)
    texts = [_unit_text(tokens, u) for u in units]

    k = name - 1
    if k < 0:
        raise NoSignature("Method name has no preceding return type")

    end = k
    # array suffixes: int[] / String[][]
    while k >= 1 and texts[k] == "]" and texts[k - 1] == "[":
        k -= 2
    if texts[k] in (">", ">>", ">>>"):
        depth = 0
        while k >= 0:
            depth += {">": 1, ">>": 2, ">>>": 3}.get(texts[k], 0)
            depth -= 1 if texts[k] == "<" else 0
            if depth == 0:
                break
            k -= 1
        k -= 1
    if k < 0:
        raise NoSignature("Unterminated generic return type")

    head = tokens[units[k][0]]
    if head.kind == TokenKind.KEYWORD and head.text not in PRIMITIVE_TYPES:
        raise NoSignature(f"No return type before '{texts[name]}'")
    if head.kind not in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
        raise NoSignature(f"No return type before '{texts[name]}'")

    # qualified names: java.util.List
    while k >= 2 and texts[k - 1] == "." and tokens[units[k - 2][0]].kind == TokenKind.IDENTIFIER:
        k -= 2
    return units[k:end + 1]


def extract_return_type(method: TokenSeq, keep_punctuation: bool = False) -> List[str]:
    """Subtokenized return type of the signature, e.g. List<String> -> [list, string]"""
    out: List[str] = []
    for start, end in _return_type_units(method):
        for token in method.tokens[start:end]:
            if keep_punctuation or token.kind in (TokenKind.IDENTIFIER, TokenKind.KEYWORD):
                out.append(token.text)
    return out


def _statement_end(tokens: List[Token], start: int) -> int:
    """Index of the ';' closing the statement that starts at `start`"""
    depth = 0
    for i in range(start, len(tokens)):
        text = tokens[i].text
        if tokens[i].kind == TokenKind.PUNCTUATION:
            if text in _OPENERS:
                depth += 1
            elif text in _CLOSERS:
                if depth == 0:
                    return i
                depth -= 1
            elif text == ";" and depth == 0:
                return i
    return len(tokens)


def extract_return_statements(method: TokenSeq) -> List[TokenSeq]:
    tokens = method.tokens
    spans: List[TokenSeq] = []
    for i, token in enumerate(tokens):
        if token.kind == TokenKind.KEYWORD and token.text == "return":
            end = _statement_end(tokens, i + 1)
            spans.append(TokenSeq(tokens=tokens[i + 1:end], source=SequenceSource.METHOD))
    return spans


def _matching(tokens: List[Token], open_index: int) -> int:
    opener = tokens[open_index].text
    closer = _OPENERS[opener]
    depth = 0
    for i in range(open_index, len(tokens)):
        if tokens[i].kind != TokenKind.PUNCTUATION:
            continue
        if tokens[i].text == opener:
            depth += 1
        elif tokens[i].text == closer:
            depth -= 1
            if depth == 0:
                return i
    return len(tokens) - 1


def extract_if_statements(method: TokenSeq) -> List[TokenSeq]:
    """Condition tokens plus the tokens at depth 1 of each if-statement body"""
    tokens = method.tokens
    out: List[TokenSeq] = []
    for i, token in enumerate(tokens):
        if not (token.kind == TokenKind.KEYWORD and token.text == "if"):
            continue
        if i + 1 >= len(tokens) or tokens[i + 1].text != "(":
            continue
        close = _matching(tokens, i + 1)
        members = list(tokens[i + 2:close])

        body = close + 1
        if body < len(tokens) and tokens[body].text == "{":
            body_end = _matching(tokens, body)
            depth = 0
            for t in tokens[body + 1:body_end]:
                if t.kind == TokenKind.PUNCTUATION and t.text == "{":
                    depth += 1
                elif t.kind == TokenKind.PUNCTUATION and t.text == "}":
                    depth -= 1
                elif depth == 0:
                    members.append(t)
        elif body < len(tokens):
            members.extend(tokens[body:_statement_end(tokens, body)])

        out.append(TokenSeq(tokens=members, source=SequenceSource.METHOD))
    return out

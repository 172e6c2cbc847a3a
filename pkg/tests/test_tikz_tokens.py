import pytest

from sketchpipe.tikz.errors import (
    InvalidNumber,
    UnterminatedCoordinate,
    UnterminatedOptionList,
)
from sketchpipe.tikz.tokens import PT_PER_CM, TokenKind, tokenize


def kinds(source):
    return [t.kind for t in tokenize(source)]


def test_coordinate_token_carries_both_values():
    toks = tokenize("(1.5,2.5)")
    assert toks[0].kind is TokenKind.COORD
    assert toks[0].value == (1.5, 2.5)


def test_single_number_parens_is_a_length():
    toks = tokenize("(0.5)")
    assert toks[0].kind is TokenKind.LENGTH
    assert toks[0].value == 0.5


def test_pt_lengths_convert_to_cm():
    toks = tokenize("(14.17325pt)")
    assert toks[0].kind is TokenKind.LENGTH
    assert toks[0].value == pytest.approx(14.17325 / PT_PER_CM)


def test_cm_suffix_is_accepted():
    assert tokenize("(2cm,3cm)")[0].value == (2.0, 3.0)


def test_negative_and_exponent_numbers():
    assert tokenize("(-0.5,1e1)")[0].value == (-0.5, 10.0)


def test_comments_are_stripped_to_end_of_line():
    toks = tokenize("% a comment\n(1,2) % trailing\n(3,4)")
    assert [t.kind for t in toks] == [TokenKind.COORD, TokenKind.COORD]
    # positions survive the stripping
    assert toks[0].line == 2
    assert toks[1].line == 3


def test_statement_structure_tokens():
    src = "\\fill[red] (1,1) circle (0.5);"
    assert kinds(src) == [
        TokenKind.FILL,
        TokenKind.OPTIONS,
        TokenKind.COORD,
        TokenKind.CIRCLE,
        TokenKind.LENGTH,
        TokenKind.SEMICOLON,
    ]


def test_path_separators():
    src = "(0,0) -- (1,1) .. (2,2);"
    assert kinds(src) == [
        TokenKind.COORD,
        TokenKind.DASHDASH,
        TokenKind.COORD,
        TokenKind.DOTDOT,
        TokenKind.COORD,
        TokenKind.SEMICOLON,
    ]


def test_environment_markers():
    toks = tokenize("\\begin{tikzpicture}\n\\end{tikzpicture}")
    assert toks[0].kind is TokenKind.BEGIN
    assert toks[-1].kind is TokenKind.END


def test_other_environments_are_plain_commands():
    toks = tokenize("\\begin{axis}")
    assert toks[0].kind is TokenKind.COMMAND


def test_unterminated_option_list():
    with pytest.raises(UnterminatedOptionList) as err:
        tokenize("\\fill[red (1,1);")
    assert err.value.line == 1


def test_unterminated_coordinate():
    with pytest.raises(UnterminatedCoordinate):
        tokenize("(1,2")


def test_coordinate_needs_numbers():
    with pytest.raises(InvalidNumber):
        tokenize("(a,b)")


def test_overflowing_literal_rejected():
    # 1e999 overflows float; the tokenizer must flag it, not emit inf
    with pytest.raises(InvalidNumber):
        tokenize("(1e999,0)")


def test_column_offsets():
    toks = tokenize("  (1,1) ;")
    assert (toks[0].line, toks[0].column) == (1, 3)
    assert toks[1].column == 9


def test_start_position_offset_applies():
    toks = tokenize("(1,1)", start_line=7, start_column=4)
    assert (toks[0].line, toks[0].column) == (7, 4)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from subrk.lie_words import InvalidAlphabetError, Letter, LieWord, beta_map, parse_word, word_degree

su2_letters = st.sampled_from([Letter("X"), Letter("Y"), Letter("Z")])
su2_words = st.lists(su2_letters, max_size=6).map(lambda ls: LieWord("su2", tuple(ls)))


def test_degree_examples():
    assert word_degree(parse_word("Z", "su2")) == 2
    assert word_degree(LieWord("su2")) == 0
    assert word_degree(parse_word("X,Y,Z", "su2")) == 4


def test_sphere_vertical_letter_counts_twice():
    assert word_degree(parse_word("T1,T0,T2", "sphere", 2)) == 4
    assert word_degree(parse_word("1,0", "sphere", 2)) == 3


def test_beta_examples():
    assert str(beta_map(parse_word("X,Y", "su2"))) == "X1,Y1"
    assert beta_map(LieWord("su2")).letters == ()
    w = parse_word("Z,X,Z", "su2")
    b = beta_map(w)
    assert str(b) == "Z,X1,Z"
    assert word_degree(w) == word_degree(b) == 5


def test_beta_rejects_other_alphabets():
    with pytest.raises(InvalidAlphabetError):
        beta_map(parse_word("T1", "sphere", 1))


@pytest.mark.parametrize(
    "text,space,d",
    [("Q", "su2", 1), ("T3", "sphere", 2), ("X1", "su2", 1), ("X3", "heisenberg", 2), ("T", "sphere", 1)],
)
def test_invalid_letters(text, space, d):
    with pytest.raises(InvalidAlphabetError):
        parse_word(text, space, d)


def test_parse_roundtrip_heisenberg():
    w = parse_word("X1,Y2,Z,Z1,Zb2", "heisenberg", 2)
    assert parse_word(str(w), "heisenberg", 2) == w


@given(su2_words)
def test_beta_preserves_degree_and_length(w):
    b = beta_map(w)
    assert word_degree(b) == word_degree(w)
    assert len(b.letters) == len(w.letters)


@given(su2_words, su2_words)
def test_degree_additive(a, b):
    ab = LieWord("su2", a.letters + b.letters)
    assert word_degree(ab) == word_degree(a) + word_degree(b)


@given(su2_words)
def test_su2_parse_roundtrip(w):
    assert parse_word(str(w), "su2") == w

"""Words over the su(2), CR-sphere and Heisenberg alphabets.

A word stands for the left-invariant operator obtained by composing the
vector fields of its letters from left to right.  Horizontal letters carry
weight 1 and the vertical (Reeb) letter carries weight 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "InvalidAlphabetError",
    "Letter",
    "LieWord",
    "word_degree",
    "beta_map",
    "parse_word",
]


class InvalidAlphabetError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Letter:
    """One generator.

    ``kind`` is one of ``X``, ``Y``, ``Z`` (su2 and real Heisenberg),
    ``T`` (sphere, index 0..d), ``W`` / ``Wbar`` (complex Heisenberg
    fields Z_j and their conjugates).  ``index`` is 0 for su2 letters and
    for the Heisenberg vertical letter.
    """

    kind: str
    index: int = 0

    @property
    def vertical(self) -> bool:
        if self.kind == "Z":
            return True
        return self.kind == "T" and self.index == 0

    @property
    def name(self) -> str:
        if self.kind in ("X", "Y", "Z") and self.index == 0:
            return self.kind if self.kind != "Z" else "Z"
        if self.kind == "Wbar":
            return f"Zb{self.index}"
        if self.kind == "W":
            return f"Z{self.index}"
        return f"{self.kind}{self.index}"


_SPACES = ("su2", "sphere", "heisenberg")


def _valid(space: str, d: int, letter: Letter) -> bool:
    if space == "su2":
        return letter.kind in ("X", "Y", "Z") and letter.index == 0
    if space == "sphere":
        return letter.kind == "T" and 0 <= letter.index <= d
    if letter.kind == "Z":
        return letter.index == 0
    if letter.kind in ("X", "Y", "W", "Wbar"):
        return 1 <= letter.index <= d
    return False


@dataclass(frozen=True)
class LieWord:
    space: str
    letters: tuple[Letter, ...] = ()
    d: int = 1

    def __post_init__(self):
        if self.space not in _SPACES:
            raise InvalidAlphabetError(f"unknown alphabet {self.space!r}")
        if self.space == "su2" and self.d != 1:
            raise InvalidAlphabetError("su2 words carry no dimension parameter")
        if self.d < 1:
            raise InvalidAlphabetError("d must be >= 1")
        object.__setattr__(self, "letters", tuple(self.letters))
        for letter in self.letters:
            if not _valid(self.space, self.d, letter):
                raise InvalidAlphabetError(
                    f"letter {letter.name} is not in the {self.space}(d={self.d}) alphabet"
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "LieWord") -> "LieWord":
        if (self.space, self.d) != (other.space, other.d):
            raise InvalidAlphabetError("cannot concatenate words over different alphabets")
        return LieWord(self.space, self.letters + other.letters, self.d)

    def __str__(self) -> str:
        return ",".join(letter.name for letter in self.letters)

    @property
    def degree(self) -> int:
        return word_degree(self)


def word_degree(w: LieWord) -> int:
    """Horizontal letters count once, the vertical letter twice."""
    return sum(2 if letter.vertical else 1 for letter in w.letters)


_BETA = {"X": Letter("X", 1), "Y": Letter("Y", 1), "Z": Letter("Z", 0)}


def beta_map(w: LieWord) -> LieWord:
    """Send X, Y, Z to the Heisenberg generators X_1, Y_1, Z_0."""
    if w.space != "su2":
        raise InvalidAlphabetError(f"beta is defined on su2 words, not {w.space}")
    return LieWord("heisenberg", tuple(_BETA[x.kind] for x in w.letters), 1)


def _parse_letter(space: str, token: str) -> Letter:
    tok = token.strip()
    if space == "su2":
        if tok in ("X", "Y", "Z"):
            return Letter(tok)
    elif space == "sphere":
        if tok[:1] == "T" and tok[1:].isdigit():
            return Letter("T", int(tok[1:]))
        if tok.isdigit():
            return Letter("T", int(tok))
    else:
        if tok in ("X", "Y"):
            return Letter(tok, 1)
        if tok == "Z" or tok == "Z0":
            return Letter("Z", 0)
        if tok[:2] == "Zb" and tok[2:].isdigit():
            return Letter("Wbar", int(tok[2:]))
        if tok[:1] in ("X", "Y", "Z") and tok[1:].isdigit():
            kind = "W" if tok[0] == "Z" else tok[0]
            return Letter(kind, int(tok[1:]))
    raise InvalidAlphabetError(f"cannot parse letter {token!r} for {space}")


def parse_word(text: str | Iterable[str], space: str, d: int = 1) -> LieWord:
    """Parse the comma syntax used on the command line, e.g. ``"X,Y,Z"``."""
    if isinstance(text, str):
        tokens = [t for t in text.split(",") if t.strip()]
    else:
        tokens = list(text)
    letters = tuple(_parse_letter(space, t) for t in tokens)
    return LieWord(space, letters, d)

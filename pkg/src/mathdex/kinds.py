"""Statement kind vocabulary shared by the locator and the structurer."""

from __future__ import annotations

from enum import Enum


class StatementKind(str, Enum):
    DEFINITION = "definition"
    THEOREM = "theorem"
    LEMMA = "lemma"
    PROPOSITION = "proposition"
    COROLLARY = "corollary"
    REMARK = "remark"
    NOTATION = "notation"
    ASSUMPTION = "assumption"
    OTHER = "other"


# Header words seen in OCR markdown, mapped to kinds. Words without a kind of
# their own (Claim, Conjecture, ...) fold into OTHER.
HEADER_WORDS: dict[str, StatementKind] = {
    "Definition": StatementKind.DEFINITION,
    "Theorem": StatementKind.THEOREM,
    "Lemma": StatementKind.LEMMA,
    "Proposition": StatementKind.PROPOSITION,
    "Corollary": StatementKind.COROLLARY,
    "Remark": StatementKind.REMARK,
    "Notation": StatementKind.NOTATION,
    "Assumption": StatementKind.ASSUMPTION,
    "Claim": StatementKind.OTHER,
    "Conjecture": StatementKind.OTHER,
    "Fact": StatementKind.OTHER,
    "Example": StatementKind.OTHER,
}


def coerce_kind(value: object) -> StatementKind:
    """Map arbitrary model output to the closed kind enum (unknown -> OTHER)."""
    if isinstance(value, StatementKind):
        return value
    if isinstance(value, str):
        name = value.strip().lower()
        for kind in StatementKind:
            if kind.value == name:
                return kind
        word = value.strip().capitalize()
        if word in HEADER_WORDS:
            return HEADER_WORDS[word]
    return StatementKind.OTHER

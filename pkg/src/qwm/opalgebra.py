"""Operator-word algebra for elastic wave mixing on a driven two-level system.

A pulse at carrier ω₋ acts on the qubit as ``cos(θ₋/2) (1 + a - a†)`` and a
pulse at ω₊ as ``cos(θ₊/2) (1 + b - b†)``, where ``a ~ tan(θ₋/2) σ⁻``,
``a† ~ tan(θ₋/2) σ⁺`` and likewise ``b``/``b†`` with ``tan(θ₊/2)``.  Each
letter also carries a phase ``e^{±iδω t}`` and the total phase of a term in
``⟨g| Λ† σ⁻ Λ |g⟩`` fixes the sideband ``p`` it radiates into.

Words are stored as tuples of :class:`Letter`, leftmost letter acting last.
Coefficients stay exact integers; floats only appear in
:func:`evaluate_component`.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Letter",
    "OperatorSum",
    "RotationAngles",
    "ComponentTable",
    "TermPair",
    "EmptySequence",
    "InvalidComponent",
    "IDENTITY",
    "parse_sum",
    "single_pulse_operator",
    "multiply",
    "evolution_operator",
    "ground_state_prune",
    "dagger",
    "arrow_reduce",
    "reduced_operators",
    "word_phase",
    "matrix_element_terms",
    "evaluate_component",
    "component_table",
    "net_field",
    "alternating_pattern",
]


class EmptySequence(ValueError):
    """Raised when a pulse pattern contains no pulses."""


class InvalidComponent(ValueError):
    """Raised for an even side-peak index."""


class Letter(enum.Enum):
    A = "a"
    ADAG = "a+"
    B = "b"
    BDAG = "b+"

    @property
    def lowering(self) -> bool:
        return self in (Letter.A, Letter.B)

    @property
    def carrier(self) -> str:
        return "-" if self in (Letter.A, Letter.ADAG) else "+"

    @property
    def phase(self) -> int:
        return _PHASE[self]

    def dagger(self) -> "Letter":
        return _DAGGER[self]

    def __repr__(self) -> str:
        return self.value


_PHASE = {Letter.A: 1, Letter.ADAG: -1, Letter.B: -1, Letter.BDAG: 1}
_DAGGER = {
    Letter.A: Letter.ADAG,
    Letter.ADAG: Letter.A,
    Letter.B: Letter.BDAG,
    Letter.BDAG: Letter.B,
}
_ORDER = {Letter.A: 0, Letter.ADAG: 1, Letter.B: 2, Letter.BDAG: 3}

Word = tuple  # tuple[Letter, ...]


def _word_key(word: Word) -> tuple:
    return (len(word), tuple(_ORDER[x] for x in word))


def _is_alternating(word: Word) -> bool:
    return all(x.lowering != y.lowering for x, y in zip(word, word[1:]))


def word_str(word: Word) -> str:
    """Compact notation: ``a``, ``A`` (a†), ``b``, ``B`` (b†); ``1`` for identity."""
    if not word:
        return "1"
    table = {Letter.A: "a", Letter.ADAG: "A", Letter.B: "b", Letter.BDAG: "B"}
    return "".join(table[x] for x in word)


_FROM_CHAR = {"a": Letter.A, "A": Letter.ADAG, "b": Letter.B, "B": Letter.BDAG}


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "1"):
        return ()
    return tuple(_FROM_CHAR[c] for c in text)


@dataclass(frozen=True)
class OperatorSum:
    """Integer linear combination of operator words in canonical form.

    Construct through :meth:`from_terms`, which merges duplicate words and
    drops zero coefficients and words that vanish on a two-level system.
    """

    terms: tuple = ()  # tuple[tuple[Word, int], ...] sorted by word

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Word, int]] | Mapping[Word, int]) -> "OperatorSum":
        if isinstance(terms, Mapping):
            terms = terms.items()
        acc: dict[Word, int] = defaultdict(int)
        for word, coeff in terms:
            word = tuple(word)
            if not _is_alternating(word):
                continue
            acc[word] += int(coeff)
        items = [(w, c) for w, c in acc.items() if c != 0]
        items.sort(key=lambda wc: _word_key(wc[0]))
        return cls(tuple(items))

    def canonical(self) -> "OperatorSum":
        return OperatorSum.from_terms(self.terms)

    def as_dict(self) -> dict[Word, int]:
        return dict(self.terms)

    def words(self) -> list[Word]:
        return [w for w, _ in self.terms]

    def __iter__(self) -> Iterator[tuple[Word, int]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __mul__(self, other: "OperatorSum") -> "OperatorSum":
        return multiply(self, other)

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        return OperatorSum.from_terms(list(self.terms) + list(other.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for i, (word, coeff) in enumerate(self.terms):
            sign = "-" if coeff < 0 else "+"
            mag = abs(coeff)
            body = word_str(word)
            if mag != 1:
                body = f"{mag}{body}" if word else str(mag)
            if i == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f"{sign} {body}")
        return " ".join(out)


IDENTITY = OperatorSum.from_terms([((), 1)])


def parse_sum(text: str) -> OperatorSum:
    """Parse compact notation such as ``"1 - A - bA - 2B + AbA"``.

    Letters: ``a``, ``A`` = a†, ``b``, ``B`` = b†.  An optional integer
    multiplier may precede each word.
    """
    tokens = text.replace("-", " - ").replace("+", " + ").split()
    terms = []
    sign = 1
    for tok in tokens:
        if tok in "+-":
            sign = -1 if tok == "-" else 1
            continue
        digits = "".join(itertools.takewhile(str.isdigit, tok))
        rest = tok[len(digits):]
        if digits and not rest:
            coeff, word = int(digits), ()
        else:
            coeff, word = int(digits or 1), parse_word(rest)
        terms.append((word, sign * coeff))
        sign = 1
    return OperatorSum.from_terms(terms)


def single_pulse_operator(carrier_sign: str) -> OperatorSum:
    """Word skeleton of one pulse with the ``cos(θ/2)`` factor pulled out."""
    if carrier_sign == "-":
        low, high = Letter.A, Letter.ADAG
    elif carrier_sign == "+":
        low, high = Letter.B, Letter.BDAG
    else:
        raise ValueError(f"carrier sign must be '-' or '+', got {carrier_sign!r}")
    return OperatorSum.from_terms([((), 1), ((low,), 1), ((high,), -1)])


def multiply(left: OperatorSum, right: OperatorSum) -> OperatorSum:
    terms = [
        (wl + wr, cl * cr)
        for (wl, cl), (wr, cr) in itertools.product(left.terms, right.terms)
    ]
    return OperatorSum.from_terms(terms)


def evolution_operator(pattern: Sequence[str]) -> OperatorSum:
    """Full product ``U_N ... U_1``; the first pulse stands rightmost."""
    if len(pattern) == 0:
        raise EmptySequence("pulse pattern is empty")
    total = IDENTITY
    for sign in pattern:
        total = multiply(single_pulse_operator(sign), total)
    return total


def ground_state_prune(op: OperatorSum) -> OperatorSum:
    """Drop words whose rightmost letter annihilates the ground state."""
    return OperatorSum.from_terms((w, c) for w, c in op if not (w and w[-1].lowering))


def dagger(op: OperatorSum) -> OperatorSum:
    return OperatorSum.from_terms(
        (tuple(x.dagger() for x in reversed(w)), c) for w, c in op
    )


def arrow_reduce(lambda0: OperatorSum) -> tuple[OperatorSum, OperatorSum]:
    """Split a pruned evolution operator into its (left, right) reduced forms.

    Right form: words that survive ``σ⁻ · w |g⟩``, i.e. non-empty words whose
    leftmost letter raises (``σ⁻|g⟩ = 0`` removes the identity).
    Left form: the adjoint with words whose rightmost letter lowers removed,
    since ``a σ⁻ = b σ⁻ = 0``.
    """
    right = OperatorSum.from_terms((w, c) for w, c in lambda0 if w and not w[0].lowering)
    left = OperatorSum.from_terms(
        (w, c) for w, c in dagger(lambda0) if not (w and w[-1].lowering)
    )
    return left, right


def reduced_operators(pattern: Sequence[str]) -> dict[str, OperatorSum]:
    """``full``, ``pruned``, ``left`` and ``right`` operators for a pattern."""
    full = evolution_operator(pattern)
    pruned = ground_state_prune(full)
    left, right = arrow_reduce(pruned)
    return {"full": full, "pruned": pruned, "left": left, "right": right}


def word_phase(word: Iterable[Letter]) -> int:
    return sum(x.phase for x in word)


def _ground_expectation(word: Word) -> int:
    """⟨g| qubit image of ``word`` |g⟩: 1 for ``σ⁻σ⁺...σ⁻σ⁺``, else 0."""
    if not word or len(word) % 2:
        return 0
    if not word[0].lowering or not _is_alternating(word):
        return 0
    return 1


@dataclass(frozen=True)
class TermPair:
    """One surviving product ``coefficient · left σ⁻ right``."""

    coefficient: int
    left: Word
    right: Word

    @property
    def phase(self) -> int:
        return word_phase(self.left) + word_phase(self.right)

    def letter_counts(self) -> dict[str, int]:
        counts = {"-": 0, "+": 0}
        for x in self.left + self.right:
            counts[x.carrier] += 1
        return counts

    def __str__(self) -> str:
        left = word_str(self.left) if self.left else ""
        right = word_str(self.right) if self.right else ""
        sign = "-" if self.coefficient < 0 else "+"
        mag = abs(self.coefficient)
        return f"{sign}{mag if mag != 1 else ''}{left}s{right}"


def matrix_element_terms(pattern: Sequence[str]) -> dict[int, list[TermPair]]:
    """Non-vanishing ``left σ⁻ right`` products grouped by side-peak index."""
    ops = reduced_operators(pattern)
    grouped: dict[int, list[TermPair]] = defaultdict(list)
    for (wl, cl), (wr, cr) in itertools.product(ops["left"].terms, ops["right"].terms):
        if not _ground_expectation(wl + (Letter.A,) + wr):
            continue
        pair = TermPair(cl * cr, wl, wr)
        grouped[pair.phase].append(pair)
    return dict(sorted(grouped.items()))


@dataclass(frozen=True)
class RotationAngles:
    theta_minus: float
    theta_plus: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_minus) and math.isfinite(self.theta_plus)):
            raise ValueError("rotation angles must be finite")


@dataclass(frozen=True)
class ComponentTable:
    """Side-peak amplitudes keyed by odd index ``p``; missing keys are zero."""

    entries: dict = field(default_factory=dict)
    pulse_count: int = 0
    carrier_counts: tuple = (0, 0)

    def __getitem__(self, p: int):
        return self.entries.get(p, 0.0)

    def __len__(self) -> int:
        return len(self.entries)

    def keys(self):
        return sorted(self.entries)


def _carrier_counts(pattern: Sequence[str]) -> tuple[int, int]:
    return sum(1 for s in pattern if s == "-"), sum(1 for s in pattern if s == "+")


def _check_component(pattern: Sequence[str], p: int) -> None:
    if len(pattern) == 0:
        raise EmptySequence("pulse pattern is empty")
    if p % 2 == 0:
        raise InvalidComponent(f"side-peak index must be odd, got {p}")


_TERM_CACHE: dict[tuple, dict[int, list[TermPair]]] = {}


def _cached_terms(pattern: Sequence[str]) -> dict[int, list[TermPair]]:
    key = tuple(pattern)
    if key not in _TERM_CACHE:
        _TERM_CACHE[key] = matrix_element_terms(key)
    return _TERM_CACHE[key]


def _half_angle_powers(theta: float, letters: int, pulses: int) -> float:
    # sin^n cos^(2N-n) is tan^n cos^(2N) without the pole at θ = π
    return math.sin(theta / 2) ** letters * math.cos(theta / 2) ** (2 * pulses - letters)


def evaluate_component(pattern: Sequence[str], p: int, angles: RotationAngles) -> float:
    """Elastic amplitude at side peak ``p`` (global prefactor set to 1).

    Returns exactly 0.0 for odd ``p`` without contributing terms; raises
    :class:`InvalidComponent` for even ``p``.
    """
    _check_component(pattern, p)
    n_minus, n_plus = _carrier_counts(pattern)
    total = 0.0
    for pair in _cached_terms(pattern).get(p, ()):
        counts = pair.letter_counts()
        total += (
            pair.coefficient
            * _half_angle_powers(angles.theta_minus, counts["-"], n_minus)
            * _half_angle_powers(angles.theta_plus, counts["+"], n_plus)
        )
    return total


def component_table(pattern: Sequence[str], angles: RotationAngles) -> ComponentTable:
    n = len(pattern)
    entries = {}
    for p in range(-(2 * n - 1), 2 * n, 2):
        value = evaluate_component(pattern, p, angles)
        if value != 0.0:
            entries[p] = value
    return ComponentTable(entries, n, _carrier_counts(pattern))


def net_field(pattern: Sequence[str], angles: RotationAngles) -> float:
    """Sum over all side peaks: the field for a monochromatic (δω → 0) drive."""
    return sum(component_table(pattern, angles).entries.values())


def alternating_pattern(n: int, first: str = "-") -> tuple[str, ...]:
    other = "+" if first == "-" else "-"
    return tuple(first if i % 2 == 0 else other for i in range(n))

"""Exact word algebra for free, free-abelian and closed-surface groups.

Words are tuples of signed letters over a declared alphabet.  Everything
here is pure and total: reduction, cyclic reduction, proper-power
detection, homomorphism application, abelianization, ball enumeration,
and Dehn's algorithm for closed hyperbolic surface groups.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

__all__ = [
    "AlphabetError",
    "WordError",
    "Alphabet",
    "Word",
    "GroupHom",
    "SurfacePresentation",
    "EMPTY",
    "letter",
    "concat",
    "invert",
    "power",
    "reduce_word",
    "cyclic_reduce",
    "is_proper_power",
    "abelianize",
    "enumerate_ball",
    "ball_size",
    "parse_word",
    "format_word",
    "commutator",
    "dehn_reduce",
]


class AlphabetError(ValueError):
    """A word used a symbol that is not declared in its alphabet."""


class WordError(ValueError):
    """A word-level precondition failed (e.g. trivial input where nontrivial required)."""


NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")

# A letter is (symbol, sign) with sign in {+1, -1}; a word is a tuple of letters.
Letter = tuple[str, int]
Word = tuple[Letter, ...]

EMPTY: Word = ()


@dataclass(frozen=True)
class Alphabet:
    """Ordered list of distinct generator names."""

    generators: tuple[str, ...]

    def __post_init__(self):
        seen = set()
        for name in self.generators:
            if not NAME_RE.fullmatch(name):
                raise AlphabetError(f"bad generator name: {name!r}")
            if name in seen:
                raise AlphabetError(f"duplicate generator name: {name!r}")
            seen.add(name)

    def __contains__(self, name: str) -> bool:
        return name in self.generators

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)

    def index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise AlphabetError(f"undeclared symbol: {name!r}") from None

    def union(self, other: "Alphabet") -> "Alphabet":
        extra = tuple(g for g in other.generators if g not in self.generators)
        return Alphabet(self.generators + extra)

    def check(self, w: Word) -> Word:
        for sym, _ in w:
            if sym not in self:
                raise AlphabetError(f"undeclared symbol: {sym!r}")
        return w


def alphabet(*names: str) -> Alphabet:
    return Alphabet(tuple(names))


def letter(sym: str, sign: int = 1) -> Word:
    if sign not in (1, -1):
        raise WordError(f"letter sign must be +-1, got {sign}")
    return ((sym, sign),)


def concat(*ws: Word) -> Word:
    out: list[Letter] = []
    for w in ws:
        out.extend(w)
    return tuple(out)


def invert(w: Word) -> Word:
    return tuple((sym, -sign) for sym, sign in reversed(w))


def power(w: Word, n: int) -> Word:
    if n < 0:
        return invert(w) * (-n)
    return w * n


def reduce_word(w: Word, alph: Optional[Alphabet] = None) -> Word:
    """Free reduction: cancel adjacent inverse pairs; unique normal form."""
    if alph is not None:
        alph.check(w)
    out: list[Letter] = []
    for sym, sign in w:
        if out and out[-1][0] == sym and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((sym, sign))
    return tuple(out)


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return (core, conjugator) with w = conjugator * core * conjugator^-1."""
    w = reduce_word(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i][0] == w[j - 1][0] and w[i][1] == -w[j - 1][1]:
        i += 1
        j -= 1
    return w[i:j], w[:i]


def _divisors(n: int) -> Iterator[int]:
    for d in range(1, n + 1):
        if n % d == 0:
            yield d


def is_proper_power(w: Word) -> Optional[tuple[Word, int]]:
    """Maximal-exponent decomposition of the cyclically reduced core, or None.

    Detection is by period checking on the cyclic word, O(n^2); plenty at
    the scale this library is used at.
    """
    core, _ = cyclic_reduce(w)
    n = len(core)
    if n == 0:
        raise WordError("proper-power test requires a nontrivial word")
    for p in _divisors(n):
        if p == n:
            break
        if core == core[:p] * (n // p):
            return core[:p], n // p
    return None


def abelianize(w: Word, alph: Alphabet) -> tuple[int, ...]:
    """Exponent-sum vector indexed by the alphabet's generators."""
    counts = {g: 0 for g in alph.generators}
    for sym, sign in w:
        if sym not in counts:
            raise AlphabetError(f"undeclared symbol: {sym!r}")
        counts[sym] += sign
    return tuple(counts[g] for g in alph.generators)


def enumerate_ball(alph: Alphabet, radius: int) -> list[Word]:
    """All reduced words of length <= radius in shortlex order.

    Letter order is (g, +1) before (g, -1), generators in declared order.
    """
    if radius < 0:
        raise WordError("radius must be >= 0")
    letters: list[Letter] = []
    for g in alph.generators:
        letters.append((g, 1))
        letters.append((g, -1))
    out: list[Word] = [EMPTY]
    layer: list[Word] = [EMPTY]
    for _ in range(radius):
        nxt: list[Word] = []
        for w in layer:
            for lt in letters:
                if w and w[-1][0] == lt[0] and w[-1][1] == -lt[1]:
                    continue
                nxt.append(w + (lt,))
        out.extend(nxt)
        layer = nxt
    return out


def ball_size(rank: int, radius: int) -> int:
    """Closed-form count of reduced words of length <= radius in rank n."""
    n = rank
    return 1 + sum(2 * n * (2 * n - 1) ** (i - 1) for i in range(1, radius + 1)) if n else 1


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism between free-ish generating sets, given on generators."""

    source: Alphabet
    target: Alphabet
    images: dict[str, Word] = field(compare=False)

    def __post_init__(self):
        for g in self.source.generators:
            if g not in self.images:
                raise WordError(f"homomorphism not total: missing image of {g!r}")
        for g, w in self.images.items():
            self.target.check(w)

    @staticmethod
    def identity(alph: Alphabet) -> "GroupHom":
        return GroupHom(alph, alph, {g: letter(g) for g in alph.generators})

    def apply(self, w: Word) -> Word:
        out: list[Letter] = []
        for sym, sign in w:
            if sym not in self.source:
                raise AlphabetError(f"undeclared symbol: {sym!r}")
            img = self.images[sym] if sign == 1 else invert(self.images[sym])
            out.extend(img)
        return reduce_word(tuple(out))

    def then(self, other: "GroupHom") -> "GroupHom":
        """Composition: first self, then other."""
        return GroupHom(
            self.source,
            other.target,
            {g: other.apply(self.images[g]) for g in self.source.generators},
        )


def commutator(u: Word, v: Word) -> Word:
    return concat(u, v, invert(u), invert(v))


# ---------------------------------------------------------------------------
# Word grammar.  Whitespace-separated atoms `g`, `g^-1`, `g^k`, plus
# commutator sugar `[u,v]` (nestable, may carry an exponent).
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise WordError(f"word syntax error at position {self.pos}: {msg}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_int(self) -> int:
        m = re.match(r"-?\d+", self.text[self.pos:])
        if not m:
            self.error("expected integer exponent")
        self.pos += m.end()
        return int(m.group())

    def parse_atom(self) -> Word:
        c = self.peek()
        if c == "[":
            self.pos += 1
            u = self.parse_seq(stop=",]")
            if self.peek() != ",":
                self.error("expected ',' in commutator")
            self.pos += 1
            v = self.parse_seq(stop="]")
            if self.peek() != "]":
                self.error("expected ']' closing commutator")
            self.pos += 1
            base = commutator(u, v)
        else:
            m = NAME_RE.match(self.text, self.pos)
            if not m:
                self.error("expected generator name or '['")
            self.pos = m.end()
            base = letter(m.group())
        if self.peek() == "^":
            self.pos += 1
            exp = self.parse_int()
            return power(base, exp)
        return base

    def parse_seq(self, stop: str = "") -> Word:
        parts: list[Word] = []
        while True:
            self.skip_ws()
            c = self.peek()
            if not c or c in stop:
                break
            parts.append(self.parse_atom())
        return concat(*parts)


def parse_word(text: str, alph: Optional[Alphabet] = None) -> Word:
    """Parse the word grammar; returns the literal (unreduced) letter sequence."""
    p = _Parser(text)
    w = p.parse_seq()
    p.skip_ws()
    if p.pos != len(text):
        p.error(f"unexpected character {text[p.pos]!r}")
    if alph is not None:
        alph.check(w)
    return w


def format_word(w: Word) -> str:
    """Inverse of parse_word up to run-collapsing; empty word prints as ''."""
    parts: list[str] = []
    i = 0
    while i < len(w):
        sym, sign = w[i]
        j = i
        while j < len(w) and w[j] == (sym, sign):
            j += 1
        exp = sign * (j - i)
        parts.append(sym if exp == 1 else f"{sym}^{exp}")
        i = j
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Closed hyperbolic surfaces and Dehn's algorithm.
# ---------------------------------------------------------------------------


def _standard_surface_generators(genus: int, punctures: int) -> tuple[str, ...]:
    gens = []
    for i in range(1, genus + 1):
        gens.append(f"a{i}")
        gens.append(f"b{i}")
    for i in range(1, punctures):
        gens.append(f"d{i}")
    return tuple(gens)


@dataclass(frozen=True)
class SurfacePresentation:
    """Standard presentation of an orientable surface group.

    Closed case (punctures == 0): genus >= 2, one relator
    [a1,b1]...[ag,bg]; the constructor verifies the metric small
    cancellation condition (pieces shorter than |relator|/6) that Dehn's
    algorithm needs.  Boundary case: genus >= 1 and punctures >= 1; the
    group is free and the boundary circles are explicit words.
    """

    genus: int
    punctures: int = 0
    generators: tuple[str, ...] = ()

    def __post_init__(self):
        if self.punctures == 0:
            if self.genus < 2:
                raise WordError("closed surface must have genus >= 2")
        else:
            if self.genus < 1:
                raise WordError("boundary case requires genus >= 1")
        if not self.generators:
            object.__setattr__(
                self, "generators", _standard_surface_generators(self.genus, self.punctures)
            )
        expected = 2 * self.genus + max(self.punctures - 1, 0)
        if len(self.generators) != expected:
            raise WordError(
                f"surface of genus {self.genus} with {self.punctures} punctures "
                f"needs {expected} generators, got {len(self.generators)}"
            )
        if self.punctures == 0 and self.max_piece_length() * 6 >= len(self.relator()):
            raise WordError("relator fails the small-cancellation condition C'(1/6)")

    @property
    def closed(self) -> bool:
        return self.punctures == 0

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.punctures

    def alphabet(self) -> Alphabet:
        return Alphabet(self.generators)

    def _handle_pairs(self) -> list[tuple[str, str]]:
        return [(self.generators[2 * i], self.generators[2 * i + 1]) for i in range(self.genus)]

    def relator(self) -> Word:
        if not self.closed:
            raise WordError("surface with boundary has no relator")
        parts = [commutator(letter(a), letter(b)) for a, b in self._handle_pairs()]
        return concat(*parts)

    def boundary_words(self) -> list[Word]:
        """Boundary circles: d_1 .. d_{p-1} and the product circle."""
        if self.closed:
            raise WordError("closed surface has no boundary")
        ds = [letter(g) for g in self.generators[2 * self.genus:]]
        handles = concat(*[commutator(letter(a), letter(b)) for a, b in self._handle_pairs()])
        last = reduce_word(concat(handles, *ds))
        return ds + [last]

    def _symmetrized(self) -> list[Word]:
        r = self.relator()
        out = []
        for base in (r, invert(r)):
            for i in range(len(base)):
                out.append(base[i:] + base[:i])
        return out

    def max_piece_length(self) -> int:
        """Longest common prefix over distinct elements of the symmetrized set."""
        sym = self._symmetrized()
        best = 0
        for u, v in itertools.combinations(sym, 2):
            if u == v:
                continue
            k = 0
            while k < len(u) and u[k] == v[k]:
                k += 1
            best = max(best, k)
        return best


def dehn_reduce(surface: SurfacePresentation, w: Word) -> Word:
    """Dehn's algorithm for the closed-surface word problem.

    Greedy leftmost longest match: any subword that is strictly more than
    half of a cyclic permutation of the relator (or its inverse) is
    replaced by the shorter complement, then freely reduced; repeat.
    Returns the empty word iff w represents the identity.
    """
    if not surface.closed:
        raise WordError("dehn_reduce needs a closed surface; use free reduction instead")
    alph = surface.alphabet()
    sym = surface._symmetrized()
    rlen = len(sym[0])
    half = rlen // 2
    w = reduce_word(w, alph)
    while True:
        replaced = False
        n = len(w)
        for i in range(n):
            # leftmost position; find the longest relator prefix match here
            best = None
            for rel in sym:
                k = 0
                while k < rlen and i + k < n and w[i + k] == rel[k]:
                    k += 1
                if k > half and (best is None or k > best[0]):
                    best = (k, rel)
            if best is not None:
                k, rel = best
                w = reduce_word(w[:i] + invert(rel[k:]) + w[i + k:])
                replaced = True
                break
        if not replaced:
            return w

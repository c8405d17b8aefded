"""Reduced words in the free group F_g.

A letter is a nonzero int: ``i`` stands for the i-th generator and ``-i`` for
its inverse (1-based).  A word is a tuple of letters and a basis is a tuple of
words.  The text form writes ``a3`` for letter 3 and ``A3`` for letter -3.
"""

from __future__ import annotations

import re
from collections import deque
from typing import Iterable, Iterator, Sequence

import numpy as np

Word = tuple
Basis = tuple

_TOKEN = re.compile(r"([aA])(\d+)")


def letters(g: int) -> list[int]:
    """The 2g letters in canonical order 1, -1, 2, -2, ..."""
    out = []
    for i in range(1, g + 1):
        out += [i, -i]
    return out


def check_letter(letter: int, g: int) -> None:
    if letter == 0 or abs(letter) > g:
        raise ValueError(f"letter {letter} out of range for rank {g}")


def reduce(seq: Iterable[int]) -> Word:
    """Free reduction (cancel adjacent x x^-1 pairs)."""
    out: list[int] = []
    for x in seq:
        if x == 0:
            raise ValueError("0 is not a letter")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def multiply(*ws: Sequence[int]) -> Word:
    out: list[int] = []
    for w in ws:
        out.extend(w)
    return reduce(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def word_to_str(w: Sequence[int]) -> str:
    if not w:
        return "1"
    return "".join(("a" if x > 0 else "A") + str(abs(x)) for x in w)


def word_from_str(s: str) -> Word:
    s = s.strip()
    if s in ("", "1"):
        return ()
    pos, out = 0, []
    for m in _TOKEN.finditer(s):
        if m.start() != pos:
            break
        n = int(m.group(2))
        if n == 0:
            raise ValueError(f"bad letter index in {s!r}")
        out.append(n if m.group(1) == "a" else -n)
        pos = m.end()
    if pos != len(s):
        raise ValueError(f"cannot parse word {s!r}")
    return reduce(out)


def basis_to_str(basis: Sequence[Sequence[int]]) -> list[str]:
    return [word_to_str(w) for w in basis]


def standard_basis(g: int) -> Basis:
    return tuple((i,) for i in range(1, g + 1))


def word_count(g: int, n: int) -> int:
    if n == 0:
        return 1
    return 2 * g * (2 * g - 1) ** (n - 1)


def enumerate_words(g: int, n: int) -> Iterator[Word]:
    """All reduced words of length exactly n, grouped by initial letter."""
    if g < 1 or n < 0:
        raise ValueError("need g >= 1 and n >= 0")
    if n == 0:
        yield ()
        return
    alphabet = letters(g)

    def extend(prefix: list[int]):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for x in alphabet:
            if x != -prefix[-1]:
                prefix.append(x)
                yield from extend(prefix)
                prefix.pop()

    for first in alphabet:
        yield from extend([first])


def word_array(g: int, n: int) -> np.ndarray:
    """Reduced words of length n as an (count, n) int array, same order as enumerate_words."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int16)
    alphabet = np.array(letters(g), dtype=np.int16)
    words = alphabet.reshape(-1, 1)
    for _ in range(n - 1):
        last = words[:, -1]
        keep = alphabet[None, :] != -last[:, None]
        rows = np.repeat(np.arange(len(words)), 2 * g)[keep.ravel()]
        nxt = np.tile(alphabet, len(words))[keep.ravel()]
        words = np.column_stack([words[rows], nxt])
    return words


# --- bases -------------------------------------------------------------------


def shift_basis(basis: Sequence[Sequence[int]], alpha_index: int) -> Basis:
    """{alpha} together with {gamma alpha : gamma != alpha}; alpha_index is 1-based."""
    g = len(basis)
    if not 1 <= alpha_index <= g:
        raise ValueError(f"alpha_index must lie in [1, {g}]")
    alpha = tuple(basis[alpha_index - 1])
    return tuple(alpha if i == alpha_index - 1 else multiply(w, alpha) for i, w in enumerate(basis))


def nielsen_moves(basis: Sequence[Sequence[int]]) -> list[Basis]:
    """All bases one elementary Nielsen move away (possibly with repeats)."""
    basis = [tuple(w) for w in basis]
    g = len(basis)
    out: list[Basis] = []
    for l in range(g):
        inv = list(basis)
        inv[l] = inverse(basis[l])
        out.append(tuple(inv))
        for m in range(g):
            if m == l:
                continue
            for wm in (basis[m], inverse(basis[m])):
                right = list(basis)
                right[l] = multiply(basis[l], wm)
                out.append(tuple(right))
                left = list(basis)
                left[l] = multiply(wm, basis[l])
                out.append(tuple(left))
            if m > l:
                sw = list(basis)
                sw[l], sw[m] = sw[m], sw[l]
                out.append(tuple(sw))
    return out


def enumerate_bases(g: int, depth: int) -> list[Basis]:
    """Bases reachable from the standard one by at most ``depth`` Nielsen moves.

    Breadth-first, so the list is ordered by move distance and is deterministic.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    start = standard_basis(g)
    seen = {start: 0}
    order = [start]
    queue = deque([start])
    while queue:
        b = queue.popleft()
        if seen[b] == depth:
            continue
        for nb in nielsen_moves(b):
            if nb not in seen:
                seen[nb] = seen[b] + 1
                order.append(nb)
                queue.append(nb)
    return order


def abelianization(basis: Sequence[Sequence[int]], g: int) -> np.ndarray:
    """Integer matrix whose row i is the exponent-sum vector of word i."""
    mat = np.zeros((len(basis), g), dtype=np.int64)
    for i, w in enumerate(basis):
        for x in w:
            mat[i, abs(x) - 1] += 1 if x > 0 else -1
    return mat


# --- double cosets -----------------------------------------------------------


def double_coset_reps(g: int, n: int, m: int, maxlen: int) -> list[Word]:
    """Representatives of <g_n> \\ F_g / <g_m> up to length maxlen.

    A reduced word represents its double coset when it neither starts with
    g_n^{+-1} nor ends with g_m^{+-1}.  The identity is included only for n != m.
    """
    if not (1 <= n <= g and 1 <= m <= g):
        raise ValueError("coset indices out of range")
    out: list[Word] = [] if n == m else [()]
    for length in range(1, maxlen + 1):
        for w in enumerate_words(g, length):
            if abs(w[0]) != n and abs(w[-1]) != m:
                out.append(w)
    return out


def canonical_double_coset(w: Sequence[int], n: int, m: int) -> Word:
    """Strip leading powers of g_n and trailing powers of g_m from a reduced word."""
    w = list(reduce(w))
    while w and abs(w[0]) == n:
        w.pop(0)
    while w and abs(w[-1]) == m:
        w.pop()
    return tuple(w)

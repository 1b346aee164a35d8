"""Brute-force consistency oracle for pairs with words of length ≤ 2.

With forbidden words of length ≤ 2 over at most two letters, a word g lies
in L(⟨Σ|B⟩) iff some ultimately periodic point p^∞ u g v q^∞ avoids B with
|p|, |q|, |u|, |v| ≤ 2: the letter graph has at most two vertices, so simple
cycles and connecting paths are that short.  Writing p and q out three times
exposes every length-2 window of the periodic tails, so each candidate is
checked on a finite window.
"""

import functools
import itertools

from shiftlab.patterns import Var


def _words(alpha, max_len):
    yield ()
    for n in range(1, max_len + 1):
        yield from itertools.product(alpha, repeat=n)


def _avoids(cells, bad):
    for b in bad:
        L = len(b)
        for i in range(len(cells) - L + 1):
            if tuple(cells[i:i + L]) == b:
                return False
    return True


@functools.lru_cache(maxsize=None)
def in_language(g, bad, alpha):
    """``bad`` is a frozenset of tuples, ``alpha`` a tuple."""
    if not _avoids(g, bad):
        return False
    for p in _words(alpha, 2):
        if not p:
            continue
        for q in _words(alpha, 2):
            if not q:
                continue
            for u in _words(alpha, 2):
                for v in _words(alpha, 2):
                    if _avoids(p * 3 + u + g + v + q * 3, bad):
                        return True
    return False


def consistent(G, B, alpha):
    """∃σ: X → Σ with every σ(g) in L(⟨Σ | σ(B)⟩).  Words are tuples of str or Var."""
    vars_ = sorted({c for w in itertools.chain(G, B) for c in w if isinstance(c, Var)})
    alpha = list(alpha)
    for image in itertools.product(alpha, repeat=len(vars_)):
        s = dict(zip(vars_, image))
        sub = lambda w: tuple(s.get(c, c) if isinstance(c, Var) else c for c in w)
        Gs = [sub(g) for g in G]
        Bs = frozenset(sub(b) for b in B if all(not isinstance(c, str) or c in alpha for c in b))
        if any(c not in alpha for g in Gs for c in g):
            continue
        if all(in_language(g, Bs, tuple(alpha)) for g in Gs):
            return True
    return False

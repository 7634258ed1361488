"""Action of permutative endomorphisms on the diagonal, on cylinder sets.

A cylinder map records, for each word mu up to a window length, the set of
longer words whose cylinders sum to the image of the projection of [mu].
Everything is exact: images come from chain products of the permutation, and
the eventual-shift-commutation test compares finite set tables inside the
certified window.  Tables are kept as sorted integer arrays, one row per word.
"""

from __future__ import annotations

import numpy as np

from .words import EndoHandle, Perm, unrank, word_str


class CylinderMap:
    """Per-length image tables of the endomorphism restricted to the diagonal.

    tables[l] is an (n^l, n^(k-1)) array; row mu holds the sorted level-
    (l+k-1) ranks covering the image of the level-l cylinder of mu.
    """

    __slots__ = ("n", "k", "window", "tables")

    def __init__(self, n: int, k: int, window: int, tables):
        self.n = n
        self.k = k
        self.window = window
        self.tables = tables

    def image(self, length: int, mu_rank: int):
        if not 1 <= length <= self.window:
            raise ValueError("length outside the computed window")
        return tuple(int(w) for w in self.tables[length][mu_rank])

    def partition_ok(self) -> bool:
        """The images of all length-l words must partition level l+k-1."""
        for length in range(1, self.window + 1):
            flat = np.sort(self.tables[length].reshape(-1))
            if not np.array_equal(flat, np.arange(self.n ** (length + self.k - 1))):
                return False
        return True

    def refinement_ok(self) -> bool:
        """Images refine: the image of mu is the union of the truncations of
        the images of its one-letter extensions."""
        for length in range(1, self.window):
            fine = self.tables[length + 1].reshape(self.n ** length, -1) // self.n
            for mu in range(self.n ** length):
                if set(fine[mu].tolist()) != set(self.tables[length][mu].tolist()):
                    return False
        return True

    def to_json(self) -> dict:
        out = {}
        for length in range(1, self.window + 1):
            level = length + self.k - 1
            out[str(length)] = {
                word_str(unrank(mu, self.n, length)): [
                    word_str(unrank(int(w), self.n, level)) for w in row
                ]
                for mu, row in enumerate(self.tables[length])
            }
        return {"n": self.n, "k": self.k, "window": self.window, "tables": out}


def restrict_to_diag(p: Perm, window: int) -> CylinderMap:
    """Cylinder tables of the endomorphism of p, up to the window length."""
    if window < 1:
        raise ValueError("need window >= 1")
    handle = EndoHandle(p)
    M = p.n ** (p.k - 1)
    tables = {}
    for length in range(1, window + 1):
        img = handle.chain_image(length)
        tables[length] = np.sort(img.reshape(p.n ** length, M), axis=1)
    return CylinderMap(p.n, p.k, window, tables)


def ad_perm(p: Perm) -> Perm:
    """The level-(k+1) permutation whose endomorphism is conjugation by p."""
    return p.embed(p.k + 1) * p.inverse().shift()


def eventually_commutes(c: CylinderMap, m_max: int):
    """Smallest m <= m_max making the map, damped by m shifts, commute with
    the shift on the certified window; None when none certifies.

    The composite maps are compared on every cylinder of every length l with
    l <= window - m - 1.
    """
    if m_max + 2 > c.window:
        raise ValueError("window too small for the requested m_max")
    n = c.n
    for m in range(m_max + 1):
        good = True
        for length in range(1, c.window - m):
            words = n ** length
            level = length + m + c.k - 1  # level of the undamped image words
            # map after m+1 fresh letters: group rows of the longer table
            lhs = np.sort(
                c.tables[length + m + 1].reshape(n ** (m + 1), words, -1)
                .transpose(1, 0, 2)
                .reshape(words, -1),
                axis=1,
            )
            # a fresh letter prepended to the image after m fresh letters
            base = (
                c.tables[length + m].reshape(n ** m, words, -1)
                .transpose(1, 0, 2)
                .reshape(words, -1)
            )
            rhs = np.sort(
                (np.arange(n)[None, :, None] * n ** level + base[:, None, :])
                .reshape(words, -1),
                axis=1,
            )
            if not np.array_equal(lhs, rhs):
                good = False
                break
        if good:
            return m
    return None


def ad_shift_identity(p: Perm, window: int) -> bool:
    """Conjugation fixes every k-fold shifted diagonal projection.

    Verified on the cylinder basis of the level-(window-k) diagonal, with all
    projections expressed at the window level.
    """
    if window < p.k + 2:
        raise ValueError("window too small; need window >= k + 2")
    n, k = p.n, p.k
    t = n ** (window - k)
    img = np.asarray(p.image)
    mus = np.arange(t)
    moved = np.sort(img[:, None] * t + mus[None, :], axis=0)
    orig = np.arange(n ** k)[:, None] * t + mus[None, :]
    return bool(np.array_equal(moved, orig))

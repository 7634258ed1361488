"""Exact combinatorics of multi-index words and permutations of word levels.

Words over the alphabet {1..n} are plain tuples of ints.  A word of level k
is identified with its rank: the base-n integer whose FIRST letter is most
significant.  With this encoding prefix cylinders are contiguous rank ranges
and the canonical shift acts by fixed strides, so everything downstream can
work on flat integer arrays.
"""

from __future__ import annotations

import itertools

import numpy as _np


def rank(word, n: int) -> int:
    """Rank of a word, first letter most significant."""
    r = 0
    for a in word:
        if not 1 <= a <= n:
            raise ValueError(f"letter {a} outside 1..{n}")
        r = r * n + (a - 1)
    return r


def unrank(r: int, n: int, k: int):
    """Word of level k with the given rank."""
    if not 0 <= r < n ** k:
        raise ValueError(f"rank {r} out of range for n={n}, k={k}")
    letters = []
    for _ in range(k):
        r, a = divmod(r, n)
        letters.append(a + 1)
    return tuple(reversed(letters))


def all_words(n: int, k: int):
    """All level-k words in rank order."""
    return (unrank(r, n, k) for r in range(n ** k))


def word_str(word) -> str:
    """Digit-string form, e.g. (1,2,1) -> "121".  Dash-separated past n=9."""
    if any(a > 9 for a in word):
        return "-".join(str(a) for a in word)
    return "".join(str(a) for a in word)


def parse_word(text: str, n: int):
    if "-" in text:
        word = tuple(int(t) for t in text.split("-"))
    else:
        word = tuple(int(c) for c in text)
    rank(word, n)  # validates letters
    return word


class Perm:
    """A permutation of the level-k words, i.e. a permutation unitary.

    Stored as a dense image array over ranks: image[r] is the rank of the
    image of the word of rank r.  Instances are immutable; the level is part
    of the value and cross-level operations require an explicit embed.
    """

    __slots__ = ("n", "k", "image")

    def __init__(self, n: int, k: int, image, validate: bool = True):
        image = tuple(image)
        if validate:
            if n < 2 or k < 0:
                raise ValueError("need n >= 2 and k >= 0")
            if len(image) != n ** k:
                raise ValueError(f"image has length {len(image)}, want {n ** k}")
            if sorted(image) != list(range(n ** k)):
                raise ValueError("image is not a bijection on ranks")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "image", image)

    def __setattr__(self, name, value):
        raise AttributeError("Perm is immutable")

    @classmethod
    def identity(cls, n: int, k: int) -> "Perm":
        return cls(n, k, range(n ** k), validate=False)

    @classmethod
    def from_one_line(cls, text: str) -> "Perm":
        """Parse the text format `n k : i0 i1 ... i(n^k-1)`."""
        head, _, body = text.partition(":")
        try:
            n, k = (int(t) for t in head.split())
            image = [int(t) for t in body.split()]
        except ValueError as exc:
            raise ValueError(f"malformed permutation text: {text!r}") from exc
        return cls(n, k, image)

    def to_one_line(self) -> str:
        return f"{self.n} {self.k} : " + " ".join(str(i) for i in self.image)

    def __call__(self, r: int) -> int:
        return self.image[r]

    def apply_word(self, word):
        return unrank(self.image[rank(word, self.n)], self.n, self.k)

    def __eq__(self, other):
        return (
            isinstance(other, Perm)
            and self.n == other.n
            and self.k == other.k
            and self.image == other.image
        )

    def __hash__(self):
        return hash((self.n, self.k, self.image))

    def __repr__(self):
        return f"Perm({self.to_one_line()!r})"

    def is_identity(self) -> bool:
        return all(v == r for r, v in enumerate(self.image))

    def inverse(self) -> "Perm":
        inv = [0] * len(self.image)
        for r, v in enumerate(self.image):
            inv[v] = r
        return Perm(self.n, self.k, inv, validate=False)

    def __mul__(self, other: "Perm") -> "Perm":
        """Product matching matrix multiplication: (p*q)(x) = p(q(x))."""
        if not isinstance(other, Perm):
            return NotImplemented
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("level mismatch; embed first")
        img = self.image
        return Perm(self.n, self.k, (img[v] for v in other.image), validate=False)

    def embed(self, m: int) -> "Perm":
        """The same unitary viewed at level m >= k: (mu,nu) -> (p(mu),nu)."""
        if m < self.k:
            raise ValueError(f"cannot embed level {self.k} into level {m}")
        if m == self.k:
            return self
        t = self.n ** (m - self.k)
        img = self.image
        new = [0] * (self.n ** m)
        for r, v in enumerate(img):
            base = v * t
            off = r * t
            for s in range(t):
                new[off + s] = base + s
        return Perm(self.n, m, new, validate=False)

    def shift(self) -> "Perm":
        """Image under the canonical shift: (i,mu) -> (i,p(mu)), level k+1."""
        K = self.n ** self.k
        img = self.image
        new = [0] * (self.n * K)
        for i in range(self.n):
            off = i * K
            for r in range(K):
                new[off + r] = off + img[r]
        return Perm(self.n, self.k + 1, new, validate=False)


def embed_perm(p: Perm, m: int) -> Perm:
    return p.embed(m)


def shift_perm(p: Perm) -> Perm:
    return p.shift()


def chain_product(p: Perm, r: int) -> Perm:
    """The permutation of u phi(u) ... phi^(r-1)(u), at level k+r-1.

    Leftmost factor outermost: the result applies phi^(r-1)(u) first, as in
    the matrix product.
    """
    if r < 1:
        raise ValueError("need r >= 1")
    n, k = p.n, p.k
    L = k + r - 1
    K = n ** k
    img = p.image
    cur = list(range(n ** L))
    # factor j acts on letter positions j+1..j+k, i.e. on the middle block
    # of size n^k with a tail of n^(r-1-j) fixed letters
    for j in range(r - 1, -1, -1):
        t = n ** (r - 1 - j)
        kt = K * t
        for w in range(len(cur)):
            x = cur[w]
            head, rest = divmod(x, kt)
            mid, tail = divmod(rest, t)
            cur[w] = head * kt + img[mid] * t + tail
    return Perm(n, L, cur, validate=False)


def convolve(p: Perm, q: Perm) -> Perm:
    """Permutation of lambda_p(q) * p, the unitary composing the endomorphisms.

    Satisfies lambda_convolve(p,q) = lambda_p o lambda_q; result at level
    k+h-1 for inputs at levels k and h.
    """
    if p.n != q.n:
        raise ValueError("alphabet mismatch")
    if p.k < 1 or q.k < 1:
        raise ValueError("levels must be >= 1")
    L = p.k + q.k - 1
    uh = chain_product(p, q.k)  # level L
    uh_inv = uh.inverse()
    qe = q.embed(L)
    pe = p.embed(L)
    return uh * qe * uh_inv * pe


class EndoHandle:
    """A permutation together with a cache of its chain products.

    Wraps the endomorphism given by the permutation unitary; chain(r) is the
    unitary implementing its action on level-r words.  Chains are built
    incrementally as integer arrays, one shift-append per length.
    """

    __slots__ = ("n", "k", "perm", "_images", "_chains")

    def __init__(self, perm: Perm):
        self.n = perm.n
        self.k = perm.k
        self.perm = perm
        self._images = [_np.asarray(perm.image, dtype=_np.int64)]
        self._chains = {1: perm}

    def chain_image(self, r: int) -> "_np.ndarray":
        """Image array of the length-r chain product, at level k+r-1."""
        if r < 1:
            raise ValueError("need r >= 1")
        n, K = self.n, self.n ** self.k
        img = self._images[0]
        while len(self._images) < r:
            # u_{r+1} = embed(u_r) . phi^r(u): append a letter, act on the tail
            prev = self._images[-1]
            w = _np.arange(len(prev) * n, dtype=_np.int64)
            w2 = (w // K) * K + img[w % K]
            self._images.append(prev[w2 // n] * n + w2 % n)
        return self._images[r - 1]

    def chain(self, r: int) -> Perm:
        got = self._chains.get(r)
        if got is None:
            got = Perm(self.n, self.k + r - 1, self.chain_image(r).tolist(),
                       validate=False)
            self._chains[r] = got
        return got

    def image_set(self, mu_rank: int, length: int):
        """Ranks of the words whose cylinders sum to the image of P_mu."""
        c = self.chain_image(length)
        m = self.n ** (self.k - 1)
        base = mu_rank * m
        return sorted(int(c[base + t]) for t in range(m))


def all_perms(n: int, k: int):
    """All permutations of the level-k words, lexicographic in one-line form."""
    K = n ** k
    for image in itertools.permutations(range(K)):
        yield Perm(n, k, image, validate=False)

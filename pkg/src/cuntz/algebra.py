"""Finite matrix levels, formal word sums and the endomorphism calculus.

A level-k matrix element is an n^k x n^k matrix indexed by word ranks; the
generated algebra embeds into the next level by tensoring an identity on the
trailing letters, and the canonical shift tensors the identity on the leading
letter.  Word sums are formal linear combinations of S_mu S_nu^* terms with
words of arbitrary (possibly different) lengths; algebraic equality is decided
by flattening each gauge grade to a common top level.

Permutation input is kept on an exact integer path throughout.
"""

from __future__ import annotations

import numpy as np

from .words import Perm, chain_product, rank, unrank, word_str, parse_word

DEFAULT_TOL = 1e-9
_DROP = 1e-14


class MatrixElement:
    """An element of the level-k matrix algebra, with explicit level."""

    __slots__ = ("n", "k", "data")

    def __init__(self, n: int, k: int, data):
        data = np.asarray(data)
        if data.shape != (n ** k, n ** k):
            raise ValueError(f"shape {data.shape} does not match n={n}, k={k}")
        self.n = n
        self.k = k
        self.data = data

    @classmethod
    def identity(cls, n: int, k: int) -> "MatrixElement":
        return cls(n, k, np.eye(n ** k, dtype=np.int64))

    def adjoint(self) -> "MatrixElement":
        return MatrixElement(self.n, self.k, self.data.conj().T)

    def __mul__(self, other):
        if isinstance(other, MatrixElement):
            if (self.n, self.k) != (other.n, other.k):
                raise ValueError("level mismatch; embed first")
            return MatrixElement(self.n, self.k, self.data @ other.data)
        return MatrixElement(self.n, self.k, self.data * other)

    def __add__(self, other: "MatrixElement") -> "MatrixElement":
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("level mismatch; embed first")
        return MatrixElement(self.n, self.k, self.data + other.data)

    def __sub__(self, other: "MatrixElement") -> "MatrixElement":
        return self + (other * (-1))

    def embed(self, m: int) -> "MatrixElement":
        """The same algebra element viewed at level m >= k."""
        if m < self.k:
            raise ValueError("cannot embed into a lower level")
        if m == self.k:
            return self
        eye = np.eye(self.n ** (m - self.k), dtype=self.data.dtype)
        return MatrixElement(self.n, m, np.kron(self.data, eye))

    def is_unitary(self, tol: float = DEFAULT_TOL) -> bool:
        prod = self.data @ self.data.conj().T
        return bool(np.abs(prod - np.eye(prod.shape[0])).max() <= tol)

    def approx_equal(self, other: "MatrixElement", tol: float = DEFAULT_TOL) -> bool:
        if (self.n, self.k) != (other.n, other.k):
            return False
        return bool(np.abs(self.data - other.data).max() <= tol)

    def __repr__(self):
        return f"MatrixElement(n={self.n}, k={self.k})"

    def to_json(self) -> dict:
        d = np.asarray(self.data, dtype=complex)
        return {
            "n": self.n,
            "k": self.k,
            "re": d.real.tolist(),
            "im": d.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MatrixElement":
        data = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        return cls(int(obj["n"]), int(obj["k"]), data)


def perm_to_matrix(p: Perm) -> MatrixElement:
    """The 0/1 unitary of a permutation, entry 1 at (image rank, rank)."""
    K = p.n ** p.k
    m = np.zeros((K, K), dtype=np.int64)
    for r, v in enumerate(p.image):
        m[v, r] = 1
    return MatrixElement(p.n, p.k, m)


def canonical_shift(x: MatrixElement) -> MatrixElement:
    """The canonical shift: a fresh leading letter, level k+1."""
    return MatrixElement(x.n, x.k + 1, np.kron(np.eye(x.n, dtype=x.data.dtype), x.data))


def left_inverse(x: MatrixElement) -> MatrixElement:
    """The standard left inverse of the shift: average of the leading blocks."""
    if x.k < 1:
        raise ValueError("need level k >= 1")
    n = x.n
    d = n ** (x.k - 1)
    blocks = x.data.reshape(n, d, n, d)
    y = np.einsum("iaib->ab", blocks) / n
    return MatrixElement(n, x.k - 1, y)


def normalized_trace(x: MatrixElement):
    """Trace divided by the matrix size; 1 on the identity."""
    return complex(np.trace(x.data)) / (x.n ** x.k)


def chain_product_matrix(u: MatrixElement, r: int) -> MatrixElement:
    """Product of the r shifted copies u phi(u) ... phi^(r-1)(u)."""
    if r < 1:
        raise ValueError("need r >= 1")
    n, k = u.n, u.k
    L = k + r - 1
    acc = None
    for j in range(r):
        f = np.kron(
            np.kron(np.eye(n ** j, dtype=u.data.dtype), u.data),
            np.eye(n ** (r - 1 - j), dtype=u.data.dtype),
        )
        acc = f if acc is None else acc @ f
    return MatrixElement(n, L, acc)


def is_in_level(x: MatrixElement, h: int, tol: float = DEFAULT_TOL):
    """Does x factor through level h, i.e. x = y (x) 1 on the trailing letters?

    Returns (True, y) with the compression, or (False, None).
    """
    if h > x.k or h < 0:
        raise ValueError("need 0 <= h <= k")
    if h == x.k:
        return True, x
    A = x.n ** h
    B = x.n ** (x.k - h)
    t = x.data.reshape(A, B, A, B)
    y = np.einsum("abcb->ac", t) / B
    resid = x.data - np.kron(y, np.eye(B))
    if np.abs(resid).max() <= tol:
        return True, MatrixElement(x.n, h, y)
    return False, None


def apply_endo_matrix(u, x: MatrixElement) -> MatrixElement:
    """Image of a level-h matrix element under the endomorphism of u."""
    un, uk, umat = _as_matrix(u)
    if un != x.n:
        raise ValueError("alphabet mismatch")
    L = uk + x.k - 1
    c = chain_product_matrix(MatrixElement(un, uk, umat), x.k).data
    return MatrixElement(un, L, c @ x.embed(L).data @ c.conj().T)


def _as_matrix(u):
    """(n, k, ndarray) for a Perm or MatrixElement."""
    if isinstance(u, Perm):
        return u.n, u.k, perm_to_matrix(u).data
    if isinstance(u, MatrixElement):
        return u.n, u.k, u.data
    raise TypeError(f"expected Perm or MatrixElement, got {type(u).__name__}")


class WordSum:
    """A formal sum of S_mu S_nu^* terms with complex coefficients.

    Terms are kept in the reduced normal form keyed by the word pair; zero
    coefficients are dropped.  Equality of the underlying algebra elements is
    decided by alg_equal, which flattens grade by grade.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        clean = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for (mu, nu), c in items:
                if abs(c) <= _DROP:
                    continue
                key = (tuple(mu), tuple(nu))
                c0 = clean.get(key)
                c = c if c0 is None else c0 + c
                if abs(c) <= _DROP:
                    clean.pop(key, None)
                else:
                    clean[key] = c
        self.terms = clean

    @classmethod
    def one(cls, n: int) -> "WordSum":
        return cls(n, {((), ()): 1})

    @classmethod
    def generator(cls, n: int, i: int) -> "WordSum":
        """The isometry S_i."""
        if not 1 <= i <= n:
            raise ValueError(f"letter {i} outside 1..{n}")
        return cls(n, {((i,), ()): 1})

    @classmethod
    def word(cls, n: int, mu, nu, coeff=1) -> "WordSum":
        rank(mu, n), rank(nu, n)  # validate letters
        return cls(n, {(tuple(mu), tuple(nu)): coeff})

    def canonical_terms(self):
        """Terms sorted by (|mu|, |nu|, rank mu, rank nu)."""
        return sorted(
            self.terms.items(),
            key=lambda item: (
                len(item[0][0]),
                len(item[0][1]),
                rank(item[0][0], self.n),
                rank(item[0][1], self.n),
            ),
        )

    def __repr__(self):
        if not self.terms:
            return "WordSum(0)"
        bits = []
        for (mu, nu), c in self.canonical_terms():
            s = f"S_{word_str(mu) or '0'}S*_{word_str(nu) or '0'}"
            bits.append(f"({c:.6g})*{s}" if c != 1 else s)
        return "WordSum(" + " + ".join(bits) + ")"

    def __add__(self, other: "WordSum") -> "WordSum":
        if self.n != other.n:
            raise ValueError("alphabet mismatch")
        merged = dict(self.terms)
        out = WordSum(self.n, merged)
        for key, c in other.terms.items():
            c0 = out.terms.get(key, 0)
            c1 = c0 + c
            if abs(c1) <= _DROP:
                out.terms.pop(key, None)
            else:
                out.terms[key] = c1
        return out

    def scale(self, c) -> "WordSum":
        return WordSum(self.n, {key: c * v for key, v in self.terms.items()})

    def __sub__(self, other: "WordSum") -> "WordSum":
        return self + other.scale(-1)

    def adjoint(self) -> "WordSum":
        return WordSum(
            self.n,
            {(nu, mu): complex(c).conjugate() for (mu, nu), c in self.terms.items()},
        )

    def __mul__(self, other: "WordSum") -> "WordSum":
        """Bilinear product with the contraction S_nu^* S_mu."""
        if self.n != other.n:
            raise ValueError("alphabet mismatch")
        acc = {}
        for (mu1, nu1), c1 in self.terms.items():
            for (mu2, nu2), c2 in other.terms.items():
                # contract nu1 against mu2
                if len(nu1) <= len(mu2):
                    if mu2[: len(nu1)] != nu1:
                        continue
                    key = (mu1 + mu2[len(nu1):], nu2)
                else:
                    if nu1[: len(mu2)] != mu2:
                        continue
                    key = (mu1, nu2 + nu1[len(mu2):])
                c = acc.get(key, 0) + c1 * c2
                acc[key] = c
        return WordSum(self.n, acc)

    def grades(self):
        return sorted({len(mu) - len(nu) for mu, nu in self.terms})

    def is_homogeneous(self) -> bool:
        return len(self.grades()) <= 1

    def grade_part(self, g: int) -> "WordSum":
        return WordSum(
            self.n,
            {key: c for key, c in self.terms.items() if len(key[0]) - len(key[1]) == g},
        )

    def flatten(self, grade: int, mu_level: int) -> np.ndarray:
        """The grade-g part as a rectangular matrix at word levels
        (mu_level, mu_level - grade)."""
        nu_level = mu_level - grade
        if nu_level < 0:
            raise ValueError("mu_level too small for this grade")
        out = np.zeros((self.n ** mu_level, self.n ** nu_level), dtype=complex)
        for (mu, nu), c in self.terms.items():
            if len(mu) - len(nu) != grade:
                continue
            ext = mu_level - len(mu)
            if ext < 0:
                raise ValueError("mu_level smaller than a term's word length")
            rm = rank(mu, self.n) * self.n ** ext
            rn = rank(nu, self.n) * self.n ** ext
            for t in range(self.n ** ext):
                out[rm + t, rn + t] += c
        return out

    @classmethod
    def from_matrix(cls, x: MatrixElement) -> "WordSum":
        terms = {}
        d = np.asarray(x.data, dtype=complex)
        K = x.n ** x.k
        for rm in range(K):
            mu = unrank(rm, x.n, x.k)
            for rn in range(K):
                c = d[rm, rn]
                if abs(c) > _DROP:
                    terms[(mu, unrank(rn, x.n, x.k))] = c
        return cls(x.n, terms)

    def to_matrix(self, level: int) -> MatrixElement:
        if self.grades() not in ([], [0]):
            raise ValueError("only grade-0 word sums are matrix elements")
        return MatrixElement(self.n, level, self.flatten(0, level))

    def to_json(self) -> list:
        out = []
        for (mu, nu), c in self.canonical_terms():
            c = complex(c)
            out.append(
                {"mu": word_str(mu), "nu": word_str(nu), "re": c.real, "im": c.imag}
            )
        return out

    @classmethod
    def from_json(cls, n: int, obj) -> "WordSum":
        terms = {}
        for t in obj:
            mu = parse_word(t["mu"], n) if t["mu"] else ()
            nu = parse_word(t["nu"], n) if t["nu"] else ()
            terms[(mu, nu)] = complex(t["re"], t.get("im", 0.0))
        return cls(n, terms)


def alg_equal(a: WordSum, b: WordSum, tol: float = DEFAULT_TOL) -> bool:
    """Equality as algebra elements: flatten every grade to a top level."""
    if a.n != b.n:
        return False
    for g in sorted(set(a.grades()) | set(b.grades())):
        top = 0
        for ws in (a, b):
            for (mu, nu) in ws.terms:
                if len(mu) - len(nu) == g:
                    top = max(top, len(mu), len(nu) + g)
        if np.abs(a.flatten(g, top) - b.flatten(g, top)).max() > tol:
            return False
    return True


def shift_wordsum(x: WordSum) -> WordSum:
    """The canonical shift on word sums: sum_i S_i x S_i^*."""
    acc = WordSum(x.n)
    for i in range(1, x.n + 1):
        g = WordSum.generator(x.n, i)
        acc = acc + g * x * g.adjoint()
    return acc


def _chain_times_isometry(u, mu) -> WordSum:
    """The word sum of u_|mu| S_mu, exact on permutation input."""
    n, k, _ = _as_matrix(u)
    m = len(mu)
    if m == 0:
        return WordSum.one(n)
    L = k + m - 1
    M = n ** (k - 1)
    base = rank(mu, n) * M
    if isinstance(u, Perm):
        c = chain_product(u, m).image
        return WordSum(
            n,
            {(unrank(c[base + t], n, L), unrank(t, n, k - 1)): 1 for t in range(M)},
        )
    c = chain_product_matrix(u, m).data
    terms = {}
    for t in range(M):
        col = c[:, base + t]
        for row in np.nonzero(np.abs(col) > _DROP)[0]:
            terms[(unrank(int(row), n, L), unrank(t, n, k - 1))] = col[row]
    return WordSum(n, terms)


def apply_endo(u, t: WordSum) -> WordSum:
    """Image of a word sum under the endomorphism of a level-k unitary.

    Each term S_al S_be^* maps to (u_|al| S_al)(u_|be| S_be)^*, extended
    linearly; the result is returned in reduced normal form.
    """
    n, _, _ = _as_matrix(u)
    if n != t.n:
        raise ValueError("alphabet mismatch")
    acc = WordSum(n)
    cache = {}
    for (al, be), c in t.terms.items():
        if al not in cache:
            cache[al] = _chain_times_isometry(u, al)
        if be not in cache:
            cache[be] = _chain_times_isometry(u, be)
        acc = acc + (cache[al] * cache[be].adjoint()).scale(c)
    return acc


PERMUTATION = "permutation"
WORD_SUM = "word-sum"
NEITHER = "neither"


def is_permutative(a: WordSum, tol: float = DEFAULT_TOL) -> str:
    """Classify a unitary word sum.

    "permutation": a sum of equal-length words (a permutation unitary);
    "word-sum": a sum of words with some unequal lengths; "neither": any
    other unitary.  Raises on non-unitary input.
    """
    one = WordSum.one(a.n)
    if not (alg_equal(a * a.adjoint(), one, tol) and alg_equal(a.adjoint() * a, one, tol)):
        raise ValueError("input is not unitary within tolerance")
    grades = a.grades()
    for g in grades:
        top = max(
            [len(mu) for (mu, nu) in a.terms if len(mu) - len(nu) == g]
            + [len(nu) + g for (mu, nu) in a.terms if len(mu) - len(nu) == g]
        )
        flat = a.flatten(g, top)
        near01 = (np.abs(flat) <= tol) | (np.abs(flat - 1) <= tol)
        if not near01.all():
            return NEITHER
    return PERMUTATION if grades == [0] else WORD_SUM

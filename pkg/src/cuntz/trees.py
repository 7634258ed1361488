"""Letter maps, rooted-tree diagnostics and the combinatorial automorphism tests.

A permutation u of the level-k words induces, for each letter i, a self-map
f_i of the level-(k-1) words: f_i(a) is the image word u(i.a) with its last
letter dropped.  The two decision procedures here run the joint pair dynamics
of these maps:

  condition_b  --  every joint trajectory of every off-diagonal pair (a,b)
                   under the same-letter maps reaches the diagonal; decided
                   by iterated sink removal on the pair graph (any directed
                   cycle, self-loops included, is fatal).  This is exactly
                   the criterion for the endomorphism to restrict to an
                   automorphism of the diagonal MASA.

  condition_d  --  the analogous absorption for pairs evolving under
                   independent letter choices (i,j), where a step exists only
                   when the two image words share their last letter and a
                   mismatch absorbs the pair into a dead state; together with
                   condition_b this decides invertibility on the whole
                   algebra.
"""

from __future__ import annotations

from .words import Perm, unrank, word_str


class LetterMap:
    """The self-map of level-(k-1) words induced by one letter."""

    __slots__ = ("letter", "n", "level", "table")

    def __init__(self, letter: int, n: int, level: int, table):
        self.letter = letter
        self.n = n
        self.level = level
        self.table = tuple(table)
        if len(self.table) != n ** level:
            raise ValueError("table size does not match level")

    def __call__(self, r: int) -> int:
        return self.table[r]

    def __eq__(self, other):
        return (
            isinstance(other, LetterMap)
            and (self.letter, self.n, self.level, self.table)
            == (other.letter, other.n, other.level, other.table)
        )

    def __repr__(self):
        pairs = ", ".join(
            f"{word_str(unrank(a, self.n, self.level))}->"
            f"{word_str(unrank(b, self.n, self.level))}"
            for a, b in enumerate(self.table)
        )
        return f"LetterMap(f_{self.letter}: {pairs})"


def letter_maps(p: Perm):
    """The n letter maps of a level-k permutation, on level k-1 ranks."""
    if p.k < 1:
        raise ValueError("need level k >= 1")
    n = p.n
    M = n ** (p.k - 1)
    img = p.image
    return [
        LetterMap(i + 1, n, p.k - 1, (img[i * M + a] // n for a in range(M)))
        for i in range(n)
    ]


def is_rooted_tree(f: LetterMap):
    """(True, root_rank) if the functional graph of f is a rooted tree.

    Rooted tree means: exactly one periodic point, which is a fixed point.
    """
    table = f.table
    size = len(table)
    root = None
    for a in range(size):
        if table[a] == a:
            if root is not None:
                return False, None
            root = a
    if root is None:
        return False, None
    # every node must fall into the root; any other cycle shows up as a
    # trajectory that never arrives within `size` steps
    for a in range(size):
        x = a
        for _ in range(size):
            if x == root:
                break
            x = table[x]
        else:
            return False, None
    return True, root


class TreeDiagram:
    """A letter map certified to be a rooted tree, with its edge structure."""

    __slots__ = ("letter_map", "root")

    def __init__(self, letter_map: LetterMap):
        ok, root = is_rooted_tree(letter_map)
        if not ok:
            raise ValueError("letter map is not a rooted tree")
        self.letter_map = letter_map
        self.root = root

    def edges(self):
        """Parent edges a -> f(a), the root's loop omitted."""
        t = self.letter_map.table
        return [(a, t[a]) for a in range(len(t)) if a != self.root]

    def in_degrees(self, include_root_loop: bool = False):
        t = self.letter_map.table
        deg = [0] * len(t)
        for a, b in self.edges():
            deg[b] += 1
        if include_root_loop:
            deg[self.root] += 1
        return deg


def in_degree_type(f: LetterMap, include_root_loop: bool = False):
    """Sorted multiset of in-degrees of the tree diagram of f.

    By default the root's invisible self-loop is not counted, so the degrees
    sum to (number of vertices) - 1.  The classification literature counts
    the loop; pass include_root_loop=True to reproduce those multisets.
    """
    return tuple(sorted(TreeDiagram(f).in_degrees(include_root_loop)))


def _collapse_b(image, n: int, M: int) -> bool:
    """Absorption of off-diagonal pairs under the same-letter maps.

    Iterated sink removal: a pair is removed once all its successors are
    diagonal or already removed; if a round removes nothing the survivors
    contain a cycle and the check fails.
    """
    if M == 1:
        return True
    ftab = [v // n for v in image]
    # a letter map with two fixed points yields a self-loop at once
    for i in range(n):
        base = i * M
        fixed = 0
        for a in range(M):
            if ftab[base + a] == a:
                fixed += 1
                if fixed > 1:
                    return False
    alive = bytearray(M * M)
    remaining = 0
    for a in range(M):
        row = a * M
        for b in range(M):
            if a != b:
                alive[row + b] = 1
                remaining += 1
    while remaining:
        removed = 0
        for a in range(M):
            row = a * M
            for b in range(M):
                node = row + b
                if not alive[node]:
                    continue
                for i in range(n):
                    fa = ftab[i * M + a]
                    fb = ftab[i * M + b]
                    if fa != fb and alive[fa * M + fb]:
                        break
                else:
                    alive[node] = 0
                    removed += 1
        if not removed:
            return False
        remaining -= removed
    return True


def _collapse_d(image, n: int, M: int) -> bool:
    """Absorption of off-diagonal pairs under independent letter pairs.

    A step under (i,j) exists when the image words of (i.a) and (j.b) share
    their last letter; otherwise the pair is absorbed into the dead state.
    """
    if M == 1:
        return True
    alive = bytearray(M * M)
    remaining = 0
    for a in range(M):
        row = a * M
        for b in range(M):
            if a != b:
                alive[row + b] = 1
                remaining += 1
    while remaining:
        removed = 0
        for a in range(M):
            row = a * M
            for b in range(M):
                node = row + b
                if not alive[node]:
                    continue
                live = False
                for i in range(n):
                    ra = image[i * M + a]
                    for j in range(n):
                        rb = image[j * M + b]
                        if (ra - rb) % n == 0 and alive[(ra // n) * M + (rb // n)]:
                            live = True
                            break
                    if live:
                        break
                if not live:
                    alive[node] = 0
                    removed += 1
        if not removed:
            return False
        remaining -= removed
    return True


def condition_b(p: Perm) -> bool:
    """Does the endomorphism restrict to an automorphism of the diagonal?"""
    return _collapse_b(p.image, p.n, p.n ** (p.k - 1)) if p.k >= 1 else True


def condition_d(p: Perm) -> bool:
    """The independent-letters absorption test; with condition_b it decides
    whether the endomorphism is an automorphism of the whole algebra."""
    return _collapse_d(p.image, p.n, p.n ** (p.k - 1)) if p.k >= 1 else True


def absorption_rounds(p: Perm, variant: str = "b"):
    """Sizes of the not-yet-absorbed pair set after each removal round.

    Diagnostic twin of the condition checkers; returns (verdict, sizes).
    The sizes decrease strictly while the verdict is still open.
    """
    n = p.n
    M = n ** (p.k - 1)
    if M == 1:
        return True, []
    graph = PairGraph.from_perm(p, variant)
    alive = set(graph.nodes)
    sizes = [len(alive)]
    while alive:
        removable = [
            x
            for x in alive
            if not any(y in alive for y in graph.successors(x))
        ]
        if not removable:
            return False, sizes
        alive.difference_update(removable)
        sizes.append(len(alive))
    return True, sizes


class PairGraph:
    """Explicit successor graph on off-diagonal pairs, for diagnostics.

    The condition checkers use flat-array kernels; this object exposes the
    same graph for tests, brute-force cross-checks and export.
    """

    __slots__ = ("n", "level", "variant", "nodes", "_succ")

    def __init__(self, n, level, variant, succ):
        self.n = n
        self.level = level
        self.variant = variant
        M = n ** level
        self.nodes = [(a, b) for a in range(M) for b in range(M) if a != b]
        self._succ = succ

    @classmethod
    def from_perm(cls, p: Perm, variant: str) -> "PairGraph":
        n = p.n
        M = n ** (p.k - 1)
        img = p.image
        if variant == "b":
            ftab = [v // n for v in img]

            def succ(node):
                a, b = node
                out = []
                for i in range(n):
                    fa = ftab[i * M + a]
                    fb = ftab[i * M + b]
                    if fa != fb:
                        out.append((fa, fb))
                return out

        elif variant == "d":

            def succ(node):
                a, b = node
                out = []
                for i in range(n):
                    ra = img[i * M + a]
                    for j in range(n):
                        rb = img[j * M + b]
                        if (ra - rb) % n == 0:
                            out.append((ra // n, rb // n))
                return out

        else:
            raise ValueError(f"unknown variant {variant!r}")
        return cls(n, p.k - 1, variant, succ)

    def successors(self, node):
        """Off-diagonal successors; absorbed steps are dropped."""
        return self._succ(node)

    def has_cycle(self) -> bool:
        color = {}  # 1 on stack, 2 done
        for start in self.nodes:
            if color.get(start):
                continue
            stack = [(start, iter(self.successors(start)))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    c = color.get(nxt)
                    if c == 1:
                        return True
                    if c is None:
                        color[nxt] = 1
                        stack.append((nxt, iter(self.successors(nxt))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
        return False


def analyze_perm(p: Perm) -> dict:
    """JSON-ready record with both verdicts and the tree data per letter."""
    maps = letter_maps(p)
    roots = []
    multisets = []
    for f in maps:
        ok, root = is_rooted_tree(f)
        if ok:
            roots.append(word_str(unrank(root, p.n, p.k - 1)))
            multisets.append(list(in_degree_type(f)))
        else:
            roots.append(None)
            multisets.append(None)
    return {
        "perm": p.to_one_line(),
        "b": condition_b(p),
        "d": condition_d(p),
        "roots": roots,
        "indegree_multisets": multisets,
    }


def export_dot(trees, labels=None) -> str:
    """Render tree diagrams as a DOT digraph, one cluster per tree.

    Roots are drawn as double circles; the root's self-loop is omitted.
    """
    trees = list(trees)
    if labels is None:
        labels = [f"f_{t.letter_map.letter}" for t in trees]
    if len(labels) != len(trees):
        raise ValueError("one label per tree required")
    lines = ["digraph trees {", "  node [shape=circle];"]
    for t_index, (tree, label) in enumerate(zip(trees, labels)):
        f = tree.letter_map
        lines.append(f"  subgraph cluster_{t_index} {{")
        lines.append(f'    label="{label}";')
        for a in range(len(f.table)):
            w = word_str(unrank(a, f.n, f.level))
            shape = ', shape=doublecircle' if a == tree.root else ""
            lines.append(f'    "t{t_index}_{w}" [label="{w}"{shape}];')
        for a, b in tree.edges():
            wa = word_str(unrank(a, f.n, f.level))
            wb = word_str(unrank(b, f.n, f.level))
            lines.append(f'    "t{t_index}_{wa}" -> "t{t_index}_{wb}";')
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"

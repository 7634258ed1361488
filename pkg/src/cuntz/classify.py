"""Exhaustive sweeps over permutation levels with sharding and checkpoints.

The candidate space is the full symmetric group on the level-k words in
lexicographic one-line order.  Shards are contiguous index ranges of that
order, so counts are independent of the shard layout and a crashed sweep can
resume from per-shard checkpoint files with identical final counts.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import time
from dataclasses import dataclass
from multiprocessing import get_context

from .words import Perm, convolve
from .trees import _collapse_b, _collapse_d, analyze_perm

HARD_CAP_DEFAULT = 9  # refuse n^k beyond this without an explicit override


class CapExceeded(Exception):
    """The sweep would enumerate (n^k)! candidates beyond the configured cap."""


class CheckpointMismatch(Exception):
    """Checkpoint data belongs to a different sweep specification."""


class OrderCapError(Exception):
    """Convolution-order search exceeded the order cap."""


class LevelCapError(Exception):
    """Convolution-order search exceeded the level cap."""


@dataclass
class SweepSpec:
    n: int
    k: int
    predicate: str = "both"  # "b" | "d" | "both"
    shards: int = 1
    checkpoint_path: str = None
    checkpoint_interval: int = 20000
    witness_path: str = None
    force_large: bool = False
    hard_cap: int = HARD_CAP_DEFAULT

    def validate(self):
        if self.n < 2 or self.k < 1:
            raise ValueError("need n >= 2 and k >= 1")
        if self.predicate not in ("b", "d", "both"):
            raise ValueError(f"unknown predicate {self.predicate!r}")
        if self.shards < 1:
            raise ValueError("need shards >= 1")
        if self.n ** self.k > self.hard_cap and not self.force_large:
            raise CapExceeded(
                f"n^k = {self.n ** self.k} exceeds the cap {self.hard_cap}; "
                f"({self.n ** self.k})! candidates need an explicit override"
            )

    def fingerprint(self) -> str:
        blob = f"{self.n}|{self.k}|{self.predicate}|{self.shards}"
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SweepResult:
    n: int
    k: int
    predicate: str
    candidates: int
    count_b: int
    count_d: int
    count_both: int
    shards: int
    elapsed: float
    witnesses_written: int = 0
    resumed: bool = False

    def to_json(self) -> dict:
        """Deterministic fields only; timing stays out of machine output."""
        return {
            "n": self.n,
            "k": self.k,
            "predicate": self.predicate,
            "candidates": self.candidates,
            "b": self.count_b,
            "d": self.count_d,
            "both": self.count_both,
            "shards": self.shards,
        }


def perm_at_index(size: int, index: int):
    """The index-th permutation of range(size) in lexicographic order."""
    if not 0 <= index < math.factorial(size):
        raise ValueError("index out of range")
    digits = []
    for radix in range(size, 0, -1):
        f = math.factorial(radix - 1)
        digits.append(index // f)
        index %= f
    pool = list(range(size))
    return tuple(pool.pop(d) for d in digits)


def shard_ranges(total: int, shards: int):
    step, extra = divmod(total, shards)
    out = []
    lo = 0
    for s in range(shards):
        hi = lo + step + (1 if s < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def _shard_paths(base: str, shard: int):
    return f"{base}.shard{shard}"


def _run_shard(args):
    """Worker: count predicates over one contiguous index range."""
    (n, k, predicate, shard, lo, hi, fp, ckpt_base, ckpt_every, wit_base) = args
    K = n ** k
    M = n ** (k - 1)
    counts = {"candidates": 0, "b": 0, "d": 0, "both": 0}
    start = lo
    wrote = 0
    wit_mode = "w"
    if ckpt_base:
        path = _shard_paths(ckpt_base, shard)
        if os.path.exists(path):
            last = None
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        last = json.loads(line)
            if last is not None:
                if last.get("spec") != fp:
                    raise CheckpointMismatch(
                        f"shard {shard}: checkpoint belongs to spec {last.get('spec')}"
                    )
                start = last["next_index"]
                counts = last["counts"]
                wrote = last.get("witnesses", 0)
                # drop witness lines written past the checkpoint
                wpath = _shard_paths(wit_base, shard) if wit_base else None
                if wpath and os.path.exists(wpath):
                    with open(wpath) as fh:
                        lines = fh.readlines()
                    with open(wpath, "w") as fh:
                        fh.writelines(lines[:wrote])
                wit_mode = "a"
    wit = open(_shard_paths(wit_base, shard), wit_mode) if wit_base else None
    ckpt = open(_shard_paths(ckpt_base, shard), "a") if ckpt_base else None

    def checkpoint(next_index):
        if ckpt:
            if wit:
                wit.flush()
            ckpt.write(
                json.dumps(
                    {
                        "spec": fp,
                        "shard": shard,
                        "next_index": next_index,
                        "counts": counts,
                        "witnesses": wrote,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
            ckpt.flush()

    it = itertools.islice(itertools.permutations(range(K)), start, hi)
    index = start
    for image in it:
        counts["candidates"] += 1
        b = _collapse_b(image, n, M)
        need_d = predicate in ("d", "both")
        d = _collapse_d(image, n, M) if (need_d and (b or predicate == "d")) else False
        if b:
            counts["b"] += 1
        if d:
            counts["d"] += 1
        if b and d:
            counts["both"] += 1
        hit = {"b": b, "d": d, "both": b and d}[predicate]
        if hit and wit:
            wit.write(
                json.dumps({"n": n, "k": k, "perm": list(image)}, sort_keys=True) + "\n"
            )
            wrote += 1
        index += 1
        if ckpt and counts["candidates"] % ckpt_every == 0:
            checkpoint(index)
    checkpoint(hi)
    if wit:
        wit.close()
    if ckpt:
        ckpt.close()
    return shard, counts, wrote


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Visit every permutation of the level exactly once and count predicates.

    Note: with predicate "b" or "both", the d-counter only covers candidates
    that already pass b (the d column of the result is then the b-and-d
    count); ask for predicate "d" to count d alone.
    """
    spec.validate()
    t0 = time.perf_counter()
    K = spec.n ** spec.k
    total = math.factorial(K)
    ranges = shard_ranges(total, spec.shards)
    fp = spec.fingerprint()
    resumed = bool(
        spec.checkpoint_path
        and any(os.path.exists(_shard_paths(spec.checkpoint_path, s)) for s in range(spec.shards))
    )
    args = [
        (
            spec.n,
            spec.k,
            spec.predicate,
            s,
            lo,
            hi,
            fp,
            spec.checkpoint_path,
            spec.checkpoint_interval,
            spec.witness_path,
        )
        for s, (lo, hi) in enumerate(ranges)
    ]
    if spec.shards == 1:
        results = [_run_shard(args[0])]
    else:
        with get_context("fork").Pool(min(spec.shards, os.cpu_count() or 1)) as pool:
            results = pool.map(_run_shard, args)
    results.sort()
    counts = {"candidates": 0, "b": 0, "d": 0, "both": 0}
    wrote = 0
    for _, c, w in results:
        for key in counts:
            counts[key] += c[key]
        wrote += w
    if spec.witness_path:
        # shard files are already in global lexicographic order
        with open(spec.witness_path, "w") as out:
            for s in range(spec.shards):
                path = _shard_paths(spec.witness_path, s)
                with open(path) as fh:
                    out.write(fh.read())
                os.remove(path)
    return SweepResult(
        n=spec.n,
        k=spec.k,
        predicate=spec.predicate,
        candidates=counts["candidates"],
        count_b=counts["b"],
        count_d=counts["d"],
        count_both=counts["both"],
        shards=spec.shards,
        elapsed=time.perf_counter() - t0,
        witnesses_written=wrote,
        resumed=resumed,
    )


def count_table(n: int, k: int, shards: int = None, force_large: bool = False):
    """(automorphism count, diagonal-automorphism count) for one level."""
    if shards is None:
        shards = default_shards()
    res = run_sweep(SweepSpec(n=n, k=k, predicate="both", shards=shards, force_large=force_large))
    return res.count_both, res.count_b


def default_shards() -> int:
    env = os.environ.get("CUNTZ_SHARDS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def order_of(p: Perm, order_cap: int = 64, level_cap: int = 16) -> int:
    """Order of the endomorphism under convolution powers.

    Raises OrderCapError / LevelCapError when a cap is hit first; the level
    of the r-th power is r(k-1)+1.
    """
    q = p
    for r in range(1, order_cap + 1):
        if q.is_identity():
            return r
        next_level = q.k + p.k - 1
        if next_level > level_cap:
            raise LevelCapError(
                f"power {r + 1} needs level {next_level} > cap {level_cap}"
            )
        q = convolve(p, q)
    raise OrderCapError(f"no identity power up to order {order_cap}")


def letterwise_perm(z: Perm, k: int) -> Perm:
    """A level-1 permutation applied to every letter of level-k words."""
    if z.k != 1:
        raise ValueError("need a level-1 permutation")
    n = z.n
    img = z.image
    out = []
    for r in range(n ** k):
        digits = []
        x = r
        for _ in range(k):
            x, d = divmod(x, n)
            digits.append(d)
        acc = 0
        for d in reversed(digits):
            acc = acc * n + img[d]
        out.append(acc)
    return Perm(n, k, out, validate=False)


def bogolubov_reduce(n: int, k: int, force_large: bool = False):
    """Orbit representatives of conjugation by letterwise level-1 permutations.

    Yields (representative, orbit_size) with representatives minimal in
    one-line order; orbit sizes sum to (n^k)!.
    """
    if n ** k > HARD_CAP_DEFAULT and not force_large:
        raise CapExceeded(f"n^k = {n ** k} exceeds the cap {HARD_CAP_DEFAULT}")
    K = n ** k
    conjs = []
    for zimg in itertools.permutations(range(n)):
        z = Perm(n, 1, zimg, validate=False)
        zb = letterwise_perm(z, k)
        conjs.append((zb.image, zb.inverse().image))
    for image in itertools.permutations(range(K)):
        orbit = set()
        for zi, zinv in conjs:
            orbit.add(tuple(zi[image[zinv[r]]] for r in range(K)))
        if min(orbit) == image:
            yield Perm(n, k, image, validate=False), len(orbit)


def witness_records(path: str):
    """Parse a witness stream back into permutations with fresh verdicts."""
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            p = Perm(rec["n"], rec["k"], rec["perm"])
            out.append(analyze_perm(p))
    return out

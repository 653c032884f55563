"""Brute-force negative association checks on small boxes.

Negative association asks E[F G] <= E[F] E[G] for increasing F and G on
disjoint coordinate sets.  On a finite box it suffices to test indicator
functions of up-sets (monotone 0/1 functions), since every bounded
increasing function is a nonnegative combination of those plus a constant.
Up-set families are enumerated exhaustively under a cell-count cap; exact
rational weights give exact verdicts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT, Tolerances
from .measures import Measure


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class UpSetFamily:
    """All up-sets of the product poset {0..shape_0} x ... as bitmasks.

    cells lists the box in a fixed order; masks[k] has bit i set when
    cells[i] belongs to the k-th up-set; antichains[k] lists its minimal
    elements.
    """

    shape: tuple
    cells: tuple
    masks: tuple
    antichains: tuple

    def __len__(self) -> int:
        return len(self.masks)

    def indicator(self, k: int) -> np.ndarray:
        out = np.zeros(len(self.cells))
        for i in range(len(self.cells)):
            if self.masks[k] >> i & 1:
                out[i] = 1.0
        return out


def enumerate_upsets(shape: Sequence[int], cap: int = DEFAULT.upset_cap) -> UpSetFamily:
    """All upward-closed subsets of the box {0..shape_i} per coordinate."""
    shape = tuple(int(s) for s in shape)
    cells = tuple(itertools.product(*[range(s + 1) for s in shape]))
    m = len(cells)
    if m > cap:
        raise CapExceeded(f"box has {m} cells, cap is {cap}")
    idx = {c: i for i, c in enumerate(cells)}
    up_masks = []
    for c in cells:
        mask = 0
        for d in cells:
            if all(x >= y for x, y in zip(d, c)):
                mask |= 1 << idx[d]
        up_masks.append(mask)
    masks = []
    antichains = []
    for s in range(1 << m):
        ok = True
        for i in range(m):
            if s >> i & 1 and (s & up_masks[i]) != up_masks[i]:
                ok = False
                break
        if ok:
            masks.append(s)
            minimal = []
            for i in range(m):
                if s >> i & 1:
                    below = any(
                        s >> j & 1
                        and j != i
                        and all(x <= y for x, y in zip(cells[j], cells[i]))
                        for j in range(m)
                    )
                    if not below:
                        minimal.append(cells[i])
            antichains.append(tuple(minimal))
    return UpSetFamily(shape, cells, tuple(masks), tuple(antichains))


@dataclass(frozen=True)
class NASplitResult:
    A: tuple
    B: tuple
    passed: bool
    worst_slack: object
    witness_pair: tuple | None
    mode: str = "exhaustive"

    def to_json(self) -> dict:
        out = {
            "A": list(self.A),
            "B": list(self.B),
            "worst_slack": float(self.worst_slack),
            "mode": self.mode,
        }
        if self.witness_pair is not None:
            out["witness_pair"] = [
                [list(c) for c in self.witness_pair[0]],
                [list(c) for c in self.witness_pair[1]],
            ]
        return out


def _project_weights(weights, ndim: int, keep: tuple):
    """Sum out all axes not in keep; works for float and object arrays."""
    w = weights
    drop = tuple(i for i in range(ndim) if i not in keep)
    if drop:
        w = w.sum(axis=drop)
    return w


def _random_upset_indicator(cells: tuple, rng) -> np.ndarray:
    """Indicator of the upward closure of a random antichain seed."""
    m = len(cells)
    seeds = rng.integers(0, m, size=int(rng.integers(1, 4)))
    out = np.zeros(m)
    for s in seeds:
        base = cells[int(s)]
        for i, c in enumerate(cells):
            if all(x >= y for x, y in zip(c, base)):
                out[i] = 1.0
    return out


def is_na(
    mu: Measure | np.ndarray,
    A: Iterable[int],
    B: Iterable[int],
    tol: Tolerances = DEFAULT,
    samples: int = 4000,
    seed: int = 0,
) -> NASplitResult:
    """Check E[FG] <= E[F]E[G] over up-set indicator pairs.

    F runs over up-sets of the A-projection box, G over the B-projection
    box; expectations are taken under the joint (A u B)-projection, so
    dependence between the two blocks is fully retained.  Object-dtype
    (Fraction) weights give an exact verdict with zero slack.  Projections
    within the cell cap are checked exhaustively; larger ones fall back to
    `samples` random up-set pairs and a pass is only "sampled-NA" (a
    violating pair may have been missed).
    """
    weights = mu.weights if isinstance(mu, Measure) else np.asarray(mu)
    ndim = weights.ndim
    A = tuple(sorted(set(int(a) for a in A)))
    B = tuple(sorted(set(int(b) for b in B)))
    if not A or not B or set(A) & set(B):
        raise ValueError("A and B must be disjoint and nonempty")
    keep = tuple(sorted(A + B))
    joint = _project_weights(weights, ndim, keep)
    pos_of = {axis: i for i, axis in enumerate(keep)}
    a_axes = tuple(pos_of[a] for a in A)
    b_axes = tuple(pos_of[b] for b in B)

    shapeA = tuple(joint.shape[i] - 1 for i in a_axes)
    shapeB = tuple(joint.shape[i] - 1 for i in b_axes)
    cellsA = int(np.prod([s + 1 for s in shapeA]))
    cellsB = int(np.prod([s + 1 for s in shapeB]))
    if max(cellsA, cellsB) > tol.upset_cap:
        return _is_na_sampled(joint, A, B, a_axes, b_axes, shapeA, shapeB, tol, samples, seed)
    famA = enumerate_upsets(shapeA, cap=tol.upset_cap)
    famB = enumerate_upsets(shapeB, cap=tol.upset_cap)

    exact = joint.dtype == object
    # flatten the joint onto (A-cell, B-cell) matrix
    order = a_axes + b_axes
    M = np.transpose(joint, order).reshape(len(famA.cells), len(famB.cells))
    mass = M.sum()

    slack_floor = 0 if exact else tol.na_slack * float(mass)
    worst = None
    witness = None
    fa = [famA.indicator(k) for k in range(len(famA))]
    fb = [famB.indicator(k) for k in range(len(famB))]
    if exact:
        rows = [
            [sum(M[i][j] for i in range(M.shape[0]) if f[i]) for j in range(M.shape[1])]
            for f in fa
        ]
        col_tot = [sum(M[i][j] for i in range(M.shape[0])) for j in range(M.shape[1])]
        for ka, f in enumerate(fa):
            ef = sum(rows[ka])
            for kb, g in enumerate(fb):
                efg = sum(rows[ka][j] for j in range(M.shape[1]) if g[j])
                eg = sum(col_tot[j] for j in range(M.shape[1]) if g[j])
                slack = efg * mass - ef * eg
                if worst is None or slack > worst:
                    worst = slack
                    if slack > slack_floor:
                        witness = (famA.antichains[ka], famB.antichains[kb])
    else:
        Mf = M.astype(float)
        rowsums = np.array([f @ Mf for f in fa])
        tot = Mf.sum(axis=0)
        for ka in range(len(fa)):
            ef = rowsums[ka].sum()
            for kb in range(len(fb)):
                efg = float(rowsums[ka] @ fb[kb])
                eg = float(tot @ fb[kb])
                slack = efg * float(mass) - ef * eg
                if worst is None or slack > worst:
                    worst = slack
                    if slack > slack_floor:
                        witness = (famA.antichains[ka], famB.antichains[kb])
    passed = worst <= slack_floor
    return NASplitResult(A, B, bool(passed), worst, witness if not passed else None)


def _is_na_sampled(joint, A, B, a_axes, b_axes, shapeA, shapeB, tol, samples, seed):
    import itertools as _it

    rng = np.random.default_rng(seed)
    cellsA = tuple(_it.product(*[range(s + 1) for s in shapeA]))
    cellsB = tuple(_it.product(*[range(s + 1) for s in shapeB]))
    order = a_axes + b_axes
    M = np.transpose(joint, order).reshape(len(cellsA), len(cellsB)).astype(float)
    mass = float(M.sum())
    floor = tol.na_slack * mass
    tot_cols = M.sum(axis=0)
    worst = -np.inf
    witness = None
    for _ in range(samples):
        f = _random_upset_indicator(cellsA, rng)
        g = _random_upset_indicator(cellsB, rng)
        row = f @ M
        slack = float(row @ g) * mass - row.sum() * float(tot_cols @ g)
        if slack > worst:
            worst = slack
            if slack > floor:
                witness = (
                    tuple(c for i, c in enumerate(cellsA) if f[i]),
                    tuple(c for i, c in enumerate(cellsB) if g[i]),
                )
    passed = worst <= floor
    return NASplitResult(A, B, bool(passed), worst, witness if not passed else None, mode="sampled")


@dataclass(frozen=True)
class NAReport:
    splits: tuple
    passed: bool
    worst_slack: object

    def to_json(self) -> dict:
        sampled = any(s.mode == "sampled" for s in self.splits)
        verdict = "violated" if not self.passed else ("sampled-NA" if sampled else "NA")
        return {
            "verdict": verdict,
            "worst_slack": float(self.worst_slack),
            "splits": [s.to_json() for s in self.splits],
        }


def na_all_splits(mu: Measure | np.ndarray, tol: Tolerances = DEFAULT) -> NAReport:
    """Run is_na over every unordered pair of disjoint nonempty index sets."""
    weights = mu.weights if isinstance(mu, Measure) else np.asarray(mu)
    n = weights.ndim
    if n < 2:
        raise ValueError("need at least two coordinates")
    results = []
    axes = range(n)
    seen = set()
    for ka in range(1, n):
        for A in itertools.combinations(axes, ka):
            rest = [i for i in axes if i not in A]
            for kb in range(1, len(rest) + 1):
                for B in itertools.combinations(rest, kb):
                    key = frozenset((A, B))
                    if key in seen:
                        continue
                    seen.add(key)
                    results.append(is_na(mu, A, B, tol=tol))
    worst = max(r.worst_slack for r in results)
    return NAReport(tuple(results), all(r.passed for r in results), worst)

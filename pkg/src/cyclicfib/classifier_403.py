"""Naming and census of fibers of triple covers of genus 4 over ruled surfaces.

Each admissible sequence with t = 6, n = 3 falls into one of nine families,
read off the root diagram; the indices record how many branch points were
lost to tangential degenerations (at which end), and the chain families carry
the length of the repeated part.  Invariant rows are recomputed from a
representative configuration and must agree with the fixture formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .branch_sim import realize_sequence
from .diagram_core import AbstractDiagram, CoverParams
from .fiber_builder import alpha_zero
from .invariants import (
    InvariantVector,
    alpha_indices,
    epsilon_index,
    horikawa_index,
    local_signature,
)
from .sequence_engine import Bounds, DiagramSequence, enumerate_sequences

PARAMS = CoverParams(n=3, g=4)

FAMILIES = ("0", "I", "II", "III", "IV", "V", "VI", "VII", "VIII")


class UnclassifiableSequence(ValueError):
    pass


@dataclass(frozen=True, order=True)
class FiberClass403:
    family: str
    indices: tuple[int, ...]

    def label(self) -> str:
        if not self.indices:
            return self.family
        return f"{self.family}_({','.join(str(i) for i in self.indices)})"


def _lost(d: AbstractDiagram, kinds: tuple[str, ...] = ("fresh", "d")) -> int:
    """Branch points lost by tangential overlap in one diagram."""
    return sum(col.profile[0][0] - 1
               for col in d.columns
               if not col.height and col.provenance[0] in kinds)


def _single_chain(seq: DiagramSequence, start: tuple[int, int]):
    """Follow forks of single-column diagrams; return (#links, terminal index)."""
    fork = seq.fork_dict()
    links = 0
    at = start
    while True:
        nu = fork[at]
        d = seq.diagrams[nu]
        positive = [ci for ci, col in enumerate(d.columns) if col.height]
        if not positive:
            return links, nu
        assert len(positive) == 1
        links += 1
        at = (nu, positive[0])


def classify(seq: DiagramSequence) -> FiberClass403:
    """Name an admissible (4,0,3) sequence per the classification tables."""
    root = seq.diagrams[0]
    fork = seq.fork_dict()
    shapes = sorted((col.mults for col in root.columns), reverse=True)
    positive = {tuple(col.mults): ci for ci, col in enumerate(root.columns) if col.height}
    total_lost = sum(_lost(d) for d in seq.diagrams)
    alpha = alpha_indices(seq, 3)
    a1 = alpha[0] if alpha else 0

    if root.host_type == 1:
        if shapes == [(3,), (3,), (3,)]:
            return FiberClass403("IV", (total_lost,))
        if shapes == [(3, 3), (3,)]:
            i = _tip_lost(seq, _col_index(root, (3, 3)))
            j = _tip_lost(seq, _col_index(root, (3,)))
            return FiberClass403("V", (i, j))
        if shapes == [(4, 3), (3,)]:
            return FiberClass403("VII", (total_lost,))
        if shapes == [(3, 3, 3)]:
            return FiberClass403("VI", (total_lost,))
        if shapes == [(4, 4, 3)]:
            return FiberClass403("VIII", ())
        raise UnclassifiableSequence(f"type-1 root {shapes}")

    cols = [col for col in root.columns if col.height]
    if not cols:
        partition = tuple(sorted((col.profile[0][0] for col in root.columns), reverse=True))
        return FiberClass403("0", partition)
    if len(cols) == 1 and cols[0].mults == (3,):
        ann = cols[0].annotation
        ci = next(ci for ci, col in enumerate(root.columns) if col.height)
        if ann == 0:
            end_root = _lost(root)
            links, tip = _single_chain(seq, (0, ci))
            end_tip = _lost(seq.diagrams[tip])
            i, j = sorted((end_root, end_tip), reverse=True)
            return FiberClass403("I", (i, j, a1 - 1))
        child = seq.diagrams[fork[(0, ci)]]
        d_extra = sum(col.profile[0][0] - 1 for col in child.columns
                      if not col.height and col.provenance[0] == "d")
        i = (ann - 1) + d_extra
        j = _lost(root) + _lost(child, kinds=("fresh",))
        return FiberClass403("III", (i, j))
    if len(cols) == 2 and all(col.mults == (3,) for col in cols):
        indices = [ci for ci, col in enumerate(root.columns) if col.height]
        ends = sorted((_tip_lost(seq, ci) for ci in indices), reverse=True)
        return FiberClass403("I", (*ends, a1 - 1))
    if len(cols) == 1 and cols[0].mults == (3, 3):
        ci = next(ci for ci, col in enumerate(root.columns) if col.height)
        return FiberClass403("II", (total_lost, a1 - 2))
    raise UnclassifiableSequence(f"type-0 root {shapes}")


def _col_index(d: AbstractDiagram, mults: tuple[int, ...]) -> int:
    return next(ci for ci, col in enumerate(d.columns) if col.mults == mults)


def _tip_lost(seq: DiagramSequence, ci: int) -> int:
    _links, tip = _single_chain(seq, (0, ci))
    return _lost(seq.diagrams[tip])


# --- census ------------------------------------------------------------

@lru_cache(maxsize=None)
def census(max_chain: int = 3, max_depth: int = 10) -> dict[FiberClass403, DiagramSequence]:
    """One representative sequence per class, keyed by (family, indices)."""
    out: dict[FiberClass403, DiagramSequence] = {}
    for seq in enumerate_sequences(PARAMS, Bounds(max_depth=max_depth, max_chain=max_chain)):
        cls = classify(seq)
        out.setdefault(cls, seq)
    return out


def census_counts(max_chain: int = 3) -> dict[str, int]:
    """Distinct classes per family; chain families counted up to the length."""
    seen: dict[str, set] = {fam: set() for fam in FAMILIES}
    for cls in census(max_chain):
        if cls.family in ("I", "II"):
            seen[cls.family].add(cls.indices[:-1])
        else:
            seen[cls.family].add(cls.indices)
    return {fam: len(vals) for fam, vals in seen.items()}


# --- invariant rows ------------------------------------------------------

def table_row(cls: FiberClass403, rep: DiagramSequence | None = None
              ) -> tuple[int, int, int, Fraction, Fraction]:
    """(alpha_0, alpha_1, epsilon, Ind, sigma) computed from a representative."""
    if rep is None:
        reps = census(max_chain=max(3, (cls.indices[-1] if cls.family in ("I", "II") else 0)))
        rep = reps[cls]
    config = realize_sequence(rep)
    alphas = alpha_indices(rep, PARAMS.n)
    v = InvariantVector(alpha_zero(config), alphas, epsilon_index(config, PARAMS.n))
    ind = horikawa_index(PARAMS.n, PARAMS.r, v)
    sig = local_signature(PARAMS.n, PARAMS.r, v)
    a1 = v.alpha(1)
    return (v.alpha0, a1, v.epsilon, ind, sig)


def expected_row(cls: FiberClass403) -> tuple[int, int, int, Fraction, Fraction]:
    """The classification tables as closed formulas in the indices."""
    F = Fraction
    fam, idx = cls.family, cls.indices
    if fam == "0":
        k = sum(i - 1 for i in idx)
        return (k, 0, 0, F(0), F(-16, 15) * k)
    if fam == "I":
        i, j, l = idx
        k = i + j
        return (k, l + 1, 0, F(3, 7) * (l + 1),
                F(-16, 15) * k - F(7, 5) * l - F(7, 5))
    if fam == "II":
        k, l = idx
        return (3 + k, l + 2, 0, F(3, 7) * (l + 2),
                F(-16, 15) * k - F(7, 5) * l - 6)
    if fam == "III":
        i, j = idx
        k = i + j
        return (1 + k, 1, 0, F(3, 7), F(-16, 15) * k - F(37, 15))
    if fam == "IV":
        (k,) = idx
        return (k, 3, 1, F(16, 7), F(-16, 15) * k - F(16, 15))
    if fam == "V":
        i, j = idx
        k = i + j
        return (2 + k, 3, 1, F(16, 7), F(-16, 15) * k - F(16, 5))
    if fam == "VI":
        (k,) = idx
        return (4 + k, 3, 1, F(16, 7), F(-16, 15) * k - F(16, 3))
    if fam == "VII":
        (k,) = idx
        return (1 + k, 4, 2, F(26, 7), F(-16, 15) * k - F(2, 5))
    if fam == "VIII":
        return (4, 4, 3, F(33, 7), F(-7, 15))
    raise UnclassifiableSequence(fam)

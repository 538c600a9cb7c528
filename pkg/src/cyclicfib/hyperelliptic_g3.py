"""Essential singularity diagrams and the genus-3 hyperelliptic classification.

For double covers, branch singularities of multiplicity 2 and 3 that never
lead to anything of multiplicity 4 or more contribute nothing to the Horikawa
index, so sequences are abbreviated to their essential parts.  The essential
part of a root diagram falls into 25 cells (9 of type 0, 16 of type 1), and
the twelve fiber types 0, I, ..., XI are read off the cell together with the
chain structure of the essential continuations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .branch_sim import realize_sequence
from .diagram_core import (
    AbstractDiagram,
    Column,
    CoverParams,
    derive_mults,
    make_profile,
)
from .fiber_builder import alpha_zero
from .invariants import InvariantVector, alpha_indices, epsilon_index, horikawa_index
from .sequence_engine import (
    DiagramSequence,
    expand_fork,
    fork_targets,
    generic_option_key,
)

PARAMS = CoverParams(n=2, g=3)

INF = 10 ** 9   # the paper's "infinity" index: a tangency tower of type 34

G3_FAMILIES = ("0", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI")


class UnclassifiableSequence(ValueError):
    pass


@dataclass(frozen=True, order=True)
class FiberClassG3:
    family: str
    indices: tuple[int, ...]

    def label(self) -> str:
        if not self.indices:
            return self.family
        pretty = ",".join("inf" if i == INF else str(i) for i in self.indices)
        return f"{self.family}_({pretty})"


@dataclass(frozen=True)
class ChainType:
    kind: str                   # "3-4" | "4-chain" | "5-chain" | "34"
    params: tuple[int, ...]

    def label(self) -> str:
        if self.kind == "3-4":
            return f"(3-4)^{self.params[0]}"
        if self.kind == "4-chain":
            k, l = self.params
            return f"4^{k}-(3-4)^{l}"
        if self.kind == "34":
            return "34"
        k, tail, l = self.params
        if tail == 0:
            return f"5^{k}"
        if tail == 2:
            return f"5^{k}-34"
        return f"5^{k}-4-(3-4)^{l}"


# --- essential parts -------------------------------------------------------

@dataclass(frozen=True, order=True)
class EssTree:
    mults: tuple[int, ...]
    children: tuple["EssTree", ...] = ()


@dataclass(frozen=True)
class EssentialPart:
    host_type: int
    trees: tuple[EssTree, ...]

    def cell_key(self) -> tuple:
        return (self.host_type, tuple(sorted(tree.mults for tree in self.trees)))


def strictly_negligible(mults: tuple[int, ...], row: int, host_type: int) -> bool:
    """The four positional cases in which an n=2 entry never matters."""
    m = mults[row]
    if m == 2:
        return True
    if m != 3:
        return False
    top = row == len(mults) - 1
    if not top and mults[row + 1] != 4:
        return True
    if top and host_type == 1:
        return True
    if top and row > 0 and mults[row - 1] == 3:
        return True
    return False


def _essential_entries(col: Column, host_type: int) -> tuple[int, ...]:
    return tuple(m for row, m in enumerate(col.mults)
                 if not strictly_negligible(col.mults, row, host_type))


def _column_trees(seq: DiagramSequence, mu: int, ci: int,
                  fork: dict) -> tuple[EssTree, ...]:
    d = seq.diagrams[mu]
    col = d.columns[ci]
    inherited = col.provenance[0] == "a"
    keep_rows = [row for row, m in enumerate(col.mults)
                 if not strictly_negligible(col.mults, row, d.host_type)
                 and not (inherited and row == 0)]
    mults = tuple(col.mults[row] for row in keep_rows)
    subtrees: list[EssTree] = []
    if (mu, ci) in fork:
        nu = fork[(mu, ci)]
        child = seq.diagrams[nu]
        for cj, ccol in enumerate(child.columns):
            if ccol.height:
                subtrees.extend(_column_trees(seq, nu, cj, fork))
    subtrees = [t for t in subtrees
                if max(t.mults, default=0) >= 4 or t.children]
    if not mults:
        return tuple(subtrees)
    tree = EssTree(mults=mults, children=tuple(sorted(subtrees)))
    if max(tree.mults) < 4 and not tree.children:
        return ()
    return (tree,)


def essentialize(seq: DiagramSequence) -> EssentialPart:
    """Essential part of a sequence: columns that matter for the Horikawa index.

    Entries of multiplicity 2 and strictly negligible 3s are dropped; a
    column with base multiplicity 3 is tracked only when its fork subtree
    reaches multiplicity 4 (the minimal choice of tracked singularities).
    """
    fork = seq.fork_dict()
    trees: list[EssTree] = []
    root = seq.diagrams[0]
    for ci, col in enumerate(root.columns):
        if col.height:
            trees.extend(_column_trees(seq, 0, ci, fork))
    return EssentialPart(host_type=root.host_type, trees=tuple(sorted(trees)))


# --- the 25 cells ----------------------------------------------------------

CELLS: dict[tuple, tuple[str, str]] = {
    (0, ()): ("0a", "0"),
    (0, ((3,),)): ("0b", "II"),
    (0, ((4,),)): ("0c", "II"),
    (0, ((3, 4),)): ("0d", "VI"),
    (0, ((4, 3),)): ("0e", "VIII"),
    (0, ((4, 4),)): ("0f", "IV"),
    (0, ((3,), (3,))): ("0g", "II"),
    (0, ((3,), (4,))): ("0h", "II"),
    (0, ((4,), (4,))): ("0i", "II"),
    (1, ()): ("1a", "0"),
    (1, ((4,),)): ("1b", "I"),
    (1, ((5,),)): ("1c", "I"),
    (1, ((3, 4),)): ("1d", "I"),
    (1, ((4, 4),)): ("1e", "V"),
    (1, ((5, 4),)): ("1f", "IX"),
    (1, ((5, 5),)): ("1g", "VII"),
    (1, ((4, 3, 4),)): ("1h", "X"),
    (1, ((3, 4, 3, 4),)): ("1i", "XI"),
    (1, ((5, 6),)): ("1j", "III"),
    (1, ((4,), (4,))): ("1k", "I"),
    (1, ((4,), (5,))): ("1l", "I"),
    (1, ((5,), (5,))): ("1m", "I"),
    (1, ((3, 4), (4,))): ("1n", "I"),
    (1, ((3, 4), (5,))): ("1o", "I"),
    (1, ((3, 4), (3, 4))): ("1p", "I"),
}


# --- chain analysis --------------------------------------------------------

def _pairs34(tree: EssTree) -> int:
    """Length of an alternating (3-4)^k chain rooted at a 3-entry."""
    assert tree.mults == (3,)
    assert len(tree.children) <= 1
    if not tree.children:
        return 1  # the closing 4 is forced by admissibility
    four = tree.children[0]
    assert four.mults == (4,), f"3-chain continues into {four.mults}"
    assert len(four.children) <= 1
    if not four.children:
        return 1
    return 1 + _pairs34(four.children[0])


def _end_of_four(tree: EssTree) -> int:
    """j such that a type-1-context 4 is of type 4-(3-4)^(j-1)."""
    assert tree.mults == (4,)
    assert len(tree.children) <= 1
    if not tree.children:
        return 1
    return 1 + _pairs34(tree.children[0])


def _four_spine(tree: EssTree) -> tuple[int, int]:
    """(i, j): length of a type-0 4-chain and its trailing (3-4)^j part."""
    assert tree.mults == (4,)
    count = 1
    cur = tree
    while cur.children and cur.children[0].mults == (4,):
        assert len(cur.children) == 1
        cur = cur.children[0]
        count += 1
    if not cur.children:
        return count, 0
    assert len(cur.children) == 1
    return count, _pairs34(cur.children[0])


def _five_tip(tree: EssTree) -> tuple[int, int]:
    """(#fives, end) of a 5-chain; end is 0, a finite j, or INF."""
    assert tree.mults == (5,)
    count = 1
    cur = tree
    while cur.children and cur.children[0].mults == (5,):
        assert len(cur.children) == 1
        cur = cur.children[0]
        count += 1
    if not cur.children:
        return count, 0
    assert len(cur.children) == 1
    nxt = cur.children[0]
    if nxt.mults == (3, 4):
        assert not nxt.children
        return count, INF
    return count, _end_of_four(nxt)


def chain_type(tree: EssTree) -> ChainType:
    """The taxonomy of one essential singularity and its continuation."""
    if tree.mults == (3, 4):
        return ChainType("34", ())
    if tree.mults == (3,):
        return ChainType("3-4", (_pairs34(tree),))
    if tree.mults == (4,):
        k, l = _four_spine(tree)
        return ChainType("4-chain", (k, l))
    if tree.mults == (5,):
        k, end = _five_tip(tree)
        if end == 0:
            return ChainType("5-chain", (k, 0, 0))
        if end == INF:
            return ChainType("5-chain", (k, 2, 0))
        return ChainType("5-chain", (k, 1, end - 1))
    raise UnclassifiableSequence(f"no chain taxon for {tree.mults}")


def _count_fives(part: EssentialPart) -> int:
    def rec(tree: EssTree) -> int:
        return sum(1 for m in tree.mults if m == 5) + sum(rec(c) for c in tree.children)
    return sum(rec(t) for t in part.trees)


def classify_g3(obj: DiagramSequence | EssentialPart) -> FiberClassG3:
    """Fiber type of a genus-3 hyperelliptic sequence (or essential part)."""
    part = essentialize(obj) if isinstance(obj, DiagramSequence) else obj
    key = part.cell_key()
    if key not in CELLS:
        raise UnclassifiableSequence(f"essential part {key} matches no cell")
    cell, family = CELLS[key]
    trees = {tree.mults: tree for tree in part.trees}
    by_mults = sorted(part.trees, key=lambda t: t.mults)

    if family in ("0", "IX", "X", "XI"):
        return FiberClassG3(family, ())

    if family == "I":
        i = _count_fives(part)
        ends: list[int] = []
        for tree in part.trees:
            if tree.mults == (4,):
                ends.append(_end_of_four(tree))
            elif tree.mults == (3, 4):
                assert not tree.children
                ends.append(INF)
            elif tree.mults == (5,):
                _k, end = _five_tip(tree)
                ends.append(end)
        while len(ends) < 2:
            ends.append(0)
        assert len(ends) == 2
        j, k = sorted(ends)
        return FiberClassG3("I", (i, j, k))

    if family == "II":
        i = 0
        ends: list[int] = []
        for tree in part.trees:
            if tree.mults == (4,):
                spine, l = _four_spine(tree)
                i += spine
                ends.append(l)
            else:
                ends.append(_pairs34(tree))
        while len(ends) < 2:
            ends.append(0)
        j, k = sorted(ends)
        return FiberClassG3("II", (i, j, k))

    if family in ("III", "IV"):
        tree = part.trees[0]
        assert len(tree.children) <= 1
        if not tree.children:
            return FiberClassG3(family, (0, 0))
        sub = tree.children[0]
        if sub.mults == (4,):
            return FiberClassG3(family, _four_spine(sub))
        return FiberClassG3(family, (0, _pairs34(sub)))

    if family in ("V", "VI"):
        tree = part.trees[0]
        assert len(tree.children) <= 1
        j = _pairs34(tree.children[0]) if tree.children else 0
        return FiberClassG3(family, (j,))

    if family in ("VII", "VIII"):
        tree = part.trees[0]
        assert len(tree.children) <= 1
        j = _end_of_four(tree.children[0]) if tree.children else 0
        return FiberClassG3(family, (j,))

    raise UnclassifiableSequence(family)


# --- Horikawa index --------------------------------------------------------

def horikawa_g3(cls: FiberClassG3) -> Fraction:
    """Closed form of the genus-3 Horikawa index per fiber type.

    Agrees with the general slope-equality formula (2/3) alpha_2 + epsilon on
    a representative of every class.
    """
    F = Fraction
    fam, idx = cls.family, cls.indices
    if fam == "0":
        return F(0)
    if fam == "I":
        i, j, k = idx
        base = F(2, 3) * i
        if j == 0 and k == 0:
            return base
        if j == 0 and k == INF:
            return base + F(5, 3)
        if j == 0:
            return base + F(5, 3) * k - 1
        if j == INF and k == INF:
            return base + F(10, 3)
        if k == INF:
            return base + F(5, 3) * j + F(2, 3)
        return base + F(5, 3) * (j + k) - 2
    if fam == "II":
        i, j, k = idx
        return F(2, 3) * i + F(5, 3) * (j + k)
    if fam == "III":
        i, j = idx
        return F(2, 3) * i + F(5, 3) * j + F(8, 3)
    if fam == "IV":
        i, j = idx
        return F(2, 3) * i + F(5, 3) * j + F(4, 3)
    if fam == "V":
        (j,) = idx
        return F(5, 3) * j + F(4, 3)
    if fam == "VI":
        (j,) = idx
        return F(5, 3) * j + F(5, 3)
    if fam == "VII":
        (j,) = idx
        return F(4, 3) if j == 0 else F(5, 3) * j + F(1, 3)
    if fam == "VIII":
        # j = 0 is omitted from the classification theorem's sum; the general
        # formula extends it consistently
        (j,) = idx
        return F(5, 3) * j + F(2, 3)
    if fam == "IX":
        return F(4, 3)
    if fam == "X":
        return F(7, 3)
    if fam == "XI":
        return F(10, 3)
    raise UnclassifiableSequence(fam)


def horikawa_from_configuration(seq: DiagramSequence) -> Fraction:
    """(2/3) alpha_2 + epsilon through the blow-up simulation."""
    config = realize_sequence(seq)
    alphas = alpha_indices(seq, PARAMS.n)
    v = InvariantVector(alpha_zero(config), alphas, epsilon_index(config, PARAMS.n))
    return horikawa_index(PARAMS.n, PARAMS.r, v)


# --- representative construction -------------------------------------------

ROOT_COLS = {
    # essential column -> contact profile on the ruling fiber
    (1, (4,)): {1: 3},
    (1, (5,)): {1: 4},
    (1, (3, 4)): {2: 2},
    (1, (4, 4)): {2: 3},
    (1, (5, 4)): {1: 2, 2: 2},
    (1, (5, 5)): {1: 1, 2: 3},
    (1, (4, 3, 4)): {1: 1, 3: 2},
    (1, (3, 4, 3, 4)): {4: 2},
    (1, (5, 6)): {2: 4},
    (0, (3,)): {1: 3},
    (0, (4,)): {1: 4},
    (0, (3, 4)): {2: 3},
    (0, (4, 3)): {1: 1, 2: 3},
    (0, (4, 4)): {2: 4},
}


def _root_diagram(host_type: int, ess_cols: list[tuple[int, ...]],
                  roles: list) -> tuple[DiagramSequence, dict[int, tuple]]:
    """Assemble a root diagram from essential columns plus negligible filler."""
    cols = []
    role_of: dict[int, tuple] = {}
    lab = 0
    budget = PARAMS.r
    for ess, role in zip(ess_cols, roles):
        profile = make_profile(ROOT_COLS[(host_type, ess)])
        mults = derive_mults(profile, host_type, 2)
        labels = tuple(range(lab, lab + len(mults)))
        lab += len(mults)
        cols.append(Column(profile=profile, mults=mults, labels=labels))
        if role is not None:
            role_of[labels[0]] = role
        budget -= sum(k * c for k, c in profile)
    assert budget >= 0, "essential columns exceed the branch degree"
    for _ in range(budget):
        if host_type == 1:
            profile = make_profile({1: 1})
            cols.append(Column(profile=profile, mults=(2,), labels=(lab,)))
            lab += 1
        else:
            cols.append(Column(profile=make_profile({1: 1}), mults=(), labels=()))
    root = AbstractDiagram(host_type=host_type, t=PARAMS.r, columns=tuple(cols))
    return DiagramSequence(n=2, diagrams=(root,), fork_map=()), role_of


def _fresh_essential(child: AbstractDiagram) -> list[tuple[int, tuple]]:
    """(column index, essential entries) of fresh essential columns."""
    out = []
    for ci, col in enumerate(child.columns):
        if not col.height or col.provenance[0] != "fresh":
            continue
        ess = _essential_entries(col, child.host_type)
        if ess:
            out.append((ci, ess))
    return out


def _role_step(role: tuple | None) -> tuple[list, list]:
    """Wanted fresh essential columns and their continuation roles."""
    if role is None:
        return [], []
    kind = role[0]
    if kind == "pass":
        return [], []
    if kind is None:
        return [], []
    if kind == "chain5":
        k, end = role[1], role[2]
        if k > 1:
            return [(5,)], [("chain5", k - 1, end)]
        if end == 0:
            return [], []
        if end == INF:
            return [(3, 4)], [None]
        return [(4,)], [("four", end - 1)]
    if kind == "four":
        l = role[1]
        return ([(3,)], [("three", l)]) if l >= 1 else ([], [])
    if kind == "three":
        l = role[1]
        return [(4,)], [("four", l - 1)]
    if kind == "chain4":
        left, end = role[1], role[2]
        if left >= 1:
            return [(4,)], [("chain4", left - 1, end)]
        return ([(3,)], [("three", end)]) if end >= 1 else ([], [])
    if kind == "end4":
        j = role[1]
        return ([(4,)], [("four", j - 1)]) if j >= 1 else ([], [])
    raise ValueError(role)


WANT_PROFILES = {
    # child host type -> essential column -> fresh profile
    (1, (4,)): {1: 3},
    (1, (5,)): {1: 4},
    (1, (3, 4)): {2: 2},
    (0, (3,)): {1: 3},
    (0, (4,)): {1: 4},
}


def _drive(seq: DiagramSequence, role_of: dict[int, tuple]) -> DiagramSequence:
    """Resolve every pending fork, steering by the roles of the base points."""
    while True:
        pending = seq.pending_forks()
        if not pending:
            return seq
        at = pending[0]
        mu, ci = at
        base = seq.diagrams[mu].columns[ci].labels[0]
        role = role_of.pop(base, None)
        want, next_roles = _role_step(role)
        options = fork_targets(seq, at)
        best = None
        for child in sorted(options, key=_option_key):
            fresh = _fresh_essential(child)
            if sorted(ess for _ci, ess in fresh) == sorted(want):
                best = child
                break
        assert best is not None, f"no fork option with essential content {want}"
        child = best
        nu = len(seq.diagrams)
        for (cj, _ess), nrole in zip(_fresh_essential(child), next_roles):
            if nrole is not None:
                role_of[child.columns[cj].labels[0]] = nrole
        if role is not None and role[0] == "pass":
            acols = [cj for cj, col in enumerate(child.columns)
                     if col.provenance[0] == "a"]
            assert len(acols) == 1
            role_of[child.columns[acols[0]].labels[0]] = role[1]
        seq = expand_fork(seq, at, child)


def _option_key(child: AbstractDiagram) -> tuple:
    return generic_option_key(child)


def build_representative(cls: FiberClassG3) -> DiagramSequence:
    """A full admissible sequence realizing the class with generic decorations."""
    fam, idx = cls.family, cls.indices
    if fam == "0":
        seq, roles = _root_diagram(0, [], [])
        return _drive(seq, roles)
    if fam == "IX":
        seq, roles = _root_diagram(1, [(5, 4)], [None])
        return _drive(seq, roles)
    if fam == "X":
        seq, roles = _root_diagram(1, [(4, 3, 4)], [None])
        return _drive(seq, roles)
    if fam == "XI":
        seq, roles = _root_diagram(1, [(3, 4, 3, 4)], [None])
        return _drive(seq, roles)
    if fam == "III":
        i, j = idx
        role = ("pass", _chain4_role(i, j))
        seq, roles = _root_diagram(1, [(5, 6)], [role])
        return _drive(seq, roles)
    if fam == "IV":
        i, j = idx
        role = ("pass", _chain4_role(i, j))
        seq, roles = _root_diagram(0, [(4, 4)], [role])
        return _drive(seq, roles)
    if fam == "V":
        (j,) = idx
        seq, roles = _root_diagram(1, [(4, 4)],
                                   [("pass", ("chain4", 0, j))])
        return _drive(seq, roles)
    if fam == "VI":
        (j,) = idx
        seq, roles = _root_diagram(0, [(3, 4)],
                                   [("pass", ("chain4", 0, j))])
        return _drive(seq, roles)
    if fam == "VII":
        (j,) = idx
        seq, roles = _root_diagram(1, [(5, 5)],
                                   [("pass", ("end4", j))])
        return _drive(seq, roles)
    if fam == "VIII":
        (j,) = idx
        seq, roles = _root_diagram(0, [(4, 3)],
                                   [("pass", ("end4", j))])
        return _drive(seq, roles)
    if fam == "I":
        i, j, k = idx
        cols: list[tuple[int, ...]] = []
        roles: list = []
        ends = [j, k]
        if i >= 1:
            cols.append((5,))
            roles.append(("chain5", i, ends.pop()))
        for end in ends:
            if end == INF:
                cols.append((3, 4))
                roles.append(None)
            elif end >= 1:
                cols.append((4,))
                roles.append(("four", end - 1))
        assert cols, "family I needs a five or an end singularity"
        seq, role_of = _root_diagram(1, cols, roles)
        return _drive(seq, role_of)
    if fam == "II":
        i, j, k = idx
        cols = []
        roles = []
        ends = [j, k]
        if i >= 1:
            cols.append((4,))
            roles.append(("chain4", i - 1, ends.pop()))
        for end in ends:
            if end >= 1:
                cols.append((3,))
                roles.append(("three", end))
        assert cols, "family II needs a four-chain or a (3-4) chain"
        seq, role_of = _root_diagram(0, cols, roles)
        return _drive(seq, role_of)
    raise UnclassifiableSequence(fam)


def _chain4_role(i: int, j: int) -> tuple:
    return ("chain4", i, j)


def expand_essential(part: EssentialPart) -> DiagramSequence:
    """A full sequence whose essential part is the given one.

    Forced parity entries (the blank double points) are restored with
    generic placements, so invariants can be computed on the result.
    """
    cls = classify_g3(part)
    seq = build_representative(cls)
    if essentialize(seq) != part:
        raise ValueError("essential sequence inadmissible")
    return seq


# --- index grids ------------------------------------------------------------

def index_grid(family: str, max_index: int = 3) -> list[FiberClassG3]:
    """All classes of one family with finite indices <= max_index, plus the
    infinite cases of family I."""
    M = max_index
    out: list[FiberClassG3] = []
    if family in ("0", "IX", "X", "XI"):
        return [FiberClassG3(family, ())]
    if family == "I":
        ends = list(range(0, M + 1)) + [INF]
        for i in range(0, M + 1):
            for j in ends:
                for k in ends:
                    if (j, k) != tuple(sorted((j, k))) or (i, j, k) == (0, 0, 0):
                        continue
                    out.append(FiberClassG3("I", (i, j, k)))
        return out
    if family == "II":
        for i in range(0, M + 1):
            for j in range(0, M + 1):
                for k in range(j, M + 1):
                    if (i, j, k) == (0, 0, 0):
                        continue
                    out.append(FiberClassG3("II", (i, j, k)))
        return out
    if family in ("III", "IV"):
        return [FiberClassG3(family, (i, j))
                for i in range(0, M + 1) for j in range(0, M + 1)]
    if family in ("V", "VI"):
        return [FiberClassG3(family, (j,)) for j in range(0, M + 1)]
    if family == "VII":
        return [FiberClassG3(family, (j,)) for j in range(0, M + 1)]
    if family == "VIII":
        return [FiberClassG3(family, (j,)) for j in range(1, M + 1)]
    raise UnclassifiableSequence(family)


def census_rows(max_index: int = 3) -> list[tuple[FiberClassG3, Fraction]]:
    rows = []
    for family in G3_FAMILIES:
        for cls in index_grid(family, max_index):
            rows.append((cls, horikawa_g3(cls)))
    return rows


# --- root cell census --------------------------------------------------------

def _decoration(col: Column, host_type: int) -> str:
    """Strictly negligible content stacked on top of the essential entries."""
    ess_rows = [r for r in range(col.height)
                if not strictly_negligible(col.mults, r, host_type)]
    top = max(ess_rows)
    if top + 1 >= col.height:
        return "0"
    return "II" if col.mults[top + 1] == 2 else "III"


def root_cell_census() -> dict[str, set[tuple[str, ...]]]:
    """Essential cells attainable by ruling-fiber diagrams, with decorations.

    Pure multiplicity-3 columns are tracked only when their continuation
    reaches multiplicity 4, so they enter the cells optionally.
    """
    from .sequence_engine import enumerate_root_diagrams

    out: dict[str, set[tuple[str, ...]]] = {}
    for ht in (0, 1):
        for root in enumerate_root_diagrams(PARAMS, ht):
            mandatory, optional = [], []
            for col in root.columns:
                if not col.height:
                    continue
                ess = _essential_entries(col, ht)
                if not ess:
                    continue
                item = (ess, _decoration(col, ht))
                (mandatory if max(ess) >= 4 else optional).append(item)
            for mask in range(1 << len(optional)):
                chosen = mandatory + [optional[i] for i in range(len(optional))
                                      if mask >> i & 1]
                chosen.sort()
                key = (ht, tuple(e for e, _d in chosen))
                if key not in CELLS:
                    raise UnclassifiableSequence(f"root essential part {key} not a cell")
                cell, _fam = CELLS[key]
                out.setdefault(cell, set()).add(tuple(d for _e, d in chosen))
    return out

"""Enumeration of admissible sequences of singularity diagrams.

A sequence starts at the diagram of a ruling fiber and forks: every column of
positive height is blown up at its base point, producing the diagram of the
new exceptional curve.  The connection rules say what the child diagram must
contain for every occurrence of the forked point in earlier diagrams:

  (a) occurrence below the top of a tower: the next tower entry reappears as
      a bottom entry of the child, carried by the branches that continue up
      the tower (the host curve adds a transverse unit when it lies in the
      branch locus; branches ending there may be tangent to the new curve);
  (b) occurrence at the top of a tower on a branch-contained host: the host
      crosses the new curve transversally at a smooth point;
  (c) top of a tower on a type-0 host with residual tangency >= 2: the
      residual branch crosses transversally;
  (d) residual tangency exactly 1: the residual branch crosses with a free
      contact order s >= 1.

All remaining content of the child is free, subject only to the t-balance
and to column validity.  Branches that separated from their host can never
meet its proper transform again, so free content always sits at fresh points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from .diagram_core import (
    FRESH,
    AbstractDiagram,
    Column,
    CoverParams,
    InadmissibleProfile,
    Profile,
    derive_mults,
    make_profile,
    multiplicity_cap,
    profile_tail,
    profile_units,
    profile_weight,
    validate_diagram,
)


@dataclass(frozen=True)
class Bounds:
    """Search bounds: fork-tree depth and same-shape chain repetitions."""

    max_depth: int = 8
    max_chain: int = 3


@dataclass(frozen=True)
class DiagramSequence:
    n: int
    diagrams: tuple[AbstractDiagram, ...]
    fork_map: tuple[tuple[tuple[int, int], int], ...]

    def fork_dict(self) -> dict[tuple[int, int], int]:
        return dict(self.fork_map)

    def fork_parent(self) -> tuple[int, ...]:
        parent = [-1] * len(self.diagrams)
        for (mu, _ci), nu in self.fork_map:
            parent[nu] = mu
        return tuple(parent)

    def depths(self) -> tuple[int, ...]:
        parent = self.fork_parent()
        depth = [0] * len(self.diagrams)
        for idx in range(1, len(self.diagrams)):
            depth[idx] = depth[parent[idx]] + 1
        return tuple(depth)

    def pending_forks(self) -> list[tuple[int, int]]:
        done = {src for src, _nu in self.fork_map}
        out = []
        for mu, d in enumerate(self.diagrams):
            for ci, col in enumerate(d.columns):
                if col.height and (mu, ci) not in done:
                    out.append((mu, ci))
        return out

    def is_complete(self) -> bool:
        return not self.pending_forks()

    def max_label(self) -> int:
        labs = [lab for d in self.diagrams for col in d.columns for lab in col.labels]
        return max(labs, default=-1)

    def occurrences(self, label: int) -> list[tuple[int, int, int]]:
        out = []
        for mu, d in enumerate(self.diagrams):
            for ci, col in enumerate(d.columns):
                for row, lab in enumerate(col.labels):
                    if lab == label:
                        out.append((mu, ci, row))
        return out


# --- content pieces ------------------------------------------------------

def _partitions(total: int, maxpart: int | None = None):
    if total == 0:
        yield ()
        return
    if maxpart is None or maxpart > total:
        maxpart = total
    for first in range(maxpart, 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _piece_catalog(n: int, host_type: int, weight: int) -> tuple[tuple[Profile, bool], ...]:
    """All valid fresh content pieces of a given t-contribution.

    A piece is (profile, is_height0).  Height-0 pieces (single smooth branch
    tangent to the host) exist only on type-0 hosts; every other profile
    yields a column whose multiplicities must stay in nZ ∪ nZ+1.
    """
    out = []
    for part in _partitions(weight):
        profile = make_profile(_count(part))
        units = profile_units(profile)
        m1 = units + host_type
        if m1 < 2:
            if host_type == 0 and units == 1:
                out.append((profile, True))
            continue
        try:
            derive_mults(profile, host_type, n)
        except InadmissibleProfile:
            continue
        out.append((profile, False))
    return tuple(out)


def _count(items) -> dict:
    agg: dict[int, int] = {}
    for x in items:
        agg[x] = agg.get(x, 0) + 1
    return agg


def _fillings(n: int, host_type: int, budget: int):
    """Multisets of fresh pieces with total weight exactly ``budget``."""
    catalog: list[tuple[int, Profile, bool]] = []
    for w in range(1, budget + 1):
        for profile, is_h0 in _piece_catalog(n, host_type, w):
            catalog.append((w, profile, is_h0))

    def rec(start: int, rem: int):
        if rem == 0:
            yield ()
            return
        for i in range(start, len(catalog)):
            w, profile, is_h0 = catalog[i]
            if w > rem:
                continue
            for rest in rec(i, rem - w):
                yield ((profile, is_h0),) + rest

    yield from rec(0, budget)


# --- root diagrams -------------------------------------------------------

def enumerate_root_diagrams(params: CoverParams, host_type: int) -> list[AbstractDiagram]:
    """All valid ruling-fiber diagrams with t = r and capped base multiplicities."""
    cap = multiplicity_cap(params.g, params.n, host_type)
    roots = []
    for filling in _fillings(params.n, host_type, params.r):
        cols = []
        next_label = 0
        ok = True
        for profile, is_h0 in sorted(filling, key=lambda p: (profile_weight(p[0]), p[0], p[1])):
            if is_h0:
                cols.append(Column(profile=profile, mults=(), labels=()))
                continue
            mults = derive_mults(profile, host_type, params.n)
            if mults[0] > cap:
                ok = False
                break
            labels = tuple(range(next_label, next_label + len(mults)))
            next_label += len(mults)
            cols.append(Column(profile=profile, mults=mults, labels=labels))
        if not ok:
            continue
        d = AbstractDiagram(host_type=host_type, t=params.r, columns=tuple(cols))
        assert not validate_diagram(d, params.n), validate_diagram(d, params.n)
        roots.append(d)
    return roots


# --- fork expansion ------------------------------------------------------

def _bounded_multisets(count: int, total_max: int):
    """Non-increasing tuples of ``count`` integers >= 1 with sum <= total_max."""
    if count == 0:
        yield ()
        return
    if total_max < count:
        return

    def rec(k: int, cap: int, rem: int):
        if k == 0:
            yield ()
            return
        for first in range(min(cap, rem - (k - 1)), 0, -1):
            for rest in rec(k - 1, first, rem - first):
                yield (first,) + rest

    yield from rec(count, total_max - count + 1, total_max)


_TEMPLATE_CACHE: dict[tuple, tuple] = {}


def _fork_descriptors(seq: DiagramSequence, at: tuple[int, int], depth: tuple[int, ...]):
    """Occurrence data of the forked point, and the inherited labels."""
    mu, ci = at
    col = seq.diagrams[mu].columns[ci]
    if not col.height:
        raise ValueError("cannot fork a height-0 column")
    x = col.labels[0]
    descs = []
    labels = []
    for mu_p, ci_p, row in seq.occurrences(x):
        colp = seq.diagrams[mu_p].columns[ci_p]
        up = depth[mu] - depth[mu_p]
        assert up >= 0, "occurrences live on the fork path"
        descs.append((seq.diagrams[mu_p].host_type, colp.profile, colp.mults, row, up))
        labels.append(colp.labels[row + 1] if row < colp.height - 1 else None)
    return col.mults[0], tuple(descs), labels


def _fork_templates(n: int, m: int, descs: tuple) -> tuple:
    """Label-free child diagram templates for a fork context (memoized).

    A template is a tuple of column specs (kind, profile, provenance) where
    kind is the occurrence index for inherited columns and None otherwise.
    """
    key = (n, m, descs)
    hit = _TEMPLATE_CACHE.get(key)
    if hit is not None:
        return hit
    t = m
    child_type = m % n
    forced_fixed: list[tuple[Profile, tuple]] = []
    acol_specs: list[dict] = []
    d_items: list[tuple] = []
    for occ_idx, (host_type_p, profile_p, mults_p, row, up) in enumerate(descs):
        host_in = host_type_p == 1
        height_p = len(mults_p)
        if row < height_p - 1:
            b_cont = profile_tail(profile_p, row + 3)
            b_end = sum(cnt for k, cnt in profile_p if k == row + 2)
            acol_specs.append({
                "occ": occ_idx,
                "mult": mults_p[row + 1],
                "base1": (1 if host_in else 0) + b_cont,
                "b_end": b_end,
                "prov": ("a", up),
            })
        else:
            if host_in:
                assert child_type == 0, "branch-contained tops fork to type-0 diagrams"
                forced_fixed.append((make_profile({1: 1}), ("b", up)))
            else:
                ann = max(0, max(k for k, cnt in profile_p if cnt) - height_p)
                if ann >= 2:
                    forced_fixed.append((make_profile({1: 1}), ("c", up)))
                elif ann == 1:
                    d_items.append(("d", up))

    fixed_weight = sum(profile_weight(p) for p, _ in forced_fixed)
    results = []

    def emit(acol_choices, d_contacts, free):
        cols = []
        for spec, contacts in zip(acol_specs, acol_choices):
            profile = make_profile([(1, spec["base1"])] + [(c, 1) for c in contacts])
            try:
                mults = derive_mults(profile, child_type, n)
            except InadmissibleProfile:
                return
            if mults[0] != spec["mult"]:
                return
            cols.append((spec["occ"], profile, spec["prov"]))
        for profile, prov in forced_fixed:
            cols.append((None, profile, prov))
        for prov, s in zip(d_items, d_contacts):
            cols.append((None, make_profile({s: 1}), prov))
        for profile, _is_h0 in free:
            cols.append((None, profile, FRESH))
        template = tuple(cols)
        dummy = [-(i + 1) for i in range(len(descs))]
        if validate_diagram(_instantiate(n, t, template, dummy, 0), n):
            return
        results.append(template)

    def rec_d(idx: int, budget: int, chosen_a, chosen_d):
        if idx == len(d_items):
            for free in _fillings(n, child_type, budget):
                emit(chosen_a, chosen_d, free)
            return
        rest = len(d_items) - idx - 1
        for s in range(1, budget - rest + 1):
            rec_d(idx + 1, budget - s, chosen_a, chosen_d + [s])

    def rec_acols(idx: int, budget: int, chosen):
        if idx == len(acol_specs):
            rec_d(0, budget, chosen, [])
            return
        spec = acol_specs[idx]
        min_rest = sum(s["base1"] + s["b_end"] for s in acol_specs[idx + 1:])
        min_rest += len(d_items)
        base_w = spec["base1"]
        for contacts in _bounded_multisets(spec["b_end"], budget - base_w - min_rest):
            rec_acols(idx + 1, budget - base_w - sum(contacts), chosen + [contacts])

    rec_acols(0, t - fixed_weight, [])
    out = tuple(results)
    _TEMPLATE_CACHE[key] = out
    return out


def _instantiate(n: int, t: int, template: tuple, inherited_labels: list,
                 next_label: int) -> AbstractDiagram:
    child_type = t % n
    cols = []
    lab = next_label
    for occ, profile, prov in template:
        mults = derive_mults(profile, child_type, n) if profile_units(profile) + child_type >= 2 else ()
        if occ is not None:
            labels = (inherited_labels[occ],) + tuple(range(lab, lab + len(mults) - 1))
            lab += len(mults) - 1
        else:
            labels = tuple(range(lab, lab + len(mults)))
            lab += len(mults)
        cols.append(Column(profile=profile, mults=mults, labels=labels, provenance=prov))
    return AbstractDiagram(host_type=child_type, t=t, columns=tuple(cols))


def fork_targets(seq: DiagramSequence, at: tuple[int, int]) -> list[AbstractDiagram]:
    """Enumerate every admissible child diagram for the given fork."""
    m, descs, labels = _fork_descriptors(seq, at, seq.depths())
    next_label = seq.max_label() + 1
    return [_instantiate(seq.n, m, template, labels, next_label)
            for template in _fork_templates(seq.n, m, descs)]


def expand_fork(seq: DiagramSequence, at: tuple[int, int], choice: AbstractDiagram) -> DiagramSequence:
    """Append a fork child.  The choice must come from ``fork_targets``."""
    if at in seq.fork_dict():
        raise ValueError(f"column {at} already forked")
    bad = validate_diagram(choice, seq.n)
    if bad:
        raise ValueError(f"choice violates diagram rules: {bad}")
    mu, ci = at
    if choice.t != seq.diagrams[mu].columns[ci].mults[0]:
        raise ValueError("choice violates t-balance with the forked point")
    return DiagramSequence(
        n=seq.n,
        diagrams=seq.diagrams + (choice,),
        fork_map=seq.fork_map + ((at, len(seq.diagrams)),),
    )


def _shape(d: AbstractDiagram) -> tuple:
    return (d.host_type, d.t, tuple(sorted(col.shape() for col in d.columns)))


def iter_sequences(
    params: CoverParams,
    bounds: Bounds,
    host_types: tuple[int, ...] = (0, 1),
    max_point_depth: int | None = None,
):
    """Yield complete admissible sequences within the bounds (with duplicates
    only across column-permutation symmetry; dedup by canonical key)."""
    n = params.n

    def dfs(seq, depths, runlens, pending):
        if not pending:
            if max_point_depth is None or point_depth(seq) <= max_point_depth:
                yield seq
            return
        at, rest = pending[0], pending[1:]
        mu = at[0]
        if depths[mu] + 1 > bounds.max_depth:
            return
        parent_shape = _shape(seq.diagrams[mu])
        m, descs, labels = _fork_descriptors(seq, at, depths)
        next_label = seq.max_label() + 1
        for template in _fork_templates(n, m, descs):
            child = _instantiate(n, m, template, labels, next_label)
            run = runlens[mu] + 1 if _shape(child) == parent_shape else 1
            if run > bounds.max_chain + 1:
                continue
            nu = len(seq.diagrams)
            nxt = DiagramSequence(n=n, diagrams=seq.diagrams + (child,),
                                  fork_map=seq.fork_map + ((at, nu),))
            new_pending = rest + tuple(
                (nu, ci) for ci, col in enumerate(child.columns) if col.height)
            yield from dfs(nxt, depths + (depths[mu] + 1,), runlens + (run,), new_pending)

    for host_type in host_types:
        for root in enumerate_root_diagrams(params, host_type):
            seq = DiagramSequence(n=n, diagrams=(root,), fork_map=())
            pending = tuple((0, ci) for ci, col in enumerate(root.columns) if col.height)
            yield from dfs(seq, (0,), (1,), pending)


def enumerate_sequences(
    params: CoverParams,
    bounds: Bounds,
    host_types: tuple[int, ...] = (0, 1),
    max_point_depth: int | None = None,
) -> list[DiagramSequence]:
    """All complete admissible sequences within the bounds, one per key,
    canonicalized and sorted."""
    found: dict[tuple, DiagramSequence] = {}
    for seq in iter_sequences(params, bounds, host_types, max_point_depth):
        key = canonical_key(seq)
        if key not in found:
            found[key] = seq
    return [canonicalize(found[key]) for key in sorted(found)]


def enumerate_keys(
    params: CoverParams,
    bounds: Bounds,
    host_types: tuple[int, ...] = (0, 1),
    max_point_depth: int | None = None,
) -> set[tuple]:
    """Canonical keys of all sequences within the bounds (memory-light)."""
    return {canonical_key(seq)
            for seq in iter_sequences(params, bounds, host_types, max_point_depth)}


def generic_option_key(child: AbstractDiagram) -> tuple:
    """Sort key preferring generic placements: no free tangencies, maximal
    scatter of the separating branches."""
    excess = sum((k - 1) * cnt for col in child.columns for k, cnt in col.profile)
    heights = sum(col.height for col in child.columns)
    return (excess, heights, -len(child.columns),
            tuple(sorted((col.mults, col.profile, col.provenance) for col in child.columns)))


def complete_generic(seq: DiagramSequence) -> DiagramSequence:
    """Resolve every pending fork with the most generic admissible choice."""
    while True:
        pending = seq.pending_forks()
        if not pending:
            return seq
        at = pending[0]
        options = fork_targets(seq, at)
        assert options, f"no admissible continuation at {at}"
        seq = expand_fork(seq, at, min(options, key=generic_option_key))


def point_depth(seq: DiagramSequence) -> int:
    """Largest blow-up depth of any point: diagram depth plus row offsets."""
    depth = seq.depths()
    best = 0
    for mu, d in enumerate(seq.diagrams):
        for col in d.columns:
            if col.height:
                best = max(best, depth[mu] + col.height)
    return best


# --- canonical form ------------------------------------------------------

def canonical_key(seq: DiagramSequence) -> tuple:
    """Total-order key: equal keys iff the sequences are equivalent.

    Columns are compared by (height, mults, profile, provenance) together
    with the full key of their fork subtree, so equivalence respects the
    fork map and the entry sharing between diagrams.
    """
    children = seq.fork_dict()

    def diagram_key(idx: int) -> tuple:
        d = seq.diagrams[idx]
        cols = []
        for ci, col in enumerate(d.columns):
            sub = (diagram_key(children[(idx, ci)]),) if (idx, ci) in children else ()
            cols.append((col.height, col.mults, col.profile, col.provenance, sub))
        return (d.host_type, d.t, tuple(sorted(cols)))

    return diagram_key(0)


def canonicalize(seq: DiagramSequence) -> DiagramSequence:
    """Reorder columns and diagrams deterministically and relabel points."""
    children = seq.fork_dict()

    def diagram_key(idx: int) -> tuple:
        d = seq.diagrams[idx]
        cols = []
        for ci, col in enumerate(d.columns):
            sub = (diagram_key(children[(idx, ci)]),) if (idx, ci) in children else ()
            cols.append((col.height, col.mults, col.profile, col.provenance, sub))
        return (d.host_type, d.t, tuple(sorted(cols)))

    new_diagrams: list[AbstractDiagram] = []
    new_forks: list[tuple[tuple[int, int], int]] = []
    label_map: dict[int, int] = {}

    def relabel(lab: int) -> int:
        if lab not in label_map:
            label_map[lab] = len(label_map)
        return label_map[lab]

    def visit(idx: int) -> int:
        d = seq.diagrams[idx]
        order = sorted(
            range(len(d.columns)),
            key=lambda ci: (
                d.columns[ci].height,
                d.columns[ci].mults,
                d.columns[ci].profile,
                d.columns[ci].provenance,
                (diagram_key(children[(idx, ci)]),) if (idx, ci) in children else (),
            ),
        )
        cols = []
        for ci in order:
            col = d.columns[ci]
            cols.append(
                Column(
                    profile=col.profile,
                    mults=col.mults,
                    labels=tuple(relabel(lab) for lab in col.labels),
                    provenance=col.provenance,
                )
            )
        my_idx = len(new_diagrams)
        new_diagrams.append(AbstractDiagram(host_type=d.host_type, t=d.t, columns=tuple(cols)))
        for new_ci, ci in enumerate(order):
            if (idx, ci) in children:
                sub_idx = visit(children[(idx, ci)])
                new_forks.append(((my_idx, new_ci), sub_idx))
        return my_idx

    visit(0)
    return DiagramSequence(n=seq.n, diagrams=tuple(new_diagrams), fork_map=tuple(sorted(new_forks)))


# --- serialization -------------------------------------------------------

def sequence_to_obj(seq: DiagramSequence) -> dict:
    seq = canonicalize(seq)
    diagrams = []
    for d in seq.diagrams:
        cols = []
        for col in d.columns:
            obj = {
                "mults": list(col.mults),
                "profile": {str(k): cnt for k, cnt in col.profile},
                "labels": list(col.labels),
                "provenance": list(col.provenance),
            }
            if col.annotation:
                obj["top_annotation"] = col.annotation
            cols.append(obj)
        diagrams.append({"host_type": d.host_type, "t": d.t, "columns": cols})
    forks = [{"from": [mu, ci], "to": nu} for (mu, ci), nu in seq.fork_map]
    return {"n": seq.n, "diagrams": diagrams, "fork_map": forks}


def sequence_to_json(seq: DiagramSequence) -> str:
    return json.dumps(sequence_to_obj(seq), sort_keys=True)


def sequence_from_obj(obj: dict) -> DiagramSequence:
    n = obj["n"]
    diagrams = []
    for dobj in obj["diagrams"]:
        cols = []
        for cobj in dobj["columns"]:
            profile = make_profile({int(k): v for k, v in cobj["profile"].items()})
            mults = tuple(cobj["mults"])
            if mults != derive_mults(profile, dobj["host_type"], n):
                raise ValueError("stored mults disagree with profile")
            cols.append(
                Column(
                    profile=profile,
                    mults=mults,
                    labels=tuple(cobj["labels"]),
                    provenance=tuple(cobj["provenance"]),
                )
            )
        diagrams.append(AbstractDiagram(host_type=dobj["host_type"], t=dobj["t"], columns=tuple(cols)))
    forks = tuple((tuple(f["from"]), f["to"]) for f in obj["fork_map"])
    return DiagramSequence(n=n, diagrams=tuple(diagrams), fork_map=forks)


def sequence_from_json(text: str) -> DiagramSequence:
    return sequence_from_obj(json.loads(text))

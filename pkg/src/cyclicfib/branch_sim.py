"""Explicit blow-up simulation of branch configurations.

This is the brute-force oracle: the branch curve near one ruling fiber is
modeled as a weighted cluster of infinitely near points.  A point stores the
local multiplicity of the horizontal branch locus (its weight), the point it
is infinitely near to, and which old curve it follows (node points sit on the
proper transform of that curve and on the new exceptional curve).  Weight-one
points that never need blowing up are kept as data: chains of them encode
tangencies and drive the ramification bookkeeping.

The blow-up transform subtracts n*[m/n] exceptional components from the
branch divisor, so the exceptional curve joins the branch locus exactly when
m lies in nZ+1.  Resolving repeats blow-ups until every remaining point is a
smooth point of the branch locus away from its vertical components.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from .diagram_core import (
    AbstractDiagram,
    Column,
    derive_mults,
    make_profile,
    profile_tail,
    profile_units,
)
from .sequence_engine import DiagramSequence


class UnrealizableConfiguration(ValueError):
    """Raised when a configuration cannot come from an n-divisible branch curve."""


@dataclass
class Curve:
    cid: int
    self_int: int
    mult: int
    in_branch: bool
    k_deg: int                      # K . C, maintained through blow-ups
    created_from: int | None = None  # point id, None for the ruling fiber


@dataclass
class Point:
    pid: int
    weight: int
    parent: int | None              # infinitely near to this point
    follows: int | None             # curve id whose proper transform it sits on
    depth: int
    blown: bool = False
    mult: int = 0                   # m at blow-up time


class BranchConfiguration:
    """Branch locus data over a single ruling fiber."""

    def __init__(self, n: int, fiber_in_branch: bool):
        self.n = n
        self.curves: dict[int, Curve] = {}
        self.points: dict[int, Point] = {}
        self.adjacency: dict[frozenset[int], int] = {}
        self.trace: list[dict] = []
        self._next_curve = 0
        self._next_point = 0
        self._exc: dict[int, int] = {}
        self.fiber = self.add_curve(self_int=0, mult=1, in_branch=fiber_in_branch, k_deg=-2)

    def copy(self) -> "BranchConfiguration":
        new = object.__new__(BranchConfiguration)
        new.n = self.n
        new.curves = {cid: replace(c) for cid, c in self.curves.items()}
        new.points = {pid: replace(p) for pid, p in self.points.items()}
        new.adjacency = dict(self.adjacency)
        new.trace = list(self.trace)
        new._next_curve = self._next_curve
        new._next_point = self._next_point
        new._exc = dict(self._exc)
        new.fiber = self.fiber
        return new

    # -- construction --

    def add_curve(self, self_int: int, mult: int, in_branch: bool, k_deg: int,
                  created_from: int | None = None) -> int:
        cid = self._next_curve
        self._next_curve += 1
        self.curves[cid] = Curve(cid, self_int, mult, in_branch, k_deg, created_from)
        return cid

    def add_point(self, weight: int, parent: int | None, follows: int | None) -> int:
        pid = self._next_point
        self._next_point += 1
        depth = 1 if parent is None else self.points[parent].depth + 1
        self.points[pid] = Point(pid, weight, parent, follows, depth)
        return pid

    # -- incidence (fully derived) --

    def point_curves(self, pid: int) -> tuple[int, ...]:
        p = self.points[pid]
        if p.parent is None:
            return (self.fiber,)
        if self.points[p.parent].blown:
            eid = self._exc[p.parent]
            return (p.follows, eid) if p.follows is not None else (eid,)
        return (p.follows,) if p.follows is not None else ()

    def point_mult(self, pid: int) -> int:
        p = self.points[pid]
        return p.weight + sum(1 for cid in self.point_curves(pid)
                              if self.curves[cid].in_branch)

    def ready(self, pid: int) -> bool:
        p = self.points[pid]
        return p.parent is None or self.points[p.parent].blown

    def children(self, pid: int) -> list[Point]:
        return [q for q in self.points.values() if q.parent == pid]

    def followers(self, cid: int) -> list[Point]:
        return [q for q in self.points.values() if q.follows == cid]

    def contact(self, pid: int, cid: int) -> int:
        """Contact order with curve cid of the branch chain starting at pid."""
        contact = 1
        cur = pid
        while True:
            nxt = [q for q in self.points.values()
                   if q.parent == cur and q.follows == cid]
            if not nxt:
                return contact
            contact += 1
            cur = nxt[0].pid

    def crossing_starts(self, cid: int) -> list[Point]:
        """Unblown branch points where a branch chain crosses component cid."""
        out = []
        for p in self.points.values():
            if p.blown or not p.weight or cid not in self.point_curves(p.pid):
                continue
            if p.follows == cid and p.parent is not None and not self.points[p.parent].blown:
                continue  # interior of a tangency chain, counted from its start
            out.append(p)
        return out

    def branch_degree(self, cid: int) -> int:
        """Local intersection of the resolved branch curve with component cid."""
        deg = 0
        for pair, cnt in self.adjacency.items():
            if cid in pair and cnt > 0:
                other = next(c for c in pair if c != cid)
                if self.curves[other].in_branch:
                    deg += cnt
        for p in self.crossing_starts(cid):
            deg += p.weight * self.contact(p.pid, cid)
        return deg

    def exceptional_of(self, pid: int) -> int:
        return self._exc[pid]

    # -- blow-up --

    def blow_up(self, pid: int) -> int:
        p = self.points[pid]
        if p.blown:
            raise ValueError(f"point {pid} already blown up")
        if not self.ready(pid):
            raise ValueError(f"point {pid} not ready: parent not blown")
        incident = self.point_curves(pid)
        m = self.point_mult(pid)
        if m < 2:
            raise ValueError(f"point {pid} is a smooth point of the branch locus")
        if m % self.n not in (0, 1):
            raise UnrealizableConfiguration(
                f"multiplicity {m} at point {pid} not realizable for n={self.n}")
        mult = sum(self.curves[cid].mult for cid in incident)
        eid = self.add_curve(self_int=-1, mult=mult,
                             in_branch=(m % self.n == 1), k_deg=-1, created_from=pid)
        for cid in incident:
            self.curves[cid].self_int -= 1
            self.curves[cid].k_deg += 1
            self.adjacency[frozenset((cid, eid))] = 1
        if len(incident) == 2:
            pair = frozenset(incident)
            self.adjacency[pair] = self.adjacency.get(pair, 1) - 1
            if not self.adjacency[pair]:
                del self.adjacency[pair]
        p.blown = True
        p.mult = m
        self._exc[pid] = eid
        self.trace.append({"point": pid, "mult": m, "curve": eid, "depth": p.depth})
        return eid

    def unblow(self, pid: int) -> None:
        """Inverse of blow_up, for backtracking search."""
        p = self.points[pid]
        eid = self._exc.pop(pid)
        p.blown = False
        incident = self.point_curves(pid)
        for cid in incident:
            self.curves[cid].self_int += 1
            self.curves[cid].k_deg -= 1
            del self.adjacency[frozenset((cid, eid))]
        if len(incident) == 2:
            pair = frozenset(incident)
            self.adjacency[pair] = self.adjacency.get(pair, 0) + 1
        del self.curves[eid]
        self._next_curve -= 1
        p.mult = 0
        self.trace.pop()

    def remove_point(self, pid: int) -> None:
        """Inverse of add_point for the most recent point."""
        assert pid == self._next_point - 1
        del self.points[pid]
        self._next_point -= 1

    def pending(self) -> list[int]:
        out = []
        for p in self.points.values():
            if not p.blown and self.ready(p.pid) and self.point_mult(p.pid) >= 2:
                out.append(p.pid)
        return sorted(out, key=lambda pid: (self.points[pid].depth, pid))


def resolve(config: BranchConfiguration, order: list[int] | None = None) -> BranchConfiguration:
    """Blow up singular points until the branch locus is smooth and disjoint.

    The result is independent of the admissible order; the default refines
    depth order.
    """
    config = config.copy()
    if order is not None:
        for pid in order:
            config.blow_up(pid)
    while True:
        todo = config.pending()
        if not todo:
            break
        config.blow_up(todo[0])
    check_resolved(config)
    return config


def check_resolved(config: BranchConfiguration) -> None:
    n = config.n
    kid_weight: dict[int | None, int] = {}
    fol_weight: dict[int | None, int] = {}
    for p in config.points.values():
        kid_weight[p.parent] = kid_weight.get(p.parent, 0) + p.weight
        fol_weight[p.follows] = fol_weight.get(p.follows, 0) + p.weight
        if p.blown:
            continue
        curves = config.point_curves(p.pid)
        if not curves:
            raise UnrealizableConfiguration(f"point {p.pid} never attached to a curve")
        if config.point_mult(p.pid) >= 2:
            raise UnrealizableConfiguration(f"unresolved singular point {p.pid}")
        if p.weight and any(config.curves[c].in_branch for c in curves):
            raise UnrealizableConfiguration(
                f"branch point {p.pid} still meets a branch component")
    for pair, cnt in config.adjacency.items():
        if cnt > 0:
            a, b = pair
            if config.curves[a].in_branch and config.curves[b].in_branch:
                raise UnrealizableConfiguration(f"branch components {a},{b} still meet")
    for c in config.curves.values():
        if c.in_branch and c.self_int % n:
            raise UnrealizableConfiguration(
                f"branch component {c.cid} has self-intersection {c.self_int} not in {n}Z")
        if not c.in_branch and config.branch_degree(c.cid) % n:
            raise UnrealizableConfiguration(
                f"component {c.cid} meets the branch curve in degree not divisible by {n}")
    for p in config.points.values():
        if not p.blown:
            continue
        eid = config.exceptional_of(p.pid)
        total = kid_weight.get(p.pid, 0) + fol_weight.get(eid, 0)
        if total != p.weight:
            raise UnrealizableConfiguration(
                f"weight conservation fails at point {p.pid}: {p.weight} vs {total}")


# --- sequence extraction --------------------------------------------------

def diagram_depths(config: BranchConfiguration) -> dict[int, int]:
    depths = {config.fiber: 0}
    for c in config.curves.values():
        if c.created_from is not None:
            depths[c.cid] = config.points[c.created_from].depth
    return depths


def extract_sequence(config: BranchConfiguration) -> DiagramSequence:
    """Read the sequence of singularity diagrams off a resolved configuration."""
    n = config.n
    depths = diagram_depths(config)
    curve_order = sorted(config.curves, key=lambda cid: (depths[cid], cid))
    diagram_index = {cid: i for i, cid in enumerate(curve_order)}

    by_parent: dict[int | None, list[Point]] = {}
    for p in config.points.values():
        by_parent.setdefault(p.parent, []).append(p)

    def successor(pid: int, host: int) -> Point | None:
        for q in by_parent.get(pid, []):
            if q.follows == host:
                return q
        return None

    diagrams: list[AbstractDiagram] = []
    fork_map: list[tuple[tuple[int, int], int]] = []

    for cid in curve_order:
        host = config.curves[cid]
        starts = sorted(
            (p for p in config.points.values()
             if cid in config.point_curves(p.pid) and p.follows != cid),
            key=lambda p: p.pid)
        cols: list[Column] = []
        for p in starts:
            other = [c for c in config.point_curves(p.pid) if c != cid]
            upd = None
            if other and p.follows == other[0]:
                upd = depths[cid] - 1 - depths[other[0]]
            if p.blown:
                tower = [p]
                while True:
                    nxt = successor(tower[-1].pid, cid)
                    if nxt is None:
                        break
                    tower.append(nxt)
                hard = [q for q in tower if q.blown]
                assert all(q.blown for q in tower[: len(hard)])
                weights = [q.weight for q in tower] + [0]
                items: dict[int, int] = {}
                for j in range(len(tower)):
                    s = weights[j] - weights[j + 1]
                    assert s >= 0, "branch weight must not increase along a tower"
                    if s:
                        items[j + 1] = items.get(j + 1, 0) + s
                vertical = sum(1 for c in other if config.curves[c].in_branch)
                if vertical:
                    items[1] = items.get(1, 0) + vertical
                profile = make_profile(items)
                mults = derive_mults(profile, int(host.in_branch), n)
                assert list(mults) == [q.mult for q in hard], (
                    f"extracted mults {mults} disagree with trace {[q.mult for q in hard]}")
                prov = ("a", upd) if upd is not None else ("fresh",)
                cols.append(Column(profile=profile, mults=mults,
                                   labels=tuple(q.pid for q in hard), provenance=prov))
            else:
                order = config.contact(p.pid, cid)
                if upd is not None:
                    kind = "c" if successor(p.pid, other[0]) is not None else "d"
                    prov = (kind, upd)
                else:
                    prov = ("fresh",)
                cols.append(Column(profile=make_profile({order: 1}), mults=(),
                                   labels=(), provenance=prov))
        for pair, cnt in sorted(config.adjacency.items(), key=lambda kv: sorted(kv[0])):
            if cid in pair and cnt > 0:
                otherc = next(c for c in pair if c != cid)
                # only branch components older than the host were part of R'
                # when this diagram appeared
                if config.curves[otherc].in_branch and otherc < cid:
                    for _ in range(cnt):
                        cols.append(Column(
                            profile=make_profile({1: 1}), mults=(), labels=(),
                            provenance=("b", depths[cid] - 1 - depths[otherc])))
        t = sum(col.weight for col in cols)
        if host.created_from is not None:
            assert t == config.points[host.created_from].mult
        diagrams.append(AbstractDiagram(host_type=int(host.in_branch), t=t,
                                        columns=tuple(cols)))

    for mu, cid in enumerate(curve_order):
        for ci, col in enumerate(diagrams[mu].columns):
            if col.height:
                fork_map.append(((mu, ci), diagram_index[config.exceptional_of(col.labels[0])]))

    return DiagramSequence(n=n, diagrams=tuple(diagrams), fork_map=tuple(sorted(fork_map)))


# --- realization ----------------------------------------------------------

def realize_sequence(seq: DiagramSequence) -> BranchConfiguration:
    """Generic branch configuration realizing a complete diagram sequence.

    Placements are generic (fresh points) except where the sequence's shared
    entries force coincidence.  Blow-ups are replayed in fork order, so the
    returned configuration is already resolved.
    """
    n = seq.n
    root = seq.diagrams[0]
    config = BranchConfiguration(n, fiber_in_branch=root.host_type == 1)
    host_of = {0: config.fiber}
    label_pt: dict[int, int] = {}
    tail_start: dict[tuple[int, int], int] = {}   # (diagram, column) -> first residual pid
    source = {nu: src for src, nu in seq.fork_map}

    for idx, d in enumerate(seq.diagrams):
        if idx:
            mu, ci = source[idx]
            base_label = seq.diagrams[mu].columns[ci].labels[0]
            host_of[idx] = config.blow_up(label_pt[base_label])
        host = host_of[idx]
        creator = config.curves[host].created_from
        for ci, col in enumerate(d.columns):
            kind = col.provenance[0]
            if kind == "b":
                continue
            if kind in ("c", "d"):
                base = _residual_point(config, seq, idx, ci, tail_start)
                for _ in range(col.profile[0][0] - 1):
                    base = config.add_point(weight=1, parent=base, follows=host)
                continue
            if kind == "a":
                p0 = label_pt[col.labels[0]]
                follows = config.points[p0].follows
                vertical = 1 if config.curves[follows].in_branch else 0
                assert config.points[p0].weight == profile_units(col.profile) - vertical
            else:
                p0 = config.add_point(weight=profile_units(col.profile),
                                      parent=creator, follows=None)
                if col.height:
                    label_pt[col.labels[0]] = p0
            if not col.height:
                cur = p0
                for _ in range(col.profile[0][0] - 1):
                    cur = config.add_point(weight=1, parent=cur, follows=host)
                continue
            prev = p0
            for j in range(1, col.height):
                prev = config.add_point(weight=profile_tail(col.profile, j + 1),
                                        parent=prev, follows=host)
                label_pt[col.labels[j]] = prev
            for k in range(col.annotation):
                prev = config.add_point(weight=1, parent=prev, follows=host)
                if k == 0:
                    tail_start[(idx, ci)] = prev
    remaining = config.pending()
    assert not remaining, f"sequence left unresolved points {remaining}"
    check_resolved(config)
    return config


def _residual_point(config, seq, idx, ci, tail_start) -> int:
    """Locate the residual tangency point behind a (c)/(d) item."""
    up = seq.diagrams[idx].columns[ci].provenance[1]
    parents = seq.fork_parent()
    mu = parents[idx]
    for _ in range(up):
        mu = parents[mu]
    src_mu, src_ci = next(src for src, nu in seq.fork_map if nu == idx)
    x = seq.diagrams[src_mu].columns[src_ci].labels[0]
    for ci_p, colp in enumerate(seq.diagrams[mu].columns):
        if colp.height and colp.labels[-1] == x and colp.annotation:
            return tail_start[(mu, ci_p)]
    raise AssertionError("no residual tail found for (c)/(d) item")


# --- direct enumeration ----------------------------------------------------

def enumerate_configurations(n: int, r: int, host_type: int, max_depth: int,
                             site_cap: int | None = None) -> list[BranchConfiguration]:
    """Brute-force enumeration of resolved branch configurations.

    Works directly on weighted clusters with no reference to diagram rules:
    points are expanded in creation order; blowing a point forces a choice of
    how the branch curve continues on the new exceptional curve, subject only
    to weight conservation (tracked as per-curve slack consumed by points on
    proper transforms) and to the multiplicity law.  ``site_cap`` bounds the
    branch multiplicity at points of the ruling fiber itself, matching the
    standard relatively minimal model.
    """
    results: list[BranchConfiguration] = []
    cfg = BranchConfiguration(n, fiber_in_branch=host_type == 1)
    slack: dict[int, int] = {}

    def finish():
        if any(slack.values()):
            return
        try:
            check_resolved(cfg)
        except UnrealizableConfiguration:
            return
        results.append(cfg.copy())

    def expand(queue: tuple[int, ...]):
        # leftover contact budget must be consumable by some unexpanded point
        if any(slack.values()):
            alive = set()
            for q in queue:
                alive.update(cfg.point_curves(q))
            if any(v and c not in alive for c, v in slack.items()):
                return
        if not queue:
            finish()
            return
        pid, rest = queue[0], queue[1:]
        m = cfg.point_mult(pid)
        p = cfg.points[pid]
        if m >= 2:
            if p.depth > max_depth or m % n not in (0, 1):
                return
            blow_expand(pid, rest)
            return
        # smooth branch point: terminate here, or stay tangent to one curve
        expand(rest)
        for cid in cfg.point_curves(pid):
            if slack.get(cid, 0) >= 1 and not cfg.curves[cid].in_branch:
                slack[cid] -= 1
                q = cfg.add_point(weight=1, parent=pid, follows=cid)
                expand(rest + (q,))
                cfg.remove_point(q)
                slack[cid] += 1

    def blow_expand(pid: int, rest: tuple[int, ...]):
        p = cfg.points[pid]
        node_curves = list(cfg.point_curves(pid))
        eid = cfg.blow_up(pid)
        e_branch = cfg.curves[eid].in_branch
        w = p.weight
        ranges = []
        for cid in node_curves:
            mandatory = cfg.curves[cid].in_branch and e_branch
            ranges.append((cid, mandatory, min(slack.get(cid, 0), w)))
        for us in itertools.product(*[range(0, mx + 1) for _, _, mx in ranges]):
            if sum(us) > w:
                continue
            rem = w - sum(us)
            for fresh in _weight_partitions(rem):
                new_pids = []
                for (cid, mandatory, _mx), u in zip(ranges, us):
                    if u == 0 and not mandatory:
                        continue
                    slack[cid] = slack.get(cid, 0) - u
                    new_pids.append(cfg.add_point(weight=u, parent=pid, follows=cid))
                for v in fresh:
                    new_pids.append(cfg.add_point(weight=v, parent=pid, follows=None))
                slack[eid] = rem - sum(fresh)
                expand(rest + tuple(new_pids))
                del slack[eid]
                for q in reversed(new_pids):
                    cfg.remove_point(q)
                for (cid, mandatory, _mx), u in zip(ranges, us):
                    if u == 0 and not mandatory:
                        continue
                    slack[cid] += u
        cfg.unblow(pid)

    for weights in _weight_partitions(r):
        if site_cap is not None and weights and weights[0] + (host_type == 1) > site_cap:
            continue
        slack.clear()
        slack[cfg.fiber] = r - sum(weights)
        queue = tuple(cfg.add_point(weight=v, parent=None, follows=None) for v in weights)
        expand(queue)
        for q in reversed(queue):
            cfg.remove_point(q)
    return results


def _weight_partitions(total: int):
    """All non-increasing tuples of weights >= 1 with sum <= total."""

    def rec(maxpart, rem):
        yield ()
        for first in range(min(maxpart, rem), 0, -1):
            for rest in rec(first, rem - first):
                yield (first,) + rest

    yield from rec(total, total)

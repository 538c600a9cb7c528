"""From resolved branch configurations to fibers of the covering surface.

The n-cyclic covering sends each vertical component either to a fixed-locus
component (when it lies in the branch curve), to a disjoint union of n copies
(when it misses it), or to the connected cyclic cover of P^1 branched where
the branch curve meets it.  Contracting the resulting (-1)-curves produces
the fiber of the relatively minimal model, whose dual graph must satisfy
Zariski's lemma: negative semidefinite intersection form with one-dimensional
kernel spanned by the fiber class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .branch_sim import BranchConfiguration


@dataclass
class FiberNode:
    nid: int
    self_int: int
    mult: int
    genus: int
    kind: str = "cover"          # fixed | cover | copy
    dots: int = 0                # branch points on it (the table's filled marks)
    circles: int = 0             # isolated fixed points from contractions
    internal: int = 0            # self-crossings of a singular connected cover
    origin: int | None = None    # downstairs curve id

    @property
    def fixed(self) -> bool:
        return self.kind == "fixed"


@dataclass
class FiberGraph:
    nodes: dict[int, FiberNode] = field(default_factory=dict)
    edges: dict[frozenset[int], int] = field(default_factory=dict)
    contractions: int = 0

    def add_edge(self, a: int, b: int, weight: int = 1) -> None:
        if a == b:
            self.nodes[a].internal += weight
            return
        key = frozenset((a, b))
        self.edges[key] = self.edges.get(key, 0) + weight

    def neighbors(self, nid: int) -> list[tuple[int, int]]:
        out = []
        for pair, w in self.edges.items():
            if nid in pair and w:
                out.append((next(x for x in pair if x != nid), w))
        return out

    def intersection_matrix(self) -> list[list[int]]:
        order = sorted(self.nodes)
        index = {nid: i for i, nid in enumerate(order)}
        size = len(order)
        mat = [[0] * size for _ in range(size)]
        for nid in order:
            mat[index[nid]][index[nid]] = self.nodes[nid].self_int
        for pair, w in self.edges.items():
            a, b = pair
            mat[index[a]][index[b]] = w
            mat[index[b]][index[a]] = w
        return mat

    def multiplicities(self) -> list[int]:
        return [self.nodes[nid].mult for nid in sorted(self.nodes)]


# --- alpha_0 ---------------------------------------------------------------

def _chain_points(config: BranchConfiguration, start: int) -> list[int]:
    chain = [start]
    cur = start
    while True:
        nxt = [q.pid for q in config.points.values() if q.parent == cur]
        if not nxt:
            return chain
        assert len(nxt) == 1, "smooth branch chains do not split"
        chain.append(nxt[0])
        cur = nxt[0]


def alpha_zero(config: BranchConfiguration, n: int | None = None) -> int:
    """Ramification of the branch curve over the base, minus vertical Euler terms.

    Each surviving branch chain crossing the fiber divisor F at a point
    contributes (local intersection with F) - 1; every rational vertical
    branch component that is not a (-n)-curve subtracts its Euler number 2.
    """
    n = config.n if n is None else n
    total = 0
    counted: set[int] = set()
    for cid in list(config.curves):
        for p in config.crossing_starts(cid):
            if p.pid in counted:
                continue
            counted.add(p.pid)
            local = 0
            for q in _chain_points(config, p.pid):
                local += sum(config.curves[c].mult for c in config.point_curves(q))
            total += local - 1
    for c in config.curves.values():
        if c.in_branch and c.self_int != -n:
            total -= 2
    return total


# --- the covering ----------------------------------------------------------

def _branch_data(config: BranchConfiguration, cid: int) -> list[int]:
    """Local degrees of the branch divisor on a non-branch component."""
    degs = []
    for pair, cnt in config.adjacency.items():
        if cid in pair and cnt > 0:
            other = next(c for c in pair if c != cid)
            if config.curves[other].in_branch:
                degs.extend([1] * cnt)
    for p in config.crossing_starts(cid):
        degs.append(p.weight * config.contact(p.pid, cid))
    return degs


def apply_covering(config: BranchConfiguration) -> FiberGraph:
    """Dual graph of the fiber of the covering surface over this base point."""
    n = config.n
    if n not in (2, 3, 5, 7, 11, 13):
        raise ValueError("covering construction requires prime n")
    graph = FiberGraph()
    comp_of: dict[int, list[int]] = {}
    nid = 0

    for cid, c in sorted(config.curves.items()):
        if c.in_branch:
            if c.self_int % n:
                raise ValueError(f"inconsistent configuration: component {cid} "
                                 f"has self-intersection {c.self_int} inside the branch curve")
            graph.nodes[nid] = FiberNode(nid, c.self_int // n, n * c.mult, 0,
                                         kind="fixed", origin=cid)
            comp_of[cid] = [nid]
            nid += 1
            continue
        degs = _branch_data(config, cid)
        eff = [d for d in degs if d % n]
        if eff:
            assert (len(eff) * (n - 1)) % 2 == 0
            genus = (n - 1) * (len(eff) - 2) // 2
            node = FiberNode(nid, n * c.self_int, c.mult, genus,
                             kind="cover", dots=len(eff), origin=cid)
            graph.nodes[nid] = node
            comp_of[cid] = [nid]
            # sheets cross each other over unramified branch contacts
            for d in degs:
                if d % n == 0 and d > 0:
                    node.internal += (d // n) * (n * (n - 1) // 2)
            nid += 1
        else:
            # all contacts divisible by n: the preimage splits into n sheets
            # crossing each other with multiplicity d/n over each contact
            e = sum(d // n for d in degs)
            ids = []
            for _ in range(n):
                graph.nodes[nid] = FiberNode(nid, c.self_int - (n - 1) * e,
                                             c.mult, 0, kind="copy", origin=cid)
                ids.append(nid)
                nid += 1
            comp_of[cid] = ids
            for d in degs:
                k = d // n
                for i in range(n):
                    for j in range(i + 1, n):
                        graph.add_edge(ids[i], ids[j], k)

    for pair, cnt in config.adjacency.items():
        if cnt <= 0:
            continue
        a, b = sorted(pair)
        ca, cb = config.curves[a], config.curves[b]
        if ca.in_branch and cb.in_branch:
            raise ValueError("branch components may not intersect after resolution")
        for _ in range(cnt):
            if ca.in_branch or cb.in_branch:
                graph.add_edge(comp_of[a][0], comp_of[b][0], 1)
                continue
            node = _node_branch_point(config, a, b)
            ia, ib = comp_of[a], comp_of[b]
            if node is not None:
                # a branch chain crosses the node: one upstairs point, and a
                # side whose local contact is divisible by n puts all of its
                # sheets through it
                split_a = len(ia) > 1 and config.contact(node, a) % n == 0
                split_b = len(ib) > 1 and config.contact(node, b) % n == 0
                assert not (split_a and split_b)
                if split_a:
                    for x in ia:
                        graph.add_edge(x, ib[0], 1)
                elif split_b:
                    for y in ib:
                        graph.add_edge(ia[0], y, 1)
                else:
                    graph.add_edge(ia[0], ib[0], n)
            elif len(ia) == 1 and len(ib) == 1:
                graph.add_edge(ia[0], ib[0], n)
            elif len(ia) == 1:
                for x in ib:
                    graph.add_edge(ia[0], x, 1)
            elif len(ib) == 1:
                for x in ia:
                    graph.add_edge(x, ib[0], 1)
            else:
                for x, y in zip(ia, ib):
                    graph.add_edge(x, y, 1)
    _consistency(config, graph)
    return graph


def _node_branch_point(config: BranchConfiguration, a: int, b: int) -> int | None:
    for p in config.points.values():
        if not p.blown and p.weight and set(config.point_curves(p.pid)) == {a, b}:
            return p.pid
    return None


def _consistency(config: BranchConfiguration, graph: FiberGraph) -> None:
    """Adjunction check: the arithmetic genus of the fiber equals g.

    2 pa(F~) - 2 = F~ . K since the fiber class squares to zero; the
    canonical degree of each upstairs component is computed downstairs from
    K = theta^*(K_W + (n-1)/n R~).
    """
    n = config.n
    total = 0
    for node in graph.nodes.values():
        c = config.curves[node.origin]
        if node.kind == "fixed":
            kdeg = -2 - node.self_int
        elif node.kind == "cover":
            kdeg = n * c.k_deg + (n - 1) * config.branch_degree(c.cid)
        else:
            rdeg = config.branch_degree(c.cid)
            assert rdeg % n == 0
            kdeg = c.k_deg + (n - 1) * rdeg // n
        total += node.mult * kdeg
    g_expected = _fiber_genus(config)
    if total % 2 or (total + 2) // 2 != g_expected:
        raise ValueError(
            f"covering fiber has canonical degree {total}, expected {2 * g_expected - 2}")


def _fiber_genus(config: BranchConfiguration) -> int:
    """Genus from the Hurwitz count: r = horizontal degree over the fiber."""
    n = config.n
    r = sum(p.weight for p in config.points.values() if p.parent is None)
    r += sum(q.weight for q in config.points.values() if q.follows == config.fiber)
    return ((n - 1) * r - 2 * n + 2) // 2


# --- Zariski and contraction ------------------------------------------------

def zariski_check(graph: FiberGraph) -> tuple[bool, int]:
    """Exact negative-semidefiniteness test; returns (ok, kernel dimension)."""
    mat = graph.intersection_matrix()
    size = len(mat)
    a = [[Fraction(-x) for x in row] for row in mat]
    kernel = 0
    for i in range(size):
        if a[i][i] == 0:
            if any(a[i][j] for j in range(size)):
                return False, 0
            kernel += 1
            continue
        if a[i][i] < 0:
            return False, 0
        for j in range(i + 1, size):
            if a[j][i]:
                f = a[j][i] / a[i][i]
                for k2 in range(size):
                    a[j][k2] -= f * a[i][k2]
                a[j][i] = Fraction(0)
    # zero rows found after elimination count the kernel
    return True, kernel


def kernel_is_fiber_class(graph: FiberGraph) -> bool:
    mat = graph.intersection_matrix()
    mults = graph.multiplicities()
    return all(sum(m * x for m, x in zip(mults, row)) == 0 for row in mat)


def contract_minus_ones(graph: FiberGraph) -> FiberGraph:
    """Contract rational (-1)-nodes until the fiber is relatively minimal."""
    import copy

    g = copy.deepcopy(graph)
    while True:
        target = next((nid for nid, node in sorted(g.nodes.items())
                       if node.self_int == -1 and node.genus == 0
                       and node.internal == 0), None)
        if target is None:
            return g
        node = g.nodes[target]
        nbrs = g.neighbors(target)
        for i, (a, wa) in enumerate(nbrs):
            g.nodes[a].self_int += wa * wa
            if node.fixed:
                g.nodes[a].circles += 1
            for b, wb in nbrs[i + 1:]:
                g.add_edge(a, b, wa * wb)
        for pair in [p for p in g.edges if target in p]:
            del g.edges[pair]
        del g.nodes[target]
        g.contractions += 1


def fiber_multiplicity(graph: FiberGraph) -> int:
    """Multiplicity of the fiber: F = k D with D the numerical cycle."""
    from math import gcd
    from functools import reduce

    ok, dim = zariski_check(graph)
    if not ok or dim != 1:
        raise ValueError("intersection form is not negative semidefinite of corank 1")
    return reduce(gcd, graph.multiplicities())


# --- multiple fibers --------------------------------------------------------

def sharp_condition(config: BranchConfiguration, n: int | None = None) -> bool:
    """Every component of multiplicity not in nZ only meets components in nZ."""
    n = config.n if n is None else n
    for pair, cnt in config.adjacency.items():
        if cnt <= 0:
            continue
        a, b = pair
        if config.curves[a].mult % n and config.curves[b].mult % n:
            return False
    return True


def easylem_check(n_max: int) -> list[tuple[int, int, int]]:
    """Residue check: gcd(a,b,n)=1 forces a+2b or 2a+b outside nZ for n >= 4."""
    from math import gcd

    bad = []
    for n in range(4, n_max + 1):
        for a in range(n):
            for b in range(n):
                if gcd(gcd(a, b), n) != 1:
                    continue
                if (a + 2 * b) % n == 0 and (2 * a + b) % n == 0:
                    bad.append((n, a, b))
    return bad


def sharp_search(n: int, max_blowups: int) -> tuple[int, ...] | None:
    """Search blow-up trees of a fiber for a reducible fiber satisfying (#).

    Every violating junction (two adjacent components with multiplicity
    outside nZ) must eventually be blown up, and no other blow-up can remove
    an existing violation, so it suffices to explore the forced closure:
    repeated subdivision of violating edges.  States stay paths of
    multiplicities; returns a satisfying multiplicity chain or None.
    """
    start = (1, 1)  # the first blow-up of the fiber; one blow-up spent
    seen = {start}
    frontier = [start]
    steps = 1
    while frontier and steps < max_blowups:
        steps += 1
        nxt = []
        for path in frontier:
            viols = [i for i in range(len(path) - 1)
                     if path[i] % n and path[i + 1] % n]
            if not viols:
                return path
            for i in viols:
                new = path[: i + 1] + (path[i] + path[i + 1],) + path[i + 1:]
                canon = min(new, new[::-1])
                if canon not in seen:
                    seen.add(canon)
                    nxt.append(canon)
        frontier = nxt
    for path in frontier:
        if not any(path[i] % n and path[i + 1] % n for i in range(len(path) - 1)):
            return path
    return None


# --- export -----------------------------------------------------------------

def to_dot(graph: FiberGraph) -> str:
    lines = ["graph fiber {"]
    for nid, node in sorted(graph.nodes.items()):
        marks = []
        if node.fixed:
            marks.append("fixed")
        if node.dots:
            marks.append("*" * node.dots)
        if node.circles:
            marks.append("o" * node.circles)
        label = f"{node.mult}x({node.self_int})g{node.genus}"
        if marks:
            label += " " + ",".join(marks)
        lines.append(f'  n{nid} [label="{label}"];')
    for pair, w in sorted(graph.edges.items(), key=lambda kv: sorted(kv[0])):
        a, b = sorted(pair)
        attr = f' [label="{w}"]' if w != 1 else ""
        lines.append(f"  n{a} -- n{b}{attr};")
    lines.append("}")
    return "\n".join(lines)

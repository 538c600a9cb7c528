"""Singularity diagrams for branch curves on ruled surfaces.

A singularity diagram records, for one vertical curve C (a ruling fiber or an
exceptional curve), the multiplicities of the branch curve at the chain of
infinitely near points lying over each singular point of C ∩ R'.  The diagram
is of type 1 when C itself belongs to the branch locus, type 0 otherwise.

Every column is derived from a contact profile: the multiset of contact
orders of the virtual local branches with the host curve.  The multiplicity
sequence is a function of (profile, host_type, n), so profiles are the only
stored state and the m-columns are always recomputed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

# A contact profile is stored as a sorted tuple of (contact_order, count).
Profile = tuple[tuple[int, int], ...]

FRESH = ("fresh",)


class InadmissibleProfile(ValueError):
    """Raised when a contact profile produces a multiplicity outside nZ ∪ nZ+1."""


class NoFibration(ValueError):
    """Raised when no primitive cyclic covering fibration of this type exists."""


def make_profile(items: Iterable[tuple[int, int]] | dict[int, int]) -> Profile:
    if isinstance(items, dict):
        items = items.items()
    agg: dict[int, int] = {}
    for contact, count in items:
        if contact < 1 or count < 0:
            raise ValueError("contact orders must be >= 1 and counts >= 0")
        if count:
            agg[contact] = agg.get(contact, 0) + count
    return tuple(sorted(agg.items()))


def profile_units(profile: Profile) -> int:
    return sum(count for _, count in profile)


def profile_weight(profile: Profile) -> int:
    """Local intersection number of the off-curve branch locus with the host."""
    return sum(contact * count for contact, count in profile)


def profile_tail(profile: Profile, j: int) -> int:
    """Number of virtual branches with contact order >= j."""
    return sum(count for contact, count in profile if contact >= j)


def profile_imax(profile: Profile) -> int:
    return max((contact for contact, count in profile if count), default=0)


def branch_point_count(g: int, n: int) -> int:
    """Number of branch points r on a general ruling fiber.

    Hurwitz for the n-cyclic cover F -> P^1 of a fiber, totally ramified over
    every branch point: 2g - 2 = -2n + (n-1) r.
    """
    if g < 2 or n < 2:
        raise NoFibration(f"need g >= 2 and n >= 2, got (g, n) = ({g}, {n})")
    num = 2 * g - 2 + 2 * n
    if num % (n - 1):
        raise NoFibration(f"no primitive cyclic covering fibration of type ({g},0,{n})")
    r = num // (n - 1)
    if r % n:
        raise NoFibration(f"no primitive cyclic covering fibration of type ({g},0,{n}): r={r} not divisible by n")
    return r


@dataclass(frozen=True)
class CoverParams:
    n: int
    g: int
    r: int = 0

    def __post_init__(self):
        r = branch_point_count(self.g, self.n)
        if self.r and self.r != r:
            raise ValueError(f"inconsistent r: expected {r}")
        object.__setattr__(self, "r", r)

    @property
    def max_alpha_index(self) -> int:
        return self.r // (2 * self.n)


def multiplicity_cap(g: int, n: int, host_type: int) -> int:
    """Largest allowed m_{i,1} on the root (ruling fiber) diagram.

    A standard relatively minimal model keeps mult_x(R_h) <= r/2, hence
    m_{i,1} <= r/2 + host_type; for n = 2 with g even the bound r/2 = g+1
    applies to all of R, host curve included.
    """
    r = branch_point_count(g, n)
    if n == 2 and g % 2 == 0:
        return g + 1
    return r // 2 + host_type


def derive_mults(profile: Profile, host_type: int, n: int) -> tuple[int, ...]:
    """Multiplicity sequence (bottom-up) generated by a contact profile.

    Implements the recursions m_{j+1} = sum_{k>=j+1} s_k + delta, where delta
    counts the host curve (type 1) and the new exceptional curve (entries in
    nZ+1).  Stops at the first value below 2.  Raises InadmissibleProfile if
    a derived multiplicity falls outside nZ ∪ nZ+1.
    """
    if host_type not in (0, 1):
        raise ValueError("host_type must be 0 or 1")
    m = profile_units(profile) + host_type
    mults = []
    j = 1
    while m >= 2:
        if m % n not in (0, 1):
            raise InadmissibleProfile(f"profile {profile} inadmissible for n={n}: m={m}")
        mults.append(m)
        delta = host_type + (1 if m % n == 1 else 0)
        j += 1
        m = profile_tail(profile, j) + delta
        if j > profile_imax(profile) + 3:
            # the tail is 0 from i_max+1 on, so m is then at most 2 and the
            # loop ends within two more steps; this guard is unreachable
            raise AssertionError("runaway multiplicity sequence")
    return tuple(mults)


@dataclass(frozen=True)
class Column:
    """One column of a diagram: a tower of infinitely near points on the host.

    Height-0 columns hold a single smooth branch tangent to the host (their
    profile is {c: 1}); they are first-class and join the t-balance.
    ``provenance`` records how the column arose inside a sequence: fresh
    content, or inherited from an ancestor diagram through the fork rules
    (cases (a)-(d)); the integer is the fork-path distance to that ancestor.
    """

    profile: Profile
    mults: tuple[int, ...]
    labels: tuple[int, ...]
    provenance: tuple = FRESH

    @property
    def height(self) -> int:
        return len(self.mults)

    @property
    def i_max(self) -> int:
        return profile_imax(self.profile)

    @property
    def annotation(self) -> int:
        """i_max - i_bm; positive only on type-0 hosts with residual tangency."""
        return max(0, self.i_max - self.height)

    @property
    def weight(self) -> int:
        return profile_weight(self.profile)

    def shape(self) -> tuple:
        return (self.mults, self.profile)


def derive_column(
    profile: Profile | dict[int, int],
    host_type: int,
    n: int,
    labels: tuple[int, ...] | None = None,
    provenance: tuple = FRESH,
) -> Column:
    """Build a column from its contact profile.

    Raises InadmissibleProfile when the derived multiplicities are not all in
    nZ ∪ nZ+1 (this prunes enumeration).
    """
    profile = make_profile(profile) if not isinstance(profile, tuple) else profile
    mults = derive_mults(profile, host_type, n)
    if labels is None:
        labels = tuple(range(len(mults)))
    if len(labels) != len(mults):
        raise ValueError("labels must match column height")
    return Column(profile=profile, mults=mults, labels=labels, provenance=provenance)


@dataclass(frozen=True)
class AbstractDiagram:
    """A singularity diagram: typed columns with a total contact number t."""

    host_type: int
    t: int
    columns: tuple[Column, ...]

    @property
    def c(self) -> int:
        return sum(col.height for col in self.columns)

    def entries(self) -> Iterator[tuple[int, int, int, int]]:
        """Yield (col_index, row, label, mult) over all positive-height entries."""
        for ci, col in enumerate(self.columns):
            for j, (lab, m) in enumerate(zip(col.labels, col.mults)):
                yield ci, j, lab, m


def validate_diagram(d: AbstractDiagram, n: int) -> list[str]:
    """Check every local validity rule; violations are data, not failures."""
    bad: list[str] = []
    if d.host_type not in (0, 1):
        bad.append(f"host_type {d.host_type} not 0/1")
        return bad
    if d.t != sum(col.weight for col in d.columns):
        bad.append(f"t={d.t} != total contact {sum(col.weight for col in d.columns)}")
    seen: set[int] = set()
    for ci, col in enumerate(d.columns):
        for lab in col.labels:
            if lab in seen:
                bad.append(f"column {ci}: duplicate point label {lab}")
            seen.add(lab)
        if d.host_type == 1 and col.height == 0:
            bad.append(f"column {ci}: height-0 entry on a branch-contained host")
            continue
        try:
            expect = derive_mults(col.profile, d.host_type, n)
        except InadmissibleProfile as exc:
            bad.append(f"column {ci}: {exc}")
            continue
        if col.mults != expect:
            bad.append(f"column {ci}: mults {col.mults} != derived {expect}")
            continue
        for j, m in enumerate(col.mults):
            if m % n not in (0, 1):
                bad.append(f"column {ci} row {j+1}: m={m} not in {n}Z u {n}Z+1")
        # Lemma 2.4 monotonicity
        for j in range(len(col.mults) - 1):
            a, b = col.mults[j], col.mults[j + 1]
            if n >= 3 and a < b:
                bad.append(f"column {ci}: m increases {a} -> {b}")
            if n == 2:
                if a + 1 < b:
                    bad.append(f"column {ci}: m jumps {a} -> {b}")
                elif a + 1 == b:
                    if a % 2 == 0 or (j > 0 and col.mults[j - 1] % 2 == 1):
                        bad.append(f"column {ci}: illegal parity at rise {a} -> {b}")
            if j > 0 and col.mults[j - 1] % n == 1 and a % n == 0 and a <= b:
                bad.append(f"column {ci}: m must drop after (nZ+1, nZ) pair")
        if col.height:
            top = col.mults[-1]
            if d.host_type == 1 and top % n != 0:
                bad.append(f"column {ci}: terminal entry {top} not in {n}Z")
            if d.host_type == 0 and col.annotation > 0:
                if top % n != 0:
                    bad.append(f"column {ci}: annotated column must end in {n}Z")
                inner = [cnt for k, cnt in col.profile if col.height < k < col.i_max]
                if any(inner):
                    bad.append(f"column {ci}: contact orders strictly between i_bm and i_max")
                if profile_tail(col.profile, col.i_max) != 1:
                    bad.append(f"column {ci}: residual branch count != 1")
    bad.extend(_check_balance(d, n))
    return bad


def _check_balance(d: AbstractDiagram, n: int) -> list[str]:
    """Balance equalities relating t, the blow-up count and the multiplicities."""
    bad = []
    t, c = d.t, d.c
    msum = sum(sum(col.mults) for col in d.columns)
    dsum = sum(m // n for col in d.columns for m in col.mults)
    ci_sum = sum(
        sum(1 for j in range(col.height - 1) if col.mults[j] % n == 1)
        for col in d.columns
    )
    if d.host_type == 1:
        if t + c + ci_sum != msum:
            bad.append(f"type-1 balance: t+c+sum(c_i) = {t+c+ci_sum} != {msum}")
        if (t + c) % n or (t + c) // n != dsum:
            bad.append(f"type-1 balance: (t+c)/n != sum d_ij ({t+c}/{n} vs {dsum})")
    else:
        ann = sum(col.annotation for col in d.columns)
        if t + ci_sum != msum + ann:
            bad.append(f"type-0 balance: t+sum(c_i) = {t+ci_sum} != {msum+ann}")
        corr = sum(
            col.annotation + (col.mults[-1] - n * (col.mults[-1] // n) if col.height else 0)
            for col in d.columns
        )
        if (n * dsum + corr) != t:
            bad.append(f"type-0 balance: t/n != sum d + corr/n ({t} vs {n*dsum+corr})")
    return bad


# --- serialization ------------------------------------------------------

def column_sort_key(col: Column) -> tuple:
    return (-col.height, tuple(-m for m in col.mults), col.profile, col.provenance)


def diagram_to_obj(d: AbstractDiagram) -> dict:
    cols = []
    for col in sorted(d.columns, key=column_sort_key):
        obj = {
            "mults": list(col.mults),
            "profile": {str(k): cnt for k, cnt in col.profile},
        }
        if col.annotation:
            obj["top_annotation"] = col.annotation
        cols.append(obj)
    return {"host_type": d.host_type, "t": d.t, "columns": cols}


def diagram_to_json(d: AbstractDiagram) -> str:
    return json.dumps(diagram_to_obj(d), sort_keys=True)


def diagram_from_obj(obj: dict, n: int) -> AbstractDiagram:
    cols = []
    next_label = 0
    for cobj in obj["columns"]:
        profile = make_profile({int(k): v for k, v in cobj["profile"].items()})
        mults = derive_mults(profile, obj["host_type"], n)
        if list(mults) != list(cobj["mults"]):
            raise ValueError(f"stored mults {cobj['mults']} disagree with profile")
        labels = tuple(range(next_label, next_label + len(mults)))
        next_label += len(mults)
        cols.append(Column(profile=profile, mults=mults, labels=labels))
    return AbstractDiagram(host_type=obj["host_type"], t=obj["t"], columns=tuple(cols))


def diagram_from_json(text: str, n: int) -> AbstractDiagram:
    return diagram_from_obj(json.loads(text), n)

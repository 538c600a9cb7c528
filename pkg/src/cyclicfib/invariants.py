"""Exact rational invariants of fiber germs.

Singularity indices count the singular points (including infinitely near
ones) of the branch curve over one ruling fiber, graded by multiplicity kn or
kn+1.  The Horikawa index and the local signature are the fiber-germ
contributions to the slope equality and to the signature of the total space;
both are computed exactly over Q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .branch_sim import BranchConfiguration
from .sequence_engine import DiagramSequence


@dataclass(frozen=True)
class InvariantVector:
    alpha0: int
    alphas: tuple[int, ...]   # alpha_k for k = 1, 2, ...
    epsilon: int

    def alpha(self, k: int) -> int:
        if k == 0:
            return self.alpha0
        return self.alphas[k - 1] if k <= len(self.alphas) else 0


def alpha_indices(seq: DiagramSequence, n: int) -> tuple[int, ...]:
    """alpha_k = number of singular points of multiplicity kn or kn+1.

    Points shared between diagrams (an entry inherited through a fork) are
    counted once: entries are identified by their point labels.
    """
    mult_of: dict[int, int] = {}
    for d in seq.diagrams:
        for col in d.columns:
            for lab, m in zip(col.labels, col.mults):
                if lab in mult_of:
                    assert mult_of[lab] == m, "shared entry with inconsistent multiplicity"
                mult_of[lab] = m
    if not mult_of:
        return ()
    kmax = max(m // n for m in mult_of.values())
    alphas = [0] * kmax
    for m in mult_of.values():
        k = m // n
        assert m % n in (0, 1)
        alphas[k - 1] += 1
    return tuple(alphas)


def epsilon_index(config: BranchConfiguration, n: int) -> int:
    """Number of vertical (-n)-curves inside the resolved branch locus."""
    return sum(1 for c in config.curves.values()
               if c.in_branch and c.self_int == -n)


def horikawa_coefficient(n: int, r: int, k: int) -> Fraction:
    """Coefficient of alpha_k in the Horikawa index."""
    den = (2 * n - 1) * r - 3 * n
    if den <= 0:
        raise ValueError(f"degenerate fibration data: r={r} too small for n={n}")
    return n * (Fraction((n + 1) * (n - 1) * (r - n * k) * k, den) - 1)


def horikawa_index(n: int, r: int, v: InvariantVector) -> Fraction:
    total = Fraction(0)
    for k in range(1, len(v.alphas) + 1):
        total += horikawa_coefficient(n, r, k) * v.alpha(k)
    return total + v.epsilon


def local_signature(n: int, r: int, v: InvariantVector) -> Fraction:
    total = Fraction(-(n - 1) * (n + 1) * r, 3 * n * (r - 1)) * v.alpha0
    for k in range(1, len(v.alphas) + 1):
        coeff = Fraction((n - 1) * (n + 1) * (-n * k * k + r * k), 3 * (r - 1)) - n
        total += coeff * v.alpha(k)
    total += Fraction((n + 2) * (2 * n - 1) * r - 3 * n, 3 * n * (r - 1)) * v.epsilon
    return total


def slope_coefficient(g: int, n: int) -> Fraction:
    """Slope lambda in K_f^2 = lambda chi_f + sum of Horikawa indices."""
    if g < 2 or n < 2:
        raise ValueError("need g >= 2 and n >= 2")
    return Fraction(24 * (g - 1) * (n - 1), 2 * (2 * n - 1) * (g - 1) + n * (n + 1))


def rational_str(q: Fraction) -> str:
    """Serialize a rational as p/q in lowest terms, sign on the numerator."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(text: str) -> Fraction:
    return Fraction(text)

"""Linear algebra over F2 with quadratic forms: metabolic spaces, Lagrangian subspaces.

Vectors are int bitmasks (bit i = coordinate i); subspaces are stored in reduced
row echelon form so that equality of subspaces is equality of representations.
Enumeration is exhaustive (ambient dimension <= 8), never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence


class F2Error(ValueError):
    pass


def _rref(rows: Iterable[int]) -> tuple[int, ...]:
    """Reduced row echelon form of a set of bitmask rows; pivot = lowest set bit."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
    # back-substitute so each pivot occurs in exactly one row
    changed = True
    while changed:
        changed = False
        for i, r in enumerate(basis):
            piv = 1 << (r.bit_length() - 1)
            for j, s in enumerate(basis):
                if i != j and s & piv:
                    basis[j] = s ^ r
                    changed = True
        basis.sort(reverse=True)
    return tuple(basis)


@dataclass(frozen=True)
class F2Subspace:
    """A subspace of F2^n in canonical reduced form."""

    ambient_dim: int
    basis: tuple[int, ...]

    @staticmethod
    def from_vectors(ambient_dim: int, vectors: Iterable[int]) -> "F2Subspace":
        vecs = list(vectors)
        limit = 1 << ambient_dim
        if any(v < 0 or v >= limit for v in vecs):
            raise F2Error("vector does not fit in the ambient dimension")
        return F2Subspace(ambient_dim, _rref(vecs))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: int) -> bool:
        for b in self.basis:
            v = min(v, v ^ b)
        return v == 0

    def vectors(self) -> list[int]:
        """All 2^dim elements of the subspace."""
        out = [0]
        for b in self.basis:
            out += [v ^ b for v in out]
        return out

    def intersection(self, other: "F2Subspace") -> "F2Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise F2Error("ambient dimension mismatch")
        common = [v for v in self.vectors() if other.contains(v)]
        return F2Subspace.from_vectors(self.ambient_dim, common)

    def sum(self, other: "F2Subspace") -> "F2Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise F2Error("ambient dimension mismatch")
        return F2Subspace.from_vectors(self.ambient_dim, self.basis + other.basis)

    def __iter__(self):
        return iter(self.basis)


def zero_subspace(ambient_dim: int) -> F2Subspace:
    return F2Subspace(ambient_dim, ())


@dataclass(frozen=True)
class F2QuadSpace:
    """An F2 vector space of even dimension with a quadratic form.

    q is determined by its values on the standard basis plus the Gram matrix of
    the induced bilinear pairing (v,w)_q = q(v+w) - q(v) - q(w):

        q(sum a_i e_i) = sum a_i q(e_i) + sum_{i<j} a_i a_j gram[i][j].
    """

    dim: int
    q_values: tuple[int, ...]
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim % 2 != 0:
            raise F2Error("quadratic space dimension must be even")
        if len(self.q_values) != self.dim or len(self.gram) != self.dim:
            raise F2Error("q_values/gram shape mismatch")
        for i, row in enumerate(self.gram):
            if len(row) != self.dim:
                raise F2Error("gram is not square")
            if row[i] != 0:
                raise F2Error("gram must have zero diagonal (alternating form)")
            for j in range(self.dim):
                if row[j] != self.gram[j][i]:
                    raise F2Error("gram must be symmetric")

    _row_masks: tuple[int, ...] = field(init=False, repr=False, compare=False, default=())

    @property
    def row_masks(self) -> tuple[int, ...]:
        if not self._row_masks and self.dim:
            masks = tuple(sum(self.gram[i][j] << j for j in range(self.dim))
                          for i in range(self.dim))
            object.__setattr__(self, "_row_masks", masks)
        return self._row_masks

    def pairing(self, v: int, w: int) -> int:
        out = 0
        rows = self.row_masks
        i = 0
        while v >> i:
            if (v >> i) & 1:
                out ^= (rows[i] & w).bit_count() & 1
            i += 1
        return out

    def is_nondegenerate(self) -> bool:
        rows = [sum(((self.gram[i][j]) << j) for j in range(self.dim)) for i in range(self.dim)]
        return len(_rref(rows)) == self.dim


def eval_q(space: F2QuadSpace, v: int) -> int:
    """Evaluate the quadratic form on a bitmask vector."""
    if v < 0 or v >> space.dim:
        raise F2Error("vector does not fit in the space")
    out = 0
    bits = [i for i in range(space.dim) if (v >> i) & 1]
    for i in bits:
        out ^= space.q_values[i]
    for i, j in combinations(bits, 2):
        out ^= space.gram[i][j]
    return out


def is_lagrangian(space: F2QuadSpace, X: F2Subspace) -> bool:
    """q vanishes on X and X equals its orthogonal complement under the pairing."""
    if X.ambient_dim != space.dim:
        raise F2Error("ambient dimension mismatch")
    if any(eval_q(space, v) for v in X.vectors()):
        return False
    perp = orthogonal_complement(space, X)
    return perp == X


def orthogonal_complement(space: F2QuadSpace, X: F2Subspace) -> F2Subspace:
    if X.ambient_dim != space.dim:
        raise F2Error("ambient dimension mismatch")
    out = [v for v in range(1 << space.dim)
           if all(space.pairing(v, b) == 0 for b in X.basis)]
    return F2Subspace.from_vectors(space.dim, out)


def isotropic_vectors(space: F2QuadSpace) -> list[int]:
    return [v for v in range(1, 1 << space.dim) if eval_q(space, v) == 0]


def all_lagrangians(space: F2QuadSpace) -> list[F2Subspace]:
    """Every Lagrangian subspace, by exhaustive isotropic extension (dim <= 8)."""
    if space.dim > 8:
        raise F2Error("exhaustive Lagrangian enumeration is capped at dimension 8")
    n = space.dim // 2
    if n == 0:
        return [zero_subspace(0)]
    q_zero = [v for v in range(1, 1 << space.dim) if eval_q(space, v) == 0]
    found: set[F2Subspace] = set()

    def extend(sub: F2Subspace, min_v: int):
        if sub.dim == n:
            found.add(sub)
            return
        for v in q_zero:
            # every subspace has a strictly increasing generating sequence,
            # so restricting to v > min_v loses nothing
            if v <= min_v or sub.contains(v):
                continue
            if any(space.pairing(v, b) for b in sub.basis):
                continue
            extend(F2Subspace.from_vectors(space.dim, sub.basis + (v,)), v)

    extend(zero_subspace(space.dim), 0)
    return sorted(found, key=lambda s: s.basis)


def is_metabolic(space: F2QuadSpace) -> bool:
    """Nondegenerate pairing and at least one Lagrangian subspace."""
    if not space.is_nondegenerate():
        return False
    return bool(all_lagrangians(space))


def count_disjoint_lagrangians(space: F2QuadSpace, X: F2Subspace) -> int:
    """Number of Lagrangian subspaces meeting a given Lagrangian X trivially.

    For a metabolic space of dimension 2n the count is 2^(n(n-1)/2); callers
    may assert that identity against this exhaustive enumeration.
    """
    if not space.is_nondegenerate():
        raise F2Error("space is not metabolic (degenerate pairing)")
    if not is_lagrangian(space, X):
        raise F2Error("X is not Lagrangian")
    count = 0
    for Y in all_lagrangians(space):
        if Y.intersection(X).dim == 0:
            count += 1
    return count


def standard_metabolic(n: int) -> F2QuadSpace:
    """Orthogonal sum of n hyperbolic planes: q(e_i) = 0, gram pairs e_{2i-1} <-> e_{2i}."""
    dim = 2 * n
    gram = [[0] * dim for _ in range(dim)]
    for i in range(n):
        gram[2 * i][2 * i + 1] = gram[2 * i + 1][2 * i] = 1
    return F2QuadSpace(dim, tuple([0] * dim), tuple(tuple(r) for r in gram))


def quad_space(dim: int, q_values: Sequence[int], gram_entries: dict[tuple[int, int], int]) -> F2QuadSpace:
    """Convenience constructor from sparse upper-triangular gram entries."""
    gram = [[0] * dim for _ in range(dim)]
    for (i, j), val in gram_entries.items():
        if i == j:
            raise F2Error("diagonal gram entries must be zero")
        gram[i][j] = gram[j][i] = val & 1
    return F2QuadSpace(dim, tuple(x & 1 for x in q_values), tuple(tuple(r) for r in gram))

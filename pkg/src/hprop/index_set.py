"""Multi-index sets for tensor-product spectral bases.

An index set collects multi-indices k = (k_1, ..., k_N) of nonnegative basis
orders, one per coordinate direction.  Two built-in families are provided:

* the full cube  {k : 0 <= k_l <= K for all l}  of size (K+1)^N, and
* the hyperbolic cross  {k : prod_l (1 + k_l) <= K + 1},  which grows only
  like K log(K)^(N-1) and is the set the fast potential application targets.

Both are downward closed: removing one from any positive component never
leaves the set.  Arbitrary downward-closed sets are accepted through
:func:`from_indices`.

Each set fixes a canonical ordering of its members, lexicographic in
(k_1, ..., k_N).  Coefficient vectors (:class:`CoeffVector`) are stored
densely in that ordering; the ordinal of an index is recovered through the
set's position map.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

FULL = "full"
HYPERBOLIC = "hyperbolic"
CUSTOM = "custom"

_KINDS = (FULL, HYPERBOLIC, CUSTOM)


class IndexSet:
    """An immutable, canonically ordered collection of multi-indices.

    Instances should be built through :func:`build_full`,
    :func:`build_hyperbolic` or :func:`from_indices`.  The ``indices`` array
    has shape (size, dim), is sorted lexicographically and is read-only.
    """

    __slots__ = ("dim", "bound", "kind", "indices", "_pos", "_derived")

    def __init__(self, dim: int, bound: int, kind: str, indices: np.ndarray):
        if dim <= 0:
            raise ValueError(f"dimension must be positive, got {dim}")
        if bound < 0:
            raise ValueError(f"bound must be nonnegative, got {bound}")
        if kind not in _KINDS:
            raise ValueError(f"unknown index-set kind {kind!r}")
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        if indices.ndim != 2 or indices.shape[1] != dim:
            raise ValueError("indices must have shape (size, dim)")
        indices.setflags(write=False)
        self.dim = dim
        self.bound = bound
        self.kind = kind
        self.indices = indices
        self._pos = {tuple(row): i for i, row in enumerate(indices.tolist())}
        if len(self._pos) != indices.shape[0]:
            raise ValueError("duplicate indices in index set")
        # memo space for derived structures (neighbor tables, appliers, ...)
        self._derived: dict = {}

    # -- basic container protocol -------------------------------------------------

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self._pos)

    def __contains__(self, index) -> bool:
        return tuple(index) in self._pos

    def __repr__(self) -> str:
        return (f"IndexSet(dim={self.dim}, bound={self.bound}, "
                f"kind={self.kind!r}, size={self.size})")

    def position(self, index) -> int:
        """Ordinal of ``index`` in the canonical ordering (KeyError if absent)."""
        return self._pos[tuple(index)]

    def index_at(self, ordinal: int) -> tuple[int, ...]:
        return tuple(self.indices[ordinal].tolist())

    def same_as(self, other: "IndexSet") -> bool:
        """Structural equality: same dim, bound, kind and member list."""
        if self is other:
            return True
        return (self.dim == other.dim and self.bound == other.bound
                and self.kind == other.kind
                and self.indices.shape == other.indices.shape
                and bool(np.array_equal(self.indices, other.indices)))

    # -- neighbor bookkeeping -----------------------------------------------------

    def neighbor_ordinals(self, axis: int) -> tuple[np.ndarray, np.ndarray]:
        """Ordinals of the -1/+1 neighbors along ``axis`` (1-based), -1 if absent.

        Cached per axis; the arrays are read-only.
        """
        _check_axis(axis, self.dim)
        key = ("neighbors", axis)
        cached = self._derived.get(key)
        if cached is not None:
            return cached
        a = axis - 1
        n = self.size
        down = np.full(n, -1, dtype=np.int64)
        up = np.full(n, -1, dtype=np.int64)
        pos = self._pos
        for i, row in enumerate(self.indices.tolist()):
            kl = row[a]
            if kl > 0:
                row[a] = kl - 1
                down[i] = pos.get(tuple(row), -1)
            row[a] = kl + 1
            up[i] = pos.get(tuple(row), -1)
            row[a] = kl
        down.setflags(write=False)
        up.setflags(write=False)
        self._derived[key] = (down, up)
        return down, up


def _check_axis(axis: int, dim: int) -> None:
    if not 1 <= axis <= dim:
        raise ValueError(f"axis must satisfy 1 <= axis <= {dim}, got {axis}")


def _check_total(total: int) -> None:
    if total > sys.maxsize:
        raise ValueError(f"index set with {total} elements exceeds the "
                         "addressable range of this platform")


def build_full(dim: int, bound: int) -> IndexSet:
    """Full cube {k : 0 <= k_l <= bound}, size (bound+1)**dim."""
    if dim <= 0:
        raise ValueError(f"dimension must be positive, got {dim}")
    if bound < 0:
        raise ValueError(f"bound must be nonnegative, got {bound}")
    _check_total((bound + 1) ** dim)
    ranges = [np.arange(bound + 1, dtype=np.int64)] * dim
    grids = np.meshgrid(*ranges, indexing="ij")
    indices = np.stack([g.reshape(-1) for g in grids], axis=1)
    return IndexSet(dim, bound, FULL, indices)


def build_hyperbolic(dim: int, bound: int) -> IndexSet:
    """Hyperbolic cross {k : prod_l (1 + k_l) <= bound + 1}."""
    if dim <= 0:
        raise ValueError(f"dimension must be positive, got {dim}")
    if bound < 0:
        raise ValueError(f"bound must be nonnegative, got {bound}")
    budget = bound + 1
    out: list[list[int]] = []
    head = [0] * dim

    def descend(level: int, remaining: int) -> None:
        if level == dim - 1:
            for k in range(remaining):
                head[level] = k
                out.append(head.copy())
            return
        k = 0
        while k + 1 <= remaining:
            head[level] = k
            descend(level + 1, remaining // (k + 1))
            k += 1

    descend(0, budget)
    indices = np.asarray(out, dtype=np.int64).reshape(len(out), dim)
    return IndexSet(dim, bound, HYPERBOLIC, indices)


def from_indices(indices: Iterable[Sequence[int]], dim: int | None = None,
                 kind: str = CUSTOM) -> IndexSet:
    """Build a validated index set from an explicit list of multi-indices.

    The list must be nonempty, componentwise nonnegative and downward closed.
    Indices are sorted into canonical order; the bound is the largest
    component present.
    """
    rows = [tuple(int(c) for c in row) for row in indices]
    if not rows:
        raise ValueError("index set must contain at least one index")
    if dim is None:
        dim = len(rows[0])
    for row in rows:
        if len(row) != dim:
            raise ValueError(f"index {row} does not have dimension {dim}")
        if any(c < 0 for c in row):
            raise ValueError(f"index {row} has a negative component")
    rows = sorted(set(rows))
    present = set(rows)
    for row in rows:
        for a in range(dim):
            if row[a] > 0:
                below = row[:a] + (row[a] - 1,) + row[a + 1:]
                if below not in present:
                    raise ValueError(
                        f"set is not downward closed: {row} present "
                        f"but {below} missing")
    bound = max(max(row) for row in rows)
    arr = np.asarray(rows, dtype=np.int64)
    return IndexSet(dim, bound, kind, arr)


def neighbor(iset: IndexSet, index, axis: int, delta: int) -> int | None:
    """Ordinal of index +- e_axis, or None when the neighbor is absent.

    Absence (outside the cube, or pruned by a reduced set) is an ordinary
    result, never an error; ``axis`` is 1-based, ``delta`` is +1 or -1.
    """
    _check_axis(axis, iset.dim)
    if delta not in (-1, 1):
        raise ValueError(f"delta must be +1 or -1, got {delta}")
    if tuple(index) not in iset._pos:
        raise KeyError(f"index {tuple(index)} not in set")
    j = list(index)
    j[axis - 1] += delta
    if j[axis - 1] < 0:
        return None
    return iset._pos.get(tuple(j))


# -- coefficient vectors --------------------------------------------------------


@dataclass
class CoeffVector:
    """Dense coefficient vector over an index set, in canonical ordering."""

    iset: IndexSet
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype not in (np.float64, np.complex128):
            data = data.astype(np.complex128 if np.iscomplexobj(data)
                               else np.float64)
        if data.shape != (self.iset.size,):
            raise ValueError(f"data has shape {data.shape}, expected "
                             f"({self.iset.size},)")
        if not np.all(np.isfinite(data)):
            raise ValueError("coefficient vector contains non-finite entries")
        self.data = data

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def copy(self) -> "CoeffVector":
        return CoeffVector(self.iset, self.data.copy())

    def write_csv(self, path) -> None:
        iset = self.iset
        cols = [f"k_{l + 1}" for l in range(iset.dim)] + ["re", "im"]
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(cols) + "\n")
            for row, val in zip(iset.indices.tolist(), self.data):
                c = complex(val)
                fh.write(",".join(str(k) for k in row)
                         + f",{c.real:.17g},{c.imag:.17g}\n")


def read_coeff_csv(path, iset: IndexSet) -> CoeffVector:
    """Read a vector written by :meth:`CoeffVector.write_csv` back onto a set."""
    data = np.zeros(iset.size, dtype=np.complex128)
    seen = 0
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("k_1"):
            raise ValueError("malformed coefficient CSV header")
        for line in fh:
            parts = line.strip().split(",")
            idx = tuple(int(p) for p in parts[:iset.dim])
            data[iset.position(idx)] = float(parts[-2]) + 1j * float(parts[-1])
            seen += 1
    if seen != iset.size:
        raise ValueError(f"CSV holds {seen} rows, set has {iset.size}")
    return CoeffVector(iset, data)


def _full_positions(subset: IndexSet, full: IndexSet) -> np.ndarray:
    """Ordinals of subset members inside a full cube of the same dim/bound."""
    if full.kind != FULL:
        raise ValueError("target of restrict/extend must be a full cube")
    if subset.dim != full.dim or subset.bound != full.bound:
        raise ValueError(
            f"set mismatch: subset has (dim, bound) = ({subset.dim}, "
            f"{subset.bound}), full cube has ({full.dim}, {full.bound})")
    strides = (full.bound + 1) ** np.arange(full.dim - 1, -1, -1, dtype=np.int64)
    return subset.indices @ strides


def restrict(v: CoeffVector, subset: IndexSet) -> CoeffVector:
    """Drop the components of a full-cube vector that fall outside ``subset``."""
    pos = _full_positions(subset, v.iset)
    return CoeffVector(subset, v.data[pos].copy())


def extend(v: CoeffVector, full: IndexSet) -> CoeffVector:
    """Zero-pad a vector on a subset onto the full cube of equal dim/bound."""
    pos = _full_positions(v.iset, full)
    out = np.zeros(full.size, dtype=v.data.dtype)
    out[pos] = v.data
    return CoeffVector(full, out)


# -- plain-text serialization ---------------------------------------------------


def save_index_set(iset: IndexSet, path) -> None:
    """Write ``dim bound kind size`` then one index per line."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{iset.dim} {iset.bound} {iset.kind} {iset.size}\n")
        for row in iset.indices.tolist():
            fh.write(" ".join(str(c) for c in row) + "\n")


def load_index_set(path) -> IndexSet:
    text = Path(path).read_text().split("\n")
    head = text[0].split()
    if len(head) != 4:
        raise ValueError("malformed index-set header")
    dim, bound, kind, size = int(head[0]), int(head[1]), head[2], int(head[3])
    rows = [tuple(int(c) for c in line.split())
            for line in text[1:] if line.strip()]
    if len(rows) != size:
        raise ValueError(f"header promises {size} indices, file has {len(rows)}")
    out = from_indices(rows, dim=dim, kind=kind)
    if out.bound > bound:
        raise ValueError("stored indices exceed the recorded bound")
    # full/hyperbolic sets may have bound larger than max component only for
    # degenerate cases; trust the header, it is part of the set's identity
    return IndexSet(dim, bound, kind, out.indices)

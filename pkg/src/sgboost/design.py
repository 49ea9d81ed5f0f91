"""Grouped design matrices and cached thin singular value decompositions."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ._errors import ValidationError

RANK_CUTOFF = 1e-12


@dataclass(frozen=True)
class SvdCache:
    """Thin SVD ``M = U @ diag(d) @ V.T`` restricted to nonzero singular values.

    Attributes
    ----------
    U : ndarray of shape (n, r)
    d : ndarray of shape (r,)
        Strictly positive, non-increasing.
    V : ndarray of shape (k, r)
    """

    U: np.ndarray
    d: np.ndarray
    V: np.ndarray

    @property
    def r(self) -> int:
        return self.d.shape[0]

    @property
    def d2(self) -> np.ndarray:
        return self.d ** 2


def thin_svd(M) -> SvdCache:
    """Thin SVD of `M` with rank truncation and a fixed sign convention.

    Singular values ``d_j <= 1e-12 * d_1`` are dropped. Each column of ``V``
    is flipped so that its first nonzero entry is non-negative, which makes
    the factors reproducible.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2 or M.shape[1] < 1:
        raise ValidationError("thin_svd needs a matrix with at least one column")
    if not np.all(np.isfinite(M)):
        raise ValidationError("thin_svd: matrix contains NaN or infinite entries")
    U, d, Vt = np.linalg.svd(M, full_matrices=False)
    if d.size == 0 or d[0] == 0.0:
        raise ValidationError("rank zero")
    keep = d > RANK_CUTOFF * d[0]
    U, d, V = U[:, keep], d[keep], Vt[keep].T
    for j in range(d.size):
        nz = np.flatnonzero(V[:, j])
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]
            U[:, j] = -U[:, j]
    return SvdCache(U=np.ascontiguousarray(U), d=d, V=np.ascontiguousarray(V))


@dataclass(frozen=True)
class GroupedDesign:
    """Design matrix with a partition of its columns into groups.

    Groups are labelled ``1..G`` in order of first appearance; the original
    labels are kept in `group_labels` (index ``g - 1``).
    """

    X: np.ndarray
    group_of: np.ndarray
    group_labels: tuple = ()
    names: tuple = ()
    group_cols: tuple = field(init=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        group_of = np.asarray(self.group_of, dtype=int)
        G = int(group_of.max())
        cols = tuple(np.flatnonzero(group_of == g) for g in range(1, G + 1))
        object.__setattr__(self, "group_of", group_of)
        object.__setattr__(self, "group_cols", cols)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{j + 1}" for j in range(X.shape[1])))
        if not self.group_labels:
            object.__setattr__(self, "group_labels", tuple(range(1, G + 1)))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def G(self) -> int:
        return len(self.group_cols)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.array([c.size for c in self.group_cols])

    def group_matrix(self, g: int) -> np.ndarray:
        """Columns of group `g` (1-based)."""
        return self.X[:, self.group_cols[g - 1]]

    def subset_rows(self, rows) -> "GroupedDesign":
        return GroupedDesign(self.X[rows], self.group_of, self.group_labels, self.names)


def _relabel(group_map: Sequence[Hashable]) -> tuple[np.ndarray, tuple]:
    seen: dict = {}
    out = np.empty(len(group_map), dtype=int)
    for j, lab in enumerate(group_map):
        if lab not in seen:
            seen[lab] = len(seen) + 1
        out[j] = seen[lab]
    return out, tuple(seen)


def load_design(rows, group_map, names=None) -> GroupedDesign:
    """Validate raw rows and a per-column group map into a GroupedDesign.

    Parameters
    ----------
    rows : sequence of sequences of float
        ``n`` records of length ``p``.
    group_map : sequence of hashable
        Group label for every column. Any labels are accepted; they are
        relabelled ``1..G`` preserving first-appearance order.
    names : sequence of str, optional
        Column names used in error messages and outputs.

    Raises
    ------
    ValidationError
        On empty input, ragged rows, a group map of the wrong length, or a
        NaN/infinite cell (the message names the cell).
    """
    rows = list(rows)
    if not rows:
        raise ValidationError("empty input: no rows")
    p = len(rows[0])
    if p < 1:
        raise ValidationError("empty input: row 1 has no columns")
    for i, r in enumerate(rows):
        if len(r) != p:
            raise ValidationError(
                f"dimension mismatch: row {i + 1} has {len(r)} entries, expected {p}"
            )
    if len(group_map) != p:
        raise ValidationError(
            f"dimension mismatch: group map has {len(group_map)} labels for {p} columns"
        )
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(p))
    try:
        X = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"non-numeric entry: {exc}") from None
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        i, j = bad[0]
        raise ValidationError(
            f"non-finite entry {X[i, j]!r} at row {i + 1}, column {j + 1} ({names[j]})"
        )
    group_of, labels = _relabel(list(group_map))
    return GroupedDesign(X, group_of, labels, names)


def design_from_groups(X, groups) -> GroupedDesign:
    """Build a design from a matrix and a list of column index lists."""
    X = np.asarray(X, dtype=float)
    group_map = np.zeros(X.shape[1], dtype=int)
    for g, cols in enumerate(groups, start=1):
        group_map[np.asarray(cols)] = g
    if np.any(group_map == 0):
        raise ValidationError("every column must belong to a group")
    return load_design(X.tolist(), group_map.tolist())


def read_csv_design(data_path, groups_path, outcome: str | None = None):
    """Read ``data.csv`` plus a ``variable,group`` map.

    Returns the design, the outcome vector (or None) and the column names.
    Errors carry the file name and line number.
    """
    with open(data_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{data_path}: empty file (header row required)") from None
        raw = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ValidationError(
                    f"{data_path}:{lineno}: {len(rec)} fields, header has {len(header)}"
                )
            try:
                raw.append([float(v) for v in rec])
            except ValueError:
                raise ValidationError(f"{data_path}:{lineno}: non-numeric value") from None
    if not raw:
        raise ValidationError(f"{data_path}: no data rows")
    data = np.array(raw)
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        i, j = bad[0]
        raise ValidationError(f"{data_path}:{i + 2}: non-finite value in column {header[j]}")

    gmap = {}
    with open(groups_path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or [h.strip() for h in head[:2]] != ["variable", "group"]:
            raise ValidationError(f"{groups_path}:1: header must be 'variable,group'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) < 2:
                raise ValidationError(f"{groups_path}:{lineno}: expected 'variable,group'")
            gmap[rec[0].strip()] = rec[1].strip()

    y = None
    if outcome is not None:
        if outcome not in header:
            raise ValidationError(f"{data_path}:1: outcome column '{outcome}' not found")
        y = data[:, header.index(outcome)]
    names = [h for h in header if h != outcome]
    unknown = [v for v in gmap if v not in names]
    if unknown:
        raise ValidationError(f"{groups_path}: variable '{unknown[0]}' not in {data_path}")
    missing = [v for v in names if v not in gmap]
    if missing:
        raise ValidationError(f"{groups_path}: no group for variable '{missing[0]}'")
    idx = [header.index(v) for v in names]
    gd = load_design(data[:, idx].tolist(), [gmap[v] for v in names], names)
    return gd, y

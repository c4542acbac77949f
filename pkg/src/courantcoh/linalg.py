"""Exact sparse linear algebra over a field.

Matrices are lists of sparse rows (dict col -> scalar).  Pivoting is
deterministic: rows are processed in order and the pivot is the first column
(in the fixed column order) with a nonzero entry, so echelon forms, ranks,
kernels and solution representatives are reproducible across runs.
"""

from __future__ import annotations


class SparseMatrix:
    """m x n sparse matrix; rows are dicts mapping column index to scalar."""

    def __init__(self, field, nrows, ncols, rows=None):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self.rows = [dict(r) for r in rows] if rows is not None else [dict() for _ in range(nrows)]

    def set(self, i, j, value):
        if value:
            self.rows[i][j] = value
        else:
            self.rows[i].pop(j, None)

    def add_to(self, i, j, value):
        cur = self.rows[i].get(j)
        new = value if cur is None else cur + value
        self.set(i, j, new)

    def copy(self):
        return SparseMatrix(self.field, self.nrows, self.ncols, self.rows)

    def transpose(self):
        out = SparseMatrix(self.field, self.ncols, self.nrows)
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                out.rows[j][i] = v
        return out

    def matmul(self, other):
        assert self.ncols == other.nrows
        out = SparseMatrix(self.field, self.nrows, other.ncols)
        for i, row in enumerate(self.rows):
            acc = {}
            for k, v in row.items():
                for j, w in other.rows[k].items():
                    cur = acc.get(j)
                    acc[j] = v * w if cur is None else cur + v * w
            out.rows[i] = {j: v for j, v in acc.items() if v}
        return out

    def is_zero(self):
        return all(not row for row in self.rows)

    def apply(self, vec):
        """Matrix times a sparse column vector (dict)."""
        out = {}
        for i, row in enumerate(self.rows):
            s = None
            for j, v in row.items():
                w = vec.get(j)
                if w:
                    s = v * w if s is None else s + v * w
            if s:
                out[i] = s
        return out


def row_echelon(mat):
    """Return (echelon_rows, pivot_cols).

    echelon_rows is a list of reduced sparse rows; pivot_cols[k] is the pivot
    column of echelon_rows[k], strictly increasing order is NOT forced (rows
    are reduced in input order), but the result spans the row space and each
    pivot column appears in exactly one row with entry 1.
    """
    rows = []
    pivots = []
    for raw in mat.rows:
        row = dict(raw)
        # reduce against existing pivots
        for prow, pc in zip(rows, pivots):
            v = row.get(pc)
            if v:
                for j, w in prow.items():
                    cur = row.get(j)
                    nv = (cur - v * w) if cur is not None else -v * w
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
        if not row:
            continue
        pc = min(row.keys())
        inv = mat.field.one / row[pc]
        row = {j: v * inv for j, v in row.items()}
        # back-substitute into existing rows
        for k, (prow, qc) in enumerate(zip(rows, pivots)):
            v = prow.get(pc)
            if v:
                newr = dict(prow)
                for j, w in row.items():
                    cur = newr.get(j)
                    nv = (cur - v * w) if cur is not None else -v * w
                    if nv:
                        newr[j] = nv
                    else:
                        newr.pop(j, None)
                rows[k] = newr
        rows.append(row)
        pivots.append(pc)
    return rows, pivots


def rank(mat):
    return len(row_echelon(mat)[0])


def nullspace(mat):
    """Deterministic basis of the right kernel, as sparse column dicts."""
    rows, pivots = row_echelon(mat)
    pivset = set(pivots)
    basis = []
    for j in range(mat.ncols):
        if j in pivset:
            continue
        vec = {j: mat.field.one}
        for row, pc in zip(rows, pivots):
            v = row.get(j)
            if v:
                vec[pc] = -v
        basis.append(vec)
    return basis


def solve(mat, rhs):
    """One solution x of mat @ x = rhs (sparse dicts), or None if unsolvable."""
    field = mat.field
    aug_cols = mat.ncols + 1
    aug = SparseMatrix(field, mat.nrows, aug_cols)
    for i, row in enumerate(mat.rows):
        aug.rows[i] = dict(row)
    for i, v in rhs.items():
        if v:
            aug.rows[i][mat.ncols] = v
    rows, pivots = row_echelon(aug)
    x = {}
    for row, pc in zip(rows, pivots):
        if pc == mat.ncols:
            return None  # inconsistent
        v = row.get(mat.ncols)
        if v:
            x[pc] = v
    return x


def residual_zero(mat, x, rhs):
    out = mat.apply(x)
    keys = set(out) | set(k for k, v in rhs.items() if v)
    return all(out.get(k, mat.field.zero) == rhs.get(k, mat.field.zero) for k in keys)

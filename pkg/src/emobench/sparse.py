"""Minimal CSR sparse matrix used by every feature/classifier stage.

Only the operations the pipeline needs, nothing else. Invariants held by
construction: indices within a row are strictly increasing, stored values are
never exactly zero, dtypes are fixed (indptr int64, indices int32, data
float64) so serialized output is platform independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SparseRow:
    """One sparse vector: sorted column indices, their values, full width."""

    indices: np.ndarray
    values: np.ndarray
    n_cols: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.n_cols)
        out[self.indices] = self.values
        return out


@dataclass
class CsrMatrix:
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    shape: tuple[int, int]
    # cached column-major view, built on first use
    _csc: tuple | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_dicts(cls, rows: list[dict[int, float]], n_cols: int) -> "CsrMatrix":
        """Build from one {column: value} mapping per row. Zeros are dropped."""
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        all_idx: list[int] = []
        all_val: list[float] = []
        for i, row in enumerate(rows):
            cols = sorted(k for k, v in row.items() if v != 0.0)
            for c in cols:
                if not 0 <= c < n_cols:
                    raise ValueError(f"column {c} out of range for width {n_cols}")
                all_idx.append(c)
                all_val.append(float(row[c]))
            indptr[i + 1] = len(all_idx)
        return cls(
            indptr=indptr,
            indices=np.asarray(all_idx, dtype=np.int32),
            data=np.asarray(all_val, dtype=np.float64),
            shape=(len(rows), n_cols),
        )

    @property
    def n_rows(self) -> int:
        return self.shape[0]

    @property
    def n_cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def row(self, i: int) -> SparseRow:
        s, e = int(self.indptr[i]), int(self.indptr[i + 1])
        return SparseRow(self.indices[s:e], self.data[s:e], self.n_cols)

    def take_rows(self, row_ids) -> "CsrMatrix":
        """New matrix holding the given rows, in the given order."""
        row_ids = np.asarray(row_ids, dtype=np.int64)
        lengths = self.indptr[row_ids + 1] - self.indptr[row_ids]
        indptr = np.zeros(len(row_ids) + 1, dtype=np.int64)
        np.cumsum(lengths, out=indptr[1:])
        indices = np.empty(int(indptr[-1]), dtype=np.int32)
        data = np.empty(int(indptr[-1]), dtype=np.float64)
        for k, r in enumerate(row_ids):
            s, e = int(self.indptr[r]), int(self.indptr[r + 1])
            indices[indptr[k]:indptr[k + 1]] = self.indices[s:e]
            data[indptr[k]:indptr[k + 1]] = self.data[s:e]
        return CsrMatrix(indptr, indices, data, (len(row_ids), self.n_cols))

    def to_csc(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Column-major copy as (col_indptr, row_ids, values), cached.

        Entries within a column keep ascending row order; tree kernels rely
        on that for deterministic equal-value tie handling.
        """
        if self._csc is None:
            n_rows, n_cols = self.shape
            counts = np.bincount(self.indices, minlength=n_cols)
            col_indptr = np.zeros(n_cols + 1, dtype=np.int64)
            np.cumsum(counts, out=col_indptr[1:])
            row_of = np.repeat(np.arange(n_rows, dtype=np.int32),
                               np.diff(self.indptr).astype(np.int64))
            # stable sort by column keeps ascending row order inside columns
            order = np.argsort(self.indices, kind="stable")
            self._csc = (col_indptr, row_of[order], self.data[order])
        return self._csc

    def row_norms(self) -> np.ndarray:
        """Euclidean norm of every row."""
        sq = self.data * self.data
        out = np.zeros(self.n_rows)
        np.add.at(out, np.repeat(np.arange(self.n_rows), np.diff(self.indptr).astype(np.int64)), sq)
        return np.sqrt(out)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for i in range(self.n_rows):
            s, e = int(self.indptr[i]), int(self.indptr[i + 1])
            out[i, self.indices[s:e]] = self.data[s:e]
        return out


def vstack(blocks: list[CsrMatrix]) -> CsrMatrix:
    if not blocks:
        raise ValueError("vstack needs at least one block")
    n_cols = blocks[0].n_cols
    if any(b.n_cols != n_cols for b in blocks):
        raise ValueError("vstack width mismatch")
    indptr = [np.zeros(1, dtype=np.int64)]
    offset = 0
    for b in blocks:
        indptr.append(b.indptr[1:] + offset)
        offset += b.nnz
    return CsrMatrix(
        indptr=np.concatenate(indptr),
        indices=np.concatenate([b.indices for b in blocks]) if blocks else np.empty(0, np.int32),
        data=np.concatenate([b.data for b in blocks]),
        shape=(sum(b.n_rows for b in blocks), n_cols),
    )

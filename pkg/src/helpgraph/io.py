"""Text file formats: TSV edge lists and id maps, CSV matrices, labels TSV.

Floats are written with ``repr`` so files round-trip exactly and two runs on
the same inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import math
from typing import Iterable, Sequence

import numpy as np

from .graph import BipartiteGraph, DomainGraph


class DataFormatError(ValueError):
    """Malformed or inconsistent input file; carries the path and line number."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def _fmt(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x)) if x != 0 or math.copysign(1, x) > 0 else "0"
    return repr(x)


class IdMap:
    """Insertion-ordered string id to dense index mapping."""

    def __init__(self, ids: Iterable[str] = ()):
        self.ids: list[str] = []
        self._index: dict[str, int] = {}
        for i in ids:
            self.add(i)

    def add(self, key: str) -> int:
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.ids)
            self._index[key] = idx
            self.ids.append(key)
        return idx

    def get(self, key: str) -> int | None:
        return self._index.get(key)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, key: str) -> bool:
        return key in self._index


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield lineno, line


def read_edge_list(path, users: IdMap | None = None, domains: IdMap | None = None,
                   strict_ids: bool = False) -> tuple[BipartiteGraph, IdMap, IdMap]:
    """Parse ``user_id<TAB>domain_id<TAB>weight`` lines.

    With ``strict_ids`` every id must already exist in the supplied maps
    (used when feature files fix the node sets); otherwise unseen ids are
    appended in order of first appearance.
    """
    users = users if users is not None else IdMap()
    domains = domains if domains is not None else IdMap()
    seen: dict[tuple[int, int], int] = {}
    us, ds, ws = [], [], []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 3:
            raise DataFormatError(path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
        uid, did, wtxt = parts
        try:
            w = float(wtxt)
        except ValueError:
            raise DataFormatError(path, lineno, f"weight {wtxt!r} is not a number") from None
        if not math.isfinite(w) or w < 0:
            raise DataFormatError(path, lineno, "weight must be finite and >= 0")
        if strict_ids:
            u, d = users.get(uid), domains.get(did)
            if u is None:
                raise DataFormatError(path, lineno, f"unknown user id {uid!r}")
            if d is None:
                raise DataFormatError(path, lineno, f"unknown domain id {did!r}")
        else:
            u, d = users.add(uid), domains.add(did)
        if (u, d) in seen:
            raise DataFormatError(path, lineno, f"duplicate edge ({uid}, {did}); first seen on line {seen[(u, d)]}")
        seen[(u, d)] = lineno
        us.append(u)
        ds.append(d)
        ws.append(w)
    g = BipartiteGraph.from_arrays(len(users), len(domains), us, ds, ws)
    return g, users, domains


def write_edge_list(path, g: BipartiteGraph, user_ids: Sequence[str], domain_ids: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for u, d, w in zip(g.users.tolist(), g.domains.tolist(), g.weights.tolist()):
            fh.write(f"{user_ids[u]}\t{domain_ids[d]}\t{_fmt(w)}\n")


def write_id_map(path, ids: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i, key in enumerate(ids):
            fh.write(f"{key}\t{i}\n")


def read_id_map(path) -> IdMap:
    pairs = []
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[1].isdigit():
            raise DataFormatError(path, lineno, "expected id<TAB>index")
        pairs.append((int(parts[1]), parts[0]))
    pairs.sort()
    if [p[0] for p in pairs] != list(range(len(pairs))):
        raise DataFormatError(path, None, "indices must be 0..n-1")
    return IdMap(p[1] for p in pairs)


def write_domain_graph(path, dg: DomainGraph, domain_ids: Sequence[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i, j, w in zip(dg.src.tolist(), dg.dst.tolist(), dg.weights.tolist()):
            fh.write(f"{domain_ids[i]}\t{domain_ids[j]}\t{_fmt(w)}\n")


def write_matrix_csv(path, ids: Sequence[str], matrix: np.ndarray, prefix: str = "f") -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["id"] + [f"{prefix}{k}" for k in range(matrix.shape[1])]) + "\n")
        for key, row in zip(ids, matrix.tolist()):
            fh.write(",".join([key] + [repr(float(v)) for v in row]) + "\n")


def read_matrix_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(path, 1, "empty file, expected a header row") from None
        if not header or header[0] != "id":
            raise DataFormatError(path, 1, "header must start with 'id'")
        width = len(header) - 1
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 1:
                raise DataFormatError(path, lineno, f"expected {width + 1} columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise DataFormatError(path, lineno, "non-numeric matrix entry") from None
            ids.append(row[0])
    if len(set(ids)) != len(ids):
        raise DataFormatError(path, None, "duplicate row ids")
    mat = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    if not np.all(np.isfinite(mat)):
        raise DataFormatError(path, None, "matrix contains non-finite values")
    return ids, mat


def write_labels(path, domain_ids: Sequence[str], labeled, labels, train_mask) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for d, y, tr in zip(np.asarray(labeled).tolist(), np.asarray(labels).tolist(),
                            np.asarray(train_mask).tolist()):
            fh.write(f"{domain_ids[d]}\t{int(y)}\t{'train' if tr else 'test'}\n")


def read_labels(path, domains: IdMap) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (domain indices, labels, train mask); split column is optional."""
    idx, ys, train = [], [], []
    seen = set()
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise DataFormatError(path, lineno, "expected domain_id<TAB>label[<TAB>split]")
        d = domains.get(parts[0])
        if d is None:
            raise DataFormatError(path, lineno, f"unknown domain id {parts[0]!r}")
        if d in seen:
            raise DataFormatError(path, lineno, f"domain {parts[0]!r} labeled twice")
        if parts[1] not in ("0", "1"):
            raise DataFormatError(path, lineno, "label must be 0 or 1")
        split = parts[2] if len(parts) == 3 else "train"
        if split not in ("train", "test"):
            raise DataFormatError(path, lineno, "split must be 'train' or 'test'")
        seen.add(d)
        idx.append(d)
        ys.append(float(parts[1]))
        train.append(split == "train")
    return np.array(idx, dtype=np.int64), np.array(ys), np.array(train, dtype=bool)


def read_user_labels(path) -> dict[str, int]:
    out: dict[str, int] = {}
    for lineno, line in _data_lines(path):
        parts = line.split("\t")
        if len(parts) != 2 or parts[1] not in ("0", "1"):
            raise DataFormatError(path, lineno, "expected user_id<TAB>0|1")
        if parts[0] in out:
            raise DataFormatError(path, lineno, f"user {parts[0]!r} labeled twice")
        out[parts[0]] = int(parts[1])
    return out


def write_user_labels(path, ids: Sequence[str], labels) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, y in zip(ids, np.asarray(labels).tolist()):
            fh.write(f"{key}\t{int(y)}\n")


def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else _fmt(v) if isinstance(v, (int, np.integer)) else repr(float(v))
                              for v in row) + "\n")

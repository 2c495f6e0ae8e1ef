"""Finite ray sets in R^3 and exhaustive Kochen-Specker colourability search.

A colouring assigns 0 or 1 to every ray.  It is legal when each complete
orthogonal triad carries exactly one 0 and no orthogonal pair carries two 0s.
The solver is plain backtracking with unit propagation, deterministic in the
input ray order, and exhaustive, so an unsatisfiable verdict is a proof for
the given orthogonality structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import TOL
from .spin1 import normalize

__all__ = [
    "Coloring",
    "IncompleteColoringError",
    "OrthoStructure",
    "RayFileError",
    "RaySet",
    "Unsatisfiable",
    "Violation",
    "check_coloring",
    "find_legal_coloring",
    "ortho_structure",
    "peres_rays",
]


class IncompleteColoringError(ValueError):
    """A total colouring was required."""


class RayFileError(ValueError):
    """A ray file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class RaySet:
    """Projective unit rays (v and -v identified), deduplicated on construction."""

    def __init__(self, vectors, labels=None):
        rays = [normalize(v) for v in vectors]
        if labels is None:
            labels = [f"ray{i}" for i in range(len(rays))]
        labels = tuple(str(label) for label in labels)
        if len(labels) != len(rays):
            raise ValueError("one label per ray required")
        for i in range(len(rays)):
            for j in range(i):
                apart = min(
                    float(np.linalg.norm(rays[i] - rays[j])),
                    float(np.linalg.norm(rays[i] + rays[j])),
                )
                if apart <= 1e-9:
                    raise ValueError(f"rays {j} and {i} coincide up to sign")
        self._rays = np.array(rays) if rays else np.zeros((0, 3))
        self._rays.setflags(write=False)
        self.labels = labels

    def __len__(self) -> int:
        return self._rays.shape[0]

    @property
    def rays(self) -> np.ndarray:
        """(n, 3) array, one unit ray per row."""
        return self._rays

    def ray(self, i: int) -> np.ndarray:
        return self._rays[i]

    def subset(self, indices) -> "RaySet":
        indices = list(indices)
        return RaySet([self._rays[i] for i in indices], [self.labels[i] for i in indices])

    @classmethod
    def from_text(cls, text: str) -> "RaySet":
        """Parse one ray per line: three whitespace-separated reals, with
        ``#`` comments.  Rays are normalized on load."""
        vectors = []
        labels = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise RayFileError(f"expected 3 numbers, got {len(parts)}", lineno)
            try:
                vec = [float(part) for part in parts]
            except ValueError:
                raise RayFileError(f"could not parse {line!r}", lineno) from None
            if not all(np.isfinite(vec)) or not any(vec):
                raise RayFileError("ray must be a finite nonzero vector", lineno)
            vectors.append(vec)
            labels.append(f"line{lineno}")
        if not vectors:
            raise ValueError("ray file contains no rays")
        return cls(vectors, labels)

    @classmethod
    def load(cls, path) -> "RaySet":
        return cls.from_text(Path(path).read_text())


_SQRT2 = float(np.sqrt(2.0))


def peres_rays() -> RaySet:
    """The 33-ray Peres configuration: the rays with components drawn from
    {0, +-1, +-sqrt(2)} that make up the standard uncolourable set, after
    identifying v with -v."""
    r = _SQRT2
    base = [
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1), (0, 1, 1), (0, 1, -1),
        (0, 1, r), (0, -1, r), (0, r, 1), (0, r, -1),
        (1, 0, r), (-1, 0, r), (r, 0, 1), (r, 0, -1),
        (1, r, 0), (-1, r, 0), (r, 1, 0), (r, -1, 0),
        (r, 1, 1), (r, 1, -1), (r, -1, 1), (r, -1, -1),
        (1, r, 1), (1, r, -1), (-1, r, 1), (-1, r, -1),
        (1, 1, r), (1, -1, r), (-1, 1, r), (-1, -1, r),
    ]

    def fmt(c) -> str:
        if c == r:
            return "r2"
        if c == -r:
            return "-r2"
        return str(int(c))

    labels = [" ".join(fmt(c) for c in v) for v in base]
    return RaySet(base, labels)


@dataclass(frozen=True)
class OrthoStructure:
    """Orthogonality structure of a ray set at some tolerance: the orthogonal
    index pairs and the complete (pairwise orthogonal) index triples."""

    n_rays: int
    pairs: tuple[tuple[int, int], ...]
    triads: tuple[tuple[int, int, int], ...]


def ortho_structure(rs: RaySet, tol: float = TOL.ray_orthogonality) -> OrthoStructure:
    if tol < 0:
        raise ValueError("tol must be >= 0")
    n = len(rs)
    gram = np.abs(rs.rays @ rs.rays.T)
    adjacent = gram <= tol
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if adjacent[i, j]]
    triads = [
        (i, j, k)
        for i in range(n)
        for j in range(i + 1, n)
        if adjacent[i, j]
        for k in range(j + 1, n)
        if adjacent[i, k] and adjacent[j, k]
    ]
    return OrthoStructure(n_rays=n, pairs=tuple(pairs), triads=tuple(triads))


@dataclass(frozen=True)
class Coloring:
    """Total {0,1} assignment, keyed by ray index."""

    values: dict[int, int]


@dataclass(frozen=True)
class Unsatisfiable:
    """Certificate that the exhaustive search closed every branch;
    ``contradictions`` counts the direct conflicts encountered."""

    contradictions: int


@dataclass(frozen=True)
class Violation:
    kind: str  # "triad" or "pair"
    indices: tuple[int, ...]
    values: tuple[int, ...]


def find_legal_coloring(structure: OrthoStructure) -> Coloring | Unsatisfiable:
    """Search for a legal colouring by exhaustive backtracking.

    Constraints: no orthogonal pair is (0, 0) and no complete triad is
    (1, 1, 1); together these force exactly one 0 per complete triad.
    Variable order is ray input order and 0 is branched first, so the result
    is deterministic for a given structure.
    """
    n = structure.n_rays
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i, j in structure.pairs:
        neighbors[i].append(j)
        neighbors[j].append(i)
    triads_of: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for triad in structure.triads:
        for i in triad:
            triads_of[i].append(triad)

    assignment = [-1] * n
    contradictions = 0

    def propagate(trail: list[int], start: int, value: int) -> bool:
        queue = [(start, value)]
        while queue:
            i, v = queue.pop()
            if assignment[i] != -1:
                if assignment[i] != v:
                    return False
                continue
            assignment[i] = v
            trail.append(i)
            if v == 0:
                for j in neighbors[i]:
                    if assignment[j] == 0:
                        return False
                    if assignment[j] == -1:
                        queue.append((j, 1))
            for triad in triads_of[i]:
                vals = [assignment[k] for k in triad]
                if vals.count(1) == 3:
                    return False
                if vals.count(1) == 2 and vals.count(-1) == 1:
                    queue.append((triad[vals.index(-1)], 0))
        return True

    def search(start: int) -> bool:
        nonlocal contradictions
        i = start
        while i < n and assignment[i] != -1:
            i += 1
        if i == n:
            return True
        for v in (0, 1):
            trail: list[int] = []
            consistent = propagate(trail, i, v)
            if consistent and search(i + 1):
                return True
            if not consistent:
                contradictions += 1
            for j in trail:
                assignment[j] = -1
        return False

    if search(0):
        return Coloring(values={i: assignment[i] for i in range(n)})
    return Unsatisfiable(contradictions=contradictions)


def check_coloring(structure: OrthoStructure, coloring: Coloring) -> list[Violation]:
    """All rule violations of a total colouring: triads whose values are not
    two 1s and one 0, and orthogonal pairs coloured (0, 0)."""
    values = coloring.values
    missing = [i for i in range(structure.n_rays) if values.get(i) not in (0, 1)]
    if missing:
        raise IncompleteColoringError(f"rays without a colour: {missing}")
    out = []
    for (i, j, k) in structure.triads:
        triple = (values[i], values[j], values[k])
        if sorted(triple) != [0, 1, 1]:
            out.append(Violation("triad", (i, j, k), triple))
    for (i, j) in structure.pairs:
        if values[i] == 0 and values[j] == 0:
            out.append(Violation("pair", (i, j), (0, 0)))
    return out

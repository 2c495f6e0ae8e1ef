"""Spin-1 operators in the Cartesian basis, and measurement-axis triads.

The component matrices are fixed as (L_k)_ij = -i eps_kij.  In this basis the
squared projection along a unit vector n has the closed form
(n.L)^2 = 1 - |n><n|, which the tests lean on as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin

import numpy as np

from .linalg import TOL

__all__ = [
    "NonUnitVectorError",
    "Triad",
    "angular_momentum_ops",
    "as_unit_vector",
    "canonical_angles",
    "normalize",
    "orthonormality_defect",
    "spherical_basis_transform",
    "squared_projection",
    "triad_from_angles",
]


class NonUnitVectorError(ValueError):
    """A direction argument is not normalized to the working tolerance."""


_L1 = np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]])
_L2 = np.array([[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]])
_L3 = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]])


def angular_momentum_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three spin-1 component matrices (L1, L2, L3)."""
    return _L1.copy(), _L2.copy(), _L3.copy()


def as_unit_vector(v, tol: float = TOL.unit_vector) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    if vec.shape != (3,):
        raise NonUnitVectorError(f"expected a 3-vector, got shape {vec.shape}")
    if abs(float(vec @ vec) - 1.0) > tol:
        raise NonUnitVectorError(f"squared norm {float(vec @ vec)!r} is not 1 within {tol:g}")
    return vec


def normalize(v) -> np.ndarray:
    vec = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise NonUnitVectorError("cannot normalize the zero vector")
    return vec / norm


def squared_projection(n) -> np.ndarray:
    """(n.L)^2: the rank-2 projector onto the plane normal to the unit vector n."""
    u = as_unit_vector(n)
    n_dot_l = u[0] * _L1 + u[1] * _L2 + u[2] * _L3
    return n_dot_l @ n_dot_l


@dataclass(frozen=True)
class Triad:
    """Three unit measurement axes, required to be right-handed.

    ``angles`` keeps the (psi, theta, phi) parameters when the triad was built
    by :func:`triad_from_angles`, and is None otherwise.
    """

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    angles: tuple[float, float, float] | None = None

    def __post_init__(self):
        for name in ("e1", "e2", "e3"):
            axis = as_unit_vector(getattr(self, name)).copy()
            axis.setflags(write=False)
            object.__setattr__(self, name, axis)
        if float(np.linalg.det(self.frame())) <= 0.0:
            raise ValueError("triad must be right-handed (positive determinant)")

    def frame(self) -> np.ndarray:
        """3x3 matrix with the three axes as columns."""
        return np.column_stack([self.e1, self.e2, self.e3])

    @property
    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.e1, self.e2, self.e3

    def axis(self, r: int) -> np.ndarray:
        if r not in (1, 2, 3):
            raise IndexError(f"axis index must be 1, 2 or 3, got {r}")
        return self.axes[r - 1]


def triad_from_angles(psi: float, theta: float, phi: float) -> Triad:
    """Near-orthonormal triad: e1 along x, e2 tilted from y by psi inside the
    xy-plane, e3 tilted from z by theta towards azimuth phi."""
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([sin(psi), cos(psi), 0.0])
    e3 = np.array([sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta)])
    return Triad(e1, e2, e3, angles=(float(psi), float(theta), float(phi)))


def orthonormality_defect(t: Triad) -> float:
    """max over axis pairs of |e_r . e_s|, r != s."""
    return float(max(abs(t.e1 @ t.e2), abs(t.e1 @ t.e3), abs(t.e2 @ t.e3)))


def canonical_angles(t: Triad) -> tuple[float, float, float]:
    """Angles (psi, theta, phi) of the triad in its own canonical frame.

    The frame is u1 = e1, u2 the unit component of e2 normal to e1, and
    u3 = u1 x u2; in it the axes read exactly like the output of
    :func:`triad_from_angles`.  phi is returned in (-pi, pi], theta in [0, pi].
    """
    u1 = t.e1
    w = t.e2 - float(t.e2 @ u1) * u1
    norm_w = float(np.linalg.norm(w))
    if norm_w < 1e-12:
        raise ValueError("e1 and e2 are collinear; the canonical frame is undefined")
    u2 = w / norm_w
    u3 = np.cross(u1, u2)
    psi = float(np.arcsin(np.clip(t.e1 @ t.e2, -1.0, 1.0)))
    theta = float(np.arccos(np.clip(t.e3 @ u3, -1.0, 1.0)))
    phi = float(np.arctan2(t.e3 @ u2, t.e3 @ u1))
    return psi, theta, phi


def spherical_basis_transform() -> np.ndarray:
    """Unitary W whose columns express the L3 eigenvectors (m = +1, 0, -1) in
    the Cartesian basis, so that W† L3 W = diag(1, 0, -1)."""
    s = 1.0 / np.sqrt(2.0)
    return np.array(
        [
            [-s, 0.0, s],
            [-1j * s, 0.0, -1j * s],
            [0.0, 1.0, 0.0],
        ]
    )

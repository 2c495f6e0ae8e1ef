"""Measurement models on a system (x) apparatus product space.

Conventions, fixed once and relied on everywhere downstream:

* product indexing is row-major with the system index major, i.e. joint
  operators are built as ``tensor(system_op, apparatus_op)``;
* pointer 1 is the most significant digit of an outcome label, so with three
  binary pointers the outcome "110" is apparatus basis index 6;
* the apparatus ready state is the all-zeros outcome basis vector.

A :class:`MeasurementModel` bundles the total interaction unitary with the
pointer layout and ready state; :func:`kraus_operators` compresses it to
system-space operators and :func:`povm` squares those into outcome
probabilities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    TOL,
    DimensionMismatchError,
    as_operator,
    as_state,
    dagger,
    exp_i,
    hermitian_defect,
    hermitian_eig,
    is_psd,
    is_unitary,
    polar_unitary,
    tensor,
)
from .spin1 import Triad, angular_momentum_ops, squared_projection

__all__ = [
    "ILLEGAL_OUTCOMES",
    "LEGAL_OUTCOMES",
    "DegenerateSpectrumError",
    "MeasurementModel",
    "NotNormalizedError",
    "NotProjectorError",
    "PointerSpace",
    "Povm",
    "contemporaneous_unitary",
    "kraus_operators",
    "marginal_povm",
    "outcome_probabilities",
    "perturbed_single_measurement",
    "pointer_observable",
    "pointer_sigma",
    "povm",
    "povm_from_jsonable",
    "povm_to_json",
    "povm_to_jsonable",
    "sequential_unitary",
    "single_ideal_unitary",
    "small_angle_povm_elements",
]

# For a joint reading of the three squared projections along an orthonormal
# triad, exactly one of the three values is 0; these are the combinations a
# one-zero-per-triad value assignment permits and forbids.
LEGAL_OUTCOMES = ("110", "101", "011")
ILLEGAL_OUTCOMES = ("111", "100", "010", "001", "000")


class NotProjectorError(ValueError):
    """An orthogonal projector was required."""


class DegenerateSpectrumError(ValueError):
    """An observable with a non-degenerate spectrum was required."""


class NotNormalizedError(ValueError):
    """A normalized state vector was required."""


@dataclass(frozen=True)
class PointerSpace:
    """Commuting pointer register; one digit per pointer, most significant first.

    ``values[r-1][k]`` is the reading recorded when pointer r sits in its k-th
    basis state.  Binary pointers read 0/1; a generalized pointer for a
    d-level observable carries that observable's eigenvalues instead.
    """

    dims: tuple[int, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("at least one pointer is required")
        if any(d < 2 or d > 10 for d in dims):
            raise ValueError("pointer dimensions must lie in 2..10 (single-digit labels)")
        values = tuple(tuple(float(x) for x in v) for v in self.values)
        if len(values) != len(dims) or any(len(v) != d for v, d in zip(values, dims)):
            raise ValueError("pointer values must match pointer dimensions")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "values", values)

    @classmethod
    def bits(cls, n_pointers: int) -> "PointerSpace":
        return cls(dims=(2,) * n_pointers, values=((0.0, 1.0),) * n_pointers)

    @classmethod
    def single(cls, readings) -> "PointerSpace":
        vals = tuple(float(x) for x in readings)
        return cls(dims=(len(vals),), values=(vals,))

    @property
    def n_pointers(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def outcomes(self) -> tuple[str, ...]:
        """All outcome labels in apparatus basis-index order."""
        labels = [""]
        for d in self.dims:
            labels = [label + str(k) for label in labels for k in range(d)]
        return tuple(labels)

    def outcome_index(self, outcome: str) -> int:
        if len(outcome) != self.n_pointers:
            raise ValueError(f"outcome {outcome!r} does not have {self.n_pointers} digits")
        index = 0
        for digit, d in zip(outcome, self.dims):
            k = int(digit)
            if not 0 <= k < d:
                raise ValueError(f"digit {digit!r} out of range for a {d}-level pointer")
            index = index * d + k
        return index

    def outcome_values(self, outcome: str) -> tuple[float, ...]:
        self.outcome_index(outcome)
        return tuple(self.values[r][int(digit)] for r, digit in enumerate(outcome))

    def reading(self, outcome: str, r: int) -> float:
        """Value recorded by pointer r for the given outcome label."""
        self.check_pointer(r)
        return self.values[r - 1][int(outcome[r - 1])]

    def check_pointer(self, r: int) -> None:
        if not 1 <= r <= self.n_pointers:
            raise IndexError(f"pointer index {r} outside 1..{self.n_pointers}")


_SIGMA = np.array([[0.0, 1j], [-1j, 0.0]])


def pointer_sigma(r: int, pointers: PointerSpace) -> np.ndarray:
    """Flip generator of binary pointer r: sigma|0> = -i|1>, sigma|1> = i|0>,
    identity on every other pointer.  Hermitian, squares to the identity."""
    pointers.check_pointer(r)
    if pointers.dims[r - 1] != 2:
        raise ValueError(f"pointer {r} is not binary")
    op = np.eye(1, dtype=complex)
    for k, d in enumerate(pointers.dims, start=1):
        op = np.kron(op, _SIGMA if k == r else np.eye(d))
    return op


def pointer_observable(pointers: PointerSpace, r: int) -> np.ndarray:
    """Diagonal apparatus observable whose eigenvalues are pointer r's readings."""
    pointers.check_pointer(r)
    diag = [pointers.reading(outcome, r) for outcome in pointers.outcomes()]
    return np.diag(np.asarray(diag, dtype=complex))


def ready_state(pointers: PointerSpace) -> np.ndarray:
    """The all-zeros apparatus basis vector."""
    phi0 = np.zeros(pointers.dim, dtype=complex)
    phi0[0] = 1.0
    return phi0


@dataclass(frozen=True)
class MeasurementModel:
    """System-apparatus interaction: total unitary plus the apparatus ready state."""

    sys_dim: int
    pointers: PointerSpace
    phi0: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        phi0 = as_state(self.phi0, self.pointers.dim).copy()
        if abs(float(np.linalg.norm(phi0)) - 1.0) > TOL.state_norm:
            raise NotNormalizedError("apparatus ready state must be normalized")
        u = as_operator(self.U).copy()
        d = self.sys_dim * self.pointers.dim
        if u.shape != (d, d):
            raise DimensionMismatchError(f"U must be {d}x{d}, got {u.shape}")
        if not is_unitary(u, TOL.unitary):
            raise ValueError("U is not unitary within tolerance")
        phi0.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "phi0", phi0)
        object.__setattr__(self, "U", u)

    @property
    def dim(self) -> int:
        return self.sys_dim * self.pointers.dim


def single_ideal_unitary(projector, r: int, pointers: PointerSpace) -> np.ndarray:
    """Ideal coupling of a projector P to binary pointer r:
    U = (1-P)(x)1 + i P(x)sigma_r, which equals exp(i (pi/2) P(x)sigma_r)."""
    p = as_operator(projector)
    if hermitian_defect(p) > TOL.projector or float(np.abs(p @ p - p).max()) > TOL.projector:
        raise NotProjectorError("input is not an orthogonal projector within tolerance")
    sigma = pointer_sigma(r, pointers)
    d_sys = p.shape[0]
    return tensor(np.eye(d_sys) - p, np.eye(pointers.dim)) + 1j * tensor(p, sigma)


def sequential_unitary(t: Triad) -> MeasurementModel:
    """Chain of three ideal single-axis measurements: axis r couples to
    pointer r, applied in order 1, 2, 3.  The triad need not be orthonormal."""
    pointers = PointerSpace.bits(3)
    u = np.eye(3 * pointers.dim, dtype=complex)
    for r, axis in enumerate(t.axes, start=1):
        u = single_ideal_unitary(squared_projection(axis), r, pointers) @ u
    return MeasurementModel(3, pointers, ready_state(pointers), u)


def contemporaneous_unitary(t: Triad) -> MeasurementModel:
    """All three axis couplings switched on at once:
    U = exp(i (pi/2) sum_r P_r (x) sigma_r).

    For an exactly orthonormal triad the generator terms commute and this
    coincides with :func:`sequential_unitary`; otherwise it is a distinct
    approximate joint measurement of the same three projections.
    """
    pointers = PointerSpace.bits(3)
    generator = np.zeros((3 * pointers.dim,) * 2, dtype=complex)
    for r, axis in enumerate(t.axes, start=1):
        generator += tensor(squared_projection(axis), pointer_sigma(r, pointers))
    u = exp_i((np.pi / 2.0) * generator)
    return MeasurementModel(3, pointers, ready_state(pointers), u)


def kraus_operators(model: MeasurementModel) -> dict[str, np.ndarray]:
    """Compression of U between the ready state and each pointer outcome:
    T_a = (1 (x) <a|) U (1 (x) |phi0>), one system-space operator per outcome."""
    ds, da = model.sys_dim, model.pointers.dim
    u4 = model.U.reshape(ds, da, ds, da)
    body = np.tensordot(u4, model.phi0, axes=([3], [0]))  # (ds, da, ds)
    return {
        outcome: np.ascontiguousarray(body[:, k, :])
        for k, outcome in enumerate(model.pointers.outcomes())
    }


@dataclass(frozen=True)
class Povm:
    """Outcome-indexed positive elements E = T†T on the system space."""

    pointers: PointerSpace
    elements: dict[str, np.ndarray]
    kraus: dict[str, np.ndarray]

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.pointers.outcomes()

    @property
    def dim(self) -> int:
        return next(iter(self.elements.values())).shape[0]


def povm(model: MeasurementModel, *, validate: bool = True) -> Povm:
    """POVM of a measurement model.  With ``validate`` (the default) the
    elements are checked to be positive and to resolve the identity."""
    kraus = kraus_operators(model)
    elements = {a: dagger(t) @ t for a, t in kraus.items()}
    if validate:
        total = sum(elements.values())
        defect = float(np.abs(total - np.eye(model.sys_dim)).max())
        if defect > TOL.completeness:
            raise ValueError(f"POVM completeness defect {defect:.3e} exceeds tolerance")
        for a, element in elements.items():
            if not is_psd(element, TOL.psd):
                raise ValueError(f"POVM element {a} is not positive semidefinite")
    return Povm(pointers=model.pointers, elements=elements, kraus=kraus)


def marginal_povm(p: Povm, r: int) -> dict[int, np.ndarray]:
    """POVM for pointer r alone, ignoring the other readings; keyed by that
    pointer's basis index.  The elements sum to the identity."""
    p.pointers.check_pointer(r)
    dim = p.dim
    out = {k: np.zeros((dim, dim), dtype=complex) for k in range(p.pointers.dims[r - 1])}
    for outcome, element in p.elements.items():
        out[int(outcome[r - 1])] += element
    return out


def outcome_probabilities(p: Povm, psi) -> dict[str, float]:
    """p_a = <psi|E_a|psi> for every outcome of a normalized state."""
    state = as_state(psi, p.dim)
    if abs(float(np.linalg.norm(state)) - 1.0) > TOL.state_norm:
        raise NotNormalizedError("state must be normalized")
    return {
        a: float(np.real(state.conj() @ (element @ state)))
        for a, element in p.elements.items()
    }


def perturbed_single_measurement(observable, strength: float, seed: int) -> MeasurementModel:
    """Pointer coupling for a single non-degenerate observable, with random
    amplitude leakage mixed in and the result re-unitarized.

    The pointer has one level per eigenvalue and reads the eigenvalues
    themselves.  At ``strength`` 0 the coupling is the exact ideal one; for
    positive ``strength`` every transition amplitude out of the ready-state
    sector gains a perturbation drawn uniformly from the complex disc of that
    radius, and the closest unitary is taken by polar decomposition.
    """
    a = as_operator(observable)
    if strength < 0:
        raise ValueError("strength must be >= 0")
    eigenvalues, eigenvectors = hermitian_eig(a)
    gaps = np.diff(eigenvalues)
    if gaps.size and float(gaps.min()) < 1e-8:
        raise DegenerateSpectrumError("observable spectrum is (nearly) degenerate")
    d = a.shape[0]
    pointers = PointerSpace.single(eigenvalues)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)  # shift|k> = |k+1 mod d>
    ideal = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        eigenprojector = np.outer(eigenvectors[:, k], eigenvectors[:, k].conj())
        ideal += tensor(eigenprojector, np.linalg.matrix_power(shift, k))
    phi0 = ready_state(pointers)
    if strength == 0.0:
        return MeasurementModel(d, pointers, phi0, ideal)
    rng = np.random.default_rng(seed)
    radius = strength * np.sqrt(rng.uniform(size=(d, d * d)))
    phase = np.exp(2j * np.pi * rng.uniform(size=(d, d * d)))
    eps = radius * phase
    # eps[a, b*d + k] perturbs the amplitude |a>(x)|ready> -> |b>(x)|k>, with
    # a, b labelling the eigenbasis of the observable.
    leak = np.zeros((d * d, d * d), dtype=complex)
    for col in range(d):
        leak[:, col * d] = eps[col]
    vbig = tensor(eigenvectors, np.eye(d))
    perturbed = ideal + vbig @ leak @ dagger(vbig)
    return MeasurementModel(d, pointers, phi0, polar_unitary(perturbed))


def small_angle_povm_elements(psi: float, theta: float, phi: float) -> dict[str, np.ndarray]:
    """Second-order (in psi and theta) expansion of the sequential triad POVM.

    Valid for the near-orthonormal parameterization of
    :func:`spinmeas.spin1.triad_from_angles`; the omitted remainder is cubic
    in (|psi| + |theta|).
    """
    l1, l2, l3 = angular_momentum_ops()
    x1 = np.eye(3) - l1 @ l1
    x2 = np.eye(3) - l2 @ l2
    x3 = np.eye(3) - l3 @ l3
    anticomm = l2 @ l3 + l3 @ l2
    c, s = math.cos(phi), math.sin(phi)
    return {
        "111": psi**2 * x2 + theta**2 * x3 - theta * psi * c * anticomm,
        "110": (1.0 - theta**2) * x3 + theta * psi * c * anticomm,
        "101": (1.0 - theta**2 * s**2 - psi**2) * x2,
        "011": (1.0 - theta**2 * c**2 - psi**2) * x1,
        "100": theta**2 * s**2 * x2,
        "010": theta**2 * c**2 * x1,
        "001": psi**2 * x1,
        "000": np.zeros((3, 3), dtype=complex),
    }


def _matrix_to_pairs(matrix) -> list[list[float]]:
    flat = np.asarray(matrix, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs, dim: int) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    if flat.size != dim * dim:
        raise ValueError(f"expected {dim * dim} entries, got {flat.size}")
    return flat.reshape(dim, dim)


def povm_to_jsonable(p: Povm) -> dict:
    """JSON-ready document: outcome labels with row-major (re, im) matrix entries."""
    return {
        "dim": p.dim,
        "pointer_dims": list(p.pointers.dims),
        "pointer_values": [list(v) for v in p.pointers.values],
        "outcomes": list(p.outcomes),
        "elements": {a: _matrix_to_pairs(e) for a, e in p.elements.items()},
        "kraus": {a: _matrix_to_pairs(t) for a, t in p.kraus.items()},
    }


def povm_from_jsonable(doc: dict) -> Povm:
    pointers = PointerSpace(
        dims=tuple(doc["pointer_dims"]),
        values=tuple(tuple(v) for v in doc["pointer_values"]),
    )
    dim = int(doc["dim"])
    elements = {a: _pairs_to_matrix(doc["elements"][a], dim) for a in doc["outcomes"]}
    kraus = {a: _pairs_to_matrix(doc["kraus"][a], dim) for a in doc["outcomes"]}
    return Povm(pointers=pointers, elements=elements, kraus=kraus)


def povm_to_json(p: Povm, indent: int | None = 2) -> str:
    return json.dumps(povm_to_jsonable(p), indent=indent, sort_keys=True)

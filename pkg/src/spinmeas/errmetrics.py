"""Maximal rms errors of retrodiction and prediction for measurement models.

Both metrics take a sup over initial system states.  That sup is evaluated
exactly, as the largest singular value of the error operator restricted to
the ready-state sector -- never by sampling -- so the cases that vanish
identically come out at roundoff level instead of being blurred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import TOL, DimensionMismatchError, as_operator, as_state, dagger, tensor
from .measurement import (
    MeasurementModel,
    NotNormalizedError,
    Povm,
    contemporaneous_unitary,
    povm,
    sequential_unitary,
)
from .spin1 import Triad, canonical_angles, squared_projection

__all__ = [
    "ERROR_CSV_HEADER",
    "ErrorReport",
    "error_report_rows",
    "errors_heisenberg",
    "predictive_error_povm",
    "retrodictive_error_povm",
    "small_angle_errors",
    "spread_bound",
    "triad_error_reports",
]


def _ready_embedding(model: MeasurementModel) -> np.ndarray:
    """Isometry mapping |psi> to |psi> (x) |phi0>."""
    return np.kron(np.eye(model.sys_dim, dtype=complex), model.phi0.reshape(-1, 1))


def _checked_system_operator(model_or_povm, observable) -> np.ndarray:
    op = as_operator(observable)
    dim = model_or_povm.sys_dim if isinstance(model_or_povm, MeasurementModel) else model_or_povm.dim
    if op.shape[0] != dim:
        raise DimensionMismatchError(f"observable must be {dim}x{dim}, got {op.shape}")
    return op


def errors_heisenberg(
    model: MeasurementModel, observable, pointer_obs
) -> tuple[float, float]:
    """Maximal rms errors (retrodictive, predictive) from the Heisenberg picture.

    The retrodictive error compares the final pointer observable with the
    initial system observable; the predictive error compares it with the
    final (post-interaction) system observable.
    """
    a = _checked_system_operator(model, observable)
    alpha = as_operator(pointer_obs)
    if alpha.shape[0] != model.pointers.dim:
        raise DimensionMismatchError(
            f"pointer observable must be {model.pointers.dim}x{model.pointers.dim}, got {alpha.shape}"
        )
    alpha_final = dagger(model.U) @ tensor(np.eye(model.sys_dim), alpha) @ model.U
    a_initial = tensor(a, np.eye(model.pointers.dim))
    a_final = dagger(model.U) @ a_initial @ model.U
    embed = _ready_embedding(model)
    delta_ei = float(np.linalg.norm((alpha_final - a_initial) @ embed, ord=2))
    delta_ef = float(np.linalg.norm((alpha_final - a_final) @ embed, ord=2))
    return delta_ei, delta_ef


def retrodictive_error_povm(p: Povm, r: int, observable) -> float:
    """sqrt of the operator norm of sum_a (A - a) E_a (A - a), where E_a is
    the pointer-r marginal.  Evaluated in Gram form over the Kraus operators."""
    a_op = _checked_system_operator(p, observable)
    p.pointers.check_pointer(r)
    eye = np.eye(p.dim)
    total = np.zeros((p.dim, p.dim), dtype=complex)
    for outcome, kraus in p.kraus.items():
        shifted = kraus @ (a_op - p.pointers.reading(outcome, r) * eye)
        total += dagger(shifted) @ shifted
    return math.sqrt(max(float(np.linalg.eigvalsh((total + dagger(total)) / 2).max()), 0.0))


def predictive_error_povm(p: Povm, r: int, observable) -> float:
    """sqrt of the operator norm of sum over outcomes of T† (A - a_r)^2 T,
    evaluated in Gram form."""
    a_op = _checked_system_operator(p, observable)
    p.pointers.check_pointer(r)
    eye = np.eye(p.dim)
    total = np.zeros((p.dim, p.dim), dtype=complex)
    for outcome, kraus in p.kraus.items():
        shifted = (a_op - p.pointers.reading(outcome, r) * eye) @ kraus
        total += dagger(shifted) @ shifted
    return math.sqrt(max(float(np.linalg.eigvalsh((total + dagger(total)) / 2).max()), 0.0))


def spread_bound(model: MeasurementModel, state, observable, pointer_obs) -> tuple[float, float]:
    """Pointer spread about the initial mean, and its bound.

    Returns ``(spread, delta_ei + initial uncertainty)``; the first never
    exceeds the second beyond roundoff.
    """
    psi = as_state(state, model.sys_dim)
    if abs(float(np.linalg.norm(psi)) - 1.0) > TOL.state_norm:
        raise NotNormalizedError("state must be normalized")
    a = _checked_system_operator(model, observable)
    mean = float(np.real(psi.conj() @ (a @ psi)))
    uncertainty = float(np.linalg.norm((a - mean * np.eye(model.sys_dim)) @ psi))
    alpha_final = dagger(model.U) @ tensor(np.eye(model.sys_dim), as_operator(pointer_obs)) @ model.U
    joint = np.kron(psi, model.phi0)
    spread = float(np.linalg.norm((alpha_final - mean * np.eye(model.dim)) @ joint))
    delta_ei, _ = errors_heisenberg(model, a, pointer_obs)
    return spread, delta_ei + uncertainty


def small_angle_errors(r: int, psi: float, theta: float, phi: float) -> tuple[float, float]:
    """Leading-order closed forms (delta_ei, delta_ef) for the sequential
    triad measurement at small psi, theta.

    delta_ei is (0, sqrt(2)|psi|, sqrt(2)|theta|) for r = 1, 2, 3 and
    delta_ef is (sqrt(2(psi^2 + theta^2 cos^2 phi)), sqrt(2)|theta sin phi|, 0);
    the r = 1 retrodictive and r = 3 predictive errors vanish identically,
    not just to leading order.  For axis 2 the retrodictive error is in fact
    exactly sqrt(2)|sin psi cos psi| at every psi.
    """
    if r == 1:
        return 0.0, math.sqrt(2.0 * (psi**2 + theta**2 * math.cos(phi) ** 2))
    if r == 2:
        return math.sqrt(2.0) * abs(psi), abs(math.sqrt(2.0) * theta * math.sin(phi))
    if r == 3:
        return math.sqrt(2.0) * abs(theta), 0.0
    raise IndexError(f"axis index must be 1, 2 or 3, got {r}")


@dataclass(frozen=True)
class ErrorReport:
    """Error pair for one observable, with the triad angles when known."""

    observable: str
    delta_ei: float
    delta_ef: float
    angles: tuple[float, float, float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.delta_ei) and self.delta_ei >= 0.0):
            raise ValueError("delta_ei must be finite and >= 0")
        if not (math.isfinite(self.delta_ef) and self.delta_ef >= 0.0):
            raise ValueError("delta_ef must be finite and >= 0")


def triad_error_reports(t: Triad, model: str = "sequential") -> list[ErrorReport]:
    """Both error metrics for each of the three squared projections of a triad."""
    if model == "sequential":
        meas = sequential_unitary(t)
    elif model == "contemporaneous":
        meas = contemporaneous_unitary(t)
    else:
        raise ValueError(f"unknown model {model!r}")
    p = povm(meas)
    angles = t.angles if t.angles is not None else canonical_angles(t)
    reports = []
    for r, axis in enumerate(t.axes, start=1):
        a_op = squared_projection(axis)
        reports.append(
            ErrorReport(
                observable=f"P{r}",
                delta_ei=retrodictive_error_povm(p, r, a_op),
                delta_ef=predictive_error_povm(p, r, a_op),
                angles=angles,
            )
        )
    return reports


ERROR_CSV_HEADER = ("psi", "theta", "phi", "observable", "delta_ei", "delta_ef")


def error_report_rows(reports) -> list[tuple[str, ...]]:
    """CSV rows (without header) for a sequence of reports; floats use repr
    so parsing them back loses nothing."""
    rows = []
    for report in reports:
        angles = report.angles if report.angles is not None else (math.nan, math.nan, math.nan)
        rows.append(
            (
                repr(float(angles[0])),
                repr(float(angles[1])),
                repr(float(angles[2])),
                report.observable,
                repr(float(report.delta_ei)),
                repr(float(report.delta_ef)),
            )
        )
    return rows

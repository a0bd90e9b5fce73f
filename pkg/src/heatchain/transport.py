"""Heat current and conductance.

Sign convention (single source of truth): the heat current I is the
energy per unit time flowing from bath 2 into the system,

    I = sum_{m n} E_n * (W2[n,m] P[m] - W2[m,n] P[n]),

which at stationarity equals the flow from the system into bath 1, and is
positive for T2 > T1.  The linear-response conductance C = I/dT with
dT = (T2 - T1)/2 is an equilibrium coefficient

    C = (gamma / t0^2) * (1/Z) * sum_{m n} (E_m - E_n)^2 B[m,n],
    Z = sum_m exp(-E_m / t0),

with gamma = 1/2 for equal couplings, 1/(1+a) (bath-1 kernel) or a/(1+a)
(bath-2 kernel) for similar couplings X1 = a X2, and (1 - alpha_1) or
alpha_2 for dissimilar couplings, each at its own reference temperature.
"""

from dataclasses import dataclass

import numpy as np

from .baths import CouplingKernel, RateMatrix, perturbation_objects
from .chain import SystemSpectrum
from .errors import NumericalError, ParameterError
from .steady import (
    CLASS_TOL_DEFAULT,
    SteadyState,
    classify_couplings,
    reference_temperature,
)

_FORM_AGREEMENT_TOL = 1e-12


@dataclass(frozen=True)
class TransportResult:
    """Current, conductance, and the reference point used to evaluate them."""

    current: float
    conductance: float
    t0_used: float
    alpha_used: float
    gamma: float
    diagnostics: dict


def heat_current_exact(spectrum: SystemSpectrum, w: RateMatrix, p: SteadyState) -> float:
    """Stationary energy inflow from the bath with rate matrix w.

    Called with the bath-2 rates this is the heat current I; called with
    the bath-1 rates it returns -I (energy conservation), which tests use
    as the flow-mismatch diagnostic.
    """
    e = spectrum.energies
    wt = w.w.copy()
    np.fill_diagonal(wt, 0.0)
    gain = e @ (wt @ p.p)
    loss = (e * p.p) @ wt.sum(axis=0)
    return float(gain - loss)


def _quadratic_sum(spectrum: SystemSpectrum, b: np.ndarray) -> float:
    """Double sum over (E_m - E_n)^2 B[m,n]; the length-independent numerator."""
    de = spectrum.energies[:, None] - spectrum.energies[None, :]
    return float((de * de * b).sum())


def _partition(spectrum: SystemSpectrum, t0: float) -> float:
    """Z = sum_m exp(-E_m/t0); grows linearly with the chain length."""
    return float(np.exp(-spectrum.energies / t0).sum())


def conductance_linear_response(
    spectrum: SystemSpectrum,
    x1: CouplingKernel,
    x2: CouplingKernel,
    t1: float,
    t2: float,
    class_tol: float = CLASS_TOL_DEFAULT,
) -> TransportResult:
    """Linear-response conductance, dispatched on the coupling class.

    For similar couplings the two equivalent kernel forms are both
    evaluated and must agree to 1e-12 relative.  For dissimilar couplings
    the two bath conventions are both evaluated; the headline conductance
    is their mean and the spread is reported in the diagnostics (neither
    form is preferred).
    """
    if not 0 < t1 < t2:
        raise ParameterError(f"temperatures must satisfy 0 < t1 < t2, got {t1}, {t2}")
    klass = classify_couplings(x1, x2, class_tol)
    dt = 0.5 * (t2 - t1)

    def provider(t0: float):
        return (
            perturbation_objects(x1, t0, spectrum),
            perturbation_objects(x2, t0, spectrum),
        )

    ref = reference_temperature(klass, t1, t2, provider)
    diagnostics = {"class": klass.tag, "class_a": klass.a, "class_residual": klass.fit_residual,
                   "dT": dt}

    if klass.tag == "equal":
        pert1, _ = provider(ref.t0)
        num = _quadratic_sum(spectrum, pert1.b)
        z = _partition(spectrum, ref.t0)
        gamma = 0.5
        c = gamma / ref.t0**2 * num / z
        diagnostics.update(numerator=num, z=z)
        alpha_used = ref.alpha
        t0_used = ref.t0
    elif klass.tag == "similar":
        pert1, pert2 = provider(ref.t0)
        z = _partition(spectrum, ref.t0)
        a = klass.a
        num1 = _quadratic_sum(spectrum, pert1.b)
        num2 = _quadratic_sum(spectrum, pert2.b)
        form1 = (1.0 / (1.0 + a)) / ref.t0**2 * num1 / z
        form2 = (a / (1.0 + a)) / ref.t0**2 * num2 / z
        if abs(form1 - form2) > _FORM_AGREEMENT_TOL * max(abs(form1), abs(form2)):
            raise NumericalError(
                f"similar-coupling conductance forms disagree: {form1!r} vs {form2!r}"
            )
        gamma = 1.0 / (1.0 + a)
        c = form1
        diagnostics.update(numerator=num1, z=z, c_form_1=form1, c_form_2=form2)
        alpha_used = ref.alpha
        t0_used = ref.t0
    else:
        pert1_a, _ = provider(ref.t0)
        z1 = _partition(spectrum, ref.t0)
        num1 = _quadratic_sum(spectrum, pert1_a.b)
        form1 = (1.0 - ref.alpha) / ref.t0**2 * num1 / z1

        _, pert2_b = provider(ref.t0_2)
        z2 = _partition(spectrum, ref.t0_2)
        num2 = _quadratic_sum(spectrum, pert2_b.b)
        form2 = ref.alpha_2 / ref.t0_2**2 * num2 / z2

        gamma = 1.0 - ref.alpha
        c = 0.5 * (form1 + form2)
        diagnostics.update(
            numerator=num1,
            z=z1,
            c_form_1=form1,
            c_form_2=form2,
            c_spread=abs(form1 - form2),
            t0_2=ref.t0_2,
            alpha_2=ref.alpha_2,
            alpha_in_range=ref.alpha_in_range,
        )
        alpha_used = ref.alpha
        t0_used = ref.t0

    return TransportResult(
        current=c * dt,
        conductance=c,
        t0_used=t0_used,
        alpha_used=alpha_used,
        gamma=gamma,
        diagnostics=diagnostics,
    )


def conductance_green_kubo(
    spectrum: SystemSpectrum, x: CouplingKernel, t0: float, gamma: float
) -> float:
    """Equilibrium (Green-Kubo form) conductance from one kernel at t0.

    Depends only on (X, spectrum, t0, gamma); gamma stays an input because
    its dissimilar-coupling value is fixed only up to the bath convention.
    """
    if not t0 > 0:
        raise ParameterError(f"t0={t0} must be > 0")
    if not gamma > 0:
        raise ParameterError(f"gamma={gamma} must be > 0")
    b = perturbation_objects(x, t0, spectrum).b
    return gamma / t0**2 * _quadratic_sum(spectrum, b) / _partition(spectrum, t0)


def fourier_linearity_fit(dts: np.ndarray, currents: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit I(dT) = C*dT + q*dT^2 through the origin.

    Returns (C, q, residual-norm); needs at least 4 sweep points.
    """
    dts = np.asarray(dts, dtype=float)
    currents = np.asarray(currents, dtype=float)
    if dts.size < 4:
        raise ParameterError(f"need >= 4 sweep points, got {dts.size}")
    if dts.shape != currents.shape:
        raise ParameterError("dT and current arrays must have matching shapes")
    design = np.stack([dts, dts**2], axis=1)
    coef, _, _, _ = np.linalg.lstsq(design, currents, rcond=None)
    residual = float(np.linalg.norm(design @ coef - currents))
    return float(coef[0]), float(coef[1]), residual

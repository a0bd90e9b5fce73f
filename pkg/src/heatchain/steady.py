"""Stationary solutions of the two-bath master equation.

The occupation probabilities P solve

    sum_m (W1[n,m] + W2[n,m]) P[m] = (sum_m (W1[m,n] + W2[m,n])) P[n]

exactly (null space of the rate generator), and perturbatively to first
order in dT = (T2 - T1)/2 around a reference temperature t0.  The choice
of t0 depends on how the two coupling kernels compare:

    equal      X1 == X2        ->  alpha = 1/2,       t0 = (T1 + T2)/2
    similar    X1 == a * X2    ->  alpha = a/(1 + a), t0 = (a T1 + T2)/(1 + a)
    dissimilar anything else   ->  alpha solves a self-consistent condition,
                                   one value per bath convention.

With t0 = alpha*T1 + (1 - alpha)*T2 the linearized equation reads

    [-2(1 - alpha) A1[n] + 2 alpha A2[n]] dT + sum_m Bt[n,m] dP[m] = 0

where Bt[n,m] = B[n,m] - delta[n,m] sum_k B[n,k] has one zero eigenvalue
(uniform eigenvector) and an otherwise negative spectrum; dP is the unique
zero-sum solution.  For equal and similar couplings the inhomogeneity
vanishes at the class alpha and dP == 0: the system sits in equilibrium at
t0 through first order.
"""

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .baths import CouplingKernel, PerturbationObjects, RateMatrix
from .chain import SystemSpectrum
from .errors import (
    DegeneracyError,
    DegenerateCouplingError,
    NumericalError,
    ParameterError,
    PathologicalCouplingError,
    StructuralError,
)

CLASS_TOL_DEFAULT = 1e-8
_NULL_TOL = 1e-10  # |sigma_min| <= tol * sigma_max certifies a null vector
# Uniqueness gate: a genuinely split system has sigma_2 at machine noise,
# while Gibbs-suppressed rates put legitimate slow modes at ~1e-5..1e-8.
_GAP_TOL = 1e-12
_FIXED_POINT_DAMPING = 0.5
_FIXED_POINT_MAX_ITER = 100


@dataclass(frozen=True)
class CouplingClass:
    """How the two kernels compare: tag, fitted ratio a, and relative residual."""

    tag: str  # 'equal' | 'similar' | 'dissimilar'
    a: float
    fit_residual: float


@dataclass(frozen=True)
class ReferenceTemperatures:
    """Reference temperature(s) and mixing parameter(s).

    For dissimilar couplings both bath conventions are reported; whether
    they coincide is an open diagnostic, not an assertion.  alpha values
    outside [0, 1] are physically implausible and flagged, not rejected.
    """

    t0: float
    alpha: float
    t0_2: float | None = None
    alpha_2: float | None = None
    alpha_in_range: bool = True


@dataclass(frozen=True)
class SteadyState:
    """Occupation probabilities with the construction that produced them."""

    p: np.ndarray
    method: str  # 'exact' | 'perturbative'
    t0: float | None = None
    alpha: float | None = None
    delta_p: np.ndarray | None = None
    klass: CouplingClass | None = None


def _generator(w_total: np.ndarray) -> np.ndarray:
    """Rate generator G with G @ P = 0 at stationarity (diagonal rates cancel)."""
    off = w_total.copy()
    np.fill_diagonal(off, 0.0)
    g = off - np.diag(off.sum(axis=0))
    return g


def stationary_exact(w1: RateMatrix, w2: RateMatrix) -> SteadyState:
    """Unique normalized nonnegative null vector of the total rate generator.

    The null vector comes from an eigen-decomposition in the detailed
    balance weighted inner product when both baths share one temperature
    (the weights are then exact), and from the SVD otherwise; the SVD also
    certifies uniqueness in all cases.  Residual contract:
    |G @ P|_max <= 1e-10 * |G|_max.
    """
    wt = w1.w + w2.w
    dim = wt.shape[0]
    if dim < 2 or wt.shape != (dim, dim):
        raise ParameterError(f"rate matrices must be square with dim >= 2, got {wt.shape}")
    if w1.w.shape != w2.w.shape:
        raise ParameterError("rate matrices must have matching shapes")

    off = wt.copy()
    np.fill_diagonal(off, 0.0)
    n_comp, _ = connected_components(csr_matrix(off > 0), directed=False)
    if n_comp > 1:
        raise StructuralError(
            f"rate graph splits into {n_comp} uncoupled parts; "
            "the stationary state is not unique"
        )

    g = _generator(wt)
    # Uniqueness certificate: exactly one singular value at the noise floor.
    s = np.linalg.svd(g, compute_uv=False)
    if s[-1] > _NULL_TOL * s[0]:
        raise DegeneracyError(
            f"no certified null vector: sigma_min/sigma_max = {s[-1] / s[0]:.3e}"
        )
    if s[-2] < _GAP_TOL * s[0]:
        raise DegeneracyError(
            f"null space dimension > 1: sigma_2/sigma_max = {s[-2] / s[0]:.3e}"
        )

    p = None
    if w1.beta == w2.beta:
        p = _null_vector_weighted(g, off)
    if p is None:
        _, _, vt = np.linalg.svd(g)
        p = vt[-1]

    if p.sum() < 0:
        p = -p
    scale = p.max()
    if p.min() < -1e-12 * scale:
        raise NumericalError(f"null vector has negative entries: min/max = {p.min() / scale:.3e}")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()

    resid = np.abs(g @ p).max()
    gate = _NULL_TOL * np.abs(g).max()
    if resid > gate:
        raise NumericalError(f"stationarity residual {resid:.3e} exceeds gate {gate:.3e}")
    return SteadyState(p=p, method="exact")


def _null_vector_weighted(g: np.ndarray, off: np.ndarray) -> np.ndarray | None:
    """Null vector via the detailed-balance weighted symmetrization.

    Weights follow from the rate ratios against state 0; they symmetrize
    the generator exactly when the total rates satisfy detailed balance
    (equal bath temperatures).  Returns None when the ratios are not
    available (zero rates) or the residual gate fails.
    """
    dim = g.shape[0]
    if np.any(off[0, 1:] <= 0) or np.any(off[1:, 0] <= 0):
        return None
    logd = np.zeros(dim)
    logd[1:] = np.log(off[1:, 0]) - np.log(off[0, 1:])
    logd -= logd.max()
    d_half = np.exp(0.5 * logd)
    sym = g * (d_half[None, :] / d_half[:, None])
    sym = 0.5 * (sym + sym.T)
    vals, vecs = np.linalg.eigh(sym)
    p = vecs[:, np.argmin(np.abs(vals))] * d_half
    if p.sum() < 0:
        p = -p
    if np.abs(g @ (p / p.sum())).max() > _NULL_TOL * np.abs(g).max():
        return None
    return p


def classify_couplings(
    x1: CouplingKernel, x2: CouplingKernel, class_tol: float = CLASS_TOL_DEFAULT
) -> CouplingClass:
    """Least-squares ratio fit X1 ~ a * X2 and classification by residual."""
    m1, m2 = x1.x, x2.x
    if m1.shape != m2.shape:
        raise ParameterError(f"kernel shapes differ: {m1.shape} vs {m2.shape}")
    norm2_sq = float((m2 * m2).sum())
    norm1 = float(np.sqrt((m1 * m1).sum()))
    if norm2_sq == 0.0 or norm1 == 0.0:
        raise DegenerateCouplingError("a coupling kernel vanishes identically")
    a = float((m1 * m2).sum() / norm2_sq)
    residual = float(np.sqrt(((m1 - a * m2) ** 2).sum()) / norm1)
    if residual <= class_tol and abs(a - 1.0) <= class_tol:
        tag = "equal"
    elif residual <= class_tol:
        tag = "similar"
    else:
        tag = "dissimilar"
    return CouplingClass(tag=tag, a=a, fit_residual=residual)


def _tilde_modes(pert1: PerturbationObjects, pert2: PerturbationObjects):
    """Eigen-decomposition of Bt = B - diag(row sums) with zero-mode checks.

    Returns (lam, vecs, k0) where column k0 is the zero mode.  Exactly one
    eigenvalue may sit at the zero-mode noise floor and its eigenvector
    must be uniform; all remaining eigenvalues must be negative.
    """
    b = pert1.b + pert2.b
    bt = b - np.diag(b.sum(axis=1))
    lam, vecs = np.linalg.eigh(bt)
    scale = np.abs(lam).max()
    near_zero = np.nonzero(np.abs(lam) <= _NULL_TOL * scale)[0]
    if near_zero.size != 1:
        raise PathologicalCouplingError(
            f"{near_zero.size} near-zero eigenvalues of the linearized kernel "
            "(expected exactly 1; couplings too close to diagonal or decoupled)"
        )
    k0 = int(near_zero[0])
    uniform = np.full(lam.size, 1.0 / np.sqrt(lam.size))
    v0 = vecs[:, k0] if vecs[:, k0].sum() > 0 else -vecs[:, k0]
    if np.abs(v0 - uniform).max() > 1e-6:
        raise PathologicalCouplingError("zero mode of the linearized kernel is not uniform")
    others = np.delete(lam, k0)
    if others.max() > 1e-12 * scale:
        raise NumericalError(f"positive eigenvalue {others.max():.3e} in the linearized kernel")
    return lam, vecs, k0


def _mode_projections(pert1: PerturbationObjects, pert2: PerturbationObjects):
    """Projections S_ij = sum_{k != k0} At_i[k] At_j[k] / lam[k] of the A vectors."""
    lam, vecs, k0 = _tilde_modes(pert1, pert2)
    at1 = vecs.T @ pert1.a
    at2 = vecs.T @ pert2.a
    inv = 1.0 / lam
    inv[k0] = 0.0
    s11 = float((at1 * inv * at1).sum())
    s12 = float((at1 * inv * at2).sum())
    s22 = float((at2 * inv * at2).sum())
    return s11, s12, s22


PertProvider = Callable[[float], tuple[PerturbationObjects, PerturbationObjects]]


def _alpha_fixed_point(t1: float, t2: float, provider: PertProvider, which: int) -> tuple[float, float]:
    """Damped fixed point for the self-consistent (t0, alpha) of one convention.

    which=1 nulls the bath-1 form (alpha = S11/(S11 + S12)); which=2 the
    bath-2 form (alpha = S12/(S12 + S22)).  Starts from the arithmetic
    mean and iterates t0 <- t0 + 0.5*(alpha*t1 + (1-alpha)*t2 - t0).
    """
    t0 = 0.5 * (t1 + t2)
    for _ in range(_FIXED_POINT_MAX_ITER):
        s11, s12, s22 = _mode_projections(*provider(t0))
        denom = (s11 + s12) if which == 1 else (s12 + s22)
        if denom == 0.0:
            raise PathologicalCouplingError("vanishing projection sum; alpha is undefined")
        alpha = (s11 / denom) if which == 1 else (s12 / denom)
        t_target = alpha * t1 + (1.0 - alpha) * t2
        t_next = t0 + _FIXED_POINT_DAMPING * (t_target - t0)
        if not t_next > 0:
            raise PathologicalCouplingError(f"reference temperature iterate {t_next} <= 0")
        if abs(t_next - t0) <= 1e-10 * t0:
            return t_next, alpha
        t0 = t_next
    raise NumericalError("reference-temperature fixed point did not converge in "
                         f"{_FIXED_POINT_MAX_ITER} iterations")


def reference_temperature(
    klass: CouplingClass, t1: float, t2: float, provider: PertProvider
) -> ReferenceTemperatures:
    """Reference temperature(s) t0 and mixing parameter(s) alpha for a class.

    Equal and similar couplings have closed forms.  Dissimilar couplings
    require the self-consistent fixed point, once per bath convention;
    ``provider`` re-evaluates the perturbation objects at a candidate t0.
    """
    if not 0 < t1 <= t2:
        raise ParameterError(f"temperatures must satisfy 0 < t1 <= t2, got {t1}, {t2}")
    if klass.tag == "equal":
        return ReferenceTemperatures(t0=0.5 * (t1 + t2), alpha=0.5)
    if klass.tag == "similar":
        a = klass.a
        if not a > 0:
            raise ParameterError(f"similar-class ratio a={a} must be > 0")
        alpha = a / (1.0 + a)
        return ReferenceTemperatures(t0=alpha * t1 + (1.0 - alpha) * t2, alpha=alpha)

    t0_1, alpha_1 = _alpha_fixed_point(t1, t2, provider, which=1)
    t0_2, alpha_2 = _alpha_fixed_point(t1, t2, provider, which=2)
    in_range = (0.0 <= alpha_1 <= 1.0) and (0.0 <= alpha_2 <= 1.0)
    if not in_range:
        warnings.warn(
            f"mixing parameter outside [0, 1]: alpha_1={alpha_1:.6g}, alpha_2={alpha_2:.6g} "
            "(physically implausible couplings)",
            stacklevel=2,
        )
    return ReferenceTemperatures(
        t0=t0_1, alpha=alpha_1, t0_2=t0_2, alpha_2=alpha_2, alpha_in_range=in_range
    )


def linearized_solve(
    pert1: PerturbationObjects, pert2: PerturbationObjects, alpha: float, dt: float
) -> np.ndarray:
    """Zero-sum first-order correction dP of the linearized master equation.

    Solves [-2(1-alpha) A1 + 2 alpha A2] dT + Bt dP = 0 on the zero-sum
    subspace by inverting Bt on its nonzero modes.
    """
    if abs(pert1.t0 - pert2.t0) > 1e-12 * pert1.t0:
        raise ParameterError(
            f"perturbation objects built at different t0: {pert1.t0} vs {pert2.t0}"
        )
    if dt > 0.1 * pert1.t0:
        warnings.warn(
            f"dT={dt:.4g} exceeds 10% of t0={pert1.t0:.4g}; first-order expansion "
            "may be inaccurate",
            stacklevel=2,
        )
    lam, vecs, k0 = _tilde_modes(pert1, pert2)
    inh = -2.0 * (1.0 - alpha) * pert1.a + 2.0 * alpha * pert2.a
    coef = vecs.T @ inh / lam
    coef[k0] = 0.0
    return -dt * (vecs @ coef)


def occupation_probabilities(
    spectrum: SystemSpectrum, t0: float, delta_p: np.ndarray
) -> np.ndarray:
    """Normalized probabilities from the first-order correction.

    P[m] = gibbs(t0)[m] * (1 + dP[m] - <dP>_gibbs); a constant shift of dP
    drops out, and sum(P) = 1 to machine precision.
    """
    if not t0 > 0:
        raise ParameterError(f"t0={t0} must be > 0")
    delta_p = np.asarray(delta_p, dtype=float)
    if np.abs(delta_p).max(initial=0.0) > 0.5:
        warnings.warn(
            f"max|dP| = {np.abs(delta_p).max():.3g} > 0.5; outside the first-order domain",
            stacklevel=2,
        )
    g = gibbs_state(spectrum.energies, t0)
    return g * (1.0 + delta_p - (g * delta_p).sum())


def gibbs_state(energies: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized equilibrium occupations exp(-E/T)/Z."""
    if not temperature > 0:
        raise ParameterError(f"temperature={temperature} must be > 0")
    w = np.exp(-(energies - energies.min()) / temperature)
    return w / w.sum()


def stationary_perturbative(
    spectrum: SystemSpectrum,
    x1: CouplingKernel,
    x2: CouplingKernel,
    t1: float,
    t2: float,
    class_tol: float = CLASS_TOL_DEFAULT,
) -> SteadyState:
    """Classify, pick t0, solve the linearized equation, and assemble P.

    Composition used by the transport formulas and the experiment drivers;
    dT = (t2 - t1)/2 and the dissimilar case uses the bath-1 convention
    for the returned state.
    """
    klass = classify_couplings(x1, x2, class_tol)

    def provider(t0: float):
        from .baths import perturbation_objects

        return (
            perturbation_objects(x1, t0, spectrum),
            perturbation_objects(x2, t0, spectrum),
        )

    ref = reference_temperature(klass, t1, t2, provider)
    pert1, pert2 = provider(ref.t0)
    dt = 0.5 * (t2 - t1)
    delta_p = linearized_solve(pert1, pert2, ref.alpha, dt)
    p = occupation_probabilities(spectrum, ref.t0, delta_p)
    return SteadyState(
        p=p, method="perturbative", t0=ref.t0, alpha=ref.alpha, delta_p=delta_p, klass=klass
    )

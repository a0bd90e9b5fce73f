"""Experiment drivers: reproducible ensemble runs with persisted results.

Each experiment kind turns an ExperimentConfig into a RunRecord holding
per-realization (or per-grid-point) rows, aggregates, and fits.  Records
are self-contained: the config and master seed are stored verbatim, every
aggregate is recomputable from the rows, and identical (config, seed)
reproduce byte-identical tables regardless of evaluation order.

Experiment kinds and their fixed table schemas:

    scaling      K,realization,C,I,T0,alpha,numerator,Z
    equilibrium  dT,err_exact_vs_gibbs,err_pert_vs_exact
    linearity    dT,I_exact,I_formula
    spectral     E,rho_pastur,rho_mc,sf_analytic,sf_mc
    strength     K,width_mc,center_mc,width_analytic,width_formula
"""

import dataclasses
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .baths import (
    A0_DEFAULT,
    BathSpec,
    build_surface_operator,
    coupling_kernel,
    default_bandwidth,
    rate_matrix,
)
from .chain import (
    ChainParams,
    center_level_spacing,
    diagonalize_chain,
    sample_chain_hamiltonian,
    smoothed_level_density,
    spectral_range_estimate,
)
from .errors import ConfigError, NumericalError, PathologicalCouplingError
from .greens import (
    average_level_density,
    pastur_solve,
    predicted_surface_halfwidth,
    strength_function_analytic,
    strength_function_empirical,
    suggested_eta,
)
from .seeding import substream
from .steady import gibbs_state, stationary_exact, stationary_perturbative
from .transport import conductance_linear_response, fourier_linearity_fit, heat_current_exact

EXPERIMENT_KINDS = ("scaling", "equilibrium", "linearity", "spectral", "strength")
OUT_DIR_ENV = "HEATCHAIN_OUT_DIR"
_MAX_RETRIES = 3

COLUMNS = {
    "scaling": ("K", "realization", "C", "I", "T0", "alpha", "numerator", "Z"),
    "equilibrium": ("dT", "err_exact_vs_gibbs", "err_pert_vs_exact"),
    "linearity": ("dT", "I_exact", "I_formula"),
    "spectral": ("E", "rho_pastur", "rho_mc", "sf_analytic", "sf_mc"),
    "strength": ("K", "width_mc", "center_mc", "width_analytic", "width_formula"),
}


@dataclass
class ExperimentConfig:
    """All knobs of one experiment; every field maps 1:1 to a CLI flag.

    Chain: k, n, lam, w, v, e1, n_surf.  Baths: temperatures t1 < t2,
    strengths a0_*, shared surface recipe (q_kind, per-bath strength and
    sub-seed) and layout ('same_end' attaches both baths to the left
    surface, the equal-coupling fixture; 'opposite_ends' is the physical
    two-terminal setup and generally classifies as dissimilar).
    bandwidth=None means 10x the sampled spectral range.
    """

    experiment: str = "scaling"
    # chain
    k: int = 4
    n: int = 100
    lam: float = 1.0
    w: float = 0.25
    v: float = 0.08
    e1: float = 0.0
    n_surf: int = 1
    # baths
    t1: float = 0.8
    t2: float = 1.2
    a0_1: float = A0_DEFAULT
    a0_2: float = A0_DEFAULT
    bandwidth: float | None = None
    q_kind: str = "projector"
    q_strength_1: float = 1.0
    q_strength_2: float = 1.0
    q_seed_1: int = 101
    q_seed_2: int = 101
    layout: str = "same_end"
    t0_convention: str = "class"  # 'class' | 'mean' (deliberately wrong t0)
    # sweeps
    k_list: tuple[int, ...] = (2, 3, 4, 6, 8)
    dt_fractions: tuple[float, ...] = (0.01, 0.02, 0.04, 0.08)
    grid_points: int = 601
    grid_span: float = 3.0  # in units of lam_eff, <= 3
    eta: float | None = None
    # run control
    n_realizations: int = 50
    seed: int = 20260810
    out_dir: str | None = None
    formats: tuple[str, ...] = ("csv",)

    def validate(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; pick from {EXPERIMENT_KINDS}")
        if self.n_realizations < 1:
            raise ConfigError(f"n_realizations={self.n_realizations} must be >= 1")
        if not 0 < self.t1 < self.t2:
            raise ConfigError(f"need 0 < t1 < t2, got t1={self.t1}, t2={self.t2}")
        if self.layout not in ("same_end", "opposite_ends"):
            raise ConfigError(f"layout must be 'same_end' or 'opposite_ends', got {self.layout!r}")
        if self.t0_convention not in ("class", "mean"):
            raise ConfigError(f"t0_convention must be 'class' or 'mean', got {self.t0_convention!r}")
        if self.experiment == "scaling" and len(set(self.k_list)) < 3:
            raise ConfigError("scaling needs a k_list with >= 3 distinct block counts")
        if self.experiment in ("equilibrium", "linearity"):
            fr = sorted(self.dt_fractions)
            if len(fr) < 4:
                raise ConfigError("dT sweeps need >= 4 points")
            if fr[-1] < 8 * fr[0]:
                raise ConfigError("dT sweep must span at least a factor 8")
        if not 0 < self.grid_span <= 3.0:
            raise ConfigError(f"grid_span={self.grid_span} must be in (0, 3]")
        if self.experiment == "spectral" and self.n_realizations < 10:
            raise ConfigError("spectral comparisons need n_realizations >= 10")
        try:
            params = self.chain_params()
        except Exception as err:
            raise ConfigError(f"invalid chain parameters: {err}") from err
        t0 = 0.5 * (self.t1 + self.t2)
        spacing = center_level_spacing(params)
        if t0 < 10.0 * spacing:
            import warnings

            warnings.warn(
                f"t0={t0:.3g} is not large against the mean level spacing "
                f"{spacing:.3g}; conductance scaling arguments assume t0 >> spacing",
                stacklevel=2,
            )

    def chain_params(self, k: int | None = None) -> ChainParams:
        return ChainParams(
            k=self.k if k is None else k,
            n=self.n,
            lam=self.lam,
            w=self.w,
            v=self.v,
            e1=self.e1,
            n_surf=self.n_surf,
            seed=self.seed,
        )

    def resolved_out_dir(self) -> str:
        if self.out_dir is not None:
            return self.out_dir
        return os.environ.get(OUT_DIR_ENV, ".")


@dataclass
class RunRecord:
    """One experiment's complete, reproducible output."""

    experiment: str
    config: dict
    columns: tuple[str, ...]
    rows: list[tuple]
    aggregates: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    started_at: str = ""
    duration_s: float = 0.0
    versions: dict = field(default_factory=dict)


def _versions() -> dict:
    import numpy
    import scipy

    return {"heatchain": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__}


def _new_record(config: ExperimentConfig) -> RunRecord:
    return RunRecord(
        experiment=config.experiment,
        config=dataclasses.asdict(config),
        columns=COLUMNS[config.experiment],
        rows=[],
        started_at=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        versions=_versions(),
    )


def _bath_specs(config: ExperimentConfig, bandwidth: float, t1: float, t2: float):
    end2 = "left" if config.layout == "same_end" else "right"
    spec1 = BathSpec(
        temperature=t1, a0=config.a0_1, delta=bandwidth, end="left",
        q_kind=config.q_kind, q_strength=config.q_strength_1, q_seed=config.q_seed_1,
    )
    spec2 = BathSpec(
        temperature=t2, a0=config.a0_2, delta=bandwidth, end=end2,
        q_kind=config.q_kind, q_strength=config.q_strength_2, q_seed=config.q_seed_2,
    )
    return spec1, spec2


def _kernels(config: ExperimentConfig, params, h, spectrum, t1, t2):
    bandwidth = config.bandwidth or default_bandwidth(spectral_range_estimate(h))
    spec1, spec2 = _bath_specs(config, bandwidth, t1, t2)
    x1 = coupling_kernel(build_surface_operator(spec1, params), spec1, spectrum)
    x2 = coupling_kernel(build_surface_operator(spec2, params), spec2, spectrum)
    return x1, x2


def _with_retries(worker, seed: int, *key: int, events: list):
    """Run worker(rng); on numerical failure resample with a derived retry
    stream, at most 3 times, recording each event."""
    for attempt in range(_MAX_RETRIES + 1):
        try:
            return worker(substream(seed, *key, attempt))
        except (NumericalError, PathologicalCouplingError) as err:
            events.append({"key": list(key), "attempt": attempt, "error": str(err)})
            if attempt == _MAX_RETRIES:
                raise NumericalError(
                    f"realization {key} failed {_MAX_RETRIES + 1} times; last error: {err}"
                ) from err


def _loglog_fit(xs, ys) -> tuple[float, float, float]:
    """(slope, intercept, slope standard error) of log y = s log x + b."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    design = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, res, _, _ = np.linalg.lstsq(design, ly, rcond=None)
    dof = max(lx.size - 2, 1)
    var = (res[0] / dof if res.size else 0.0) * np.linalg.inv(design.T @ design)[0, 0]
    return float(coef[0]), float(coef[1]), float(np.sqrt(var))


def run_scaling_experiment(config: ExperimentConfig) -> RunRecord:
    """Conductance versus chain length, with the normalization decomposition.

    For each block count K, n_realizations chains are sampled and the
    linear-response conductance computed; C decomposes per realization as
    C = gamma/T0^2 * numerator/Z, with the numerator (the kernel double
    sum) length-independent and Z (the partition sum) linear in K, which
    is where the 1/K law comes from.  Fits report all three log-log
    slopes.
    """
    config.validate()
    if config.layout == "opposite_ends":
        import warnings

        warnings.warn(
            "opposite_ends layout classifies as dissimilar couplings; "
            "the scaling fit is defined but slower and noisier",
            stacklevel=2,
        )
    record = _new_record(config)
    t_start = time.time()
    events: list = []

    for ki, k in enumerate(sorted(set(config.k_list))):
        params = config.chain_params(k=k)
        for r in range(config.n_realizations):
            def worker(rng):
                h = sample_chain_hamiltonian(params, rng)
                spectrum = diagonalize_chain(h)
                x1, x2 = _kernels(config, params, h, spectrum, config.t1, config.t2)
                return conductance_linear_response(spectrum, x1, x2, config.t1, config.t2)

            res = _with_retries(worker, config.seed, ki, r, events=events)
            record.rows.append((
                k, r, res.conductance, res.current, res.t0_used, res.alpha_used,
                res.diagnostics["numerator"], res.diagnostics["z"],
            ))

    ks = sorted(set(config.k_list))
    by_k = {k: [row for row in record.rows if row[0] == k] for k in ks}
    mean_c = [float(np.mean([r[2] for r in by_k[k]])) for k in ks]
    se_c = [float(np.std([r[2] for r in by_k[k]]) / np.sqrt(len(by_k[k]))) for k in ks]
    mean_num = [float(np.mean([r[6] for r in by_k[k]])) for k in ks]
    mean_z = [float(np.mean([r[7] for r in by_k[k]])) for k in ks]

    s_c, b_c, err_c = _loglog_fit(ks, mean_c)
    s_num, _, err_num = _loglog_fit(ks, mean_num)
    s_z, _, err_z = _loglog_fit(ks, mean_z)
    record.aggregates = {
        "k_values": ks, "mean_C": mean_c, "stderr_C": se_c,
        "mean_numerator": mean_num, "mean_Z": mean_z, "retries": events,
    }
    record.fits = {
        "slope_C": s_c, "intercept_C": b_c, "slope_C_stderr": err_c,
        "slope_numerator": s_num, "slope_numerator_stderr": err_num,
        "slope_Z": s_z, "slope_Z_stderr": err_z,
    }
    record.duration_s = time.time() - t_start
    return record


def _reference_t0(config: ExperimentConfig, spectrum, x1, x2, t1, t2) -> float:
    """Class t0 for the sweep, or the deliberately wrong arithmetic mean."""
    if config.t0_convention == "mean":
        return 0.5 * (t1 + t2)
    st = stationary_perturbative(spectrum, x1, x2, t1, t2)
    return st.t0


def run_equilibrium_experiment(config: ExperimentConfig) -> RunRecord:
    """Order-in-dT test of the apparent deviation from equilibrium.

    Per dT: the exact steady state is compared entrywise against the
    Gibbs state at the reference temperature, and the perturbative state
    against the exact one.  Both maximum deviations scale as dT^2 when t0
    is chosen correctly; a wrong t0 (t0_convention='mean' on a similar
    coupling fixture) degrades the first error to linear order.
    """
    config.validate()
    record = _new_record(config)
    t_start = time.time()

    params = config.chain_params()
    h = sample_chain_hamiltonian(params, substream(config.seed, 0))
    spectrum = diagonalize_chain(h)
    t_center = 0.5 * (config.t1 + config.t2)

    for frac in sorted(config.dt_fractions):
        dt = frac * t_center
        t1, t2 = t_center - dt, t_center + dt
        x1, x2 = _kernels(config, params, h, spectrum, t1, t2)
        w1 = rate_matrix(x1, t1, spectrum)
        w2 = rate_matrix(x2, t2, spectrum)
        exact = stationary_exact(w1, w2)
        pert = stationary_perturbative(spectrum, x1, x2, t1, t2)
        t0 = 0.5 * (t1 + t2) if config.t0_convention == "mean" else pert.t0
        err_gibbs = float(np.abs(exact.p - gibbs_state(spectrum.energies, t0)).max())
        err_pert = float(np.abs(pert.p - exact.p).max())
        record.rows.append((dt, err_gibbs, err_pert))

    dts = [r[0] for r in record.rows]
    record.fits = {
        "slope_exact_vs_gibbs": _loglog_fit(dts, [r[1] for r in record.rows])[0],
        "slope_pert_vs_exact": _loglog_fit(dts, [r[2] for r in record.rows])[0],
    }
    record.duration_s = time.time() - t_start
    return record


def run_linearity_experiment(config: ExperimentConfig) -> RunRecord:
    """Exact current versus dT, with the linear+quadratic fit.

    One chain realization; per dT the exact stationary current is
    computed alongside the linear-response prediction C*dT.  The fit
    I = C dT + q dT^2 cross-validates the formula conductance.
    """
    config.validate()
    record = _new_record(config)
    t_start = time.time()

    params = config.chain_params()
    h = sample_chain_hamiltonian(params, substream(config.seed, 0))
    spectrum = diagonalize_chain(h)
    t_center = 0.5 * (config.t1 + config.t2)

    currents, formulas, dts = [], [], []
    for frac in sorted(config.dt_fractions):
        dt = frac * t_center
        t1, t2 = t_center - dt, t_center + dt
        x1, x2 = _kernels(config, params, h, spectrum, t1, t2)
        w1 = rate_matrix(x1, t1, spectrum)
        w2 = rate_matrix(x2, t2, spectrum)
        exact = stationary_exact(w1, w2)
        i_exact = heat_current_exact(spectrum, w2, exact)
        res = conductance_linear_response(spectrum, x1, x2, t1, t2)
        record.rows.append((dt, i_exact, res.current))
        dts.append(dt)
        currents.append(i_exact)
        formulas.append(res.conductance)

    c_fit, q_fit, resid = fourier_linearity_fit(np.array(dts), np.array(currents))
    record.fits = {
        "C_fit": c_fit, "q_fit": q_fit, "fit_residual": resid,
        "C_formula_mean": float(np.mean(formulas)),
    }
    record.duration_s = time.time() - t_start
    return record


def _spectral_ensemble(config: ExperimentConfig, params, ki: int):
    return [
        diagonalize_chain(sample_chain_hamiltonian(params, substream(config.seed, ki, r)))
        for r in range(config.n_realizations)
    ]


def run_spectral_experiment(config: ExperimentConfig) -> RunRecord:
    """Monte-Carlo versus self-consistent spectral curves on one grid.

    Emits the ensemble level density and surface strength function next
    to their analytic counterparts, plus bulk agreement metrics
    (|E| <= 1.5 lam_eff).
    """
    config.validate()
    record = _new_record(config)
    t_start = time.time()

    params = config.chain_params()
    lam_eff = params.lam_eff
    grid = np.linspace(-config.grid_span * lam_eff, config.grid_span * lam_eff, config.grid_points)
    eta_mc = config.eta or suggested_eta(params, empirical=True)

    spectra = _spectral_ensemble(config, params, 0)
    rho_mc = np.zeros_like(grid)
    for s in spectra:
        rho_mc += smoothed_level_density(s, grid, eta_mc)
    rho_mc /= len(spectra)
    sf_mc = strength_function_empirical(spectra, 0, grid, eta_mc)

    profile = pastur_solve(params, grid, eta=suggested_eta(params, empirical=False))
    rho_pastur = average_level_density(pastur_solve(params, grid, eta=eta_mc), params.n)
    sf_an = strength_function_analytic(profile, params.v, params.n, params.e1)

    for i, e in enumerate(grid):
        record.rows.append((float(e), float(rho_pastur[i]), float(rho_mc[i]),
                            float(sf_an.values[i]), float(sf_mc.values[i])))

    bulk = np.abs(grid) <= 1.5 * lam_eff
    record.aggregates = {
        "bulk_density_max_rel_dev": float(
            np.abs(rho_mc[bulk] - rho_pastur[bulk]).max() / rho_pastur[bulk].max()
        ),
        "sf_width_mc": sf_mc.width,
        "sf_width_analytic": sf_an.width,
        "sf_weight_mc": float(np.trapezoid(sf_mc.values, grid)),
    }
    record.duration_s = time.time() - t_start
    return record


def run_strength_experiment(config: ExperimentConfig) -> RunRecord:
    """Length independence of the surface strength-function width.

    Sweeps k_list; per K the pooled ensemble width (no smoothing bias) is
    compared with the analytic curve width and the closed-form half-width
    from the block-1 Green function.
    """
    config.validate()
    record = _new_record(config)
    t_start = time.time()

    for ki, k in enumerate(sorted(set(config.k_list))):
        params = config.chain_params(k=k)
        lam_eff = params.lam_eff
        grid = np.linspace(-config.grid_span * lam_eff, config.grid_span * lam_eff,
                           config.grid_points)
        eta_mc = config.eta or suggested_eta(params, empirical=True)
        spectra = _spectral_ensemble(config, params, ki)
        sf_mc = strength_function_empirical(spectra, 0, grid, eta_mc)
        profile = pastur_solve(params, grid, eta=suggested_eta(params, empirical=False))
        sf_an = strength_function_analytic(profile, params.v, params.n, params.e1)
        formula = predicted_surface_halfwidth(profile, params.v, params.n, sf_an.center)
        record.rows.append((k, sf_mc.width, sf_mc.center, sf_an.width, formula))

    widths = [r[1] for r in record.rows]
    anchors = [r[4] for r in record.rows]
    record.aggregates = {
        "width_pairwise_spread": float((max(widths) - min(widths)) / min(widths)),
        "max_rel_dev_from_formula": float(
            max(abs(wd / fo - 1.0) for wd, fo in zip(widths, anchors))
        ),
    }
    record.duration_s = time.time() - t_start
    return record


RUNNERS = {
    "scaling": run_scaling_experiment,
    "equilibrium": run_equilibrium_experiment,
    "linearity": run_linearity_experiment,
    "spectral": run_spectral_experiment,
    "strength": run_strength_experiment,
}


def run_experiment(config: ExperimentConfig) -> RunRecord:
    config.validate()
    return RUNNERS[config.experiment](config)


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _flatten_config(config: dict) -> dict:
    flat = {}
    for key, value in config.items():
        if isinstance(value, tuple):
            value = list(value)
        flat[f"config.{key}"] = value
    return flat


def _atomic_write(path: str, text: str):
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_outputs(record: RunRecord, formats=("csv",), out_dir: str = ".") -> list[str]:
    """Write the manifest and result table(s); returns the paths written.

    The manifest (JSON, flat dotted keys) pins experiment, seed, config.*,
    created_at, and versions.  Tables are CSV with a fixed header per
    experiment kind and floats at 17 significant digits, so equal runs
    produce byte-identical files; 'json' adds a row-oriented mirror.
    Partial files are never left behind.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    manifest = {
        "experiment": record.experiment,
        "seed": record.config.get("seed"),
        **_flatten_config(record.config),
        "created_at": record.started_at,
        "versions": record.versions,
        "duration_s": record.duration_s,
        "aggregates": record.aggregates,
        "fits": record.fits,
    }
    manifest_path = os.path.join(out_dir, f"{record.experiment}_manifest.json")
    _atomic_write(manifest_path, json.dumps(manifest, indent=2, default=str) + "\n")
    written.append(manifest_path)

    lines = [",".join(record.columns)]
    for row in record.rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    if "csv" in formats:
        csv_path = os.path.join(out_dir, f"{record.experiment}_results.csv")
        _atomic_write(csv_path, "\n".join(lines) + "\n")
        written.append(csv_path)
    if "json" in formats:
        rows = [dict(zip(record.columns, (_format_cell(c) for c in row))) for row in record.rows]
        json_path = os.path.join(out_dir, f"{record.experiment}_results.json")
        _atomic_write(json_path, json.dumps(rows, indent=1) + "\n")
        written.append(json_path)
    return written

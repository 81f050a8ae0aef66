"""Experiment harness: the non-parametric, prediction, and parametric
studies plus the L-curve tolerance sweep.

Each ``run_*`` function takes an :class:`~romswe.config.ExperimentConfig`,
writes CSV tables (deterministic under a fixed seed), JSON summaries
(timings, condition numbers), figures, and raw matrix files into the
configured output directory, and returns a dict of the written paths.

r-sweeps and parameter sweeps fan out across a thread pool sized by the
``ROMSWE_THREADS`` environment variable; report assembly stays
single-threaded and orders rows deterministically.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import galerkin, matio, opinf, plotting, pod, reports, snapshots
from .config import ExperimentConfig
from .fom import (PhysicalParams, State, VortexScenario, conserved_series,
                  coriolis, double_vortex_initial, simulate)
from .grid import Grid, build_diff_2d
from .metrics import (avg_rel_errors, conserved_rel_error, rel_error_global,
                      rel_error_timesteps)
from .regression import lcurve_scan
from .snapshots import STATE_NAMES

INVARIANT_NAMES = ("energy", "mass", "vorticity", "buoyancy")


def worker_count() -> int:
    """Thread-pool size, capped by the ROMSWE_THREADS environment variable."""
    cap = os.environ.get("ROMSWE_THREADS")
    workers = os.cpu_count() or 1
    if cap is not None:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"ROMSWE_THREADS must be an integer, got {cap!r}")
    return workers


def _pool_map(fn, items):
    """Map preserving input order, fanned out over the worker pool."""
    items = list(items)
    if len(items) <= 1 or worker_count() == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(items))) as ex:
        return list(ex.map(fn, items))


class _Problem:
    """Grid, operators, physics, and scenario bound to one config."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.grid = Grid.square(config.n, config.L)
        self.ops = build_diff_2d(self.grid)
        self.scenario = VortexScenario(
            L=config.L, H0=config.H0, dh=config.dh,
            sigma_x=config.sigma_x, sigma_y=config.sigma_y,
            ox=config.ox, oy=config.oy)

    def params(self, mu: float = None, f: float = None) -> PhysicalParams:
        if mu is not None:
            return PhysicalParams(mu=mu, g=self.config.g)
        return PhysicalParams(f=self.config.f if f is None else f,
                              g=self.config.g)

    def initial(self, params: PhysicalParams, oy: float = None) -> State:
        sc = self.scenario
        if oy is not None:
            sc = VortexScenario(L=sc.L, H0=sc.H0, dh=sc.dh, sigma_x=sc.sigma_x,
                                sigma_y=sc.sigma_y, ox=sc.ox, oy=oy)
        return double_vortex_initial(self.grid, params, sc)

    def run_fom(self, params: PhysicalParams, oy: float = None,
                mu: float = None):
        """One full-order run; returns (trajectory, snapshot set)."""
        cfg = self.config
        traj = simulate(self.initial(params, oy=oy), cfg.dt, cfg.steps,
                        params, self.ops)
        snaps = snapshots.collect(traj, params, self.ops,
                                  stride=cfg.stride, mu=mu)
        return traj, snaps


def _rom_series_rows(times, label, series):
    return [(label, t) + tuple(row) for t, row in zip(times, series)]


def _invariant_series_reduced(problem, basis, Z, params):
    """Invariants of the lifted reduced trajectory, shape (K+1, 4)."""
    from .fom import conserved_quantities

    out = np.empty((Z.shape[1], 4))
    for k in range(Z.shape[1]):
        state = basis.lift(Z[:, k])
        out[k] = conserved_quantities(state, params, problem.grid,
                                      problem.ops).as_array()
    return out


def _validation_score(rom, basis, snaps_list, data, dt, stride):
    """Training-window reconstruction error of a candidate learned model.

    Each training trajectory is re-integrated by the candidate reduced
    model from the projected initial state; the score is the relative
    error against the projected snapshots, summed over trajectories.
    Unstable candidates score infinity.
    """
    model = rom.model()
    total = 0.0
    for sn, d in zip(snaps_list, data):
        ref = np.vstack([d.What[j] for j in STATE_NAMES])
        z0 = basis.project(State.from_stacked(sn.initial))
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                Z = model.simulate(z0, dt, stride * sn.K, f=d.f)
            except Exception:
                return np.inf
        approx = Z[:, 1::stride][:, :sn.K]
        if not np.all(np.isfinite(approx)):
            return np.inf
        total += float(np.linalg.norm(approx - ref) / np.linalg.norm(ref))
    return total


def _build_roms(problem, basis, snaps_list, params_list, tol,
                reprojection=True, tol_grid=None, dt=None):
    """Assemble the intrusive model and learn the non-intrusive one.

    With ``tol=None`` the regression drop tolerance is selected from
    ``tol_grid`` by validating each candidate's reduced model on the
    training window (larger tolerances win ties for robustness).
    """
    rom_g = galerkin.assemble(basis, problem.ops)
    if reprojection:
        data = [opinf.reproject(sn, basis, pr, problem.ops)
                for sn, pr in zip(snaps_list, params_list)]
    else:
        data = []
        for sn, pr in zip(snaps_list, params_list):
            d = opinf.project_plain(sn, basis)
            if d.f is None:
                d.f = pr.f
            data.append(d)
    if tol is not None:
        return rom_g, opinf.infer_operators(data, tol=tol)

    A, B = opinf.assemble_data_matrices(data)
    factors = opinf.factor_data_matrices(A)
    stride = snaps_list[0].stride
    best = None
    for cand in sorted(tol_grid):
        rom = opinf.operators_from_factors(factors, B, basis.r, cand)
        score = _validation_score(rom, basis, snaps_list, data, dt, stride)
        if np.isfinite(score) and (best is None or score <= best[0]):
            best = (score, rom)
    if best is None:
        raise RuntimeError("no candidate tolerance yields a stable learned "
                           "model; widen lcurve_grid or set tol explicitly")
    return rom_g, best[1]


def run_nonparametric(config: ExperimentConfig) -> dict:
    """Single-parameter study: FOM, both ROMs over the r-list, full reports."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    params = problem.params()
    timings = {}

    t0 = time.perf_counter()
    traj, snaps = problem.run_fom(params)
    timings["fom_seconds"] = time.perf_counter() - t0

    W_full = snaps.stacked()                       # (4N, K) columns w^1..w^K
    fom_series = conserved_series(traj, params, problem.grid, problem.ops)
    fom_inv = conserved_rel_error(fom_series)

    global_snaps = snapshots.concatenate([snaps])
    r_max = max(config.r_list)
    basis_full = pod.pod_basis(global_snaps, r_max, seed=config.seed)
    pod.save_basis(basis_full, out / "basis.bin")
    snapshots.save(snaps, out / "snapshots.bin")

    def one_r(r):
        t_off = time.perf_counter()
        basis = basis_full.truncate(r)
        rom_g, rom_o = _build_roms(problem, basis, [snaps], [params],
                                   tol=config.tol,
                                   reprojection=config.reprojection,
                                   tol_grid=config.lcurve_grid, dt=config.dt)
        offline = time.perf_counter() - t_off
        z0 = basis.project(traj.states[0])
        result = {"r": r, "offline_seconds": offline,
                  "condition_numbers": rom_o.condition_numbers}
        for label, rom in (("galerkin", rom_g), ("opinf", rom_o)):
            t_on = time.perf_counter()
            Z = rom.model().simulate(z0, config.dt, config.steps, f=params.f)
            online = time.perf_counter() - t_on
            lifted = basis.lift_matrix(Z[:, 1::config.stride])
            series = _invariant_series_reduced(problem, basis, Z, params)
            result[label] = {
                "global": rel_error_global(W_full, lifted),
                "per_state": avg_rel_errors(
                    W_full, lifted, problem.grid.dx * problem.grid.dy),
                "invariants": conserved_rel_error(series),
                "series": series if r == r_max else None,
                "online_seconds": online,
            }
        return result

    results = _pool_map(one_r, sorted(config.r_list))

    # error-vs-r table
    err_rows = []
    for res in results:
        for label in ("galerkin", "opinf"):
            e = res[label]
            err_rows.append((res["r"], label, e["global"],
                             *[e["per_state"][j] for j in STATE_NAMES]))
    paths = {"errors": reports.write_csv(
        out / "errors_vs_r.csv",
        ("r", "rom", "global_rel_error", "avg_rel_error_h", "avg_rel_error_u",
         "avg_rel_error_v", "avg_rel_error_s"), err_rows)}

    # Table-2 analogue: time-averaged relative invariant errors per model
    inv_rows = [("fom", 0) + tuple(fom_inv)]
    for res in results:
        for label in ("galerkin", "opinf"):
            inv_rows.append((label, res["r"]) + tuple(res[label]["invariants"]))
    paths["invariants"] = reports.write_csv(
        out / "invariant_errors.csv",
        ("model", "r") + INVARIANT_NAMES, inv_rows)

    # conserved-quantity series (FOM and both ROMs at the largest r)
    times = traj.times
    series_rows = _rom_series_rows(times, "fom", fom_series)
    series_by_model = {"fom": fom_series}
    res_max = results[-1]
    for label in ("galerkin", "opinf"):
        series = res_max[label]["series"]
        series_by_model[label] = series
        series_rows += _rom_series_rows(times, label, series)
    paths["series"] = reports.write_csv(
        out / "conserved_series.csv",
        ("model", "time") + INVARIANT_NAMES, series_rows)

    # singular values
    sv_rows = []
    for j in STATE_NAMES:
        for i, s in enumerate(basis_full.sigma[j], 1):
            sv_rows.append((j, i, s))
    paths["singular_values"] = reports.write_csv(
        out / "singular_values.csv", ("state", "index", "sigma"), sv_rows)

    # figures
    paths["fig_errors"] = plotting.error_vs_r(
        [res["r"] for res in results],
        {label: [res[label]["global"] for res in results]
         for label in ("galerkin", "opinf")},
        out / "errors_vs_r.png")
    paths["fig_series"] = plotting.conserved_series(
        times, series_by_model, out / "conserved_series.png")
    paths["fig_sv"] = plotting.singular_values(
        basis_full.sigma, out / "singular_values.png")

    # run summary
    timings["per_r"] = [{
        "r": res["r"],
        "offline_seconds": res["offline_seconds"],
        "galerkin_online_seconds": res["galerkin"]["online_seconds"],
        "opinf_online_seconds": res["opinf"]["online_seconds"],
        "fom_over_galerkin": timings["fom_seconds"]
        / max(res["galerkin"]["online_seconds"], 1e-12),
    } for res in results]
    summary = {
        "timings": timings,
        "condition_numbers": {str(res["r"]): res["condition_numbers"]
                              for res in results},
        "fom_invariant_errors": dict(zip(INVARIANT_NAMES, fom_inv)),
    }
    paths["summary"] = reports.write_json(out / "summary.json", summary)
    paths["config"] = reports.write_config_sidecar(out, config,
                                                   {"study": "nonparametric"})
    return paths


def run_prediction(config: ExperimentConfig) -> dict:
    """Train on a leading snapshot window, integrate past it, and compare."""
    from .config import ConfigError

    bad = [k for k in config.k_train_list if k >= config.steps]
    if bad:
        raise ConfigError(f"training windows {bad} do not leave a "
                          f"prediction window within K={config.steps}")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    params = problem.params()

    t0 = time.perf_counter()
    traj, snaps = problem.run_fom(params)
    fom_seconds = time.perf_counter() - t0
    W_full = snaps.stacked()
    area = problem.grid.dx * problem.grid.dy
    times = traj.times[1:]

    def one_case(case):
        k_train, r = case
        train = snaps.head(k_train // config.stride)
        basis = pod.pod_basis(snapshots.concatenate([train]), r,
                              seed=config.seed)
        rom_g, rom_o = _build_roms(problem, basis, [train], [params],
                                   tol=config.tol,
                                   reprojection=config.reprojection,
                                   tol_grid=config.lcurve_grid, dt=config.dt)
        z0 = basis.project(traj.states[0])
        result = {"k_train": k_train, "r": r}
        for label, rom in (("galerkin", rom_g), ("opinf", rom_o)):
            Z = rom.model().simulate(z0, config.dt, config.steps, f=params.f)
            lifted = basis.lift_matrix(Z[:, 1::config.stride])
            series = rel_error_timesteps(W_full, lifted, area)
            split = k_train // config.stride
            result[label] = {
                "series": series,
                "train": float(np.mean(series[:split])),
                "predict": float(np.mean(series[split:])),
            }
        return result

    cases = [(k, r) for k in sorted(config.k_train_list)
             for r in sorted(config.r_list)]
    results = _pool_map(one_case, cases)

    avg_rows = []
    series_rows = []
    paths = {}
    for res in results:
        k_train, r = res["k_train"], res["r"]
        for label in ("galerkin", "opinf"):
            avg_rows.append((k_train, r, label, res[label]["train"],
                             res[label]["predict"]))
            for t, e in zip(times, res[label]["series"]):
                phase = "train" if t <= k_train * config.dt else "predict"
                series_rows.append((k_train, r, label, t, phase, e))
        paths[f"fig_k{k_train}_r{r}"] = plotting.error_timeseries(
            times, {label: res[label]["series"]
                    for label in ("galerkin", "opinf")},
            out / f"prediction_k{k_train}_r{r}.png",
            split_time=k_train * config.dt)

    paths["averages"] = reports.write_csv(
        out / "prediction_averages.csv",
        ("k_train", "r", "rom", "train_avg_error", "predict_avg_error"),
        avg_rows)
    paths["series"] = reports.write_csv(
        out / "prediction_series.csv",
        ("k_train", "r", "rom", "time", "phase", "rel_error"), series_rows)
    paths["summary"] = reports.write_json(
        out / "summary.json", {"timings": {"fom_seconds": fom_seconds}})
    paths["config"] = reports.write_config_sidecar(out, config,
                                                   {"study": "prediction"})
    return paths


def parametric_sets(config: ExperimentConfig):
    """Training and test parameter draws for the parametric study.

    Training latitudes are equidistant regardless of the seed; the seed
    controls the vortex-offset perturbations and the random test
    latitudes.
    """
    rng = np.random.default_rng(config.seed)
    if config.m_train == 1:
        mus_train = [0.5 * (config.mu_min + config.mu_max)]
    else:
        mus_train = list(np.linspace(config.mu_min, config.mu_max,
                                     config.m_train))
    gammas = rng.uniform(-0.05, 0.05, size=config.m_train)
    oys_train = [config.oy + g for g in gammas]
    mus_test = list(rng.uniform(config.mu_min, config.mu_max,
                                size=config.m_test))
    return mus_train, oys_train, mus_test


def run_parametric(config: ExperimentConfig) -> dict:
    """Multi-parameter study: train on equidistant latitudes, test on random."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    mus_train, oys_train, mus_test = parametric_sets(config)
    timings = {}

    def train_run(args):
        mu, oy = args
        return problem.run_fom(problem.params(mu=mu), oy=oy, mu=mu)

    def test_run(mu):
        return problem.run_fom(problem.params(mu=mu), mu=mu)

    t0 = time.perf_counter()
    train_runs = _pool_map(train_run, zip(mus_train, oys_train))
    test_runs = _pool_map(test_run, mus_test)
    timings["fom_seconds"] = time.perf_counter() - t0

    train_snaps = [sn for _, sn in train_runs]
    params_train = [problem.params(mu=mu) for mu in mus_train]
    global_snaps = snapshots.concatenate(train_snaps)
    r_max = max(config.r_list)
    basis_full = pod.pod_basis(global_snaps, r_max, seed=config.seed)
    pod.save_basis(basis_full, out / "basis.bin")

    all_runs = train_runs + test_runs
    all_mus = mus_train + mus_test
    n_train = len(train_runs)
    fom_mats = [traj.matrix()[:, 1:] for traj, _ in all_runs]

    def one_r(r):
        basis = basis_full.truncate(r)
        rom_g, rom_o = _build_roms(problem, basis, train_snaps, params_train,
                                   tol=config.tol,
                                   reprojection=config.reprojection,
                                   tol_grid=config.lcurve_grid, dt=config.dt)
        result = {"r": r, "condition_numbers": rom_o.condition_numbers}
        for label, rom in (("galerkin", rom_g), ("opinf", rom_o)):
            model = rom.model()
            errs, finals = [], []
            for (traj, _), mu, W in zip(all_runs, all_mus, fom_mats):
                z0 = basis.project(traj.states[0])
                Z = model.simulate(z0, config.dt, config.steps, mu=mu)
                errs.append(rel_error_global(W, basis.lift_matrix(Z[:, 1:])))
                finals.append(basis.lift(Z[:, -1]))
            result[label] = {
                "train": float(np.mean(errs[:n_train])),
                "test": float(np.mean(errs[n_train:])) if mus_test else None,
                "per_run": errs,
                "final_test": finals[n_train] if mus_test else None,
            }
        return result

    results = _pool_map(one_r, sorted(config.r_list))

    rows = []
    for res in results:
        for label in ("galerkin", "opinf"):
            rows.append((res["r"], label, res[label]["train"],
                         "" if res[label]["test"] is None
                         else res[label]["test"]))
    paths = {"errors": reports.write_csv(
        out / "parametric_errors.csv",
        ("r", "rom", "rel_avg_error_train", "rel_avg_error_test"), rows)}

    per_run_rows = []
    for res in results:
        for label in ("galerkin", "opinf"):
            for i, (mu, e) in enumerate(zip(all_mus, res[label]["per_run"])):
                split = "train" if i < n_train else "test"
                per_run_rows.append((res["r"], label, split, mu, e))
    paths["per_run"] = reports.write_csv(
        out / "parametric_per_run.csv",
        ("r", "rom", "split", "mu", "rel_error"), per_run_rows)

    r_values = [res["r"] for res in results]
    paths["fig_train"] = plotting.error_vs_r(
        r_values, {label: [res[label]["train"] for res in results]
                   for label in ("galerkin", "opinf")},
        out / "parametric_train.png", ylabel="train avg relative error")
    if mus_test:
        paths["fig_test"] = plotting.error_vs_r(
            r_values, {label: [res[label]["test"] for res in results]
                       for label in ("galerkin", "opinf")},
            out / "parametric_test.png", ylabel="test avg relative error")

        # final-time field dumps for the first test parameter at the largest r
        res_max = results[-1]
        fom_final = all_runs[n_train][0].states[-1]
        fields = {"fom": fom_final.stacked().reshape(-1, 1)}
        for label in ("galerkin", "opinf"):
            fields[label] = res_max[label]["final_test"].stacked().reshape(-1, 1)
        matio.save_matrices(out / "final_fields.bin", fields,
                            {"mu": repr(float(mus_test[0])),
                             "r": res_max["r"]})
        paths["fields"] = out / "final_fields.bin"
        paths["fig_fields"] = plotting.field_panels(
            problem.grid,
            {label: State.from_stacked(fields[label].ravel()).h
             for label in ("fom", "galerkin", "opinf")},
            out / "final_height.png", title="height at final time")

    summary = {
        "timings": timings,
        "mus_train": mus_train,
        "oys_train": oys_train,
        "mus_test": mus_test,
        "condition_numbers": {str(res["r"]): res["condition_numbers"]
                              for res in results},
    }
    paths["summary"] = reports.write_json(out / "summary.json", summary)
    paths["config"] = reports.write_config_sidecar(out, config,
                                                   {"study": "parametric"})
    return paths


def run_lcurve(config: ExperimentConfig) -> dict:
    """Tolerance sweep of the operator regression, one table per equation."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    params = problem.params()

    traj, snaps = problem.run_fom(params)
    r = max(config.r_list)
    basis = pod.pod_basis(snapshots.concatenate([snaps]), r, seed=config.seed)
    if config.reprojection:
        data = opinf.reproject(snaps, basis, params, problem.ops)
    else:
        data = opinf.project_plain(snaps, basis)
        if data.f is None:
            data.f = params.f
    A, B = opinf.assemble_data_matrices([data])

    paths = {}
    tables = {}
    corner_tols = {}
    sv_rows = []
    for j in STATE_NAMES:
        table = lcurve_scan(A[j], B[j], config.lcurve_grid)
        tables[j] = table
        corner_tols[j] = table.corner_tol
        rows = [(p.tol, p.residual, p.norm,
                 "yes" if i == table.corner else "no")
                for i, p in enumerate(table.points)]
        paths[f"lcurve_{j}"] = reports.write_csv(
            out / f"lcurve_{j}.csv",
            ("tol", "residual_norm", "solution_norm", "corner"), rows)
        S = np.linalg.svd(A[j], compute_uv=False)
        for i, s in enumerate(S, 1):
            sv_rows.append((j, i, s / S[0]))

    paths["spectra"] = reports.write_csv(
        out / "data_matrix_spectra.csv",
        ("equation", "index", "normalized_sigma"), sv_rows)
    paths["fig_lcurves"] = plotting.lcurves(tables, out / "lcurves.png")
    paths["fig_spectra"] = plotting.singular_values(
        {j: np.linalg.svd(A[j], compute_uv=False) for j in STATE_NAMES},
        out / "data_matrix_spectra.png",
        title="data-matrix singular values")
    paths["summary"] = reports.write_json(
        out / "summary.json",
        {"corner_tolerances": corner_tols, "r": r,
         "rows": {j: A[j].shape[0] for j in STATE_NAMES},
         "cols": {j: A[j].shape[1] for j in STATE_NAMES}})
    paths["config"] = reports.write_config_sidecar(out, config,
                                                   {"study": "lcurve"})
    return paths


def run_fom_only(config: ExperimentConfig) -> dict:
    """FOM run: snapshots in the matrix container plus invariant series."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    params = problem.params()
    t0 = time.perf_counter()
    traj, snaps = problem.run_fom(params)
    fom_seconds = time.perf_counter() - t0
    snapshots.save(snaps, out / "snapshots.bin")
    series = conserved_series(traj, params, problem.grid, problem.ops)
    paths = {
        "snapshots": out / "snapshots.bin",
        "series": reports.write_csv(
            out / "conserved_series.csv",
            ("time",) + INVARIANT_NAMES,
            [(t,) + tuple(row) for t, row in zip(traj.times, series)]),
        "fig_series": plotting.conserved_series(
            traj.times, {"fom": series}, out / "conserved_series.png"),
        "summary": reports.write_json(
            out / "summary.json",
            {"timings": {"fom_seconds": fom_seconds},
             "invariant_errors": dict(zip(INVARIANT_NAMES,
                                          conserved_rel_error(series)))}),
        "config": reports.write_config_sidecar(out, config, {"study": "fom"}),
    }
    return paths


def run_pod_only(config: ExperimentConfig, snapshot_path=None) -> dict:
    """POD basis computation, optionally from a stored snapshot file."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _Problem(config)
    if snapshot_path is not None:
        snaps = snapshots.load(snapshot_path)
    else:
        _, snaps = problem.run_fom(problem.params())
    basis = pod.pod_basis(snapshots.concatenate([snaps]),
                          max(config.r_list), seed=config.seed)
    pod.save_basis(basis, out / "basis.bin")
    sv_rows = [(j, i, s) for j in STATE_NAMES
               for i, s in enumerate(basis.sigma[j], 1)]
    paths = {
        "basis": out / "basis.bin",
        "singular_values": reports.write_csv(
            out / "singular_values.csv", ("state", "index", "sigma"), sv_rows),
        "fig_sv": plotting.singular_values(basis.sigma,
                                           out / "singular_values.png"),
        "config": reports.write_config_sidecar(out, config, {"study": "pod"}),
    }
    return paths

"""Figure rendering for the experiment reports.

All figures are written to files next to the delimited output; nothing is
shown interactively.  The Agg backend is forced so runs work headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 9,
    "lines.linewidth": 1.4,
})

ROM_STYLE = {"galerkin": dict(color="tab:blue", marker="o"),
             "opinf": dict(color="tab:red", marker="s")}
ROM_LABEL = {"galerkin": "POD-Galerkin", "opinf": "OpInf"}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def error_vs_r(r_values, errors_by_rom, path, ylabel="relative error"):
    """Semilog error-vs-reduced-dimension curves, one line per ROM."""
    fig, ax = plt.subplots()
    for rom, errs in errors_by_rom.items():
        ax.semilogy(r_values, errs, label=ROM_LABEL.get(rom, rom),
                    **ROM_STYLE.get(rom, {}))
    ax.set_xlabel("reduced dimension r")
    ax.set_ylabel(ylabel)
    ax.set_xticks(list(r_values))
    ax.legend()
    return _finish(fig, path)


def conserved_series(times, series_by_model, path):
    """2x2 panel of relative invariant errors over time per model."""
    names = ("energy", "mass", "vorticity", "buoyancy")
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for idx, name in enumerate(names):
        ax = axes.flat[idx]
        for model, series in series_by_model.items():
            ref = series[0, idx]
            err = np.abs(series[1:, idx] - ref) / abs(ref)
            ax.semilogy(times[1:], np.maximum(err, 1e-18),
                        label=ROM_LABEL.get(model, model.upper()))
        ax.set_title(name)
        ax.set_xlabel("time [s]")
        ax.set_ylabel("relative error")
    axes.flat[0].legend()
    return _finish(fig, path)


def singular_values(sigma_by_state, path, title="singular values"):
    """Normalized singular-value decay per state field."""
    fig, ax = plt.subplots()
    for name, sigma in sigma_by_state.items():
        sigma = np.asarray(sigma)
        ax.semilogy(np.arange(1, len(sigma) + 1), sigma / sigma[0], label=name)
    ax.set_xlabel("index")
    ax.set_ylabel("normalized singular value")
    ax.set_title(title)
    ax.legend()
    return _finish(fig, path)


def lcurves(tables_by_state, path):
    """Residual-norm vs solution-norm curves, one panel per state equation."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for ax, (name, table) in zip(axes.flat, tables_by_state.items()):
        res = [p.residual for p in table.points]
        nrm = [p.norm for p in table.points]
        ax.loglog(res, nrm, marker=".", color="tab:blue")
        if table.corner is not None:
            c = table.points[table.corner]
            ax.loglog([c.residual], [c.norm], marker="o", color="tab:red",
                      label=f"corner tol={c.tol:.0e}")
            ax.legend()
        ax.set_title(f"equation {name}")
        ax.set_xlabel("residual norm")
        ax.set_ylabel("solution norm")
    return _finish(fig, path)


def error_timeseries(times, series_by_rom, path, split_time=None):
    """Per-step relative errors with an optional train/predict divider."""
    fig, ax = plt.subplots()
    for rom, series in series_by_rom.items():
        ax.semilogy(times, series, label=ROM_LABEL.get(rom, rom),
                    color=ROM_STYLE.get(rom, {}).get("color"))
    if split_time is not None:
        ax.axvline(split_time, color="k", linestyle="--", linewidth=1,
                   label="training end")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("relative error per step")
    ax.legend()
    return _finish(fig, path)


def field_panels(grid, fields_by_model, path, title=""):
    """Filled-contour panels of one scalar field for several models."""
    n = grid.n
    X, Y = grid.coords()
    models = list(fields_by_model)
    fig, axes = plt.subplots(1, len(models), figsize=(4.2 * len(models), 3.6),
                             squeeze=False)
    vmin = min(f.min() for f in fields_by_model.values())
    vmax = max(f.max() for f in fields_by_model.values())
    for ax, model in zip(axes.flat, models):
        fld = fields_by_model[model].reshape(n, n)
        im = ax.contourf(X / 1e3, Y / 1e3, fld, levels=30, vmin=vmin, vmax=vmax)
        ax.set_title(ROM_LABEL.get(model, model.upper()))
        ax.set_xlabel("x [km]")
        ax.set_ylabel("y [km]")
    fig.colorbar(im, ax=axes.ravel().tolist(), shrink=0.85)
    if title:
        fig.suptitle(title)
    fig.savefig(path)
    plt.close(fig)
    return path

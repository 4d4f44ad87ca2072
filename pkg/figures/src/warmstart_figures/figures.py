"""Five multi-panel figure builders over the experiment driver's artifacts.

Each builder reads artifact tables from one directory and draws them;
nothing is recomputed beyond plotting transforms (grouping rows into
series, argmin/argmax row selection, mean/std bands over repeat rows).
Scaling-law annotations are copied verbatim from the producer's fit
tables and carry their exact value in the artist gid
(``fit_<quantity>_exponent_<repr>``), so rendered SVGs stay auditable.

Panel convention: the axes that count as panels carry the Matplotlib
label "panel"; colorbars and twin axes are auxiliary and unlabeled.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib import pyplot as plt
from matplotlib.colors import LogNorm
from matplotlib.figure import Figure

from .artifacts import SchemaError, load_artifact, load_fits
from .style import apply_style, series_palette, style_rng

SCHEMAS = {
    "variance-sweep": ("n", "M", "r", "mean_loss", "variance", "var_stderr"),
    "variance-vs-dt": ("n", "M", "lambda_max", "dt", "mean_loss", "variance", "var_stderr"),
    "adiabatic-track": (
        "n",
        "track",
        "dt",
        "grad_norm",
        "loss",
        "dist_inf",
        "dist_2",
        "beta_a",
        "continuity_ok",
    ),
    "minima-cut": ("dt", "s", "coord_inf", "loss"),
    "landscape-2d": ("u", "v", "loss"),
    "grad-path": ("arclength", "loss", "directional_gradient", "grad_norm_2"),
}


@dataclass(frozen=True)
class FigureSpec:
    fig_id: str
    indir: Path
    out: Path
    dpi: int = 200


def panels(fig: Figure) -> list:
    return [ax for ax in fig.axes if ax.get_label() == "panel"]


def _ordered_unique(values: np.ndarray) -> list[float]:
    seen: list[float] = []
    for v in values:
        if v not in seen:
            seen.append(float(v))
    return seen


def _annotate_fit(ax, fit: dict | None, quantity: str, text: str, corner=(0.05, 0.07)) -> None:
    """Fit overlay annotation; gid carries the exact recorded exponent."""
    if not fit:
        return
    label = ax.annotate(
        text,
        xy=corner,
        xycoords="axes fraction",
        fontsize=8,
        color="0.25",
    )
    label.set_gid(f"fit_{quantity}_exponent_{fit['exponent']!r}")


def _power_law_line(ax, xs: np.ndarray, fit: dict | None) -> None:
    if not fit:
        return
    grid = np.geomspace(float(np.min(xs)), float(np.max(xs)), 64)
    ax.plot(grid, fit["prefactor"] * grid ** fit["exponent"], "--", color="0.35", lw=1.0)


def build_fig2(indir: Path) -> Figure:
    """Variance vs. radius per system, and both peak scaling laws."""
    art = load_artifact(indir, "variance-sweep", SCHEMAS["variance-sweep"])
    fits = load_fits(indir, "variance-sweep-fits")
    n_col, m_col = art.column("n"), art.column("M")
    r, var, err = art.column("r"), art.column("variance"), art.column("var_stderr")

    fig, axes = plt.subplots(1, 3, figsize=(10.8, 3.3), layout="constrained")
    for ax in axes:
        ax.set_label("panel")
    ax_a, ax_b, ax_c = axes

    keys = _ordered_unique(n_col * 10_000 + m_col)
    pairs = [(int(k // 10_000), int(k % 10_000)) for k in keys]
    colors = series_palette(len(pairs))
    peak_m, peak_r, peak_var = [], [], []
    for (n_val, m_val), color in zip(pairs, colors):
        mask = (n_col == n_val) & (m_col == m_val)
        ax_a.errorbar(
            r[mask],
            var[mask],
            yerr=err[mask],
            color=color,
            elinewidth=0.6,
            capsize=0,
            label=f"n = {n_val}, M = {m_val}",
        )
        i = int(np.argmax(var[mask]))
        peak_m.append(m_val)
        peak_r.append(float(r[mask][i]))
        peak_var.append(float(var[mask][i]))
        star = ax_a.plot(
            r[mask][i], var[mask][i], marker="*", ms=11, color=color,
            mec="black", mew=0.4, ls="none", zorder=5,
        )[0]
        star.set_gid(f"peak_r_M_{m_val}")
    ax_a.set_xscale("log")
    ax_a.set_yscale("log")
    ax_a.set_xlabel("hypercube radius $r$")
    ax_a.set_ylabel("loss variance")
    ax_a.set_title("a) variance vs. sampling radius")
    ax_a.legend(loc="lower left")
    decay = fits.get("log_variance_at_pi_vs_n")
    _annotate_fit(
        ax_a,
        decay,
        "log_variance_at_pi_vs_n",
        f"full-radius decay: {decay['exponent']:.3f} per qubit" if decay else "",
        corner=(0.35, 0.9),
    )

    ms = np.array(peak_m, dtype=float)
    ax_b.plot(ms, peak_r, "o", color="C0", ms=5)
    fit_b = fits.get("r_max_vs_M")
    _power_law_line(ax_b, ms, fit_b)
    _annotate_fit(
        ax_b,
        fit_b,
        "r_max_vs_M",
        f"$r_\\mathrm{{max}} \\propto M^{{{fit_b['exponent']:.3f}}}$" if fit_b else "",
    )
    ax_b.set_xscale("log")
    ax_b.set_yscale("log")
    ax_b.set_xlabel("parameter count $M$")
    ax_b.set_ylabel("peak radius $r_\\mathrm{max}$")
    ax_b.set_title("b) peak radius vs. parameter count")

    ax_c.plot(ms, peak_var, "s", color="C3", ms=5)
    fit_c = fits.get("variance_max_vs_M")
    _power_law_line(ax_c, ms, fit_c)
    _annotate_fit(
        ax_c,
        fit_c,
        "variance_max_vs_M",
        f"peak variance $\\propto M^{{{fit_c['exponent']:.3f}}}$" if fit_c else "",
    )
    ax_c.set_xscale("log")
    ax_c.set_yscale("log")
    ax_c.set_xlabel("parameter count $M$")
    ax_c.set_ylabel("peak variance")
    ax_c.set_title("c) peak variance vs. parameter count")
    return fig


def _band_over_tracks(
    dt: np.ndarray, track: np.ndarray, value: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean and std of value over repeat tracks, aligned on the dt grid."""
    grid = np.unique(dt)
    rows = []
    for t in np.unique(track):
        mask = track == t
        lookup = dict(zip(dt[mask], value[mask]))
        rows.append([lookup.get(g, np.nan) for g in grid])
    stacked = np.array(rows, dtype=float)
    return grid, np.nanmean(stacked, axis=0), np.nanstd(stacked, axis=0)


def build_fig3(indir: Path) -> Figure:
    """Landscape cuts, tracked-minimum travel bands, and the fixed-step spread."""
    track = load_artifact(
        indir, "adiabatic-track", SCHEMAS["adiabatic-track"], extra_prefix="theta_"
    )
    cut = load_artifact(indir, "minima-cut", SCHEMAS["minima-cut"])

    fig, axes = plt.subplots(1, 3, figsize=(10.8, 3.3), layout="constrained")
    for ax in axes:
        ax.set_label("panel")
    ax_a, ax_b, ax_c = axes

    cut_dt, coord, cut_loss = cut.column("dt"), cut.column("coord_inf"), cut.column("loss")
    dts = _ordered_unique(cut_dt)
    for dt_val, color in zip(dts, series_palette(len(dts))):
        mask = cut_dt == dt_val
        ax_a.plot(coord[mask], cut_loss[mask], color=color, label=f"$\\delta t$ = {dt_val:g}")
    ax_a.set_xlabel("cut coordinate $\\|\\theta - \\theta^*\\|_\\infty$")
    ax_a.set_ylabel("loss")
    ax_a.set_title("a) landscape cuts")
    ax_a.legend(loc="upper right")

    n_col = track.column("n")
    track_id = track.column("track")
    track_dt = track.column("dt")
    dist = track.column("dist_inf")
    sizes = _ordered_unique(n_col)
    size_colors = series_palette(len(sizes))
    for n_val, color in zip(sizes, size_colors):
        mask = n_col == n_val
        grid, mean, std = _band_over_tracks(track_dt[mask], track_id[mask], dist[mask])
        ax_b.plot(grid, mean, color=color, label=f"n = {int(n_val)}")
        ax_b.fill_between(grid, mean - std, mean + std, color=color, alpha=0.25, lw=0)
    ax_b.set_xlabel("time step $\\delta t$")
    ax_b.set_ylabel("distance from warm start $\\|\\theta - \\theta^*\\|_\\infty$")
    ax_b.set_title("b) tracked-minimum travel, mean $\\pm$ std")
    ax_b.legend(loc="upper left")

    # distribution panel at the dt sample nearest the conventional 0.2 readout
    target = float(track_dt[int(np.argmin(np.abs(track_dt - 0.2)))])
    groups = [dist[(n_col == n_val) & (track_dt == target)] for n_val in sizes]
    positions = np.arange(len(sizes), dtype=float)
    rng = style_rng()
    for pos, values, color in zip(positions, groups, size_colors):
        if values.size >= 2 and np.ptp(values) > 0:
            body = ax_c.violinplot(
                [values], positions=[pos], widths=0.6, showextrema=False
            )["bodies"][0]
            body.set_facecolor(color)
            body.set_alpha(0.45)
        ax_c.boxplot(
            [values],
            positions=[pos],
            widths=0.16,
            showfliers=False,
            medianprops={"color": "0.15"},
        )
        jitter = rng.uniform(-0.07, 0.07, size=values.size)
        ax_c.plot(pos + jitter, values, "o", ms=3.5, color=color, mec="0.2", mew=0.3)
    ax_c.set_xticks(positions)
    ax_c.set_xticklabels([f"n = {int(v)}" for v in sizes])
    ax_c.set_ylabel("distance from warm start $\\|\\theta - \\theta^*\\|_\\infty$")
    ax_c.set_title(f"c) spread across repeats at $\\delta t$ = {target:g}")
    return fig


def build_fig4(indir: Path) -> Figure:
    """Overlaid 1-D cuts, one per time step, minimum marker on each."""
    cut = load_artifact(indir, "minima-cut", SCHEMAS["minima-cut"])
    cut_dt, coord, loss = cut.column("dt"), cut.column("coord_inf"), cut.column("loss")

    fig, ax = plt.subplots(figsize=(5.6, 3.8), layout="constrained")
    ax.set_label("panel")
    dts = _ordered_unique(cut_dt)
    for dt_val, color in zip(dts, series_palette(len(dts))):
        mask = cut_dt == dt_val
        x, y = coord[mask], loss[mask]
        ax.plot(x, y, color=color, label=f"$\\delta t$ = {dt_val:g}")
        i = int(np.argmin(y))
        marker = ax.plot(
            x[i], y[i], marker="v", ms=7, color=color, mec="black", mew=0.4,
            ls="none", zorder=5,
        )[0]
        marker.set_gid(f"cut_minimum_{dt_val!r}")
    ax.set_xlabel("cut coordinate $\\|\\theta - \\theta^*\\|_\\infty$")
    ax.set_ylabel("loss")
    ax.set_title("1-D cuts through the warm start and the distant minimum")
    ax.legend(loc="upper left")
    return fig


def build_fig5(indir: Path) -> Figure:
    """Loss heatmap with the descent trajectory, plus its gradient profile."""
    grid_art = load_artifact(indir, "landscape-2d", SCHEMAS["landscape-2d"])
    profile = load_artifact(indir, "grad-path", SCHEMAS["grad-path"])
    meta = grid_art.meta
    if "trajectory_u" not in meta or "trajectory_v" not in meta:
        raise SchemaError(
            "landscape-2d.meta.json: missing trajectory_u/trajectory_v for the overlay"
        )

    u, v, loss = grid_art.column("u"), grid_art.column("v"), grid_art.column("loss")
    uu, vv = np.unique(u), np.unique(v)
    grid = np.full((vv.size, uu.size), np.nan)
    grid[np.searchsorted(vv, v), np.searchsorted(uu, u)] = loss
    if np.isnan(grid).any():
        raise SchemaError("landscape-2d.csv: u,v samples do not form a complete grid")

    fig, (ax_a, ax_b) = plt.subplots(
        1, 2, figsize=(9.6, 3.7), layout="constrained", width_ratios=(1.15, 1.0)
    )
    ax_a.set_label("panel")
    ax_b.set_label("panel")

    norm = LogNorm(vmin=float(grid.min()), vmax=float(grid.max())) if grid.min() > 0 else None
    mesh = ax_a.pcolormesh(uu, vv, grid, shading="nearest", cmap="magma", norm=norm)
    fig.colorbar(mesh, ax=ax_a, label="loss", pad=0.02)
    tu = np.asarray(meta["trajectory_u"], dtype=float)
    tv = np.asarray(meta["trajectory_v"], dtype=float)
    ax_a.plot(tu, tv, color="white", lw=1.5, solid_capstyle="round")
    ax_a.scatter(tu[0], tv[0], marker="X", s=60, facecolor="white",
                 edgecolor="black", zorder=6, label="start")
    ax_a.scatter(tu[-1], tv[-1], marker="X", s=60, facecolor="black",
                 edgecolor="white", zorder=6, label="minimum")
    ax_a.set_xlabel("principal direction $u$")
    ax_a.set_ylabel("principal direction $v$")
    story = meta.get("story", {})
    title = "a) loss landscape around the descent trajectory"
    if "dt" in story:
        title += f" ($\\delta t$ = {story['dt']:g})"
    ax_a.set_title(title)
    ax_a.legend(loc="upper right")

    arc = profile.column("arclength")
    path_loss = profile.column("loss")
    directional = np.abs(profile.column("directional_gradient"))
    grad_norm = profile.column("grad_norm_2")
    line_loss = ax_b.plot(arc, path_loss, color="C0", label="loss")[0]
    if np.all(path_loss > 0):
        ax_b.set_yscale("log")
    ax_b.set_xlabel("arc length along trajectory")
    ax_b.set_ylabel("loss", color="C0")
    twin = ax_b.twinx()
    twin.grid(False)
    line_dir = twin.plot(arc, directional, color="C1", label="|directional gradient|")[0]
    line_norm = twin.plot(arc, grad_norm, color="C1", ls=":", lw=1.1,
                          label="gradient 2-norm")[0]
    if np.all(directional[np.isfinite(directional)] >= 0) and np.nanmax(grad_norm) > 0:
        positive = directional[directional > 0]
        if positive.size and np.all(grad_norm > 0):
            twin.set_yscale("log")
    twin.set_ylabel("gradient magnitude", color="C1")
    ax_b.legend(handles=[line_loss, line_dir, line_norm], loc="upper right")
    ax_b.set_title("b) profile along the trajectory")
    return fig


def build_fig8(indir: Path) -> Figure:
    """Variance vs. time step, one series per Hamiltonian strength."""
    art = load_artifact(indir, "variance-vs-dt", SCHEMAS["variance-vs-dt"])
    fits = load_fits(indir, "variance-vs-dt-fits")
    lam_col = art.column("lambda_max")
    dt, var, err = art.column("dt"), art.column("variance"), art.column("var_stderr")

    fig, ax = plt.subplots(figsize=(5.6, 3.8), layout="constrained")
    ax.set_label("panel")
    lambdas = _ordered_unique(lam_col)
    for lam, color in zip(lambdas, series_palette(len(lambdas))):
        mask = lam_col == lam
        ax.errorbar(
            dt[mask],
            var[mask],
            yerr=err[mask],
            color=color,
            elinewidth=0.6,
            capsize=0,
            label=f"$\\lambda_\\mathrm{{max}}$ = {lam:g}",
        )
        i = int(np.argmax(var[mask]))
        star = ax.plot(
            dt[mask][i], var[mask][i], marker="*", ms=11, color=color,
            mec="black", mew=0.4, ls="none", zorder=5,
        )[0]
        star.set_gid(f"dt_peak_lambda_{lam!r}")
    fit = fits.get("dt_peak_vs_lambda")
    _annotate_fit(
        ax,
        fit,
        "dt_peak_vs_lambda",
        f"peak $\\delta t \\propto \\lambda_\\mathrm{{max}}^{{{fit['exponent']:.3f}}}$" if fit else "",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("time step $\\delta t$")
    ax.set_ylabel("loss variance")
    ax.set_title("loss variance vs. time step")
    ax.legend(loc="lower left")
    return fig


BUILDERS = {
    "fig2": build_fig2,
    "fig3": build_fig3,
    "fig4": build_fig4,
    "fig5": build_fig5,
    "fig8": build_fig8,
}

PANEL_COUNTS = {"fig2": 3, "fig3": 3, "fig4": 1, "fig5": 2, "fig8": 1}


def build(fig_id: str, indir: str | Path) -> Figure:
    if fig_id not in BUILDERS:
        raise ValueError(f"unknown figure id {fig_id!r}; have {sorted(BUILDERS)}")
    apply_style()
    return BUILDERS[fig_id](Path(indir))


def render(spec: FigureSpec) -> Path:
    """Build one figure and write it; format follows the output suffix."""
    out = Path(spec.out)
    fmt = out.suffix.lower().lstrip(".")
    if fmt not in ("png", "svg"):
        raise ValueError(f"output must end in .png or .svg, got {out.name!r}")
    fig = build(spec.fig_id, spec.indir)
    out.parent.mkdir(parents=True, exist_ok=True)
    # SVG is the only format that embeds a timestamp; strip it so identical
    # inputs give identical bytes
    metadata = {"Date": None} if fmt == "svg" else None
    fig.savefig(out, dpi=spec.dpi, metadata=metadata)
    plt.close(fig)
    return out

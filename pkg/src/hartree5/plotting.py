"""Figure rendering for the command-line reports (Agg backend, PNG files)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0
colors = ["#08589e", "#2b8cbe", "#4eb3d3", "#7bccc4", "#d95f0e", "#636363"]

params = {
    "axes.prop_cycle": matplotlib.cycler(color=colors),
    "axes.labelsize": 9,
    "font.family": "serif",
    "font.size": 8,
    "mathtext.fontset": "stix",
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 150,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "savefig.bbox": "tight",
}

# PNG metadata without version strings keeps reruns byte-identical
_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_profile(r, values, path, label="Q", tail_power=4):
    """Profile and ``r^p |f|`` on log axes, side by side."""
    with plt.rc_context(params):
        fig, (a, b) = plt.subplots(1, 2, figsize=(fig_width, fig_width * golden_mean * 0.8))
        a.plot(r, values)
        a.set_xlim(0, min(r[-1], 10))
        a.set_xlabel("$r$")
        a.set_ylabel(f"${label}(r)$")
        mag = np.abs(values)
        keep = mag > 0
        b.loglog(r[keep], (r**tail_power * mag)[keep])
        b.set_xlabel("$r$")
        b.set_ylabel(f"$r^{tail_power}|{label}|$")
        fig.tight_layout()
        return _save(fig, path)


def plot_monitors(monitors, path):
    """Mass, Hdot^1/2 norm, energy and frequency scale against time."""
    t = np.array([m.t for m in monitors])
    mass = np.array([m.mass for m in monitors])
    panels = [
        ("relative mass drift", mass / mass[0] - 1 if mass[0] else mass),
        (r"$\|u\|_{\dot H^{1/2}}$", [m.hhalf for m in monitors]),
        ("energy", [m.energy for m in monitors]),
        ("$N(t)$", [m.n_of_t for m in monitors]),
    ]
    with plt.rc_context(params):
        fig, axes = plt.subplots(2, 2, sharex=True, figsize=(fig_width, fig_width * 0.75))
        for ax, (name, y) in zip(axes.flat, panels):
            ax.plot(t, y)
            ax.set_ylabel(name)
        for ax in axes[1]:
            ax.set_xlabel("$t$")
        fig.tight_layout()
        return _save(fig, path)


def plot_scan(rows, path):
    x = [r["hhalf0_over_threshold"] for r in rows]
    y = [r["max_hhalf"] for r in rows]
    blow = [r["verdict"] != "Completed" for r in rows]
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(x, y, "-", color=colors[5], lw=0.6)
        for xi, yi, b in zip(x, y, blow):
            ax.plot(xi, yi, "x" if b else "o", color=colors[4] if b else colors[0])
        ax.axvline(1.0, ls=":", color=colors[5])
        ax.set_xlabel(r"$\|u_0\|_{\dot H^{1/2}}$ / scattering threshold")
        ax.set_ylabel(r"max $\|u\|_{\dot H^{1/2}}$")
        return _save(fig, path)


def plot_dispersive(times, sup, exponent, path):
    times = np.asarray(times)
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.loglog(times, sup, "o", label="measured")
        ref = sup[0] * (times / times[0]) ** -2.5
        ax.loglog(times, ref, "--", label="$t^{-5/2}$")
        ax.set_xlabel("$t$")
        ax.set_ylabel(r"$\|e^{it\Delta}f\|_\infty$")
        ax.set_title(f"fitted exponent {exponent:.4f}")
        ax.legend()
        return _save(fig, path)


def plot_bernstein(rows, path):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        keys = sorted({(r["p"], r["q"], r["s"], r["kind"]) for r in rows}, key=str)
        for p, q, s, kind in keys:
            sel = [r for r in rows if (r["p"], r["q"], r["s"], r["kind"]) == (p, q, s, kind)]
            n_ = [r["N"] for r in sel]
            ax.loglog(n_, [r["pq_ratio"] for r in sel], "o-", label=f"({p},{q}) {kind}")
            if s:
                ax.loglog(n_, [r["s_ratio"] for r in sel], "s--", label=f"s={s} {kind}")
        ax.set_xlabel("$N$")
        ax.set_ylabel("ratio")
        ax.legend()
        return _save(fig, path)


def plot_virial(t, fd, total, path):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(t, total, "-", label="rate identity")
        ax.plot(t, fd, "o", label="centred difference")
        ax.set_xlabel("$t$")
        ax.set_ylabel(r"$dM_a/dt$")
        ax.legend()
        return _save(fig, path)

"""Static SVG figures with fixed styling and reproducible bytes."""

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "freelyap", "svg.fonttype": "none", "font.size": 9,
       "figure.figsize": (5.0, 3.4), "axes.grid": True, "grid.alpha": 0.3}


def _render(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def profile_svg(profile) -> str:
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))
        ax1.plot(profile.t_grid, profile.F_values, color="C0")
        ax1.set_xlabel("t")
        ax1.set_ylabel("F(t)")
        f = np.where(np.isfinite(profile.f_values), profile.f_values, np.nan)
        ax2.plot(profile.t_grid, f, color="C1")
        ax2.set_xlabel("t")
        ax2.set_ylabel("f(t)")
        fig.suptitle(profile.source_label)
        fig.tight_layout()
        return _render(fig)


def distribution_svg(dist, empirical=None, label: str = "") -> str:
    """Analytic exponent CDF, optionally overlaid with an empirical sample."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(dist.x_grid, dist.cdf_values, color="C0", label="analytic")
        if empirical is not None:
            e = np.sort(np.where(np.isfinite(empirical), empirical, 0.0))
            ax.step(e, np.arange(1, e.size + 1) / e.size, where="post", color="C3",
                    lw=0.8, label="empirical")
            ax.legend(loc="upper left")
        ax.set_xlabel("x")
        ax.set_ylabel("CDF")
        ax.set_title(label)
        fig.tight_layout()
        return _render(fig)


def newman_svg(table) -> str:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(table[:, 0], table[:, 1], color="C0", label="H(x)")
        ax.plot(table[:, 0], table[:, 2], "--", color="C1", label="CDF at log x")
        ax.set_xlabel("x")
        ax.legend(loc="upper left")
        fig.tight_layout()
        return _render(fig)

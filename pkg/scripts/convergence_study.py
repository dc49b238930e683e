"""How the finite-N statistics approach the free limit as N grows.

For MP(1) products this tabulates, per N, the mean and spread over seeds of
the KS distance to the triangle law, the error of the middle exponent, and
the projected-growth error at t = 0.5.  Short products add a bias of order
1/steps on top of the finite-N error.  The MC tolerances used in the
acceptance suite were chosen from this table.
"""

import argparse
import math

import numpy as np

from freelyap.lyapunov import integrated_exponent
from freelyap.rmt_oracle import EnsembleConfig, exponent_ks, lyapunov_spectrum_qr, projected_growth


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    mid_ref = 0.5 * math.log(0.5)
    print(f"{'N':>5} {'KS mean':>9} {'KS sd':>7} {'|mid err|':>10} {'|growth err|':>13}")
    for N in args.sizes:
        ks, mid, growth = [], [], []
        for seed in range(args.seeds):
            cfg = EnsembleConfig(N=N, steps_n=args.steps, seed=seed)
            exps, _, _ = lyapunov_spectrum_qr(cfg)
            ks.append(exponent_ks(exps, cfg.measure))
            mid.append(abs(exps[N // 2 - 1] - mid_ref))
            growth.append(abs(projected_growth(cfg, 0.5) - integrated_exponent(cfg.measure, 0.5)))
        print(f"{N:>5} {np.mean(ks):>9.4f} {np.std(ks):>7.4f} {np.mean(mid):>10.4f} {np.mean(growth):>13.4f}")


if __name__ == "__main__":
    main()

"""Coverage of the fitted constant term over seeded synthetic heat-leak series.

    python scripts/coverage_study.py [N_SEEDS] [NOISE]
"""

import sys

import numpy as np

from collapsebounds.heatleak import RelaxationSpec, bootstrap_uncertainty, fit_relaxation, generate_synthetic

A, Q0 = 100e-12, 170e-12


def main(n_seeds: int = 200, noise: float = 0.05) -> None:
    spec = RelaxationSpec()
    pulls = []
    for seed in range(n_seeds):
        s = generate_synthetic(spec, [A], Q0, noise, 200, (1e3, 1e7), seed)
        fit = fit_relaxation(s, spec)
        pulls.append((fit.constant - Q0) / fit.constant_sigma)
    pulls = np.array(pulls)
    print(f"{n_seeds} series at {noise:.0%} noise")
    print(f"  pull mean {pulls.mean():+.3f}, sd {pulls.std(ddof=1):.3f}")
    for k in (1, 2, 3):
        print(f"  within {k} sd: {np.mean(np.abs(pulls) <= k):.3f}")
    s = generate_synthetic(spec, [A], Q0, noise, 200, (1e3, 1e7), 0)
    b = bootstrap_uncertainty(s, spec, 500, seed=0)
    print(f"  seed 0: analytic sd {fit_relaxation(s).constant_sigma:.3e} W, bootstrap sd {b.sd:.3e} W")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(int(args[0]) if args else 200, float(args[1]) if len(args) > 1 else 0.05)

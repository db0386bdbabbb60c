"""Exclusion plot: DP heating against R0 with the cryostat limit and the copper u_rms.

    python scripts/fig1.py [OUTDIR]

Writes fig1.csv and fig1.svg and prints where the curve meets each limit.
"""

import sys
from pathlib import Path

from collapsebounds.catalog import crossing_length, dataset_to_csv, exclusion_dataset, load_catalog, plot_dataset
from collapsebounds.models import HeatingModel, specific_power, urms_from_debye_waller
from collapsebounds.quantities import COPPER, parse_quantity, pretty


def main(outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    model = HeatingModel.dp()
    catalog = load_catalog()
    urms = urms_from_debye_waller(COPPER.debye_waller_B)
    ds = exclusion_dataset(
        model,
        [catalog.get("cryostat-heatleak")],
        [("u_rms (Cu)", urms)],
        (parse_quantity("1 pm"), parse_quantity("10 pm")),
        200,
    )
    (outdir / "fig1.csv").write_text(dataset_to_csv(ds))
    plot_dataset(ds, outdir / "fig1.svg")
    for label, limit in ds.limit_lines:
        print(f"{label}: curve crosses {pretty(limit)} at {crossing_length(ds, limit) * 1e12:.3f} pm")
    print(f"u_rms = {pretty(urms)}, predicted {pretty(specific_power(model, urms))}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out"))

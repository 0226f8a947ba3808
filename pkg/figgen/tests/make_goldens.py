"""Regenerate the golden images from a fresh simulator run."""

import pathlib
import sys
import tempfile

sys.path.insert(0, str(pathlib.Path(__file__).parent))
from _pipeline import SPECTRA, generate

from figgen.layouts import render

GOLDENS = pathlib.Path(__file__).parent / "goldens"


def main():
    GOLDENS.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp)
        generate(out)
        render("spectra_grid", [out / name for name in SPECTRA],
               GOLDENS / "spectra_grid.png")
        render("peak_scan", [out / "peakscan.csv"], GOLDENS / "peak_scan.png")
        render("harmonics_bars", [out / "harmonics.csv"],
               GOLDENS / "harmonics_bars.png")
    print(f"goldens written to {GOLDENS}")


if __name__ == "__main__":
    main()

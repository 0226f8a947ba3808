"""Shared recipe: produce the simulator CSVs the figure tests render.

The simulator is driven only through its command line (the external
interface); its outputs are deterministic, so goldens stay valid as long as
neither the physics nor the figure style changes intentionally.
"""

import subprocess
import sys


def generate(outdir):
    cmds = [
        ["spectrum", "--kappa", "1", "--khat", "x", "--channel", "par"],
        ["spectrum", "--kappa", "1", "--khat", "y", "--channel", "par"],
        ["spectrum", "--kappa", "2", "--khat", "x", "--channel", "par"],
        ["spectrum", "--kappa", "2", "--khat", "y", "--channel", "par"],
        ["peakscan", "--theta-min-pi", "0", "--theta-max-pi", "4",
         "--steps", "33", "--normalized"],
        ["harmonics", "--n-max", "8"],
    ]
    for cmd in cmds:
        res = subprocess.run([sys.executable, "-m", "mqcsim.cli", *cmd,
                              "--out", str(outdir)],
                             capture_output=True, text=True)
        if res.returncode != 0:
            raise RuntimeError(f"mqcsim {' '.join(cmd)} failed: {res.stderr}")


SPECTRA = ["spectrum_k1_x_par.csv", "spectrum_k1_y_par.csv",
           "spectrum_k2_x_par.csv", "spectrum_k2_y_par.csv"]

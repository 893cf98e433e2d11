"""
Spatial correlation versus array size
=====================================

A wider transmitter array makes the illumination decorrelate over shorter
distances in the scene.  Correlation maps are measured for three array
sides and their half-maximum widths compared with the coherence-size band
R lambda / 2b .. R lambda / b.
"""
from pathlib import Path

import numpy as np

from mwgi import (
    CarrierSpec,
    Scene,
    build_square_array,
    coherence_report,
    correlation_width,
    spatial_correlation_map,
)
from mwgi.io import write_pgm

out = Path("demo_output")
out.mkdir(exist_ok=True)

grid = Scene.empty(32, 32, 0.015)  # only the layout matters here
ref = (16, 16)
carrier = CarrierSpec()

for b in (0.5, 1.0, 4.0):
    geometry = build_square_array(4, b, standoff=1.0)
    widths = []
    for seed in range(5):
        corr = spatial_correlation_map(geometry, carrier, grid, ref, n_detections=1500, seed=seed)
        widths.append(correlation_width(corr, grid.pixel_size, ref))
    write_pgm(out / f"corr_b{b:g}.pgm", corr, vmax=1.0)
    rep = coherence_report(carrier, 1.0, b, float(np.median(widths)))
    print(f"b = {b:3g} m  width {rep.measured_width * 1e3:6.1f} mm  "
          f"band {rep.dc_lower * 1e3:6.1f}..{rep.dc_upper * 1e3:6.1f} mm  "
          f"within x2: {rep.within_factor(2)}")

# Small arrays measure narrower than their band: with 2 GHz of bandwidth the
# delay differences alone decorrelate the field, which the single-frequency
# bound ignores.  At b = 4 m the measured width sits inside the band.

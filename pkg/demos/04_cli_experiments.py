"""
Running the experiment drivers
==============================

The drivers behind the ``mwgi`` command can also be called directly with a
config object.  Here a small config is parsed from text, each experiment
is run, and its summary printed.
"""
from pathlib import Path

from mwgi.config import parse_config_string
from mwgi.experiments import (
    run_coherence_report,
    run_mse_sweep,
    run_reconstruction_experiment,
    run_sampling_experiment,
    run_spatial_experiment,
)
from mwgi.io import read_metadata

cfg = parse_config_string("""
[geometry]
n_tx = 16

[scene]
rows = 6
cols = 6
pixel_size_m = 0.1

[spatial]
array_sides_m = 0.5, 4
n_detections = 500
n_seeds = 3

[output]
directory = demo_output/cli
""")

for run in (run_coherence_report, run_sampling_experiment, run_spatial_experiment,
            run_reconstruction_experiment, run_mse_sweep):
    written = run(cfg)
    summary = next(p for p in written if p.name == "summary.txt")
    print(f"== {summary.parent.name}")
    for key, value in read_metadata(summary).items():
        print(f"   {key} = {value}")

# Same files from the shell:
#   mwgi reconstruct --config my.ini --out results --seed 0
print(f"outputs under {Path(cfg.output.directory).resolve()}")

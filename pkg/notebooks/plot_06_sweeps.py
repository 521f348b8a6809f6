"""
Seeded parameter sweeps and figure data
=======================================

Sweeps are described by a small config; output is a CSV that does not depend
on the number of worker threads.
"""

import tempfile

from riskeygen.config import parse_config
from riskeygen.figures import figure
from riskeygen.sweep import rows_to_csv, run_sweep

cfg = parse_config(
    """
[sweep]
variable = N
values = 20,60,100
metrics = skr_lb,kmr_ab
[run]
trials = 16
master_seed = 3
"""
)
text = rows_to_csv(run_sweep(cfg, workers=1))
print(text)
assert text == rows_to_csv(run_sweep(cfg, workers=4))

###########################################################################
# Figure data goes to one CSV per series.

with tempfile.TemporaryDirectory() as d:
    for label, path in figure("skr_vs_n", d).items():
        print(label, open(path).read().count("\n") - 1, "rows")

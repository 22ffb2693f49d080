"""Do bigger farms move first? Each area quartile on its own network.

Run from the repository root:  python3 demos/06_quartiles.py
"""

from dataclasses import replace

from fertdiffusion import default_config
from fertdiffusion.pipeline import run_quartile_study

cfg = replace(default_config(), iterations=100)
q = run_quartile_study(cfg, scenario="subsidy")
print("quartile sizes:", q.sizes)
print("year " + "".join(f"   Q{k + 1}" for k in range(4)))
for year in (1, 2, 3, 5, 10, 15):
    print(f"{year:>4} " + "".join(f" {q.curve(k)[year]:5.2f}" for k in range(4)))

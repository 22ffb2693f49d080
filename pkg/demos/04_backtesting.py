"""Calibrate the peer-influence weight against adoption anchors, then ask
how much of the fit the network explains.

Run from the repository root:  python3 demos/04_backtesting.py
"""

from fertdiffusion import default_config
from fertdiffusion.calibrate import (
    ablate_network,
    anchors_from_trajectory,
    calibrate_omega,
    default_anchors,
    sensitivity_omega,
)
from fertdiffusion.montecarlo import run_ensemble

cfg = default_config()
pop = cfg.load_population()
net = cfg.build_network(len(pop))
sc = cfg.scenario

anchors = default_anchors()
for y, a, interp in zip(anchors.years, anchors.adoption, anchors.interpolated):
    print(f"  {y}: {a:.3f}{'  (interpolated)' if interp else ''}")

result = calibrate_omega(anchors, (0.2, 0.5, 0.85), sc, pop, net, n_iterations=50)
print("\nshipped anchors ->", result.to_json())

# On synthetic farms the published weight need not win. A cleaner check is
# to let the model write its own anchors and see whether calibration finds
# the weight that produced them.
truth = run_ensemble(sc.with_adoption(omega=0.85), pop, net, 50, base_seed=99)
own = anchors_from_trajectory(truth.mean_adoption(), truth.years, range(2019, 2025))
print("self-generated anchors at omega=0.85 -> winner", calibrate_omega(own, (0.2, 0.5, 0.85), sc, pop, net).omega)

abl = ablate_network(sc, own, pop, net)
print(f"RMSE with peers {abl.rmse_with:.4f}, without {abl.rmse_without:.4f} (network value {abl.delta:.4f})")

for w, point in sensitivity_omega(sc, pop, net, (0.2, 0.5, 0.85)).items():
    print(f"omega {w}: baseline inflection at year {point.fits['baseline'].t0:.2f}, fastest first: {point.scenario_order()}")

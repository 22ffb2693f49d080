"""Build the synthetic dairy sector and look at who talks to whom.

Run from the repository root:  python3 demos/01_farms_and_network.py
"""

import numpy as np

from fertdiffusion import synthesize_population, watts_strogatz
from fertdiffusion.population import assign_quartiles
from fertdiffusion.emissions import intensities

pop = synthesize_population(295, seed=1)
area = pop.column("land_area_ha")
print(f"{len(pop)} farms, median area {np.median(area):.0f} ha (range {area.min():.0f}-{area.max():.0f})")

# Carbon intensity is whole-farm kg CO2-eq per kg of fat-and-protein-corrected milk.
ci = intensities(pop)
print(f"carbon intensity: mean {ci.mean():.2f}, 10th-90th pct {np.percentile(ci, 10):.2f}-{np.percentile(ci, 90):.2f}")
print(f"share above 1.25 (the high-emitter tail): {np.mean(ci > 1.25):.1%}")

# Size and milk scores enter the adoption probability after max-normalisation.
print("largest farm has size_norm", pop.size_norm.max(), "; smallest", round(pop.size_norm.min(), 3))

# The peer network: each farm starts with two neighbours on each side of a ring,
# then about one edge in ten is rewired to a random farm.
net = watts_strogatz(len(pop), k=4, p=0.1, seed=1)
deg = net.degrees
print(f"{net.n_edges} ties, {net.n_rewired} rewired, degree {deg.min()}-{deg.max()}, connected: {net.is_connected()}")

# A few long-range ties are what make this a small world.
far = [(i, j) for i, j in net.edges() if min(abs(i - j), net.n - abs(i - j)) > 2]
print("examples of long-range ties:", far[:5])

quart = assign_quartiles(pop)
for q in range(4):
    members = quart.members(q)
    print(f"  area quartile {q + 1}: {len(members)} farms, mean {area[members].mean():.0f} ha")

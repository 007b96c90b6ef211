"""
Discrete arrays against the continuous aperture
===============================================

Optimize half-wavelength and denser discrete arrays over the same scene and
compare their receive power with the continuous optimizer.
"""

from ddcmimo.baselines import (
    ElementChannel,
    conventional_antenna_grid,
    discrete_optimize,
    effective_aperture,
    svd_baseline_power,
    uniform_antenna_grid,
)
from ddcmimo.beamforming import OptimizerConfig, optimize, receive_power_db
from ddcmimo.channel import SceneSamplingParams, sample_scene

scene = sample_scene(SceneSamplingParams(n_paths=3, seed=5))
config = OptimizerConfig(max_iters=20, n_streams=4, gl_order=6)
capa = optimize(scene, config)
print(f"continuous aperture: {receive_power_db(capa.final_objective):.2f} dB")
print(f"effective element aperture {effective_aperture(scene.wavelength_m):.4e} m^2")

# %%
# Half-wavelength grid and the calibrated SVD comparator.
pos, counts = conventional_antenna_grid(0.5, 0.5, scene.wavelength_m / 2)
chan = ElementChannel(scene, pos, pos)
disc = discrete_optimize(chan, config)
calib = capa.initial_objective / disc.initial_objective
print(f"lambda/2 grid {counts}: {receive_power_db(disc.final_objective):.2f} dB")
print(f"classical SVD (calibrated): {receive_power_db(svd_baseline_power(chan, 1.0, 4, calib)):.2f} dB")

# %%
# Denser grids over the same aperture close part of the gap.
for n_side in (9, 17, 33):
    pos, spacing = uniform_antenna_grid(0.5, 0.5, n_side)
    tr = discrete_optimize(ElementChannel(scene, pos, pos), config)
    print(f"{n_side**2:5d} antennas (spacing {spacing:.4f} m): {receive_power_db(tr.final_objective):.2f} dB")

"""
Modulator drift and the impact factor
=====================================

A Mach-Zehnder intensity modulator transmits
``I_out = I_in/2 (1 + cos(phi0 + k V + dtheta))``. An irradiation-induced
phase offset ``dtheta`` shifts the operating point, so the same drive voltage
passes a different fraction of light. The ratio to the unbiased output is the
device's gain factor; cascaded devices multiply.
"""

import numpy as np

from ipa_cvqkd import DeviceSetting, ModulatorConfig, gain_factor, impact_from_devices, transfer_intensity

# A device biased at quadrature (phi0 = pi/2).
cfg = ModulatorConfig(v_pi=4.0, v_bias=1.0)
volts = np.linspace(-4.0, 4.0, 9)
print("drive V   unbiased   drift -0.3 rad")
drifted = ModulatorConfig(v_pi=4.0, v_bias=1.0, delta_theta_pe=-0.3)
for v, a, b in zip(volts, transfer_intensity(cfg, 1.0, volts), transfer_intensity(drifted, 1.0, volts)):
    print(f"{v:7.2f}   {a:8.4f}   {b:8.4f}")

# Gain at the operating point grows as the drift pushes it toward the peak.
print()
for d in (0.0, -0.1, -0.3, -0.6):
    print(f"dtheta = {d:5.2f} rad -> M_i = {gain_factor(ModulatorConfig(4.0, 1.0, d)):.4f}")

# Three devices in series.
stack = [
    DeviceSetting(ModulatorConfig(v_pi=4.0, v_bias=1.0, delta_theta_pe=-0.2, label="AM")),
    DeviceSetting(ModulatorConfig(v_pi=5.0, v_bias=1.5, delta_theta_pe=-0.1, label="IM1")),
    DeviceSetting(ModulatorConfig(v_pi=3.0, v_bias=0.5, delta_theta_pe=-0.05, label="IM2")),
]
impact = impact_from_devices(stack)
print()
print("per-device gains:", ", ".join(f"{m:.4f}" for m in impact.m_per_device))
print(f"impact factor M = {impact.m_total:.4f}")

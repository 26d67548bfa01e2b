"""
Catching the attack by monitoring modulation variance
=====================================================

Diverting a random subset of pulses to a local homodyne lets Alice compare
the variance she emits with the variance she intended. Under no attack the
normalized sample variance follows a scaled chi-square law, which fixes the
alarm threshold for a chosen false-alarm rate.
"""

from ipa_cvqkd import alarm_rate, detection_operating_point, monitor_modulation_variance, sample_monitor_quadratures

v_a = 4.0
n = 10**4
threshold = detection_operating_point(v_a, n, 0.01)
print(f"threshold for 1% false alarms with {n} samples: {threshold:.5f}")

# A single monitoring round under a 1.5x amplification.
x = sample_monitor_quadratures(v_a, 1.5, n, seed=3)
result = monitor_modulation_variance(x, v_a, threshold)
print(f"one round at M = 1.5: m_hat = {result.m_hat:.4f}, alarm = {result.alarm}")

# Detection rate as the attack gets weaker.
print()
print("    M   alarm rate (500 rounds)")
for m in (1.0, 1.01, 1.02, 1.03, 1.05, 1.5):
    print(f"{m:5.2f}   {alarm_rate(v_a, m, n, threshold, 500, seed=7):.3f}")

# Fewer samples need a looser threshold.
print()
for count in (10**2, 10**3, 10**4, 10**5):
    print(f"{count:>7d} samples -> threshold {detection_operating_point(v_a, count, 0.01):.4f}")

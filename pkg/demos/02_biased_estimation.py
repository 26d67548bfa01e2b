"""
How an amplified transmitter fools parameter estimation
=======================================================

Alice keeps records of the displacements she meant to send, but the light
that actually leaves her station carries variance ``M V_A``. Fitting Bob's
data against her records inflates the slope and hides part of the noise:
``T_est = M T`` and ``eps_est = eps / M``. With intercept-resend adding two
shot-noise units, ``M = 21`` brings ``eps = 0.1`` back to ``0.1``.
"""

from ipa_cvqkd import (
    ChannelParams,
    SystemParams,
    estimate_channel,
    fira_excess_noise,
    generate_quadratures,
    mle_fit,
    predicted_bias,
)

params = SystemParams()
chan = ChannelParams(t_chan=0.2, eps=0.05)

print("   M    T_est (sim)  T_est (law)   eps_est (sim)  eps_est (law)")
for m in (1.0, 1.5, 2.0, 3.0):
    batch = generate_quadratures(params, chan, m_total=m, count=10**6, seed=1)
    t_est, eps_est = estimate_channel(mle_fit(batch), params)
    t_law, eps_law = predicted_bias(chan.t_chan, chan.eps, m)
    print(f"{m:5.1f}   {t_est:10.4f}  {t_law:10.4f}   {eps_est:12.4f}  {eps_law:12.4f}")

# A full intercept-resend attack costs 2 SNU, which a large enough M conceals.
actual, seen = fira_excess_noise(0.1, 21)
print()
print(f"intercept-resend: actual excess noise {actual:.2f} SNU, estimated {seen:.4f} SNU")

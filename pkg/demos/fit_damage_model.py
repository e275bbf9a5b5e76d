"""Recover the damage model from observed outcomes.

Training data is a batch of scenarios whose damage flags are visible.
The estimator runs coordinate descent on the Bernoulli log-likelihood,
alternating golden-section line searches over the distance scale and
the per-class susceptibilities.  With enough scenarios the fit lands
close to the generator that produced the data.
"""

import mrsurvey as m

TRUE = m.GenerativeParams()

train = [m.generate_scenario(seed, 12) for seed in range(1, 401)]
fitted = m.fit_estimator(train)

print(f"fit on {len(train)} scenarios, converged={fitted.converged}, "
      f"{len(fitted.ll_history)} sweeps")
print(f"{'parameter':>22} {'true':>8} {'fitted':>8}")
print(f"{'sigma':>22} {TRUE.sigma:>8.2f} {fitted.sigma_hat:>8.2f}")
for cls in sorted(TRUE.susceptibility):
    print(f"{'susceptibility ' + cls:>22} {TRUE.susceptibility[cls]:>8.2f} "
          f"{fitted.susceptibility_hat[cls]:>8.2f}")

# The sweep history is monotone: each line search can only improve.
ll = fitted.ll_history
print(f"\nlog-likelihood: {ll[0]:.2f} after sweep 1, {ll[-1]:.2f} at stop")
assert all(b >= a for a, b in zip(ll, ll[1:]))

# Calibration on held-out worlds: bucket predictions by decile and
# compare the predicted mean against the observed damage rate.
holdout = [m.generate_scenario(seed, 50) for seed in range(5000, 5080)]
buckets = [[0, 0.0, 0] for _ in range(10)]
for scen in holdout:
    probs = m.predict(fitted, scen)
    for poi in scen.pois:
        p = probs[poi.id]
        b = min(int(p * 10), 9)
        buckets[b][0] += 1
        buckets[b][1] += p
        buckets[b][2] += poi.damaged

print(f"\ncalibration on {sum(b[0] for b in buckets)} held-out PoIs:")
print(f"{'decile':>10} {'n':>6} {'predicted':>10} {'observed':>9}")
for i, (n, psum, dmg) in enumerate(buckets):
    if n == 0:
        continue
    print(f"{i / 10:>6.1f}-{(i + 1) / 10:.1f} {n:>6} {psum / n:>10.3f} "
          f"{dmg / n:>9.3f}")

# Planners consume likelihoods clamped away from 0 and 1, so a sure
# miss still costs nothing and a sure hit cannot freeze the search.
raw = m.predict(fitted, holdout[0])
safe = m.clamp_for_planner(raw)
print(f"\nclamped {len(raw)} likelihoods into "
      f"[{min(safe.values()):.2e}, {max(safe.values()):.6f}]")

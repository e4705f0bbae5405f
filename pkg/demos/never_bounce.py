"""Pure re-sampling against bouncing on the never-bounce gadget."""

from failover import never_bounce_report

for k in (3, 4, 5):
    rep = never_bounce_report(k, trials=4000, seed=3)
    print(f"k={k}: pure re-sample {rep['pure']['mean_switches']:6.2f}  "
          f"bounced {rep['bounced']['mean_switches']:5.2f}  (k-1)^2 = {rep['target']}")

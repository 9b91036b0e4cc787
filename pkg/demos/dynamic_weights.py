"""How the dynamic per-category weights behave.

The combined fairness loss is a weighted mean of per-category losses. Each
weight reacts to the category's loss trend between rounds:

    first round          weight = 1
    loss rose            weight = 1 + current/previous   (> 2)
    loss fell or equal   weight = 1 - previous/current   (<= 0)

so categories that are getting worse dominate the next update while
categories that improved are discounted (negative weights are the
as-written rule; a clamp flag floors them at zero).

Run:  python demos/dynamic_weights.py
"""

import numpy as np

from fairadapter import SynthConfig, TrainConfig, lambda_weight, synth_generate
from fairadapter.training import train

# -- 1. the rule on bare numbers ---------------------------------------------
print("weight table (current loss vs previous loss)")
print(f"{'current':>8s} {'previous':>9s} {'weight':>8s}")
for cur, prev in [(2.0, 1.0), (1.2, 1.0), (1.0, 1.0), (0.8, 1.0), (0.2, 1.0)]:
    print(f"{cur:8.2f} {prev:9.2f} {lambda_weight(cur, prev):8.3f}")
print(f"{'0.70':>8s} {'(none)':>9s} {lambda_weight(0.7, None):8.3f}   <- first round")
print(f"clamped 0.2 vs 1.0: {lambda_weight(0.2, 1.0, clamp=True):.3f}")
print(f"flipped falling branch 0.2 vs 1.0: {lambda_weight(0.2, 1.0, flip_falling=True):.3f}")

# -- 2. the weights during a real run -----------------------------------------
# The last category carries only 40% of the fake shift, so it is harder and
# its loss decays more slowly; watch it attract larger weights on average.
dataset = synth_generate(SynthConfig(
    n_categories=4, per_category_real=40, per_category_fake=40, dim=32,
    noise_sigma=0.15, skew=(1.0, 1.0, 1.0, 0.4), seed=7))
_, history = train(dataset, TrainConfig(epochs=10, seed=7))

cats = sorted(history.rounds[0].lambdas)
print(f"\nper-category losses and weights over {len(history)} rounds")
print(f"{'round':>5s}  " + "  ".join(f"{c:>16s}" for c in cats))
for rec in history.rounds[:: len(history) // 10 or 1]:
    cells = [f"L={rec.losses[c]:6.3f} w={rec.lambdas[c]:+6.2f}" for c in cats]
    print(f"{rec.round:5d}  " + "  ".join(cells))

mean_w = {c: float(np.mean([rec.lambdas[c] for rec in history.rounds[1:]])) for c in cats}
mean_l = {c: float(np.mean([rec.losses[c] for rec in history.rounds[1:]])) for c in cats}
boosted = {c: float(np.mean([rec.lambdas[c] > 2 for rec in history.rounds[1:]])) for c in cats}
print("\naverages after the first round:")
for c in cats:
    print(f"  {c}: mean loss {mean_l[c]:.4f}, mean weight {mean_w[c]:+.4f}, "
          f"boosted in {boosted[c]:.0%} of rounds")
print("\neach weight swings between > 2 (loss rose) and <= 0 (loss fell); the "
      "hardest category (last one) keeps the highest mean loss, so its "
      "boosted rounds carry the largest loss terms into the weighted mean")

"""End-to-end walkthrough on synthetic embeddings.

Generates a labeled embedding set with a shared fake direction, splits it,
trains the two-adapter model, and prints the evaluation report. Everything
is seeded, so the numbers below reproduce exactly.

Run:  python demos/quickstart_synthetic.py
"""

import tempfile
from pathlib import Path

from fairadapter import (
    SynthConfig,
    TrainConfig,
    evaluate_report,
    read_embedding_set,
    split_set,
    synth_generate,
    write_checkpoint,
    write_embedding_set,
    write_report,
)
from fairadapter.training import train

# -- 1. synthesize a desk-scale dataset ------------------------------------
# Four content categories. Real vectors cluster around per-category means;
# fake vectors sit one unit further along a direction shared by every
# category, which is the trace the detector is supposed to find.
cfg = SynthConfig(n_categories=4, per_category_real=60, per_category_fake=60,
                  dim=32, shared_fake_shift=1.0, nuisance_scale=1.0,
                  noise_sigma=0.2, seed=42)
dataset = synth_generate(cfg)
print(f"generated {len(dataset)} embeddings, {len(dataset.categories)} categories, dim {dataset.dim}")

# -- 2. round-trip through the file format ----------------------------------
workdir = Path(tempfile.mkdtemp(prefix="fairadapter-demo-"))
data_path = workdir / "synthetic.jsonl"
write_embedding_set(dataset, data_path)
dataset = read_embedding_set(data_path)
print(f"wrote and re-read {data_path}")

# -- 3. split and train ------------------------------------------------------
train_split, test_split = split_set(dataset, test_fraction=0.3, seed=42)
print(f"train {len(train_split)} / test {len(test_split)}")

train_cfg = TrainConfig(epochs=20, seed=42)
model, history = train(train_split, train_cfg)
print(f"trained {len(history)} rounds; "
      f"classification loss {history.rounds[0].l_c:.4f} -> {history.rounds[-1].l_c:.4f}")

# -- 4. evaluate -------------------------------------------------------------
report = evaluate_report(model, test_split, threshold=train_cfg.threshold)
print()
print(f"{'category':10s} {'n':>4s} {'auc':>7s} {'fpr':>6s} {'acc':>6s}")
for cat, stats in report.per_category.items():
    print(f"{cat:10s} {stats.count:4d} {stats.auc:7.4f} {stats.fpr:6.3f} {stats.accuracy:6.3f}")
print()
print(f"mean per-category AUC : {report.mean_category_auc:.4f}")
print(f"pooled AUC            : {report.pooled_auc:.4f}")
print(f"overall FPR           : {report.overall_fpr:.4f}")
print(f"FPR disparity (f_fpr) : {report.f_fpr:.4f}")
print(f"accuracy gap  (f_auc) : {report.f_auc:.4f}")

# -- 5. persist the artifacts -------------------------------------------------
write_checkpoint(model, workdir / "model.jsonl")
write_report(report, workdir / "report.json")
print(f"\ncheckpoint and report saved under {workdir}")

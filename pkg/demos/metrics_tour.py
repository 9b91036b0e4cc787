"""The evaluation metrics on tiny hand-checkable inputs.

Run:  python demos/metrics_tour.py
"""

from fairadapter import PredictionRecord, auc_rank, f_auc, f_fpr, fpr
from fairadapter.metrics import auc_gap


def rec(category, true_label, score):
    return PredictionRecord(f"{category}/{true_label}/{score}", category,
                            true_label, score, int(score >= 0.5))


# -- rank AUC ----------------------------------------------------------------
# probability that a random fake outscores a random real; ties count half
print("auc_rank([0.1, 0.2] real, [0.8, 0.9] fake) =", auc_rank([0.1, 0.2], [0.8, 0.9]))
print("auc_rank with every score 0.5            =", auc_rank([0.5, 0.5], [0.5, 0.5]))
# 4 pairs, fake wins 3: 0.4>0.2, 0.8>0.2, 0.8>0.6; loses 0.4<0.6
print("auc_rank([0.2, 0.6], [0.4, 0.8])          =", auc_rank([0.2, 0.6], [0.4, 0.8]))

# -- false positive rate -------------------------------------------------------
records = [rec("horse", 0, 0.9), rec("horse", 0, 0.2)]
print("\nfpr on one flagged natural of two         =", fpr(records))

# -- FPR disparity --------------------------------------------------------------
# horses: FPR 1/2, cars: FPR 0, overall: 1/4 -> |1/2-1/4| + |0-1/4| = 1/2
records = [
    rec("horse", 0, 0.9), rec("horse", 0, 0.2),
    rec("car", 0, 0.1), rec("car", 0, 0.3),
]
print("f_fpr with unequal groups                  =", f_fpr(records))
records_fair = [rec("horse", 0, 0.2), rec("car", 0, 0.3)]
print("f_fpr when every group behaves the same    =", f_fpr(records_fair))

# -- accuracy gap (reported as f_auc) -------------------------------------------
# horses all correct, cars 1 of 2 correct -> gap 0.5
records = [
    rec("horse", 1, 0.9), rec("horse", 0, 0.1),
    rec("car", 1, 0.8), rec("car", 1, 0.2),
]
print("f_auc (accuracy gap) horses 1.0 vs cars 0.5 =", f_auc(records))

# -- rank-AUC gap (auxiliary variant) --------------------------------------------
records = [
    rec("horse", 0, 0.1), rec("horse", 1, 0.9),   # auc 1.0
    rec("car", 0, 0.6), rec("car", 1, 0.4),       # auc 0.0
]
print("auc_gap across groups                      =", auc_gap(records))

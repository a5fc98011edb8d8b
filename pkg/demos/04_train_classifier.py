"""Train and cross-validate the dance-style classifier end to end.

Builds a small synthetic corpus, extracts windowed descriptors, runs
grouped stratified 3-fold cross-validation (no recording straddles folds)
and prints a per-style precision/recall/F1 table.  Run:

    python3 demos/04_train_classifier.py     (about a minute)
"""

import numpy as np

from lmakit import (
    FEATURE_NAMES,
    Dataset,
    ForestParams,
    LmaConfig,
    WindowConfig,
    assemble_features,
    default_styles,
    generate_corpus,
    metrics,
    predict,
    stratified_group_kfold,
    train,
)


def main():
    seqs = generate_corpus(default_styles(), per_style=3, duration=6.0, master_seed=42)
    cfg = LmaConfig(window=WindowConfig(w=55, stride=10))
    rows = []
    for seq in seqs:
        rows.extend(assemble_features(seq, cfg=cfg))
    X = np.stack([r.values for r in rows])
    data = Dataset.from_labels(
        X, [r.label for r in rows], [r.group_id for r in rows], FEATURE_NAMES
    )
    print(f"{len(seqs)} recordings -> {X.shape[0]} windows x {X.shape[1]} features")

    params = ForestParams(n_trees=20, max_depth=12, seed=42)
    folds = stratified_group_kfold(data.y, data.groups, k=3, seed=42)
    y_true, y_pred = [], []
    for tr, te in folds:
        sub = Dataset(data.X[tr], data.y[tr], tuple(data.groups[i] for i in tr),
                      data.feature_names, data.class_names)
        model = train(sub, params, n_threads=4)
        y_true.extend(data.y[te].tolist())
        y_pred.extend(predict(model, data.X[te]).tolist())

    rep = metrics(np.array(y_true), np.array(y_pred), data.class_names)
    print(f"\n{'style':12s} {'prec':>6s} {'rec':>6s} {'f1':>6s}")
    for name in data.class_names:
        m = rep["per_class"][name]
        print(f"{name:12s} {m['precision']:6.3f} {m['recall']:6.3f} {m['f1']:6.3f}")
    print(f"{'macro':12s} {rep['macro']['precision']:6.3f} "
          f"{rep['macro']['recall']:6.3f} {rep['macro']['f1']:6.3f}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Train gradient-boosted classifiers and export them in the cspmv model schema.

  export_models.py synthetic OUT_MODELS OUT_HELDOUT
      Rule-labelled synthetic feature rows; writes the five models plus a
      1000-row held-out dump per model (features and the predicted label).

  export_models.py csv DATASET_DIR OUT_MODELS
      Trains from the CSVs written by `cspmv dataset`.

Features are rounded to float32 before training, so thresholds compare the
same way in the C++ evaluator as inside sklearn.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np
from sklearn.ensemble import GradientBoostingClassifier

FEATURES = ["nrows", "ncols", "nnz", "density", "mean", "sd", "cov", "max", "min",
            "maxavg", "distavg", "clusteravg", "fill", "ndiag", "diagfill"]
MODELS = ["FORMAT", "COO-LIB", "CSR-LIB", "ELL-LIB", "CSR-TPV"]
SEED = 7


def export_tree(tree, scale, offset):
    t = tree.tree_
    nodes = []
    for i in range(t.node_count):
        if t.children_left[i] == -1:
            nodes.append({"leaf": float(offset + scale * t.value[i][0][0])})
        else:
            nodes.append({"feature": int(t.feature[i]), "threshold": float(t.threshold[i]),
                          "left": int(t.children_left[i]), "right": int(t.children_right[i])})
    return {"nodes": nodes}


def export(model):
    """Raw scores as per-class tree lists. The init score is folded into the
    first tree so the summation order matches sklearn's."""
    classes = [str(c) for c in model.classes_]
    init = model._raw_predict_init(np.zeros((1, len(FEATURES)), dtype=np.float32))[0]
    lr = model.learning_rate
    k = model.estimators_.shape[1]
    per_class = [[export_tree(model.estimators_[s, c], lr, init[c] if s == 0 else 0.0)
                  for s in range(model.estimators_.shape[0])] for c in range(k)]
    if k == 1:
        # sklearn picks classes_[1] when raw >= 0; put it first so the
        # lowest-index tie rule agrees at exactly zero.
        classes = [classes[1], classes[0]]
        per_class = [per_class[0], [{"nodes": [{"leaf": 0.0}]}]]
    return {"schema_version": 1, "feature_names": FEATURES, "classes": classes,
            "trees": per_class}


def constant_model(label):
    return {"schema_version": 1, "feature_names": FEATURES, "classes": [label],
            "trees": [[{"nodes": [{"leaf": 0.0}]}]]}


def fit(x, y):
    model = GradientBoostingClassifier(n_estimators=40, max_depth=3, learning_rate=0.2,
                                       random_state=SEED)
    model.fit(x, y)
    return model


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
        f.write("\n")


def write_rows(path, x, labels):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(FEATURES + ["label"])
        for row, label in zip(x, labels):
            w.writerow([repr(float(v)) for v in row] + [label])


def synthetic_features(rng, n):
    nrows = rng.integers(100, 200000, n).astype(np.float64)
    ncols = np.where(rng.random(n) < 0.8, nrows, rng.integers(100, 200000, n))
    mean = np.exp(rng.uniform(0.0, 4.5, n))
    nnz = np.floor(nrows * mean)
    sd = mean * rng.uniform(0.0, 2.0, n)
    mx = mean + sd * rng.uniform(0.0, 20.0, n)
    mn = np.maximum(0.0, mean - sd * rng.uniform(0.0, 2.0, n))
    ndiag = np.minimum(np.exp(rng.uniform(0.0, 11.0, n)), nrows + ncols - 1)
    x = np.column_stack([
        nrows, ncols, nnz, nnz / (nrows * ncols), mean, sd, sd / mean, mx, mn, mx - mean,
        mean * rng.uniform(1.0, 50.0, n), mean * rng.uniform(0.05, 1.0, n), nrows * mx / nnz,
        ndiag, nrows * ndiag / nnz])
    return x.astype(np.float32).astype(np.float64)


def synthetic_labels(x):
    col = {name: x[:, i] for i, name in enumerate(FEATURES)}
    fmt = np.where((col["ndiag"] <= 32) & (col["diagfill"] <= 1.5), "DIA",
          np.where(col["cov"] < 0.3, "ELL",
          np.where(col["maxavg"] > 15 * col["mean"], "HYB",
          np.where(col["mean"] < 3, "COO", "CSR"))))
    coo = np.where(col["cov"] > 1.0, "LibB", "LibA")
    csr = np.where(col["mean"] > 40, "LibA", np.where(col["cov"] > 1.2, "LibC", "LibB"))
    ell = np.where(col["nrows"] > 50000, "LibC", "LibA")
    lanes = np.array([2, 4, 8, 16, 32])
    tpv = np.array([str(lanes[min(np.searchsorted(lanes, np.floor(m)), 4)])
                    for m in col["mean"]])
    return {"FORMAT": fmt, "COO-LIB": coo, "CSR-LIB": csr, "ELL-LIB": ell, "CSR-TPV": tpv}


def cmd_synthetic(out_models, out_heldout):
    rng = np.random.default_rng(SEED)
    os.makedirs(out_models, exist_ok=True)
    os.makedirs(out_heldout, exist_ok=True)
    x = synthetic_features(rng, 5000)
    labels = synthetic_labels(x)
    train, test = slice(0, 4000), slice(4000, 5000)
    for name in MODELS:
        model = fit(x[train], labels[name][train])
        write_json(os.path.join(out_models, name + ".json"), export(model))
        predicted = model.predict(x[test])
        acc = float(np.mean(predicted == labels[name][test]))
        write_rows(os.path.join(out_heldout, name + ".csv"), x[test], predicted)
        print(f"{name}: held-out accuracy {acc:.3f}")


def read_csv(path):
    rows, labels = [], []
    with open(path) as f:
        lines = [line for line in f if not line.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if header[:15] != FEATURES:
        sys.exit(f"{path}: unexpected header")
    for r in reader:
        rows.append([float(v) for v in r[:15]])
        labels.append(r[15])
    return np.array(rows, dtype=np.float32).astype(np.float64), np.array(labels)


def cmd_csv(dataset_dir, out_models):
    os.makedirs(out_models, exist_ok=True)
    fallback = {"FORMAT": "COO", "COO-LIB": "LibA", "CSR-LIB": "LibA", "ELL-LIB": "LibA",
                "CSR-TPV": "8"}
    for name in MODELS:
        x, y = read_csv(os.path.join(dataset_dir, name + ".csv"))
        classes = sorted(set(y))
        if len(classes) < 2:
            label = classes[0] if classes else fallback[name]
            write_json(os.path.join(out_models, name + ".json"), constant_model(label))
            print(f"{name}: {len(y)} rows, constant '{label}'")
            continue
        model = fit(x, y)
        write_json(os.path.join(out_models, name + ".json"), export(model))
        print(f"{name}: {len(y)} rows, training accuracy {model.score(x, y):.3f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="cmd", required=True)
    s = sub.add_parser("synthetic")
    s.add_argument("out_models")
    s.add_argument("out_heldout")
    c = sub.add_parser("csv")
    c.add_argument("dataset_dir")
    c.add_argument("out_models")
    args = parser.parse_args()
    if args.cmd == "synthetic":
        cmd_synthetic(args.out_models, args.out_heldout)
    else:
        cmd_csv(args.dataset_dir, args.out_models)


if __name__ == "__main__":
    main()

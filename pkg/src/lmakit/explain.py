"""Exact per-prediction attribution for forest models.

`tree_shap` runs the polynomial-time path recursion over each tree, using
node covers (training sample counts) to weight conditional expectations.
`brute_shap` is its exponential-time oracle: the textbook Shapley sum over
all feature subsets, with the same cover-weighted expectation.  Both target
the probability output, so attributions plus the base value reproduce
predict_proba exactly (local accuracy).
"""

from dataclasses import dataclass
from itertools import combinations
from math import factorial

import numpy as np

from .errors import LmaError
from .forest import _leaf_distribution, predict, predict_proba


@dataclass(frozen=True)
class ShapExplanation:
    phi: np.ndarray  # (n_classes, n_features)
    base: np.ndarray  # (n_classes,)
    x: np.ndarray
    class_names: tuple
    feature_names: tuple

    def prediction(self):
        return self.base + self.phi.sum(axis=1)


def _check_covers(node):
    if "cover" not in node:
        raise LmaError("model nodes lack cover counts; retrain with this toolkit")
    if "feature" in node:
        _check_covers(node["left"])
        _check_covers(node["right"])


def _tree_expected_value(node):
    if "feature" not in node:
        return _leaf_distribution(node)
    cl = node["left"]["cover"]
    cr = node["right"]["cover"]
    total = cl + cr
    return (cl * _tree_expected_value(node["left"]) + cr * _tree_expected_value(node["right"])) / total


def _tree_shap_single(tree, x, n_features, n_classes):
    """Path-dependent recursion; phi has shape (n_features, n_classes)."""
    phi = np.zeros((n_features, n_classes))

    def extend(d, z, o, w, pd, pz, po):
        d = d + [pd]
        z = z + [pz]
        o = o + [po]
        w = w + [1.0 if not w else 0.0]
        l = len(w) - 1
        for i in range(l - 1, -1, -1):
            w[i + 1] += po * w[i] * (i + 1) / (l + 1)
            w[i] = pz * w[i] * (l - i) / (l + 1)
        return d, z, o, w

    def unwind(d, z, o, w, i):
        d, z, o, w = list(d), list(z), list(o), list(w)
        l = len(w) - 1
        n = w[l]
        for j in range(l - 1, -1, -1):
            if o[i] != 0.0:
                t = w[j]
                w[j] = n * (l + 1) / ((j + 1) * o[i])
                n = t - w[j] * z[i] * (l - j) / (l + 1)
            else:
                w[j] = w[j] * (l + 1) / (z[i] * (l - j))
        del d[i], z[i], o[i]
        w.pop()
        return d, z, o, w

    def unwound_sum(z, o, w, i):
        l = len(w) - 1
        total = 0.0
        n = w[l]
        for j in range(l - 1, -1, -1):
            if o[i] != 0.0:
                t = n * (l + 1) / ((j + 1) * o[i])
                total += t
                n = w[j] - t * z[i] * (l - j) / (l + 1)
            else:
                total += w[j] * (l + 1) / (z[i] * (l - j))
        return total

    def recurse(node, d, z, o, w, pz, po, pd):
        d, z, o, w = extend(d, z, o, w, pd, pz, po)
        if "feature" not in node:
            v = _leaf_distribution(node)
            for i in range(1, len(d)):
                s = unwound_sum(z, o, w, i)
                phi[d[i]] += s * (o[i] - z[i]) * v
            return
        f = node["feature"]
        if x[f] <= node["threshold"]:
            hot, cold = node["left"], node["right"]
        else:
            hot, cold = node["right"], node["left"]
        iz = io = 1.0
        k = next((i for i in range(1, len(d)) if d[i] == f), None)
        if k is not None:
            iz, io = z[k], o[k]
            d, z, o, w = unwind(d, z, o, w, k)
        cover = node["cover"]
        recurse(hot, d, z, o, w, iz * hot["cover"] / cover, io, f)
        recurse(cold, d, z, o, w, iz * cold["cover"] / cover, 0.0, f)

    recurse(tree, [], [], [], [], 1.0, 1.0, -1)
    return phi


def tree_shap(model, x):
    """Exact attribution of predict_proba(x) across the 55 features."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise LmaError(f"expected a {model.n_features}-vector")
    if not np.all(np.isfinite(x)):
        raise LmaError("non-finite input to tree_shap")
    for t in model.trees:
        _check_covers(t)
    phi = np.zeros((model.n_features, model.n_classes))
    base = np.zeros(model.n_classes)
    for tree in model.trees:
        phi += _tree_shap_single(tree, x, model.n_features, model.n_classes)
        base += _tree_expected_value(tree)
    n = len(model.trees)
    return ShapExplanation(
        phi=(phi / n).T,
        base=base / n,
        x=x,
        class_names=model.class_names,
        feature_names=model.feature_names,
    )


def _cond_exp(node, x, subset):
    """Cover-weighted conditional expectation given the features in `subset`."""
    if "feature" not in node:
        return _leaf_distribution(node)
    f = node["feature"]
    if f in subset:
        child = node["left"] if x[f] <= node["threshold"] else node["right"]
        return _cond_exp(child, x, subset)
    cl = node["left"]["cover"]
    cr = node["right"]["cover"]
    return (
        cl * _cond_exp(node["left"], x, subset) + cr * _cond_exp(node["right"], x, subset)
    ) / (cl + cr)


def _used_in_tree(node, acc):
    if "feature" in node:
        acc.add(node["feature"])
        _used_in_tree(node["left"], acc)
        _used_in_tree(node["right"], acc)


def brute_shap(model, x, max_features=12):
    """Exhaustive-subset Shapley values; the oracle for tree_shap.

    Only valid for models whose trees use at most `max_features` distinct
    split features (2^m subsets per tree).
    """
    x = np.asarray(x, dtype=float)
    used_all = model.used_features()
    if len(used_all) > max_features:
        raise LmaError(
            f"brute_shap limited to {max_features} distinct features, model uses {len(used_all)}"
        )
    phi = np.zeros((model.n_features, model.n_classes))
    for tree in model.trees:
        used = set()
        _used_in_tree(tree, used)
        used = sorted(used)
        m = len(used)
        if m == 0:
            continue
        cache = {}

        def v(subset):
            key = frozenset(subset)
            if key not in cache:
                cache[key] = _cond_exp(tree, x, key)
            return cache[key]

        for i in used:
            rest = [f for f in used if f != i]
            for size in range(m):
                wgt = factorial(size) * factorial(m - size - 1) / factorial(m)
                for S in combinations(rest, size):
                    phi[i] += wgt * (v(set(S) | {i}) - v(set(S)))
    return (phi / len(model.trees)).T


def permutation_importance(model, data, n_repeats=5, seed=0):
    """Accuracy drop when one feature column is shuffled; seeded, repeated.

    Returns (mean_importance, std_importance), each length n_features.
    """
    if data.X.shape[0] == 0:
        raise LmaError("empty dataset")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    baseline = float(np.mean(predict(model, data.X) == data.y))
    n = data.X.shape[0]
    means = np.zeros(model.n_features)
    stds = np.zeros(model.n_features)
    for f in range(model.n_features):
        drops = []
        for _ in range(n_repeats):
            perm = rng.permutation(n)
            Xp = data.X.copy()
            Xp[:, f] = Xp[perm, f]
            acc = float(np.mean(predict(model, Xp) == data.y))
            drops.append(baseline - acc)
        means[f] = float(np.mean(drops))
        stds[f] = float(np.std(drops))
    return means, stds


def summary_rank(explanations):
    """Features ranked by mean |phi| across instances and classes."""
    if not explanations:
        raise LmaError("no explanations to summarize")
    names = explanations[0].feature_names
    for e in explanations:
        if e.feature_names != names or e.class_names != explanations[0].class_names:
            raise LmaError("explanations disagree on schema")
    stacked = np.stack([np.abs(e.phi) for e in explanations])  # (N, C, F)
    mean_abs = stacked.mean(axis=(0, 1))
    order = np.lexsort((np.arange(len(names)), -mean_abs))
    return [(int(i), names[i], float(mean_abs[i])) for i in order]


def write_explanations_csv(explanations, path, instance_ids=None):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["instance", "class", "feature", "phi", "base"])
        for n, e in enumerate(explanations):
            iid = instance_ids[n] if instance_ids else n
            for c, cname in enumerate(e.class_names):
                for f, fname in enumerate(e.feature_names):
                    writer.writerow(
                        [iid, cname, fname, f"{e.phi[c, f]:.9g}", f"{e.base[c]:.9g}"]
                    )


def write_summary_csv(ranking, path):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "mean_abs_phi", "rank"])
        for rank, (_, name, value) in enumerate(ranking, start=1):
            writer.writerow([name, f"{value:.9g}", rank])

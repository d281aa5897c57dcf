#!/usr/bin/env python3
"""
Example usage of the ltrexplain library
"""

import ltrexplain
from ltrexplain.trees import TreeParams


def explain_one_document():
    """Train a small tree on synthetic data and explain one test document"""

    print("Generating synthetic LETOR splits...")
    train, valid, test = ltrexplain.synth_splits(0, 20, 10, 6)
    print(f"   train {train}")
    print(f"   test  {test}")

    params, mse = ltrexplain.random_search_tree(train, valid, 20, 0)
    print(f"\nBest tree parameters {params} (validation MSE {mse:.4f})")
    model = ltrexplain.fit_model('decision_tree', train, params)

    stats = ltrexplain.compute_feature_stats(train)
    instance = test[0]
    cfg = ltrexplain.ExplainerConfig(num_samples=500)
    lirme = ltrexplain.lirme_explain(model, instance.features, stats, cfg,
                                     instance.qid, instance.docid)
    impurity = ltrexplain.impurity_attribution(model, instance.features)

    print(f"\nqid {instance.qid} docid {instance.docid}")
    print(f"   LIRME weights     {lirme.weights.round(4)}")
    print(f"   impurity scores   {impurity.scores.round(4)}")
    rho = ltrexplain.spearman(lirme.weights, impurity.scores)
    if rho.defined:
        print(f"   spearman          {rho.value:.4f}")
    else:
        print("   spearman          undefined")


def evaluate_fixed_tree():
    """Run the whole evaluation for a depth-4 tree and print the summary"""

    train, valid, test = ltrexplain.synth_splits(1, 10, 10, 6)
    model = ltrexplain.fit_model('decision_tree', train, TreeParams(4))
    cfg = ltrexplain.EvalConfig(
        train=None, valid=None, test=None, synth_queries=10, synth_docs=10,
        synth_features=6, model_kind='decision_tree', search_trials=1,
        fixed_params=TreeParams(4),
        explainer=ltrexplain.ExplainerConfig(num_samples=300),
        metrics=['spearman', 'euclidean', 'topk_auc'], auc_k=5,
        k_values=[1, 5, 10], seed=1, workers=1, out=None, audit=False)

    result = ltrexplain.evaluate_explanations(
        model, test, ltrexplain.compute_feature_stats(train), cfg)
    print(f"\n{len(result.rows)} explanations, {len(result.skips)} skipped")
    print(ltrexplain.aggregate(result.records).to_string(index=False))


if __name__ == "__main__":
    print("ltrexplain example")
    print("=" * 40)

    explain_one_document()
    evaluate_fixed_tree()

    print("\nDone.")

from ltrexplain.letor import (Dataset,
                              Instance,
                              QueryGroup,
                              FeatureStats,
                              LetorParseError,
                              MQ2008_FEATURE_NAMES,
                              parse_letor,
                              format_letor,
                              load_letor,
                              split_queries,
                              compute_feature_stats,
                              quartile_index,
                              synth_dataset)

from ltrexplain.trees import (TreeNode,
                              TreeParams,
                              LambdaMartParams,
                              RegressionTree,
                              BoostedEnsemble,
                              fit_regression_tree,
                              tree_predict,
                              decision_path,
                              fit_lambdamart,
                              ensemble_predict,
                              ndcg,
                              lambda_gradients,
                              mean_ndcg,
                              save_model,
                              load_model)

from ltrexplain.ground_truth import (Attribution,
                                     impurity_attribution,
                                     frequency_attribution,
                                     ensemble_attribution,
                                     attribution,
                                     path_depth)

from ltrexplain.surrogates import (SurrogateFit,
                                   fit_weighted_lasso,
                                   fit_weighted_linear_svr)

from ltrexplain.explainers import (ExplainerConfig,
                                   Explanation,
                                   ExplanationError,
                                   kernel_weight,
                                   lirme_sample,
                                   exs_sample,
                                   exs_transform,
                                   lirme_explain,
                                   exs_explain)

from ltrexplain.metrics import (SimilarityResult,
                                spearman,
                                euclidean_similarity,
                                topk_auc,
                                similarity)

from ltrexplain.experiment import (EvalRecord,
                                   ExplanationRow,
                                   synth_splits,
                                   fit_model,
                                   random_search_tree,
                                   random_search_lambdamart,
                                   evaluate_explanations)

from ltrexplain.report import (aggregate,
                               sweep_k,
                               depth_buckets,
                               write_outputs,
                               read_explanations,
                               read_records,
                               directional_check)

from ltrexplain.config import EvalConfig

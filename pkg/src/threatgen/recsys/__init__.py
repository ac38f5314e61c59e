from .cf import (
    EPSILON,
    UserBasedCF,
    predict_for_users,
    predict_from_similarity,
    predict_ratings,
    top_n_items,
    user_similarity,
    validate_ratings_matrix,
)
from .models import RsDiscriminator, RsGenerator, injection_objective
from .attacks import (
    AttackProfileBatch,
    RecommenderConfig,
    baseline_attack,
    evaluate_attack,
    top_decile_items,
)
from .data import (
    SyntheticRatingsConfig,
    export_profiles,
    load_movie_index,
    load_movielens,
    pick_target_item,
    save_movie_index,
    synthetic_ratings,
)
from .defense import retrain_and_auc
from .training import group_injection_objective, train_recsys

__all__ = [
    "EPSILON",
    "UserBasedCF", "predict_for_users", "predict_from_similarity", "predict_ratings",
    "top_n_items", "user_similarity", "validate_ratings_matrix",
    "RsDiscriminator", "RsGenerator", "injection_objective",
    "AttackProfileBatch", "RecommenderConfig", "baseline_attack", "evaluate_attack",
    "top_decile_items",
    "SyntheticRatingsConfig", "export_profiles", "load_movie_index", "load_movielens",
    "pick_target_item", "save_movie_index", "synthetic_ratings",
    "retrain_and_auc",
    "group_injection_objective", "train_recsys",
]

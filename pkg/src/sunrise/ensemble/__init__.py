"""Ensemble learning: weighted backups, bootstrap masks, UCB and random inference."""

from .agent import EnsembleAgent, UpdateReport, ensemble_q_stats, weighted_critic_step
from .select import (eval_action, member_action, random_inference_select, ucb_argmax,
                     ucb_select_continuous, ucb_select_discrete)
from .weights import QStats, WeightScheme, confidence_weight, q_stats, random_weights

__all__ = [
    "EnsembleAgent", "QStats", "UpdateReport", "WeightScheme", "confidence_weight",
    "ensemble_q_stats", "eval_action", "member_action", "q_stats", "random_inference_select",
    "random_weights", "ucb_argmax", "ucb_select_continuous", "ucb_select_discrete",
    "weighted_critic_step",
]

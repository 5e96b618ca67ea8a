"""Single-agent losses and target maintenance for SAC and DQN."""

from .common import target_sync
from .dqn import DqnAgent, DqnSettings, dqn_loss, dqn_target, dqn_update
from .sac import (SacAgent, SacSettings, actor_objective, alpha_update, sac_actor_loss,
                  sac_critic_loss, sac_update, soft_target)

__all__ = [
    "DqnAgent", "DqnSettings", "SacAgent", "SacSettings", "actor_objective", "alpha_update",
    "dqn_loss", "dqn_target", "dqn_update", "sac_actor_loss", "sac_critic_loss", "sac_update",
    "soft_target", "target_sync",
]

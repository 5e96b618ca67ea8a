"""Named, independent random streams derived from one integer seed."""

import numpy as np

STREAMS = {
    "agents": 0, "env": 1, "eval_env": 2, "masks": 3, "buffer": 4, "weights": 5,
    "episode": 6, "reward_noise": 7, "explore": 8, "data": 9,
}


def stream_seed(seed: int, name: str) -> np.random.SeedSequence:
    try:
        key = STREAMS[name]
    except KeyError:
        raise KeyError(f"unknown random stream {name!r}") from None
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(key,))


def stream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, name))


def member_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """One generator per ensemble member; member 0 matches a lone agent's generator."""
    return [np.random.default_rng(s) for s in stream_seed(seed, "agents").spawn(n)]

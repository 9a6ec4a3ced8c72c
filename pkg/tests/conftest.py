import numpy as np
import pytest

from sgnav.grid import GridMap, random_map
from sgnav.lspi import LspiConfig, lspi_train, oa_basis, sa_basis
from sgnav.mdp import OA, SA, RewardParams, collect_samples

SA_TRAIN_SEED = 42
OA_MAP_SEED = 1000
OA_SAMPLE_SEED = 2000
SA_SAMPLES = 20000
OA_SAMPLES = 20000


def train_sa_policy(seed=SA_TRAIN_SEED, n=SA_SAMPLES):
    empty = GridMap(np.zeros((50, 50), dtype=bool))
    cfg = RewardParams()
    samples = collect_samples(SA, empty, n, seed=seed, reward_cfg=cfg)
    policy, iters = lspi_train(samples, sa_basis(d_max=cfg.d_norm), LspiConfig())
    return policy, iters


def train_oa_policy(map_seed=OA_MAP_SEED, sample_seed=OA_SAMPLE_SEED, n=OA_SAMPLES):
    train_map = random_map(50, 50, 0.05, seed=map_seed)
    samples = collect_samples(OA, train_map, n, seed=sample_seed,
                              oa_reward="concise", use_switch_penalty=True)
    policy, iters = lspi_train(samples, oa_basis(), LspiConfig())
    return policy, iters


@pytest.fixture(scope="session")
def sa_policy():
    return train_sa_policy()[0]


@pytest.fixture(scope="session")
def oa_policy():
    return train_oa_policy()[0]

"""Session-scoped simulation runs shared between module tests and the
acceptance suite (the long runs are executed once)."""

import numpy as np
import pytest

from gumbel_waves.qmm import QmmConfig, qmm_run
from gumbel_waves.sfmm import SfmmConfig, run_sfmm
from gumbel_waves.tails import TypeI

QMM_HORIZON = 10**5
QMM_SNAPSHOT_TIMES = (10**3, 10**4, 25_000, 10**5)


@pytest.fixture(scope="session")
def qmm_runs():
    """Frequency-recursion runs at default parameters for alpha in 1..3."""
    series = sorted(
        set(np.unique(np.logspace(2, 5, 45).astype(int)).tolist())
        | {10**3, 10**4, 10**5}
    )
    out = {}
    for alpha in (1.0, 2.0, 3.0):
        cfg = QmmConfig(alpha=alpha, horizon=QMM_HORIZON)
        out[alpha] = qmm_run(cfg, record_times=QMM_SNAPSHOT_TIMES, series_times=series)
    return out


SFMM_HORIZON = 10**5
SFMM_REPLICAS = 32


@pytest.fixture(scope="session")
def sfmm_ensemble():
    """32 replica runs of the semi-deterministic model (n=1, alpha=2)."""
    results = []
    for rep in range(SFMM_REPLICAS):
        cfg = SfmmConfig(TypeI(1, 2.0), beta=0.1, horizon=SFMM_HORIZON, seed=9000 + rep)
        results.append(run_sfmm(cfg, record_times=(10**3, 10**4, 10**5)))
    return results

"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from manoplace import (
    DelayMatrix,
    ManoParameters,
    PoP,
    ProblemInstance,
    VnfInstance,
)


def make_instance(delays, vnf_locs=(), *, gso=0, nfvo_capacity=20,
                  vnfm_capacity=10, gso_nfvo_bound=80.0, nfvo_vim_bound=60.0,
                  vnfm_bound=30.0, nfvo_vnfm_bound=45.0, vnf_bounds=None):
    """Build an instance from a raw delay matrix and VNF locations.

    ``vnf_bounds`` optionally gives per-VNF (vnfm_bound, nfvo_vnfm_bound)
    pairs; otherwise every VNF uses the shared bounds.
    """
    n = len(delays)
    pops = tuple(PoP(i) for i in range(n))
    matrix = DelayMatrix.from_array(np.asarray(delays, dtype=float))
    vnfs = []
    for i, loc in enumerate(vnf_locs):
        if vnf_bounds is not None:
            w, big_w = vnf_bounds[i]
        else:
            w, big_w = vnfm_bound, nfvo_vnfm_bound
        vnfs.append(VnfInstance(id=i, location=loc, vnfm_delay_bound=w,
                                nfvo_vnfm_delay_bound=big_w))
    params = ManoParameters(nfvo_capacity=nfvo_capacity,
                            vnfm_capacity=vnfm_capacity,
                            gso_nfvo_delay_bound=gso_nfvo_bound,
                            nfvo_vim_delay_bound=nfvo_vim_bound,
                            gso_location=gso)
    return ProblemInstance(pops=pops, delays=matrix, vnfs=tuple(vnfs),
                           params=params)


def symmetric(n, entries, fill=10.0):
    """Dense symmetric matrix from a sparse {(i, j): delay} description."""
    d = np.full((n, n), float(fill))
    np.fill_diagonal(d, 0.0)
    for (i, j), value in entries.items():
        d[i][j] = d[j][i] = float(value)
    return d.tolist()


@pytest.fixture
def line3():
    """Three PoPs on a line: 0 -10ms- 1 -10ms- 2, ends 20ms apart."""
    return make_instance(
        [[0, 10, 20], [10, 0, 10], [20, 10, 0]],
        vnf_locs=(0, 1, 2),
    )


def cluster_instance(per_side, intra=5.0, inter=70.0):
    """Two tight clusters of ``per_side`` PoPs each, one VNF per PoP.

    The member-to-head bound of 60 ms forbids an orchestrator in one
    cluster from heading PoPs in the other, so any feasible plan needs at
    least one orchestrator per cluster; 70 <= 80 keeps both GSO links legal.
    """
    n = 2 * per_side
    d = np.full((n, n), float(inter))
    for i in range(n):
        for j in range(n):
            if (i < per_side) == (j < per_side):
                d[i][j] = float(intra)
        d[i][i] = 0.0
    return make_instance(d.tolist(), vnf_locs=tuple(range(n)))


@pytest.fixture
def four_pop_clusters():
    return cluster_instance(2)


@pytest.fixture
def two_clusters():
    return cluster_instance(3)

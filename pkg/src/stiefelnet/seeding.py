"""Deterministic fan-out of one master seed into all random streams of a run.

The master seed splits into four independent branches (instance data,
topology, shared initial point, node oracles); the node branch splits again
into one stream per node. Every consumer derives its stream through this
module, so results are reproducible regardless of evaluation order.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeedFanout:
    master: int
    instance: np.random.SeedSequence
    topology: np.random.SeedSequence
    init: np.random.SeedSequence
    _nodes_root: np.random.SeedSequence

    def instance_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.instance)

    def topology_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.topology)

    def init_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.init)

    def node_rngs(self, n: int) -> list[np.random.Generator]:
        # Children are addressed by spawn key, not by a spawn counter, so
        # repeated calls hand out identical streams.
        children = [
            np.random.SeedSequence(entropy=self._nodes_root.entropy,
                                   spawn_key=self._nodes_root.spawn_key + (i,))
            for i in range(n)
        ]
        return [np.random.default_rng(s) for s in children]


def fanout(master_seed: int) -> SeedFanout:
    root = np.random.SeedSequence(master_seed)
    instance, topology, init, nodes = (
        np.random.SeedSequence(entropy=root.entropy, spawn_key=(i,)) for i in range(4)
    )
    return SeedFanout(master=master_seed, instance=instance, topology=topology,
                      init=init, _nodes_root=nodes)

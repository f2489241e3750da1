from __future__ import annotations

from typing import List

import numpy as np

# Ids fijos: agregar un stream nuevo al final nunca cambia los existentes.
STREAM_IDS = {
    "channel": 0,
    "pilot_noise": 1,
    "errors": 2,
    "montecarlo": 3,
    "fit": 4,
    "benchmark": 5,
    "threshold_study": 6,
}


class SeedStreams:
    """
    Expande una semilla maestra en substreams con nombre.

    La clave de cada stream es (escenario, id del stream, *índices), así que
    pedir más trials o más UEs no perturba lo que ya se había sorteado.
    """

    def __init__(self, master_seed: int, scenario: int = 0):
        if master_seed < 0:
            raise ValueError(f"La semilla debe ser no negativa: {master_seed}")
        self.master_seed = int(master_seed)
        self.scenario = int(scenario)

    def sequence(self, name: str, *index: int) -> np.random.SeedSequence:
        if name not in STREAM_IDS:
            raise KeyError(f"Stream desconocido: {name}")
        key = (self.scenario, STREAM_IDS[name], *[int(i) for i in index])
        return np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)

    def generator(self, name: str, *index: int) -> np.random.Generator:
        return np.random.default_rng(self.sequence(name, *index))

    def integer(self, name: str, *index: int) -> int:
        return int(self.sequence(name, *index).generate_state(1, dtype=np.uint32)[0])


def scenario_seeds(master_seed: int, count: int) -> List[int]:
    """Semillas por escenario para los barridos (pareadas entre valores del eje)."""
    root = np.random.SeedSequence(int(master_seed))
    return [int(child.generate_state(1, dtype=np.uint32)[0]) for child in root.spawn(count)]

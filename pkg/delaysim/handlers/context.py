"""
State shared by the subcommand handlers of one run
"""
from dataclasses import dataclass
from typing import Any

import numpy as np

from config.run_config import RunConfig
from delaysim.models.presets import ModelPreset


@dataclass
class RunContext:
    config: RunConfig
    preset: ModelPreset
    seed: int
    rng: np.random.Generator
    settings: Any

    @property
    def representation(self) -> str:
        return self.config.output.get('representation', 'spectral')

"""Run configuration. Defaults can be overridden from a `.env` file or the CLI."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace

from dotenv import load_dotenv

GAMMA_MODES = ("practical", "theoretical")
GAMMA_CONVENTIONS = ("sampling", "variation")


@dataclass(frozen=True)
class CutConfig:
    min_fold_len: int = 3
    wl_iterations: int = 3
    gamma_mode: str = "practical"
    gamma_convention: str = "sampling"
    refine_passes: int = 10
    # candidate evaluations per refine() call; large circuits stop early
    refine_budget: int = 20_000
    # cap on nodes per lockstep-grown module instance
    module_size_limit: int = 64
    workers: int = 1
    seed: int = 0
    qft_swaps: bool = False
    epsilon: float = 0.05
    max_exact_cuts: int = 4
    max_sim_qubits: int = 14

    def __post_init__(self) -> None:
        if self.gamma_mode not in GAMMA_MODES:
            raise ValueError(f"gamma_mode must be one of {GAMMA_MODES}")
        if self.gamma_convention not in GAMMA_CONVENTIONS:
            raise ValueError(f"gamma_convention must be one of {GAMMA_CONVENTIONS}")
        if self.min_fold_len < 1:
            raise ValueError("min_fold_len must be >= 1")
        if self.wl_iterations < 1:
            raise ValueError("wl_iterations must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must be in (0, 1)")

    @classmethod
    def from_env(cls, **overrides) -> CutConfig:
        """Read CIFOLD_THREADS / CIFOLD_SEED (after loading `.env`), then apply
        explicit overrides; None-valued overrides are ignored."""
        load_dotenv()
        env: dict[str, object] = {}
        if os.getenv("CIFOLD_THREADS"):
            env["workers"] = int(os.environ["CIFOLD_THREADS"])
        if os.getenv("CIFOLD_SEED"):
            env["seed"] = int(os.environ["CIFOLD_SEED"])
        env.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**env)

    def with_(self, **changes) -> CutConfig:
        return replace(self, **changes)

    def echo(self) -> dict[str, object]:
        """Config fields that affect results (workers excluded: output is
        identical for any worker count)."""
        fields = asdict(self)
        fields.pop("workers")
        return fields

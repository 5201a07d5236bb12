"""Experiment scenarios: discrete single-user sweep, continuous preferences,
two-user similarity sweep, and the four-item demo."""
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings
from modules.codec.baseline import self_decodable_bits
from modules.codec.bitstream import decode, encode
from modules.core.information import entropies, expected_cost
from modules.core.types import CodebookSet, DiscretePreference
from modules.designers.continuous import (
    PreferenceSpec, design_continuous_saa, design_sampling, evaluate_expected_bits,
    evaluation_sample, sample_preference, sample_uniform_simplex,
)
from modules.designers.discrete import design_dca, design_kmeanspp
from modules.designers.options import DesignOptions
from modules.designers.single import GridSearchSpec, exhaustive_search, optimal_single
from modules.designers.twouser import (
    TwoUserBudget, design_twouser_dca, design_twouser_kmeanspp, joint_pref_alpha,
    twouser_self_decodable_bits,
)
from modules.error_handler.errors import ConfigError
from modules.storage.operations import DesignStore
from modules.utils.rng import STREAM_DATA, STREAM_SAMPLE, stream_rng

Scenario = Literal["fig1", "continuous", "fig4", "demo"]

DEMO_SPVS = np.array([
    [0.75, 0.25, 0.0, 0.0],
    [0.25, 0.75, 0.0, 0.0],
    [0.0, 0.0, 0.75, 0.25],
    [0.0, 0.0, 0.25, 0.75],
])
DEMO_PREFERENCES = {
    "Pref 1": [0.5, 0.5, 0.0, 0.0],
    "Pref 2": [0.0, 0.0, 0.5, 0.5],
    "Pref 3": [0.25, 0.25, 0.25, 0.25],
}


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: Scenario
    n_values: list[int] = Field(default_factory=lambda: [3, 4, 5])
    k_values: list[int] = Field(default_factory=lambda: list(range(1, 11)))
    alphas: list[float] = Field(default_factory=lambda: [round(0.1 * i, 10) for i in range(11)])
    budget: tuple[int, int] = (4, 4)
    preferences: list[Literal["uniform", "radial"]] = Field(default_factory=lambda: ["uniform", "radial"])
    methods: list[str] | None = None
    items: int = Field(default_factory=lambda: settings.items, ge=1)
    L: int = Field(default_factory=lambda: settings.symbols_per_item, ge=1)
    sample_size: int = Field(default_factory=lambda: settings.sample_size, ge=1)
    eval_sample_size: int = Field(default_factory=lambda: settings.eval_sample_size, ge=1)
    grid_step: float = Field(default=0.02, gt=0, le=0.5)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    restarts: int = Field(default_factory=lambda: settings.restarts, ge=1)
    twouser_restarts: int = Field(default_factory=lambda: settings.twouser_restarts, ge=1)
    max_iters: int = Field(default_factory=lambda: settings.max_iters, ge=1)
    epsilon: float = Field(default_factory=lambda: settings.epsilon, gt=0)
    jobs: int = Field(default_factory=lambda: settings.jobs, ge=1)
    timing: bool = False
    out: Path | None = None

    @field_validator("n_values", "k_values", "alphas", "preferences")
    @classmethod
    def _non_empty(cls, values):
        if not values:
            raise ValueError("parameter grids must be non-empty")
        return values

    @field_validator("alphas")
    @classmethod
    def _alpha_range(cls, values):
        if any(not 0.0 <= a <= 1.0 for a in values):
            raise ValueError("alpha values must lie in [0, 1]")
        return values

    @model_validator(mode="after")
    def _positive_grids(self):
        if min(self.n_values) < 2 or min(self.k_values) < 1 or min(self.budget) < 1:
            raise ValueError("N must be at least 2, K and budgets at least 1")
        return self

    @classmethod
    def defaults(cls, scenario: Scenario, **overrides) -> "ScenarioConfig":
        """Per-scenario defaults; overrides set to None are ignored."""
        base: dict = {"scenario": scenario}
        if scenario == "continuous":
            base.update(n_values=[3], k_values=[2])
        elif scenario == "demo":
            base.update(n_values=[4], k_values=[2])
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    @property
    def method_list(self) -> list[str]:
        if self.methods:
            return list(self.methods)
        return {
            "fig1": ["kmeanspp", "dca", "self_decodable", "self_decodable_int"],
            "continuous": ["saa", "sampling_kmeanspp", "sampling_dca", "exhaustive", "self_decodable"],
            "fig4": ["kmeanspp2u", "dca2u", "self_decodable", "self_decodable_int"],
            "demo": [],
        }[self.scenario]

    def design_options(self, twouser: bool = False) -> DesignOptions:
        return DesignOptions.from_settings(
            restarts=self.twouser_restarts if twouser else self.restarts,
            max_iters=self.max_iters, epsilon=self.epsilon, seed=self.seed,
        )

    @property
    def designs_dir(self) -> Path | None:
        if self.out is None:
            return None
        return self.out.parent / f"{self.out.stem}_designs"


@dataclass(frozen=True)
class Cell:
    """One grid point: N and either K or alpha, plus the preference kind."""
    scenario: str
    n: int
    value: float
    variant: str = ""


def gen_data(N: int, J: int, seed: int) -> DiscretePreference:
    """J flat-Dirichlet SPVs requested uniformly."""
    if J < 1:
        raise ConfigError(f"J must be positive, got {J}")
    spvs = sample_uniform_simplex(stream_rng(seed, STREAM_DATA), J, N)
    return DiscretePreference(spvs, np.full(J, 1.0 / J))


def build_cells(cfg: ScenarioConfig) -> list[Cell]:
    if cfg.scenario == "fig1":
        return [Cell("fig1", n, k) for n in cfg.n_values for k in cfg.k_values]
    if cfg.scenario == "continuous":
        return [Cell(f"continuous-{kind}", n, k, kind)
                for kind in cfg.preferences for n in cfg.n_values for k in cfg.k_values]
    if cfg.scenario == "fig4":
        return [Cell("fig4", n, a) for n in cfg.n_values for a in cfg.alphas]
    raise ConfigError(f"scenario {cfg.scenario!r} has no grid")


# ─── Cell runners ──────────────────────────────────────────────────

class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = 0.0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start

    @property
    def ms(self) -> int:
        return int(round(self.elapsed * 1000)) if self.enabled else 0


def _row(cfg: ScenarioConfig, cell: Cell, method: str, bits: float, objective: float,
         runtime_ms: int, restarts: int | None = None) -> dict:
    value = int(cell.value) if cell.scenario != "fig4" else float(cell.value)
    return {
        "scenario": cell.scenario,
        "n": cell.n,
        "k_or_alpha": value,
        "method": method,
        "seed": cfg.seed,
        "restarts": cfg.restarts if restarts is None else restarts,
        "expected_bits": float(bits),
        "objective_bits_per_symbol": float(objective),
        "runtime_ms": runtime_ms,
    }


def _store(cfg: ScenarioConfig) -> DesignStore | None:
    return DesignStore(cfg.designs_dir) if cfg.designs_dir is not None else None


def _fig1_cell(cfg: ScenarioConfig, cell: Cell, logger=None) -> list[dict]:
    pref = gen_data(cell.n, cfg.items, cfg.seed)
    K = int(cell.value)
    opts = cfg.design_options()
    store = _store(cfg)
    mean_entropy = float(np.dot(pref.probs, entropies(pref.spvs)))
    rows = []
    for method in cfg.method_list:
        clock = _Clock(cfg.timing)
        if method in ("kmeanspp", "dca"):
            designer = design_kmeanspp if method == "kmeanspp" else design_dca
            with clock:
                result = designer(pref, K, opts, logger=logger)
            bits, _ = expected_cost(pref, result.codebooks, cfg.L)
            if store:
                store.save_design(result, f"fig1_n{cell.n}_k{K}_{method}.json", seed=cfg.seed,
                                  restarts=cfg.restarts, expected_bits=bits, L=cfg.L)
            rows.append(_row(cfg, cell, method, bits, result.objective, clock.ms))
        elif method in ("self_decodable", "self_decodable_int"):
            integer = method.endswith("_int")
            with clock:
                bits = sum(f * self_decodable_bits(p, cfg.L, integer=integer)
                           for p, f in zip(pref.spvs, pref.probs))
            rows.append(_row(cfg, cell, method, bits, bits / cfg.L - mean_entropy, clock.ms))
        else:
            raise ConfigError(f"unknown fig1 method {method!r}")
    return rows


def _continuous_spec(kind: str, n: int) -> PreferenceSpec:
    return PreferenceSpec.uniform(n) if kind == "uniform" else PreferenceSpec.radial(n)


def _continuous_cell(cfg: ScenarioConfig, cell: Cell, logger=None) -> list[dict]:
    spec = _continuous_spec(cell.variant, cell.n)
    K = int(cell.value)
    opts = cfg.design_options()
    sample = sample_preference(spec, cfg.sample_size, stream_rng(cfg.seed, STREAM_SAMPLE), logger=logger)
    held_out = evaluation_sample(spec, cfg.eval_sample_size, cfg.seed, logger=logger)
    held_out_entropy = float(entropies(held_out.points).mean())
    store = _store(cfg)
    rows = []
    for method in cfg.method_list:
        clock = _Clock(cfg.timing)
        if method == "self_decodable":
            with clock:
                bits = float(np.mean([self_decodable_bits(p, cfg.L) for p in held_out.points]))
            rows.append(_row(cfg, cell, method, bits, bits / cfg.L - held_out_entropy, clock.ms))
            continue
        with clock:
            if method == "saa":
                codebooks = design_continuous_saa(spec, K, opts=opts, sample=sample, logger=logger).codebooks
            elif method in ("sampling_kmeanspp", "sampling_dca"):
                algo = method.split("_", 1)[1]
                codebooks = design_sampling(spec, K, method=algo, opts=opts, sample=sample,
                                            logger=logger).codebooks
            elif method == "exhaustive":
                codebooks, _ = exhaustive_search(sample.to_preference(), GridSearchSpec(cfg.grid_step, K),
                                                 logger=logger)
            else:
                raise ConfigError(f"unknown continuous method {method!r}")
        bits = evaluate_expected_bits(codebooks, held_out, cfg.L)
        if store:
            store.save_codebooks(codebooks, f"{cell.scenario}_n{cell.n}_k{K}_{method}.json")
        rows.append(_row(cfg, cell, method, bits, bits / cfg.L - held_out_entropy, clock.ms))
    return rows


def _fig4_cell(cfg: ScenarioConfig, cell: Cell, logger=None) -> list[dict]:
    pref = gen_data(cell.n, cfg.items, cfg.seed)
    joint = joint_pref_alpha(cfg.items, float(cell.value))
    budget = TwoUserBudget(*cfg.budget)
    opts = cfg.design_options(twouser=True)
    store = _store(cfg)
    streamed_entropy = float(np.dot(joint.diagonal + joint.w1 + joint.w2, entropies(pref.spvs)))
    rows = []
    for method in cfg.method_list:
        clock = _Clock(cfg.timing)
        if method in ("kmeanspp2u", "dca2u"):
            designer = design_twouser_kmeanspp if method == "kmeanspp2u" else design_twouser_dca
            with clock:
                result = designer(pref.spvs, joint, budget, opts, L=cfg.L, logger=logger)
            if store:
                store.save_twouser(result, f"fig4_n{cell.n}_a{cell.value:g}_{method}.json")
            rows.append(_row(cfg, cell, method, result.bits, result.objective, clock.ms,
                             restarts=cfg.twouser_restarts))
        elif method in ("self_decodable", "self_decodable_int"):
            with clock:
                bits = twouser_self_decodable_bits(pref.spvs, joint, cfg.L, integer=method.endswith("_int"))
            rows.append(_row(cfg, cell, method, bits, bits / cfg.L - streamed_entropy, clock.ms,
                             restarts=cfg.twouser_restarts))
        else:
            raise ConfigError(f"unknown fig4 method {method!r}")
    return rows


def run_cell(cell: Cell, cfg: ScenarioConfig, logger=None) -> list[dict]:
    if cell.scenario == "fig1":
        return _fig1_cell(cfg, cell, logger)
    if cell.scenario.startswith("continuous"):
        return _continuous_cell(cfg, cell, logger)
    if cell.scenario == "fig4":
        return _fig4_cell(cfg, cell, logger)
    raise ConfigError(f"unknown scenario {cell.scenario!r}")


# ─── Demo ──────────────────────────────────────────────────────────

def run_demo(L: int | None = None, seed: int | None = None, logger=None) -> dict:
    """Four items, three preferences: single-codebook optimum, a K=2
    design, and a codec round trip of one Pref 1 item."""
    L = settings.symbols_per_item if L is None else L
    seed = settings.seed if seed is None else seed
    opts = DesignOptions.from_settings(seed=seed)
    report = {"spvs": DEMO_SPVS.tolist(), "L": L, "preferences": []}

    for name, probs in DEMO_PREFERENCES.items():
        pref = DiscretePreference(DEMO_SPVS, probs)
        single = CodebookSet(optimal_single(pref).q)
        single_bits, _ = expected_cost(pref, single, L)
        design = design_kmeanspp(pref, 2, opts, logger=logger)
        design_bits, _ = expected_cost(pref, design.codebooks, L)
        report["preferences"].append({
            "name": name,
            "probs": probs,
            "single_codebook": single.matrix[0].tolist(),
            "single_bits": single_bits,
            "design_codebooks": design.codebooks.matrix.tolist(),
            "design_bits": design_bits,
        })

    pref1 = DiscretePreference(DEMO_SPVS, DEMO_PREFERENCES["Pref 1"])
    codebooks = CodebookSet(optimal_single(pref1).q)
    rng = stream_rng(seed, STREAM_DATA)
    symbols = rng.choice(DEMO_SPVS.shape[1], size=L, p=DEMO_SPVS[0])
    stream = encode(symbols, codebooks)
    decoded = decode(stream, codebooks)
    report["round_trip"] = {
        "symbols": symbols.tolist(),
        "payload_bits": stream.payload_bits,
        "total_bits": stream.total_bits,
        "ok": bool(np.array_equal(decoded.symbols, symbols)),
    }
    if logger:
        logger.log_info("Demo", logger.formatter.format_demo_report(report))
    return report

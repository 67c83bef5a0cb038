"""
Configuration and report models for the experiment pipeline.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sensing.coop_single import NodeStats
from sensing.geo import AngularMask, CognitiveRadio, PowerModel, RuleConfig, Scene

Point = Tuple[float, float]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AlphaGrid(StrictModel):
    """Evenly spaced alpha values, endpoints included."""

    start: float = Field(0.0, ge=0.0, le=1.0, description="First alpha")
    stop: float = Field(1.0, ge=0.0, le=1.0, description="Last alpha, included when the step divides the range")
    step: float = Field(0.01, gt=0.0, description="Grid spacing")

    @model_validator(mode="after")
    def _ordered(self) -> "AlphaGrid":
        if self.stop < self.start:
            raise ValueError(f"alpha grid stop {self.stop} is below start {self.start}")
        return self

    def values(self) -> np.ndarray:
        count = int(round((self.stop - self.start) / self.step)) + 1
        return np.round(self.start + self.step * np.arange(count), 12)


class Fig3Config(StrictModel):
    w: float = Field(9.0, ge=0.0, description="Weighting factor of false alarms")
    depth: int = Field(15, ge=0, description="Observation depth L of the plug-in estimator")
    alphas: AlphaGrid = Field(default_factory=AlphaGrid, description="Prior availabilities evaluated")
    nodes: List[NodeStats] = Field(
        default_factory=lambda: [
            NodeStats(beta=0.8, gamma=0.2),
            NodeStats(beta=0.75, gamma=0.75),
            NodeStats(beta=0.9, gamma=0.8),
            NodeStats(beta=0.9, gamma=0.9),
        ],
        description="Single cooperative nodes drawn as separate curves",
    )
    mc_trials: int = Field(20_000, ge=0, description="Histories per alpha for the simulated plug-in curve; 0 disables it")


class Fig6Config(StrictModel):
    w: float = Field(9.0, ge=0.0, description="Weighting factor of false alarms")
    node1: NodeStats = Field(default_factory=lambda: NodeStats(beta=0.75, gamma=0.75), description="First node of the pair")
    node2: NodeStats = Field(default_factory=lambda: NodeStats(beta=0.7, gamma=0.7), description="Second node of the pair")
    rhos: List[float] = Field(default_factory=lambda: [0.0, 0.4, 0.8], description="Correlations under 1^Rx=0")
    alphas: AlphaGrid = Field(default_factory=AlphaGrid, description="Prior availabilities evaluated")


class Fig7Config(StrictModel):
    w: float = Field(9.0, ge=0.0, description="Weighting factor of false alarms")
    nodes: int = Field(6, ge=1, le=10, description="Cooperative node count K")
    scenario_seed: int = Field(7, ge=0, description="Seed of the correlated pmf construction")
    coupling: float = Field(0.5, ge=0.0, le=1.0, description="Weight of the comonotone component")
    low: float = Field(0.65, gt=0.0, lt=1.0, description="Smallest per-node beta and gamma of the scenario")
    high: float = Field(0.85, gt=0.0, lt=1.0, description="Largest per-node beta and gamma of the scenario")
    orders: Optional[List[int]] = Field(None, description="Known marginal orders; defaults to 1..K")
    alphas: AlphaGrid = Field(
        default_factory=lambda: AlphaGrid(start=0.02, stop=0.98, step=0.02), description="Prior availabilities evaluated"
    )
    selection_alpha: float = Field(0.8, ge=0.0, le=1.0, description="alpha of the minimax subset selection")
    selection_size: int = Field(3, ge=1, description="Subset size of the minimax selection")
    selection_order: int = Field(2, ge=0, description="Marginal order known for the selection")

    @model_validator(mode="after")
    def _fits(self) -> "Fig7Config":
        if self.high < self.low:
            raise ValueError("high must not be below low")
        if self.selection_size > self.nodes:
            raise ValueError("selection_size exceeds the node count")
        if self.orders and any(not 0 <= k <= self.nodes for k in self.orders):
            raise ValueError(f"orders must lie in 0..{self.nodes}")
        return self

    def resolved_orders(self) -> List[int]:
        return list(self.orders) if self.orders else list(range(1, self.nodes + 1))


class Fig4Config(StrictModel):
    model: PowerModel = Field(default_factory=PowerModel, description="Shadowing and path-loss model")
    rule: RuleConfig = Field(default_factory=RuleConfig, description="Outage weight and neighborhood grid")
    ps_near: Point = Field((0.7, 0.0), description="PS position of the nearly unconstrained case")
    ps_far: Point = Field((1.7, 0.0), description="PS position of the constrained case and the placement study")
    candidates: List[Point] = Field(
        default_factory=lambda: [(0.4, 0.3), (0.0, 0.6), (-0.4, 0.3)],
        description="Cooperative node placements compared against each other",
    )
    radio: Point = Field((1.0, 0.0), description="Second CR of the unidirectional link example")
    mc_trials: int = Field(100_000, ge=0, description="Trials of the outage check; 0 disables it")


class Fig5Config(StrictModel):
    model: PowerModel = Field(default_factory=PowerModel, description="Shadowing and path-loss model")
    rule: RuleConfig = Field(default_factory=RuleConfig, description="Outage weight and neighborhood grid")
    ps_position: Point = Field((0.7, 0.0), description="PS position")
    b_tx: float = Field(25.0, ge=0.0, description="Shadowing at CR-Tx (dB)")
    kappas: List[float] = Field(default_factory=lambda: [0.3, 0.7], description="Obstacle sizes compared")
    node: Point = Field((-0.4, 0.0), description="Cooperative node added to each obstacle case")


ExperimentId = Literal["fig3", "fig4", "fig5", "fig6", "fig7"]


class ExperimentConfig(StrictModel):
    """
    One JSON document per run. Sections other than the selected experiment's are ignored
    but still validated.
    """

    experiment: ExperimentId = Field(description="Figure to reproduce")
    seed: Optional[int] = Field(None, ge=0, description="Root seed; CLI and CRN_SENSE_SEED override")
    output_dir: str = Field("output", description="Directory receiving CSV files and report.json")
    fig3: Fig3Config = Field(default_factory=Fig3Config, description="Settings of the fig3 experiment")
    fig4: Fig4Config = Field(default_factory=Fig4Config, description="Settings of the fig4 experiment")
    fig5: Fig5Config = Field(default_factory=Fig5Config, description="Settings of the fig5 experiment")
    fig6: Fig6Config = Field(default_factory=Fig6Config, description="Settings of the fig6 experiment")
    fig7: Fig7Config = Field(default_factory=Fig7Config, description="Settings of the fig7 experiment")

    def section(self) -> StrictModel:
        return getattr(self, self.experiment)


class RiskCurveRequest(StrictModel):
    w: float = Field(9.0, ge=0.0, description="Weighting factor of false alarms")
    depth: int = Field(15, ge=0, description="Observation depth L of the plug-in estimator")
    alphas: AlphaGrid = Field(default_factory=AlphaGrid, description="Prior availabilities evaluated")
    nodes: List[NodeStats] = Field(default_factory=list, description="Single cooperative nodes, one curve each")


class RobustRequest(StrictModel):
    """Either joint pmfs (p1, p0) or known marginals (q1, q0) of order k_known."""

    w: float = Field(9.0, ge=0.0, description="Weighting factor of false alarms")
    alphas: List[float] = Field(default_factory=lambda: [0.5, 0.8, 0.9], description="Prior availabilities evaluated")
    nodes: int = Field(ge=1, le=10, description="Cooperative node count K")
    k_known: int = Field(ge=0, description="Order of the known marginals")
    p1: Optional[List[float]] = Field(None, description="Joint pmf given 1^Rx=1, canonical order")
    p0: Optional[List[float]] = Field(None, description="Joint pmf given 1^Rx=0, canonical order")
    q1: Optional[List[float]] = Field(None, description="Marginals up to k_known given 1^Rx=1")
    q0: Optional[List[float]] = Field(None, description="Marginals up to k_known given 1^Rx=0")

    @model_validator(mode="after")
    def _one_source(self) -> "RobustRequest":
        joint = self.p1 is not None and self.p0 is not None
        marginal = self.q1 is not None and self.q0 is not None
        if joint == marginal:
            raise ValueError("give exactly one of (p1, p0) or (q1, q0)")
        if self.k_known > self.nodes:
            raise ValueError("k_known exceeds nodes")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ValueError("alphas must lie in [0, 1]")
        return self


class NeighborhoodRequest(StrictModel):
    model: PowerModel = Field(default_factory=PowerModel, description="Shadowing and path-loss model")
    scene: Scene = Field(default_factory=Scene, description="PS, CR-Tx and cooperative placement")
    rule: RuleConfig = Field(default_factory=RuleConfig, description="Outage weight and neighborhood grid")
    zeta: Optional[float] = Field(None, gt=0.0, lt=1.0, description="Outage budget; overrides rule.w when set")
    candidates: List[Point] = Field(default_factory=list, description="Cooperative placements to rank")
    mask: Optional[AngularMask] = Field(None, description="Restricts the reported area to a sector")


class ConnectivityRequest(StrictModel):
    model: PowerModel = Field(default_factory=PowerModel, description="Shadowing and path-loss model")
    scene: Scene = Field(default_factory=Scene, description="PS, CR-Tx and cooperative placement")
    rule: RuleConfig = Field(default_factory=RuleConfig, description="Outage weight and neighborhood grid")
    radios: List[CognitiveRadio] = Field(min_length=2, description="Radios whose pairwise links are tested")


class ConvertPmfRequest(StrictModel):
    """Joint pmf to marginals (m given) or marginals plus tail mass to joint."""

    direction: Literal["joint_to_marginals", "marginals_to_joint"] = Field(description="Conversion to perform")
    s: int = Field(ge=0, le=1, description="Value of 1^Rx conditioned on")
    k: int = Field(ge=1, le=16, description="Node count")
    m: Optional[int] = Field(None, ge=0, description="Marginal order to extract")
    values: List[float] = Field(description="Joint pmf or stacked marginals")
    tail_mass: Optional[float] = Field(None, description="K-th order joint probability completing the marginals")

    @model_validator(mode="after")
    def _complete(self) -> "ConvertPmfRequest":
        if self.direction == "joint_to_marginals" and self.m is None:
            raise ValueError("joint_to_marginals needs m")
        if self.direction == "marginals_to_joint" and self.tail_mass is None:
            raise ValueError("marginals_to_joint needs tail_mass")
        return self


class RunReport(BaseModel):
    """Result of one experiment or subcommand run."""

    experiment: str = Field(description="Experiment id or subcommand name")
    seed: int = Field(0, description="Root seed actually used")
    wall_time: float = Field(0.0, description="Seconds spent computing; kept out of the CSV files")
    config: Dict[str, Any] = Field(default_factory=dict, description="Fully resolved configuration")
    csv: Dict[str, str] = Field(default_factory=dict, description="CSV file name to file contents")
    summary: Dict[str, Any] = Field(default_factory=dict, description="Headline numbers of the run")

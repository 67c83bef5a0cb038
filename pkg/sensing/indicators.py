"""
Indicator model of link availability, Bayesian risk and the no-cooperation inference rule.
"""

import logging
from enum import Enum
from typing import Any, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.stats import binom

from sensing.errors import DegenerateStats

logger = logging.getLogger(__name__)


class RuleKind(str, Enum):
    """Decision rules a CR-Tx can apply when its own indicator reads 1."""

    ALWAYS0 = "Always0"
    PASS_TX = "PassTx"
    TX_AND_CO = "TxAndCo"
    TX_AND_NOT_CO = "TxAndNotCo"


class IndicatorStats(BaseModel):
    """
    Prior availability at CR-Rx and the false-alarm weighting.

    The weighting w is the cost ratio between declaring a busy link free
    (false alarm) and declaring a free link busy (missed detection).
    """

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(
        ge=0.0, le=1.0,
        description="Pr(1^Rx=1 | 1^Tx=1), spectrum availability at CR-Rx"
    )
    w: float = Field(
        ge=0.0,
        description="Normalized weighting factor of false alarm vs. missed detection"
    )

    @property
    def threshold(self) -> float:
        """Smallest alpha for which passing 1^Tx through is optimal."""
        return self.w / (self.w + 1.0)


class ObservationHistory(BaseModel):
    """Past CR-Rx indicators 1^Rx[n-1..n-L] as seen by CR-Tx."""

    model_config = ConfigDict(frozen=True)

    bits: Tuple[int, ...] = Field(
        default=(),
        description="Most recent first; every element is 0 or 1"
    )
    depth: int = Field(
        ge=0,
        description="Observation depth L; inferred from bits when omitted"
    )

    @model_validator(mode="before")
    @classmethod
    def _default_depth(cls, data: Any) -> Any:
        if isinstance(data, dict) and "depth" not in data:
            data = {**data, "depth": len(data.get("bits", ()))}
        return data

    @field_validator("bits")
    @classmethod
    def _binary(cls, bits: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(b not in (0, 1) for b in bits):
            raise ValueError("history bits must be 0 or 1")
        return tuple(int(b) for b in bits)

    @model_validator(mode="after")
    def _depth_matches(self) -> "ObservationHistory":
        if self.depth != len(self.bits):
            raise ValueError(f"depth {self.depth} does not match {len(self.bits)} bits")
        return self

    @property
    def ones(self) -> int:
        return sum(self.bits)


class LinkDecision(BaseModel):
    """Outcome of the inference rule: the rule to apply and its Bayesian risk."""

    model_config = ConfigDict(frozen=True)

    rule_kind: RuleKind
    risk: float = Field(ge=0.0)


def link_availability(tx: int, rx: int) -> int:
    """Link is available only when both ends see a free channel."""
    if tx not in (0, 1) or rx not in (0, 1):
        raise ValueError("indicators must be 0 or 1")
    return tx * rx


def laplace_estimate(hist: ObservationHistory) -> float:
    """
    Posterior-mean estimate of alpha from a history.

    Args:
        hist: Observed 1^Rx values

    Returns:
        (N+1)/(L+2) where N is the number of ones
    """
    return (hist.ones + 1) / (hist.depth + 2)


def bayes_risk(stats: IndicatorStats, p_false_alarm: float, p_miss: float) -> float:
    """Risk w(1-alpha)P_F + alpha P_M, conditioned on 1^Tx=1."""
    return stats.w * (1.0 - stats.alpha) * p_false_alarm + stats.alpha * p_miss


def inference_rule(stats: IndicatorStats) -> LinkDecision:
    """
    Bayes decision of CR-Tx with no observation beyond alpha.

    Ties at alpha == w/(w+1) pass 1^Tx through.
    """
    kind = RuleKind.PASS_TX if stats.alpha >= stats.threshold else RuleKind.ALWAYS0
    risk = min(stats.w * (1.0 - stats.alpha), stats.alpha)
    return LinkDecision(rule_kind=kind, risk=risk)


def traditional_risk(stats: IndicatorStats) -> float:
    """Risk of declaring 1^link = 1^Tx (P_F=1, P_M=0)."""
    return bayes_risk(stats, 1.0, 0.0)


def plugin_decision(ones: int, depth: int, w: float) -> RuleKind:
    """Inference rule applied with the Laplace estimate, compared without division."""
    if (ones + 1) * (w + 1.0) >= w * (depth + 2):
        return RuleKind.PASS_TX
    return RuleKind.ALWAYS0


def expected_plugin_risk(alpha: float, w: float, depth: int) -> float:
    """
    Exact expected risk of the plug-in rule over all histories of the given depth.

    Histories with the same number of ones share a decision, so the 2^L
    histories collapse onto binomial weights.
    """
    counts = np.arange(depth + 1)
    weights = binom.pmf(counts, depth, alpha)
    costs = np.array([
        w * (1.0 - alpha) if plugin_decision(int(n), depth, w) is RuleKind.PASS_TX else alpha
        for n in counts
    ])
    return float(np.dot(weights, costs))


def draw_history_counts(alpha: float, depth: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Number of ones in `trials` histories of i.i.d. Bernoulli(alpha) bits."""
    bits = rng.random((trials, depth)) < alpha
    return bits.sum(axis=1)


def weight_from_outage(zeta: float) -> float:
    """Weighting factor guaranteeing outage probability at most zeta."""
    if not 0.0 < zeta < 1.0:
        raise ValueError(f"outage budget must lie in (0, 1), got {zeta}")
    return (1.0 - zeta) / zeta


def alpha_from_ps_conditionals(
    p_tx_given_ps: Sequence[float],
    p_rx_given_ps: Sequence[float],
    ps_idle_prob: float,
) -> float:
    """
    Availability at CR-Rx given 1^Tx=1 from PS-conditioned indicator probabilities.

    Args:
        p_tx_given_ps: Pr(1^Tx=1 | 1^PS=s) for s = 0, 1
        p_rx_given_ps: Pr(1^Rx=1 | 1^PS=s) for s = 0, 1
        ps_idle_prob: Pr(1^PS=1)

    Returns:
        alpha under conditional independence of CR-Tx and CR-Rx given 1^PS
    """
    prior = np.array([1.0 - ps_idle_prob, ps_idle_prob])
    tx = np.asarray(p_tx_given_ps, dtype=float)
    rx = np.asarray(p_rx_given_ps, dtype=float)
    denominator = float(np.dot(prior, tx))
    if denominator <= 0.0:
        raise DegenerateStats("CR-Tx never reads a free channel; alpha is undefined")
    return float(np.dot(prior, tx * rx)) / denominator

"""
Single cooperative node: correlation with CR-Rx and the four-case fusion rule.
"""

import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sensing.errors import DegenerateStats
from sensing.indicators import IndicatorStats, RuleKind

logger = logging.getLogger(__name__)


class NodeStats(BaseModel):
    """Detection statistics of one cooperative node, conditioned on 1^Tx=1."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(ge=0.0, le=1.0, description="Pr(1^Co=1 | 1^Rx=1, 1^Tx=1)")
    gamma: float = Field(ge=0.0, le=1.0, description="Pr(1^Co=0 | 1^Rx=0, 1^Tx=1)")

    @property
    def is_uninformative(self) -> bool:
        return math.isclose(self.beta + self.gamma, 1.0, abs_tol=1e-15)


class SingleCoopRule(BaseModel):
    """Selected case of the one-node rule with the two alpha thresholds."""

    model_config = ConfigDict(frozen=True)

    rule_kind: RuleKind
    alpha1: float = Field(description="Threshold for passing when the node reads 0")
    alpha2: float = Field(description="Threshold for passing when the node reads 1")

    @property
    def gamma_table(self) -> tuple:
        """Decision for node readings (0, 1)."""
        return {
            RuleKind.ALWAYS0: (0, 0),
            RuleKind.PASS_TX: (1, 1),
            RuleKind.TX_AND_CO: (0, 1),
            RuleKind.TX_AND_NOT_CO: (1, 0),
        }[self.rule_kind]


def correlation(alpha: float, node: NodeStats) -> float:
    """
    Correlation coefficient between 1^Co and 1^Rx given 1^Tx=1.

    Raises:
        DegenerateStats: alpha in {0, 1} or a mixture probability is 0 or 1
    """
    beta, gamma = node.beta, node.gamma
    co_one = alpha * beta + (1.0 - alpha) * (1.0 - gamma)
    co_zero = alpha * (1.0 - beta) + (1.0 - alpha) * gamma
    if not 0.0 < alpha < 1.0 or co_one <= 0.0 or co_zero <= 0.0:
        raise DegenerateStats(
            f"correlation undefined for alpha={alpha}, beta={beta}, gamma={gamma}"
        )
    return math.sqrt(alpha * (1.0 - alpha)) * (beta + gamma - 1.0) / math.sqrt(co_one * co_zero)


def _threshold(numerator: float, other: float) -> float:
    # numerator / (other + numerator); a 0/0 pass condition holds for every alpha
    denominator = other + numerator
    return numerator / denominator if denominator > 0.0 else 0.0


def coop_thresholds(w: float, node: NodeStats) -> tuple:
    """(alpha1, alpha2) for node readings 0 and 1 respectively."""
    alpha1 = _threshold(w * node.gamma, 1.0 - node.beta)
    alpha2 = _threshold(w * (1.0 - node.gamma), node.beta)
    return alpha1, alpha2


def single_coop_rule(stats: IndicatorStats, node: NodeStats) -> SingleCoopRule:
    """
    Bayes rule of CR-Tx aided by one cooperative node.

    Equal thresholds (beta + gamma = 1) reduce to the plain inference rule.
    Boundary equalities pick the higher-availability case.
    """
    alpha1, alpha2 = coop_thresholds(stats.w, node)
    alpha = stats.alpha
    upper, lower = max(alpha1, alpha2), min(alpha1, alpha2)
    if alpha >= upper:
        kind = RuleKind.PASS_TX
    elif alpha < lower:
        kind = RuleKind.ALWAYS0
    elif alpha2 < alpha1:
        kind = RuleKind.TX_AND_CO
    else:
        kind = RuleKind.TX_AND_NOT_CO
    return SingleCoopRule(rule_kind=kind, alpha1=alpha1, alpha2=alpha2)


def psi(node: NodeStats) -> float:
    """Correlation magnitude below which a w=1 sensor ignores the node."""
    spread = 2.0 * (node.beta * node.gamma + (1.0 - node.beta) * (1.0 - node.gamma))
    return abs(node.beta + node.gamma - 1.0) / math.sqrt(spread)


def min_error_rule(alpha: float, node: NodeStats) -> SingleCoopRule:
    """Minimum-error-probability rule (w = 1) decided by |rho| against psi."""
    alpha1, alpha2 = coop_thresholds(1.0, node)
    try:
        rho = correlation(alpha, node)
    except DegenerateStats:
        rho = 0.0
    if abs(rho) <= psi(node):
        kind = RuleKind.PASS_TX if alpha >= 0.5 else RuleKind.ALWAYS0
    elif rho > 0.0:
        kind = RuleKind.TX_AND_CO
    else:
        kind = RuleKind.TX_AND_NOT_CO
    return SingleCoopRule(rule_kind=kind, alpha1=alpha1, alpha2=alpha2)


def coop_risk(stats: IndicatorStats, node: NodeStats) -> float:
    """Bayesian risk of the rule selected by single_coop_rule."""
    pass_on_zero, pass_on_one = single_coop_rule(stats, node).gamma_table
    false_alarm = pass_on_zero * node.gamma + pass_on_one * (1.0 - node.gamma)
    miss = (1 - pass_on_zero) * (1.0 - node.beta) + (1 - pass_on_one) * node.beta
    return stats.w * (1.0 - stats.alpha) * false_alarm + stats.alpha * miss


def estimate_node_stats(rx_bits: Sequence[int], co_bits: Sequence[int]) -> NodeStats:
    """
    Counting estimate of (beta, gamma) with the Laplace correction.

    Args:
        rx_bits: 1^Rx values observed while 1^Tx = 1
        co_bits: Simultaneous 1^Co values

    Returns:
        NodeStats with (count+1)/(n+2) for each conditional
    """
    rx = np.asarray(rx_bits, dtype=int)
    co = np.asarray(co_bits, dtype=int)
    if rx.shape != co.shape:
        raise ValueError("rx and co histories must have equal length")
    rx_free = rx == 1
    beta = (np.count_nonzero(co[rx_free] == 1) + 1) / (np.count_nonzero(rx_free) + 2)
    gamma = (np.count_nonzero(co[~rx_free] == 0) + 1) / (np.count_nonzero(~rx_free) + 2)
    return NodeStats(beta=float(beta), gamma=float(gamma))

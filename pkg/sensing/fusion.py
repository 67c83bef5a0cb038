"""
Bayesian fusion of K cooperative nodes.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sensing.coop_single import NodeStats
from sensing.errors import DegenerateStats
from sensing.indicators import IndicatorStats
from sensing.pmf_algebra import MarginalSet, JointPmf, build_indexer, complete_joint, product_pmf

logger = logging.getLogger(__name__)

# Two-node decision tables in canonical order (00, 10, 01, 11), named by the
# boolean function of (1^Co_1, 1^Co_2) they realize.
TWO_NODE_FUNCTIONS = {
    (0, 0, 0, 0): "Always0",
    (0, 0, 0, 1): "Co1 AND Co2",
    (0, 1, 0, 0): "Co1 AND NOT Co2",
    (0, 1, 0, 1): "Co1",
    (0, 0, 1, 0): "NOT Co1 AND Co2",
    (0, 0, 1, 1): "Co2",
    (0, 1, 1, 0): "XOR",
    (0, 1, 1, 1): "Co1 OR Co2",
    (1, 0, 0, 0): "NOT Co1 AND NOT Co2",
    (1, 0, 0, 1): "EQUALITY",
    (1, 0, 1, 0): "NOT Co1",
    (1, 0, 1, 1): "NOT Co1 OR Co2",
    (1, 1, 0, 0): "NOT Co2",
    (1, 1, 0, 1): "Co1 OR NOT Co2",
    (1, 1, 1, 0): "NOT Co1 OR NOT Co2",
    (1, 1, 1, 1): "PassTx",
}


class DecisionRule(BaseModel):
    """Decision table over the 2^K cooperative readings and its Bayesian risk."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(ge=1)
    gamma_table: np.ndarray = Field(description="1 where CR-Tx declares the link available")
    risk: float = Field(ge=0.0)

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(int(g) for g in self.gamma_table)


class Reliability(BaseModel):
    """M_R of a node and the sign of its correlation with 1^Rx."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0.0)
    sign: int = Field(description="+1 when rho >= 0, -1 otherwise")


class TwoNodeCorr(BaseModel):
    """Two nodes whose readings are correlated when CR-Rx is busy."""

    model_config = ConfigDict(frozen=True)

    beta1: float = Field(ge=0.0, le=1.0)
    beta2: float = Field(ge=0.0, le=1.0)
    gamma1: float = Field(ge=0.0, le=1.0)
    gamma2: float = Field(ge=0.0, le=1.0)
    rho12: float = Field(ge=-1.0, le=1.0, description="Correlation of the two readings under 1^Rx=0")

    @property
    def delta(self) -> float:
        spread = self.gamma1 * self.gamma2 * (1.0 - self.gamma1) * (1.0 - self.gamma2)
        return math.sqrt(spread) * self.rho12


def _check_pair(p1: JointPmf, p0: JointPmf) -> None:
    if p1.k != p0.k:
        raise ValueError(f"pmfs disagree on node count: {p1.k} vs {p0.k}")


def rule_risk(stats: IndicatorStats, gamma_table: np.ndarray, p1: JointPmf, p0: JointPmf) -> float:
    """Bayesian risk of an arbitrary decision table."""
    _check_pair(p1, p0)
    table = np.asarray(gamma_table, dtype=float)
    false_alarm = stats.w * (1.0 - stats.alpha) * p0.values
    miss = stats.alpha * p1.values
    return float(np.dot(table, false_alarm) + np.dot(1.0 - table, miss))


def optimal_rule(stats: IndicatorStats, p1: JointPmf, p0: JointPmf) -> DecisionRule:
    """
    Likelihood-ratio test over the cooperative readings.

    Args:
        stats: alpha and w
        p1: Joint pmf of readings given 1^Rx=1
        p0: Joint pmf of readings given 1^Rx=0

    Returns:
        DecisionRule with ties deciding 1
    """
    _check_pair(p1, p0)
    false_alarm = stats.w * (1.0 - stats.alpha) * p0.values
    miss = stats.alpha * p1.values
    table = (miss >= false_alarm).astype(np.int64)
    risk = float(np.minimum(false_alarm, miss).sum())
    return DecisionRule(k=p1.k, gamma_table=table, risk=risk)


def reliability(node: NodeStats) -> Reliability:
    """M_R of a node; 1 for an uninformative node."""
    beta, gamma = node.beta, node.gamma
    if not (0.0 < beta < 1.0 and 0.0 < gamma < 1.0):
        raise DegenerateStats(f"reliability is infinite for beta={beta}, gamma={gamma}")
    delta_plus = beta * gamma / ((1.0 - beta) * (1.0 - gamma))
    if beta + gamma >= 1.0:
        return Reliability(value=delta_plus, sign=1)
    return Reliability(value=1.0 / delta_plus, sign=-1)


def rank_by_reliability(nodes: Sequence[NodeStats]) -> List[int]:
    """Node indices, most reliable first; equal reliabilities keep input order."""
    values = [reliability(node).value for node in nodes]
    return sorted(range(len(nodes)), key=lambda i: -values[i])


def independent_rule(stats: IndicatorStats, nodes: Sequence[NodeStats]) -> DecisionRule:
    """
    Log-threshold test for independent nodes.

    A node agrees with availability when it reads 1 (positive correlation)
    or 0 (negative correlation); the link is declared available when the
    summed log-reliability of agreeing nodes clears the prior threshold.
    """
    if not nodes:
        raise ValueError("independent_rule needs at least one node")
    grades = [reliability(node) for node in nodes]
    indexer = build_indexer(len(nodes))
    bits = indexer.patterns
    beta = np.array([n.beta for n in nodes])
    gamma = np.array([n.gamma for n in nodes])
    positive = np.array([g.sign > 0 for g in grades])
    log_mr = np.log([g.value for g in grades])

    agreeing = np.where(positive, bits, 1 - bits)
    score = agreeing @ log_mr
    with np.errstate(divide="ignore"):
        prior = np.log(stats.w * (1.0 - stats.alpha)) - np.log(stats.alpha)
    offset = np.where(positive, np.log(gamma / (1.0 - beta)), np.log((1.0 - gamma) / beta)).sum()
    if np.isnan(prior):
        # alpha = 0 and w = 0: both costs vanish and ties pass
        prior = -np.inf
    table = (score >= prior + offset).astype(np.int64)

    p1 = product_pmf(1, beta)
    p0 = product_pmf(0, gamma)
    return DecisionRule(k=indexer.k, gamma_table=table, risk=rule_risk(stats, table, p1, p0))


def pattern_thresholds(w: float, p1: JointPmf, p0: JointPmf) -> np.ndarray:
    """alpha at which each reading pattern starts passing: wP0/(P1 + wP0)."""
    _check_pair(p1, p0)
    numerator = w * p0.values
    denominator = p1.values + numerator
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denominator > 0.0, numerator / np.where(denominator > 0.0, denominator, 1.0), 0.0)


def _two_node_candidates(n1: NodeStats, n2: NodeStats) -> List[Tuple[str, Tuple[int, ...]]]:
    bits = build_indexer(2).patterns
    first = bits[:, 0] if n1.beta + n1.gamma >= 1.0 else 1 - bits[:, 0]
    second = bits[:, 1] if n2.beta + n2.gamma >= 1.0 else 1 - bits[:, 1]
    stronger = 1 if reliability(n1).value >= reliability(n2).value else 2
    single = first if stronger == 1 else second
    weaker = second if stronger == 1 else first
    return [
        ("PassTx", (1, 1, 1, 1)),
        ("Always0", (0, 0, 0, 0)),
        (f"Single{stronger}", tuple(int(b) for b in single)),
        (f"Single{3 - stronger}", tuple(int(b) for b in weaker)),
        ("OR", tuple(int(b) for b in first | second)),
        ("AND", tuple(int(b) for b in first & second)),
    ]


def two_node_independent(
    stats: IndicatorStats, n1: NodeStats, n2: NodeStats
) -> Tuple[DecisionRule, str]:
    """
    Optimal rule for two independent nodes and its case label.

    Labels are PassTx, OR, Single<k>, AND or Always0, where each node's
    reading enters as 1^Co or its complement according to its correlation sign.
    """
    p1 = product_pmf(1, [n1.beta, n2.beta])
    p0 = product_pmf(0, [n1.gamma, n2.gamma])
    rule = optimal_rule(stats, p1, p0)
    for label, table in _two_node_candidates(n1, n2):
        if rule.key == table:
            return rule, label
    logger.warning(f"Two-node table {rule.key} at alpha={stats.alpha} matches no listed case")
    return rule, TWO_NODE_FUNCTIONS[rule.key]


def delta_bounds(tc: TwoNodeCorr) -> Tuple[float, float]:
    """Range of Delta for which the correlated pmf under 1^Rx=0 stays valid."""
    g1, g2 = tc.gamma1, tc.gamma2
    low = max(-g1 * g2, -(1.0 - g1) * (1.0 - g2))
    high = min((1.0 - g1) * g2, g1 * (1.0 - g2))
    return low, high


def symmetric_delta_bounds(tc: TwoNodeCorr) -> Tuple[float, float]:
    """Closed-form bounds when beta_i = gamma_i and node 1 is the more reliable."""
    return -(1.0 - tc.beta1) * (1.0 - tc.beta2), (1.0 - tc.beta1) * tc.beta2


def correlated_pmfs(tc: TwoNodeCorr) -> Tuple[JointPmf, JointPmf]:
    """
    Product pmf under 1^Rx=1 and the Delta-shifted pmf under 1^Rx=0.

    Raises:
        InvalidPmf: Delta outside the feasible range
    """
    p1 = product_pmf(1, [tc.beta1, tc.beta2])
    marginals = MarginalSet(s=0, m=1, k=2, values=[1.0, tc.gamma1, tc.gamma2])
    p0 = complete_joint(marginals, tc.gamma1 * tc.gamma2 + tc.delta)
    return p1, p0


def two_node_correlated(stats: IndicatorStats, tc: TwoNodeCorr) -> Tuple[DecisionRule, str]:
    """Optimal rule for two correlated nodes, labeled by the boolean function it realizes."""
    p1, p0 = correlated_pmfs(tc)
    rule = optimal_rule(stats, p1, p0)
    return rule, TWO_NODE_FUNCTIONS[rule.key]


def critical_alpha(w: float, p1: JointPmf, p0: JointPmf) -> float:
    """
    Smallest alpha at which some reading pattern passes: w/(w + max P1/P0).

    A pattern seen only under 1^Rx=1 makes every alpha admissive.
    """
    _check_pair(p1, p0)
    return float(critical_alpha_batch(w, p1.values, p0.values)[0])


def success_probability(
    stats: IndicatorStats, gamma_table: np.ndarray, p1: JointPmf, p0: JointPmf
) -> Optional[float]:
    """Pr(1^link=1 | declared 1); None when the table never declares 1."""
    table = np.asarray(gamma_table, dtype=float)
    available = stats.alpha * float(np.dot(table, p1.values))
    declared = available + (1.0 - stats.alpha) * float(np.dot(table, p0.values))
    if declared <= 0.0:
        return None
    return available / declared


def is_counting_rule(rule: DecisionRule) -> bool:
    """True when the decision depends only on how many nodes read 1."""
    indexer = build_indexer(rule.k)
    for m in range(rule.k + 1):
        block = rule.gamma_table[indexer.block(m)]
        if np.any(block != block[0]):
            return False
    return True


def critical_alpha_batch(w: float, p1: np.ndarray, p0: np.ndarray) -> np.ndarray:
    """critical_alpha over rows of stacked pmf arrays of shape (N, 2^K)."""
    p1 = np.atleast_2d(p1)
    p0 = np.atleast_2d(p0)
    support = p0 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(support, p1 / np.where(support, p0, 1.0), 0.0)
    lambda_max = ratios.max(axis=1)
    unbounded = np.any(~support & (p1 > 0.0), axis=1)
    if w == 0.0:
        return np.zeros(p1.shape[0])
    return np.where(unbounded, 0.0, w / (w + lambda_max))

"""
Minimax-robust cooperative sensing when only low-order marginals are known.

The least-favorable joint pmfs maximize the Bayesian risk among all pmfs
matching the known marginals. Since min(x, y) = (x + y - |x - y|)/2, this
is the minimizer of ||w(1-alpha)P0 - alpha P1||_1, solved as a linear
program with epigraph variables t >= |w(1-alpha)P0 - alpha P1|.
"""

import itertools
import logging
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import block_diag

from sensing.coop_single import NodeStats
from sensing.fusion import DecisionRule, independent_rule, optimal_rule, rule_risk
from sensing.indicators import IndicatorStats
from sensing.pmf_algebra import (
    JointPmf,
    MarginalSet,
    build_g,
    build_indexer,
    joint_to_marginals,
    product_pmf,
    restrict_pmf,
)
from utils.simplex import lp_solve

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-9


class RobustProblem(BaseModel):
    """Sensing problem with marginals known up to order k_known."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    stats: IndicatorStats
    k_known: int = Field(ge=0)
    K: int = Field(ge=1)
    q1: MarginalSet
    q0: MarginalSet

    @model_validator(mode="after")
    def _consistent(self) -> "RobustProblem":
        if self.k_known > self.K:
            raise ValueError(f"k_known={self.k_known} exceeds K={self.K}")
        for q, s in ((self.q1, 1), (self.q0, 0)):
            if q.s != s or q.k != self.K or q.m != self.k_known:
                raise ValueError(f"marginals for s={s} must have k={self.K} and m={self.k_known}")
            q.check_consistency()
        return self


class RobustSolution(BaseModel):
    """Least-favorable pair, the Bayes rule against it, and the maximized risk."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p1_opt: JointPmf
    p0_opt: JointPmf
    rule: DecisionRule
    objective: float
    l1_norm: float = Field(description="Minimized ||w(1-alpha)P0 - alpha P1||_1")
    iterations: int = 0


def solve_robust(prob: RobustProblem) -> RobustSolution:
    """
    Least-favorable joint pmfs and the robust rule.

    Raises:
        Infeasible: no joint pmf reproduces the given marginals
    """
    n = 1 << prob.K
    false_alarm_weight = prob.stats.w * (1.0 - prob.stats.alpha)
    miss_weight = prob.stats.alpha
    g1 = build_g(1, prob.k_known, prob.K).matrix
    g0 = build_g(0, prob.k_known, prob.K).matrix

    cost = np.concatenate([np.zeros(2 * n), np.ones(n)])
    a_eq = np.hstack([block_diag(g1, g0), np.zeros((g1.shape[0] + g0.shape[0], n))])
    b_eq = np.concatenate([prob.q1.values, prob.q0.values])
    eye = np.eye(n)
    difference = np.hstack([-miss_weight * eye, false_alarm_weight * eye])
    a_ub = np.vstack([
        np.hstack([difference, -eye]),
        np.hstack([-difference, -eye]),
    ])
    b_ub = np.zeros(2 * n)

    result = lp_solve(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0.0, None), A_ub=a_ub, b_ub=b_ub)
    p1_values, p0_values = result.x[:n], result.x[n:2 * n]
    residual = np.abs(a_eq[:, :2 * n] @ result.x[:2 * n] - b_eq).max(initial=0.0)
    if residual > RESIDUAL_TOLERANCE:
        logger.warning(f"Robust LP constraint residual {residual:.3e} above tolerance")

    p1_opt = JointPmf(s=1, k=prob.K, values=p1_values)
    p0_opt = JointPmf(s=0, k=prob.K, values=p0_values)
    rule = optimal_rule(prob.stats, p1_opt, p0_opt)
    logger.debug(
        f"Robust solve K={prob.K} k={prob.k_known} alpha={prob.stats.alpha:.4f}: "
        f"risk {rule.risk:.6g} after {result.iterations} pivots"
    )
    return RobustSolution(
        p1_opt=p1_opt,
        p0_opt=p0_opt,
        rule=rule,
        objective=rule.risk,
        l1_norm=result.fun,
        iterations=result.iterations,
    )


def problem_from_truth(stats: IndicatorStats, p1: JointPmf, p0: JointPmf, k_known: int) -> RobustProblem:
    """Robust problem whose marginals are read off known joint pmfs."""
    return RobustProblem(
        stats=stats,
        k_known=k_known,
        K=p1.k,
        q1=joint_to_marginals(p1, k_known),
        q0=joint_to_marginals(p0, k_known),
    )


def first_order_nodes(p1: JointPmf, p0: JointPmf) -> List[NodeStats]:
    """Per-node (beta, gamma) implied by the joint pmfs."""
    q1 = joint_to_marginals(p1, 1).values[1:]
    q0 = joint_to_marginals(p0, 1).values[1:]
    return [NodeStats(beta=float(b), gamma=float(g)) for b, g in zip(q1, q0)]


def independence_risk(stats: IndicatorStats, p1: JointPmf, p0: JointPmf) -> float:
    """Risk, under the true pmfs, of the rule that wrongly assumes independent nodes."""
    rule = independent_rule(stats, first_order_nodes(p1, p0))
    return rule_risk(stats, rule.gamma_table, p1, p0)


def robust_subset_risks(
    stats: IndicatorStats,
    p1: JointPmf,
    p0: JointPmf,
    k_known: int,
    subset_size: int,
) -> List[Tuple[Tuple[int, ...], float]]:
    """
    Robust risk of every node subset of the given size.

    Marginals of order min(k_known, subset_size) are taken from the true
    pmfs restricted to the subset. The minimax selection is the entry with
    the smallest risk.
    """
    results = []
    for nodes in itertools.combinations(range(p1.k), subset_size):
        sub1, sub0 = restrict_pmf(p1, nodes), restrict_pmf(p0, nodes)
        prob = problem_from_truth(stats, sub1, sub0, min(k_known, subset_size))
        results.append((nodes, solve_robust(prob).objective))
    return results


def coupled_scenario(
    K: int,
    seed: int,
    low: float = 0.65,
    high: float = 0.85,
    coupling: float = 0.5,
) -> Tuple[JointPmf, JointPmf]:
    """
    Seeded correlated K-node pmfs with first-order statistics in [low, high].

    beta_i and gamma_i are drawn uniformly. Under 1^Rx=1 node i reads 1 when
    a shared uniform U falls below beta_i; under 1^Rx=0 node i reads 0 when a
    shared uniform V falls below gamma_i. The result is mixed with the
    independent product by weight `coupling`. With coupling 1 the pairwise
    marginals already pin the joint pmfs and every robust order from 2 on
    collapses onto the optimal risk.
    """
    rng = np.random.default_rng(seed)
    beta = rng.uniform(low, high, size=K)
    gamma = rng.uniform(low, high, size=K)
    indexer = build_indexer(K)
    lookup = indexer.index_of

    def comonotone(levels: np.ndarray, reads_one: bool) -> np.ndarray:
        order = np.argsort(-levels, kind="stable")
        padded = np.concatenate([[1.0], levels[order], [0.0]])
        values = np.zeros(indexer.size)
        full = (1 << K) - 1
        mask = 0
        for j in range(K + 1):
            if j > 0:
                mask |= 1 << int(order[j - 1])
            pattern = mask if reads_one else full ^ mask
            values[lookup[pattern]] += padded[j] - padded[j + 1]
        return values

    p1 = coupling * comonotone(beta, True) + (1.0 - coupling) * product_pmf(1, beta).values
    p0 = coupling * comonotone(gamma, False) + (1.0 - coupling) * product_pmf(0, gamma).values
    logger.debug(f"Coupled scenario K={K} seed={seed}: beta={np.round(beta, 4)}, gamma={np.round(gamma, 4)}")
    return JointPmf(s=1, k=K, values=p1), JointPmf(s=0, k=K, values=p0)

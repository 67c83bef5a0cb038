"""
Service for single-shot sensing computations behind the CLI subcommands and the HTTP API.
"""

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np

from pipeline.models.models import (
    ConnectivityRequest,
    ConvertPmfRequest,
    NeighborhoodRequest,
    RiskCurveRequest,
    RobustRequest,
    RunReport,
)
from pipeline.utils.helpers import render_csv
from sensing.coop_single import coop_risk, single_coop_rule
from sensing.fusion import critical_alpha, optimal_rule
from sensing.geo import (
    RuleConfig,
    connectivity,
    neighborhood,
    select_cooperative_node,
)
from sensing.indicators import (
    IndicatorStats,
    draw_history_counts,
    expected_plugin_risk,
    inference_rule,
    traditional_risk,
    weight_from_outage,
)
from sensing.pmf_algebra import (
    JointPmf,
    MarginalSet,
    complete_joint,
    joint_to_marginals,
    pmf_to_rows,
    product_pmf,
)
from sensing.robust import RobustProblem, independence_risk, problem_from_truth, solve_robust
from utils.monte_carlo import BernoulliEstimate, estimate_mean, run_chunked, spawn_seeds

logger = logging.getLogger(__name__)


def _bits(table) -> str:
    return "".join(str(int(g)) for g in table)


class SensingService:
    """Runs one sensing computation and packages it as a RunReport."""

    def __init__(self, threads: Optional[int] = None):
        """
        Initialize the service.

        Args:
            threads: Worker threads for Monte Carlo work; None defers to CRN_SENSE_THREADS
        """
        self.threads = threads

    def node_critical_alpha(self, w: float, node) -> float:
        """alpha_C of a single cooperative node."""
        p1 = product_pmf(1, [node.beta])
        p0 = product_pmf(0, [node.gamma])
        return critical_alpha(w, p1, p0)

    def plugin_simulation(self, alpha: float, w: float, depth: int, trials: int, seed: int):
        """Simulated risk of the Laplace plug-in rule at one alpha."""

        def draw(rng: np.random.Generator, n: int) -> np.ndarray:
            ones = draw_history_counts(alpha, depth, n, rng)
            passes = (ones + 1) * (w + 1.0) >= w * (depth + 2)
            return np.where(passes, w * (1.0 - alpha), alpha)

        return estimate_mean(run_chunked(draw, trials, seed, self.threads))

    def risk_curve(self, request: RiskCurveRequest, seed: int = 0, mc_trials: int = 0) -> RunReport:
        """
        Bayesian risk against alpha for traditional sensing, the inference rule,
        the plug-in rule and single cooperative nodes.
        """
        alphas = request.alphas.values()
        seeds = spawn_seeds(seed, len(alphas))
        columns = ["alpha", "traditional", "inference", "plugin_expected"]
        if mc_trials:
            columns += ["plugin_mc", "plugin_mc_se", "plugin_mc_lo", "plugin_mc_hi"]
        columns += [f"coop{i + 1}" for i in range(len(request.nodes))]
        columns += [f"coop{i + 1}_rule" for i in range(len(request.nodes))]

        rows = []
        dominance_gap = 0.0
        for alpha, alpha_seed in zip(alphas, seeds):
            stats = IndicatorStats(alpha=float(alpha), w=request.w)
            traditional = traditional_risk(stats)
            inference = inference_rule(stats).risk
            dominance_gap = max(dominance_gap, inference - traditional)
            row: List[Any] = [alpha, traditional, inference, expected_plugin_risk(stats.alpha, request.w, request.depth)]
            if mc_trials:
                estimate = self.plugin_simulation(stats.alpha, request.w, request.depth, mc_trials, alpha_seed)
                low, high = estimate.interval
                row += [estimate.mean, estimate.standard_error, low, high]
            row += [coop_risk(stats, node) for node in request.nodes]
            row += [single_coop_rule(stats, node).rule_kind.value for node in request.nodes]
            rows.append(row)

        markers = {"inference": IndicatorStats(alpha=0.0, w=request.w).threshold}
        for i, node in enumerate(request.nodes):
            markers[f"coop{i + 1}"] = self.node_critical_alpha(request.w, node)
        metadata = {"config": request.model_dump(mode="json"), "seed": seed, "alpha_c": markers, "mc_trials": mc_trials}
        if dominance_gap > 0.0:
            logger.warning(f"Inference risk exceeded traditional risk by {dominance_gap:.3g}")
        return RunReport(
            experiment="risk-curve",
            seed=seed,
            config=request.model_dump(mode="json"),
            csv={"risk_curve.csv": render_csv(columns, rows, metadata)},
            summary={"alpha_c": markers, "points": len(rows)},
        )

    def _robust_problem(self, request: RobustRequest, stats: IndicatorStats):
        if request.p1 is not None:
            p1 = JointPmf(s=1, k=request.nodes, values=request.p1)
            p0 = JointPmf(s=0, k=request.nodes, values=request.p0)
            return problem_from_truth(stats, p1, p0, request.k_known), (p1, p0)
        q1 = MarginalSet(s=1, m=request.k_known, k=request.nodes, values=request.q1)
        q0 = MarginalSet(s=0, m=request.k_known, k=request.nodes, values=request.q0)
        return RobustProblem(stats=stats, k_known=request.k_known, K=request.nodes, q1=q1, q0=q0), None

    def robust(self, request: RobustRequest, seed: int = 0) -> RunReport:
        """Robust risk and least-favorable pmfs at each requested alpha."""
        columns = ["alpha", "k_known", "robust_risk", "l1_norm", "iterations", "gamma"]
        truth_known = request.p1 is not None
        if truth_known:
            columns += ["optimal_risk", "independence_risk"]
        rows, pmf_rows = [], []
        for alpha in request.alphas:
            stats = IndicatorStats(alpha=alpha, w=request.w)
            problem, truth = self._robust_problem(request, stats)
            solution = solve_robust(problem)
            row: List[Any] = [alpha, request.k_known, solution.objective, solution.l1_norm, solution.iterations, _bits(solution.rule.gamma_table)]
            if truth is not None:
                row += [optimal_rule(stats, *truth).risk, independence_risk(stats, *truth)]
            rows.append(row)
            for (index, mask, p1), (_, _, p0) in zip(
                pmf_to_rows(solution.p1_opt.values, request.nodes), pmf_to_rows(solution.p0_opt.values, request.nodes)
            ):
                pmf_rows.append([alpha, index, mask, p1, p0])
        config = request.model_dump(mode="json")
        metadata = {"config": config, "seed": seed}
        return RunReport(
            experiment="robust",
            seed=seed,
            config=config,
            csv={
                "robust.csv": render_csv(columns, rows, metadata),
                "least_favorable.csv": render_csv(["alpha", "index", "mask", "p1", "p0"], pmf_rows, metadata),
            },
            summary={"risks": {str(r[0]): r[1] for r in rows}},
        )

    def _rule(self, request: NeighborhoodRequest) -> RuleConfig:
        update: Dict[str, Any] = {}
        if request.zeta is not None:
            update["w"] = weight_from_outage(request.zeta)
        if request.mask is not None:
            update["mask"] = request.mask
        return request.rule.model_copy(update=update)

    def neighborhood(self, request: NeighborhoodRequest, seed: int = 0) -> RunReport:
        """Per-cell alpha/admissibility map, boundary and area summary; optionally ranks placements."""
        rule = self._rule(request)
        result = neighborhood(request.scene, request.model, rule)
        columns = ["r", "theta", "alpha", "alpha_c", "admissible"]
        single = result.beta is not None
        if single:
            columns += ["beta", "gamma"]
        rows = []
        for i, r in enumerate(result.radii):
            for j, theta in enumerate(result.angles):
                row = [r, theta, result.alpha[i, j], result.alpha_c[i, j], result.admissible[i, j]]
                if single:
                    row += [result.beta[i, j], result.gamma[i, j]]
                rows.append(row)

        summary: Dict[str, Any] = {
            "area": result.area,
            "coverage_area": result.coverage_area,
            "coverage_radius": result.coverage_radius,
            "ratio": result.ratio,
        }
        if request.candidates:
            zeta = request.zeta if request.zeta is not None else 1.0 / (rule.w + 1.0)
            summary["selected_candidate"] = select_cooperative_node(
                request.candidates, request.scene, request.model, zeta, mask=request.mask, rule_config=rule
            )
        config = request.model_dump(mode="json")
        metadata = {"config": config, "seed": seed, "summary": summary}
        boundary = list(zip(result.angles, result.boundary()))
        logger.info(
            f"Neighborhood area {result.area:.4f} vs coverage {result.coverage_area:.4f} (ratio {result.ratio:.4f})"
        )
        return RunReport(
            experiment="neighborhood",
            seed=seed,
            config=config,
            csv={
                "neighborhood.csv": render_csv(columns, rows, metadata),
                "boundary.csv": render_csv(["theta", "r"], boundary, metadata),
            },
            summary=summary,
        )

    def connectivity(self, request: ConnectivityRequest, seed: int = 0) -> RunReport:
        """Directed edge list among the given radios."""
        graph = connectivity(request.radios, request.scene, request.model, request.rule)
        edges = sorted(graph.edges(data=True))
        rows = [[src, dst, data["alpha"], data["alpha_c"]] for src, dst, data in edges]
        one_way = sorted([src, dst] for src, dst in graph.edges if not graph.has_edge(dst, src))
        config = request.model_dump(mode="json")
        summary = {"radios": graph.number_of_nodes(), "edges": graph.number_of_edges(), "one_way": one_way}
        metadata = {"config": config, "seed": seed, "summary": summary}
        return RunReport(
            experiment="connectivity",
            seed=seed,
            config=config,
            csv={"edges.csv": render_csv(["src", "dst", "alpha", "alpha_c"], rows, metadata)},
            summary=summary,
        )

    def convert_pmf(self, request: ConvertPmfRequest, seed: int = 0) -> RunReport:
        """Joint pmf to marginals of order m, or marginals of order k-1 plus the tail mass to the joint."""
        if request.direction == "joint_to_marginals":
            joint = JointPmf(s=request.s, k=request.k, values=request.values)
            values = joint_to_marginals(joint, request.m).values
        else:
            m = request.k - 1 if request.m is None else request.m
            marginals = MarginalSet(s=request.s, m=m, k=request.k, values=request.values)
            values = complete_joint(marginals, request.tail_mass).values
        config = request.model_dump(mode="json")
        rows = pmf_to_rows(values, request.k)
        return RunReport(
            experiment="convert-pmf",
            seed=seed,
            config=config,
            csv={"pmf.csv": render_csv(["index", "mask", "value"], rows, {"config": config})},
            summary={"values": [float(v) for v in values], "sum": float(np.sum(values))},
        )

    def outage_check(self, simulate, trials: int, seed: int) -> Dict[str, float]:
        """
        Empirical Pr(1^link=1 | declared 1) from a link simulator.

        Args:
            simulate: Callable (rng, n) -> int array with columns (1^Tx, 1^link, decision)
            trials: Monte Carlo trials
            seed: Root seed
        """
        outcomes = run_chunked(simulate, trials, seed, self.threads)
        declared = outcomes[:, 2] == 1
        success = BernoulliEstimate(successes=int(outcomes[declared, 1].sum()), trials=int(declared.sum()))
        tx = outcomes[:, 0] == 1
        alpha = BernoulliEstimate(successes=int(outcomes[tx, 1].sum()), trials=int(tx.sum()))
        low, high = success.interval
        return {
            "declared": success.trials,
            "success": success.mean,
            "success_se": success.standard_error,
            "success_lo": low,
            "success_hi": high,
            "alpha_mc": alpha.mean,
            "alpha_mc_se": alpha.standard_error if not math.isnan(alpha.standard_error) else 0.0,
        }

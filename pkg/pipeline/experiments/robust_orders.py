"""
Robust sensing on a seeded six-node scenario as the known marginal order grows.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Tuple

from pipeline.experiments.base_experiment import BaseExperiment
from pipeline.models.models import Fig7Config
from pipeline.utils.helpers import render_csv
from sensing.fusion import optimal_rule
from sensing.indicators import IndicatorStats, inference_rule
from sensing.robust import (
    coupled_scenario,
    independence_risk,
    problem_from_truth,
    robust_subset_risks,
    solve_robust,
)
from utils.monte_carlo import default_threads


class RobustOrderExperiment(BaseExperiment):
    """Robust risk for each known order against the optimal and independence baselines."""

    def __init__(self, service=None):
        super().__init__("fig7", "robust sensing versus known marginal order", service)

    def _row(self, alpha: float, config: Fig7Config, p1, p0, orders: List[int]) -> List[Any]:
        stats = IndicatorStats(alpha=alpha, w=config.w)
        row: List[Any] = [alpha, inference_rule(stats).risk, optimal_rule(stats, p1, p0).risk, independence_risk(stats, p1, p0)]
        for k in orders:
            row.append(solve_robust(problem_from_truth(stats, p1, p0, k)).objective)
        return row

    def _run(self, config: Fig7Config, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        p1, p0 = coupled_scenario(config.nodes, config.scenario_seed, config.low, config.high, config.coupling)
        orders = config.resolved_orders()
        alphas = [float(a) for a in config.alphas.values()]
        workers = self.service.threads or default_threads()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda a: self._row(a, config, p1, p0, orders), alphas))
        else:
            rows = [self._row(a, config, p1, p0, orders) for a in alphas]

        violations = 0
        for row in rows:
            robust = row[4:]
            for k, (looser, tighter) in enumerate(zip(robust, robust[1:])):
                if tighter > looser + 1e-9:
                    violations += 1
                    self.logger.warning(
                        f"alpha={row[0]}: robust risk rose from order {orders[k]} to {orders[k + 1]}"
                    )

        stats = IndicatorStats(alpha=config.selection_alpha, w=config.w)
        ranked = robust_subset_risks(stats, p1, p0, config.selection_order, config.selection_size)
        best_subset, best_risk = min(ranked, key=lambda item: item[1])
        self.logger.info(f"Minimax subset {best_subset} with robust risk {best_risk:.6g}")

        columns = ["alpha", "no_cooperation", "optimal", "independence"] + [f"robust_k{k}" for k in orders]
        scenario = {"p1": [float(v) for v in p1.values], "p0": [float(v) for v in p0.values]}
        metadata = {"config": config.model_dump(mode="json"), "seed": seed, "scenario": scenario}
        selection_rows = [["-".join(str(n) for n in nodes), risk] for nodes, risk in ranked]
        csv = {
            "fig7.csv": render_csv(columns, rows, metadata),
            "fig7_selection.csv": render_csv(["subset", "robust_risk"], selection_rows, metadata),
        }
        summary = {
            "order_violations": violations,
            "selected_subset": list(best_subset),
            "selected_risk": best_risk,
            "scenario": scenario,
        }
        return csv, summary

"""
Two cooperative nodes whose readings are correlated when CR-Rx is busy.
"""

from typing import Any, Dict, List, Tuple

from pipeline.experiments.base_experiment import BaseExperiment
from pipeline.models.models import Fig6Config
from pipeline.utils.helpers import render_csv
from sensing.coop_single import coop_risk
from sensing.errors import InvalidPmf
from sensing.fusion import (
    TwoNodeCorr,
    correlated_pmfs,
    critical_alpha,
    delta_bounds,
    pattern_thresholds,
    two_node_correlated,
    two_node_independent,
)
from sensing.indicators import IndicatorStats


class CorrelatedPairExperiment(BaseExperiment):
    """Risk curves and decision tables for a range of correlations."""

    def __init__(self, service=None):
        super().__init__("fig6", "two correlated cooperative nodes", service)

    def _pair(self, config: Fig6Config, rho: float) -> TwoNodeCorr:
        pair = TwoNodeCorr(
            beta1=config.node1.beta,
            beta2=config.node2.beta,
            gamma1=config.node1.gamma,
            gamma2=config.node2.gamma,
            rho12=rho,
        )
        low, high = delta_bounds(pair)
        if not low <= pair.delta <= high:
            raise InvalidPmf(f"rho12={rho} gives Delta={pair.delta:.4g} outside [{low:.4g}, {high:.4g}]")
        return pair

    def _run(self, config: Fig6Config, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        pairs = [self._pair(config, rho) for rho in config.rhos]
        pmfs = [correlated_pmfs(pair) for pair in pairs]
        columns = ["alpha", "single"]
        for rho in config.rhos:
            columns += [f"rho{rho:g}", f"rho{rho:g}_rule"]
        columns.append("independent_case")

        rows: List[List[Any]] = []
        for alpha in config.alphas.values():
            stats = IndicatorStats(alpha=float(alpha), w=config.w)
            row: List[Any] = [alpha, coop_risk(stats, config.node1)]
            for pair in pairs:
                rule, label = two_node_correlated(stats, pair)
                row += [rule.risk, label]
            row.append(two_node_independent(stats, config.node1, config.node2)[1])
            rows.append(row)

        single_c = self.service.node_critical_alpha(config.w, config.node1)
        markers = {"single": single_c}
        thresholds = {}
        for rho, pair, (p1, p0) in zip(config.rhos, pairs, pmfs):
            alpha_c = critical_alpha(config.w, p1, p0)
            markers[f"rho{rho:g}"] = alpha_c
            thresholds[f"rho{rho:g}"] = [float(t) for t in pattern_thresholds(config.w, p1, p0)]
            if alpha_c > single_c + 1e-12:
                self.logger.warning(f"rho12={rho}: alpha_C {alpha_c:.4f} above the single-node value {single_c:.4f}")
            self.logger.debug(f"rho12={rho}: Delta={pair.delta:.5f}, alpha_C={alpha_c:.5f}")

        summary = {"alpha_c": markers, "pattern_thresholds": thresholds, "delta_bounds": list(delta_bounds(pairs[0])) if pairs else []}
        metadata = {"config": config.model_dump(mode="json"), "seed": seed, "alpha_c": markers, "pattern_thresholds": thresholds}
        return {"fig6.csv": render_csv(columns, rows, metadata)}, summary


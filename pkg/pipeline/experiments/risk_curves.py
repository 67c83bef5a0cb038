"""
Risk-versus-alpha curves without cooperation and with one cooperative node.
"""

from typing import Any, Dict, Tuple

from pipeline.experiments.base_experiment import BaseExperiment
from pipeline.models.models import Fig3Config, RiskCurveRequest


class RiskCurveExperiment(BaseExperiment):
    """Traditional, known-alpha, plug-in and single-node cooperative risk curves."""

    def __init__(self, service=None):
        super().__init__("fig3", "Bayesian risk versus spectrum availability", service)

    def _run(self, config: Fig3Config, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        request = RiskCurveRequest(w=config.w, depth=config.depth, alphas=config.alphas, nodes=config.nodes)
        report = self.service.risk_curve(request, seed=seed, mc_trials=config.mc_trials)
        csv = {"fig3.csv": report.csv["risk_curve.csv"]}
        self.logger.info(f"Critical boundaries: {report.summary['alpha_c']}")
        return csv, report.summary

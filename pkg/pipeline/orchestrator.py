"""
Orchestrator for the sensing experiment pipeline.
"""
import json
import logging
import os
from typing import Dict, List, Optional

from pipeline.experiments.base_experiment import BaseExperiment
from pipeline.experiments.correlated_pair import CorrelatedPairExperiment
from pipeline.experiments.neighborhoods import NeighborhoodExperiment, ObstacleExperiment
from pipeline.experiments.risk_curves import RiskCurveExperiment
from pipeline.experiments.robust_orders import RobustOrderExperiment
from pipeline.models.models import ExperimentConfig, RunReport
from pipeline.utils.helpers import write_report
from services.sensing_service import SensingService

logger = logging.getLogger(__name__)


def resolve_seed(cli_seed: Optional[int], config_seed: Optional[int] = None) -> int:
    """CLI flag, then CRN_SENSE_SEED, then the config file, then 0."""
    if cli_seed is not None:
        return cli_seed
    env_seed = os.getenv("CRN_SENSE_SEED")
    if env_seed:
        return int(env_seed)
    return config_seed if config_seed is not None else 0


def load_config(path: str, **overrides) -> ExperimentConfig:
    """
    Read and validate one experiment configuration.

    Raises:
        FileNotFoundError, json.JSONDecodeError, pydantic.ValidationError
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.model_validate(data)


class ExperimentOrchestrator:
    """
    Runs one experiment stage per figure and writes its outputs.
    """

    def __init__(self, threads: Optional[int] = None):
        """
        Initialize the orchestrator.

        Args:
            threads: Worker threads for parallel stages; None defers to CRN_SENSE_THREADS
        """
        self.service = SensingService(threads=threads)
        self.experiments: Dict[str, BaseExperiment] = {
            "fig3": RiskCurveExperiment(self.service),
            "fig4": NeighborhoodExperiment(self.service),
            "fig5": ObstacleExperiment(self.service),
            "fig6": CorrelatedPairExperiment(self.service),
            "fig7": RobustOrderExperiment(self.service),
        }
        logger.info(f"ExperimentOrchestrator initialized with {len(self.experiments)} experiments")

    def run(self, config: ExperimentConfig, seed: Optional[int] = None) -> RunReport:
        """
        Run the experiment a configuration selects.

        Args:
            config: Validated experiment configuration
            seed: Overrides the configured seed

        Returns:
            RunReport whose config is the fully resolved configuration
        """
        resolved_seed = resolve_seed(seed, config.seed)
        config = config.model_copy(update={"seed": resolved_seed})
        experiment = self.experiments[config.experiment]
        report = experiment(config.section(), resolved_seed)
        return report.model_copy(update={"config": config.model_dump(mode="json")})

    def run_and_write(
        self,
        config: ExperimentConfig,
        seed: Optional[int] = None,
        out_dir: Optional[str] = None,
        gnuplot: bool = False,
    ) -> List[str]:
        """Run an experiment and write its CSV files and report.json."""
        report = self.run(config, seed)
        return write_report(report, out_dir or config.output_dir, gnuplot)

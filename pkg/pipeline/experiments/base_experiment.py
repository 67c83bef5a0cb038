"""
Base experiment for the cognitive radio sensing pipeline.
"""

import logging
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple

from pipeline.models.models import RunReport
from services.sensing_service import SensingService


class BaseExperiment(ABC):
    """
    Base class for all experiments in the pipeline.

    Subclasses implement _run, which returns the CSV payloads and a summary
    for one validated configuration section.
    """

    def __init__(self, name: str, stage_description: str, service: Optional[SensingService] = None):
        """
        Initialize the base experiment.

        Args:
            name: Experiment id, also the report's experiment field
            stage_description: What the experiment reproduces
            service: Shared sensing service
        """
        self.name = name
        self.stage_description = stage_description
        self.service = service or SensingService()
        self.logger = logging.getLogger(f"experiment.{name}")

    @abstractmethod
    def _run(self, config: Any, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        """
        Run the experiment.

        Args:
            config: The experiment's configuration section
            seed: Root seed

        Returns:
            (CSV file name to contents, summary statistics)
        """

    def __call__(self, config: Any, seed: int) -> RunReport:
        self.logger.info(f"Starting {self.name}: {self.stage_description}")
        self.logger.debug(f"Resolved parameters: {config.model_dump(mode='json')}")
        start = time.perf_counter()
        csv, summary = self._run(config, seed)
        elapsed = time.perf_counter() - start
        self.logger.info(f"Finished {self.name} in {elapsed:.2f}s ({len(csv)} files)")
        return RunReport(
            experiment=self.name,
            seed=seed,
            wall_time=elapsed,
            config=config.model_dump(mode="json"),
            csv=csv,
            summary=summary,
        )

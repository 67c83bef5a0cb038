"""
Flask server for the cognitive radio spectrum sensing toolkit.
This file provides a REST API over the same services as the CLI.
"""

import os
import logging
import time
from typing import Any, Dict

from flask import Flask, request, jsonify
from dotenv import load_dotenv
from pydantic import ValidationError

from pipeline.models.models import (
    ConnectivityRequest,
    ConvertPmfRequest,
    ExperimentConfig,
    NeighborhoodRequest,
    RiskCurveRequest,
    RobustRequest,
)
from pipeline.orchestrator import ExperimentOrchestrator, resolve_seed
from pipeline.utils.helpers import to_jsonable
from sensing.errors import DegenerateStats, Infeasible, InvalidPmf, NumericFailure, SizeLimit, Unbounded

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=getattr(logging, os.getenv("CRN_SENSE_LOG", "INFO").upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[logging.StreamHandler()]
)
logger = logging.getLogger('server')

ENDPOINTS = {
    "risk-curve": (RiskCurveRequest, "risk_curve"),
    "robust": (RobustRequest, "robust"),
    "neighborhood": (NeighborhoodRequest, "neighborhood"),
    "connectivity": (ConnectivityRequest, "connectivity"),
    "convert-pmf": (ConvertPmfRequest, "convert_pmf"),
}

# Initialize Flask app
app = Flask(__name__)

# Initialize the orchestrator at module load time
orchestrator = ExperimentOrchestrator()


def _error(message: str, status: int):
    return jsonify({"error": message}), status


def _respond(report) -> Any:
    payload: Dict[str, Any] = report.model_dump()
    return jsonify(to_jsonable(payload))


def _handle(compute):
    """Run a computation and map failures to HTTP status codes."""
    try:
        return _respond(compute())
    except (ValidationError, SizeLimit, ValueError) as e:
        logger.error(f"Invalid request: {e}")
        return _error(str(e), 400)
    except (DegenerateStats, InvalidPmf, Infeasible) as e:
        logger.error(f"Infeasible statistics: {e}")
        return _error(str(e), 422)
    except (Unbounded, NumericFailure) as e:
        logger.error(f"Numeric failure: {e}", exc_info=True)
        return _error(str(e), 500)
    except Exception as e:
        logger.error(f"Error processing request: {str(e)}", exc_info=True)
        return _error(f"Error processing request: {str(e)}", 500)


def _compute(name: str, body: Dict[str, Any]):
    model, method = ENDPOINTS[name]
    seed = resolve_seed(body.pop("seed", None))
    started = time.perf_counter()
    report = getattr(orchestrator.service, method)(model.model_validate(body), seed=seed)
    return report.model_copy(update={"wall_time": time.perf_counter() - started})


def _make_endpoint(name: str):
    def endpoint():
        body = request.get_json(silent=True)
        if not isinstance(body, dict):
            logger.error("Request body is not a JSON object")
            return _error("Request body must be a JSON object", 400)
        logger.info(f"Received {name} request")
        return _handle(lambda: _compute(name, body))

    endpoint.__name__ = name.replace("-", "_")
    return endpoint


for _name in ENDPOINTS:
    app.add_url_rule(f"/{_name}", view_func=_make_endpoint(_name), methods=["POST"])


@app.route('/reproduce/<figure>', methods=['POST'])
def reproduce(figure: str):
    """
    Reproduce one figure. The optional body is an experiment configuration
    without the experiment field.
    """
    body = request.get_json(silent=True) or {}
    if not isinstance(body, dict):
        return _error("Request body must be a JSON object", 400)
    logger.info(f"Received reproduce request for {figure}")

    def compute():
        config = ExperimentConfig.model_validate({**body, "experiment": figure})
        return orchestrator.run(config)

    return _handle(compute)


@app.route('/', methods=['GET'])
def health_check():
    """
    Health check endpoint to verify that the server is running.
    """
    return jsonify({
        "status": "healthy",
        "service": "Cognitive Radio Spectrum Sensing API",
        "experiments": sorted(orchestrator.experiments),
    })


if __name__ == "__main__":
    # Set port from environment variable or default to 8000
    port = int(os.getenv("PORT", 8000))

    # Run the Flask app with debug enabled in development
    debug_mode = os.getenv("FLASK_ENV", "production") == "development"

    logger.info(f"Starting server on port {port}, debug mode: {debug_mode}")
    app.run(host="0.0.0.0", port=port, debug=debug_mode)

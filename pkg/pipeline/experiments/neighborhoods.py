"""
Neighborhood maps around CR-Tx under a primary system, with and without cooperation.
"""

from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from pipeline.experiments.base_experiment import BaseExperiment
from pipeline.models.models import Fig4Config, Fig5Config
from pipeline.utils.helpers import render_csv
from sensing.geo import (
    CognitiveRadio,
    NeighborhoodMap,
    PowerModel,
    Scene,
    connectivity,
    decision_table,
    link_tables,
    neighborhood,
    select_cooperative_node,
    simulate_link,
    to_polar,
)


def boundary_csv(maps: Sequence[Tuple[str, NeighborhoodMap]], metadata: Dict[str, Any]) -> str:
    """One boundary polyline per map, sharing the angle column."""
    angles = maps[0][1].angles
    columns = ["theta"] + [name for name, _ in maps]
    boundaries = [m.boundary() for _, m in maps]
    rows = [[theta] + [b[j] for b in boundaries] for j, theta in enumerate(angles)]
    return render_csv(columns, rows, metadata)


def area_summary(maps: Sequence[Tuple[str, NeighborhoodMap]]) -> Dict[str, Dict[str, float]]:
    summary = {}
    for name, m in maps:
        toward, away = m.half_plane_areas()
        summary[name] = {"area": m.area, "ratio": m.ratio, "toward_ps": toward, "away_from_ps": away}
    return summary


def fused_table(scene: Scene, model: PowerModel, rx: Tuple[float, float], w: float) -> np.ndarray:
    """Bayes decision table of CR-Tx for a receiver position, over the scene's cooperative readings."""
    return decision_table(link_tables(rx, scene, model), w)


class NeighborhoodExperiment(BaseExperiment):
    """Coverage, PS-limited neighborhoods, cooperative node placement and link direction."""

    def __init__(self, service=None):
        super().__init__("fig4", "neighborhoods and cooperative node placement", service)

    def _run(self, config: Fig4Config, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        model, rule = config.model, config.rule
        maps: List[Tuple[str, NeighborhoodMap]] = [
            ("coverage", neighborhood(Scene(), model, rule)),
            ("ps_near", neighborhood(Scene(ps_position=config.ps_near), model, rule)),
            ("ps_far", neighborhood(Scene(ps_position=config.ps_far), model, rule)),
        ]
        far = Scene(ps_position=config.ps_far)
        for i, candidate in enumerate(config.candidates):
            maps.append((f"ps_far_node{i + 1}", neighborhood(far.model_copy(update={"nodes": [candidate]}), model, rule)))

        zeta = 1.0 / (rule.w + 1.0)
        selected = select_cooperative_node(config.candidates, far, model, zeta, rule_config=rule)
        self.logger.info(f"Selected cooperative node {selected + 1} at {config.candidates[selected]}")

        radios = [CognitiveRadio(name="tx", position=(0.0, 0.0)), CognitiveRadio(name="rx", position=config.radio)]
        helped = far.model_copy(update={"nodes": [config.candidates[selected]]})
        alone_graph = connectivity(radios, far, model, rule)
        helped_graph = connectivity(radios, helped, model, rule)
        links = {
            "without_cooperation": sorted([list(e) for e in alone_graph.edges]),
            "with_cooperation": sorted([list(e) for e in helped_graph.edges]),
        }
        edge_rows = [
            [label, src, dst, data["alpha"], data["alpha_c"]]
            for label, graph in (("without_cooperation", alone_graph), ("with_cooperation", helped_graph))
            for src, dst, data in sorted(graph.edges(data=True))
        ]

        summary: Dict[str, Any] = {
            "areas": area_summary(maps),
            "coverage_radius": maps[0][1].coverage_radius,
            "selected_candidate": selected,
            "links": links,
        }
        if config.mc_trials:
            rx = to_polar(config.radio, helped)
            table = fused_table(helped, model, rx, rule.w)
            summary["outage_check"] = self.service.outage_check(
                lambda rng, n: simulate_link(rx, helped, model, table, n, rng), config.mc_trials, seed
            )
            self.logger.info(f"Outage check: {summary['outage_check']}")

        metadata = {"config": config.model_dump(mode="json"), "seed": seed}
        csv = {
            "fig4_boundary.csv": boundary_csv(maps, metadata),
            "fig4_links.csv": render_csv(["case", "src", "dst", "alpha", "alpha_c"], edge_rows, metadata),
        }
        return csv, summary


class ObstacleExperiment(BaseExperiment):
    """Neighborhoods behind an obstacle at CR-Tx for several obstacle sizes."""

    def __init__(self, service=None):
        super().__init__("fig5", "neighborhoods with shadowing at CR-Tx", service)

    def _run(self, config: Fig5Config, seed: int) -> Tuple[Dict[str, str], Dict[str, Any]]:
        maps: List[Tuple[str, NeighborhoodMap]] = []
        for kappa in config.kappas:
            scene = Scene(ps_position=config.ps_position, b_tx=config.b_tx, kappa=kappa)
            maps.append((f"kappa{kappa:g}", neighborhood(scene, config.model, config.rule)))
            helped = scene.model_copy(update={"nodes": [config.node]})
            maps.append((f"kappa{kappa:g}_node", neighborhood(helped, config.model, config.rule)))
        metadata = {"config": config.model_dump(mode="json"), "seed": seed}
        return {"fig5_boundary.csv": boundary_csv(maps, metadata)}, {"areas": area_summary(maps)}

"""
Geometry of opportunistic links.

Received PS power in dB is normal around K0 - 10a log10(d) - b, superposed
with noise through a three-branch log-normal approximation. Indicator events
at CR-Tx, CR-Rx and cooperative nodes are independent given 1^PS, so every
link probability is a two-term mixture of products of Q-function values.

Positions are Cartesian points. A polar coordinate (r, theta) is taken
around CR-Tx with theta measured from the direction of the PS.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sensing.coop_single import NodeStats
from sensing.errors import DegenerateStats
from sensing.fusion import critical_alpha_batch
from sensing.indicators import alpha_from_ps_conditionals, weight_from_outage
from sensing.pmf_algebra import build_indexer, pattern_positions
from utils.gaussian import below_threshold_probability, q_inverse

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


class PowerModel(BaseModel):
    """Log-normal received-power model in dB."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mu0: float = Field(default=0.0, description="Mean noise power (dB)")
    sigma0_sq: float = Field(default=1.0, gt=0.0, description="Noise variance (dB^2)")
    sigmaS_sq: float = Field(default=8.0, gt=0.0, description="PS signal variance (dB^2)")
    K0: float = Field(default=10.0, description="Path-loss constant (dB)")
    a: float = Field(default=3.0, gt=0.0, description="Path-loss exponent")
    L0: float = Field(
        default=3.0,
        description="Constant of tau_Rx = L0 - 10a log10(r); absorbs CR-Tx power and the outage threshold",
    )
    tau_tx: float = Field(default=3.0, description="Detection threshold at CR-Tx (dB)")
    tau_co: float = Field(default=3.0, description="Detection threshold at cooperative nodes (dB)")
    ps_idle_prob: float = Field(default=0.6, ge=0.0, le=1.0, description="Pr(1^PS = 1)")

    @model_validator(mode="after")
    def _signal_wider_than_noise(self) -> "PowerModel":
        if self.sigmaS_sq <= self.sigma0_sq:
            raise ValueError(f"sigmaS_sq={self.sigmaS_sq} must exceed sigma0_sq={self.sigma0_sq}")
        return self

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0_sq)

    @property
    def sigmaS(self) -> float:
        return math.sqrt(self.sigmaS_sq)

    @property
    def prior(self) -> np.ndarray:
        """Pr(1^PS = s) indexed by s."""
        return np.array([1.0 - self.ps_idle_prob, self.ps_idle_prob])


class Scene(BaseModel):
    """PS, CR-Tx and cooperative node placement."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    ps_position: Optional[Point] = Field(default=None, description="None when no PS is present")
    tx_position: Point = Field(default=(0.0, 0.0), description="CR-Tx position")
    nodes: List[Point] = Field(default_factory=list, description="Cooperative node positions")
    b_tx: float = Field(default=0.0, ge=0.0, description="Shadowing at CR-Tx (dB)")
    kappa: float = Field(default=1.0, gt=0.0, description="Obstacle size")

    @property
    def heading(self) -> float:
        """Direction of the PS seen from CR-Tx."""
        if self.ps_position is None:
            return 0.0
        return math.atan2(self.ps_position[1] - self.tx_position[1], self.ps_position[0] - self.tx_position[0])

    @property
    def ps_distance(self) -> float:
        if self.ps_position is None:
            return math.inf
        return math.dist(self.ps_position, self.tx_position)


class CognitiveRadio(BaseModel):
    """A named CR whose links are tested in both directions; b shadows it only while it transmits."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = Field(description="Node label in the connectivity graph")
    position: Point = Field(description="Cartesian position")
    b: float = Field(default=0.0, ge=0.0, description="Shadowing at this radio (dB)")


class AngularMask(BaseModel):
    """Directions within epsilon of center, both relative to the PS direction."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    center: float = Field(default=0.0, description="Sector center (rad)")
    epsilon: float = Field(gt=0.0, le=math.pi, description="Sector half-width (rad)")

    def contains(self, theta: np.ndarray) -> np.ndarray:
        offset = np.angle(np.exp(1j * (np.asarray(theta) - self.center)))
        return np.abs(offset) <= self.epsilon


class RuleConfig(BaseModel):
    """Outage weight and the polar grid a neighborhood is evaluated on."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    w: float = Field(default=9.0, gt=0.0, description="Weighting factor of false alarms")
    radial_cells: int = Field(default=200, ge=1, description="Grid cells along the radius")
    angular_cells: int = Field(default=360, ge=1, description="Grid cells around CR-Tx")
    radius_factor: float = Field(default=2.0, gt=0.0, description="Grid radius as a multiple of the coverage radius")
    mask: Optional[AngularMask] = Field(default=None, description="Sector the area is restricted to")


class LinkTables(BaseModel):
    """
    Joint masses J_s[pattern] = Pr(1^Tx=1, 1^Rx=s, cooperative readings = pattern).

    p1 and p0 are all zeros when their conditioning event has no mass.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    joint1: np.ndarray
    joint0: np.ndarray

    @property
    def alpha(self) -> float:
        total = float(self.joint1.sum() + self.joint0.sum())
        return float(self.joint1.sum()) / total if total > 0.0 else 0.0

    @property
    def p1(self) -> np.ndarray:
        mass = self.joint1.sum()
        return self.joint1 / mass if mass > 0.0 else np.zeros_like(self.joint1)

    @property
    def p0(self) -> np.ndarray:
        mass = self.joint0.sum()
        return self.joint0 / mass if mass > 0.0 else np.zeros_like(self.joint0)


class NeighborhoodMap(BaseModel):
    """Per-cell alpha and admissibility on a polar grid around CR-Tx."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    radii: np.ndarray = Field(description="Cell-center radii")
    angles: np.ndarray = Field(description="Cell-center angles relative to the PS direction")
    alpha: np.ndarray = Field(description="Shape (radial, angular)")
    alpha_c: np.ndarray
    admissible: np.ndarray
    cell_area: np.ndarray
    area: float
    coverage_radius: float
    coverage_area: float
    beta: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None

    @property
    def ratio(self) -> float:
        return self.area / self.coverage_area if self.coverage_area > 0.0 else 0.0

    def masked_area(self, mask: AngularMask) -> float:
        keep = mask.contains(self.angles)[None, :]
        return float((self.cell_area * (self.admissible & keep)).sum())

    def half_plane_areas(self) -> Tuple[float, float]:
        """Admissible area toward the PS (|theta| < pi/2) and away from it."""
        toward = (np.abs(self.angles) < math.pi / 2)[None, :]
        cells = self.cell_area * self.admissible
        return float((cells * toward).sum()), float((cells * ~toward).sum())

    def boundary(self) -> np.ndarray:
        """Outermost admissible radius per angle, 0 where none is admissible."""
        radii = np.where(self.admissible, self.radii[:, None], 0.0)
        return radii.max(axis=0)


def to_polar(point: Point, scene: Scene) -> Tuple[float, float]:
    dx = point[0] - scene.tx_position[0]
    dy = point[1] - scene.tx_position[1]
    theta = math.atan2(dy, dx) - scene.heading
    return math.hypot(dx, dy), math.atan2(math.sin(theta), math.cos(theta))


def _polar_points(r: np.ndarray, theta: np.ndarray, scene: Scene) -> np.ndarray:
    direction = scene.heading + theta
    x = scene.tx_position[0] + r * np.cos(direction)
    y = scene.tx_position[1] + r * np.sin(direction)
    return np.stack([x, y], axis=-1)


def effective_lognormal(mu_s, model: PowerModel):
    """Mean and variance (dB) of PS power plus noise."""
    mu_s = np.asarray(mu_s, dtype=float)
    mu0, sigma0_sq, sigmaS, sigmaS_sq = model.mu0, model.sigma0_sq, model.sigmaS, model.sigmaS_sq
    with np.errstate(invalid="ignore"):
        mu_cr = np.where(
            mu_s <= mu0 - sigmaS,
            mu0,
            np.where(mu_s >= mu0 + sigmaS, mu_s, (mu_s + mu0 + sigmaS) / 2.0),
        )
        slope = (sigmaS_sq - sigma0_sq) / (3.0 * sigmaS)
        var_cr = np.where(
            mu_s <= mu0 - sigmaS,
            sigma0_sq,
            np.where(mu_s >= mu0 + 2.0 * sigmaS, sigmaS_sq, slope * (mu_s - mu0) + (sigmaS_sq + 2.0 * sigma0_sq) / 3.0),
        )
    if mu_cr.ndim == 0:
        return float(mu_cr), float(var_cr)
    return mu_cr, var_cr


def _shadowing(r, theta, scene: Scene) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    behind = r * np.cos(theta) <= scene.ps_distance
    return np.where(behind, np.maximum(scene.b_tx * (1.0 - r / (2.0 * scene.kappa)), 0.0), 0.0)


def shadowing_at(rx_polar: Tuple[float, float], scene: Scene) -> float:
    """Shadowing in dB at a point, falling linearly from b_Tx at CR-Tx."""
    return float(_shadowing(rx_polar[0], rx_polar[1], scene))


def _mean_ps_power(points: np.ndarray, shadowing: np.ndarray, scene: Scene, model: PowerModel) -> np.ndarray:
    if scene.ps_position is None:
        return np.full(points.shape[:-1], -np.inf)
    distance = np.linalg.norm(points - np.asarray(scene.ps_position), axis=-1)
    with np.errstate(divide="ignore"):
        return model.K0 - 10.0 * model.a * np.log10(distance) - shadowing


def _free_probability(mu_s: np.ndarray, threshold, model: PowerModel) -> np.ndarray:
    """Pr(indicator = 1 | 1^PS = s), last axis indexed by s."""
    mu_cr, var_cr = effective_lognormal(mu_s, model)
    active = below_threshold_probability(mu_cr, np.sqrt(var_cr), threshold)
    idle = below_threshold_probability(model.mu0, model.sigma0, threshold) * np.ones_like(active)
    return np.stack([active, idle], axis=-1)


def _rx_threshold(r, model: PowerModel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return model.L0 - 10.0 * model.a * np.log10(np.asarray(r, dtype=float))


def _site_probability(r, theta, threshold, scene: Scene, model: PowerModel) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    points = _polar_points(r, theta, scene)
    mu_s = _mean_ps_power(points, _shadowing(r, theta, scene), scene, model)
    return _free_probability(mu_s, threshold, model)


def _tx_probability(scene: Scene, model: PowerModel) -> np.ndarray:
    return _site_probability(0.0, 0.0, model.tau_tx, scene, model)


def _co_probabilities(co_positions: Sequence[Point], scene: Scene, model: PowerModel) -> np.ndarray:
    if not co_positions:
        return np.zeros((0, 2))
    polar = np.array([to_polar(p, scene) for p in co_positions])
    return _site_probability(polar[:, 0], polar[:, 1], model.tau_co, scene, model)


def _pattern_probabilities(co_free: np.ndarray) -> np.ndarray:
    """Pr(readings = pattern | 1^PS = s), shape (2, 2^K)."""
    k = co_free.shape[0]
    if k == 0:
        return np.ones((2, 1))
    bits = build_indexer(k).patterns
    rows = []
    for s in (0, 1):
        per_node = np.where(bits == 1, co_free[:, s], 1.0 - co_free[:, s])
        rows.append(per_node.prod(axis=1))
    return np.vstack(rows)


def _joint_tables(rx_free: np.ndarray, tx_free: np.ndarray, patterns: np.ndarray, model: PowerModel):
    weights = model.prior * tx_free
    joint1 = (rx_free * weights) @ patterns
    joint0 = ((1.0 - rx_free) * weights) @ patterns
    return joint1, joint0


def link_tables(
    rx_polar: Tuple[float, float],
    scene: Scene,
    model: PowerModel,
    co_positions: Optional[Sequence[Point]] = None,
) -> LinkTables:
    """
    Joint masses of CR-Rx availability and cooperative readings given 1^Tx = 1.

    Args:
        rx_polar: (r, theta) of CR-Rx
        scene: Placement; its nodes are used when co_positions is None
        model: Power model
        co_positions: Cooperative node positions

    Returns:
        LinkTables whose alpha, p1 and p0 are the link quantities conditioned on 1^Tx = 1
    """
    positions = scene.nodes if co_positions is None else list(co_positions)
    r, theta = rx_polar
    rx_free = _site_probability(r, theta, _rx_threshold(r, model), scene, model)
    patterns = _pattern_probabilities(_co_probabilities(positions, scene, model))
    joint1, joint0 = _joint_tables(rx_free, _tx_probability(scene, model), patterns, model)
    return LinkTables(joint1=joint1, joint0=joint0)


def decision_table(tables: LinkTables, w: float) -> np.ndarray:
    """
    Bayes decision table over cooperative reading patterns, ties deciding 1.

    Works on the joint masses, so a receiver whose 1^Rx is deterministic
    still gets a table: all ones when 1^Rx = 0 has no mass, all zeros when
    1^Rx = 1 has none.
    """
    if tables.joint1.sum() <= 0.0:
        return np.zeros(tables.joint1.shape, dtype=np.int64)
    return (tables.joint1 >= w * tables.joint0).astype(np.int64)


def alpha_from_geometry(rx_polar: Tuple[float, float], scene: Scene, model: PowerModel) -> float:
    """Pr(1^Rx = 1 | 1^Tx = 1) at a point around CR-Tx."""
    r, theta = rx_polar
    rx_free = _site_probability(r, theta, _rx_threshold(r, model), scene, model)
    return alpha_from_ps_conditionals(_tx_probability(scene, model), rx_free, model.ps_idle_prob)


def beta_gamma_from_geometry(
    co_polar: Tuple[float, float], rx_polar: Tuple[float, float], scene: Scene, model: PowerModel
) -> NodeStats:
    """Node statistics of one cooperative node placed at co_polar."""
    co_point = tuple(_polar_points(np.asarray(co_polar[0]), np.asarray(co_polar[1]), scene).tolist())
    tables = link_tables(rx_polar, scene, model, co_positions=[co_point])
    if tables.joint1.sum() <= 0.0 or tables.joint0.sum() <= 0.0:
        raise DegenerateStats(f"1^Rx is deterministic at {rx_polar}; beta/gamma undefined")
    return NodeStats(beta=float(tables.p1[1]), gamma=float(tables.p0[0]))


def coverage_radius(model: PowerModel, w: float) -> float:
    """Radius of the neighborhood when no PS is present."""
    exponent = (model.L0 - model.mu0 + model.sigma0 * float(q_inverse(w / (w + 1.0)))) / (10.0 * model.a)
    return 10.0 ** exponent


def _admissible(w: float, joint1: np.ndarray, joint0: np.ndarray):
    mass1 = joint1.sum(axis=1)
    mass0 = joint0.sum(axis=1)
    total = mass1 + mass0
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(total > 0.0, mass1 / np.where(total > 0.0, total, 1.0), 0.0)
        p1 = np.where(mass1[:, None] > 0.0, joint1 / np.where(mass1 > 0.0, mass1, 1.0)[:, None], 0.0)
        p0 = np.where(mass0[:, None] > 0.0, joint0 / np.where(mass0 > 0.0, mass0, 1.0)[:, None], 0.0)
    alpha_c = critical_alpha_batch(w, p1, p0)
    admissible = (alpha >= alpha_c) & (total > 0.0)
    return alpha, alpha_c, admissible, p1, p0


def neighborhood(scene: Scene, model: PowerModel, rule_config: Optional[RuleConfig] = None) -> NeighborhoodMap:
    """
    Admissible region around CR-Tx with the scene's cooperative nodes.

    Cells are polar with cell-center quadrature; the grid extends to
    radius_factor times the coverage radius.
    """
    config = rule_config or RuleConfig()
    radius = coverage_radius(model, config.w)
    extent = config.radius_factor * radius
    dr = extent / config.radial_cells
    dtheta = 2.0 * math.pi / config.angular_cells
    radii = (np.arange(config.radial_cells) + 0.5) * dr
    angles = -math.pi + (np.arange(config.angular_cells) + 0.5) * dtheta
    r_grid, theta_grid = np.meshgrid(radii, angles, indexing="ij")

    rx_free = _site_probability(r_grid, theta_grid, _rx_threshold(r_grid, model), scene, model).reshape(-1, 2)
    patterns = _pattern_probabilities(_co_probabilities(scene.nodes, scene, model))
    joint1, joint0 = _joint_tables(rx_free, _tx_probability(scene, model), patterns, model)
    alpha, alpha_c, admissible, p1, p0 = _admissible(config.w, joint1, joint0)

    shape = r_grid.shape
    cell_area = r_grid * dr * dtheta
    admissible = admissible.reshape(shape)
    if config.mask is not None:
        admissible = admissible & config.mask.contains(theta_grid)
    area = float((cell_area * admissible).sum())
    coverage_area = float(cell_area[radii <= radius, :].sum())

    beta = gamma = None
    if len(scene.nodes) == 1:
        beta = p1[:, 1].reshape(shape)
        gamma = p0[:, 0].reshape(shape)

    logger.debug(
        f"Neighborhood with {len(scene.nodes)} cooperative nodes: area {area:.4f}, "
        f"coverage {coverage_area:.4f} (radius {radius:.4f})"
    )
    return NeighborhoodMap(
        radii=radii,
        angles=angles,
        alpha=alpha.reshape(shape),
        alpha_c=alpha_c.reshape(shape),
        admissible=admissible,
        cell_area=cell_area,
        area=area,
        coverage_radius=radius,
        coverage_area=coverage_area,
        beta=beta,
        gamma=gamma,
    )


def evaluate_link(
    rx_polar: Tuple[float, float], scene: Scene, model: PowerModel, w: float
) -> Tuple[float, float, bool]:
    """(alpha, alpha_C, admissible) of one CR-Rx position with the scene's cooperative nodes."""
    tables = link_tables(rx_polar, scene, model)
    alpha, alpha_c, admissible, _, _ = _admissible(w, tables.joint1[None, :], tables.joint0[None, :])
    return float(alpha[0]), float(alpha_c[0]), bool(admissible[0])


def connectivity(
    radios: Sequence[CognitiveRadio],
    scene: Scene,
    model: PowerModel,
    rule_config: Optional[RuleConfig] = None,
) -> nx.DiGraph:
    """
    Directed graph with edge i -> j when radio j lies in radio i's neighborhood.

    The scene supplies the PS, kappa and the cooperative nodes; CR-Tx and
    its shadowing are taken from each transmitting radio in turn.
    """
    if len(radios) < 2:
        raise ValueError("connectivity needs at least two radios")
    config = rule_config or RuleConfig()
    graph = nx.DiGraph()
    for radio in radios:
        graph.add_node(radio.name, position=radio.position, b=radio.b)
    for tx in radios:
        tx_scene = scene.model_copy(update={"tx_position": tx.position, "b_tx": tx.b})
        for rx in radios:
            if rx.name == tx.name:
                continue
            alpha, alpha_c, admissible = evaluate_link(to_polar(rx.position, tx_scene), tx_scene, model, config.w)
            logger.debug(f"Link {tx.name} -> {rx.name}: alpha={alpha:.4f}, alpha_C={alpha_c:.4f}")
            if admissible:
                graph.add_edge(tx.name, rx.name, alpha=alpha, alpha_c=alpha_c)
    return graph


def select_cooperative_node(
    candidates: Sequence[Point],
    scene: Scene,
    model: PowerModel,
    zeta: float,
    mask: Optional[AngularMask] = None,
    rule_config: Optional[RuleConfig] = None,
) -> int:
    """Index of the candidate whose neighborhood is largest under outage budget zeta."""
    if not candidates:
        raise ValueError("select_cooperative_node needs at least one candidate")
    base = rule_config or RuleConfig()
    config = base.model_copy(update={"w": weight_from_outage(zeta), "mask": mask})
    best, best_area = 0, -math.inf
    for index, candidate in enumerate(candidates):
        area = neighborhood(scene.model_copy(update={"nodes": [tuple(candidate)]}), model, config).area
        logger.debug(f"Candidate {index} at {tuple(candidate)}: area {area:.4f}")
        if area > best_area:
            best, best_area = index, area
    return best


def simulate_link(
    rx_polar: Tuple[float, float],
    scene: Scene,
    model: PowerModel,
    gamma_table: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Draw PS activity, received powers and indicators for one link.

    Returns:
        int array of shape (trials, 3) with columns 1^Tx, 1^link and the
        fused decision Gamma(cooperative readings) AND 1^Tx
    """
    table = np.asarray(gamma_table, dtype=np.int64)
    r, theta = rx_polar
    positions = list(scene.nodes)
    sites_r = np.array([0.0, r] + [to_polar(p, scene)[0] for p in positions])
    sites_theta = np.array([0.0, theta] + [to_polar(p, scene)[1] for p in positions])
    thresholds = np.array([model.tau_tx, float(_rx_threshold(r, model))] + [model.tau_co] * len(positions))

    points = _polar_points(sites_r, sites_theta, scene)
    mu_s = _mean_ps_power(points, _shadowing(sites_r, sites_theta, scene), scene, model)
    mu_cr, var_cr = effective_lognormal(mu_s, model)
    mu_cr = np.atleast_1d(mu_cr)
    std_cr = np.sqrt(np.atleast_1d(var_cr))

    idle = rng.random(trials) < model.ps_idle_prob
    noise = rng.standard_normal((trials, sites_r.size))
    mean = np.where(idle[:, None], model.mu0, mu_cr[None, :])
    spread = np.where(idle[:, None], model.sigma0, std_cr[None, :])
    free = (mean + spread * noise) <= thresholds[None, :]

    tx, rx = free[:, 0], free[:, 1]
    if positions:
        index = pattern_positions(build_indexer(len(positions)), free[:, 2:].astype(np.int64))
        fused = table[index].astype(bool)
    else:
        fused = np.full(trials, bool(table[0]))
    return np.stack([tx, tx & rx, tx & fused], axis=1).astype(np.int64)

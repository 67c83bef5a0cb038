"""
Subset indexing, incidence and G matrices, and joint/marginal pmf conversion.

Every pmf vector over K cooperative nodes is indexed by the canonical subset
order produced here: subsets grouped by increasing cardinality, and within a
cardinality block in the order the recursive incidence construction emits
them. Index j holds the probability of the pattern in which exactly the
nodes of subset j read 1.
"""

import logging
from functools import lru_cache
from math import comb
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sensing.errors import InvalidPmf, SizeLimit

logger = logging.getLogger(__name__)

MAX_NODES = 16
MAX_G_ENTRIES = 1 << 26
PMF_TOLERANCE = 1e-12
SUM_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=None)
def _incidence(n: int, m: int, k: int) -> np.ndarray:
    if n == 0:
        return _frozen(np.ones((1, comb(k, m)), dtype=np.int64))
    if n == k:
        block = np.ones((1, 1), dtype=np.int64) if m == k else np.zeros((1, comb(k, m)), dtype=np.int64)
        return _frozen(block)
    if m == 0:
        return _frozen(np.zeros((comb(k, n), 1), dtype=np.int64))
    if m == k:
        return _frozen(np.ones((comb(k, n), 1), dtype=np.int64))
    top = np.hstack([_incidence(n, m, k - 1), _incidence(n, m - 1, k - 1)])
    lower_right = _incidence(n - 1, m - 1, k - 1)
    lower_left = np.zeros((lower_right.shape[0], comb(k - 1, m)), dtype=np.int64)
    return _frozen(np.vstack([top, np.hstack([lower_left, lower_right])]))


class IncidenceMatrix(BaseModel):
    """A^n_{m,k}: row i (an n-subset) against column j (an m-subset), 1 on containment."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int
    m: int
    k: int
    entries: np.ndarray


def incidence_matrix(n: int, m: int, k: int) -> IncidenceMatrix:
    """Build A^n_{m,k} by the block recursion."""
    if not (0 <= n <= k and 0 <= m <= k and k >= 1):
        raise ValueError(f"need 0 <= n, m <= k and k >= 1, got n={n}, m={m}, k={k}")
    if k > MAX_NODES:
        raise SizeLimit(f"k={k} exceeds the {MAX_NODES}-node limit")
    return IncidenceMatrix(n=n, m=m, k=k, entries=_incidence(n, m, k))


def subset_count(m: int, k: int) -> int:
    """S_m: number of subsets of size at most m."""
    return sum(comb(k, i) for i in range(m + 1))


class SubsetIndexer(BaseModel):
    """Canonical bijection between vector positions and node subsets."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(ge=1, le=MAX_NODES)
    masks: Tuple[int, ...] = Field(description="Bitmask of the subset at each position; node i is bit i")
    a1: np.ndarray = Field(description="A^1_k, the k x 2^k node-membership matrix")

    @property
    def size(self) -> int:
        return len(self.masks)

    @property
    def index_of(self) -> Dict[int, int]:
        return _index_lookup(self.masks)

    @property
    def cardinalities(self) -> np.ndarray:
        return self.a1.sum(axis=0)

    @property
    def patterns(self) -> np.ndarray:
        """2^k x k binary matrix; row j is the reading pattern of position j."""
        return self.a1.T

    def block(self, m: int) -> slice:
        """Positions of the cardinality-m block."""
        start = subset_count(m - 1, self.k) if m > 0 else 0
        return slice(start, start + comb(self.k, m))

    def subsets(self, m: int) -> List[int]:
        """Masks of the cardinality-m block in canonical order."""
        return list(self.masks[self.block(m)])


@lru_cache(maxsize=None)
def _index_lookup(masks: Tuple[int, ...]) -> Dict[int, int]:
    return {mask: j for j, mask in enumerate(masks)}


@lru_cache(maxsize=None)
def build_indexer(k: int) -> SubsetIndexer:
    """
    Canonical subset order for k nodes, read off the columns of A^1_k.

    Raises:
        SizeLimit: k above the dense-matrix limit
    """
    if k > MAX_NODES:
        raise SizeLimit(f"k={k} exceeds the {MAX_NODES}-node limit")
    if k < 1:
        raise ValueError("need at least one node")
    a1 = np.hstack([_incidence(1, m, k) for m in range(k + 1)])
    weights = 1 << np.arange(k, dtype=np.int64)
    masks = tuple(int(x) for x in weights @ a1)
    logger.debug(f"Built subset indexer for k={k} ({len(masks)} positions)")
    return SubsetIndexer(k=k, masks=masks, a1=_frozen(a1))


class GMatrix(BaseModel):
    """
    Stacked incidence matrix mapping a joint pmf to its marginals up to order m.

    `g_bar` is the square S_m x S_m block that is inverted in closed form:
    the leading columns for s=1, the trailing columns for s=0.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s: int = Field(ge=0, le=1)
    m: int = Field(ge=0)
    k: int = Field(ge=1)
    matrix: np.ndarray

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def g_bar(self) -> np.ndarray:
        if self.s == 1:
            return self.matrix[:, :self.rows]
        return self.matrix[:, self.matrix.shape[1] - self.rows:]

    @property
    def g_under(self) -> np.ndarray:
        if self.s == 1:
            return self.matrix[:, self.rows:]
        return self.matrix[:, :self.matrix.shape[1] - self.rows]


def build_g(s: int, m: int, k: int) -> GMatrix:
    """G^(s)_{m,k}; the s=0 matrix is the column reversal of the s=1 matrix."""
    if s not in (0, 1):
        raise ValueError("hypothesis must be 0 or 1")
    if not 0 <= m <= k:
        raise ValueError(f"order m={m} outside [0, {k}]")
    if k > MAX_NODES or subset_count(m, k) * (1 << k) > MAX_G_ENTRIES:
        raise SizeLimit(f"G matrix for m={m}, k={k} is too large to store densely")
    rows = [np.hstack([_incidence(n, j, k) for j in range(k + 1)]) for n in range(m + 1)]
    matrix = np.vstack(rows)
    if s == 0:
        matrix = matrix[:, ::-1]
    return GMatrix(s=s, m=m, k=k, matrix=_frozen(np.ascontiguousarray(matrix)))


def invert_g_bar(g: GMatrix) -> np.ndarray:
    """
    Closed-form integer inverse of the square block of G.

    For s=1 block (n, j) is (-1)^(n+j) A^n_{j,k}; the s=0 block is the
    column reversal of the s=1 block, so its inverse is the row reversal.
    """
    blocks = [
        [(-1) ** (n + j) * _incidence(n, j, g.k) for j in range(g.m + 1)]
        for n in range(g.m + 1)
    ]
    inverse = np.block(blocks).astype(np.int64)
    if g.s == 0:
        inverse = inverse[::-1, :]
    return inverse


def _as_vector(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=float).reshape(-1)


class JointPmf(BaseModel):
    """Joint conditional pmf P^(s)_k of the cooperative readings, canonical order."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s: int = Field(ge=0, le=1, description="Value of 1^Rx conditioned on")
    k: int = Field(ge=1, le=MAX_NODES)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _normalized(cls, value: Any) -> np.ndarray:
        values = _as_vector(value)
        if values.size == 0 or values.min() < -PMF_TOLERANCE or abs(values.sum() - 1.0) > SUM_TOLERANCE:
            raise InvalidPmf(f"not a pmf: min={values.min(initial=0.0)}, sum={values.sum()}")
        return _frozen(np.clip(values, 0.0, 1.0))

    @model_validator(mode="after")
    def _sized(self) -> "JointPmf":
        if self.values.shape != (1 << self.k,):
            raise InvalidPmf(f"expected {1 << self.k} entries, got {self.values.shape[0]}")
        return self

    @property
    def tail_mass(self) -> float:
        """k-th order joint probability: all ones for s=1, all zeros for s=0."""
        return float(self.values[-1] if self.s == 1 else self.values[0])


class MarginalSet(BaseModel):
    """Q^(s)_{m,k}: 1 followed by the joint 'all listed nodes agree' probabilities up to order m."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    s: int = Field(ge=0, le=1)
    m: int = Field(ge=0)
    k: int = Field(ge=1, le=MAX_NODES)
    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _vector(cls, value: Any) -> np.ndarray:
        return _as_vector(value)

    @model_validator(mode="after")
    def _leading_one(self) -> "MarginalSet":
        if self.m > self.k:
            raise ValueError(f"order m={self.m} exceeds k={self.k}")
        if self.values.shape != (subset_count(self.m, self.k),):
            raise InvalidPmf(f"expected {subset_count(self.m, self.k)} marginals, got {self.values.shape[0]}")
        if abs(self.values[0] - 1.0) > PMF_TOLERANCE:
            raise InvalidPmf("first marginal entry must be 1")
        return self

    def check_consistency(self, tolerance: float = 1e-9) -> None:
        """
        Raise InvalidPmf unless entries are probabilities and shrink under set growth.
        """
        if self.values.min() < -tolerance or self.values.max() > 1.0 + tolerance:
            raise InvalidPmf("marginal probabilities outside [0, 1]")
        indexer = build_indexer(self.k)
        lookup = indexer.index_of
        for position, mask in enumerate(indexer.masks[:self.values.shape[0]]):
            node = mask
            while node:
                bit = node & -node
                node ^= bit
                parent = lookup[mask ^ bit]
                if self.values[position] > self.values[parent] + tolerance:
                    raise InvalidPmf(
                        f"marginal of subset {mask:#b} exceeds that of its subset {mask ^ bit:#b}"
                    )


def joint_to_marginals(p: JointPmf, m: int) -> MarginalSet:
    """Q = G^(s)_{m,k} P."""
    g = build_g(p.s, m, p.k)
    return MarginalSet(s=p.s, m=m, k=p.k, values=g.matrix @ p.values)


def tail_vector(s: int, k: int) -> np.ndarray:
    """b^(s)_k: coefficient of the tail mass in the completed joint pmf."""
    sizes = build_indexer(k).cardinalities
    b1 = np.where((k - sizes) % 2 == 0, 1, -1).astype(np.int64)
    return b1 if s == 1 or k % 2 == 0 else -b1


def complete_joint(q: MarginalSet, tail_mass: float) -> JointPmf:
    """
    Rebuild the joint pmf from all marginals of order k-1 plus the k-th order one.

    Raises:
        InvalidPmf: the marginals and tail mass are jointly infeasible
    """
    k = q.k
    if q.m != k - 1:
        raise ValueError(f"need marginals of order {k - 1}, got {q.m}")
    g = build_g(q.s, k - 1, k)
    head = invert_g_bar(g) @ q.values
    if q.s == 1:
        offset = np.concatenate([head, [0.0]])
    else:
        offset = np.concatenate([[0.0], head])
    values = offset + tail_mass * tail_vector(q.s, k)
    if values.min() < -PMF_TOLERANCE or values.max() > 1.0 + PMF_TOLERANCE:
        raise InvalidPmf(
            f"marginals are infeasible: reconstructed entries span [{values.min():.3g}, {values.max():.3g}]"
        )
    return JointPmf(s=q.s, k=k, values=np.clip(values, 0.0, 1.0))


def product_pmf(s: int, probabilities: Sequence[float]) -> JointPmf:
    """
    Joint pmf of independent nodes.

    Args:
        s: Hypothesis; for s=1 `probabilities` are Pr(node reads 1), for s=0 Pr(node reads 0)
        probabilities: One entry per node
    """
    probs = np.asarray(probabilities, dtype=float)
    indexer = build_indexer(probs.shape[0])
    ones = probs if s == 1 else 1.0 - probs
    bits = indexer.patterns
    values = np.prod(np.where(bits == 1, ones, 1.0 - ones), axis=1)
    return JointPmf(s=s, k=indexer.k, values=values)


def empirical_joint(s: int, samples: np.ndarray) -> JointPmf:
    """Relative frequencies of observed k-bit reading vectors."""
    samples = np.asarray(samples, dtype=np.int64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError("samples must be a non-empty (n, k) array")
    indexer = build_indexer(samples.shape[1])
    masks = samples @ (1 << np.arange(indexer.k, dtype=np.int64))
    positions = np.array([indexer.index_of[int(mask)] for mask in masks])
    counts = np.bincount(positions, minlength=indexer.size)
    return JointPmf(s=s, k=indexer.k, values=counts / samples.shape[0])


def restrict_pmf(p: JointPmf, nodes: Sequence[int]) -> JointPmf:
    """Joint pmf of a subset of the nodes, summing out the rest; node t of the result is nodes[t]."""
    if not nodes or len(set(nodes)) != len(nodes) or max(nodes) >= p.k or min(nodes) < 0:
        raise ValueError(f"invalid node subset {list(nodes)} for k={p.k}")
    source = build_indexer(p.k)
    target = build_indexer(len(nodes))
    masks = np.asarray(source.masks, dtype=np.int64)
    sub_masks = np.zeros_like(masks)
    for t, node in enumerate(nodes):
        sub_masks |= ((masks >> node) & 1) << t
    lookup = np.empty(target.size, dtype=np.int64)
    lookup[np.asarray(target.masks)] = np.arange(target.size)
    values = np.zeros(target.size)
    np.add.at(values, lookup[sub_masks], p.values)
    return JointPmf(s=p.s, k=target.k, values=values)


def pattern_positions(indexer: SubsetIndexer, bits: np.ndarray) -> np.ndarray:
    """Canonical position of each row of an (n, k) reading array."""
    masks = np.asarray(bits, dtype=np.int64) @ (1 << np.arange(indexer.k, dtype=np.int64))
    lookup = np.empty(indexer.size, dtype=np.int64)
    lookup[np.asarray(indexer.masks)] = np.arange(indexer.size)
    return lookup[masks]


def pmf_to_rows(values: np.ndarray, k: int) -> List[Tuple[int, int, float]]:
    """(index, subset bitmask, value) rows for CSV output."""
    masks = build_indexer(k).masks
    return [(j, masks[j], float(v)) for j, v in enumerate(values)]


def rows_to_pmf(rows: Sequence[Sequence[Any]], k: int) -> np.ndarray:
    """Inverse of pmf_to_rows; rows may arrive in any order."""
    indexer = build_indexer(k)
    lookup = indexer.index_of
    values = np.full(len(rows), np.nan)
    for _, mask, value in rows:
        position = lookup[int(mask)]
        if position >= len(rows):
            raise InvalidPmf(f"subset {int(mask):#b} is outside the first {len(rows)} positions")
        values[position] = float(value)
    if np.isnan(values).any():
        raise InvalidPmf("missing subsets in pmf rows")
    return values

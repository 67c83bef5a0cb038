"""
Analytic anchor checks run by the `selftest` subcommand.
"""

import logging
from typing import Callable, List, Tuple

import numpy as np

from sensing.fusion import critical_alpha
from sensing.geo import PowerModel, coverage_radius
from sensing.pmf_algebra import build_g, invert_g_bar, product_pmf
from utils.simplex import lp_solve

logger = logging.getLogger(__name__)


def _critical_boundary() -> Tuple[bool, str]:
    p = product_pmf(1, [0.5])
    value = critical_alpha(9.0, p, product_pmf(0, [0.5]))
    return abs(value - 0.9) <= 1e-12, f"alpha_C={value!r}"


def _coverage() -> Tuple[bool, str]:
    radius = coverage_radius(PowerModel(), 9.0)
    return abs(radius - 1.141) < 1e-3, f"radius={radius:.6f}"


def _g_inverse() -> Tuple[bool, str]:
    for k in range(1, 7):
        for m in range(k + 1):
            for s in (0, 1):
                g = build_g(s, m, k)
                product = invert_g_bar(g) @ g.g_bar.astype(np.int64)
                if not np.array_equal(product, np.eye(g.rows, dtype=np.int64)):
                    return False, f"inverse fails at s={s}, m={m}, k={k}"
    return True, "exact for k <= 6"


def _lp_toy() -> Tuple[bool, str]:
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0; optimum (1.6, 1.2)
    result = lp_solve([-1.0, -1.0], A_ub=np.array([[1.0, 2.0], [3.0, 1.0]]), b_ub=[4.0, 6.0], bounds=(0.0, None))
    ok = np.allclose(result.x, [1.6, 1.2], atol=1e-9) and abs(result.fun + 2.8) < 1e-9
    return ok, f"x={result.x.tolist()}"


CHECKS: List[Tuple[str, Callable[[], Tuple[bool, str]]]] = [
    ("critical boundary", _critical_boundary),
    ("coverage radius", _coverage),
    ("G inverse identity", _g_inverse),
    ("LP toy problem", _lp_toy),
]


def run_selftest() -> List[Tuple[str, bool, str]]:
    """Run every check; a check that raises counts as failed."""
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as e:
            ok, detail = False, f"{type(e).__name__}: {e}"
        level = logging.INFO if ok else logging.ERROR
        logger.log(level, f"{name}: {'ok' if ok else 'FAILED'} ({detail})")
        results.append((name, ok, detail))
    return results

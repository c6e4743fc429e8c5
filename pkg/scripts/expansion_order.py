"""Halving-ratio table: how fast first-order forms approach their unexpanded versions.

A ratio near 4 when eta halves means the gap is quadratic in eta.

    python3 scripts/expansion_order.py --instances 20
"""

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from infobounds.bounds import generalized_qfi_direct, generalized_qfi_expanded
from infobounds.nonlocal_model import tmin_bound, tmin_bound_unexpanded

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from instances import random_instance  # noqa: E402


@dataclass(frozen=True)
class OrderRun:
    instances: int = 20
    etas: tuple[float, ...] = (4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4)
    seed: int = 0


def qfi_gaps(cfg: OrderRun) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    gaps = []
    for k in range(cfg.instances):
        dden, dop = random_instance(rng, int(rng.integers(2, 7)), 0.0, pure=k % 3 == 0)
        gaps.append([
            abs(generalized_qfi_direct(dden, dop.with_eta(e)) - generalized_qfi_expanded(dden, dop.with_eta(e)))
            for e in cfg.etas
        ])
    return np.array(gaps)


def tmin_gaps(cfg: OrderRun) -> np.ndarray:
    pts = [(t, a) for a in (0.0, 0.5, 1.0, 2.0) for t in np.linspace(0, math.pi, 5)]
    return np.array([[abs(tmin_bound(t, a, e) - tmin_bound_unexpanded(t, a, e)) for e in cfg.etas] for t, a in pts])


def report(name: str, gaps: np.ndarray, etas) -> None:
    ratios = gaps[:, :-1] / gaps[:, 1:]
    print(f"{name}: gap ratio per halving of eta, min / median / max over {len(gaps)} cases")
    for k in range(ratios.shape[1]):
        col = ratios[:, k]
        print(f"  {etas[k]:.2e} -> {etas[k + 1]:.2e}: {col.min():.4f} / {np.median(col):.4f} / {col.max():.4f}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=OrderRun.instances)
    p.add_argument("--seed", type=int, default=OrderRun.seed)
    a = p.parse_args()
    cfg = OrderRun(instances=a.instances, seed=a.seed)
    report("QFI direct vs expanded", qfi_gaps(cfg), cfg.etas)
    report("t_min expanded vs unexpanded", tmin_gaps(cfg), cfg.etas)


if __name__ == "__main__":
    main()

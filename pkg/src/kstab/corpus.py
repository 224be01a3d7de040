"""Seeded random generator of small blow-up models and vertical divisors."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import STRICT_LABEL, CurveData, SncModel, blowup, trivial_model
from .plfun import VerticalDivisor


def random_model(rng: random.Random, max_blowups: int = 6) -> SncModel:
    """Genus 0 or 1, small rational V, up to ``max_blowups`` equivariant blow-ups."""
    curve = CurveData(rng.choice([0, 1]), Fraction(rng.randint(1, 6), rng.choice([1, 1, 2, 3])))
    model = trivial_model(curve)
    n_points = 0
    for k in range(rng.randint(0, max_blowups)):
        labels = model.curve_labels
        nodes = [
            (a, b)
            for i, a in enumerate(labels)
            for b in labels[i + 1:]
            if model.product(a, b) == 1 and (a in model.component_labels or b in model.component_labels)
        ]
        if not nodes or rng.random() < 0.25:
            n_points += 1
            support = (STRICT_LABEL, f"H_p{n_points}")
        else:
            support = rng.choice(nodes)
        model = blowup(model, support, f"E{k + 1}")
    model.check()
    return model


def random_divisor(rng: random.Random, model: SncModel, bound: int = 10) -> VerticalDivisor:
    return VerticalDivisor(model, [rng.randint(-bound, bound) for _ in model.components])


def corpus(seed: int = 0, size: int = 200, max_blowups: int = 6):
    """``size`` pairs ``(model, D)``; deterministic in ``seed``."""
    rng = random.Random(seed)
    out = []
    for _ in range(size):
        model = random_model(rng, max_blowups)
        out.append((model, random_divisor(rng, model)))
    return out

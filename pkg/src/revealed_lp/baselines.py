"""Simple reference learners, used as foils for the lower-bound adversary."""
from __future__ import annotations

import random
from fractions import Fraction

from .geometry import as_point
from .learn_edge import PredictionOutcome, sentinel
from .lp_solver import lex_argmax


class GreedyMemory:
    """Predict the best remembered optimum that satisfies today's constraint."""

    def __init__(self, c):
        self.c = as_point(c)
        self.seen = []

    def predict(self, constraint):
        ok = [x for x in self.seen if constraint.contains(x)]
        if not ok:
            return PredictionOutcome(sentinel(len(self.c)), "empty")
        return PredictionOutcome(lex_argmax(ok, self.c)[0], "memory")

    def update(self, constraint, predicted, observed):
        x = as_point(observed)
        if x not in self.seen:
            self.seen.append(x)
        return "remember"


class RandomGuess:
    """Uniform guesses on the 2^-bits grid of [-2, 2]^d."""

    def __init__(self, d, seed, bits=8):
        self.d = d
        self.rng = random.Random(seed)
        self.S = 1 << bits

    def predict(self, constraint):
        S = self.S
        x = tuple(Fraction(self.rng.randint(-2 * S, 2 * S), S) for _ in range(self.d))
        return PredictionOutcome(x, "random")

    def update(self, constraint, predicted, observed):
        return "none"

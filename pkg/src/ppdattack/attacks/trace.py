"""Attack trace records and their CSV serialisation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


def _fmt(v):
    # repr of a Python float round-trips exactly, keeping CSV bit-identical
    # across reruns with the same seed.
    return repr(float(v))


@dataclass
class AttackTrace:
    """Record of one attack run.

    ``iterates`` has T+1 rows (the initial point plus one per iteration);
    ``objectives`` has one Monte-Carlo objective estimate per iteration.
    Multilevel runs additionally carry ``levels_used`` (the levels drawn that
    iteration, "|"-joined) and ``sample_cost`` (posterior draws consumed).
    """

    iterates: np.ndarray
    objectives: np.ndarray
    final_x: np.ndarray
    final_residual: float
    levels_used: list = field(default=None)
    sample_cost: list = field(default=None)

    @property
    def n_iters(self):
        return len(self.objectives)

    def total_sample_cost(self):
        return int(np.sum(self.sample_cost)) if self.sample_cost is not None else 0

    def write_csv(self, path):
        """Write the trace.

        Columns: ``iteration, objective, x_0..x_{p-1}`` plus ``levels, draws``
        for multilevel runs.  Row 0 is the initial point with an empty
        objective cell.
        """
        p = self.iterates.shape[1]
        mlmc = self.levels_used is not None
        header = ["iteration", "objective"] + ["x_%d" % j for j in range(p)]
        if mlmc:
            header += ["levels", "draws"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t in range(self.iterates.shape[0]):
                obj = "" if t == 0 else _fmt(self.objectives[t - 1])
                row = [t, obj] + [_fmt(v) for v in self.iterates[t]]
                if mlmc:
                    if t == 0:
                        row += ["", ""]
                    else:
                        row += [self.levels_used[t - 1], int(self.sample_cost[t - 1])]
                w.writerow(row)

"""Gate-count reports averaged over a temperature grid."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..circuit.ir import Circuit
from .gateset import GateSet, get_gateset

BLOCKS = ("prep", "uhlmann", "meas")


@dataclass
class GateCountReport:
    """Mean gate counts per block and per kind.

    ``blocks[b][kind]`` is the mean count of ``kind`` in block ``b``; the
    ``total`` entry of each block and the ``total`` block are derived sums.
    """

    gateset: str
    n_points: int
    blocks: dict = field(default_factory=dict)

    def block_total(self, block: str) -> float:
        return float(sum(self.blocks.get(block, {}).values()))

    def kind_total(self, kind: str) -> float:
        return float(sum(b.get(kind, 0.0) for b in self.blocks.values()))

    @property
    def total(self) -> float:
        return float(sum(self.block_total(b) for b in self.blocks))

    def kinds(self) -> list[str]:
        return sorted({k for b in self.blocks.values() for k in b})

    def rows(self) -> list[tuple[str, str, float]]:
        out = []
        for b, counts in self.blocks.items():
            for k in sorted(counts):
                out.append((b, k, counts[k]))
            out.append((b, "total", self.block_total(b)))
        for k in self.kinds():
            out.append(("total", k, self.kind_total(k)))
        out.append(("total", "total", self.total))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "gate_kind", "mean_count"])
        for b, k, v in self.rows():
            w.writerow([b, k, f"{v:.6g}"])
        return buf.getvalue()

    def to_table(self) -> str:
        kinds = self.kinds()
        names = list(self.blocks) + ["total"]
        width = max(8, *(len(k) for k in kinds)) if kinds else 8
        head = f"{'block':<10}" + "".join(f"{k:>{width + 2}}" for k in kinds + ["total"])
        lines = [f"gate set: {self.gateset}, points: {self.n_points}", head, "-" * len(head)]
        for b in names:
            if b == "total":
                vals = [self.kind_total(k) for k in kinds] + [self.total]
            else:
                vals = [self.blocks[b].get(k, 0.0) for k in kinds] + [self.block_total(b)]
            lines.append(f"{b:<10}" + "".join(f"{v:>{width + 2}.1f}" for v in vals))
        return "\n".join(lines) + "\n"


def count_report(
    circuits_by_block: Mapping[str, Sequence[Circuit]],
    gateset: GateSet | str,
    include_measure: bool = True,
) -> GateCountReport:
    """Arithmetic means over the grid of the per-kind counts of each block.

    Every block must hold one circuit per grid point.  An empty block list
    contributes an all-zero row.
    """
    gs = get_gateset(gateset) if isinstance(gateset, str) else gateset
    sizes = {len(v) for v in circuits_by_block.values() if len(v)}
    if len(sizes) > 1:
        raise ValueError("blocks hold different numbers of grid points")
    n = sizes.pop() if sizes else 0
    blocks = {}
    for name, circuits in circuits_by_block.items():
        total: Counter = Counter()
        for c in circuits:
            total.update(c.count_ops(include_measure))
        blocks[name] = {k: v / n for k, v in total.items()} if n else {}
    return GateCountReport(gs.name, n, blocks)

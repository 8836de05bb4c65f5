"""Query accounting: ledgers charged per oracle application, and cost reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field


class QueryLedger:
    """Counts oracle queries, total and per label; monotone non-decreasing."""

    def __init__(self):
        self.total = 0
        self.by_label: dict[str, int] = {}

    def charge(self, label: str, k: int = 1) -> None:
        if k < 0:
            raise ValueError("cannot charge a negative query count")
        self.total += k
        self.by_label[label] = self.by_label.get(label, 0) + k

    def snapshot(self) -> tuple[int, dict[str, int]]:
        return self.total, dict(self.by_label)

    def delta_since(self, snap) -> tuple[int, dict[str, int]]:
        total0, labels0 = snap
        delta = {}
        for label, count in self.by_label.items():
            d = count - labels0.get(label, 0)
            if d:
                delta[label] = d
        return self.total - total0, delta


@dataclass
class CostReport:
    queries: int
    subcalls: list[tuple[str, int]] = field(default_factory=list)
    wall_ns: int = 0
    flags: list[str] = field(default_factory=list)

    @classmethod
    def from_delta(cls, ledger: QueryLedger, snap, started_ns: int,
                   flags: list[str] | None = None) -> "CostReport":
        total, labels = ledger.delta_since(snap)
        return cls(
            queries=total,
            subcalls=sorted(labels.items()),
            wall_ns=time.perf_counter_ns() - started_ns,
            flags=list(flags or []),
        )

    def merged_with(self, other: "CostReport") -> "CostReport":
        labels: dict[str, int] = {}
        for k, v in self.subcalls + other.subcalls:
            labels[k] = labels.get(k, 0) + v
        return CostReport(
            queries=self.queries + other.queries,
            subcalls=sorted(labels.items()),
            wall_ns=self.wall_ns + other.wall_ns,
            flags=sorted(set(self.flags) | set(other.flags)),
        )


SIM_PRIVILEGE_SCAN = "simulator-privilege:marked-scan"
SIM_PRIVILEGE_P = "simulator-privilege:success-probability"

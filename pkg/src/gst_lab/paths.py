from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .utils import save_csv

JUMP_COLUMNS = ("s", "z", "v", "accepted", "pre_state", "x_mark")


@dataclass(frozen=True)
class JumpRecord:
    """One proposed jump of the marked point system."""

    s: float
    z: float
    v: float
    accepted: bool
    pre_state: float
    x_mark: float
    band: int = -1


@dataclass
class JumpTable:
    """Columnar store of JumpRecords, ordered by time."""

    s: np.ndarray = field(default_factory=lambda: np.empty(0))
    z: np.ndarray = field(default_factory=lambda: np.empty(0))
    v: np.ndarray = field(default_factory=lambda: np.empty(0))
    accepted: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    pre_state: np.ndarray = field(default_factory=lambda: np.empty(0))
    x_mark: np.ndarray = field(default_factory=lambda: np.empty(0))
    band: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @classmethod
    def concatenate(cls, tables: Sequence["JumpTable"]) -> "JumpTable":
        if not tables:
            return cls()
        merged = cls(**{name: np.concatenate([getattr(t, name) for t in tables]) for name in cls._fields()})
        return merged.sorted()

    @staticmethod
    def _fields():
        return ("s", "z", "v", "accepted", "pre_state", "x_mark", "band")

    def sorted(self) -> "JumpTable":
        order = np.argsort(self.s, kind="stable")
        return JumpTable(**{name: getattr(self, name)[order] for name in self._fields()})

    def select(self, mask) -> "JumpTable":
        return JumpTable(**{name: getattr(self, name)[mask] for name in self._fields()})

    def __len__(self) -> int:
        return len(self.s)

    def __getitem__(self, i: int) -> JumpRecord:
        return JumpRecord(
            s=float(self.s[i]),
            z=float(self.z[i]),
            v=float(self.v[i]),
            accepted=bool(self.accepted[i]),
            pre_state=float(self.pre_state[i]),
            x_mark=float(self.x_mark[i]),
            band=int(self.band[i]),
        )

    def __iter__(self) -> Iterator[JumpRecord]:
        return (self[i] for i in range(len(self)))


@dataclass
class PathRecord:
    """
    Cadlag sample path on the dt-grid together with its marked jump point system.

    `states[i]` is the value at `times[i]`; jumps falling in (t_{i-1}, t_i] are
    already included in `states[i]`. An exited path is truncated at the first
    grid time with |M| > K.
    """

    times: np.ndarray
    states: np.ndarray
    jumps: JumpTable = field(default_factory=JumpTable)
    exited: bool = False
    exit_time: Optional[float] = None
    band_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    @property
    def analyzable_horizon(self) -> float:
        """End of the segment usable by fractal statistics (exited tails are excluded)."""
        return float(self.exit_time) if self.exited else self.horizon

    def accepted_jumps(self, max_size: float = 1.0) -> JumpTable:
        keep = self.jumps.accepted & (np.abs(self.jumps.z) <= max_size)
        if self.exited:
            keep &= self.jumps.s <= self.exit_time
        return self.jumps.select(keep)

    def state_at(self, t: float) -> float:
        """Right-continuous grid value at time t."""
        index = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.states[max(index, 0)])

    def to_csv(self, states_path: str, jumps_path: str, header_lines=()):
        save_csv(states_path, ["t", "M_t"], np.column_stack([self.times, self.states]), header_lines)
        j = self.jumps
        rows = np.column_stack([j.s, j.z, j.v, j.accepted.astype(float), j.pre_state, j.x_mark])
        save_csv(jumps_path, list(JUMP_COLUMNS), rows.reshape(-1, len(JUMP_COLUMNS)), header_lines)

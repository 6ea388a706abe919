from dataclasses import dataclass
from typing import Dict, List, Optional

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"

# Acceptance gates in report order; every numeric verdict in a RunReport is one of these.
GATE_NAMES: Dict[int, str] = {
    1: "eigensolver_oracle",
    2: "eigen_residual",
    3: "ground_state_tail",
    4: "unitary_equivalence",
    5: "bg_index",
    6: "martingale_problem",
    7: "stationarity",
    8: "thinning_law",
    9: "jaffard_baseline",
    10: "spectrum_pure_jump",
    11: "spectrum_diffusive",
    12: "covering_lemma",
    13: "dyadic_counts",
    14: "kato_diagnostic",
    15: "determinism",
}


@dataclass(frozen=True)
class GateResult:
    number: int
    status: str
    value: Optional[float] = None
    threshold: str = ""
    note: str = ""

    @property
    def name(self) -> str:
        return GATE_NAMES[self.number]

    def to_dict(self) -> Dict:
        return {
            "number": self.number,
            "name": self.name,
            "status": self.status,
            "value": self.value,
            "threshold": self.threshold,
            "note": self.note,
        }


def verdict(number: int, ok: bool, value=None, threshold: str = "", note: str = "") -> GateResult:
    return GateResult(number, PASS if ok else FAIL, None if value is None else float(value), threshold, note)


def skipped(number: int, note: str) -> GateResult:
    return GateResult(number, SKIP, note=note)


def failed_gates(gates: List[GateResult]) -> List[GateResult]:
    return [gate for gate in gates if gate.status == FAIL]


def complete(gates: List[GateResult]) -> bool:
    """Every acceptance gate appears exactly once."""
    return sorted(gate.number for gate in gates) == sorted(GATE_NAMES)

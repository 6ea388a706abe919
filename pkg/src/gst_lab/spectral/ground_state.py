import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import AssumptionViolationError, ConfigurationError, NumericalError
from ..utils import save_csv
from .grid import Grid1D, SquareWell
from .operator import DiscreteOperator

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 10_000
RAYLEIGH_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-8
# Entries below this fraction of the maximum are round-off and replaced by the tail model.
ROUNDOFF_FLOOR = 1e-12
BOUNDARY_CELLS = 3
BOUNDARY_MASS_LIMIT = 1e-4
TAIL_FRACTION = 0.1
# Tail fit window: TAIL_WINDOW[0] R <= |x| <= R - TAIL_WINDOW[1], twice the jump reach off the wall
TAIL_WINDOW = (0.375, 2.0)
MIN_TAIL_NODES = 4
RITZ_BLOCK = 5


@dataclass(frozen=True)
class TailModel:
    """Decay of phi0 beyond the resolved span, anchored at the outermost resolved node on each side."""

    kind: str  # "power" (log phi vs log|x|) or "gaussian" (log phi vs x^2)
    slope_left: float
    slope_right: float
    r_squared: float
    anchor_left: float
    anchor_right: float
    log_value_left: float
    log_value_right: float

    @property
    def exponent(self) -> float:
        """Right-tail exponent: p in phi0 ~ |x|^p, or the x^2 coefficient for Gaussian tails."""
        return self.slope_right

    def log_eval(self, x: np.ndarray) -> np.ndarray:
        right = x >= 0
        anchor = np.where(right, self.anchor_right, self.anchor_left)
        slope = np.where(right, self.slope_right, self.slope_left)
        base = np.where(right, self.log_value_right, self.log_value_left)
        if self.kind == "power":
            return base + slope * (np.log(np.abs(x)) - np.log(np.abs(anchor)))
        return base + slope * (x * x - anchor * anchor)


@dataclass
class GroundState:
    """Bottom eigenpair of H on the grid with the tail rule used to evaluate phi0 anywhere."""

    eigenvalue: float
    phi: np.ndarray
    grid: Grid1D
    tail: TailModel
    residual: float
    ritz_values: np.ndarray
    ritz_vectors: np.ndarray = field(repr=False)
    resolved: slice = slice(None)
    iterations: int = 0
    potential_values: Optional[np.ndarray] = None

    @property
    def spectral_gap(self) -> float:
        return float(self.ritz_values[1] - self.ritz_values[0])

    @property
    def tail_exponent(self) -> float:
        return self.tail.exponent

    @property
    def log_phi(self) -> np.ndarray:
        return np.log(self.phi)

    def excited_state(self, k: int = 1) -> np.ndarray:
        """k-th Ritz vector, normalised like phi0 (sum v^2 h = 1)."""
        v = self.ritz_vectors[:, k]
        return v / np.sqrt(np.sum(v * v) * self.grid.spacing)

    def to_csv(self, path: str, header_lines=()):
        meta = [
            *header_lines,
            f"lambda0={self.eigenvalue!r}",
            f"residual={self.residual!r}",
            f"tail_kind={self.tail.kind}",
            f"tail_exponent={self.tail.exponent!r}",
        ]
        v = self.potential_values if self.potential_values is not None else np.zeros_like(self.phi)
        save_csv(path, ["x", "phi0", "V"], np.column_stack([self.grid.nodes, self.phi, v]), meta)


def gershgorin_lower_bound(matrix: np.ndarray) -> float:
    radius = np.sum(np.abs(matrix), axis=1) - np.abs(np.diag(matrix))
    return float(np.min(np.diag(matrix) - radius))


def _inverse_iteration(matrix: np.ndarray, shift: float):
    lu = linalg.lu_factor(matrix - shift * np.eye(len(matrix)), check_finite=False)
    # Rayleigh quotients cannot be resolved below the round-off of H itself
    floor = 64.0 * np.finfo(float).eps * float(np.max(np.sum(np.abs(matrix), axis=1)))
    v = np.ones(len(matrix)) / np.sqrt(len(matrix))
    previous = np.inf
    for iteration in range(1, MAX_ITERATIONS + 1):
        v = linalg.lu_solve(lu, v, check_finite=False)
        v /= np.linalg.norm(v)
        rayleigh = float(v @ matrix @ v)
        if abs(rayleigh - previous) < max(RAYLEIGH_TOLERANCE * max(1.0, abs(rayleigh)), floor):
            return v, rayleigh, iteration
        previous = rayleigh
    raise NumericalError(
        "inverse iteration did not converge",
        f"{MAX_ITERATIONS} iterations, last Rayleigh quotient {previous!r}",
    )


def _resolved_span(phi: np.ndarray) -> slice:
    above = np.flatnonzero(phi > ROUNDOFF_FLOOR * np.max(phi))
    return slice(int(above[0]), int(above[-1]) + 1)


def _fit_side(x: np.ndarray, log_phi: np.ndarray, kind: str):
    """
    Tail slope and r^2 of one side.

    Power tails regress log phi on log|x| with a 1 / x^2 correction column; Gaussian
    tails regress log phi on x^2.
    """
    if kind == "power":
        columns = [np.ones_like(x), np.log(np.abs(x)), x**-2.0]
    else:
        columns = [np.ones_like(x), x * x]
    design = np.column_stack(columns)
    coef, _, _, _ = linalg.lstsq(design, log_phi)
    residual = log_phi - design @ coef
    spread = np.sum((log_phi - np.mean(log_phi)) ** 2)
    r_squared = 1.0 - np.sum(residual**2) / spread if spread > 0 else 1.0
    return float(coef[1]), float(r_squared)


def _tail_nodes(grid: Grid1D, span: slice):
    """
    Node indices of the left and right fit windows.

    The window is TAIL_WINDOW[0] R <= |x| <= R - TAIL_WINDOW[1] inside the resolved span;
    when that leaves fewer than MIN_TAIL_NODES nodes the outer TAIL_FRACTION of the
    resolved nodes is used instead.
    """
    x = grid.nodes
    lo, hi = span.start, span.stop - 1
    inner = TAIL_WINDOW[0] * grid.half_width
    outer = grid.half_width - TAIL_WINDOW[1]
    index = np.arange(lo, hi + 1)
    magnitude = np.abs(x[index])
    window = index[(magnitude >= inner) & (magnitude <= outer)]
    left, right = window[x[window] < 0], window[x[window] > 0]
    if min(len(left), len(right)) >= MIN_TAIL_NODES:
        return left, right
    width = max(MIN_TAIL_NODES, int(TAIL_FRACTION * (hi - lo + 1) / 2))
    return np.arange(lo, lo + width), np.arange(hi - width + 1, hi + 1)


def fit_tail(grid: Grid1D, phi: np.ndarray, span: slice, kind: str) -> TailModel:
    """Fit the tail slopes on a window clear of the Dirichlet boundary; anchor at the outermost resolved nodes."""
    x = grid.nodes
    lo, hi = span.start, span.stop - 1
    left, right = _tail_nodes(grid, span)
    log_phi = np.log(phi)
    slope_left, r2_left = _fit_side(x[left], log_phi[left], kind)
    slope_right, r2_right = _fit_side(x[right], log_phi[right], kind)
    return TailModel(
        kind=kind,
        slope_left=slope_left,
        slope_right=slope_right,
        r_squared=min(r2_left, r2_right),
        anchor_left=float(x[lo]),
        anchor_right=float(x[hi]),
        log_value_left=float(log_phi[lo]),
        log_value_right=float(log_phi[hi]),
    )


def ground_state(H: DiscreteOperator) -> GroundState:
    """
    Bottom eigenpair (lambda0, phi0) of a discrete Schrodinger operator.

    A 5-vector Rayleigh-Ritz block gives the spectral gap and a starting shift;
    shifted inverse iteration then certifies lambda0. phi0 is sign-fixed and
    normalised so that sum phi0^2 h = 1.

    Raises:
        NumericalError: No convergence, Ritz mismatch or residual above 1e-8
        AssumptionViolationError: A resolved entry of phi0 is not positive, or a
            square well has no bound state
        ConfigurationError: phi0 carries too much mass next to the boundary
    """
    matrix = H.matrix
    if H.symmetry_error > 1e-12:
        raise NumericalError("operator is not symmetric", f"max |H - H^T| = {H.symmetry_error:.3g}")
    h = H.grid.spacing
    ritz_values, ritz_vectors = linalg.eigh(matrix, subset_by_index=[0, RITZ_BLOCK - 1])
    gap = float(ritz_values[1] - ritz_values[0])
    shift = max(gershgorin_lower_bound(matrix), float(ritz_values[0]) - 0.01 * gap)
    v, eigenvalue, iterations = _inverse_iteration(matrix, shift)
    scale = max(1.0, abs(eigenvalue))
    if abs(eigenvalue - ritz_values[0]) > 1e-8 * scale:
        raise NumericalError(
            "inverse iteration and Rayleigh-Ritz disagree on lambda0",
            f"{eigenvalue!r} vs {ritz_values[0]!r}",
        )
    logger.debug("lambda0=%r after %d inverse iterations (gap %.4g)", eigenvalue, iterations, gap)

    if np.sum(v) < 0:
        v = -v
    phi = v / np.sqrt(np.sum(v * v) * h)
    residual = float(np.max(np.abs(matrix @ phi - eigenvalue * phi)) / np.max(np.abs(phi)))
    if residual > RESIDUAL_TOLERANCE:
        raise NumericalError("eigen-residual too large", f"{residual:.3g} > {RESIDUAL_TOLERANCE:g}")

    if isinstance(H.potential, SquareWell) and eigenvalue >= 0:
        raise AssumptionViolationError(
            f"square well has no bound state: lambda0 = {eigenvalue:.6g} is not below the essential spectrum"
        )

    span = _resolved_span(phi)
    if np.any(phi[span] <= 0):
        bad = int(np.count_nonzero(phi[span] <= 0))
        raise AssumptionViolationError(
            f"ground state is not strictly positive on its resolved span ({bad} entries); "
            "pseudo ground state or insufficient grid_halfwidth"
        )
    edge_mass = np.sum(phi[:BOUNDARY_CELLS] ** 2) + np.sum(phi[-BOUNDARY_CELLS:] ** 2)
    if edge_mass > BOUNDARY_MASS_LIMIT * np.sum(phi**2):
        raise ConfigurationError(
            f"ground state mass near the boundary is {edge_mass / np.sum(phi ** 2):.3g} of the total; increase R"
        )

    kind = "power" if H.model.has_jumps else "gaussian"
    tail = fit_tail(H.grid, phi, span, kind)
    x = H.grid.nodes
    outside = np.ones(len(phi), dtype=bool)
    outside[span] = False
    if np.any(outside):
        phi = phi.copy()
        phi[outside] = np.exp(tail.log_eval(x[outside]))
    return GroundState(
        eigenvalue=eigenvalue,
        phi=phi,
        grid=H.grid,
        tail=tail,
        residual=residual,
        ritz_values=ritz_values,
        ritz_vectors=ritz_vectors,
        resolved=span,
        iterations=iterations,
        potential_values=H.potential_values,
    )


def log_phi0_eval(gs: GroundState, x) -> np.ndarray:
    """log phi0: log-linear interpolation on the resolved span, the tail model beyond it."""
    x = np.asarray(x, dtype=float)
    nodes = gs.grid.nodes[gs.resolved]
    log_phi = gs.log_phi[gs.resolved]
    inside = (x >= nodes[0]) & (x <= nodes[-1])
    out = np.empty_like(x)
    out[inside] = np.interp(x[inside], nodes, log_phi)
    if not np.all(inside):
        out[~inside] = gs.tail.log_eval(x[~inside])
    return out


def phi0_eval(gs: GroundState, x) -> np.ndarray:
    """phi0 anywhere on the line, strictly positive."""
    return np.exp(log_phi0_eval(gs, x))


def smoothness_probe(gs: GroundState, window: float) -> float:
    """
    Largest local Lipschitz constant of (ln phi0)' over nodes with |x| <= window.

    Returns inf when (ln phi0)' is not finite there.
    """
    x = gs.grid.nodes
    h = gs.grid.spacing
    log_phi = gs.log_phi
    derivative = np.gradient(log_phi, h)
    inside = np.abs(x) <= window
    if not np.all(np.isfinite(derivative[inside])):
        return float("inf")
    lipschitz = np.abs(np.diff(derivative)) / h
    return float(np.max(lipschitz[inside[:-1] & inside[1:]]))


def stationary_cdf(gs: GroundState):
    """CDF of the grid law phi0^2 h, linear within cells [x_i - h/2, x_i + h/2]."""
    h = gs.grid.spacing
    weights = gs.phi**2
    cumulative = np.concatenate([[0.0], np.cumsum(weights)]) / np.sum(weights)
    edges = np.concatenate([gs.grid.nodes - 0.5 * h, [gs.grid.nodes[-1] + 0.5 * h]])
    return edges, cumulative

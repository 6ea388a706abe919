import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from ..errors import ConfigurationError
from ..levy.model import LevyModel
from ..levy.tools import gauss_legendre, integrate_dyadic, panel_nodes
from .grid import Grid1D, Potential

logger = logging.getLogger(__name__)

# Five-point fourth-order second difference, in units of 1 / (12 h^2)
FIVE_POINT = (-30.0, 16.0, -1.0)
# Relative symbol error at unit frequency above which the grid is rejected
STENCIL_TOLERANCE = 1e-2
# Cells [0, NEAR_CELLS h] use an even polynomial in z through the pair sums at offsets 1..NEAR_CELLS.
NEAR_CELLS = 4
# Beyond them each cell interpolates the pair sum through the offsets k-2..k+3.
CELL_NODES = np.arange(-2, 4)
# Dyadic depth below the near region for the moments of nu
MOMENT_BANDS = 48


@dataclass(frozen=True)
class JumpStencil:
    """
    Translation-invariant weights of the discrete generator L on a uniform grid.

    `offsets[m]` is the total weight (jump plus diffusion) applied to f(x + m h) and
    f(x - m h); `jump_offsets` holds the jump part alone. The jump integral is
    written as int_0^inf (f(x + z) + f(x - z) - 2 f(x)) nu(z) dz. On |z| < NEAR_CELLS h
    the pair sum is fitted by an even polynomial of degree 2 NEAR_CELLS. Beyond that
    it is interpolated cell by cell by quintic Lagrange polynomials. Mass beyond the
    last offset lands in `tail_one_sided` and acts on -2 f(x) only.
    """

    spacing: float
    sigma: float
    jump_offsets: np.ndarray
    tail_one_sided: float
    offsets: np.ndarray = field(repr=False)
    diagonal: float = 0.0

    @property
    def jump_mass(self) -> float:
        """One-sided weight behind -2 f(x): every jump offset plus the mass beyond them."""
        return float(np.sum(self.jump_offsets) + self.tail_one_sided)

    def symbol(self, y: float) -> float:
        """Fourier symbol -sum_m offsets[m] e^{i m h y} of the stencil, comparable to psi(y)."""
        m = np.arange(1, len(self.offsets))
        return float(-(self.diagonal + 2.0 * np.sum(self.offsets[1:] * np.cos(m * self.spacing * y))))


def _lagrange_basis(theta: np.ndarray) -> np.ndarray:
    """Values of the Lagrange basis on CELL_NODES at theta, shape (len(CELL_NODES), len(theta))."""
    basis = np.ones((len(CELL_NODES), len(theta)))
    for q, node in enumerate(CELL_NODES):
        for other in CELL_NODES:
            if other != node:
                basis[q] *= (theta - other) / (node - other)
    return basis


def _near_weights(density, h: float) -> np.ndarray:
    """Weights on the pair sums at offsets 1..NEAR_CELLS from the even-polynomial fit on [0, NEAR_CELLS h]."""
    reach = NEAR_CELLS * h
    powers = 2 * np.arange(1, NEAR_CELLS + 1)
    moments = np.empty(NEAR_CELLS)
    moments[0] = 0.5 * density.second_moment_below(reach) / (h * h)
    floor = reach * 2.0**-MOMENT_BANDS
    for p, power in enumerate(powers[1:], start=1):
        moments[p] = integrate_dyadic(lambda z, s=power: (z / h) ** s * density._radial(z), floor, reach)
    vandermonde = np.arange(1, NEAR_CELLS + 1, dtype=float)[:, None] ** powers[None, :]
    return linalg.solve(vandermonde.T, moments)


def build_stencil(model: LevyModel, grid: Grid1D) -> JumpStencil:
    h = grid.spacing
    n = grid.points
    jump = np.zeros(n)
    tail_one = 0.0
    if model.has_jumps:
        density = model.density
        weights = np.zeros(n + CELL_NODES[-1] + 1)
        weights[1 : NEAR_CELLS + 1] = _near_weights(density, h)
        k = np.arange(NEAR_CELLS, n, dtype=float)
        nodes, quad = panel_nodes(k * h, (k + 1) * h)
        nu = density._radial(nodes) * quad
        t, _ = gauss_legendre()
        basis = _lagrange_basis(0.5 * (t + 1.0))
        cells = nu @ basis.T
        start = NEAR_CELLS
        for q, node in enumerate(CELL_NODES):
            weights[start + node : n + node] += cells[:, q]
        jump[1:] = weights[1:n]
        # offsets at or beyond n only ever pair with points outside the grid
        tail_one = 0.5 * density.tail_mass(n * h) + float(np.sum(weights[n:]))
    offsets = jump.copy()
    diffusion = 0.5 * model.sigma**2 / (12.0 * h * h) * np.array(FIVE_POINT)
    offsets[1] += diffusion[1]
    offsets[2] += diffusion[2]
    diagonal = diffusion[0] - 2.0 * (float(np.sum(jump)) + tail_one)
    return JumpStencil(
        spacing=h,
        sigma=model.sigma,
        jump_offsets=jump,
        tail_one_sided=tail_one,
        offsets=offsets,
        diagonal=diagonal,
    )


@dataclass
class DiscreteOperator:
    """Dense symmetric matrix of -L or H = -L + V on a Dirichlet-truncated grid."""

    matrix: np.ndarray
    grid: Grid1D
    model: LevyModel
    stencil: JumpStencil
    potential: Optional[Potential] = None

    @property
    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T)))

    @property
    def escape_mass(self) -> np.ndarray:
        """Jump mass leaving the grid from each node, the row-sum deficit of L."""
        n = self.grid.points
        cum = np.cumsum(self.stencil.jump_offsets)
        inside = cum[np.arange(n)] + cum[np.arange(n)[::-1]]
        return 2.0 * self.stencil.jump_mass - inside

    @property
    def potential_values(self) -> np.ndarray:
        if self.potential is None:
            return np.zeros(self.grid.points)
        return self.potential(self.grid.nodes)

    def apply_L(self, f) -> np.ndarray:
        """Discrete L f with f taken as 0 outside the grid."""
        minus_l = self.matrix - np.diag(self.potential_values)
        return -(minus_l @ np.asarray(f, dtype=float))


def discretize_L(model: LevyModel, grid: Grid1D, check: bool = True) -> DiscreteOperator:
    """
    Assemble -L on the grid with Dirichlet truncation (f = 0 outside [-R, R]).

    Raises:
        ConfigurationError: When the stencil symbol misses psi(1) by more than STENCIL_TOLERANCE
    """
    stencil = build_stencil(model, grid)
    column = stencil.offsets.copy()
    column[0] = stencil.diagonal
    minus_l = -linalg.toeplitz(column)
    if check and (model.has_jumps or model.sigma > 0):
        psi = model.char_exponent(1.0)
        error = abs(stencil.symbol(1.0) - psi) / psi
        logger.debug("stencil symbol error at y=1: %.3g", error)
        if error > STENCIL_TOLERANCE:
            raise ConfigurationError(
                f"grid too coarse: stencil error estimate {error:.3g} exceeds {STENCIL_TOLERANCE:g} "
                f"(h = {grid.spacing:.3g}); increase grid_points"
            )
    return DiscreteOperator(matrix=minus_l, grid=grid, model=model, stencil=stencil)


def discretize_H(model: LevyModel, potential: Potential, grid: Grid1D) -> DiscreteOperator:
    """H = -L + diag(V(x_i))."""
    op = discretize_L(model, grid)
    matrix = op.matrix + np.diag(potential(grid.nodes))
    return DiscreteOperator(matrix=matrix, grid=grid, model=model, stencil=op.stencil, potential=potential)

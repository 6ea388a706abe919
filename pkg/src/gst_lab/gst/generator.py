import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import make_interp_spline

from ..errors import EvaluationRefusedError, NumericalError
from ..levy.model import LevyModel
from ..levy.tools import dyadic_edges, panel_nodes, refine_edges
from ..spectral.ground_state import GroundState
from ..spectral.operator import FIVE_POINT, DiscreteOperator
from ..utils import save_csv

logger = logging.getLogger(__name__)

SAFETY_MARGIN = 0.9
BOUND_GRID = 401
INEFFICIENT_ENVELOPE = 1e-6
# Nodes closer than this to the boundary are outside the generator's domain.
JUMP_REACH = 1.0
# Dyadic bands of the drift integral below eps_s before the Taylor form takes over
SUB_CUTOFF_BANDS = 12
# Widest quadrature panel of the jump integrals, fine enough for the shipped bumps
JUMP_PANEL = 1.0 / 32.0
SPLINE_DEGREE = 5


@dataclass(frozen=True)
class DriftField:
    """
    Drift b = b_grad + b_jump tabulated on grid nodes, linearly interpolated in between.

    `compensator` is the small-band compensator int_{eps_s<|z|<=1} z ratio(x, z) nu(z) dz
    and `weight` the frozen ratio weight of the sub-eps_s Gaussian.
    """

    x: np.ndarray
    grad: np.ndarray
    jump: np.ndarray
    compensator: np.ndarray
    weight: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.grad + self.jump

    def effective(self, x) -> np.ndarray:
        """b(x) minus the small-band compensator, the deterministic Euler increment per unit time."""
        return np.interp(x, self.x, self.total - self.compensator)

    def weight_at(self, x) -> np.ndarray:
        return np.interp(x, self.x, self.weight)

    def to_csv(self, path: str, header_lines=()):
        rows = np.column_stack([self.x, self.grad, self.jump, self.total])
        save_csv(path, ["x", "b_grad", "b_jump", "b_total"], rows, header_lines)


@dataclass(frozen=True)
class NodeQuadrature:
    """Jump offsets and kernel weights nu(z) dz ratio(x, z) at one node, both signs stacked."""

    x: float
    grad: float
    jump_drift: float
    small_z: np.ndarray
    small_weight: np.ndarray
    big_z: np.ndarray
    big_weight: np.ndarray


class GstModel:
    """
    Ground-state-transformed process built from a Levy model and the ground state of H.

    The jump kernel is ratio(x, z) nu(z) with ratio(x, z) = phi0(x + z) / phi0(x); the
    drift splits into sigma^2 (ln phi0)' and int_{|z|<=1} z (ratio - 1) nu(z) dz.
    ln phi0 is a quintic spline through the resolved node values, continued by the tail model.

    Args:
        levy (LevyModel): Underlying triplet
        gs (GroundState): Ground state of H
        H (DiscreteOperator): Discrete H the ground state was computed from
        eps_s (float): Small-jump cutoff shared with the simulator (defaults to the grid spacing)
    """

    def __init__(self, levy: LevyModel, gs: GroundState, H: DiscreteOperator, eps_s: Optional[float] = None):
        self.levy = levy
        self.gs = gs
        self.H = H
        self.grid = gs.grid
        self.eps_s = float(eps_s if eps_s is not None else self.grid.spacing)
        self._cutoff = min(self.eps_s, 1.0)
        self.sub_cutoff = self._cutoff * 2.0**-SUB_CUTOFF_BANDS
        self._bounds: Dict[tuple, float] = {}
        self._drift_field: Optional[DriftField] = None
        self._panels = None

        nodes = self.grid.nodes[gs.resolved]
        self._span = (float(nodes[0]), float(nodes[-1]))
        self._log_spline = make_interp_spline(nodes, gs.log_phi[gs.resolved], k=SPLINE_DEGREE)
        midpoints = 0.5 * (nodes[1:] + nodes[:-1])
        self._log_phi_max = float(max(np.max(gs.log_phi[gs.resolved]), np.max(self._log_spline(midpoints))))

    @property
    def eigenvalue(self) -> float:
        return self.gs.eigenvalue

    @property
    def domain_radius(self) -> float:
        return self.grid.half_width - JUMP_REACH

    def log_phi(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty_like(flat)
        inside = (flat >= self._span[0]) & (flat <= self._span[1])
        out[inside] = self._log_spline(flat[inside])
        if not np.all(inside):
            out[~inside] = self.gs.tail.log_eval(flat[~inside])
        return out.reshape(x.shape)

    def log_ratio(self, x, z) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.log_phi(x + np.asarray(z, dtype=float)) - self.log_phi(x)

    def ratio(self, x, z) -> np.ndarray:
        """phi0(x + z) / phi0(x)."""
        return np.exp(self.log_ratio(x, z))

    def big_jump_bound(self, x) -> np.ndarray:
        """max_z ratio(x, z) = max phi0 / phi0(x), the thinning envelope for |z| > 1 at a frozen state."""
        return np.exp(self._log_phi_max - self.log_phi(x))

    def big_jump_envelope(self, window: float) -> float:
        """min_{|x|<=K} phi0(x) / max phi0."""
        x = np.linspace(-window, window, BOUND_GRID)
        return float(np.min(np.exp(self.log_phi(x) - self._log_phi_max)))

    def log_derivative(self, x) -> np.ndarray:
        """(ln phi0)'(x) by the fourth-order centered difference with the grid step."""
        h = self.grid.spacing
        x = np.asarray(x, dtype=float)
        ell = self.log_phi
        return (8.0 * (ell(x + h) - ell(x - h)) - (ell(x + 2 * h) - ell(x - 2 * h))) / (12.0 * h)

    def _small_panels(self):
        """
        Quadrature nodes, weights nu(z) dz and an above-eps_s mask on (sub_cutoff, 1].

        Above eps_s the dyadic bands are split into panels no wider than JUMP_PANEL;
        below it plain dyadic bands run SUB_CUTOFF_BANDS octaves deeper.
        """
        if self._panels is None:
            upper = refine_edges(dyadic_edges(self._cutoff, 1.0), JUMP_PANEL)
            lower = dyadic_edges(self.sub_cutoff, self._cutoff)
            edges = np.concatenate([upper, lower[1:]])
            nodes, weights = panel_nodes(edges[1:], edges[:-1])
            above = np.repeat(np.arange(len(edges) - 1) < len(upper) - 1, nodes.shape[-1])
            nodes = nodes.ravel()
            self._panels = (nodes, self.levy.density._radial(nodes) * weights.ravel(), above)
        return self._panels

    def _drift_arrays(self, x: np.ndarray):
        """Gradient drift, jump drift and the part of the jump drift carried by |z| > eps_s."""
        derivative = self.log_derivative(x)
        grad = self.levy.sigma**2 * derivative
        jump, compensator = np.zeros_like(x), np.zeros_like(x)
        if self.levy.has_jumps:
            nodes, nu_w, above = self._small_panels()
            kernel = nodes * nu_w
            odd = self.ratio(x[:, None], nodes[None, :]) - self.ratio(x[:, None], -nodes[None, :])
            compensator = odd @ (kernel * above)
            jump = odd @ kernel + derivative * self.levy.small_jump_variance(self.sub_cutoff)
        if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(jump))):
            bad = x[~(np.isfinite(grad) & np.isfinite(jump))]
            raise NumericalError(
                "drift quadrature diverged; (ln phi0)' must be locally bounded",
                f"first offending x = {bad[0]:.6g}",
            )
        return grad, jump, compensator

    def drift_parts(self, x):
        """
        Gradient part sigma^2 (ln phi0)' and jump part int_{|z|<=1} z (ratio - 1) nu dz of the drift.

        The jump part pairs z with -z on panels down to eps_s 2^-12 and uses the Taylor form
        (ln phi0)'(x) * int z^2 nu(z) dz on what is left below.

        Raises:
            NumericalError: (ln phi0)' or the band quadrature is not finite
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        grad, jump, _ = self._drift_arrays(x)
        return grad, jump

    def drift(self, x) -> Union[float, np.ndarray]:
        grad, jump = self.drift_parts(x)
        total = grad + jump
        return float(total[0]) if np.ndim(x) == 0 else total

    def drift_field(self) -> DriftField:
        """Drift, compensator and sub-cutoff weight on every node with |x| <= R - 1."""
        if self._drift_field is None:
            x = self.grid.nodes[self.grid.interior(JUMP_REACH)]
            grad, jump, compensator = self._drift_arrays(x)
            weight = 0.5 * (self.ratio(x, self.eps_s) + self.ratio(x, -self.eps_s))
            self._drift_field = DriftField(x=x, grad=grad, jump=jump, compensator=compensator, weight=weight)
        return self._drift_field

    def pullback_radius(self, window: Optional[float] = None) -> float:
        """
        Smallest r with sign(b(x)) = -sign(x) for every node r <= |x| <= window.

        Returns inf when the drift does not point inward at the window edge.
        """
        field = self.drift_field()
        window = self.domain_radius if window is None else window
        inside = np.abs(field.x) <= window
        x, b = field.x[inside], field.total[inside]
        outward = (np.sign(b) != -np.sign(x)) & (x != 0)
        if not np.any(~outward[np.abs(x) == np.max(np.abs(x))]):
            return float("inf")
        if not np.any(outward):
            return 0.0
        return float(np.min(np.abs(x)[np.abs(x) > np.max(np.abs(x[outward]))]))

    def _check_node(self, i: int):
        x = self.grid.nodes[i]
        if abs(x) > self.domain_radius + 1e-12:
            raise EvaluationRefusedError(
                f"node {i} (x = {x:.6g}) lies within the jump reach of the boundary; "
                f"the generator is evaluated only for |x| <= {self.domain_radius:g}"
            )

    def node_quadrature(self, i: int) -> NodeQuadrature:
        """Jump quadrature at node i; big jumps stop at the Dirichlet boundary."""
        self._check_node(i)
        x = float(self.grid.nodes[i])
        grad, jump = (float(v[0]) for v in self.drift_parts(x))
        empty = np.empty(0)
        if not self.levy.has_jumps:
            return NodeQuadrature(x, grad, jump, empty, empty, empty, empty)
        nodes, nu_w, _ = self._small_panels()
        small_z = np.concatenate([nodes, -nodes])
        small_weight = np.concatenate([nu_w, nu_w]) * self.ratio(x, small_z)

        big_z: List[np.ndarray] = []
        big_nu: List[np.ndarray] = []
        reach = self.grid.half_width
        for sign, limit in ((1.0, reach - x), (-1.0, reach + x)):
            if limit <= 1.0:
                continue
            edges = refine_edges(np.array([1.0, limit]), JUMP_PANEL)
            z, w = panel_nodes(edges[:-1], edges[1:])
            z = z.ravel()
            big_z.append(sign * z)
            big_nu.append(self.levy.density._radial(z) * w.ravel())
        big = np.concatenate(big_z) if big_z else empty
        big_weight = np.concatenate(big_nu) * self.ratio(x, big) if big_z else empty
        return NodeQuadrature(x, grad, jump, small_z, small_weight, big, big_weight)

    def _interpolant(self, f: np.ndarray):
        return make_interp_spline(self.grid.nodes, f, k=SPLINE_DEGREE)

    def _terms(self, q: NodeQuadrature, f: np.ndarray, spline, i: int) -> Dict[str, float]:
        h = self.grid.spacing
        window = f[i - 2 : i + 3]
        slope = float(np.dot([1.0, -8.0, 0.0, 8.0, -1.0], window)) / (12.0 * h)
        c0, c1, c2 = FIVE_POINT
        curvature = float(np.dot([c2, c1, c0, c1, c2], window)) / (12.0 * h * h)
        diffusion = 0.5 * self.levy.sigma**2 * curvature + q.grad * slope
        small = big = 0.0
        if q.small_z.size:
            small = float(np.sum(q.small_weight * (spline(q.x + q.small_z) - f[i] - q.small_z * slope)))
            small += 0.5 * curvature * self.levy.small_jump_variance(self.sub_cutoff)
        if q.big_z.size:
            big = float(np.sum(q.big_weight * (spline(q.x + q.big_z) - f[i])))
        return {
            "diffusion": diffusion,
            "small_jumps": small,
            "drift_correction": slope * q.jump_drift,
            "big_jumps": big,
        }

    def apply_generator(self, f, i: int, terms: bool = False):
        """
        Continuum GST generator at node i.

        f is continued off the grid by a quintic spline. The four terms are the diffusion
        part with sigma^2 (ln phi0)' f', the compensated small jumps ratio (f(x + z) - f - z f')
        for |z| <= 1, the drift correction f' int z (ratio - 1) nu taken from drift_parts,
        and the uncompensated big jumps. Jumps leaving [-R, R] are killed.

        Args:
            f: Grid function, compactly supported inside the domain
            i (int): Node index
            terms (bool): Return the four terms as a dict instead of their sum

        Raises:
            EvaluationRefusedError: Node i lies within the jump reach of the boundary
        """
        f = np.asarray(f, dtype=float)
        parts = self._terms(self.node_quadrature(i), f, self._interpolant(f), i)
        return parts if terms else sum(parts.values())

    def generator_table(self, functions: Sequence[np.ndarray], nodes) -> np.ndarray:
        """apply_generator for several grid functions at several nodes, one quadrature per node."""
        values = [np.asarray(f, dtype=float) for f in functions]
        splines = [self._interpolant(f) for f in values]
        table = np.zeros((len(values), len(nodes)))
        for col, i in enumerate(nodes):
            q = self.node_quadrature(int(i))
            for row, (f, spline) in enumerate(zip(values, splines)):
                table[row, col] = sum(self._terms(q, f, spline, int(i)).values())
        return table

    def unitary_equiv_rhs(self, f, i: int, H: Optional[DiscreteOperator] = None, eigenvalue: Optional[float] = None):
        """-(1 / phi0(x_i)) ((H - lambda0)(phi0 f))(x_i) on the discrete H, the oracle for apply_generator."""
        self._check_node(i)
        H = H or self.H
        eigenvalue = self.eigenvalue if eigenvalue is None else eigenvalue
        phi = self.gs.phi
        g = phi * np.asarray(f, dtype=float)
        return float(-(H.matrix[i] @ g - eigenvalue * g[i]) / phi[i])

    def generator_field(self, f) -> np.ndarray:
        """apply_generator on every admissible node; zero elsewhere."""
        values = np.zeros(self.grid.points)
        inner = self.grid.interior(JUMP_REACH)
        values[inner] = self.generator_table([f], inner)[0]
        return values

    def local_ratio_bound(self, window: float, z_max: float = 1.0) -> float:
        """
        c(K) = 0.9 * min over |x| <= K, |z| <= z_max of min(ratio, 1 / ratio).

        Cached per (K, z_max); warns when the envelope makes thinning inefficient.
        """
        if window <= 0:
            raise ValueError(f"window must be positive, got {window}")
        key = (float(window), float(z_max))
        if key not in self._bounds:
            x = np.linspace(-window, window, BOUND_GRID)
            z = np.linspace(-z_max, z_max, BOUND_GRID)
            spread = np.max(np.abs(self.log_ratio(x[:, None], z[None, :])))
            bound = SAFETY_MARGIN * float(np.exp(-spread))
            if bound < INEFFICIENT_ENVELOPE:
                logger.warning("ratio envelope c(K=%g) = %.3g; thinning will be inefficient", window, bound)
            self._bounds[key] = bound
        return self._bounds[key]

    def envelope_report(self, windows) -> Dict[str, float]:
        return {f"{k:g}": self.local_ratio_bound(k) for k in windows}


def check_unitary_equivalence(gst: GstModel, functions: Dict[str, Callable], nodes=None) -> float:
    """Max over functions and interior nodes of |apply_generator - rhs| / (1 + |rhs|)."""
    x = gst.grid.nodes
    nodes = gst.grid.interior(JUMP_REACH) if nodes is None else nodes
    values = [fn(x) for fn in functions.values()]
    table = gst.generator_table(values, nodes)
    worst = 0.0
    for row, f in enumerate(values):
        for col, i in enumerate(nodes):
            rhs = gst.unitary_equiv_rhs(f, int(i))
            worst = max(worst, abs(table[row, col] - rhs) / (1.0 + abs(rhs)))
    return worst

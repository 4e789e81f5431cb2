"""Interval geometry, boundary-graded meshes and nodal grid functions.

The domain is a bounded interval (left, right).  Everything downstream is
driven by the boundary distance d(x) = min(x - left, right - x) and by the
blow-up profile

    g_gamma(x) = d(x)^(-gamma)      for gamma > 0,
    g_0(x)     = -log(d(x))         for gamma = 0 (critical scaling),

which solutions follow near the boundary.  Meshes are graded toward both
endpoints with a symmetric algebraic map so that the d^(-gamma) layer is
resolved by piecewise interpolation; a configurable floor keeps the first
interior node at a resolvable distance from the boundary.

All objects here are immutable after construction and safe to share.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GRID_FLOOR_REL = 1.0e-4  # first node distance >= this fraction of L
DEFAULT_GRADING_EXPONENT = 3.0


@dataclass(frozen=True)
class IntervalDomain:
    """Open interval (left, right) with the boundary distance function."""

    left: float
    right: float

    def __post_init__(self):
        left = float(self.left)
        right = float(self.right)
        if not (np.isfinite(left) and np.isfinite(right)):
            raise ValueError("domain endpoints must be finite")
        if not left < right:
            raise ValueError(f"domain requires left < right, got ({left}, {right})")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.left + self.right)

    def distance(self, x):
        """Distance to the boundary, vectorized; zero exactly at endpoints."""
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.left, self.right - x)

    def smoothed_distance(self, x):
        """(L/pi) sin(pi (x-left)/L): equals d to first order at the boundary,
        smooth and strictly positive inside.

        Closed-form barriers are built on this extension so their nonlocal
        operator stays bounded in the interior (the raw distance has a
        concave kink at the midpoint, where the operator of d^{-gamma}
        degenerates).
        """
        x = np.asarray(x, dtype=float)
        L = self.length
        return (L / np.pi) * np.sin(np.pi * (x - self.left) / L)

    def smoothed_distance_derivative(self, x):
        x = np.asarray(x, dtype=float)
        L = self.length
        return np.cos(np.pi * (x - self.left) / L)

    def contains_interior(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x > self.left) & (x < self.right)))


@dataclass(frozen=True)
class GammaProfile:
    """The boundary blow-up profile g_gamma; gamma = 0 selects the log branch."""

    gamma: float

    def __post_init__(self):
        g = float(self.gamma)
        if not (0.0 <= g < 1.0):
            raise ValueError(f"gamma must lie in [0, 1), got {g}")
        object.__setattr__(self, "gamma", g)

    def of_distance(self, d):
        """Evaluate g_gamma as a function of the boundary distance d > 0."""
        d = np.asarray(d, dtype=float)
        if np.any(d <= 0.0):
            raise ValueError("g_gamma is only defined for positive boundary distance")
        if self.gamma > 0.0:
            return d ** (-self.gamma)
        return -np.log(d)

    def derivative_of_distance(self, d):
        """d/dd of g_gamma(d)."""
        d = np.asarray(d, dtype=float)
        if self.gamma > 0.0:
            return -self.gamma * d ** (-self.gamma - 1.0)
        return -1.0 / d

    def second_derivative_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        g = self.gamma
        if g > 0.0:
            return g * (g + 1.0) * d ** (-g - 2.0)
        return d**-2.0

    def fourth_derivative_of_distance(self, d):
        d = np.asarray(d, dtype=float)
        g = self.gamma
        if g > 0.0:
            return g * (g + 1.0) * (g + 2.0) * (g + 3.0) * d ** (-g - 4.0)
        return 6.0 * d**-4.0


def eval_g_gamma(profile: GammaProfile, domain: IntervalDomain, x):
    """g_gamma at interior points of the domain.

    Raises for points on or outside the boundary, where the profile is
    infinite or undefined.
    """
    x = np.asarray(x, dtype=float)
    if not domain.contains_interior(x):
        raise ValueError("g_gamma requested at or outside the boundary")
    return profile.of_distance(domain.distance(x))


def _grading_map(t, exponent: float, blend: float):
    """Map uniform parameters t in [0,1] to [0,1] clustering at both ends.

    psi(a) = (1-blend) * (1 - (1-a)^exponent) + blend * a  on a = |2t-1|,
    applied symmetrically about t = 1/2.  blend in [0,1) mixes in the
    identity map to enforce the grid floor; exponent 1 is the uniform grid
    for any blend.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(2.0 * t - 1.0)
    psi = (1.0 - blend) * (1.0 - (1.0 - a) ** exponent) + blend * a
    return 0.5 + 0.5 * np.sign(2.0 * t - 1.0) * psi


@dataclass(frozen=True)
class GradedGrid:
    """Strictly increasing node set on the closure of the domain.

    Nodes include both endpoints.  Spacing is nondecreasing moving away
    from each endpoint over the graded region, and the first interior node
    sits at distance >= grid_floor from the boundary.
    """

    domain: IntervalDomain
    nodes: np.ndarray
    grading_exponent: float
    interior_count: int
    grid_floor: float
    _floor_blend: float = field(default=0.0, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        if nodes[0] != self.domain.left or nodes[-1] != self.domain.right:
            raise ValueError("grid must include both endpoints exactly")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing")

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def interior_nodes(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def distances(self) -> np.ndarray:
        return self.domain.distance(self.nodes)

    def nearest_node_index(self, x: float) -> int:
        return int(np.argmin(np.abs(self.nodes - float(x))))


def build_graded_grid(
    domain: IntervalDomain,
    interior_count: int,
    grading_exponent: float = DEFAULT_GRADING_EXPONENT,
    grid_floor: float | None = None,
) -> GradedGrid:
    """Build a symmetric boundary-graded grid with ``interior_count`` interior nodes.

    The node set is the image of the uniform parameter grid t_j = j/(n+1)
    under the documented algebraic map; ``grading_exponent`` = 1 reproduces
    the uniform grid.  ``grid_floor`` (default 1e-4 * L) is enforced by
    blending the smallest admissible amount of the identity map into the
    grading map, which preserves symmetry and monotone spacing.
    """
    n = int(interior_count)
    p = float(grading_exponent)
    if n < 8 and p != 1.0:
        # allow tiny uniform grids for unit tests of the trivial map
        if n < 3:
            raise ValueError("interior_count too small (need >= 3)")
    if n < 3:
        raise ValueError("interior_count too small (need >= 3)")
    if not np.isfinite(p) or p < 1.0:
        raise ValueError(f"grading_exponent must be >= 1, got {p}")
    L = domain.length
    floor = DEFAULT_GRID_FLOOR_REL * L if grid_floor is None else float(grid_floor)
    if not np.isfinite(floor) or floor <= 0.0:
        raise ValueError("grid_floor must be positive and finite")

    t = np.linspace(0.0, 1.0, n + 2)
    t1 = t[1]
    # distance of the first node under the raw map, relative to L
    raw_first = 0.5 * (2.0 * t1) ** p if 2.0 * t1 <= 1.0 else 0.5
    uniform_first = t1
    target = floor / L
    blend = 0.0
    if raw_first < target:
        if uniform_first <= target:
            raise ValueError(
                "grid_floor unreachable: uniform spacing already below the floor; "
                "reduce interior_count or grid_floor"
            )
        blend = (target - raw_first) / (uniform_first - raw_first)

    # build the left half and mirror it so symmetry is exact in floating point
    m = (n + 2 + 1) // 2
    mapped = _grading_map(t[:m], p, blend)
    left_half = domain.left + L * mapped
    nodes = np.empty(n + 2)
    nodes[:m] = left_half
    nodes[-m:] = (domain.left + domain.right) - left_half[::-1]
    nodes[0] = domain.left
    nodes[-1] = domain.right
    if (n + 2) % 2 == 1:
        nodes[m - 1] = domain.midpoint

    grid = GradedGrid(
        domain=domain,
        nodes=nodes,
        grading_exponent=p,
        interior_count=n,
        grid_floor=floor,
        _floor_blend=blend,
    )
    d1 = domain.distance(nodes[1])
    if d1 < floor * (1.0 - 1e-12):
        raise AssertionError(f"grid floor violated: d(x_1) = {d1} < {floor}")
    return grid


class Dirichlet:
    """Finite boundary values; a single value applies to both endpoints."""

    __slots__ = ("value", "right_value")

    def __init__(self, value: float, right_value: float | None = None):
        self.value = float(value)
        self.right_value = self.value if right_value is None else float(right_value)

    @property
    def left(self) -> float:
        return self.value

    @property
    def right(self) -> float:
        return self.right_value

    def __repr__(self):
        if self.right_value == self.value:
            return f"Dirichlet({self.value!r})"
        return f"Dirichlet({self.value!r}, {self.right_value!r})"

    def __eq__(self, other):
        return (
            isinstance(other, Dirichlet)
            and other.value == self.value
            and other.right_value == self.right_value
        )


class BlowupProfile:
    """Boundary blow-up with leading coefficient A: u ~ A * g_gamma near d = 0.

    Endpoint nodal values are never read; the operator extends the function
    into the boundary cells with the profile model (see fracop).
    """

    __slots__ = ("coefficient", "gamma")

    def __init__(self, coefficient: float, gamma: float):
        self.coefficient = float(coefficient)
        self.gamma = float(gamma)

    def __repr__(self):
        return f"BlowupProfile(A={self.coefficient!r}, gamma={self.gamma!r})"

    def __eq__(self, other):
        return (
            isinstance(other, BlowupProfile)
            and other.coefficient == self.coefficient
            and other.gamma == self.gamma
        )


@dataclass
class GridFunction:
    """Real nodal values on a graded grid plus a boundary model.

    ``values`` has one entry per node (endpoints included).  With a
    Dirichlet mode the endpoint entries equal the boundary value; with a
    blow-up mode the endpoint entries are ignored by all consumers.
    """

    grid: GradedGrid
    values: np.ndarray
    boundary_mode: Dirichlet | BlowupProfile

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"values length {vals.shape} does not match node count {self.grid.n_nodes}"
            )
        if isinstance(self.boundary_mode, Dirichlet):
            vals[0] = self.boundary_mode.left
            vals[-1] = self.boundary_mode.right
        self.values = vals

    @property
    def interior_values(self) -> np.ndarray:
        return self.values[1:-1]

    def copy_with(self, values: np.ndarray | None = None, boundary_mode=None) -> "GridFunction":
        return GridFunction(
            grid=self.grid,
            values=self.values.copy() if values is None else np.asarray(values, float),
            boundary_mode=self.boundary_mode if boundary_mode is None else boundary_mode,
        )


def from_callable(grid: GradedGrid, func, boundary_mode=None) -> GridFunction:
    vals = np.asarray(func(grid.nodes), dtype=float)
    if boundary_mode is None:
        boundary_mode = Dirichlet(float(vals[0]), float(vals[-1]))
    return GridFunction(grid=grid, values=vals, boundary_mode=boundary_mode)


# ---------------------------------------------------------------------------
# CSV serialization: one header line, 17 significant digits, bit-exact
# decimal round trip.
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def grid_function_to_csv(gf: GridFunction) -> str:
    buf = io.StringIO()
    buf.write("node,value\n")
    for x, v in zip(gf.grid.nodes, gf.values):
        buf.write(f"{_fmt(x)},{_fmt(v)}\n")
    return buf.getvalue()


def grid_to_csv(grid: GradedGrid) -> str:
    buf = io.StringIO()
    buf.write("node,value\n")
    for x in grid.nodes:
        buf.write(f"{_fmt(x)},0\n")
    return buf.getvalue()


def parse_nodes_values_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].strip() != "node,value":
        raise ValueError("expected header line 'node,value'")
    nodes, values = [], []
    for ln in lines[1:]:
        a, b = ln.split(",")
        nodes.append(float(a))
        values.append(float(b))
    return np.asarray(nodes), np.asarray(values)

"""Finite-difference biharmonic Steklov solver on a rectangle.

The fourth-order problem is split as ``w = Delta u``: given boundary data
``g`` for ``w``, ``w`` is the discrete harmonic extension of ``g`` and ``u``
solves ``Delta u = w`` with ``u = 0`` on the boundary.  The boundary map
``g -> du/dnu`` (inward normal) is the discrete Neumann-to-Laplacian operator
``F``; faces tagged ``hardnu`` enforce ``du/dnu = 0`` and are eliminated by a
Schur complement, faces tagged ``softfree`` carry ``w = 0``.  On Steklov faces
``g + lambda rho du/dnu = 0``.

Grid nodes are ``(i h_x, j h_y)``.  Interior fields are arrays of shape
``(nx - 1, ny - 1)``; boundary traces are flat vectors ordered bottom, top,
left, right, each face by increasing coordinate.  Corners carry no unknown.

The inward normal derivative used for the operator is

    du/dnu ~ u_1 / h_n - (h_n / 2) w_b,

second-order because ``u = 0`` along the face forces ``u_nn = Delta u = w``
there.  Together with the trapezoid weight ``h_x h_y / 2`` on boundary nodes
this makes the discrete Green identity

    sum_b ds_b g_b du/dnu_b = - sum h_x h_y w^2

exact, so ``F`` is self-adjoint in the ``ds``-weighted boundary product.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConfigurationError,
    DegenerateModeError,
    DiscretizationQualityError,
    DomainError,
    NumericalError,
    SignContractError,
)
from .jacobi import jacobi_eigh

__all__ = [
    "FACES",
    "Grid2D",
    "FaceCondition",
    "BoundaryPartition",
    "BoundaryOperator",
    "SteklovSpectrum",
    "harmonic_extension",
    "poisson_dirichlet",
    "normal_derivative",
    "assemble_boundary_operator",
    "steklov_spectrum_2d",
    "rayleigh_quotient",
]

FACES = ("bottom", "top", "left", "right")

SOLVE_RTOL = 1e-11
ASYMMETRY_LIMIT = 1e-3
HARDNU_COND_LIMIT = 1e12


@dataclass(frozen=True)
class Grid2D:
    a: float
    b: float
    nx: int
    ny: int

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"side {name} must be positive, got {v!r}")
        for name in ("nx", "ny"):
            v = getattr(self, name)
            if int(v) != v or v < 8:
                raise ConfigurationError(f"{name} must be an integer >= 8, got {v!r}")

    @classmethod
    def square_cells(cls, a: float, b: float, n: int) -> "Grid2D":
        return cls(a, b, n, n)

    @property
    def hx(self) -> float:
        return self.a / self.nx

    @property
    def hy(self) -> float:
        return self.b / self.ny

    @property
    def interior_shape(self) -> tuple:
        return (self.nx - 1, self.ny - 1)

    @property
    def n_interior(self) -> int:
        return (self.nx - 1) * (self.ny - 1)

    def face_size(self, face: str) -> int:
        return self.nx - 1 if face in ("bottom", "top") else self.ny - 1

    @property
    def n_boundary(self) -> int:
        return 2 * (self.nx - 1) + 2 * (self.ny - 1)

    def face_slice(self, face: str) -> slice:
        start = 0
        for f in FACES:
            if f == face:
                return slice(start, start + self.face_size(f))
            start += self.face_size(f)
        raise ConfigurationError(f"unknown face {face!r}")

    def interior_coords(self):
        x = self.hx * np.arange(1, self.nx)
        y = self.hy * np.arange(1, self.ny)
        return np.meshgrid(x, y, indexing="ij")

    @functools.cached_property
    def _boundary_layout(self):
        nx, ny = self.nx, self.ny
        ii = np.arange(1, nx)
        jj = np.arange(1, ny)
        xs, ys, adj, adj2, hn, ds = [], [], [], [], [], []
        # (boundary x, boundary y, first interior (ix, jy), second interior (ix, jy))
        faces = {
            "bottom": (ii * self.hx, np.zeros(nx - 1), (ii - 1, np.zeros_like(ii)), (ii - 1, np.ones_like(ii))),
            "top": (ii * self.hx, np.full(nx - 1, self.b), (ii - 1, np.full_like(ii, ny - 2)), (ii - 1, np.full_like(ii, ny - 3))),
            "left": (np.zeros(ny - 1), jj * self.hy, (np.zeros_like(jj), jj - 1), (np.ones_like(jj), jj - 1)),
            "right": (np.full(ny - 1, self.a), jj * self.hy, (np.full_like(jj, nx - 2), jj - 1), (np.full_like(jj, nx - 3), jj - 1)),
        }
        for f in FACES:
            x, y, (i1, j1), (i2, j2) = faces[f]
            xs.append(x)
            ys.append(y)
            adj.append(i1 * (ny - 1) + j1)
            adj2.append(i2 * (ny - 1) + j2)
            vertical = f in ("bottom", "top")
            hn.append(np.full(len(x), self.hy if vertical else self.hx))
            ds.append(np.full(len(x), self.hx if vertical else self.hy))
        return tuple(np.concatenate(v) for v in (xs, ys, adj, adj2, hn, ds))

    def boundary_coords(self):
        x, y, *_ = self._boundary_layout
        return x, y

    @property
    def adjacent(self) -> np.ndarray:
        """Flat interior index of the first interior node along the inward normal."""
        return self._boundary_layout[2]

    @property
    def adjacent2(self) -> np.ndarray:
        return self._boundary_layout[3]

    @property
    def normal_step(self) -> np.ndarray:
        return self._boundary_layout[4]

    @property
    def boundary_step(self) -> np.ndarray:
        return self._boundary_layout[5]

    @functools.cached_property
    def laplacian(self) -> sp.csc_matrix:
        """5-point Laplacian on interior nodes (homogeneous Dirichlet data)."""
        def d2(m, h):
            return sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h**2
        mx, my = self.nx - 1, self.ny - 1
        A = sp.kron(d2(mx, self.hx), sp.identity(my)) + sp.kron(sp.identity(mx), d2(my, self.hy))
        return A.tocsc()

    @functools.cached_property
    def boundary_coupling(self) -> sp.csc_matrix:
        """Matrix ``B`` with ``(Delta_h v)_interior = A v_interior + B v_boundary``."""
        nb = self.n_boundary
        return sp.csc_matrix((1.0 / self.normal_step**2, (self.adjacent, np.arange(nb))), shape=(self.n_interior, nb))

    @functools.cached_property
    def _lu(self):
        return spla.splu(self.laplacian)

    @property
    def _diag(self) -> float:
        return -2.0 / self.hx**2 - 2.0 / self.hy**2


def _check_residual(res: np.ndarray, scale: float, what: str) -> None:
    err = float(np.max(np.abs(res))) if res.size else 0.0
    if err > SOLVE_RTOL * scale:
        raise NumericalError(f"{what}: residual {err:.3e} exceeds {SOLVE_RTOL:g} x {scale:.3e}")


def _as_interior(grid: Grid2D, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape == grid.interior_shape:
        f = f.reshape(-1)
    if f.shape[0] != grid.n_interior:
        raise ConfigurationError(f"interior field has shape {f.shape}, expected {grid.interior_shape}")
    return f


def _harmonic_flat(grid: Grid2D, g: np.ndarray) -> np.ndarray:
    rhs = -(grid.boundary_coupling @ g)
    w = grid._lu.solve(np.ascontiguousarray(rhs))
    # residual in the diagonally scaled (mean value) form of the stencil
    res = (grid.laplacian @ w - rhs) / grid._diag
    _check_residual(res, float(np.max(np.abs(g))) if g.size else 0.0, "harmonic extension")
    return w


def _poisson_flat(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    u = grid._lu.solve(np.ascontiguousarray(f))
    _check_residual(grid.laplacian @ u - f, float(np.max(np.abs(f))) if f.size else 0.0, "Poisson solve")
    return u


def harmonic_extension(grid: Grid2D, g) -> np.ndarray:
    """Discrete harmonic function with Dirichlet data ``g`` on the (non-corner) boundary nodes."""
    g = np.asarray(g, dtype=float)
    if g.shape != (grid.n_boundary,) or not np.all(np.isfinite(g)):
        raise ConfigurationError(f"boundary trace must be a finite vector of length {grid.n_boundary}")
    return _harmonic_flat(grid, g).reshape(grid.interior_shape)


def poisson_dirichlet(grid: Grid2D, f) -> np.ndarray:
    """Solve ``Delta_h u = f`` on interior nodes with ``u = 0`` on the boundary."""
    f = _as_interior(grid, f)
    if not np.all(np.isfinite(f)):
        raise ConfigurationError("source must be finite")
    return _poisson_flat(grid, f).reshape(grid.interior_shape)


def normal_derivative(grid: Grid2D, u, laplacian_trace=None) -> np.ndarray:
    """Inward normal derivative of ``u`` (zero on the boundary) at every boundary node.

    Without ``laplacian_trace`` the one-sided formula ``(4 u_1 - u_2) / (2 h_n)``
    is used.  With the boundary values of ``Delta u`` supplied, the compact
    form ``u_1 / h_n - (h_n / 2) Delta u`` is used instead; both are second
    order, only the compact one is adjoint-consistent with the 5-point stencil.
    """
    u = _as_interior(grid, u)
    u1 = u[grid.adjacent]
    hn = grid.normal_step
    if laplacian_trace is None:
        return (4.0 * u1 - u[grid.adjacent2]) / (2.0 * hn)
    lt = np.asarray(laplacian_trace, dtype=float)
    if lt.shape != (grid.n_boundary,):
        raise ConfigurationError(f"laplacian trace must have length {grid.n_boundary}")
    return u1 / hn - 0.5 * hn * lt


@dataclass(frozen=True)
class FaceCondition:
    kind: str  # "steklov", "softfree" or "hardnu"
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in ("steklov", "softfree", "hardnu"):
            raise ConfigurationError(f"unknown face condition {self.kind!r}")
        if self.kind == "steklov":
            if self.rho is None or not (math.isfinite(self.rho) and self.rho > 0):
                raise ConfigurationError(f"Steklov face needs a positive density, got {self.rho!r}")
        elif self.rho is not None:
            raise ConfigurationError(f"{self.kind} face takes no density")

    def __str__(self) -> str:
        return f"steklov:{self.rho:g}" if self.kind == "steklov" else self.kind


@dataclass(frozen=True)
class BoundaryPartition:
    bottom: FaceCondition
    top: FaceCondition
    left: FaceCondition
    right: FaceCondition

    def __post_init__(self):
        if not any(self[f].kind == "steklov" for f in FACES):
            raise ConfigurationError("at least one face must be Steklov")

    def __getitem__(self, face: str) -> FaceCondition:
        if face not in FACES:
            raise ConfigurationError(f"unknown face {face!r}")
        return getattr(self, face)

    @classmethod
    def all_steklov(cls, rho: float = 1.0) -> "BoundaryPartition":
        c = FaceCondition("steklov", rho)
        return cls(c, c, c, c)

    @classmethod
    def parse(cls, text: str) -> "BoundaryPartition":
        """Parse ``"bottom=steklov:1,top=hardnu,left=softfree,right=softfree"``."""
        faces = {}
        for item in filter(None, (t.strip() for t in text.split(","))):
            if "=" not in item:
                raise ConfigurationError(f"face entry {item!r} is not of the form face=condition")
            face, cond = (t.strip().lower() for t in item.split("=", 1))
            if face not in FACES:
                raise ConfigurationError(f"unknown face {face!r}")
            if face in faces:
                raise ConfigurationError(f"face {face!r} given twice")
            kind, _, rho = cond.partition(":")
            if kind == "steklov":
                try:
                    faces[face] = FaceCondition("steklov", float(rho) if rho else 1.0)
                except ValueError:
                    raise ConfigurationError(f"bad density {rho!r} for face {face!r}") from None
            else:
                if rho:
                    raise ConfigurationError(f"{kind} face takes no density")
                faces[face] = FaceCondition(kind)
        missing = [f for f in FACES if f not in faces]
        if missing:
            raise ConfigurationError(f"missing face conditions: {', '.join(missing)}")
        return cls(**faces)

    def __str__(self) -> str:
        return ",".join(f"{f}={self[f]}" for f in FACES)

    def nodes(self, grid: Grid2D, kind: str) -> np.ndarray:
        idx = [np.arange(grid.n_boundary)[grid.face_slice(f)] for f in FACES if self[f].kind == kind]
        return np.concatenate(idx) if idx else np.zeros(0, dtype=np.intp)

    def density(self, grid: Grid2D) -> np.ndarray:
        """Nodewise density on all boundary nodes (zero off Steklov faces)."""
        rho = np.zeros(grid.n_boundary)
        for f in FACES:
            if self[f].kind == "steklov":
                rho[grid.face_slice(f)] = self[f].rho
        return rho


@dataclass
class BoundaryOperator:
    """Reduced boundary operator on Steklov nodes plus what is needed to rebuild fields.

    ``w_cols`` and ``u_cols`` hold the interior ``w`` and ``u`` fields for unit
    data on each active (Steklov then HardNu) boundary node.
    """

    grid: Grid2D
    partition: BoundaryPartition
    matrix: np.ndarray
    steklov: np.ndarray
    hardnu: np.ndarray
    hardnu_map: np.ndarray  # g_H = hardnu_map @ g_S
    w_cols: np.ndarray = field(repr=False)
    u_cols: np.ndarray = field(repr=False)
    asymmetry_norm: float = 0.0

    @property
    def active(self) -> np.ndarray:
        return np.concatenate([self.steklov, self.hardnu])

    def full_trace(self, g_s: np.ndarray) -> np.ndarray:
        """Boundary trace of ``w`` on all boundary nodes for Steklov data ``g_s``."""
        g = np.zeros(self.grid.n_boundary)
        g[self.steklov] = g_s
        g[self.hardnu] = self.hardnu_map @ g_s
        return g

    def fields(self, g_s: np.ndarray):
        """Interior ``w`` and ``u`` (flat) for Steklov data ``g_s``."""
        coef = np.concatenate([g_s, self.hardnu_map @ g_s])
        return self.w_cols @ coef, self.u_cols @ coef

    def symmetrized(self):
        """``(M + M^T)/2`` for ``M = (rho ds)^{1/2} F (rho / ds)^{1/2}`` and the relative asymmetry of ``M``."""
        rho = self.partition.density(self.grid)[self.steklov]
        ds = self.grid.boundary_step[self.steklov]
        m = np.sqrt(rho * ds)[:, None] * self.matrix * np.sqrt(rho / ds)[None, :]
        asym = float(np.linalg.norm(m - m.T) / np.linalg.norm(m))
        return 0.5 * (m + m.T), asym


@functools.lru_cache(maxsize=1)
def _sign_self_test() -> None:
    """Positive ``w`` data must give a negative inward flux (maximum principle)."""
    grid = Grid2D(1.0, 1.0, 8, 8)
    op = _assemble(grid, BoundaryPartition.all_steklov())
    flux = op.matrix @ np.ones(len(op.steklov))
    if not np.all(flux < 0):
        raise SignContractError("boundary operator self-test: positive data gave a nonnegative flux")


def _assemble(grid: Grid2D, part: BoundaryPartition) -> BoundaryOperator:
    S = part.nodes(grid, "steklov")
    H = part.nodes(grid, "hardnu")
    act = np.concatenate([S, H])
    coupling = grid.boundary_coupling[:, act].toarray()
    rhs = -coupling
    w = grid._lu.solve(rhs)
    _check_residual((grid.laplacian @ w - rhs) / grid._diag, 1.0, "harmonic extension (operator columns)")
    u = grid._lu.solve(w)
    _check_residual(grid.laplacian @ u - w, float(np.max(np.abs(w))), "Poisson solve (operator columns)")
    hn = grid.normal_step[act]
    full = u[grid.adjacent[act], :] / hn[:, None] - np.diag(0.5 * hn)
    ns = len(S)
    f_ss, f_sh = full[:ns, :ns], full[:ns, ns:]
    f_hs, f_hh = full[ns:, :ns], full[ns:, ns:]
    if len(H):
        cond = np.linalg.cond(f_hh)
        if not np.isfinite(cond) or cond > HARDNU_COND_LIMIT:
            raise ConfigurationError(f"HardNu block is singular (condition estimate {cond:.3e})")
        hmap = -np.linalg.solve(f_hh, f_hs)
        reduced = f_ss + f_sh @ hmap
    else:
        hmap = np.zeros((0, ns))
        reduced = f_ss
    op = BoundaryOperator(grid, part, reduced, S, H, hmap, w, u)
    op.asymmetry_norm = op.symmetrized()[1]
    return op


def assemble_boundary_operator(grid: Grid2D, part: BoundaryPartition) -> BoundaryOperator:
    """Build the reduced Neumann-to-Laplacian operator on the Steklov nodes.

    Column ``j`` of the full map is the inward flux produced by unit ``w`` data
    on active boundary node ``j``.  HardNu rows are removed by the Schur
    complement ``F_SS - F_SH F_HH^{-1} F_HS``.
    """
    _sign_self_test()
    return _assemble(grid, part)


@dataclass
class SteklovSpectrum:
    eigenvalues: np.ndarray
    boundary_modes: np.ndarray  # columns: w traces on Steklov nodes
    rayleigh_residuals: np.ndarray
    asymmetry_norm: float
    operator: BoundaryOperator = field(repr=False)

    def flux_modes(self) -> np.ndarray:
        """Inward normal derivative traces ``F g`` of the modes on Steklov nodes."""
        return self.operator.matrix @ self.boundary_modes


def _rayleigh(op: BoundaryOperator, g_s: np.ndarray) -> float:
    grid = op.grid
    w, u = op.fields(g_s)
    g = op.full_trace(g_s)
    flux = normal_derivative(grid, u, g)[op.steklov]
    cell = grid.hx * grid.hy
    num = cell * (w @ w) + 0.5 * cell * (g @ g)
    rho = op.partition.density(grid)[op.steklov]
    den = float(np.sum(grid.boundary_step[op.steklov] * rho * flux**2))
    if not den > 0:
        raise DegenerateModeError("boundary mode has zero weighted flux")
    return float(num / den)


def rayleigh_quotient(grid: Grid2D, part: BoundaryPartition, g, operator: BoundaryOperator | None = None) -> float:
    """Discrete ``int |Delta u|^2 / int rho (du/dnu)^2`` for Steklov data ``g``.

    The interior integral uses the trapezoid rule (half weight on boundary
    nodes), matching the discrete Green identity of the operator.
    """
    op = operator if operator is not None else assemble_boundary_operator(grid, part)
    g = np.asarray(g, dtype=float)
    if g.shape != (len(op.steklov),):
        raise ConfigurationError(f"mode must have one entry per Steklov node ({len(op.steklov)})")
    if not np.any(g):
        raise DegenerateModeError("zero boundary mode")
    return _rayleigh(op, g)


def steklov_spectrum_2d(grid: Grid2D, part: BoundaryPartition, K: int) -> SteklovSpectrum:
    """The ``K`` smallest discrete Steklov eigenvalues.

    The symmetrized operator ``M`` is diagonalized by cyclic Jacobi; each
    eigenvalue ``mu`` of ``M`` must be negative and gives ``lambda = -1/mu``.
    """
    op = assemble_boundary_operator(grid, part)
    n_s = len(op.steklov)
    if int(K) != K or not (1 <= K <= n_s):
        raise DomainError(f"K must lie in [1, {n_s}], got {K!r}")
    m, asym = op.symmetrized()
    if asym > ASYMMETRY_LIMIT:
        raise DiscretizationQualityError(f"boundary operator asymmetry {asym:.3e} exceeds {ASYMMETRY_LIMIT:g}")
    mu, phi = jacobi_eigh(m)
    if np.any(mu >= 0):
        raise SignContractError(f"boundary operator has nonnegative eigenvalue {mu.max():.3e}")
    # mu ascending (most negative first) is lambda ascending
    lam = -1.0 / mu[:K]
    rho = part.density(grid)[op.steklov]
    ds = grid.boundary_step[op.steklov]
    modes = np.sqrt(rho / ds)[:, None] * phi[:, :K]
    residuals = np.array([abs(lam[j] - _rayleigh(op, modes[:, j])) / lam[j] for j in range(K)])
    return SteklovSpectrum(lam, modes, residuals, asym, op)

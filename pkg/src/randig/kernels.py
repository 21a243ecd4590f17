"""Arc-probability kernels: a sample space for vertex labels plus a function
phi(x, y) in [0, 1] giving the probability of the arc (i, j) given labels
x_i = x and x_j = y.

Two representations:

* ``FiniteKernel`` - finitely many atoms with explicit weights and a phi
  matrix; the only representation admitted by exact PMF computation.
* Built-in continuous kernels over [0,1), [0,1)^2 or R^d - sampled, never
  exactly integrated.  ``discretize`` projects any built-in onto a stratified
  midpoint grid to obtain a FiniteKernel stand-in.

A kernel is *binary* when its range is contained in {0, 1}; binary kernels
make the vertex-label draw fully determine the digraph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

WEIGHT_TOL = 1e-12


def add_mod1(x, y):
    """Addition modulo 1 on [0, 1)."""
    s = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
    return np.where(s >= 1.0, s - 1.0, s)


def sub_mod1(x, y):
    """Subtraction modulo 1 on [0, 1)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = np.where(d < 0.0, d + 1.0, d)
    # A tiny negative difference can round up to exactly 1.0; fold it back.
    return np.where(d >= 1.0, 0.0, d)


def _check_unit_interval(name: str, values: np.ndarray) -> None:
    if np.any(values < 0.0) or np.any(values > 1.0):
        raise ValidationError(f"{name} values must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class FiniteKernel:
    """Kernel on finitely many atoms: ``weights`` (summing to 1) and a
    ``phi`` matrix with phi[a, b] = arc probability for labels (atom a, atom b).

    Sample points are atom indices; ``atoms`` may carry display labels.
    """

    weights: np.ndarray
    phi: np.ndarray
    atoms: tuple | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        p = np.asarray(self.phi, dtype=float)
        if w.ndim != 1 or p.shape != (w.size, w.size):
            raise ValidationError("weights must be a vector and phi a matching square matrix")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError("weights must be nonnegative and sum to 1 within 1e-12")
        _check_unit_interval("phi", p)
        if self.atoms is not None and len(self.atoms) != w.size:
            raise ValidationError("atoms length must match weights")
        w.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "phi", p)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def is_binary(self) -> bool:
        return bool(np.all((self.phi == 0.0) | (self.phi == 1.0)))

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.phi, self.phi.T))

    def sample_points(self, rng: np.random.Generator, shape) -> np.ndarray:
        cum = np.cumsum(self.weights)
        cum[-1] = 1.0
        return np.searchsorted(cum, rng.random(shape), side="right").astype(np.int64)

    def phi_pairs(self, x, y) -> np.ndarray:
        return self.phi[np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64)]

    def validate_point(self, x) -> None:
        if not (isinstance(x, (int, np.integer)) and 0 <= int(x) < self.size):
            raise ValidationError(f"finite-kernel points are atom indices in [0, {self.size}), got {x!r}")


class BuiltinKernel:
    """Common behavior for the continuous built-in kernels."""

    name: str = ""
    point_dim: int = 0  # 0 means scalar points

    @property
    def is_binary(self) -> bool:
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def _point_shape(self, shape) -> tuple:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        return shape + (self.point_dim,) if self.point_dim else shape

    def sample_points(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.random(self._point_shape(shape))

    def phi_pairs(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def validate_point(self, x) -> None:
        arr = np.asarray(x, dtype=float)
        expected = (self.point_dim,) if self.point_dim else ()
        if arr.shape != expected:
            raise ValidationError(f"{self.name} points have shape {expected}, got {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr >= 1.0):
            raise ValidationError(f"{self.name} points live in [0, 1)")

    def grid_atoms(self, points_per_axis: int) -> np.ndarray:
        """Stratified midpoint grid over the kernel's point space."""
        axis = (np.arange(points_per_axis) + 0.5) / points_per_axis
        if not self.point_dim:
            return axis
        grids = np.meshgrid(*([axis] * self.point_dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self) -> int:
        return hash((type(self).__name__, tuple(sorted(self.params().items()))))


class HalfLineKernel(BuiltinKernel):
    """phi(x, y) = 1{x <= y} on [0,1) with the uniform distribution.

    The proximity-region picture: y is "caught" by x whenever it sits to
    the right of x.
    """

    name = "half_line"
    is_binary = True
    is_symmetric = False

    def phi_pairs(self, x, y) -> np.ndarray:
        return (np.asarray(x) <= np.asarray(y)).astype(float)


class BallKernel(BuiltinKernel):
    """phi(x, y) = 1{||x - y||_2 <= r} over the uniform distribution on [0,1)^d."""

    name = "ball"
    is_binary = True
    is_symmetric = True

    def __init__(self, r: float, d: int = 1):
        if r <= 0:
            raise ValidationError("ball radius must be positive")
        if d < 1:
            raise ValidationError("ball dimension must be >= 1")
        self.r = float(r)
        self.d = int(d)
        self.point_dim = int(d)

    def params(self) -> dict:
        return {"r": self.r, "d": self.d}

    def phi_pairs(self, x, y) -> np.ndarray:
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        return (dist <= self.r).astype(float)


class TwoValueKernel(BuiltinKernel):
    """phi(x, y) = a when x <= y, b when y < x, over uniform [0,1).

    For a != b this kernel is non-constant yet has constant products
    phi(x,y)phi(y,x) = a*b and (1-phi(x,y))(1-phi(y,x)) = (1-a)(1-b)
    at every pair of distinct points.
    """

    name = "two_value"
    is_symmetric = False

    def __init__(self, a: float, b: float):
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise ValidationError("two_value levels must lie in [0, 1]")
        self.a = float(a)
        self.b = float(b)

    def params(self) -> dict:
        return {"a": self.a, "b": self.b}

    @property
    def is_binary(self) -> bool:
        return {self.a, self.b} <= {0.0, 1.0}

    def phi_pairs(self, x, y) -> np.ndarray:
        le = np.asarray(x) <= np.asarray(y)
        return np.where(le, self.a, self.b)


class Circle38Kernel(BuiltinKernel):
    """phi(x, y) = 1{x - y >= 3/8 mod 1} * 1{y - x >= 3/8 mod 1} on uniform [0,1).

    Points on the unit circle are joined (in both directions at once) exactly
    when their circular distance lies in [3/8, 5/8]; each arc has probability
    1/4 but no triangle can ever appear.
    """

    name = "circle38"
    is_binary = True
    is_symmetric = True

    def phi_pairs(self, x, y) -> np.ndarray:
        return ((sub_mod1(x, y) >= 0.375) & (sub_mod1(y, x) >= 0.375)).astype(float)


class Derd3ProductKernel(BuiltinKernel):
    """Product kernel on [0,1)^2 reproducing an edge-then-orientation model
    on up to three vertices.

    With u + v and u - v taken modulo 1:

        f(u, v)   = 1{u + v <= edge_prob}
        g(u', v') = 1               if u' - v' <= 1/2
                  = 2*dir_prob - 1  otherwise
        phi((u, u'), (v, v')) = f(u, v) * g(u', v')

    The f factor is symmetric and decides the underlying edge; the g factor
    satisfies g(x,y) + g(y,x) = 2*dir_prob and g(x,y)g(y,x) = 2*dir_prob - 1,
    which is exactly the one-way/two-way orientation split.  Binary iff
    dir_prob = 1/2.
    """

    name = "derd3_product"
    is_symmetric = False
    point_dim = 2

    def __init__(self, p_e: float, p_d: float):
        if not 0.0 < p_e <= 1.0:
            raise ValidationError("edge probability must lie in (0, 1]")
        if not 0.5 <= p_d < 1.0:
            raise ValidationError("direction probability must lie in [1/2, 1)")
        self.p_e = float(p_e)
        self.p_d = float(p_d)

    def params(self) -> dict:
        return {"p_e": self.p_e, "p_d": self.p_d}

    @property
    def is_binary(self) -> bool:
        return self.p_d == 0.5

    def f(self, u, v) -> np.ndarray:
        return (add_mod1(u, v) <= self.p_e).astype(float)

    def g(self, u, v) -> np.ndarray:
        return np.where(sub_mod1(u, v) <= 0.5, 1.0, 2.0 * self.p_d - 1.0)

    def phi_pairs(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.f(x[..., 0], y[..., 0]) * self.g(x[..., 1], y[..., 1])


class UnderlyingKernel(BuiltinKernel):
    """Symmetrization phi_u(x,y) = phi(x,y) + phi(y,x) - phi(x,y)phi(y,x).

    phi_u is the edge probability of the undirected pair {i, j} when each
    direction appears with the base kernel's probabilities.
    """

    name = "underlying"
    is_symmetric = True

    def __init__(self, base: BuiltinKernel):
        self.base = base
        self.point_dim = base.point_dim

    def params(self) -> dict:
        return {"base": self.base}

    @property
    def is_binary(self) -> bool:
        return self.base.is_binary

    def sample_points(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.base.sample_points(rng, shape)

    def validate_point(self, x) -> None:
        self.base.validate_point(x)

    def grid_atoms(self, points_per_axis: int) -> np.ndarray:
        return self.base.grid_atoms(points_per_axis)

    def phi_pairs(self, x, y) -> np.ndarray:
        p = self.base.phi_pairs(x, y)
        q = self.base.phi_pairs(y, x)
        return p + q - p * q


KernelSpec = FiniteKernel | BuiltinKernel


def constant_kernel(p: float) -> FiniteKernel:
    """One-atom kernel with phi identically p."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError("constant kernel level must lie in [0, 1]")
    return FiniteKernel(weights=np.array([1.0]), phi=np.array([[float(p)]]), atoms=("*",))


def intersection_kernel(m: int, weights: np.ndarray | None = None) -> FiniteKernel:
    """Set-intersection kernel: atoms are ordered pairs (S, T) of subsets of
    [m]; phi((S,T),(S',T')) = 1 iff S and T' intersect.

    ``weights`` is a distribution over the 4^m atoms (uniform by default);
    atoms are labeled by subset bitmask pairs in lexicographic order.
    """

    if not 1 <= m <= 4:
        raise ValidationError("intersection kernel supports 1 <= m <= 4 (4^m atoms)")
    atoms = [(s, t) for s in range(1 << m) for t in range(1 << m)]
    size = len(atoms)
    if weights is None:
        w = np.full(size, 1.0 / size)
    else:
        w = np.asarray(weights, dtype=float)
    phi = np.zeros((size, size))
    for a, (s, _) in enumerate(atoms):
        for b, (_, t2) in enumerate(atoms):
            phi[a, b] = 1.0 if s & t2 else 0.0
    return FiniteKernel(weights=w, phi=phi, atoms=tuple(atoms))


def discretize(kernel: BuiltinKernel, points_per_axis: int) -> FiniteKernel:
    """FiniteKernel on a stratified midpoint grid with uniform weights.

    Faithful only for kernels whose sampling measure is uniform on
    [0,1)^dim, which covers the whole built-in catalog except ``ball``
    in dimension > 1 (still uniform on the cube, so also fine).
    """

    atoms = kernel.grid_atoms(points_per_axis)
    size = atoms.shape[0]
    if size > 4096:
        raise ValidationError("discretization grid too large (limit 4096 atoms)")
    if kernel.point_dim:
        a = atoms[:, np.newaxis, :]
        b = atoms[np.newaxis, :, :]
        a = np.broadcast_to(a, (size, size, kernel.point_dim))
        b = np.broadcast_to(b, (size, size, kernel.point_dim))
    else:
        a = np.broadcast_to(atoms[:, np.newaxis], (size, size))
        b = np.broadcast_to(atoms[np.newaxis, :], (size, size))
    phi = kernel.phi_pairs(a, b)
    labels = tuple(map(tuple, atoms)) if kernel.point_dim else tuple(atoms.tolist())
    return FiniteKernel(weights=np.full(size, 1.0 / size), phi=phi, atoms=labels)


def underlying_kernel(kernel: KernelSpec) -> KernelSpec:
    """Kernel of the underlying (undirected) model; symmetric by construction.

    For a symmetric binary kernel the symmetrization is the kernel itself.
    """

    if isinstance(kernel, FiniteKernel):
        p = kernel.phi
        return FiniteKernel(weights=kernel.weights, phi=p + p.T - p * p.T, atoms=kernel.atoms)
    if kernel.is_symmetric and kernel.is_binary:
        return kernel
    return UnderlyingKernel(kernel)


# --- JSON (de)serialization -------------------------------------------------

_BUILTIN_FACTORIES = {
    "half_line": lambda params: HalfLineKernel(),
    "ball": lambda params: BallKernel(**params),
    "two_value": lambda params: TwoValueKernel(**params),
    "circle38": lambda params: Circle38Kernel(),
    "derd3_product": lambda params: Derd3ProductKernel(**params),
}


def kernel_to_json(kernel: KernelSpec) -> dict:
    if isinstance(kernel, FiniteKernel):
        return {"kind": "finite", "weights": kernel.weights.tolist(), "phi": kernel.phi.tolist()}
    if isinstance(kernel, UnderlyingKernel):
        return {"kind": "underlying", "base": kernel_to_json(kernel.base)}
    return {"kind": "builtin", "name": kernel.name, "params": kernel.params()}


def kernel_from_json(data: dict) -> KernelSpec:
    kind = data.get("kind")
    if kind == "finite":
        return FiniteKernel(weights=np.asarray(data["weights"], dtype=float),
                            phi=np.asarray(data["phi"], dtype=float))
    if kind == "underlying":
        base = kernel_from_json(data["base"])
        if isinstance(base, FiniteKernel):
            return underlying_kernel(base)
        return UnderlyingKernel(base)
    if kind == "builtin":
        name = data.get("name")
        if name not in _BUILTIN_FACTORIES:
            raise ValidationError(f"unknown builtin kernel {name!r}")
        return _BUILTIN_FACTORIES[name](data.get("params", {}))
    raise ValidationError(f"unknown kernel kind {kind!r}")

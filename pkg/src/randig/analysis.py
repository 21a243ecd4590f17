"""Distribution comparison and the structural oracles.

Everything here is an executable check of a closed-form identity or a
necessary condition:

* total variation distance and exhaustive isomorphism-orbit checks;
* arc-event probabilities, exact where the PMF is enumerable, otherwise
  Monte Carlo with binomial standard errors (acceptance band: 4 SE);
* the edge/direction <-> arc-probability parameter correspondence;
* the mod-1 product kernel matching a direction-randomized model on
  n <= 3, with its three g-moment integrals;
* the 4-cycle moment identity sum(lambda_i^4) for symmetric finite kernels;
* product-constancy scans (the executable necessary condition for a kernel
  to represent an all-arcs-independent model);
* positive dependence of same-tail arc events;
* the complete classification of symmetric two-vertex distributions.

Exact comparisons use an absolute tolerance of 1e-12; Monte Carlo checks
use 4 standard errors (~6e-5 false-failure rate per check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .digraph import arc_slot, orbit_canon_table
from .errors import ValidationError
from .estimate import EstimateWithError
from .kernels import Derd3ProductKernel, FiniteKernel
from .models import (
    DigraphModel,
    Pmf,
    exact_pmf,
    model_kind,
    sample_masks,
    supports_exact,
)

EXACT_TOL = 1e-12
SE_BAND = 4.0


# ---------------------------------------------------------------------------
# Total variation and isomorphism invariance
# ---------------------------------------------------------------------------

def total_variation(p1: Pmf, p2: Pmf) -> float:
    """(1/2) sum over states of |P1 - P2|."""
    if p1.n != p2.n or p1.kind != p2.kind:
        raise ValidationError("total variation needs two distributions on the same space")
    if p1._dense is not None and p2._dense is not None:
        return 0.5 * float(np.abs(p1._dense - p2._dense).sum())
    d1 = dict(p1.items())
    d2 = dict(p2.items())
    return 0.5 * sum(abs(d1.get(m, 0.0) - d2.get(m, 0.0)) for m in d1.keys() | d2.keys())


@dataclass(frozen=True)
class OrbitReport:
    """The isomorphism orbit with the widest mass spread."""

    canonical_mask: int
    size: int
    min_mass: float
    max_mass: float
    min_mask: int
    max_mask: int

    @property
    def spread(self) -> float:
        return self.max_mass - self.min_mass


@dataclass(frozen=True)
class InvarianceReport:
    invariant: bool
    tol: float
    worst_orbit: OrbitReport


def invariance_check(pmf: Pmf, tol: float = EXACT_TOL) -> InvarianceReport:
    """Exhaustively compare masses within every isomorphism orbit (n <= 5)."""
    if pmf.kind != "digraph":
        raise ValidationError("invariance check expects a digraph pmf")
    if pmf.n > 5:
        raise ValidationError("orbit check supports n <= 5")
    canon = orbit_canon_table(pmf.n).astype(np.int64)
    masses = pmf.dense()
    size = masses.size
    mins = np.full(size, np.inf)
    maxs = np.full(size, -np.inf)
    np.minimum.at(mins, canon, masses)
    np.maximum.at(maxs, canon, masses)
    spreads = np.where(np.isfinite(mins), maxs - mins, 0.0)
    worst = int(np.argmax(spreads))
    in_orbit = canon == worst
    orbit_masses = np.where(in_orbit, masses, np.nan)
    report = OrbitReport(
        canonical_mask=worst,
        size=int(in_orbit.sum()),
        min_mass=float(np.nanmin(orbit_masses)),
        max_mass=float(np.nanmax(orbit_masses)),
        min_mask=int(np.nanargmin(orbit_masses)),
        max_mask=int(np.nanargmax(orbit_masses)),
    )
    return InvarianceReport(invariant=bool(spreads[worst] <= tol), tol=tol, worst_orbit=report)


# ---------------------------------------------------------------------------
# Arc-event probabilities
# ---------------------------------------------------------------------------

def _arc_set_mask(n: int, arcs) -> int:
    mask = 0
    for i, j in arcs:
        mask |= 1 << arc_slot(n, i, j)
    return mask


def event_probability(model: DigraphModel, required_arcs, forbidden_arcs=(),
                      n_samples: int = 0, seed: int = 0) -> EstimateWithError:
    """P(required arcs all present and forbidden arcs all absent).

    Exact when the model admits an exact PMF; otherwise Monte Carlo with
    ``n_samples`` draws and a binomial standard error.
    """
    if model_kind(model) != "digraph":
        raise ValidationError("event probabilities are defined for digraph models")
    n = model.n
    req = _arc_set_mask(n, required_arcs)
    forb = _arc_set_mask(n, forbidden_arcs)
    if req & forb:
        raise ValidationError("required and forbidden arc sets must be disjoint")
    if supports_exact(model):
        masses = exact_pmf(model).dense()
        masks = np.arange(masses.size, dtype=np.uint64)
        hit = ((masks & np.uint64(req)) == np.uint64(req)) & ((masks & np.uint64(forb)) == 0)
        return EstimateWithError.exact_value(float(masses[hit].sum()))
    if n_samples <= 0:
        raise ValidationError("this model has no exact pmf; pass n_samples > 0")
    masks = sample_masks(model, seed, n_samples)
    hits = ((masks & np.uint64(req)) == np.uint64(req)) & ((masks & np.uint64(forb)) == 0)
    return EstimateWithError.from_indicator_mean(float(hits.mean()), n_samples)


# ---------------------------------------------------------------------------
# Edge/direction vs arc-probability correspondence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerdArdParams:
    """The unique (p_d, p_a) making the direction model match the
    all-arcs-independent model: p_d = 1/(1 + sqrt(1 - p_e)) and
    p_a = 1 - sqrt(1 - p_e)."""

    p_e: float
    p_d: float
    p_a: float
    degenerate: bool  # p_e = 1 forces p_d = 1, outside the direction range


def derd_ard_params(p_e: float) -> DerdArdParams:
    if not 0.0 < p_e <= 1.0:
        raise ValidationError(f"p_e must lie in (0, 1], got {p_e}")
    root = math.sqrt(1.0 - p_e)
    return DerdArdParams(p_e=p_e, p_d=1.0 / (1.0 + root), p_a=1.0 - root,
                         degenerate=(p_e == 1.0))


def derd3_vard_kernel(p_e: float, p_d: float, n: int = 3) -> Derd3ProductKernel:
    """Product kernel on [0,1)^2 whose induced vertex-arc model equals
    Derd(n, p_e, p_d) in distribution for n <= 3 (and only there)."""
    if n not in (2, 3):
        raise ValidationError("the product-kernel representation only exists for n in {2, 3}")
    return Derd3ProductKernel(p_e=p_e, p_d=p_d)


# ---------------------------------------------------------------------------
# g-moment integrals of the orientation factor
# ---------------------------------------------------------------------------

def _g(p_d: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    d = x - y
    d = np.where(d < 0.0, d + 1.0, d)
    return np.where(d <= 0.5, 1.0, 2.0 * p_d - 1.0)


@dataclass(frozen=True)
class GMomentReport:
    """Computed vs expected moments of g: the mean (single integral over the
    square), the two-step chain integral, and the cyclic triple integral."""

    p_d: float
    single: tuple[float, float]       # expected p_d, by stratified grid
    chain: tuple[float, float]        # expected p_d^2, by Monte Carlo
    cycle: tuple[float, float]        # expected p_d^3, by Monte Carlo
    chain_se: float
    cycle_se: float
    grid: int
    mc_samples: int
    seed: int


def g_moment_checks(p_d: float, grid: int = 1000, mc_samples: int = 10 ** 6,
                    seed: int = 0) -> GMomentReport:
    """Integrate g, g(x,y)g(y,z) and g(x,y)g(y,z)g(z,x) over the unit cube.

    The mean of g is computed on a stratified midpoint grid (g is piecewise
    constant, so the grid converges at rate 1/grid); the triple integrals
    use Monte Carlo.
    """
    if not 0.5 <= p_d < 1.0:
        raise ValidationError(f"direction probability must lie in [1/2, 1), got {p_d}")
    # Different stratum offsets per axis keep the grid differences off the
    # jump of g at circular gap exactly 1/2.
    xs = (np.arange(grid) + 0.5) / grid
    ys = (np.arange(grid) + 0.25) / grid
    single = float(_g(p_d, xs[:, np.newaxis], ys[np.newaxis, :]).mean())

    def mc_mean(label: str, values_of):
        pts = rngmod.stream(seed, label).random((mc_samples, 3))
        values = values_of(pts[:, 0], pts[:, 1], pts[:, 2])
        return float(values.mean()), float(values.std(ddof=1) / math.sqrt(mc_samples))

    chain, chain_se = mc_mean("chain", lambda x, y, z: _g(p_d, x, y) * _g(p_d, y, z))
    cycle, cycle_se = mc_mean(
        "cycle", lambda x, y, z: _g(p_d, x, y) * _g(p_d, y, z) * _g(p_d, z, x))
    return GMomentReport(
        p_d=p_d,
        single=(single, p_d),
        chain=(chain, p_d ** 2),
        cycle=(cycle, p_d ** 3),
        chain_se=chain_se,
        cycle_se=cycle_se,
        grid=grid,
        mc_samples=mc_samples,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Spectral 4-cycle moment identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of the weighted kernel operator vs the brute-force
    expectation of h over a 4-cycle of i.i.d. labels."""

    eigenvalues: tuple[float, ...]
    lambda4_sum: float
    cycle_moment: float

    @property
    def abs_diff(self) -> float:
        return abs(self.lambda4_sum - self.cycle_moment)


def spectral_cycle_moment(kernel: FiniteKernel) -> SpectralReport:
    """Check E[h(X1,X2) h(X2,X3) h(X3,X4) h(X4,X1)] = sum(lambda_i^4).

    Eigenvalues come from the symmetric matrix sqrt(w_i) h_ij sqrt(w_j);
    the cycle moment is an independent 4-fold weighted sum.
    """
    if not isinstance(kernel, FiniteKernel):
        raise ValidationError("the spectral check needs a finite kernel")
    if not kernel.is_symmetric:
        raise ValidationError("the spectral identity needs a symmetric kernel")
    w = kernel.weights
    h = kernel.phi
    root = np.sqrt(w)
    m = root[:, np.newaxis] * h * root[np.newaxis, :]
    eigenvalues = np.linalg.eigvalsh(m)
    lambda4 = float((eigenvalues ** 4).sum())
    cycle = float(np.einsum("ij,jk,kl,li,i,j,k,l->", h, h, h, h, w, w, w, w))
    return SpectralReport(eigenvalues=tuple(float(v) for v in eigenvalues),
                          lambda4_sum=lambda4, cycle_moment=cycle)


# ---------------------------------------------------------------------------
# Product constancy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstancyReport:
    """Scan of phi(x,y)phi(y,x), (1-phi(x,y))(1-phi(y,x)) and
    phi(x,y)+phi(y,x) over pairs of distinct positive-weight atoms.

    A constant field holds the common value, or None when the quantity
    varies by more than ``tol``.  ``mean_*`` are the corresponding weighted
    means over the full product measure (diagonal included); for a kernel
    representing an all-arcs-independent model the scan must report
    constants (p^2, (1-p)^2, 2p).
    """

    tol: float
    phi_prod_constant: float | None
    comp_prod_constant: float | None
    sum_constant: float | None
    mean_phi_prod: float
    mean_comp_prod: float
    mean_sum: float


def kernel_product_constancy(kernel: FiniteKernel, tol: float = EXACT_TOL) -> ConstancyReport:
    """The executable necessary condition: a kernel whose induced model has
    independent arcs must have constant phi(x,y)phi(y,x) and
    (1-phi(x,y))(1-phi(y,x)) across distinct atoms (zero-weight atoms
    ignored)."""
    if not isinstance(kernel, FiniteKernel):
        raise ValidationError("constancy scan needs a finite kernel")
    w = kernel.weights
    p = kernel.phi
    live = w > 0.0
    off = live[:, np.newaxis] & live[np.newaxis, :] & ~np.eye(w.size, dtype=bool)
    prod = p * p.T
    comp = (1.0 - p) * (1.0 - p.T)
    sums = p + p.T

    def scan(values: np.ndarray) -> float | None:
        if not off.any():  # single atom: trivially constant at the diagonal value
            return float(values[0, 0])
        picked = values[off]
        lo, hi = float(picked.min()), float(picked.max())
        return 0.5 * (lo + hi) if hi - lo <= tol else None

    ww = np.outer(w, w)
    return ConstancyReport(
        tol=tol,
        phi_prod_constant=scan(prod),
        comp_prod_constant=scan(comp),
        sum_constant=scan(sums),
        mean_phi_prod=float((ww * prod).sum()),
        mean_comp_prod=float((ww * comp).sum()),
        mean_sum=float((ww * sums).sum()),
    )


# ---------------------------------------------------------------------------
# Positive dependence of same-tail arcs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositiveDependenceReport:
    """lhs = P(arcs (1,2)..(1,m) all present), rhs = P((1,2) present)^(m-1).

    Vertex-arc models satisfy lhs >= rhs; equality holds for edge-direction
    models; nearest-neighbor digraphs violate the inequality.
    """

    m: int
    lhs: EstimateWithError
    rhs_value: float
    rhs_std_error: float
    holds: bool
    equality: bool

    @property
    def combined_se(self) -> float:
        return math.hypot(self.lhs.std_error, self.rhs_std_error)


def positive_dependence_check(model: DigraphModel, m: int, n_samples: int = 0,
                              seed: int = 0) -> PositiveDependenceReport:
    if not 2 <= m <= model.n:
        raise ValidationError(f"need 2 <= m <= n, got m={m}")
    lhs = event_probability(model, [(1, j) for j in range(2, m + 1)],
                            n_samples=n_samples, seed=rngmod.derive_key(seed, "lhs") % (1 << 63))
    marginal = event_probability(model, [(1, 2)],
                                 n_samples=n_samples, seed=rngmod.derive_key(seed, "rhs") % (1 << 63))
    rhs_value = marginal.value ** (m - 1)
    # Delta method: d/dv v^(m-1) = (m-1) v^(m-2).
    rhs_se = (m - 1) * marginal.value ** (m - 2) * marginal.std_error if m > 1 else 0.0
    band = SE_BAND * math.hypot(lhs.std_error, rhs_se)
    if lhs.exact and marginal.exact:
        band = EXACT_TOL
    return PositiveDependenceReport(
        m=m,
        lhs=lhs,
        rhs_value=rhs_value,
        rhs_std_error=rhs_se,
        holds=lhs.value >= rhs_value - band,
        equality=abs(lhs.value - rhs_value) <= band,
    )


# ---------------------------------------------------------------------------
# Complete classification at n = 2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class N2Report:
    """Classification of the relabeling-invariant two-vertex distribution
    (p1, p1, p2, 1 - 2 p1 - p2) over (one arc, other arc, both, none).

    Always an edge-direction model with p_e = 2 p1 + p2 and
    p_d = (p1 + p2)/(2 p1 + p2); an all-arcs-independent model exactly
    when sqrt(p2) (1 - sqrt(p2)) = p1.
    """

    p1: float
    p2: float
    isomorphism_invariant: bool = field(default=True, init=False)
    degenerate: bool = False
    ard_p_a: float | None = None
    derd_p_e: float | None = None
    derd_p_d: float | None = None
    derd_in_range: bool = False


def n2_classify(p1: float, p2: float) -> N2Report:
    if p1 < 0.0 or p2 < 0.0 or 2.0 * p1 + p2 > 1.0 + EXACT_TOL:
        raise ValidationError("need p1, p2 >= 0 and 2 p1 + p2 <= 1")
    total = 2.0 * p1 + p2
    if total == 0.0 or (p1 == 0.0 and p2 == 1.0):
        # Point mass on the empty or the complete digraph.
        return N2Report(p1=p1, p2=p2, degenerate=True,
                        derd_p_e=(1.0 if p2 == 1.0 else None),
                        derd_p_d=(1.0 if p2 == 1.0 else None))
    p_e = total
    p_d = (p1 + p2) / total
    root = math.sqrt(p2)
    ard = None
    if abs(root * (1.0 - root) - p1) <= EXACT_TOL and 0.0 < root < 1.0:
        ard = root
    return N2Report(p1=p1, p2=p2, ard_p_a=ard, derd_p_e=p_e, derd_p_d=p_d,
                    derd_in_range=p_d < 1.0)

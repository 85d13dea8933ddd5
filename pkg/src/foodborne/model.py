"""Food-borne disease transmission model: humans, flies, and parasitic wasps.

Seven compartments: susceptible humans S, asymptomatic infected A,
symptomatic infected I, online food delivery personnel D, fly pupae P_f,
adult flies G_f, and parasitic wasps W_p.  The human force of infection is

    lambda = beta * (r*A + I) * D / N_h + vartheta * G_f,

with N_h = S + A + I + D.  Dynamics (identical right-hand sides for the
classical and Caputo fractional formulations):

    dS   = pi + xi*A - (1-u)*lambda*S - mu_h*S
    dA   = (1-u)*lambda*S - k1*A
    dI   = eta*A - k2*I
    dD   = psi*(A+I) - k3*D
    dP_f = sigma*G_f - k4*P_f - tau*P_f*W_p
    dG_f = rho*P_f - mu_f*G_f
    dW_p = kappa*tau*P_f*W_p - mu_f*W_p

where k1 = mu_h+eta+xi, k2 = mu_h+delta, k3 = (1-u)+theta+gamma and
k4 = rho+mu_f.  The reproduction number has the closed form

    R0 = xi*rho*vartheta*(1-u) / (k1*rho*vartheta*(1-u) + kappa*k1*tau*mu_h).

Note two structural properties that matter when interpreting runs: the
delivery inflow psi*(A+I) is not matched by an outflow from A or I, so
total N_h only obeys dN_h = pi - mu_h*N_h when psi = delta = 0 and D = 0;
and the first disease-free equilibrium annihilates the fly block but not
the S equation unless u = 1 or vartheta = 0.  Both are reported, never
papered over.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace
from typing import Callable, NamedTuple

import numpy as np

COMPARTMENTS = ("S", "A", "I", "D", "P_f", "G_f", "W_p")

# Parameters whose baseline values are working assumptions rather than
# entries of the published rate table; they must be stated explicitly in
# every scenario file and are echoed with a provenance note in manifests.
ASSUMED_PARAMS = ("vartheta", "u")


@dataclass(frozen=True)
class ModelParams:
    """All rate constants of the model (per day unless dimensionless).

    ``r`` is the asymptomatic relative-infectivity factor inside the force
    of infection (eta is the true A -> I progression rate), ``u`` is the
    constant government-intervention level in [0, 1], and ``vartheta`` is
    the fly-to-human transmission coefficient.
    """

    pi: float        # human recruitment (persons/day)
    xi: float        # temporal resistance rate
    beta: float      # effective contact rate
    r: float         # asymptomatic infectivity modification factor
    u: float         # government intervention level in [0, 1]
    mu_h: float      # human natural death rate
    mu_f: float      # fly natural death rate
    eta: float       # A -> I progression rate
    delta: float     # disease-induced death rate
    psi: float       # disease inflow rate from A and I into D
    theta: float     # environmental hygiene rate
    gamma: float     # delivery-failure rate
    sigma: float     # egg-laying rate
    rho: float       # pupae -> adult maturation rate
    tau: float       # pupae-wasp interaction reduction coefficient
    kappa: float     # proportionality constant
    vartheta: float  # fly-to-human transmission coefficient

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValueError(f"parameter {f.name} must be finite, got {v!r}")
            if v < 0:
                raise ValueError(f"parameter {f.name} must be >= 0, got {v}")
        if not 0.0 <= self.u <= 1.0:
            raise ValueError(f"u must lie in [0, 1], got {self.u}")
        if self.mu_h <= 0:
            raise ValueError("mu_h must be > 0")
        if self.mu_f <= 0:
            raise ValueError("mu_f must be > 0")
        for name, val in (("k1", self.k1), ("k2", self.k2),
                          ("k3", self.k3), ("k4", self.k4)):
            if val <= 0:
                raise ValueError(f"derived constant {name} must be > 0, got {val}")

    @property
    def k1(self) -> float:
        return self.mu_h + self.eta + self.xi

    @property
    def k2(self) -> float:
        return self.mu_h + self.delta

    @property
    def k3(self) -> float:
        return (1.0 - self.u) + self.theta + self.gamma

    @property
    def k4(self) -> float:
        return self.rho + self.mu_f

    @classmethod
    def baseline(cls) -> "ModelParams":
        """Published rate table, plus the assumed vartheta = 0.002 and u = 0."""
        return cls(
            pi=1000.0,
            xi=0.0021,
            beta=0.0014,
            r=0.0016667,
            u=0.0,
            mu_h=1.0 / 87.7,
            mu_f=0.000233,
            eta=0.000375,
            delta=0.01,
            psi=0.47,
            theta=0.50,
            gamma=0.001,
            sigma=0.019,
            rho=0.003,
            tau=0.0021,
            kappa=0.01,
            vartheta=0.002,      # assumed, not from the rate table
        )

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def param_names() -> tuple[str, ...]:
    return tuple(f.name for f in fields(ModelParams))


@dataclass(frozen=True)
class State:
    """One point of the 7-dimensional compartment vector."""

    S: float
    A: float
    I: float
    D: float
    P_f: float
    G_f: float
    W_p: float

    @property
    def n_h(self) -> float:
        return self.S + self.A + self.I + self.D

    @property
    def n_f(self) -> float:
        return self.P_f + self.G_f + self.W_p

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.A, self.I, self.D,
                         self.P_f, self.G_f, self.W_p], dtype=float)

    @classmethod
    def from_array(cls, y) -> "State":
        y = np.asarray(y, dtype=float)
        if y.shape != (7,):
            raise ValueError(f"expected a 7-vector, got shape {y.shape}")
        return cls(*(float(v) for v in y))

    @classmethod
    def paper_initial(cls) -> "State":
        """Initial compartment values used for the published simulations."""
        return cls(S=500000.0, A=300000.0, I=3500.0, D=2000.0,
                   P_f=250000.0, G_f=200000.0, W_p=2000.0)


def _to_array(state) -> np.ndarray:
    if isinstance(state, State):
        return state.as_array()
    y = np.asarray(state, dtype=float)
    if y.shape != (7,):
        raise ValueError(f"expected a State or 7-vector, got shape {y.shape}")
    return y


def force_of_infection(state, p: ModelParams) -> float:
    """lambda = beta*(r*A + I)*D/N_h + vartheta*G_f.

    Raises ZeroDivisionError when N_h = 0.
    """
    y = _to_array(state)
    S, A, I, D, _, G_f, _ = y
    n_h = S + A + I + D
    if n_h == 0.0:
        raise ZeroDivisionError("force of infection undefined: N_h = 0")
    return p.beta * (p.r * A + I) * D / n_h + p.vartheta * G_f


def rhs(t: float, state, p: ModelParams) -> np.ndarray:
    """Right-hand side of the seven compartment equations, in order
    (S, A, I, D, P_f, G_f, W_p).  ``t`` is accepted for solver
    compatibility; the system is autonomous.
    """
    y = _to_array(state)
    S, A, I, D, P_f, G_f, W_p = y
    lam = force_of_infection(y, p)
    infection = (1.0 - p.u) * lam * S
    return np.array([
        p.pi + p.xi * A - infection - p.mu_h * S,
        infection - p.k1 * A,
        p.eta * A - p.k2 * I,
        p.psi * (A + I) - p.k3 * D,
        p.sigma * G_f - p.k4 * P_f - p.tau * P_f * W_p,
        p.rho * P_f - p.mu_f * G_f,
        p.kappa * p.tau * P_f * W_p - p.mu_f * W_p,
    ])


def make_rhs(p: ModelParams) -> Callable[[float, np.ndarray], np.ndarray]:
    """Bind parameters into the (t, y) evaluator expected by the solver."""
    def f(t: float, y: np.ndarray) -> np.ndarray:
        return rhs(t, y, p)
    return f


def r0(p: ModelParams) -> float:
    """Reproduction number, exactly as the closed form reads.

    R0(u=1) = 0 and R0 is strictly decreasing in u whenever
    xi*rho*vartheta > 0.  Raises ValueError when the denominator
    k1*rho*vartheta*(1-u) + kappa*k1*tau*mu_h vanishes.
    """
    one_minus_u = 1.0 - p.u
    num = p.xi * p.rho * p.vartheta * one_minus_u
    den = p.k1 * p.rho * p.vartheta * one_minus_u + p.kappa * p.k1 * p.tau * p.mu_h
    if den == 0.0:
        raise ValueError("degenerate R0 denominator: "
                         "k1*rho*vartheta*(1-u) + kappa*k1*tau*mu_h = 0")
    return num / den


def disease_free_equilibria(p: ModelParams) -> tuple[State, State]:
    """The two disease-free equilibria.

    E1 carries the fly-wasp coexistence levels
    (mu_f/(kappa*tau), rho/(kappa*tau), (sigma*rho - k4*mu_f)/(tau*mu_f));
    E2 is the fully fly-free state (pi/mu_h, 0, ..., 0).  E1 annihilates
    the fly block only; its S and A equations keep a nonzero residual
    whenever u < 1 and vartheta > 0.  A warning is issued when
    sigma*rho < (rho+mu_f)*mu_f, which places W_p of E1 below zero and
    outside the feasible region.
    """
    if p.kappa * p.tau == 0.0:
        raise ValueError("E1 undefined: kappa*tau = 0")
    s_star = p.pi / p.mu_h
    wp_star = (p.sigma * p.rho - (p.rho + p.mu_f) * p.mu_f) / (p.tau * p.mu_f)
    if wp_star < 0.0:
        warnings.warn(
            "E1 wasp level is negative (sigma*rho < (rho+mu_f)*mu_f); "
            "E1 lies outside the feasible region", RuntimeWarning,
            stacklevel=2)
    e1 = State(S=s_star, A=0.0, I=0.0, D=0.0,
               P_f=p.mu_f / (p.kappa * p.tau),
               G_f=p.rho / (p.kappa * p.tau),
               W_p=wp_star)
    e2 = State(S=s_star, A=0.0, I=0.0, D=0.0, P_f=0.0, G_f=0.0, W_p=0.0)
    return e1, e2


@dataclass(frozen=True)
class EquilibriumReport:
    """Residual of the right-hand side at a candidate equilibrium."""

    point: State
    residual: np.ndarray
    max_abs_residual: float
    note: str = ""
    converged: bool | None = None


def _residual_report(point: State, p: ModelParams, note: str = "",
                     converged: bool | None = None) -> EquilibriumReport:
    res = rhs(0.0, point, p)
    return EquilibriumReport(point=point, residual=res,
                             max_abs_residual=float(np.max(np.abs(res))),
                             note=note, converged=converged)


def endemic_equilibrium_residual(
    candidate: State,
    p: ModelParams,
    refine: bool = False,
    max_iter: int = 200,
    tol: float = 1e-10,
    damping: float = 0.5,
) -> EquilibriumReport:
    """Evaluate the RHS residual at a candidate endemic equilibrium.

    With ``refine=True`` the candidate is additionally pushed through a
    damped fixed-point iteration on the equilibrium relations, with the
    force of infection re-evaluated each pass:

        S <- (pi + xi*A) / ((1-u)*lambda + mu_h)
        A <- (1-u)*lambda*S / k1
        I <- eta*A / k2
        D <- psi*(A+I) / k3
        (P_f, G_f, W_p) <- (mu_f/(kappa*tau), rho/(kappa*tau),
                            (rho*(sigma-mu_f) - mu_f^2)/(tau*mu_f))

    Convergence target: max |rhs| <= tol * max(1, inf-norm of the point),
    within ``max_iter`` passes.  Non-convergence is reported through
    ``converged=False``; the residual of the last iterate is still
    returned.  Candidates with A = I = D = 0 are flagged as disease-free.
    """
    point = candidate
    converged = None
    if refine:
        y = candidate.as_array()
        fly = np.array([p.mu_f / (p.kappa * p.tau),
                        p.rho / (p.kappa * p.tau),
                        (p.rho * (p.sigma - p.mu_f) - p.mu_f ** 2) / (p.tau * p.mu_f)])
        converged = False
        for _ in range(max_iter):
            lam = force_of_infection(y, p)
            S_new = (p.pi + p.xi * y[1]) / ((1.0 - p.u) * lam + p.mu_h)
            A_new = (1.0 - p.u) * lam * S_new / p.k1
            I_new = p.eta * A_new / p.k2
            D_new = p.psi * (A_new + I_new) / p.k3
            target = np.array([S_new, A_new, I_new, D_new, *fly])
            y = (1.0 - damping) * y + damping * target
            res = rhs(0.0, y, p)
            if np.max(np.abs(res)) <= tol * max(1.0, np.max(np.abs(y))):
                converged = True
                break
        point = State.from_array(y)

    note = ""
    if point.A == 0.0 and point.I == 0.0 and point.D == 0.0:
        note = "disease-free, not endemic"
    return _residual_report(point, p, note=note, converged=converged)


def feasibility_bounds(p: ModelParams) -> tuple[float, float]:
    """Long-run population ceilings (pi/mu_h for humans, sigma/mu_f for flies)."""
    return p.pi / p.mu_h, p.sigma / p.mu_f


class ContractionBound(NamedTuple):
    lipschitz: float
    theta: float
    unique: bool


def contraction_bound(
    p: ModelParams,
    horizon: float,
    alpha: float,
    region_samples: int = 200,
    seed: int = 0,
) -> ContractionBound:
    """Fixed-point contraction diagnostic Theta = T^alpha * L / Gamma(alpha+1).

    L estimates the Lipschitz constant of the RHS as the maximum induced
    infinity-norm (max absolute row sum) of the Jacobian over Latin
    hypercube samples of the feasible box
    [0, pi/mu_h]^4 x [0, sigma/mu_f]^3, with the Jacobian formed by
    central finite differences at relative step 1e-6.  ``unique`` reports
    Theta < 1, the sufficient condition for a unique solution on [0, T].
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if region_samples < 100:
        raise ValueError(f"need at least 100 region samples, got {region_samples}")

    human_cap, fly_cap = feasibility_bounds(p)
    if human_cap <= 0.0 or fly_cap <= 0.0:
        raise ValueError("degenerate feasible region: a population cap is zero")

    from .sensitivity import ParamRange, lhs_sample  # deferred: avoids import cycle

    ranges = [ParamRange(name, 0.0, human_cap if i < 4 else fly_cap)
              for i, name in enumerate(COMPARTMENTS)]
    design = lhs_sample(region_samples, ranges, seed=seed)

    f = make_rhs(p)
    lipschitz = 0.0
    for row in design.matrix:
        lipschitz = max(lipschitz, _jacobian_inf_norm(f, row))
    theta = horizon ** alpha * lipschitz / math.gamma(alpha + 1.0)
    return ContractionBound(lipschitz=lipschitz, theta=theta, unique=theta < 1.0)


def _jacobian_inf_norm(f, y: np.ndarray, rel_step: float = 1e-6) -> float:
    """Max absolute row sum of the central-difference Jacobian of f at y."""
    d = y.size
    jac = np.empty((d, d))
    for j in range(d):
        step = rel_step * max(abs(y[j]), 1.0)
        y_hi = y.copy()
        y_lo = y.copy()
        y_hi[j] += step
        y_lo[j] -= step
        jac[:, j] = (f(0.0, y_hi) - f(0.0, y_lo)) / (2.0 * step)
    return float(np.max(np.sum(np.abs(jac), axis=1)))


def with_params(p: ModelParams, **changes) -> ModelParams:
    """Return a copy of ``p`` with the given fields replaced (revalidated)."""
    return replace(p, **changes)

"""Block coordinate descent engine.

One iteration updates a single block: starting from zero regularization,
the block oracle proposes a trial point (either an exact block minimizer or
a certified minimizer of the regularized quadratic model), the sufficient
descent test is applied, and the regularization parameter is doubled until
it passes.  The engine records a full per-iteration trace plus the latest
multiplier estimate per block, enough to audit every theoretical bound
after the fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .covering import MultiplierRecord, SmoothInequality

__all__ = [
    "OracleFailure",
    "SigmaRunaway",
    "BcdConfig",
    "Objective",
    "BlockContext",
    "Trial",
    "BlockSpec",
    "IterationRecord",
    "BcdState",
    "choose_block",
    "sufficient_descent",
    "sigma_update",
    "bcd_iterate",
    "run_bcd",
    "max_sigma_increases",
    "sigma_upper_bound",
    "large_step_count_bound",
    "criticality_report",
    "BlockCriticality",
    "write_trace_csv",
]


class OracleFailure(RuntimeError):
    """A block oracle could not produce a trial point."""


class SigmaRunaway(RuntimeError):
    """Regularization grew past the runaway guard; the smoothness
    assumptions behind the finite-doubling guarantee likely fail here."""


@dataclass
class BcdConfig:
    """Algorithm parameters.

    ``alpha`` scales the sufficient-descent margin, ``delta`` bounds
    complementarity, ``theta`` scales the model-certificate residual bound,
    and ``sigma_min`` seeds the doubling sequence of the regularization.
    ``oracle_mode`` selects whether exact block minimization is attempted
    at zero regularization ("alt2_first") or the model route is always used
    ("alt1_only").  ``hessian`` supplies model Hessians (None means zero).
    """

    alpha: float = 1e-8
    delta: float = 1e-6
    theta: float = 1.0
    sigma_min: float = 1e-2
    stop_tol: float = 0.0
    max_cycles: int = 1000
    oracle_mode: str = "alt2_first"
    hessian: Callable[[list[np.ndarray], int], np.ndarray] | None = None
    sigma_runaway: float = 1e12

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.sigma_min > 0:
            raise ValueError("sigma_min must be positive")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")
        if self.max_cycles < 0:
            raise ValueError("max_cycles must be nonnegative")
        if self.oracle_mode not in ("alt2_first", "alt1_only"):
            raise ValueError("oracle_mode must be 'alt2_first' or 'alt1_only'")


@dataclass(frozen=True)
class Objective:
    """f and its per-block gradient, both over the full block list."""

    value: Callable[[list[np.ndarray]], float]
    block_gradient: Callable[[list[np.ndarray], int], np.ndarray]


class BlockContext:
    """What a block oracle sees for one trial request.

    ``grad`` is the block gradient of f at the current iterate, computed
    lazily and cached across the regularization attempts of one iteration.
    """

    def __init__(self, x, i, sigma, B, grad_fn):
        self.x = x
        self.i = i
        self.sigma = sigma
        self.B = B
        self._grad_fn = grad_fn

    @property
    def x_i(self) -> np.ndarray:
        return self.x[self.i]

    @property
    def grad(self) -> np.ndarray:
        return self._grad_fn()

    def model(self):
        from .covering import QuadraticModel

        return QuadraticModel(g=self.grad, B=self.B, sigma=self.sigma, base=self.x_i)


@dataclass
class Trial:
    """Block oracle output: trial point, which certificate route produced it
    (1 = regularized model, 2 = exact block minimizer), and the multiplier
    record with the constitutive constraints backing it."""

    point: np.ndarray
    alternative: int
    record: MultiplierRecord | None = None
    constraints: tuple[SmoothInequality, ...] = ()


@dataclass(eq=False)
class BlockSpec:
    """One block: dimension, subproblem oracle, and its feasible-set handle.

    The oracle is called as ``oracle(ctx, want_global)``; ``want_global``
    asks for an exact block minimizer and is only True at zero
    regularization under "alt2_first".
    """

    dim: int
    oracle: Callable[[BlockContext, bool], Trial]
    domain: object | None = None
    supports_global: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("block dimension must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    i_k: int  # 1-based block id
    sigma_k: float
    n_sigma_increases: int
    f_value: float
    step_norm: float
    alternative: int
    f_evals: int


@dataclass(eq=False)
class BcdState:
    """Mutable run state: iterate, counters, trace, per-block multiplier store."""

    x: list[np.ndarray]
    f_value: float
    f0: float
    n_blocks: int
    k: int = 0
    records: list[IterationRecord] = field(default_factory=list)
    multipliers: dict[int, tuple[MultiplierRecord | None, tuple[SmoothInequality, ...]]] = field(
        default_factory=dict
    )
    termination: str | None = None

    @property
    def sigma_history(self) -> list[float]:
        return [r.sigma_k for r in self.records]

    @property
    def f_values(self) -> list[float]:
        return [r.f_value for r in self.records]

    @property
    def cycles(self) -> int:
        """Number of started passes over the blocks."""
        return -(-len(self.records) // self.n_blocks)

    def cycle_end_values(self) -> list[float]:
        """f at the end of each full pass (last partial pass included)."""
        out = []
        for c in range(self.cycles):
            end = min((c + 1) * self.n_blocks, len(self.records))
            out.append(self.records[end - 1].f_value)
        return out


def choose_block(k: int, n_blocks: int) -> int:
    """Cyclic schedule: iteration k updates block (k mod n_blocks) + 1 (1-based),
    so every block is visited exactly once in any n_blocks consecutive iterations."""
    return k % n_blocks + 1


def sufficient_descent(f_trial: float, f_current: float, alpha: float, step_norm: float) -> bool:
    """Accept when f_trial <= f_current - alpha * step_norm**2 (inclusive)."""
    return f_trial <= f_current - alpha * step_norm * step_norm


def sigma_update(sigma: float, sigma_min: float) -> float:
    """Next regularization value: max(sigma_min, 2 * sigma)."""
    return max(sigma_min, 2.0 * sigma)


class _Lazy:
    __slots__ = ("_fn", "_value", "_have")

    def __init__(self, fn):
        self._fn = fn
        self._value = None
        self._have = False

    def __call__(self):
        if not self._have:
            self._value = self._fn()
            self._have = True
        return self._value


def bcd_iterate(
    state: BcdState,
    config: BcdConfig,
    objective: Objective,
    blocks: Sequence[BlockSpec],
) -> IterationRecord:
    """Run one accepted iteration, doubling sigma until sufficient descent."""
    n = len(blocks)
    i = choose_block(state.k, n) - 1
    spec = blocks[i]
    if config.hessian is not None:
        B = np.asarray(config.hessian(state.x, i), dtype=float)
    else:
        B = np.zeros((spec.dim, spec.dim))
    grad_fn = _Lazy(lambda: np.asarray(objective.block_gradient(state.x, i), dtype=float))
    f_cur = state.f_value
    sigma = 0.0
    increases = 0
    f_evals = 0
    while True:
        want_global = (
            sigma == 0.0 and config.oracle_mode == "alt2_first" and spec.supports_global
        )
        ctx = BlockContext(state.x, i, sigma, B, grad_fn)
        trial = spec.oracle(ctx, want_global)
        if trial is None or trial.point is None:
            raise OracleFailure(f"block {i + 1} oracle returned no trial at sigma={sigma:g}")
        point = np.asarray(trial.point, dtype=float)
        if not np.all(np.isfinite(point)):
            raise OracleFailure(f"block {i + 1} oracle returned non-finite trial {point}")
        if sigma > 0.0 and trial.alternative != 1:
            raise OracleFailure(
                f"block {i + 1} oracle must use the model certificate at sigma={sigma:g} > 0"
            )
        delta_vec = point - state.x[i]
        step = float(np.linalg.norm(delta_vec))
        x_trial = list(state.x)
        x_trial[i] = point
        f_trial = float(objective.value(x_trial))
        f_evals += 1
        if sufficient_descent(f_trial, f_cur, config.alpha, step):
            state.x = x_trial
            state.f_value = f_trial
            state.multipliers[i] = (trial.record, tuple(trial.constraints))
            rec = IterationRecord(
                k=state.k,
                i_k=i + 1,
                sigma_k=sigma,
                n_sigma_increases=increases,
                f_value=f_trial,
                step_norm=step,
                alternative=trial.alternative,
                f_evals=f_evals,
            )
            state.records.append(rec)
            state.k += 1
            return rec
        sigma = sigma_update(sigma, config.sigma_min)
        increases += 1
        if sigma > config.sigma_runaway * config.sigma_min:
            raise SigmaRunaway(
                f"sigma ({sigma:g}) exceeded {config.sigma_runaway:g} * sigma_min at block "
                f"{i + 1}, iteration {state.k}; gradient Lipschitz continuity is suspect"
            )


def run_bcd(
    x0: Sequence[np.ndarray],
    config: BcdConfig,
    objective: Objective,
    blocks: Sequence[BlockSpec],
    observer: Callable[[BcdState, IterationRecord], None] | None = None,
) -> BcdState:
    """Iterate until one full pass moves no block by more than ``stop_tol``
    (sup norm; the default 0 demands exact repetition) or ``max_cycles``
    passes complete.  ``observer`` is called after each accepted iteration."""
    n = len(blocks)
    if n < 1:
        raise ValueError("at least one block required")
    x = []
    for i, (xi, spec) in enumerate(zip(x0, blocks)):
        a = np.asarray(xi, dtype=float).copy()
        if a.shape != (spec.dim,):
            raise ValueError(f"block {i + 1} start has shape {a.shape}, expected ({spec.dim},)")
        x.append(a)
    if len(x) != n:
        raise ValueError("x0 must supply one point per block")
    f0 = float(objective.value(x))
    state = BcdState(x=x, f_value=f0, f0=f0, n_blocks=n)
    quiet = 0
    max_iters = config.max_cycles * n
    while state.k < max_iters:
        x_prev_i = None
        i = choose_block(state.k, n) - 1
        x_prev_i = state.x[i]
        rec = bcd_iterate(state, config, objective, blocks)
        sup_step = float(np.max(np.abs(state.x[i] - x_prev_i)))
        quiet = quiet + 1 if sup_step <= config.stop_tol else 0
        if observer is not None:
            observer(state, rec)
        if quiet >= n:
            state.termination = "repetition"
            return state
    state.termination = "max_cycles"
    return state


def max_sigma_increases(gamma: float, c_B: float, alpha: float, sigma_min: float) -> float:
    """Upper bound on regularization doublings needed in one iteration:
    log2((gamma + c_B + 2 alpha) / sigma_min) + 1."""
    return math.log2((gamma + c_B + 2.0 * alpha) / sigma_min) + 1.0


def sigma_upper_bound(gamma: float, c_B: float, alpha: float) -> float:
    """Strict upper bound on every accepted sigma: 2 (gamma + c_B + 2 alpha)."""
    return 2.0 * (gamma + c_B + 2.0 * alpha)


def large_step_count_bound(f0: float, f_bound: float, alpha: float, epsilon: float) -> float:
    """Upper bound on iterations with step norm exceeding epsilon:
    (f0 - f_bound) / (alpha * epsilon**2)."""
    return (f0 - f_bound) / (alpha * epsilon * epsilon)


@dataclass(frozen=True)
class BlockCriticality:
    block: int  # 1-based
    residual: float
    worst_complementarity: float
    set_index: int


def criticality_report(state: BcdState, objective: Objective) -> list[BlockCriticality]:
    """Per-block stationarity at the current iterate against stored multipliers.

    For each block, the gradient of f at the *current* full iterate is
    combined with the multipliers and constitutive constraints recorded at
    that block's last update; the report carries the Lagrangian-gradient
    norm and the worst complementarity value.
    """
    out = []
    for i in range(state.n_blocks):
        grad = np.asarray(objective.block_gradient(state.x, i), dtype=float)
        rec, constraints = state.multipliers.get(i, (None, ()))
        if rec is None or not constraints:
            residual = float(np.linalg.norm(grad))
            worst = 0.0
            set_index = rec.set_index if rec is not None else -1
        else:
            xi = state.x[i]
            lagr = grad.copy()
            comp = []
            for mu_l, c in zip(rec.mu, constraints):
                lagr = lagr + mu_l * np.asarray(c.gradient(xi), dtype=float)
                comp.append(min(mu_l, -float(c.evaluate(xi))))
            residual = float(np.linalg.norm(lagr))
            worst = max(comp)
            set_index = rec.set_index
        out.append(
            BlockCriticality(
                block=i + 1, residual=residual, worst_complementarity=worst, set_index=set_index
            )
        )
    return out


def write_trace_csv(state: BcdState, path) -> None:
    """Trace export, floats rendered with 17 significant digits."""
    lines = ["k,i_k,sigma_k,n_sigma_increases,f,step_norm,alternative,f_evals"]
    for r in state.records:
        lines.append(
            f"{r.k},{r.i_k},{r.sigma_k:.17g},{r.n_sigma_increases},"
            f"{r.f_value:.17g},{r.step_norm:.17g},{r.alternative},{r.f_evals}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

"""Least-squares fitting for the factorized model and the per-pair baseline.

The minimizer is a damped Gauss-Newton loop (Levenberg-Marquardt with
Marquardt diagonal scaling) over analytic residuals and Jacobians.  Width
parameters are optimized as log(sigma) so positivity holds by construction;
kernel means are unconstrained.  Several seeded starting points are tried
and the lowest final cost wins.

Records are reindexed into a canonical order, sorted by (event, adverbial,
elapsed minutes, respondent, rating), before any array is built, so fitted
parameters are bit-for-bit reproducible under record shuffling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf as _erf_vec

from .data import Dataset
from .model import (
    AdverbialParams,
    EventParams,
    FactorizedModel,
    PairGaussianModel,
    PairParams,
    UnknownIdError,
)

__all__ = [
    "FitConfig",
    "FitReport",
    "fit_factorized",
    "fit_baseline",
    "residuals_factorized",
    "jacobian_factorized",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings shared by both model families.

    per_cell_means collapses repeated votes on one (event, adverbial, time)
    cell into their mean rating before fitting; by default every vote is a
    separate residual.
    """

    max_iterations: int = 500
    cost_tolerance: float = 1e-10
    param_tolerance: float = 1e-8
    multistart_count: int = 8
    seed: int = 0
    per_cell_means: bool = False

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.cost_tolerance < 0 or self.param_tolerance < 0:
            raise ValueError("tolerances must be >= 0")
        if self.multistart_count < 1:
            raise ValueError(f"multistart_count must be >= 1, got {self.multistart_count}")


@dataclass(frozen=True)
class FitReport:
    """Outcome of one fit: the model plus cost and convergence accounting.

    final_cost is the sum of squared residuals.  iterations counts accepted
    optimizer steps (summed over pairs for the baseline).  warnings lists
    pairs whose width had to be fixed heuristically.
    """

    model: FactorizedModel | PairGaussianModel
    final_cost: float
    iterations: int
    converged: bool
    residual_count: int
    parameter_count: int
    warnings: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Vectorized kernels shared by residual and Jacobian evaluation.


def _composite_terms(t, sigma_e, mu_a, sigma_a):
    """Intermediate arrays of the composite curve at elapsed times t.

    Overflow and zero-division are left to produce inf/nan here; the
    optimizer rejects any trial point with a non-finite cost or step.
    """
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        u = t / sigma_e
        # same association as the scalar composite_probability path
        x = 0.5 * (_erf_vec(t / (sigma_e * _SQRT2)) + 1.0)
        z = (x - mu_a) / sigma_a
        k = np.exp(-0.5 * z * z)
    return u, x, z, k


def _jacobian_columns(u, z, k, sigma_a):
    """Partials of the composite value w.r.t. (log sigma_e, mu_a, log sigma_a).

    With x = Phi(u), u = t/sigma_e and z = (x - mu_a)/sigma_a:
        d/d log sigma_e = z * k * u * phi(u) / sigma_a
        d/d mu_a        = z * k / sigma_a
        d/d log sigma_a = z^2 * k
    """
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        phi = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
        d_log_sigma_e = z * k * u * phi / sigma_a
        d_mu_a = z * k / sigma_a
        d_log_sigma_a = z * z * k
    return d_log_sigma_e, d_mu_a, d_log_sigma_a


# ---------------------------------------------------------------------------
# Row extraction and canonical ordering.


def _rows_from_dataset(data: Dataset, per_cell_means: bool):
    """(event, adverbial, t_minutes, respondent, rating) rows in canonical order."""
    if not data.records:
        raise ValueError("dataset is empty")
    rows = [
        (r.event_id, r.adverbial_id, r.elapsed.to_minutes(), r.respondent_id or "", r.rating)
        for r in data.records
    ]
    if per_cell_means:
        cells: dict[tuple[str, str, float], list[float]] = {}
        for event_id, adverbial_id, t, _, rating in rows:
            cells.setdefault((event_id, adverbial_id, t), []).append(rating)
        # fsum is exactly rounded, so the mean is independent of vote order.
        rows = [
            (event_id, adverbial_id, t, "", math.fsum(ratings) / len(ratings))
            for (event_id, adverbial_id, t), ratings in cells.items()
        ]
    rows.sort()
    return rows


def _coverage_check(model: FactorizedModel, data: Dataset) -> None:
    for rec in data.records:
        if rec.event_id not in model.events:
            raise UnknownIdError(f"event {rec.event_id!r} not in model")
        if rec.adverbial_id not in model.adverbials:
            raise UnknownIdError(f"adverbial {rec.adverbial_id!r} not in model")


def _dataset_arrays(model: FactorizedModel, data: Dataset):
    """Per-record arrays in dataset order, indexed against sorted model ids."""
    _coverage_check(model, data)
    event_ids = sorted(model.events)
    adverbial_ids = sorted(model.adverbials)
    ev_index = {eid: i for i, eid in enumerate(event_ids)}
    ad_index = {aid: i for i, aid in enumerate(adverbial_ids)}
    t = np.array([r.elapsed.to_minutes() for r in data.records], dtype=float)
    y = np.array([r.rating for r in data.records], dtype=float)
    ev_idx = np.array([ev_index[r.event_id] for r in data.records], dtype=int)
    ad_idx = np.array([ad_index[r.adverbial_id] for r in data.records], dtype=int)
    sigma_e_by_event = np.array([model.events[eid].sigma_e for eid in event_ids], dtype=float)
    mu_by_adv = np.array([model.adverbials[aid].mu_a for aid in adverbial_ids], dtype=float)
    sigma_by_adv = np.array([model.adverbials[aid].sigma_a for aid in adverbial_ids], dtype=float)
    return event_ids, adverbial_ids, t, y, ev_idx, ad_idx, sigma_e_by_event, mu_by_adv, sigma_by_adv


def residuals_factorized(model: FactorizedModel, data: Dataset) -> np.ndarray:
    """Per-record residuals, prediction minus rating, in dataset order."""
    (_, _, t, y, ev_idx, ad_idx, sigma_e, mu_a, sigma_a) = _dataset_arrays(model, data)
    _, _, _, k = _composite_terms(t, sigma_e[ev_idx], mu_a[ad_idx], sigma_a[ad_idx])
    return k - y


def jacobian_factorized(model: FactorizedModel, data: Dataset) -> np.ndarray:
    """Residual Jacobian w.r.t. (log sigma_e, mu_a, log sigma_a), dataset order.

    Columns are the model's events in sorted id order, then for each
    adverbial in sorted id order its (mu_a, log sigma_a) pair.  Entries for
    parameters a record's pair does not involve are exactly zero.
    """
    (event_ids, _, t, _, ev_idx, ad_idx, sigma_e, mu_a, sigma_a) = _dataset_arrays(model, data)
    u, _, z, k = _composite_terms(t, sigma_e[ev_idx], mu_a[ad_idx], sigma_a[ad_idx])
    d_se, d_mu, d_sa = _jacobian_columns(u, z, k, sigma_a[ad_idx])
    n = t.shape[0]
    n_events = len(event_ids)
    jac = np.zeros((n, n_events + 2 * (sigma_a.shape[0])))
    rows = np.arange(n)
    jac[rows, ev_idx] = d_se
    jac[rows, n_events + 2 * ad_idx] = d_mu
    jac[rows, n_events + 2 * ad_idx + 1] = d_sa
    return jac


# ---------------------------------------------------------------------------
# The minimizer.


@dataclass
class _MinimizeResult:
    theta: np.ndarray
    cost: float
    iterations: int
    converged: bool
    cost_history: list[float] = field(default_factory=list)


def _levenberg_marquardt(residual_fn, jacobian_fn, theta0, config: FitConfig) -> _MinimizeResult:
    """Damped Gauss-Newton with Marquardt scaling.

    Steps are accepted only when they strictly lower the cost, so the
    sequence of accepted costs is monotone.  Termination: relative cost
    decrease below cost_tolerance, step norm below param_tolerance (scaled
    by the parameter norm), exact zero cost, or no downhill step at any
    damping (a stationary point).  Hitting max_iterations without one of
    those leaves converged False.
    """
    theta = np.asarray(theta0, dtype=float).copy()
    r = residual_fn(theta)
    cost = float(r @ r)
    history = [cost]
    if not math.isfinite(cost):
        return _MinimizeResult(theta, math.inf, 0, False, history)
    lam = 1e-3
    accepted = 0
    converged = cost == 0.0
    while not converged and accepted < config.max_iterations:
        jac = jacobian_fn(theta)
        grad = jac.T @ r
        hess = jac.T @ jac
        diag = np.diag(hess).copy()
        diag[diag <= 0.0] = 1.0  # flat column: fall back to unit-scale damping
        step = None
        candidate = None
        r_accepted = None
        cost_new = math.inf
        while lam <= 1e14:
            try:
                raw_step = np.linalg.solve(hess + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            if not np.all(np.isfinite(raw_step)):
                lam *= 10.0
                continue
            trial = theta + raw_step
            r_new = residual_fn(trial)
            trial_cost = float(r_new @ r_new)
            if math.isfinite(trial_cost) and trial_cost < cost:
                step = trial - theta
                candidate = trial
                r_accepted = r_new
                cost_new = trial_cost
                break
            lam *= 10.0
        if step is None:
            # No damping value yields a decrease: treat as converged in place.
            converged = True
            break
        rel_decrease = (cost - cost_new) / cost
        step_norm = float(np.linalg.norm(step))
        theta_norm = float(np.linalg.norm(theta))
        theta = candidate
        r = r_accepted
        cost = cost_new
        accepted += 1
        history.append(cost)
        lam = max(lam / 3.0, 1e-12)
        if (
            cost == 0.0
            or rel_decrease < config.cost_tolerance
            or step_norm <= config.param_tolerance * (theta_norm + config.param_tolerance)
        ):
            converged = True
    return _MinimizeResult(theta, cost, accepted, converged, history)


# ---------------------------------------------------------------------------
# Factorized fit.


class _FactorizedProblem:
    """Vectorized objective over a canonically ordered dataset."""

    def __init__(self, data: Dataset, per_cell_means: bool):
        rows = _rows_from_dataset(data, per_cell_means)
        self.event_ids = sorted({row[0] for row in rows})
        self.adverbial_ids = sorted({row[1] for row in rows})
        ev_index = {eid: i for i, eid in enumerate(self.event_ids)}
        ad_index = {aid: i for i, aid in enumerate(self.adverbial_ids)}
        self.t = np.array([row[2] for row in rows], dtype=float)
        self.y = np.array([row[4] for row in rows], dtype=float)
        self.ev_idx = np.array([ev_index[row[0]] for row in rows], dtype=int)
        self.ad_idx = np.array([ad_index[row[1]] for row in rows], dtype=int)
        self.n_residuals = len(rows)
        self.n_events = len(self.event_ids)
        self.n_adverbials = len(self.adverbial_ids)
        self.n_params = self.n_events + 2 * self.n_adverbials
        # Distinct elapsed times per observed pair, for the identifiability check.
        pair_times: dict[tuple[str, str], set[float]] = {}
        for event_id, adverbial_id, t, _, _ in rows:
            pair_times.setdefault((event_id, adverbial_id), set()).add(t)
        self.pair_times = pair_times

    def split_theta(self, theta: np.ndarray):
        with np.errstate(over="ignore", under="ignore"):
            sigma_e = np.exp(theta[: self.n_events])
            adv = theta[self.n_events :].reshape(self.n_adverbials, 2)
            mu_a = adv[:, 0]
            sigma_a = np.exp(adv[:, 1])
        return sigma_e, mu_a, sigma_a

    def residuals(self, theta: np.ndarray) -> np.ndarray:
        sigma_e, mu_a, sigma_a = self.split_theta(theta)
        _, _, _, k = _composite_terms(
            self.t, sigma_e[self.ev_idx], mu_a[self.ad_idx], sigma_a[self.ad_idx]
        )
        return k - self.y

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        sigma_e, mu_a, sigma_a = self.split_theta(theta)
        sa = sigma_a[self.ad_idx]
        u, _, z, k = _composite_terms(self.t, sigma_e[self.ev_idx], mu_a[self.ad_idx], sa)
        d_se, d_mu, d_sa = _jacobian_columns(u, z, k, sa)
        jac = np.zeros((self.n_residuals, self.n_params))
        rows = np.arange(self.n_residuals)
        jac[rows, self.ev_idx] = d_se
        jac[rows, self.n_events + 2 * self.ad_idx] = d_mu
        jac[rows, self.n_events + 2 * self.ad_idx + 1] = d_sa
        return jac

    def model_from_theta(self, theta: np.ndarray) -> FactorizedModel:
        sigma_e, mu_a, sigma_a = self.split_theta(theta)
        return FactorizedModel.from_params(
            [EventParams(eid, float(sigma_e[i])) for i, eid in enumerate(self.event_ids)],
            [
                AdverbialParams(aid, float(mu_a[i]), float(sigma_a[i]))
                for i, aid in enumerate(self.adverbial_ids)
            ],
        )


def _require_identifiable(pair_times: dict[tuple[str, str], set[float]]) -> None:
    for (event_id, adverbial_id), times in sorted(pair_times.items()):
        if len(times) < 2:
            raise ValueError(
                f"pair ({event_id!r}, {adverbial_id!r}) has fewer than 2 distinct "
                "elapsed times; the fit is not identifiable"
            )


def _informed_kernel_start(problem: _FactorizedProblem, sigma0, config: FitConfig):
    """Per-adverbial (mu_a, log sigma_a) from decoupled kernel fits.

    Holding each event width at sigma0 fixes the precedence values, which
    turns every adverbial into an independent two-parameter Gaussian fit on
    (precedence, rating) points.  Each is solved from a deterministic
    candidate grid plus a rating-weighted moment guess; the winners seed
    the joint fit close to the global basin.
    """
    x0 = 0.5 * (_erf_vec(problem.t / (sigma0[problem.ev_idx] * _SQRT2)) + 1.0)
    theta_adv = np.empty((problem.n_adverbials, 2))
    for j in range(problem.n_adverbials):
        mask = problem.ad_idx == j
        xs = x0[mask]
        ys = problem.y[mask]
        candidates = [
            np.array([mu, math.log(sigma)])
            for mu in (0.35, 0.5, 0.65, 0.8, 0.95)
            for sigma in (0.05, 0.15)
        ]
        total = float(ys.sum())
        if total > 0.0:
            mean = float((ys * xs).sum() / total)
            var = float((ys * (xs - mean) ** 2).sum() / total)
            sigma = math.sqrt(var) if var > 0.0 else 0.1
            candidates.append(np.array([mean, math.log(min(max(sigma, 1e-3), 1.0))]))
        residual_fn, jacobian_fn = _pair_residual_fns(xs, ys)
        best: _MinimizeResult | None = None
        for theta0 in candidates:
            result = _levenberg_marquardt(residual_fn, jacobian_fn, theta0, config)
            if best is None or result.cost < best.cost:
                best = result
        assert best is not None
        theta_adv[j] = best.theta
    return theta_adv


def _factorized_starts(problem: _FactorizedProblem, config: FitConfig) -> list[np.ndarray]:
    """Initial points: a fixed spread start, an informed start, perturbations.

    The spread start puts sigma_e at each event's median elapsed time and
    the kernel means evenly over [0.3, 1.0] with width 0.1.  The informed
    start keeps those event widths but solves each kernel separately first;
    the remaining starts are seeded perturbations of the informed one.
    """
    sigma0 = np.empty(problem.n_events)
    for i in range(problem.n_events):
        sigma0[i] = np.median(problem.t[problem.ev_idx == i])
    sigma0 = np.maximum(sigma0, 1e-9)
    if problem.n_adverbials == 1:
        mu0 = np.array([0.65])
    else:
        mu0 = np.linspace(0.3, 1.0, problem.n_adverbials)
    spread = np.concatenate(
        [np.log(sigma0), np.column_stack([mu0, np.full_like(mu0, math.log(0.1))]).ravel()]
    )
    starts = [spread]
    if config.multistart_count == 1:
        return starts

    informed = spread.copy()
    informed[problem.n_events :] = _informed_kernel_start(problem, sigma0, config).ravel()
    starts.append(informed)
    rng = np.random.default_rng(config.seed)
    for _ in range(config.multistart_count - 2):
        pert = informed.copy()
        pert[: problem.n_events] += rng.uniform(
            -math.log(10.0), math.log(10.0), problem.n_events
        )
        adv = pert[problem.n_events :].reshape(problem.n_adverbials, 2)
        adv[:, 0] += rng.uniform(-0.25, 0.25, problem.n_adverbials)
        adv[:, 1] += rng.uniform(-1.0, 1.0, problem.n_adverbials)
        starts.append(pert)
    return starts


def fit_factorized(data: Dataset, config: FitConfig = FitConfig()) -> FitReport:
    """Joint least-squares fit of all event and adverbial parameters.

    Every record contributes one residual (cell means instead if the config
    asks for them).  Raises ValueError when the dataset is empty or some
    observed pair has fewer than two distinct elapsed times.  A fit that
    exhausts max_iterations is returned with converged False rather than
    raised.
    """
    problem = _FactorizedProblem(data, config.per_cell_means)
    _require_identifiable(problem.pair_times)
    best: _MinimizeResult | None = None
    for theta0 in _factorized_starts(problem, config):
        result = _levenberg_marquardt(problem.residuals, problem.jacobian, theta0, config)
        if best is None or result.cost < best.cost:
            best = result
    assert best is not None
    return FitReport(
        model=problem.model_from_theta(best.theta),
        final_cost=best.cost,
        iterations=best.iterations,
        converged=best.converged,
        residual_count=problem.n_residuals,
        parameter_count=problem.n_params,
    )


# ---------------------------------------------------------------------------
# Baseline fit.


def _pair_residual_fns(t: np.ndarray, y: np.ndarray):
    def residuals(theta: np.ndarray) -> np.ndarray:
        mu, log_sigma = theta
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            z = (t - mu) / np.exp(log_sigma)
            return np.exp(-0.5 * z * z) - y

    def jacobian(theta: np.ndarray) -> np.ndarray:
        mu, log_sigma = theta
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            sigma = np.exp(log_sigma)
            z = (t - mu) / sigma
            k = np.exp(-0.5 * z * z)
            return np.column_stack([z * k / sigma, z * z * k])

    return residuals, jacobian


def _pair_starts(t: np.ndarray, y: np.ndarray, rng, count: int) -> list[np.ndarray]:
    span = float(t.max() - t.min())
    weight = float(y.sum())
    if weight > 0.0:
        mu0 = float((y * t).sum() / weight)
        var0 = float((y * (t - mu0) ** 2).sum() / weight)
        sigma0 = math.sqrt(var0) if var0 > 0.0 else span / 4.0
    else:
        mu0 = float(t.mean())
        sigma0 = span / 4.0
    sigma0 = max(sigma0, span * 1e-3, 1e-6)
    base = np.array([mu0, math.log(sigma0)])
    starts = [base]
    for _ in range(count - 1):
        starts.append(
            base + np.array([rng.uniform(-1.0, 1.0) * span, rng.uniform(-1.5, 1.5)])
        )
    return starts


def fit_baseline(data: Dataset, config: FitConfig = FitConfig()) -> FitReport:
    """Independent per-pair Gaussian fits in raw minutes.

    Pairs with a single distinct elapsed time or zero rating variance leave
    the width non-identifiable: mu is fixed at the rating-weighted mean time
    (plain mean when all ratings are zero), sigma falls back to the observed
    time span with a one-minute floor, and the pair is reported in warnings.
    iterations is the sum of accepted steps across pairs.
    """
    rows = _rows_from_dataset(data, config.per_cell_means)
    groups: dict[tuple[str, str], list[tuple[float, float]]] = {}
    for event_id, adverbial_id, t, _, rating in rows:
        groups.setdefault((event_id, adverbial_id), []).append((t, rating))

    rng = np.random.default_rng(config.seed)
    pairs: list[PairParams] = []
    warnings: list[str] = []
    total_cost_terms: list[float] = []
    total_iterations = 0
    all_converged = True
    n_residuals = len(rows)

    for (event_id, adverbial_id) in sorted(groups):
        cell = groups[(event_id, adverbial_id)]
        t = np.array([point[0] for point in cell], dtype=float)
        y = np.array([point[1] for point in cell], dtype=float)
        distinct_times = len(set(t.tolist()))
        degenerate = distinct_times < 2 or float(y.max() - y.min()) == 0.0
        if degenerate:
            weight = float(y.sum())
            mu = float((y * t).sum() / weight) if weight > 0.0 else float(t.mean())
            sigma = max(float(t.max() - t.min()), 1.0)
            warnings.append(
                f"pair ({event_id!r}, {adverbial_id!r}): width not identifiable "
                f"from degenerate data; fixed sigma at {sigma:g} minutes"
            )
            residuals, _ = _pair_residual_fns(t, y)
            cost = float(np.sum(residuals(np.array([mu, math.log(sigma)])) ** 2))
        else:
            residual_fn, jacobian_fn = _pair_residual_fns(t, y)
            best: _MinimizeResult | None = None
            for theta0 in _pair_starts(t, y, rng, config.multistart_count):
                result = _levenberg_marquardt(residual_fn, jacobian_fn, theta0, config)
                if best is None or result.cost < best.cost:
                    best = result
            assert best is not None
            mu = float(best.theta[0])
            sigma = float(math.exp(best.theta[1]))
            cost = best.cost
            total_iterations += best.iterations
            all_converged = all_converged and best.converged
        pairs.append(PairParams(event_id, adverbial_id, mu, sigma))
        total_cost_terms.append(cost)

    return FitReport(
        model=PairGaussianModel.from_params(pairs),
        final_cost=math.fsum(total_cost_terms),
        iterations=total_iterations,
        converged=all_converged,
        residual_count=n_residuals,
        parameter_count=2 * len(pairs),
        warnings=tuple(warnings),
    )

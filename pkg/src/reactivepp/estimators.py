"""Estimator-style wrappers around the two fitting pipelines.

Both follow the scikit-learn protocol (constructor holds hyperparameters,
fit(X) learns attributes with trailing underscores, get_params/set_params
work) so they can sit inside sklearn model-selection utilities. X is a list
of EntityRecord with covariates already normalized.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import abcfit, cf, core, kernels, ranking


class CfEstimator(BaseEstimator):
    """Conditional-frequency fit: baseline rate, event lift, excitation decay.

    After fit: base_rate_, event_lift_ (raw ratio may be negative; params_
    clamps it at 0), excitation_amplitude_, excitation_decay_, curve_,
    trails_, fit_flag_, params_.
    """

    def __init__(self, isolation_gap_days=365.0, window_days=365, n_starts=8,
                 min_points=10):
        self.isolation_gap_days = isolation_gap_days
        self.window_days = window_days
        self.n_starts = n_starts
        self.min_points = min_points

    def fit(self, X, y=None, t_end=None):
        if t_end is None:
            t_end = max((float(e.events[-1]) for e in X if e.events.size),
                        default=0.0) + 1.0
        self.t_end_ = float(t_end)
        self.trails_ = cf.build_trails(X, self.t_end_, self.isolation_gap_days,
                                       self.window_days)
        self.curve_ = cf.cf_curve(self.trails_, self.window_days)
        fit = cf.fit_excitation_curve(self.curve_, self.n_starts,
                                      self.min_points)
        self.excitation_amplitude_ = fit.amplitude
        self.excitation_decay_ = fit.decay
        self.fit_flag_ = fit.flag
        base = cf.estimate_baseline(X, self.t_end_, self.isolation_gap_days)
        self.base_rate_ = base.base_rate
        self.event_lift_ = base.event_lift
        self.params_ = core.RppParams(
            self.base_rate_, max(self.event_lift_, 0.0),
            core.KernelParams(excitation_decay=self.excitation_decay_))
        return self

    def predict(self, X, day):
        """Per-entity intensity at `day` under the fitted model."""
        return ranking.vulnerability_snapshot(X, self.params_, day)


class AbcDecayEstimator(BaseEstimator):
    """ABC fit of the covariate-link coefficients for the excitation decay.

    After fit: upsilon_, manifold_, region_, proposals_, params_. predict
    maps covariates to per-entity excitation decay rates under upsilon_.
    """

    def __init__(self, n_proposals=1000, quantile=0.10, bin_width_days=30.0,
                 max_gap_days=1800.0, sigma_mode="variance",
                 include_regulation=False, n_jobs=None, seed=0,
                 base_rate=None, event_lift=None, excitation_cap=1.0,
                 excitation_slope=1.0, regulation_cap=0.4,
                 regulation_slope=3.75, isolation_gap_days=365.0):
        self.n_proposals = n_proposals
        self.quantile = quantile
        self.bin_width_days = bin_width_days
        self.max_gap_days = max_gap_days
        self.sigma_mode = sigma_mode
        self.include_regulation = include_regulation
        self.n_jobs = n_jobs
        self.seed = seed
        self.base_rate = base_rate
        self.event_lift = event_lift
        self.excitation_cap = excitation_cap
        self.excitation_slope = excitation_slope
        self.regulation_cap = regulation_cap
        self.regulation_slope = regulation_slope
        self.isolation_gap_days = isolation_gap_days

    def _base_params(self, X, t_end):
        base_rate, event_lift = self.base_rate, self.event_lift
        if base_rate is None or event_lift is None:
            est = cf.estimate_baseline(X, t_end, self.isolation_gap_days)
            if base_rate is None:
                base_rate = est.base_rate
            if event_lift is None:
                event_lift = max(est.event_lift, 0.0)
        kern = core.KernelParams(self.excitation_cap, self.excitation_slope,
                                 self.regulation_cap, self.regulation_slope)
        return core.RppParams(base_rate, event_lift, kern)

    def fit(self, X, y=None, t_end=None):
        if t_end is None:
            t_end = max((float(e.events[-1]) for e in X if e.events.size),
                        default=0.0) + 1.0
        self.t_end_ = float(t_end)
        base = self._base_params(X, self.t_end_)
        result = abcfit.fit_abc(
            X, base, self.t_end_, self.n_proposals, self.seed, self.quantile,
            self.bin_width_days, self.max_gap_days, self.sigma_mode,
            self.include_regulation, self.n_jobs)
        self.upsilon_ = result.upsilon
        self.manifold_ = result.manifold
        self.region_ = result.region
        self.proposals_ = result.proposals
        kern = core.RegressionKernel(
            self.upsilon_, None, self.excitation_cap, self.excitation_slope,
            self.regulation_cap, self.regulation_slope)
        self.params_ = core.RppParams(base.base_rate, base.event_lift, kern)
        return self

    def predict(self, X):
        """Per-entity excitation decay rates induced by the fitted link."""
        covs = np.array([e.covariates for e in X])
        return kernels.covariate_decay(covs, self.upsilon_)

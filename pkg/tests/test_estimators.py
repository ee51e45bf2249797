"""Estimator wrappers: scikit-learn protocol compliance and agreement with
the underlying fitting functions."""

from __future__ import annotations

import numpy as np
from sklearn.base import clone

from reactivepp import kernels, simulate
from reactivepp.core import EntityRecord, KernelParams, RppParams
from reactivepp.estimators import AbcDecayEstimator, CfEstimator

COV0 = np.zeros(3)


def cf_corpus(n=600, seed=17):
    truth = RppParams(base_rate=1e-3, event_lift=0.05,
                      kernel=KernelParams(excitation_decay=0.05))
    blank = [EntityRecord(f"m{i}", COV0) for i in range(n)]
    sims = simulate.corpus_simulate(blank, truth,
                                    simulate.SimConfig(0.0, 4000.0, seed=seed))
    return [EntityRecord(r.entity_id, COV0, r.events) for r in sims]


def abc_corpus(n=60, seed=19):
    rng = np.random.default_rng(seed)
    covs = rng.uniform(-0.5, 0.5, (n, 3))
    truth = RppParams(base_rate=2e-3, event_lift=0.05)
    blank = [EntityRecord(f"m{i}", covs[i]) for i in range(n)]
    sims = simulate.corpus_simulate(blank, truth,
                                    simulate.SimConfig(0.0, 4000.0, seed=seed))
    return [EntityRecord(r.entity_id, covs[i], r.events)
            for i, r in enumerate(sims)]


def test_cf_estimator_sklearn_protocol():
    est = CfEstimator(window_days=200)
    params = est.get_params()
    assert params["window_days"] == 200
    assert params["isolation_gap_days"] == 365.0
    est.set_params(n_starts=4)
    assert est.get_params()["n_starts"] == 4
    twin = clone(est)
    assert twin.get_params() == est.get_params()


def test_cf_estimator_fit_attributes_and_predict():
    corpus = cf_corpus()
    est = CfEstimator().fit(corpus)
    last = max(float(e.events[-1]) for e in corpus if e.events.size)
    assert est.t_end_ == last + 1.0
    assert est.base_rate_ > 0
    assert est.excitation_amplitude_ > 0
    assert est.excitation_decay_ > 0
    assert len(est.curve_.grid) == 365
    assert len(est.trails_) > 100
    assert est.params_.base_rate == est.base_rate_
    assert est.params_.event_lift == max(est.event_lift_, 0.0)
    assert est.params_.kernel.excitation_decay == est.excitation_decay_
    day = 3000.0
    pred = est.predict(corpus, day)
    assert pred.shape == (len(corpus),)
    assert np.all(pred >= est.params_.base_rate * (1.0 - 1e-12))
    # an entity with a very recent event must sit above one with none
    recent = max(range(len(corpus)),
                 key=lambda i: (corpus[i].events[corpus[i].events < day][-1]
                                if np.any(corpus[i].events < day) else -1.0))
    quiet = next(i for i, e in enumerate(corpus) if e.events.size == 0)
    assert pred[recent] > pred[quiet]


def test_cf_estimator_fit_deterministic():
    corpus = cf_corpus(n=300)
    a = CfEstimator().fit(corpus)
    b = CfEstimator().fit(corpus)
    assert a.base_rate_ == b.base_rate_
    assert a.excitation_decay_ == b.excitation_decay_
    assert a.excitation_amplitude_ == b.excitation_amplitude_


def test_abc_estimator_sklearn_protocol():
    est = AbcDecayEstimator(n_proposals=12, seed=3)
    params = est.get_params()
    assert params["n_proposals"] == 12
    assert params["sigma_mode"] == "variance"
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(seed=4, quantile=0.2)
    assert est.get_params()["seed"] == 4
    assert est.get_params()["quantile"] == 0.2


def test_abc_estimator_fit_and_predict():
    corpus = abc_corpus()
    est = AbcDecayEstimator(n_proposals=40, seed=13, base_rate=2e-3,
                            event_lift=0.05)
    est.fit(corpus, t_end=4000.0)
    assert est.upsilon_.shape == (3,)
    assert len(est.proposals_) == 40
    assert len(est.region_.proposals) >= 6
    assert est.params_.kernel.excitation_coeffs is est.upsilon_
    pred = est.predict(corpus)
    covs = np.array([e.covariates for e in corpus])
    assert np.array_equal(pred, kernels.covariate_decay(covs, est.upsilon_))
    assert np.all(pred > 0)
    # deterministic under the seed hyperparameter, including through clone
    again = clone(est).fit(corpus, t_end=4000.0)
    assert np.array_equal(again.upsilon_, est.upsilon_)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedm.learn import (
    CVPlan,
    CVReport,
    Dataset,
    KnnModel,
    LdaClassifier,
    OlsRegressor,
    RankDeficientError,
    RidgeRegressor,
    accuracy,
    cross_validate,
    kappa,
    kfold_split,
    mae,
    r2,
    rmse,
    select_model,
    train_classifier,
    train_regressor,
)


class TestKfold:
    def test_leave_one_out_partition(self):
        folds = kfold_split(10, CVPlan(folds=10, repeats=1, stratified=False, seed=0))[0]
        assert sorted(folds) == list(range(10))

    def test_stratified_counts(self):
        labels = np.array([1] * 30 + [0] * 70)
        folds = kfold_split(100, CVPlan(folds=10, repeats=1, seed=1), labels)[0]
        for f in range(10):
            members = labels[folds == f]
            assert np.sum(members == 1) == 3
            assert np.sum(members == 0) == 7

    def test_deterministic_given_seed(self):
        a = kfold_split(57, CVPlan(folds=5, repeats=2, stratified=False, seed=9))
        b = kfold_split(57, CVPlan(folds=5, repeats=2, stratified=False, seed=9))
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_each_sample_in_exactly_one_fold_per_repeat(self):
        for fold in kfold_split(43, CVPlan(folds=7, repeats=3, stratified=False, seed=2)):
            assert len(fold) == 43
            assert set(fold) == set(range(7))

    def test_more_folds_than_samples(self):
        with pytest.raises(ValueError):
            kfold_split(3, CVPlan(folds=5))


class TestMetrics:
    def test_confusion_40_10_10_40(self):
        y = np.array([0] * 50 + [1] * 50)
        pred = np.array([0] * 40 + [1] * 10 + [0] * 10 + [1] * 40)
        assert accuracy(y, pred) == pytest.approx(0.8)
        assert kappa(y, pred) == pytest.approx(0.6)

    def test_perfect_predictions(self):
        y = np.array([0, 1, 1, 0, 1])
        assert accuracy(y, y) == 1.0
        assert kappa(y, y) == 1.0
        z = np.array([1.5, -2.0, 7.0])
        assert mae(z, z) == 0.0 and rmse(z, z) == 0.0 and r2(z, z) == 1.0

    def test_hand_arithmetic(self):
        assert mae([1, 4], [1, 2]) == pytest.approx(1.0)
        assert rmse([1, 4], [1, 2]) == pytest.approx(np.sqrt(2))

    def test_degenerate_kappa_is_nan(self):
        y = np.zeros(10)
        assert np.isnan(kappa(y, y))

    def test_degenerate_r2_is_nan(self):
        assert np.isnan(r2([3.0, 3.0, 3.0], [3.0, 2.0, 4.0]))

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            accuracy([], [])

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=40), st.data())
    @settings(max_examples=80)
    def test_mae_never_exceeds_rmse(self, truth, data):
        pred = data.draw(
            st.lists(st.floats(-50, 50), min_size=len(truth), max_size=len(truth))
        )
        assert mae(truth, pred) <= rmse(truth, pred) + 1e-12

    @given(st.integers(2, 60), st.integers(0, 2**31))
    @settings(max_examples=60)
    def test_kappa_and_accuracy_ranges(self, n, seed):
        rng = np.random.default_rng(seed)
        y, pred = rng.integers(0, 2, n), rng.integers(0, 2, n)
        assert 0.0 <= accuracy(y, pred) <= 1.0
        k = kappa(y, pred)
        assert np.isnan(k) or -1.0 - 1e-12 <= k <= 1.0 + 1e-12


class TestLda:
    def _separated(self):
        x0 = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        x1 = x0 + 10.0
        X = np.vstack([x0, x1])
        y = np.array([0.0] * 4 + [1.0] * 4)
        return X, y

    def test_separated_gaussians_posterior(self):
        X, y = self._separated()
        model = LdaClassifier().fit(X, y)
        # closed-form Gaussian posterior: (1,1) is 2 units from class 0,
        # 162 from class 1 in squared distance
        p_delay = model.predict_proba(np.array([[1.0, 1.0]]))[0]
        assert p_delay < 0.01
        assert model.predict(np.array([[1.0, 1.0]]))[0] == 0.0

    def test_posteriors_sum_to_one(self):
        X, y = self._separated()
        model = LdaClassifier().fit(X, y)
        rng = np.random.default_rng(0)
        post = model.posteriors(rng.normal(5, 4, size=(50, 2)))
        assert np.allclose(post.sum(axis=1), 1.0, atol=1e-12)
        assert np.all((post >= 0) & (post <= 1))

    def test_singular_covariance_is_regularized_and_reported(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        model = LdaClassifier().fit(X, y)
        assert model.regularized

    def test_needs_both_classes(self):
        with pytest.raises(ValueError):
            LdaClassifier().fit(np.zeros((4, 2)), np.zeros(4))


class TestCart:
    def test_single_split_separates_perfectly(self):
        rng = np.random.default_rng(1)
        x_left = rng.uniform(0, 4.9, size=(40, 1))
        x_right = rng.uniform(5.1, 10, size=(40, 1))
        X = np.vstack([x_left, x_right])
        y = np.array([0.0] * 40 + [1.0] * 40)
        tree = train_classifier("cart", X, y, {"min_leaf": 20, "max_depth": 8})
        assert accuracy(y, tree.predict(X)) == 1.0
        assert tree.depth == 1

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(200, 2))
        y = (X[:, 0] > 0).astype(float)
        tree = train_classifier("cart", X, y, {"min_leaf": 20, "max_depth": 8})

        def leaves(node):
            if "leaf" in node:
                return [node["n"]]
            return leaves(node["left"]) + leaves(node["right"])

        assert min(leaves(tree.root_)) >= 20

    def test_regression_leaf_means(self):
        X = np.array([[float(i)] for i in range(60)])
        y = np.where(X[:, 0] < 30, 2.0, 8.0)
        tree = train_regressor("cart", X, y, {"min_leaf": 20, "max_depth": 4})
        assert tree.predict(np.array([[5.0]]))[0] == pytest.approx(2.0)
        assert tree.predict(np.array([[50.0]]))[0] == pytest.approx(8.0)

    def test_pure_node_stops(self):
        X = np.array([[1.0], [2.0], [3.0]] * 20)
        y = np.ones(60)
        tree = train_classifier("cart", X, y)
        assert tree.depth == 0


class TestKnn:
    def test_k1_memorizes_training_labels(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(50, 2)) * [3.0, 0.2]  # distinct points
        y = rng.integers(0, 2, 50).astype(float)
        model = KnnModel("classification", k=1).fit(X, y)
        assert np.array_equal(model.predict(X), y)

    def test_k_equals_n_returns_target_mean(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(30, 2))
        y = rng.normal(size=30)
        model = KnnModel("regression", k=30).fit(X, y)
        assert model.predict(np.array([[0.0, 0.0]]))[0] == pytest.approx(y.mean())

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(ValueError):
            KnnModel("regression", k=5).fit(np.zeros((3, 2)), np.zeros(3))

    def test_standardization_absorbs_feature_rescaling(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(80, 2))
        y = (X[:, 0] + X[:, 1] > 0).astype(float)
        q = rng.normal(size=(10, 2))
        base = KnnModel("classification", k=5).fit(X, y).predict_proba(q)
        scale, shift = np.array([12.0, 0.05]), np.array([-3.0, 40.0])
        rescaled = (
            KnnModel("classification", k=5)
            .fit(X * scale + shift, y)
            .predict_proba(q * scale + shift)
        )
        assert np.allclose(base, rescaled, atol=1e-9)


class TestLinearModels:
    def test_ols_recovers_exact_line(self):
        x = np.arange(10, dtype=float)[:, None]
        y = 2.0 * x[:, 0] + 1.0
        model = OlsRegressor().fit(x, y)
        assert model.coef_[0] == pytest.approx(2.0, abs=1e-9)
        assert model.intercept_ == pytest.approx(1.0, abs=1e-9)

    def test_rank_deficiency_names_collinear_columns(self):
        x = np.arange(12, dtype=float)
        X = np.column_stack([x, x])  # x1 duplicates x0
        with pytest.raises(RankDeficientError, match="x1"):
            OlsRegressor().fit(X, x)

    def test_ridge_at_zero_matches_ols(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 2))
        y = 3.0 * X[:, 0] - 1.5 * X[:, 1] + rng.normal(0, 0.2, 60)
        q = rng.normal(size=(15, 2))
        p_ols = OlsRegressor().fit(X, y).predict(q)
        p_ridge = RidgeRegressor(lam=0.0).fit(X, y).predict(q)
        assert np.allclose(p_ols, p_ridge, atol=1e-8)

    def test_large_penalty_shrinks_to_target_mean(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(50, 2))
        y = X[:, 0] * 4.0
        pred = RidgeRegressor(lam=1e9).fit(X, y).predict(X)
        assert np.allclose(pred, y.mean(), atol=1e-4)

    def test_ridge_standardization_invariance(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(60, 2))
        y = rng.normal(size=60)
        q = rng.normal(size=(9, 2))
        scale, shift = np.array([0.01, 250.0]), np.array([5.0, -2.0])
        a = RidgeRegressor(lam=0.7).fit(X, y).predict(q)
        b = RidgeRegressor(lam=0.7).fit(X * scale + shift, y).predict(q * scale + shift)
        assert np.allclose(a, b, atol=1e-8)


class TestCrossValidateAndSelect:
    def _dataset(self, n=300, seed=9):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 2))
        y = ((X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 0.6, n)) > 0).astype(float)
        return Dataset(X, y, "classification")

    def test_report_has_fold_samples_for_each_algorithm(self):
        report = cross_validate(self._dataset(), CVPlan(folds=5, repeats=1, seed=1))
        assert set(report.entries) == {"lda", "cart", "knn"}
        for res in report.entries.values():
            assert len(res.samples["accuracy"]) == 5
            assert len(res.samples["kappa"]) == 5

    def test_regression_repeats_default_to_three(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(120, 2))
        y = X[:, 0] * 2 + rng.normal(0, 0.3, 120)
        report = cross_validate(
            Dataset(X, y, "regression"), CVPlan(folds=5, seed=2), roster=("ols",)
        )
        assert len(report.entries["ols"].samples["rmse"]) == 15

    def test_failed_algorithm_is_reported_not_fatal(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=120)
        X = np.column_stack([x, x])  # collinear: OLS must drop out
        y = x * 2 + rng.normal(0, 0.1, 120)
        report = cross_validate(
            Dataset(X, y, "regression"), CVPlan(folds=4, repeats=1, seed=3)
        )
        assert "ols" in report.failures
        assert "ols" not in report.entries
        assert select_model(report) in ("ridge", "cart", "knn")

    def test_select_classification_by_accuracy_then_kappa_then_roster(self):
        def entry(acc, kap):
            from sedm.learn import AlgoCVResult

            return AlgoCVResult("x", {}, {"accuracy": np.array(acc), "kappa": np.array(kap)})

        report = CVReport("classification", {"a": entry([0.80], [0.5]), "b": entry([0.78], [0.9])})
        assert select_model(report, ("a", "b")) == "a"
        report = CVReport("classification", {"a": entry([0.8], [0.4]), "b": entry([0.8], [0.6])})
        assert select_model(report, ("a", "b")) == "b"
        report = CVReport("classification", {"a": entry([0.8], [0.5]), "b": entry([0.8], [0.5])})
        assert select_model(report, ("a", "b")) == "a"

    def test_select_resolves_fourth_decimal_margins(self):
        # the criterion must split means as close as 0.8011555 vs 0.8010302
        from sedm.learn import AlgoCVResult

        def entry(acc):
            return AlgoCVResult("x", {}, {"accuracy": np.array([acc]),
                                          "kappa": np.array([0.55])})

        report = CVReport(
            "classification",
            {"lda": entry(0.8010302), "svm_rbf": entry(0.8011555)},
        )
        assert select_model(report, ("lda", "svm_rbf")) == "svm_rbf"

    def test_select_regression_by_rmse_then_mae(self):
        from sedm.learn import AlgoCVResult

        def entry(rm, ma):
            return AlgoCVResult("x", {}, {"rmse": np.array([rm]), "mae": np.array([ma])})

        report = CVReport("regression", {"a": entry(4.0, 3.0), "b": entry(3.9, 3.5)})
        assert select_model(report, ("a", "b")) == "b"
        report = CVReport("regression", {"a": entry(4.0, 3.0), "b": entry(4.0, 2.5)})
        assert select_model(report, ("a", "b")) == "b"

    def test_single_candidate_selects_itself(self):
        report = cross_validate(
            self._dataset(), CVPlan(folds=4, repeats=1, seed=4), roster=("lda",)
        )
        assert select_model(report) == "lda"

    def test_no_leakage_on_shuffled_labels(self):
        rng = np.random.default_rng(12)
        n = 500
        X = rng.normal(size=(n, 2))
        y = rng.permutation(np.array([1.0] * 150 + [0.0] * 350))
        report = cross_validate(
            Dataset(X, y, "classification"), CVPlan(folds=5, repeats=1, seed=5)
        )
        majority = 0.7
        sigma = np.sqrt(majority * (1 - majority) / n)
        for algo, res in report.entries.items():
            # nothing may beat the majority rate on pure noise; variance-prone
            # learners (cart, small-k knn) legitimately land below it
            assert res.mean("accuracy") <= majority + 3 * sigma + 0.02, algo
        assert abs(report.entries["lda"].mean("accuracy") - majority) < 3 * sigma + 0.02

    def test_summary_rows_consistent_with_samples(self):
        report = cross_validate(self._dataset(), CVPlan(folds=5, repeats=1, seed=6),
                                roster=("lda",))
        row = [r for r in report.summary_rows() if r["metric"] == "accuracy"][0]
        samples = report.entries["lda"].samples["accuracy"]
        assert row["Min"] == pytest.approx(samples.min())
        assert row["Max"] == pytest.approx(samples.max())
        assert row["Mean"] == pytest.approx(samples.mean())
        assert row["Median"] == pytest.approx(np.median(samples))

    def test_report_csv_export(self, tmp_path):
        report = cross_validate(self._dataset(n=150), CVPlan(folds=3, repeats=1, seed=8),
                                roster=("lda", "cart"))
        path = tmp_path / "cv.csv"
        report.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "algorithm,metric,min,1st_qu,median,mean,3rd_qu,max"
        assert len(lines) == 1 + 2 * 2  # two algorithms x two metrics

    def test_knn_grid_selection_recorded(self):
        report = cross_validate(
            self._dataset(n=200), CVPlan(folds=4, repeats=1, seed=7), roster=("knn",)
        )
        assert report.entries["knn"].hyper["k"] in (5, 9, 15, 25)


class TestDataset:
    def test_split_is_stratified_and_deterministic(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(100, 2))
        y = np.array([1.0] * 20 + [0.0] * 80)
        ds = Dataset(X, y, "classification", train_fraction=0.8)
        train, test = ds.split(seed=3)
        assert len(train) == 80 and len(test) == 20
        assert np.sum(y[train]) == 16  # 80% of the 20 positives
        train2, _ = ds.split(seed=3)
        assert np.array_equal(train, train2)

    def test_label_validation(self):
        with pytest.raises(ValueError, match="0/1"):
            Dataset(np.zeros((3, 2)), np.array([0.0, 2.0, 1.0]), "classification")

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="same length"):
            Dataset(np.zeros((3, 2)), np.zeros(4), "regression")

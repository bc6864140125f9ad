#include <catch2/catch.hpp>

#include "medestim/forest.hpp"
#include "medestim/rng.hpp"

using namespace medestim;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
    return x;
}

} // namespace

TEST_CASE("forest fits a step function") {
    const Eigen::Index n = 600;
    const Eigen::MatrixXd x = random_matrix(n, 2, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = x(i, 0) > 0 ? 2.0 : -2.0;

    RandomForest forest;
    ForestParams params;
    params.n_trees = 50;
    forest.fit(x, y, params, 7);

    Eigen::MatrixXd q(2, 2);
    q << 1.5, 0.0, -1.5, 0.0;
    const Eigen::VectorXd pred = forest.predict(q);
    CHECK(pred(0) == Approx(2.0).margin(0.3));
    CHECK(pred(1) == Approx(-2.0).margin(0.3));
}

TEST_CASE("forest is deterministic given the seed") {
    const Eigen::MatrixXd x = random_matrix(300, 3, 2);
    Rng rng(3);
    Eigen::VectorXd y(300);
    for (Eigen::Index i = 0; i < 300; ++i) y(i) = x(i, 1) + 0.3 * rng.normal();

    ForestParams params;
    params.n_trees = 30;
    RandomForest a, b;
    a.fit(x, y, params, 42);
    b.fit(x, y, params, 42);
    const Eigen::MatrixXd q = random_matrix(40, 3, 4);
    CHECK(a.predict(q) == b.predict(q));

    RandomForest c;
    c.fit(x, y, params, 43);
    CHECK(a.predict(q) != c.predict(q));
}

TEST_CASE("min_leaf bounds leaf sizes via prediction granularity") {
    // one feature, strictly increasing target: leaves of >= min_leaf rows
    // force plateaus covering at least min_leaf consecutive points
    const Eigen::Index n = 64;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = static_cast<double>(i);
        y(i) = static_cast<double>(i);
    }
    ForestParams params;
    params.n_trees = 1;
    params.min_leaf = 8;
    RandomForest forest;
    forest.fit(x, y, params, 1);
    // count distinct predictions; at most n / min_leaf distinct leaves
    std::vector<double> preds;
    for (Eigen::Index i = 0; i < n; ++i) preds.push_back(forest.predict(x)(i));
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    CHECK(preds.size() <= 8);
}

TEST_CASE("max_depth limits the tree") {
    const Eigen::MatrixXd x = random_matrix(200, 1, 9);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y(i) = x(i, 0);
    ForestParams params;
    params.n_trees = 1;
    params.min_leaf = 1;
    params.max_depth = 1; // a stump: at most 2 distinct predictions
    RandomForest forest;
    forest.fit(x, y, params, 5);
    std::vector<double> preds;
    const Eigen::VectorXd p = forest.predict(x);
    for (Eigen::Index i = 0; i < 200; ++i) preds.push_back(p(i));
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
    CHECK(preds.size() <= 2);
}

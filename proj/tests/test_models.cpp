#include <doctest.h>

#include "hallq/error.hpp"
#include "hallq/models.hpp"
#include "hallq/spectral.hpp"

using namespace hq;

TEST_CASE("recipes and parameters") {
    CHECK(model_names().size() == 4);
    CHECK_THROWS_AS(make_model({"nope", {}, {}}, 3), Error);
    CHECK_THROWS_AS(make_model({"qwz_fermion", {{"bogus", 1.0}}, {}}, 3), Error);
    CHECK_THROWS_AS(make_model({"qwz_fermion", {}, {}}, 2), Error);
    const ModelSpec s = make_model({"qwz_fermion", {}, {}}, 3);
    CHECK(s.Q == 9);
    CHECK(s.Q_max() == s.R * s.k_max * s.q_max);
}

TEST_CASE("model JSON round trip") {
    const ModelSpec s = make_model({"qwz_interacting", {}, 2}, 3);
    const ModelSpec t = model_from_json(model_to_json(s));
    REQUIRE(t.terms.size() == s.terms.size());
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
        CHECK(t.terms[i].support == s.terms[i].support);
        CHECK((t.terms[i].matrix - s.terms[i].matrix).norm() < 1e-15);
    }
    CHECK(t.Q == 2);
}

TEST_CASE("Bloch matrix is Hermitian and gapped at half filling") {
    const ModelRecipe rec{"qwz_fermion", {}, {}};
    const Eigen::MatrixXcd h = qwz_bloch_matrix(rec, 4, 0.3, 0.9);
    CHECK((h - h.adjoint()).norm() < 1e-14);
    const Eigen::VectorXd e = eig_dense(h).e;
    CHECK(e(16) - e(15) > 0.5);
}

TEST_CASE("oracle Chern numbers across the phase diagram") {
    CHECK(oracle_chern({"qwz_fermion", {{"m", 1.0}}, {}}, 4, 6).integer == -1);
    CHECK(oracle_chern({"qwz_fermion", {{"m", -1.0}}, {}}, 4, 6).integer == 1);
    CHECK(oracle_chern({"qwz_fermion", {{"m", 3.0}}, {}}, 4, 6).integer == 0);
}

TEST_CASE("chain reduction") {
    const ModelSpec c = make_chain();
    CHECK(c.lattice.Lx() == 12);
    CHECK(c.lattice.Ly() == 1);
    CHECK(validate_model(c).pass);
}

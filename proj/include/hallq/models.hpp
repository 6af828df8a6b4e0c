#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hallq/hamiltonian.hpp"

namespace hq {

struct ModelRecipe {
    std::string name;
    std::map<std::string, double> params;  // overrides of recipe_defaults(name)
    std::optional<int> Q;                  // sector; recipe default when empty
};

std::vector<std::string> model_names();
std::map<std::string, double> recipe_defaults(const std::string& name);

// Built-in models on an L x L torus:
//   trivial_product  hardcore bosons, on-site mu_s = mu0 + delta * s
//   xy_flux_boson    hardcore-boson hopping, flux 2 pi p per L^2 plaquettes, staggered potential
//   qwz_fermion      two-orbital Chern insulator at half filling
//   qwz_interacting  qwz_fermion plus V n_r n_r' on nearest neighbours
ModelSpec make_model(const ModelRecipe& recipe, int L);

// Hardcore bosons on an n-site ring (Ly = 1) with a staggered potential.
ModelSpec make_chain(int n = 12, double t = 1.0, double stagger = 2.0, std::optional<int> Q = {});

// Custom models: lattice, site space, constants and explicit term matrices.
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& spec);

// Free-fermion oracle for quadratic QWZ recipes. The single-particle matrix
// carries the twist as hopping phases on the wrap-around bonds.
Eigen::MatrixXcd qwz_bloch_matrix(const ModelRecipe& recipe, int L, double theta_x, double theta_y);

// Curvature of the half-filled Slater state from plaquette phases of
// determinant overlaps, Richardson-extrapolated in the plaquette size.
double oracle_curvature(const ModelRecipe& recipe, int L, double theta_x, double theta_y);

struct OracleChern {
    double chern = 0.0;
    long integer = 0;
    Eigen::MatrixXd plaquettes;  // Berry flux per plaquette, row = theta_y index
};

OracleChern oracle_chern(const ModelRecipe& recipe, int L, int grid_n);

}  // namespace hq

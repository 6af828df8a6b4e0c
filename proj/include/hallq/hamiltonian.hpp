#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hallq/fock.hpp"
#include "hallq/lattice.hpp"

namespace hq {

struct ModelSpec {
    std::string name = "custom";
    TorusLattice lattice;
    SiteSpace site_space;
    std::vector<LocalTerm> terms;
    double J = 0.0;
    int R = 1;
    int k_max = 1;
    int q_max = 1;
    int Q = 0;
    std::map<std::string, double> params;

    int Q_max() const { return R * k_max * q_max; }
};

struct FluxAngles {
    double theta_x = 0.0;
    double phi_x = 0.0;
    double theta_y = 0.0;
    double phi_y = 0.0;
};

enum class FluxAxis { ThetaX, PhiX, ThetaY, PhiY };

std::string to_string(FluxAxis a);

// Twist classes: 1 = twist line at 1, 2 = virtual-flux line at half+1, 3 = untouched.
struct TermRule {
    int cx = 3;
    int cy = 3;
    bool ambiguous_x = false;  // matched both X-1 and X-2
    bool ambiguous_y = false;
};

TermRule twist_rule(const TorusLattice& lat, const std::vector<int>& support, int R);

// Projection onto the charge-diagonal blocks of the support charge.
LocalTerm symmetrize_interaction(const LocalTerm& term, const SiteSpace& ss);
// Numerical theta-average over `points` equally spaced angles (cross-check).
LocalTerm symmetrize_by_quadrature(const LocalTerm& term, const SiteSpace& ss, int points = 16);

struct ValidationReport {
    double max_site_strength = 0.0;
    double J = 0.0;
    int max_diameter = 0;
    int R = 0;
    int max_body = 0;
    int k_max = 0;
    int site_q_max = 0;
    double hermiticity_residual = 0.0;
    double charge_residual = 0.0;
    double parity_residual = 0.0;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
    bool pass = false;
};

ValidationReport validate_model(const ModelSpec& spec, double tol = 1e-12);

// Operator norm of a dense matrix.
double op_norm(const Eigen::MatrixXcd& m);

// Sum over groups of phase(flux) * M; each group shares twist classes and
// charge transfers (dqx, dqy) across the half-plane boundaries.
struct TwistGroup {
    int cx = 3;
    int cy = 3;
    int dqx = 0;
    int dqy = 0;
    SpMat M;
};

class TwistedFamily {
public:
    TwistedFamily() = default;
    TwistedFamily(int dim, std::vector<TwistGroup> groups) : dim_(dim), groups_(std::move(groups)) {}

    int dim() const { return dim_; }
    const std::vector<TwistGroup>& groups() const { return groups_; }

    SpMat hamiltonian(const FluxAngles& f) const;
    SpMat derivative(const FluxAngles& f, FluxAxis axis) const;
    // d^k/d(axis)^k, used by finite-difference and Taylor checks.
    SpMat derivative(const FluxAngles& f, FluxAxis axis, int order) const;
    bool depends_on(FluxAxis axis) const;

private:
    int dim_ = 0;
    std::vector<TwistGroup> groups_;
};

using TermFilter = std::function<bool(const LocalTerm&)>;

// Many-body family on a sector. `keep` selects a subset of terms (restricted
// Hamiltonians); rules are always computed from the full geometry.
TwistedFamily build_sector_family(const ModelSpec& spec, const SectorBasis& basis, const TermFilter& keep = {});

struct TwistedHamiltonian {
    FluxAngles flux;
    SpMat matrix;
    std::vector<TermRule> term_map;
};

std::vector<TermRule> term_rules(const ModelSpec& spec);

TwistedHamiltonian assemble_twisted(const ModelSpec& spec, const SectorBasis& basis, const FluxAngles& flux);
SpMat flux_derivative(const ModelSpec& spec, const SectorBasis& basis, const FluxAngles& flux, FluxAxis axis);

// e^{i theta Q} op e^{-i theta Q} for a diagonal charge Q.
Eigen::MatrixXcd twist_conjugate(const Eigen::MatrixXcd& op, const Eigen::VectorXd& charges, double theta);
SpMat twist_conjugate(const SpMat& op, const Eigen::VectorXd& charges, double theta);

// Twisted local term matrix on its own support (charges restricted to Z).
Eigen::MatrixXcd twisted_term(const ModelSpec& spec, const LocalTerm& term, const FluxAngles& flux);
// i[Q_{Z cap X}, Phi] and -i[Q_{Z cap not X}, Phi] on the support.
Eigen::MatrixXcd term_derivative_inside(const ModelSpec& spec, const LocalTerm& term);
Eigen::MatrixXcd term_derivative_outside(const ModelSpec& spec, const LocalTerm& term);

}  // namespace hq

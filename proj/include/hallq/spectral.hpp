#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hallq/hamiltonian.hpp"
#include "hallq/quadratic.hpp"

namespace hq {

// A state is a dim x occupied matrix: a single column for many-body vectors,
// or the orbitals of a Slater determinant for the single-particle backend.
using State = Eigen::MatrixXcd;

constexpr int kDefaultDenseCap = 2000;

// Flux-dependent Hermitian operator family acting on states. For occupied() > 1
// the operator is single-particle and the many-body state is a Slater
// determinant of the lowest orbitals.
class FluxSystem {
public:
    virtual ~FluxSystem() = default;
    virtual int dim() const = 0;
    virtual int occupied() const = 0;
    virtual double energy_offset() const { return 0.0; }
    virtual SpMat h(const FluxAngles& f) const = 0;
    virtual SpMat dh(const FluxAngles& f, FluxAxis axis) const = 0;
    virtual std::string kind() const = 0;

    Eigen::MatrixXcd dense_h(const FluxAngles& f) const { return Eigen::MatrixXcd(h(f)); }
    Eigen::MatrixXcd dense_dh(const FluxAngles& f, FluxAxis a) const { return Eigen::MatrixXcd(dh(f, a)); }
    // Derivative along a direction in the four flux angles.
    SpMat directional_dh(const FluxAngles& f, const FluxAngles& dir) const;
};

enum class Backend { Auto, ManyBody, Quadratic };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);

// System built from a model: a sector family or the single-particle family.
class ModelSystem : public FluxSystem {
public:
    static std::shared_ptr<ModelSystem> create(const ModelSpec& spec, Backend backend = Backend::Auto,
                                               int sector_cap = kDefaultSectorCap);

    int dim() const override { return family_.dim(); }
    int occupied() const override { return occupied_; }
    double energy_offset() const override { return offset_; }
    SpMat h(const FluxAngles& f) const override { return family_.hamiltonian(f); }
    SpMat dh(const FluxAngles& f, FluxAxis a) const override { return family_.derivative(f, a); }
    std::string kind() const override { return to_string(backend_); }

    Backend backend() const { return backend_; }
    const ModelSpec& spec() const { return spec_; }
    const TwistedFamily& family() const { return family_; }
    const SectorBasis* basis() const { return basis_.get(); }

    // Same representation, only the terms accepted by `keep`.
    std::shared_ptr<ModelSystem> restricted(const TermFilter& keep) const;

private:
    ModelSpec spec_;
    Backend backend_ = Backend::ManyBody;
    std::shared_ptr<const SectorBasis> basis_;
    TwistedFamily family_;
    int occupied_ = 1;
    double offset_ = 0.0;
};

// Single-parameter system driven by theta_x, for analytic checks.
class FunctionSystem : public FluxSystem {
public:
    using Fn = std::function<Eigen::MatrixXcd(double)>;
    FunctionSystem(int dim, Fn h, Fn dh) : dim_(dim), h_(std::move(h)), dh_(std::move(dh)) {}
    int dim() const override { return dim_; }
    int occupied() const override { return 1; }
    SpMat h(const FluxAngles& f) const override { return h_(f.theta_x).sparseView(); }
    SpMat dh(const FluxAngles& f, FluxAxis a) const override;
    std::string kind() const override { return "function"; }

private:
    int dim_;
    Fn h_, dh_;
};

struct EigenPairs {
    Eigen::VectorXd e;
    Eigen::MatrixXcd V;
};

EigenPairs eig_dense(const Eigen::MatrixXcd& H);

struct SpectralOptions {
    double tol = 1e-10;
    int dense_cap = kDefaultDenseCap;
    double degeneracy_tol = 1e-10;
    int max_restarts = 400;
    int krylov_dim = 64;
    unsigned seed = 7;
};

struct GroundData {
    double E0 = 0.0;
    double gap = 0.0;
    State psi0;
    bool degenerate = false;
    double residual = 0.0;
    bool iterative = false;
};

// Lowest eigenpairs of a sparse Hermitian matrix (thick-restart Lanczos with
// full reorthogonalization). The lowest pair converges to residual tol, the
// others to sqrt(tol): their eigenvalues are then accurate to O(tol).
struct LanczosResult {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
    Eigen::VectorXd residuals;
    int matvecs = 0;
    bool converged = false;
};
LanczosResult lanczos_lowest(const SpMat& H, int nev, const SpectralOptions& opt,
                             const Eigen::VectorXcd* start = nullptr);

// Phase convention: first component with |c| > 1e-8 real positive; for a
// Slater determinant, the lexicographically first nonvanishing minor.
void fix_gauge(State& s);

cd overlap(const State& a, const State& b);

GroundData ground_data(const FluxSystem& sys, const FluxAngles& f, const SpectralOptions& opt = {},
                       const State* warm = nullptr);
GroundData ground_data(const Eigen::MatrixXcd& H, const SpectralOptions& opt = {});

struct FluxPath {
    std::vector<FluxAngles> waypoints;
};

struct TransportResult {
    std::vector<State> states;          // one per waypoint
    cd closing_overlap{1.0, 0.0};       // <Psi0(start)|Psi'(end)>
    cd end_overlap{1.0, 0.0};           // <Psi0(end)|Psi'(end)>, gauge-fixed Psi0(end)
    double berry_phase = 0.0;           // arg of closing_overlap
    double min_gap = 0.0;
    double max_connection = 0.0;        // max |<Psi'|d Psi'>|
    double max_derivative_ratio = 0.0;  // max ||d Psi'|| * gap / ||dH||
    int steps = 0;
};

// Fixed-step RK4 integration of d Psi' = -(1-P0)/(H-E0) dH Psi', renormalized
// every step. Throws a numerical error if the gap falls below gap_floor.
TransportResult parallel_transport(const FluxSystem& sys, const FluxPath& path, int steps_per_segment,
                                   double gap_floor);

struct GapBound {
    double gap0 = 0.0;
    double extent = 0.0;       // l1 flux distance from the path start
    double bound = 0.0;        // gap0 - 2 * extent * derivative_bound
    double measured_min = 0.0;
    bool vacuous = false;
    bool holds = true;
};

GapBound gap_lower_bound(const FluxSystem& sys, const FluxPath& path, int samples_per_segment,
                         double derivative_bound, const SpectralOptions& opt = {});

}  // namespace hq

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hallq/loops.hpp"

namespace hq {

enum class LemmaId { PartialTrace, Energy, BigLoop, Twisting, Translation, LoopLocalization };

std::string to_string(LemmaId id);

struct LemmaCheckResult {
    LemmaId lemma = LemmaId::PartialTrace;
    std::string check;  // short name of the variant, e.g. "near_twist"
    std::map<std::string, double> inputs;
    double measured = 0.0;
    std::string bound_form;
    std::optional<bool> pass;  // set only where an exact inequality or a trend is asserted
    std::string verdict;
    std::map<std::string, double> values;  // secondary measurements
    std::vector<std::string> notes;
};

// Log-log fit of y against x over points with y above `floor`.
struct TrendFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    int points = 0;
    bool monotone_decreasing = true;
};

TrendFit loglog_trend(const std::vector<double>& x, const std::vector<double>& y, double floor = 1e-14);

// Reduced density matrix on `keep`, indexed by the restricted configurations
// that occur in the sector (sorted by code). Fermionic amplitudes pick up the
// sign of moving the kept modes in front of the traced ones.
struct ReducedIndex {
    std::vector<std::uint64_t> keep_codes;
    std::vector<int> row;     // basis index -> keep configuration
    std::vector<int> column;  // basis index -> traced configuration
    std::vector<int> sign;
    int traced = 0;
};

ReducedIndex reduced_index(const SectorBasis& basis, const SiteSet& keep);
Eigen::MatrixXcd reduced_density_matrix(const ReducedIndex& idx, const Eigen::VectorXcd& psi);
// Charge of the kept sites inside `region` per keep configuration.
Eigen::VectorXd reduced_charges(const SectorBasis& basis, const ReducedIndex& idx, const SiteSet& keep,
                                const SiteSet& region);
double trace_norm(const Eigen::MatrixXcd& hermitian);

struct DiagnosticsOptions {
    IntegratorOptions integrator;
    unsigned seed = 7;
};

// ||Tr (rho_X(theta) - rho_X(0))||_1 keeping Omega_X^c, and
// ||Tr (rho_X(theta) - R_X(theta, rho_X(0)))||_1 keeping Omega_X.
std::pair<LemmaCheckResult, LemmaCheckResult> partial_trace_check(const std::shared_ptr<const ModelSystem>& sys,
                                                                  double theta, const SpectralFilter& f,
                                                                  const DiagnosticsOptions& opt = {});

// |<Psi_X(theta)|H(theta,0,0,0)|Psi_X(theta)> - E_0| with the Markov step
// 1 - |<G_theta|Psi_X>|^2 <= (<H(theta)> - E_0(theta)) / gamma(theta) asserted.
LemmaCheckResult energy_estimate_check(const std::shared_ptr<const ModelSystem>& sys, double theta,
                                       const SpectralFilter& f, const DiagnosticsOptions& opt = {});

// B2 = |<Psi0|Psi_loop(2 pi)> - 1| and the single-side return |<Psi0|U_X(0,0,2 pi) Psi0>|.
LemmaCheckResult big_loop_check(const std::shared_ptr<const FluxSystem>& sys, const SpectralFilter& f,
                                const DiagnosticsOptions& opt = {});

// Trend verdict for a quantity measured over increasing sizes: non-increasing
// with at least three points.
LemmaCheckResult size_trend(LemmaId lemma, const std::string& check, const std::vector<int>& L,
                            const std::vector<double>& values);

// Random Hermitian, charge-conserving, norm-one operator on the origin site of Omega_0.
LocalTerm random_omega0_operator(const ModelSpec& spec, unsigned seed);

// ||U_X^dag A U_X - U_Omega^dag A U_Omega|| at (theta_x, theta_y) with U_Omega
// generated by S^(M)(H, d H_Omega), M = ceil(L / 24) unless given, and the
// largest commutator of U_Omega^dag A U_Omega with charge-conserving one- and
// two-site operators outside Omega_X cap Omega_Y.
LemmaCheckResult twisting_check(const std::shared_ptr<const ModelSystem>& sys, const LocalTerm& A, double theta_x,
                                double theta_y, const SpectralFilter& f, std::optional<int> M = std::nullopt,
                                const DiagnosticsOptions& opt = {});

// max_b |<Psi0|Psi_loop(b, r)> - <Psi0|Psi_loop(r)>| at r and r / 2.
LemmaCheckResult translation_check(const std::shared_ptr<const FluxSystem>& sys,
                                   const std::vector<std::pair<double, double>>& basepoints, double r,
                                   const SpectralFilter& f, const DiagnosticsOptions& opt = {});

// The same maximum over a list of radii with the log-log slope.
struct TranslationScan {
    std::vector<double> r;
    std::vector<double> max_difference;
    TrendFit fit;
};

TranslationScan translation_scan(const std::shared_ptr<const FluxSystem>& sys,
                                 const std::vector<std::pair<double, double>>& basepoints,
                                 const std::vector<double>& r_list, const SpectralFilter& f,
                                 const DiagnosticsOptions& opt = {});

// ||V_loop(tx,ty,r) - R_Y(ty, R_X(tx, V_loop(0,0,r)))|| and ||V_loop(0,0,r) - 1||
// at r and r / 2 (full unitaries). With M the filter Hamiltonian is restricted
// to the M-fattening of both twist supports.
LemmaCheckResult loop_localization_check(const std::shared_ptr<const ModelSystem>& sys, double theta_x,
                                         double theta_y, double r, std::optional<int> M, const SpectralFilter& f,
                                         const DiagnosticsOptions& opt = {});

}  // namespace hq

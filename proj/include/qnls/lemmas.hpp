#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnls/field.hpp"

namespace qnls {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random band-limited fields. Coefficients are drawn per integer wavenumber in a
// fixed order over [-max_mode, max_mode]^d, so a refined grid reproduces the same
// functions.
struct EnsembleSpec {
    int count = 100;
    Grid grid = Grid(1, 128, 16.0);
    double cutoff = 1.0 / 3.0;  // fraction of the Nyquist wavenumber, at most 2/3
    int max_mode = 0;           // overrides cutoff when > 0
    double low_cut = 0.0;       // modes with |k| < low_cut * max_mode are dropped (band-pass)
    double amplitude = 1.0;
    double window = 0.0;        // Gaussian window width as a fraction of the half width, 0 for none
    std::uint64_t seed = 1;

    int resolved_max_mode() const;
    void validate() const;
    EnsembleSpec refined(int factor) const;
};

// Member i of an independent stream (distinct streams give independent fields).
SpectralField ensemble_member(const EnsembleSpec& spec, int stream, int index);
std::vector<SpectralField> generate_ensemble(const EnsembleSpec& spec, int stream = 0);

// f(lambda x) for integer lambda, exact for band-limited fields.
SpectralField dilate(const SpectralField& f, int lambda);

struct LemmaSample {
    double lhs = 0.0;
    double rhs = 0.0;
};

struct LemmaReport {
    std::string id;
    std::string kind = "inequality";  // or "identity" (lhs is the error, rhs the scale)
    nlohmann::json params = nlohmann::json::object();
    std::vector<LemmaSample> samples;
    std::vector<double> ratios;
    double max_ratio = 0.0, mean_ratio = 0.0, q50 = 0.0, q90 = 0.0, q99 = 0.0;
    bool all_finite = true;
    int witness_index = -1;
    std::string witness_hash;
    std::vector<SpectralField> witness;  // inputs of the worst sample
    double refined_max_ratio = 0.0;
    double doubling_change = 0.0;  // |refined / base - 1|
    double boundary_mass = 0.0;
    double tolerance = 0.0;  // identity reports only

    bool passed() const;
    nlohmann::json summary() const;
};

void write_reports_ndjson(std::ostream& out, const std::vector<LemmaReport>& reports);
void write_reports_table(std::ostream& out, const std::vector<LemmaReport>& reports);

// ---- identities ----
constexpr double kIdentityTolerance = 1e-6;
std::vector<LemmaReport> verify_operator_identities(const EnsembleSpec& ens, double bessel_order = 1.5);
LemmaReport verify_Dhalf_x_identity(const EnsembleSpec& ens);
LemmaReport verify_weight_derivative();

// ---- inequalities (every report also carries a resolution-doubling study) ----
std::vector<LemmaReport> verify_commutator_L21(const EnsembleSpec& ens, double s, double l, double S, int axis = 0);
LemmaReport verify_calderon(const EnsembleSpec& ens, double p);

struct KatoPonceExponents {
    double r = 2.0, p1 = 2.0, q1 = kInf, p2 = kInf, q2 = 2.0;
};
std::vector<LemmaReport> verify_kato_ponce_fractional(const EnsembleSpec& ens, double s,
                                                      const KatoPonceExponents& e = {});
std::vector<LemmaReport> verify_commutator_L23(const EnsembleSpec& ens, double s, double p, double p1 = kInf,
                                               double p2 = -1.0);
LemmaReport verify_bmo_embedding(const EnsembleSpec& ens);
std::vector<LemmaReport> verify_interpolation(const EnsembleSpec& ens);
LemmaReport verify_halving(const EnsembleSpec& ens, int axis = 0);
std::vector<LemmaReport> verify_weight_lemma(const EnsembleSpec& ens, int N, const MultiIndex& gamma);

// Named suites with their standard parameters: identities, commutator, calderon,
// kato-ponce, commutator-L23, bmo, interpolation, halving, weight.
std::vector<std::string> lemma_suite_names();
struct SuiteOptions {
    std::uint64_t seed = 1;
    int count = 100;
    int points = 128;
};
std::vector<LemmaReport> run_lemma_suite(const std::string& name, const SuiteOptions& options);

}  // namespace qnls

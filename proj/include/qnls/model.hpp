#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnls/expression.hpp"
#include "qnls/field.hpp"

namespace qnls {

using RealMatrix = std::array<std::array<double, kMaxDim>, kMaxDim>;
using ComplexMatrix = std::array<std::array<cplx, kMaxDim>, kMaxDim>;

enum class Form { divergence, nondivergence };
enum class InteractionClass { quadratic, cubic };

std::string to_string(Form f);
std::string to_string(InteractionClass c);
Form parse_form(const std::string& s);
InteractionClass parse_class(const std::string& s);

// g0 = diag(+1 x positive_count, -1 x (dim - positive_count)).
struct SignatureSpec {
    int dim = 1;
    int positive_count = 1;
    double entry(int axis) const { return axis < positive_count ? 1.0 : -1.0; }
    bool elliptic() const { return positive_count == dim; }
};

struct MetricSpec {
    SignatureSpec g0;
    // Perturbation h(y, z): symmetric real matrix. Gradient dependence is only
    // meaningful in nondivergence form.
    std::function<RealMatrix(const PointState&)> h;
    // Wirtinger derivative dh/dy (dh/dybar is its conjugate since h is real).
    std::function<ComplexMatrix(const PointState&)> h_y;
    int interaction_order = 1;  // 1: h = O(|y|), 2: h = O(|y|^2)
    bool depends_on_gradient = false;
    bool identically_zero = false;
};

struct NonlinearitySpec {
    std::function<cplx(const PointState&)> F;
    std::function<cplx(const PointState&)> F_y, F_ybar;
    std::function<std::array<cplx, kMaxDim>(const PointState&)> F_z, F_zbar;
    int interaction_order = 2;
    bool identically_zero = false;
};

struct ModelProblem {
    std::string name;
    MetricSpec metric;
    NonlinearitySpec nonlinearity;
    Form form = Form::divergence;
    int components = 1;
    // Optional second-order coupling to conj(phi): adds c(y) * Laplacian(conj phi)
    // to the principal part (used by the de Bouard-Hayashi-Saut model).
    std::function<cplx(const PointState&)> conjugate_coefficient;

    int dim() const { return metric.g0.dim; }
    InteractionClass interaction() const {
        return metric.interaction_order == 1 ? InteractionClass::quadratic : InteractionClass::cubic;
    }
    bool is_free() const { return metric.identically_zero && nonlinearity.identically_zero && !conjugate_coefficient; }
};

struct ModelCheckReport {
    double max_asymmetry = 0.0;
    double metric_scaling = 0.0;        // |h(a/2)| / |h(a)| * 2^order, ideally 1
    double nonlinearity_scaling = 0.0;  // same for F with order + 1
    double max_derivative_error = 0.0;  // relative, finite differences vs registered
};

// Runs the registration checks; throws ValidationError on failure.
ModelCheckReport register_model(const ModelProblem& model);

std::vector<std::string> builtin_model_names();
// Known names: free, toy-quadratic, toy-cubic, dbhs, smcf. dim and positive_count
// set the signature.
ModelProblem builtin_model(const std::string& name, int dim, int positive_count = -1);

struct CustomModelSpec {
    std::string name = "custom";
    int dim = 1;
    int positive_count = -1;
    InteractionClass interaction = InteractionClass::quadratic;
    Form form = Form::divergence;
    // Either one isotropic entry ("h") giving h^{ij} = h delta_ij, or entries keyed "ij".
    std::vector<std::pair<std::string, std::string>> metric;
    std::string nonlinearity = "0";
};

ModelProblem custom_model(const CustomModelSpec& spec);

// ---- field-level evaluation ----

struct MetricField {
    // entries[i][j]: real-valued fields stored as complex
    std::array<std::array<SpectralField, kMaxDim>, kMaxDim> entries;
};

std::array<SpectralField, kMaxDim> gradient(const SpectralField& phi);

// Pointwise h(phi) only (no g0).
MetricField evaluate_perturbation(const ModelProblem& model, const SpectralField& phi);
// g0 + h(phi).
MetricField evaluate_metric(const ModelProblem& model, const SpectralField& phi);

SpectralField evaluate_F(const ModelProblem& model, const SpectralField& phi);

struct FDerivativeFields {
    SpectralField F_y, F_ybar;
    std::array<SpectralField, kMaxDim> F_z, F_zbar;
};
FDerivativeFields evaluate_F_derivatives(const ModelProblem& model, const SpectralField& phi);

// Constant-coefficient part sum_j g0^{jj} d_jj phi, exactly.
SpectralField principal_operator(const ModelProblem& model, const SpectralField& phi);
// Perturbation part of the second-order term (h-terms, plus conjugate coupling),
// products dealiased when requested.
SpectralField perturbation_operator(const ModelProblem& model, const SpectralField& phi, bool dealiased = true);
// Full second-order term: d_i(g^{ij} phi_j) or g^{ij} phi_ij.
SpectralField spatial_operator(const ModelProblem& model, const SpectralField& phi, bool dealiased = true);

}  // namespace qnls

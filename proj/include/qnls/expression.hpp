#pragma once

#include <array>
#include <memory>
#include <string>

#include "qnls/field.hpp"

namespace qnls {

// Pointwise arguments of the model functions: y = phi, z_k = d_k phi.
struct PointState {
    cplx y{0.0, 0.0};
    std::array<cplx, kMaxDim> z{};
};

// Polynomial expression in phi, conj(phi), d_k phi, conj(d_k phi) with complex
// coefficients. Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor ('*' factor)*
//   factor := ('-')? atom ('^' integer)?
//   atom   := number | 'I' | variable | ('re'|'im'|'conj') '(' expr ')' | '(' expr ')'
// Variables: u, ubar, du1..du3, dubar1..dubar3.
// re/im/conj are expanded in Wirtinger variables, so differentiation treats u and
// ubar as independent.
class Expression {
public:
    struct Node;

    Expression();
    static Expression parse(const std::string& text);

    cplx evaluate(const PointState& p) const;
    // Wirtinger derivative; variable ids: 0 = u, 1 = ubar, 2+k = du_k, 5+k = dubar_k.
    Expression derivative(int variable) const;
    Expression conjugate() const;
    bool is_zero() const;
    const std::string& source() const { return source_; }

    static constexpr int kU = 0;
    static constexpr int kUbar = 1;
    static constexpr int du(int k) { return 2 + k; }
    static constexpr int dubar(int k) { return 5 + k; }

private:
    explicit Expression(std::shared_ptr<const Node> root, std::string source);
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace qnls

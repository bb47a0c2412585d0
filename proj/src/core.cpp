#include "llt/core.hpp"

#include <cmath>

namespace llt {

std::string_view label_token(Label label) {
    switch (label) {
    case Label::Normal: return "N";
    case Label::Ectopic: return "E";
    case Label::Unlabeled: return "?";
    }
    return "?";
}

std::string_view label_name(Label label) {
    switch (label) {
    case Label::Normal: return "Normal";
    case Label::Ectopic: return "Ectopic";
    case Label::Unlabeled: return "Unlabeled";
    }
    return "Unlabeled";
}

Label parse_label_token(std::string_view token) {
    if (token == "N") return Label::Normal;
    if (token == "E") return Label::Ectopic;
    if (token == "?") return Label::Unlabeled;
    throw ParseError("unknown label token '" + std::string(token) + "'");
}

Label parse_label_name(std::string_view name) {
    if (name == "Normal" || name == "N") return Label::Normal;
    if (name == "Ectopic" || name == "E") return Label::Ectopic;
    if (name == "Unlabeled" || name == "?") return Label::Unlabeled;
    throw ParseError("unknown class '" + std::string(name) + "'");
}

std::string_view role_name(Role role) {
    switch (role) {
    case Role::Train: return "train";
    case Role::Validation: return "validation";
    case Role::Test: return "test";
    }
    return "train";
}

Role parse_role_name(std::string_view name) {
    if (name == "train") return Role::Train;
    if (name == "validation") return Role::Validation;
    if (name == "test") return Role::Test;
    throw ParseError("unknown corpus role '" + std::string(name) + "'");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace llt

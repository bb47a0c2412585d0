#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace llt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed or tampered input file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-convergence, divergence, ambiguous solution.
class NumericalError : public Error {
public:
    using Error::Error;
};

enum class Label { Normal, Ectopic, Unlabeled };

enum class Role { Train, Validation, Test };

std::string_view label_token(Label label);   // "N", "E", "?"
std::string_view label_name(Label label);    // "Normal", "Ectopic", "Unlabeled"
Label parse_label_token(std::string_view token);
Label parse_label_name(std::string_view name);

std::string_view role_name(Role role);
Role parse_role_name(std::string_view name);

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    static Matrix identity(std::size_t n);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

}  // namespace llt

#pragma once

#include <stdexcept>
#include <string>

namespace milnorflow {

/** @brief Base class of every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** @brief Input outside the mathematical domain of an operation. */
class DomainError : public Error {
public:
    using Error::Error;
};

/** @brief A curve or field construction stage failed; carries the stage tag. */
class ConstructionError : public Error {
public:
    ConstructionError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/** @brief Parametrization speed below the regularity threshold. */
class SingularParametrization : public Error {
public:
    using Error::Error;
};

/** @brief Leaf lookup could not match a frame point. */
class LookupFailure : public Error {
public:
    LookupFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/** @brief Bundle outside the supported pair {(0,1),(1,0)}. */
class UnsupportedBundle : public Error {
public:
    using Error::Error;
};

/** @brief Adaptive step size collapsed during integration. */
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double t) : Error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

/** @brief Period detection started at a zero of the field. */
class StationaryPoint : public Error {
public:
    using Error::Error;
};

}  // namespace milnorflow

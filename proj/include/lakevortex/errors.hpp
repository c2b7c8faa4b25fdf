#pragma once

#include <stdexcept>
#include <string>

namespace lakevortex {

struct GeometryMismatch : std::runtime_error {
    explicit GeometryMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationFailure : std::runtime_error {
    explicit ValidationFailure(const std::string& what) : std::runtime_error(what) {}
};

struct OutOfDomain : std::runtime_error {
    explicit OutOfDomain(const std::string& what) : std::runtime_error(what) {}
};

struct DiagonalSingularity : std::runtime_error {
    explicit DiagonalSingularity(const std::string& what) : std::runtime_error(what) {}
};

struct CollisionImminent : std::runtime_error {
    explicit CollisionImminent(const std::string& what) : std::runtime_error(what) {}
};

struct SupportEscape : std::runtime_error {
    explicit SupportEscape(const std::string& what) : std::runtime_error(what) {}
};

struct CacheMismatch : std::runtime_error {
    explicit CacheMismatch(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lakevortex

#ifndef QRWR_ERRORS_HPP
#define QRWR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qrwr {

/// Input outside the mathematical domain of an operation (negative range,
/// non-positive temperature, p_err outside (0, 0.5), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The requested quantity does not exist, e.g. a trial count that would be
/// infinite because no signal survives the link.
class InfeasibleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed or inconsistent configuration. `where` carries the line number
/// or the section.key that triggered it.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace qrwr

#endif  // QRWR_ERRORS_HPP

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapecomplete {

/// Failure classes surfaced to the command line as machine-parsable tags.
enum class ErrorCategory { io, format, topology, singular, config };

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category)
    {
    }

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct IoError : Error
{
    explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

struct FormatError : Error
{
    explicit FormatError(const std::string& message) : Error(ErrorCategory::format, message) {}
};

struct TopologyError : Error
{
    explicit TopologyError(const std::string& message) : Error(ErrorCategory::topology, message) {}
};

struct SingularError : Error
{
    explicit SingularError(const std::string& message) : Error(ErrorCategory::singular, message) {}
};

struct ConfigError : Error
{
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

} // namespace shapecomplete

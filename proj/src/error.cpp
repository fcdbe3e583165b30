#include "shapecomplete/error.hpp"

namespace shapecomplete {

std::string_view to_string(ErrorCategory category) noexcept
{
    switch (category)
    {
    case ErrorCategory::io: return "IO";
    case ErrorCategory::format: return "FORMAT";
    case ErrorCategory::topology: return "TOPOLOGY";
    case ErrorCategory::singular: return "SINGULAR";
    case ErrorCategory::config: return "CONFIG";
    }
    return "UNKNOWN";
}

} // namespace shapecomplete

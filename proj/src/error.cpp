#include "phenoclust/error.hpp"

namespace phenoclust {

Error::Error(ErrorCategory category, std::string kind, const std::string& message)
    : std::runtime_error(message), category_(category), kind_(std::move(kind)) {}

const char* to_string(ErrorCategory category) noexcept {
    switch (category) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Numerical: return "numerical";
    }
    return "unknown";
}

} // namespace phenoclust

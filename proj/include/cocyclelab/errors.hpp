#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cocyclelab {

enum class error_kind {
    invalid_argument,
    leaf_absent,
    not_on_leaf,
    not_fiber_bunched,
    no_convergence,
    unsupported_system,
    trivial_center,
    degenerate,
    loop_obstruction,
    path_unreachable,
    insufficient_samples,
    structure_violation,
    config,
};

std::string_view to_string(error_kind kind) noexcept;

// Every failure raised by the library carries a machine-readable kind so the
// CLI can map it to a stable exit code.
class lab_error : public std::runtime_error {
public:
    lab_error(error_kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

[[noreturn]] inline void fail(error_kind kind, const std::string& message)
{
    throw lab_error(kind, message);
}

} // namespace cocyclelab

#pragma once

#include <stdexcept>
#include <string>

namespace holosim {

enum class errc {
    cycle_detected,
    undeclared_field,
    out_of_range,
    unknown_field,
    no_eligible_peers,
    duplicate_peer,
    invalid_scenario,
    parse_error,
    validation_error,
    script_exhausted,
    script_mismatch,
    horizon_exceeded,
    state_space_too_large,
    overlapping_members,
    domain_error,
    holon_inactive,
    golden_mismatch,
    io_error,
};

// one error type for the whole library; `kind` drives the cli exit code
struct error : std::runtime_error {
    errc kind;
    error(errc k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

[[noreturn]] inline void fail(errc k, const std::string& what) { throw error(k, what); }

} // namespace holosim

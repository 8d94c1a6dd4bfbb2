#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace breuilkit {

// Bad mathematical input (e.g. a residue class outside its domain).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A brute-force search was refused because its size exceeds the guard.
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

// Something that is mathematically impossible happened; signals a bug or
// corrupted input data (e.g. a cocycle that should be a coboundary is not).
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

// Brute-force guard, overridable through the environment.
inline unsigned long long guard_limit(unsigned long long dflt) {
    if (const char* s = std::getenv("BREUILKIT_GUARD")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && v > 0) return v;
    }
    return dflt;
}

} // namespace breuilkit

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdgen {

/// Three-valued logic used by the predicate evaluator. Unknown covers
/// NULL-propagation and functions outside the evaluation whitelist.
enum class Tri { False, True, Unknown };

inline Tri tri_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::True && b == Tri::True) return Tri::True;
    return Tri::Unknown;
}

inline Tri tri_or(Tri a, Tri b) {
    if (a == Tri::True || b == Tri::True) return Tri::True;
    if (a == Tri::False && b == Tri::False) return Tri::False;
    return Tri::Unknown;
}

inline Tri tri_not(Tri a) {
    if (a == Tri::Unknown) return Tri::Unknown;
    return a == Tri::True ? Tri::False : Tri::True;
}

inline const char* tri_name(Tri t) {
    switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    default: return "unknown";
    }
}

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Lexer/parser failure; carries a 1-based source position when known
/// (line 0 = no position).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what), line_(0), col_(0) {}
    ParseError(const std::string& what, int line, int col)
        : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(col)),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class PlanError : public Error {
public:
    using Error::Error;
};

class EnforceError : public Error {
public:
    using Error::Error;
};

/// Non-fatal findings accumulated by a pipeline stage.
using Warnings = std::vector<std::string>;

// --- string helpers -------------------------------------------------------

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool iequals(std::string_view a, std::string_view b);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
/// Replaces every occurrence of `slot` in `text`.
std::string replace_all(std::string text, std::string_view slot, std::string_view value);

// --- deterministic seeding -------------------------------------------------

/// splitmix64 step; the portable PRNG primitive used everywhere a value must
/// be identical across platforms and execution orders.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Stable seed derivation: hash(seed, index). Instance i of a run and request
/// r of a plan get independent, reproducible streams.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 1));
}

/// Small counter-based RNG over splitmix64; sequence depends only on the seed.
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : state_(splitmix64(seed)) {}

    uint64_t next() {
        state_ = splitmix64(state_);
        return state_;
    }

    /// Uniform in [0, n); n must be > 0.
    uint64_t next_below(uint64_t n) { return next() % n; }

    /// Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

}  // namespace sdgen

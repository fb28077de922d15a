#pragma once

#include <cstdint>
#include <optional>
#include <utility>

namespace ppsub {

// Failure sites of the evaluation pipeline and the operators built on it.
enum class Stage : std::uint8_t {
    interval_op,
    local_map,
    normalize,
    frame,
    intersect,
    conic_fit,
    focus,
    newton,
    gradient,
};

constexpr const char* stage_name(Stage s) {
    switch (s) {
    case Stage::interval_op: return "interval_op";
    case Stage::local_map: return "local_map";
    case Stage::normalize: return "normalize";
    case Stage::frame: return "frame";
    case Stage::intersect: return "intersect";
    case Stage::conic_fit: return "conic_fit";
    case Stage::focus: return "focus";
    case Stage::newton: return "newton";
    case Stage::gradient: return "gradient";
    }
    return "unknown";
}

// Typed evaluation failure: a line of sight parallel to the candidate plane,
// a singular conic system, a zero-containing interval denominator.
// Never an error condition for the caller; oracles map it to "pass".
struct NonEvaluableError {
    Stage stage;
};

// Value-or-NonEvaluable result used by the public evaluation API.
template <class T>
class Fallible {
public:
    Fallible(T value) : value_(std::move(value)) {}
    Fallible(NonEvaluableError err) : stage_(err.stage) {}

    bool ok() const { return value_.has_value(); }
    explicit operator bool() const { return ok(); }

    const T& operator*() const { return *value_; }
    T& operator*() { return *value_; }
    const T* operator->() const { return &*value_; }

    // Meaningful only when !ok().
    Stage failed_stage() const { return stage_; }

private:
    std::optional<T> value_;
    Stage stage_ = Stage::interval_op;
};

} // namespace ppsub

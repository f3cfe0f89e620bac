#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qd {

// Exit codes the CLI maps errors onto.
enum class ExitCode : int { ok = 0, config = 2, solver = 3, fit = 4 };

class Error : public std::runtime_error {
public:
    Error(std::string code, ExitCode exit, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)), exit_(exit) {}

    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(exit_); }

private:
    std::string code_;
    ExitCode exit_;
};

#define QD_DEFINE_ERROR(Name, exit_kind)                   \
    class Name : public Error {                            \
    public:                                                \
        explicit Name(const std::string& what)             \
            : Error(#Name, ExitCode::exit_kind, what) {}   \
    }

QD_DEFINE_ERROR(NegativeRate, config);
QD_DEFINE_ERROR(NonFiniteValue, config);
QD_DEFINE_ERROR(DomainError, config);
QD_DEFINE_ERROR(SchemaError, config);
QD_DEFINE_ERROR(UnknownLine, solver);
QD_DEFINE_ERROR(DegenerateKernel, solver);
QD_DEFINE_ERROR(NonPhysicalSteadyState, solver);
QD_DEFINE_ERROR(PropagationUnstable, solver);
QD_DEFINE_ERROR(ZeroDetectionRate, solver);
QD_DEFINE_ERROR(GridMismatch, solver);
QD_DEFINE_ERROR(NonUniformGrid, solver);
QD_DEFINE_ERROR(DidNotConverge, fit);
QD_DEFINE_ERROR(SingularJacobian, fit);

#undef QD_DEFINE_ERROR

// Parameter validation reports every violation at once, each naming the
// offending field, instead of stopping at the first one.
struct ParamViolation {
    std::string kind;  // "NegativeRate" or "NonFiniteValue"
    std::string field;
};

class ParamValidationError : public Error {
public:
    explicit ParamValidationError(std::vector<ParamViolation> v)
        : Error("ParamValidationError", ExitCode::config, format(v)),
          violations_(std::move(v)) {}

    const std::vector<ParamViolation>& violations() const noexcept { return violations_; }

private:
    static std::string format(const std::vector<ParamViolation>& v) {
        std::string s;
        for (const auto& x : v) {
            if (!s.empty()) s += "; ";
            s += x.kind + "(" + x.field + ")";
        }
        return s;
    }

    std::vector<ParamViolation> violations_;
};

}  // namespace qd
